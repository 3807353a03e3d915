"""Best L_p approximation errors of |x| by algebraic polynomials and of a
periodic pulse by trigonometric polynomials, checked against the exhaustive
oracle on the smallest degree.

Run: python examples_scripts/best_approx_sweep.py
"""

from smoothlab import ApproxSpace, BestApproxConfig, best_approx, oracle_best_approx, phi_eps
from smoothlab.catalog.context import abs_function

P = 0.6


def main():
    cfg = BestApproxConfig(seed=0)
    for label, f, space in [("|x|, AlgPoly", abs_function(), ApproxSpace.AlgPoly),
                            ("pulse, Trig", phi_eps(0.3, centered=True), ApproxSpace.Trig)]:
        print(label)
        for n in (1, 2, 4, 8):
            res = best_approx(f, space(n), P, cfg)
            print(f"    n={n}: E_n = {res.error:.5e}")
        ref = oracle_best_approx(f, space(1), P)
        print(f"    oracle n=1: {ref.error:.5e}")


if __name__ == "__main__":
    main()
