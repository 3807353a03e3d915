"""Second-order modulus of a narrow pulse: the log-log slope is 1/p.

Run: python examples_scripts/modulus_exponent.py
"""

import numpy as np

from smoothlab import f_eps_r, modulus_curve
from smoothlab.catalog import fit_exponent

EPS = 1e-3


def main():
    f = f_eps_r(EPS, 1)
    deltas = np.geomspace(10 * EPS, 0.1, 8)
    for p in (0.5, 0.8):
        om = modulus_curve(f, 2, deltas, p)
        slope = fit_exponent(deltas, om)[0]
        print(f"p={p}: slope {slope:.3f}, expected {1 / p:.3f}")
        for d, w in zip(deltas, om):
            print(f"    delta={d:.4f}  omega_2={w:.4e}")


if __name__ == "__main__":
    main()
