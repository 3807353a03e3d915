"""Approximation spaces and the L_p best-approximation solver."""

from .spaces import (AlgPoly, ApproxSpace, Expansion, Spline, Trig, bspline_basis,
                     eval_expansion, expansion_derivative, lift_expansion, random_expansion,
                     truncated_power_coeffs, truncated_power_eval)
from .solver import (BestApproxConfig, BestApproxResult, approx_error, best_approx,
                     collocation, default_lattice, oracle_best_approx, residual)
