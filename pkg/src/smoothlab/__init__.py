"""Moduli of smoothness and approximation diagnostics in L_p, 0 < p < 1."""

from .approx import (ApproxSpace, BestApproxConfig, BestApproxResult, Expansion, approx_error,
                     best_approx, oracle_best_approx)
from .corefun import (CIRCLE, SYM, UNIT, Domain, PiecewisePoly, f_eps_r, interval_family,
                      periodic_integral, phi_eps, random_piecewise)
from .moduli import (DEFAULT_SPEC, ModulusSpec, dt_modulus, main_part_modulus, modulus,
                     modulus_curve, modulus_integral)
from .quasinorm import DEFAULT_QUAD, QuadratureSpec, lp_quasinorm, weighted_lp_quasinorm

__version__ = "0.1.0"

__all__ = ["ApproxSpace", "BestApproxConfig", "BestApproxResult", "Expansion", "approx_error",
           "best_approx", "oracle_best_approx", "CIRCLE", "SYM", "UNIT", "Domain",
           "PiecewisePoly", "f_eps_r", "interval_family", "periodic_integral", "phi_eps",
           "random_piecewise", "DEFAULT_SPEC", "ModulusSpec", "dt_modulus", "main_part_modulus",
           "modulus", "modulus_curve", "modulus_integral", "DEFAULT_QUAD", "QuadratureSpec",
           "lp_quasinorm", "weighted_lp_quasinorm"]
