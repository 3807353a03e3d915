"""Blow-up sweeps showing that the series and integral terms cannot be weakened.

Both sweeps use ``f_0 = f_{eps,r}`` on the circle along a halving ladder of
``eps`` and compare a left-hand side that stays of order one with a
right-hand side built from ``f_0^(r)`` whose series (or integral) carries an
extra weight ``t^gamma``.  The right-hand side decays like
``eps^(min(1-p, gamma)/p)``, so the ratio grows like
``(1/eps)^(min(1-p, gamma)/p)``; with ``gamma = 0`` it stays bounded.

``PR1T``
    ``E_n(f_0)_p`` against the Jackson bound of
    ``E_n(g)_p^p + sum_{nu>n} nu^(-p-gamma) E_nu(g)_p^p``, ``g = f_0^(r)``,
    i.e. ``w_1(g, 1/n)_p^p + int_0^(1/n) w_1(g, t)_p^p t^(p+gamma-2) dt``.
``PR_SEC2_1``
    ``w_{r+k}(f_0, d)_p`` against
    ``w_k(g, d)_p^p + int_0^d w_k(g, t)_p^p t^(p+gamma-2) dt``.
"""

from __future__ import annotations

import copy
import time
from enum import Enum

import numpy as np

from ..approx import ApproxSpace
from ..errors import ConfigError, Diverging, RecipeDiverged
from .context import Context
from .fitting import fit_exponent
from .report import CheckReport


class SharpnessKind(str, Enum):
    PR1T = "PR1T"
    PR_SEC2_1 = "PR_SEC2_1"


#: p < 1/2 makes the predicted growth per halving exceed 2; gamma > 1 - p
#: keeps the lower-limit correction (eps/scale)^(p+gamma-1) of the integral small
DEFAULTS = {
    SharpnessKind.PR1T: {"p": 0.4, "r": 1, "gamma": 2.0, "n": 4, "ladder": [2, 4, 8, 16],
                         "min_growth": 2.0, "tol": 0.25},
    SharpnessKind.PR_SEC2_1: {"p": 0.4, "r": 1, "k": 1, "gamma": 2.0, "delta": 0.25,
                              "ladder": [2, 4, 8, 16], "min_growth": 2.0, "tol": 0.25},
}

STATEMENTS = {
    SharpnessKind.PR1T: "E_n(f_0)_p / (E_n(g)_p^p + sum_{nu>n} nu^(-p-gamma) E_nu(g)_p^p)^(1/p)"
                        " unbounded in eps, g = f_0^(r)",
    SharpnessKind.PR_SEC2_1: "w_{r+k}(f_0,d)_p / (w_k(g,d)_p^p + int_0^d w_k(g,t)_p^p"
                             " t^(p+gamma-2) dt)^(1/p) unbounded in eps, g = f_0^(r)",
}


def prediction(p: float, gamma: float) -> float:
    """Growth exponent of the ratio in ``1/eps``."""
    return min(1.0 - p, gamma) / p


def resolve_sharpness(kind, overrides: dict | None = None) -> dict:
    kind = SharpnessKind(kind)
    P = copy.deepcopy(DEFAULTS[kind])
    for key, val in (overrides or {}).items():
        if key not in P:
            raise ConfigError(f"{kind.value} has no parameter {key!r}; known: {', '.join(sorted(P))}")
        P[key] = copy.deepcopy(val)
    if not 0 < float(P["p"]) < 1:
        raise ConfigError("sharpness sweeps need 0 < p < 1")
    if float(P["gamma"]) < 0:
        raise ConfigError("gamma must be >= 0")
    return P


def _integral(ctx, desc, deriv, k, p, a_exp, delta):
    try:
        return ctx.integral(desc, "trig", deriv, k, p, a_exp, [delta])[float(delta)]
    except Diverging as exc:
        raise RecipeDiverged(f"modulus integral diverges: {exc}") from exc


def _rows(ctx: Context, kind: SharpnessKind, P: dict):
    p, r, gamma = float(P["p"]), int(P["r"]), float(P["gamma"])
    a_exp = 2.0 - p - gamma
    scale = 1.0 / int(P["n"]) if kind is SharpnessKind.PR1T else float(P["delta"])
    eps = [scale / float(m) for m in P["ladder"]]
    if any(b >= a for a, b in zip(eps, eps[1:])) or eps[0] >= scale:
        raise ConfigError("the eps ladder must descend and start below 1/n (resp. delta)")
    lhs, rhs, brackets = [], [], []
    for e in eps:
        desc = {"family": "f_eps_r", "eps": e, "r": r}
        if kind is SharpnessKind.PR1T:
            n, k = int(P["n"]), 1
            lhs.append(ctx.error(desc, 0, ApproxSpace.Trig(n), p))
        else:
            k = int(P["k"])
            lhs.append(ctx.curve(desc, "trig", 0, r + k, [scale], p)[scale])
        first = ctx.curve(desc, "trig", r, k, [scale], p)[scale]
        I = _integral(ctx, desc, r, k, p, a_exp, scale)
        rhs.append((first ** p + I.value ** p) ** (1.0 / p))
        brackets.append([I.lower, I.upper])
    return eps, lhs, rhs, brackets


def sharpness_sweep(kind, params: dict | None = None, ctx: Context | None = None,
                    seed: int = 0) -> CheckReport:
    """Blow-up ratio along the ``eps`` ladder ``scale / ladder``.

    ``scale`` is ``1/n`` for ``PR1T`` and ``delta`` for ``PR_SEC2_1``.  For
    ``gamma > 0`` the verdict requires every halving step to multiply the
    ratio by at least ``min_growth`` and the fitted exponent in ``1/eps`` to
    lie within ``tol`` of :func:`prediction`.  For ``gamma = 0`` (the
    convergent form) the fitted exponent must not exceed ``tol``.
    """
    kind = SharpnessKind(kind)
    P = resolve_sharpness(kind, params)
    ctx = ctx if ctx is not None else Context(seed=seed)
    t0 = time.perf_counter()
    eps, lhs, rhs, brackets = _rows(ctx, kind, P)
    inv = [1.0 / e for e in eps]
    ratios = np.asarray(lhs) / np.asarray(rhs)
    slope, icpt, res = fit_exponent(inv, ratios)
    steps = ratios[1:] / ratios[:-1]
    gamma, tol = float(P["gamma"]), float(P["tol"])
    pred = prediction(float(P["p"]), gamma)
    spacing = np.log(np.asarray(inv[1:]) / np.asarray(inv[:-1])) / np.log(2.0)
    per_halving = steps ** (1.0 / spacing)
    if gamma > 0:
        passed = bool(np.all(per_halving >= float(P["min_growth"])) and abs(slope - pred) <= tol)
        crit = (f"ratio grows by >= {float(P['min_growth']):g} per eps-halving and "
                f"|exponent - {pred:.4g}| <= {tol:g}")
    else:
        passed = bool(slope <= tol and np.all(np.isfinite(ratios)))
        crit = f"exponent <= {tol:g} (no growth)"
    stats = {"max_ratio": float(np.max(ratios)), "min_ratio": float(np.min(ratios)),
             "prediction": pred, "min_growth_per_halving": float(np.min(per_halving)),
             "lhs_spread": float(max(lhs) / min(lhs))}
    fitted = {"ratio_vs_inv_eps": {"slope": slope, "intercept": icpt, "residual": res}}
    return CheckReport(kind.value, P, "inv_eps", inv, [float(v) for v in lhs],
                       [float(v) for v in rhs], [float(v) for v in ratios], fitted, passed, crit,
                       stats, 0, {"integral_brackets": brackets,
                                  "statement": STATEMENTS[kind]},
                       time.perf_counter() - t0)


__all__ = ["SharpnessKind", "sharpness_sweep", "resolve_sharpness", "prediction", "DEFAULTS"]
