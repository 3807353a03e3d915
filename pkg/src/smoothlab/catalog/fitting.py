"""Log-log exponent fits and bracketed tail sums of sampled sequences."""

from __future__ import annotations

import math
from typing import Mapping, NamedTuple

import numpy as np
from scipy.special import zeta

from ..errors import InsufficientSamples, NonPositiveData


def fit_exponent(xs, ys) -> tuple[float, float, float]:
    """Least-squares line through ``(log x, log y)``.

    Returns
    -------
    slope, intercept, max_residual
        ``max_residual`` is the largest absolute deviation in log units.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape:
        raise ValueError("xs and ys must have the same length")
    if x.size < 3:
        raise InsufficientSamples("an exponent fit needs at least 3 points")
    if np.any(~(x > 0)) or np.any(~(y > 0)):
        raise NonPositiveData("exponent fits need strictly positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return float(slope), float(intercept), float(np.max(np.abs(resid)))


class TailSum(NamedTuple):
    """Bracketed value of ``sum_{nu > n} nu^q E_nu^p``."""

    value: float
    model: dict
    lower: float
    upper: float
    divergent: bool


def _block(lo: int, hi: int, q: float, p: float, e_lo: float, e_hi: float):
    """``sum_{lo < nu <= hi} nu^q E_nu^p`` with bounds from monotonicity.

    The midpoint interpolates ``E`` by the power law through both ends.
    """
    nu = np.arange(lo + 1, hi + 1, dtype=float)
    w = nu ** q
    s = float(np.sum(w))
    lower = e_hi ** p * s
    upper = e_lo ** p * s
    if e_lo > 0 and e_hi > 0:
        beta = math.log(e_lo / e_hi) / math.log(hi / lo)
        mid = float(np.sum(w * (e_lo * (nu / lo) ** -beta) ** p))
        mid = min(max(mid, lower), upper)
    else:
        mid = 0.5 * (lower + upper)
    return mid, lower, upper


def _power_tail(eV: float, V: int, beta: float, p: float, q: float) -> float:
    """``sum_{nu > V} nu^q (eV (nu / V)^-beta)^p`` or ``inf`` if divergent."""
    s = beta * p - q
    if s <= 1.0:
        return math.inf
    return eV ** p * V ** (beta * p) * float(zeta(s, V + 1))


def tail_sum(samples: Mapping[int, float], q: float, n: int, *, p: float,
             min_factor: int = 8) -> TailSum:
    """Bracket ``sum_{nu = n+1}^inf nu^q E_nu^p`` from sparse samples of ``E``.

    Parameters
    ----------
    samples
        ``nu -> E_nu`` at increasing (typically dyadic) ``nu``.  Must contain
        ``n`` and reach at least ``min_factor * n``.  ``E`` is assumed
        nonincreasing; small violations are clipped to the running minimum.
    q, p
        Weight exponent and power.

    Returns
    -------
    TailSum
        Between consecutive samples the sum is bracketed by monotonicity and
        estimated by power-law interpolation.  Past the last sample ``V`` a
        power law ``E_nu = E_V (nu / V)^-beta`` is fitted to the last three
        samples and summed with the Hurwitz zeta function.  ``lower`` omits
        the tail; ``upper`` uses the slowest decay rate among the last
        samples.  ``divergent`` is set when ``beta p - q <= 1``.
    """
    if n not in samples:
        raise InsufficientSamples(f"no sample at nu = n = {n}")
    keys = [k for k in sorted(int(k) for k in samples) if k >= n]
    if keys[-1] < min_factor * n:
        raise InsufficientSamples(f"samples reach nu = {keys[-1]}, need {min_factor * n}")
    vals = np.minimum.accumulate(np.array([float(samples[k]) for k in keys]))
    if np.any(vals < 0):
        raise NonPositiveData("best approximation errors cannot be negative")
    mid = lower = upper = 0.0
    for i in range(len(keys) - 1):
        m, lo, up = _block(keys[i], keys[i + 1], q, p, vals[i], vals[i + 1])
        mid, lower, upper = mid + m, lower + lo, upper + up
    V, eV = keys[-1], float(vals[-1])
    if eV == 0.0:
        model = {"kind": "zero", "last_nu": V}
        return TailSum(float(mid), model, float(lower), float(upper), False)
    tk, tv = keys[-3:], vals[-3:]
    if len(tk) == 3 and np.all(tv > 0):
        slope, icpt, res = fit_exponent(tk, tv)
        beta = max(-slope, 0.0)
        pair = [math.log(tv[i] / tv[i + 1]) / math.log(tk[i + 1] / tk[i]) for i in range(2)]
        beta_slow = max(min(pair + [beta]), 0.0)
    else:
        beta = beta_slow = 0.0
        icpt, res = math.log(eV), 0.0
    tail = _power_tail(eV, V, beta, p, q)
    model = {"kind": "power", "beta": float(beta), "beta_slow": float(beta_slow),
             "log_c": float(icpt), "residual": float(res), "last_nu": V}
    upper += max(tail, _power_tail(eV, V, beta_slow, p, q))
    divergent = not math.isfinite(tail)
    return TailSum(float(mid + tail), model, float(lower), float(upper), divergent)
