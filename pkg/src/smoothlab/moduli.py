"""Finite differences and moduli of smoothness in L_p.

Four moduli are provided:

* :func:`modulus` -- the ordinary r-th modulus, ``sup_{0<h<=delta}`` of the
  L_p norm of the forward difference over ``[a, b - r h]`` (whole period on
  the circle);
* :func:`dt_modulus` -- the Ditzian-Totik modulus on ``[-1, 1]`` with step
  ``h * sqrt(1 - x^2)`` and the symmetric difference;
* :func:`main_part_modulus` -- the weighted variant measured on
  ``[-1 + 2 r^2 h^2, 1 - 2 r^2 h^2]`` with weight ``(1 - x^2)^(sigma/2)``;
* :func:`modulus_integral` -- ``(int_0^delta w(t)^p t^(-a) dt)^(1/p)`` for any
  of the above, bracketed on a dyadic grid.

For piecewise polynomials the forward-difference field is itself built as an
exact piecewise polynomial.  The supremum over ``h`` is taken on a log grid
that always contains ``delta``; the best grid maxima are then polished with a
bounded Brent search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.optimize import minimize_scalar

from .corefun import Domain, PiecewisePoly, PiecewiseSmooth, PointFunction, combine, roundoff_floor
from .errors import DegenerateInterval, Diverging, OutOfDomain
from .quasinorm import DEFAULT_QUAD, QuadratureSpec, as_function, as_pnorm, lp_power


@dataclass(frozen=True)
class ModulusSpec:
    """Discretisation of ``sup_{0<h<=delta}``.

    ``h_grid`` log-spaced steps cover ``[h_span * delta, delta]``; the
    ``polish`` largest local maxima on the grid are refined by a bounded
    scalar search.
    """

    h_grid: int = 64
    quad: QuadratureSpec = field(default_factory=lambda: DEFAULT_QUAD)
    h_span: float = 1e-3
    polish: int = 4

    def __post_init__(self):
        if self.h_grid < 8:
            raise ValueError("h_grid must be >= 8")
        if not 0 < self.h_span < 1:
            raise ValueError("h_span must lie in (0, 1)")


DEFAULT_SPEC = ModulusSpec()


def stencil(r: int) -> list[tuple[int, float]]:
    """Forward-difference weights ``(nu, (-1)^nu C(r, nu))``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    return [(nu, float((-1) ** nu * comb(r, nu))) for nu in range(r + 1)]


# -- forward differences ---------------------------------------------------

def finite_difference(f, r: int, h: float, x):
    """``sum_nu (-1)^nu C(r,nu) f(x + nu h)``; ``r = 0`` returns ``f(x)``."""
    f = as_function(f)
    x = np.asarray(x, dtype=float)
    dom = f.domain
    if not dom.periodic:
        slop = 1e-12 * dom.length
        if np.any(x < dom.a - slop) or np.any(x + r * h > dom.b + slop):
            raise OutOfDomain("difference nodes leave the interval")
    out = sum(w * np.asarray(f(np.clip(x + nu * h, dom.a, dom.b) if not dom.periodic
                                 else x + nu * h), dtype=float)
              for nu, w in stencil(r))
    return out if np.ndim(out) else float(out)


def difference_field(f, r: int, h: float):
    """``x -> Delta_h^r f(x)`` as a function on ``A_{rh}`` (``None`` if empty)."""
    f = as_function(f)
    dom = f.domain
    if h < 0:
        raise ValueError("h must be >= 0")
    lo, hi = dom.a, dom.b if dom.periodic else dom.b - r * h
    if not hi > lo:
        return None
    if isinstance(f, PiecewisePoly):
        if dom.periodic:
            terms = [(w, f.shifted(nu * h)) for nu, w in stencil(r)]
        else:
            terms = [(w, f.shifted(nu * h, lo, hi)) for nu, w in stencil(r)]
        return combine(terms)
    brk = np.asarray(getattr(f, "interior_breaks", ()), float)
    moved = np.concatenate([brk - nu * h for nu in range(r + 1)]) if brk.size else brk
    sub = dom if dom.periodic else Domain(lo, hi)
    if dom.periodic and moved.size:
        moved = np.mod(moved - dom.a, dom.length) + dom.a
    moved = tuple(np.unique(moved[(moved > lo) & (moved < hi)]))

    def func(x):
        return finite_difference(f, r, h, x)

    if isinstance(f, PointFunction):
        return PointFunction(func, sub, f.smoothness, moved)
    return PiecewiseSmooth(func, sub, moved, getattr(f, "scan", 256),
                           roundoff_floor(f, 2.0 ** r))


def difference_power(f, r: int, h: float, p, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``||Delta_h^r f||_p^p`` over ``A_{rh}``."""
    g = difference_field(f, r, h)
    return 0.0 if g is None else lp_power(g, p, quad=quad)


# -- Ditzian-Totik differences ----------------------------------------------

def _phi(x):
    return np.sqrt(np.clip((1.0 - x) * (1.0 + x), 0.0, None))


def dt_half_width(r: int, h: float) -> float:
    """Half-width ``X`` of the admissible set ``[-X, X]`` of the DT difference.

    ``x + (r h / 2) phi(x) <= 1`` is equivalent to
    ``x <= (1 - c^2) / (1 + c^2)`` with ``c = r h / 2``.
    """
    c = 0.5 * r * abs(h)
    return (1.0 - c * c) / (1.0 + c * c)


def _require_sym(f):
    d = f.domain
    if d.periodic or abs(d.a + 1.0) > 1e-12 or abs(d.b - 1.0) > 1e-12:
        raise OutOfDomain("Ditzian-Totik differences need a function on [-1, 1]")


def dt_difference(f, r: int, h: float, x):
    """Symmetric difference with step ``h phi(x)``; zero off the admissible set."""
    f = as_function(f)
    _require_sym(f)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise OutOfDomain("x must lie in [-1, 1]")
    ph = _phi(x)
    half = 0.5 * r * h * ph
    ok = (x + half <= 1.0 + 1e-14) & (x - half >= -1.0 - 1e-14) & (np.abs(x) < 1.0)
    xs = np.where(ok, x, 0.0)
    ps = np.where(ok, ph, 0.0)
    total = np.zeros_like(xs)
    for k, w in stencil(r):
        total = total + w * np.asarray(f(np.clip(xs + (0.5 * r - k) * h * ps, -1.0, 1.0)), float)
    out = np.where(ok, total, 0.0)
    return out if out.ndim else float(out)


def _dt_breaks(breaks, r, h, X):
    """Points of ``(-X, X)`` mapped onto a break of ``f`` by some DT node."""
    out = []
    for k in range(r + 1):
        a = (0.5 * r - k) * h
        for b in breaks:
            if a == 0.0:
                cands = [b]
            else:
                disc = math.sqrt(max(1.0 + a * a - b * b, 0.0))
                cands = [(b + s * abs(a) * disc) / (1.0 + a * a) for s in (-1.0, 1.0)]
                cands = [x for x in cands if (x - b) * a <= 0.0]
            out.extend(x for x in cands if -X < x < X)
    return tuple(sorted(set(out)))


def dt_difference_field(f, r: int, h: float):
    """The DT difference restricted to its admissible set (``None`` if null)."""
    f = as_function(f)
    _require_sym(f)
    X = dt_half_width(r, h)
    if not X > 0:
        return None
    brk = np.asarray(getattr(f, "interior_breaks", ()), float)

    def func(x):
        x = np.asarray(x, dtype=float)
        ph = _phi(x)
        total = np.zeros_like(x)
        for k, w in stencil(r):
            total = total + w * np.asarray(f(np.clip(x + (0.5 * r - k) * h * ph, -1.0, 1.0)), float)
        return total

    return PiecewiseSmooth(func, Domain(-X, X), _dt_breaks(brk, r, h, X),
                           max(256, getattr(f, "scan", 256)), roundoff_floor(f, 2.0 ** r))


# -- sup over h --------------------------------------------------------------

def _h_grid(delta: float, spec: ModulusSpec) -> np.ndarray:
    g = delta * np.logspace(math.log10(spec.h_span), 0.0, spec.h_grid)
    g[-1] = delta
    return g


def sup_over_h(power_at, delta: float, spec: ModulusSpec = DEFAULT_SPEC):
    """Maximise ``power_at(h)`` over ``(0, delta]``; returns ``(value, h)``."""
    cache = {}

    def F(h):
        h = float(h)
        if h not in cache:
            cache[h] = float(power_at(h))
        return cache[h]

    hs = _h_grid(delta, spec)
    vals = np.array([F(h) for h in hs])
    best = int(np.argmax(vals))
    best_val, best_h = vals[best], hs[best]
    if spec.polish and best_val > 0:
        n = len(hs)
        peaks = [i for i in range(n)
                 if vals[i] > 0 and (i == 0 or vals[i] >= vals[i - 1])
                 and (i == n - 1 or vals[i] >= vals[i + 1])]
        peaks.sort(key=lambda i: (-vals[i], i))
        for i in peaks[: spec.polish]:
            lo = hs[max(i - 1, 0)]
            hi = hs[min(i + 1, n - 1)]
            if i == 0:
                lo = 0.5 * hs[0]
            res = minimize_scalar(lambda h: -F(h), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-9 * delta})
            h = float(min(res.x, delta))
            v = F(h)
            if v > best_val:
                best_val, best_h = v, h
    return best_val, best_h


def _finish(power, h, p, return_h):
    val = power ** (1.0 / as_pnorm(p).p)
    return (val, h) if return_h else val


def _check_delta(f, r, delta):
    if not delta > 0:
        raise ValueError("delta must be positive")
    dom = f.domain
    if not dom.periodic and delta > dom.length / r * (1 + 1e-12):
        raise OutOfDomain("delta exceeds (b - a) / r")


def modulus(f, r: int, delta: float, p, spec: ModulusSpec = DEFAULT_SPEC, return_h: bool = False):
    """``omega_r(f, delta)_p``; with ``return_h`` also the maximising step."""
    f = as_function(f)
    _check_delta(f, r, delta)
    power, h = sup_over_h(lambda h: difference_power(f, r, h, p, spec.quad), delta, spec)
    return _finish(power, h, p, return_h)


def dt_power(f, r: int, h: float, p, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    g = dt_difference_field(f, r, h)
    return 0.0 if g is None else lp_power(g, p, quad=quad)


def dt_modulus(f, r: int, delta: float, p, spec: ModulusSpec = DEFAULT_SPEC, return_h: bool = False):
    """Ditzian-Totik modulus ``omega_r^phi(f, delta)_p`` on ``[-1, 1]``."""
    f = as_function(f)
    _require_sym(f)
    if not delta > 0:
        raise ValueError("delta must be positive")
    power, h = sup_over_h(lambda h: dt_power(f, r, h, p, spec.quad), delta, spec)
    return _finish(power, h, p, return_h)


def main_part_power(f, r: int, h: float, p, sigma: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    lo, hi = -1.0 + 2.0 * r * r * h * h, 1.0 - 2.0 * r * r * h * h
    if not hi > lo:
        return 0.0
    g = dt_difference_field(f, r, h)
    if g is None:
        return 0.0
    return lp_power(g, p, interval=(lo, hi), quad=quad, sigma=sigma)


def main_part_modulus(f, r: int, delta: float, p, sigma: float,
                      spec: ModulusSpec = DEFAULT_SPEC, return_h: bool = False):
    """Weighted main-part modulus with weight ``phi^sigma``."""
    f = as_function(f)
    _require_sym(f)
    if not delta > 0:
        raise ValueError("delta must be positive")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if 2.0 * r * r * delta * delta >= 1.0:
        raise DegenerateInterval("[-1 + 2 r^2 delta^2, 1 - 2 r^2 delta^2] is empty")
    power, h = sup_over_h(lambda h: main_part_power(f, r, h, p, sigma, spec.quad), delta, spec)
    return _finish(power, h, p, return_h)


# -- curves and integrals ----------------------------------------------------

def _power_fn(f, r, p, variant, sigma, quad):
    if variant == "plain":
        return lambda h: difference_power(f, r, h, p, quad)
    if variant == "dt":
        _require_sym(f)
        return lambda h: dt_power(f, r, h, p, quad)
    if variant == "main":
        _require_sym(f)
        if sigma is None:
            raise ValueError("main-part moduli need an explicit sigma")
        return lambda h: main_part_power(f, r, h, p, sigma, quad)
    raise ValueError(f"unknown modulus variant {variant!r}")


def modulus_curve(f, r: int, deltas, p, spec: ModulusSpec = DEFAULT_SPEC,
                  variant: str = "plain", sigma: float | None = None) -> np.ndarray:
    """Moduli at several ``delta`` from one shared step grid.

    The values are running maxima over a single log grid (containing every
    requested ``delta``), so the returned curve is exactly nondecreasing.
    """
    f = as_function(f)
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0):
        raise ValueError("deltas must be positive")
    if variant == "plain":
        _check_delta(f, r, float(np.max(deltas)))
    if variant == "main" and 2.0 * r * r * float(np.max(deltas)) ** 2 >= 1.0:
        raise DegenerateInterval("[-1 + 2 r^2 delta^2, 1 - 2 r^2 delta^2] is empty")
    power_at = _power_fn(f, r, p, variant, sigma, spec.quad)
    lo, hi = float(np.min(deltas)) * spec.h_span, float(np.max(deltas))
    per_decade = (spec.h_grid - 1) / math.log10(1.0 / spec.h_span)
    count = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    grid = np.unique(np.concatenate([np.logspace(math.log10(lo), math.log10(hi), count), deltas]))
    vals = np.array([power_at(h) for h in grid])
    run = np.maximum.accumulate(vals)
    idx = np.searchsorted(grid, deltas)
    return run[idx] ** (1.0 / as_pnorm(p).p)


@dataclass(frozen=True)
class ModulusIntegral:
    """Bracketed value of ``(int_0^delta w(t)^p t^(-a) dt)^(1/p)``."""

    value: float
    lower: float
    upper: float
    diverging: bool
    ts: tuple
    omegas: tuple

    def __float__(self):
        return self.value


def _seg_int(lo, hi, e):
    """``int_lo^hi t^e dt``."""
    if abs(e + 1.0) < 1e-12:
        return math.log(hi / lo)
    return (hi ** (e + 1.0) - lo ** (e + 1.0)) / (e + 1.0)


def modulus_integral(f, r: int, p, a_exp: float, delta: float, spec: ModulusSpec = DEFAULT_SPEC,
                     levels: int = 20, variant: str = "plain", sigma: float | None = None,
                     omega=None) -> ModulusIntegral:
    """Dyadic bracketing of ``(int_0^delta omega_r(f, t)_p^p t^(-a_exp) dt)^(1/p)``.

    On each ``[t_{j+1}, t_j]``, ``t_j = delta 2^-j``, monotonicity of the
    modulus gives lower/upper bounds; the estimate integrates the power-law
    interpolant of ``omega^p`` exactly.  Below ``t_J`` the last level's power
    law is extrapolated.  ``omega`` may be passed as a callable
    ``deltas -> values`` to reuse precomputed moduli.

    Raises :class:`Diverging` (with the result attached) when the lower
    bracket contributions stop decaying over the last five levels.
    """
    pn = as_pnorm(p)
    ts = delta * 2.0 ** -np.arange(levels + 1)
    if omega is None:
        om = modulus_curve(f, r, ts[::-1], pn, spec, variant, sigma)[::-1]
    else:
        om = np.asarray(omega(ts), dtype=float)
    w = om ** pn.p
    lower = upper = mid = 0.0
    lows = []
    for j in range(levels):
        hi, lo = ts[j], ts[j + 1]
        base = _seg_int(lo, hi, -a_exp)
        lows.append(w[j + 1] * base)
        lower += w[j + 1] * base
        upper += w[j] * base
        if w[j] > 0 and w[j + 1] > 0:
            beta = math.log(w[j] / w[j + 1]) / math.log(hi / lo)
            A = w[j] / hi ** beta
            mid += A * _seg_int(lo, hi, beta - a_exp)
        else:
            mid += 0.5 * (w[j] + w[j + 1]) * base
    tail_mid = tail_up = 0.0
    diverging = False
    tJ, wJ = ts[-1], w[-1]
    if wJ > 0:
        beta = math.log(w[-2] / wJ) / math.log(2.0) if w[-2] > 0 else 0.0
        e = beta - a_exp + 1.0
        if e > 0:
            tail_mid = wJ * tJ ** (1.0 - a_exp) / e
            tail_up = wJ * tJ ** (1.0 - a_exp) / (1.0 - a_exp) if a_exp < 1 else tail_mid
            tail_up = max(tail_up, tail_mid)
        else:
            diverging = True
            tail_mid = tail_up = math.inf
    last = np.asarray(lows[-6:])
    if last.size >= 6 and np.all(last > 0) and np.all(last[1:] / last[:-1] >= 1.0):
        diverging = True
    inv = 1.0 / pn.p
    res = ModulusIntegral(value=(mid + tail_mid) ** inv, lower=lower ** inv,
                          upper=(upper + tail_up) ** inv, diverging=diverging,
                          ts=tuple(float(t) for t in ts), omegas=tuple(float(v) for v in om))
    if diverging:
        raise Diverging("modulus integral does not converge at t -> 0", res)
    return res
