"""Registry of runnable inequality checks.

Every check evaluates a left-hand side and a right-hand side over a sweep
(``n``, ``delta``, a random sample index, ...) and judges the ratios:

``bounded``
    max ratio below ``cap`` and no growth trend (log-log slope of the
    ratio against ``n`` or ``1/delta`` at most ``max_slope``);
``lower``
    min ratio above ``floor`` and no decay trend;
``exponent`` / ``exponent_le``
    fitted log-log slope of the left-hand side within ``tol`` of (or at most
    ``tol`` above) a target;
``spread``
    ``max ratio / min ratio`` below ``cap``;
``zero_violations``
    every row's left-hand side at most its right-hand side;
``decreasing``
    the left-hand side strictly decreases along the sweep.

Constants in the inequalities are unknown, so all verdicts are about
boundedness and trends, never about a specific constant.
"""

from __future__ import annotations

import copy
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from ..approx import ApproxSpace, residual
from ..approx.spaces import Expansion, random_expansion, truncated_power_coeffs
from ..corefun import combine
from ..errors import ConfigError, Diverging, RecipeDiverged
from ..moduli import (difference_field, difference_power, dt_modulus, modulus)
from ..quasinorm import lp_quasinorm, weighted_lp_quasinorm
from .context import Context, dyadic, root
from .fitting import fit_exponent, tail_sum
from .report import CheckReport


class CheckId(str, Enum):
    JACKSON_TRIG = "JACKSON_TRIG"
    JACKSON_SPLINE = "JACKSON_SPLINE"
    JACKSON_ALG = "JACKSON_ALG"
    DIRECT_TRIG = "DIRECT_TRIG"
    SIMUL_TRIG = "SIMUL_TRIG"
    INVDER_TRIG = "INVDER_TRIG"
    BRIDGE_TRIG = "BRIDGE_TRIG"
    INVMOD_TRIG = "INVMOD_TRIG"
    JACKSON2_TRIG = "JACKSON2_TRIG"
    LOWER_TRIG = "LOWER_TRIG"
    DIRECT_SPLINE = "DIRECT_SPLINE"
    SIMUL_SPLINE = "SIMUL_SPLINE"
    INVDER_SPLINE = "INVDER_SPLINE"
    BRIDGE_SPLINE = "BRIDGE_SPLINE"
    INVMOD_SPLINE = "INVMOD_SPLINE"
    LOWER_SPLINE = "LOWER_SPLINE"
    DIRECT_ALG = "DIRECT_ALG"
    SIMUL_ALG = "SIMUL_ALG"
    INVDER_ALG = "INVDER_ALG"
    BRIDGE_ALG = "BRIDGE_ALG"
    INVMOD_ALG = "INVMOD_ALG"
    DT_SCALING = "DT_SCALING"
    LOWER_ALG = "LOWER_ALG"
    STECHKIN_NIK = "STECHKIN_NIK"
    NIKOLSKII_T = "NIKOLSKII_T"
    NIKOLSKII_S = "NIKOLSKII_S"
    NIKOLSKII_P = "NIKOLSKII_P"
    MARKOV_S = "MARKOV_S"
    SPLINE_EQUIV = "SPLINE_EQUIV"
    MODULI_PROPS = "MODULI_PROPS"
    LP_DERIV_DEFECT = "LP_DERIV_DEFECT"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Sweep:
    name: str
    values: list
    lhs: list
    rhs: list
    extras: dict


@dataclass(frozen=True)
class Recipe:
    id: CheckId
    description: str
    statement: str
    defaults: dict
    compute: Callable[[Context, dict], Sweep]


# -- defaults -----------------------------------------------------------------

N_SWEEP = [4, 8, 16, 32]
DELTAS = [2.0 ** -k for k in range(3, 9)]
BOUNDED = {"kind": "bounded", "cap": 1e3, "max_slope": 0.1}
LOWER = {"kind": "lower", "floor": 1e-3, "min_slope": -0.1}


def f_eps(eps: float, r: int) -> dict:
    return {"family": "f_eps_r", "eps": eps, "r": r}


# -- space helpers ------------------------------------------------------------

def space(kind: str, n: int, order: int = 0, sigma: float = 0.0) -> ApproxSpace:
    if kind == "trig":
        return ApproxSpace.Trig(n)
    if kind == "spline":
        return ApproxSpace.Spline(order, n)
    return ApproxSpace.AlgPoly(n, sigma)


def _tail(samples, q, n, p):
    t = tail_sum(samples, q, n, p=p)
    if t.divergent:
        raise RecipeDiverged(f"series with weight nu^{q:g} diverges (fitted decay {t.model})")
    return t


def _deriv_samples(ctx, P, kind, nmin, nmax):
    """``nu -> E`` of the ``r``-th derivative in its own space, ``nu`` dyadic up to ``8 nmax``."""
    r, p = P["r"], P["p"]
    spaces = {}
    for nu in dyadic(nmin, 8 * nmax):
        if kind == "alg":
            spaces[nu] = space("alg", nu - r, sigma=r)
        else:
            spaces[nu] = space(kind, nu, P.get("m", 0) - r)
    return ctx.error_samples(P["f"], r, spaces, p)


def _series_term(kind, p):
    """``(weight exponent q, power of n in front)`` of the derivative series."""
    if kind == "alg":
        return 1.0 - 2.0 * p, 2.0 - 2.0 / p
    return -p, 1.0 - 1.0 / p


def _fspace(kind, P, n):
    return space(kind, n, P.get("m", 0))


def _deriv_error(ctx, P, kind, n, k):
    """``||w (f^(k) - B_n^(k))||_p`` with ``B_n`` the best approximant of ``f``."""
    p = P["p"]
    best = ctx.best(P["f"], 0, _fspace(kind, P, n), p)
    g = ctx.function(P["f"], kind, k)
    res = residual(g, best.expansion.derivative(k))
    if kind == "alg":
        return weighted_lp_quasinorm(res, p, float(k), quad=ctx.quad)
    return lp_quasinorm(res, p, quad=ctx.quad)


# -- recipes: direct, simultaneous and inverse estimates ------------------------

def direct(kind):
    def compute(ctx, P):
        p, r, ns = P["p"], P["r"], P["n"]
        samples = _deriv_samples(ctx, P, kind, min(ns), max(ns))
        q, front = _series_term(kind, p)
        lhs, rhs, brackets = [], [], []
        errs = ctx.pmap(lambda n: ctx.error(P["f"], 0, _fspace(kind, P, n), p), ns)
        for n, e in zip(ns, errs):
            t = _tail(samples, q, n, p)
            lhs.append(e)
            rhs.append(n ** -r * (samples[n] + n ** front * root(t.value, p)))
            brackets.append([t.lower, t.upper])
        return Sweep("n", list(ns), lhs, rhs, {"tail_brackets": brackets,
                                                "derivative_errors": _listed(samples)})
    return compute


def simul(kind):
    def compute(ctx, P):
        p, r, ns = P["p"], P["r"], P["n"]
        samples = _deriv_samples(ctx, P, kind, min(ns), max(ns))
        q, front = _series_term(kind, p)
        lhs = ctx.pmap(lambda n: _deriv_error(ctx, P, kind, n, r), ns)
        rhs, brackets = [], []
        for n in ns:
            t = _tail(samples, q, n, p)
            rhs.append(samples[n] + n ** front * root(t.value, p))
            brackets.append([t.lower, t.upper])
        return Sweep("n", list(ns), lhs, rhs, {"tail_brackets": brackets,
                                                "derivative_errors": _listed(samples)})
    return compute


def invder(kind):
    def compute(ctx, P):
        p, k, ns = P["p"], P["k"], P["n"]
        spaces = {nu: _fspace(kind, P, nu) for nu in dyadic(min(ns), 8 * max(ns))}
        samples = ctx.error_samples(P["f"], 0, spaces, p)
        lhs = ctx.pmap(lambda n: _deriv_error(ctx, P, kind, n, k), ns)
        rhs, brackets = [], []
        for n in ns:
            t = _tail(samples, k * p - 1.0, n, p)
            rhs.append(n ** k * samples[n] + root(t.value, p))
            brackets.append([t.lower, t.upper])
        return Sweep("n", list(ns), lhs, rhs, {"tail_brackets": brackets,
                                                "errors": _listed(samples)})
    return compute


def jackson(kind):
    def compute(ctx, P):
        p, ns = P["p"], P["n"]
        k = P["k"]
        variant = "dt" if kind == "alg" else "plain"
        om = ctx.curve(P["f"], kind, 0, k, [1.0 / n for n in ns], p, variant)
        order = k if kind == "spline" else 0
        lhs = ctx.pmap(lambda n: ctx.error(P["f"], 0, space(kind, n, order), p), ns)
        rhs = [om[1.0 / n] for n in ns]
        return Sweep("n", list(ns), lhs, rhs, {})
    return compute


def jackson2_trig(ctx, P):
    p, r, k, ns = P["p"], P["r"], P["k"], P["n"]
    I = _integrals(ctx, P["f"], "trig", r, k, p, 2.0 - p, [1.0 / n for n in ns])
    lhs = ctx.pmap(lambda n: ctx.error(P["f"], 0, space("trig", n), p), ns)
    rhs = [n ** (-r - 1.0 / p + 1.0) * I[1.0 / n].value for n in ns]
    return Sweep("n", list(ns), lhs, rhs, {"integral_brackets": _brackets(I, ns)})


def lower(kind):
    def compute(ctx, P):
        p, s, ns = P["p"], P["s"], P["n"]
        variant = "dt" if kind == "alg" else "plain"
        om = ctx.curve(P["f"], kind, 0, s, [1.0 / n for n in ns], p, variant)
        order = P.get("m", 0)
        lhs = ctx.pmap(lambda n: ctx.error(P["f"], 0, space(kind, n, order), p), ns)
        rhs = [om[1.0 / n] for n in ns]
        return Sweep("n", list(ns), lhs, rhs, {})
    return compute


# -- recipes: moduli of functions and derivatives ------------------------------

def _integrals(ctx, desc, kind, deriv, r, p, a_exp, deltas, variant="plain", sigma=None):
    try:
        return ctx.integral(desc, kind, deriv, r, p, a_exp, deltas, variant=variant, sigma=sigma)
    except Diverging as exc:
        raise RecipeDiverged(f"modulus integral diverges: {exc}") from exc


def _brackets(I, ns=None):
    keys = [1.0 / n for n in ns] if ns is not None else sorted(I, reverse=True)
    return [[I[d].lower, I[d].upper] for d in keys]


def bridge(kind):
    def compute(ctx, P):
        p, r, k, m, ds = P["p"], P["r"], P["k"], P["m_int"], P["delta"]
        lhs_c = ctx.curve(P["f"], kind, 0, r + k, ds, p)
        first = ctx.curve(P["f"], kind, r, k, ds, p)
        I = _integrals(ctx, P["f"], kind, r, m, p, 2.0 - p, ds)
        lhs = [lhs_c[d] for d in ds]
        rhs = [d ** r * first[d] + d ** (r + 1.0 / p - 1.0) * I[d].value for d in ds]
        return Sweep("delta", list(ds), lhs, rhs,
                     {"integral_brackets": [[I[d].lower, I[d].upper] for d in ds]})
    return compute


def bridge_alg(ctx, P):
    p, r, k, ds = P["p"], P["r"], P["k"], P["delta"]
    Ns = [int(math.floor(1.0 / d + 1e-9)) for d in ds]
    spaces = {nu: space("alg", nu - r, sigma=r) for nu in dyadic(min(Ns), 8 * max(Ns))}
    samples = ctx.error_samples(P["f"], r, spaces, p)
    q = 1.0 - 2.0 * p
    lhs_c = ctx.curve(P["f"], "alg", 0, r + k, ds, p, "dt")
    main = ctx.curve(P["f"], "alg", r, k, ds, p, "main", float(r))
    lhs, rhs, brackets = [], [], []
    for d, N in zip(ds, Ns):
        t = _tail(samples, q, N, p)
        series = N ** q * samples[N] ** p + t.value
        lhs.append(lhs_c[d])
        rhs.append(d ** r * main[d] + d ** (r + 2.0 / p - 2.0) * root(series, p))
        brackets.append([t.lower, t.upper])
    return Sweep("delta", list(ds), lhs, rhs, {"tail_brackets": brackets,
                                                "derivative_errors": _listed(samples)})


def invmod(kind):
    def compute(ctx, P):
        p, r, k, ds = P["p"], P["r"], P["k"], P["delta"]
        if not k < r:
            raise ConfigError("need k < r")
        if kind == "alg":
            lhs_c = ctx.curve(P["f"], kind, k, r - k, ds, p, "main", float(k))
            I = _integrals(ctx, P["f"], kind, 0, r, p, p * k + 1.0, ds, variant="dt")
        else:
            lhs_c = ctx.curve(P["f"], kind, k, r - k, ds, p)
            I = _integrals(ctx, P["f"], kind, 0, r, p, p * k + 1.0, ds)
        return Sweep("delta", list(ds), [lhs_c[d] for d in ds], [I[d].value for d in ds],
                     {"integral_brackets": [[I[d].lower, I[d].upper] for d in ds]})
    return compute


def dt_scaling(ctx, P):
    p, r, d0, lams = P["p"], P["r"], P["delta"], P["lambda"]
    om = ctx.curve(P["f"], "alg", 0, r, [d0] + [lam * d0 for lam in lams], p, "dt")
    lhs = [om[lam * d0] for lam in lams]
    rhs = [om[d0]] * len(lams)
    return Sweep("lambda", list(lams), lhs, rhs, {})


def lp_deriv_defect(ctx, P):
    p, k, hs = P["p"], P["k"], P["h"]
    f = ctx.function(P["f"], "trig", 0)
    g = ctx.function(P["f"], "trig", k)
    sign = (-1.0) ** k
    lhs = []
    for h in hs:
        D = difference_field(f, k, h)
        lhs.append(lp_quasinorm(combine([(h ** -k, D), (-sign, g)]), p, quad=ctx.quad))
    gn = lp_quasinorm(g, p, quad=ctx.quad)
    return Sweep("h", list(hs), lhs, [gn] * len(hs), {"sign": sign})


# -- recipes: lemma-level checks -----------------------------------------------

def _seed(ctx, P, i):
    return int(P.get("seed_offset", 0)) + 1000 * int(ctx.seed) + int(i)


def stechkin_nik(ctx, P):
    p, r, count, nmax = P["p"], P["r"], P["count"], P["n_max"]

    def row(i):
        n = 1 + i % nmax
        e = random_expansion(ApproxSpace.Trig(n), _seed(ctx, P, i))
        h = math.pi / (2 * n)
        a = h ** r * lp_quasinorm(e.derivative(r), p, quad=ctx.quad)
        b = difference_power(e, r, h, p, ctx.quad) ** (1.0 / p)
        return n, a, b

    rows = ctx.pmap(row, range(count))
    return Sweep("sample", list(range(count)), [a for _, a, _ in rows], [b for _, _, b in rows],
                 {"degrees": [n for n, _, _ in rows]})


def bump_coeffs(n: int, s: int = 8) -> np.ndarray:
    """Cosine coefficients ``chi(k / (n + 1))`` of a kernel of width ``1 / n``.

    ``chi(x) = (1 - x^2)^s`` is smooth enough that, by Poisson summation,
    the kernel is ``n`` times a fixed fast-decaying profile at ``n t`` up to
    periodisation, so its norms scale like exact dilations.
    """
    a = 2.0 * (1.0 - (np.arange(n + 1) / (n + 1.0)) ** 2) ** s
    a[0] = 1.0
    return a


def extremal(kind: str, n: int, m: int = 2) -> Expansion:
    """An element of the space concentrated at scale ``1/n`` (``1/n^2`` at the
    ends of ``[-1, 1]`` for polynomials, via the kernel in the Chebyshev angle)."""
    if kind == "trig":
        a = bump_coeffs(n)
        c = np.zeros(2 * n + 1)
        c[0] = a[0]
        c[1::2] = a[1:]
        return Expansion(ApproxSpace.Trig(n), c)
    if kind == "alg":
        return Expansion(ApproxSpace.AlgPoly(n), bump_coeffs(n))
    sp = ApproxSpace.Spline(m, n)
    c = np.zeros(sp.dim)
    c[sp.dim // 2] = 1.0
    return Expansion(sp, c)


def nikolskii(kind):
    """Exponent of the norm ratio along the concentrated family; seeded random
    elements are recorded as ``ratio / n^target``, which must stay bounded."""
    def compute(ctx, P):
        p, q, ns, count = P["p"], P["q"], P["n"], P["count"]
        sigma = float(P.get("sigma", 0))
        m = P.get("m", 2)
        tgt = _target(P["verdict"]["target"], P)

        def ratio(e):
            if kind == "alg":
                return (weighted_lp_quasinorm(e, q, sigma, quad=ctx.quad)
                        / weighted_lp_quasinorm(e, p, sigma, quad=ctx.quad))
            return lp_quasinorm(e, q, quad=ctx.quad) / lp_quasinorm(e, p, quad=ctx.quad)

        def random_max(n):
            return max(ratio(random_expansion(space(kind, n, m), _seed(ctx, P, 100 * n + i)))
                       for i in range(count))

        lhs = ctx.pmap(lambda n: ratio(extremal(kind, n, m)), ns)
        rnd = ctx.pmap(random_max, ns)
        scaled = [r / n ** tgt for r, n in zip(rnd, ns)]
        return Sweep("n", list(ns), lhs, [1.0] * len(ns),
                     {"random_max_ratio": rnd, "random_scaled": scaled})
    return compute


def markov_s(ctx, P):
    p, m, r, ns, count = P["p"], P["m"], P["r"], P["n"], P["count"]

    def sup_ratio(n):
        cands = [extremal("spline", n, m)]
        cands += [random_expansion(ApproxSpace.Spline(m, n), _seed(ctx, P, 100 * n + i))
                  for i in range(count)]
        return max(lp_quasinorm(e.derivative(r), p, quad=ctx.quad)
                   / lp_quasinorm(e, p, quad=ctx.quad) for e in cands)

    lhs = ctx.pmap(sup_ratio, ns)
    return Sweep("n", list(ns), lhs, [float(n) ** r for n in ns], {})


def spline_equiv(ctx, P):
    p, m, ns, count = P["p"], P["m"], P["n"], P["count"]
    jobs = [(n, i) for n in ns for i in range(count)]

    def row(job):
        n, i = job
        e = random_expansion(ApproxSpace.Spline(m, n), _seed(ctx, P, 100 * n + i))
        a = truncated_power_coeffs(e)
        w = modulus(e.as_piecewise(), m, 1.0 / n, p, ctx.modulus) ** p
        return w, n ** -(1.0 + (m - 1) * p) * float(np.sum(np.abs(a) ** p))

    rows = ctx.pmap(row, jobs)
    return Sweep("n", [n for n, _ in jobs], [a for a, _ in rows], [b for _, b in rows], {})


# -- random-suite moduli properties ---------------------------------------------

PROPS = ("quasi_triangle", "order_step", "order_norm", "dilation", "monotone", "dt_doubling",
         "dt_order")


def moduli_props_rows(ctx: Context, P: dict, index: int) -> dict:
    """Left/right sides of every property for random function ``index``.

    Returns ``{property: (lhs, rhs)}``; a property holds when ``lhs <= rhs``.
    """
    from ..corefun import CIRCLE, SYM, UNIT, random_piecewise
    s = _seed(ctx, P, index)
    rng = np.random.default_rng(s)
    p = float(P["p"][index % len(P["p"])])
    p1 = min(p, 1.0)
    k = int(rng.integers(1, 4))
    r = int(rng.integers(1, k + 1))
    dom = CIRCLE if index % 2 == 0 else UNIT
    pieces, degree = int(rng.integers(2, 7)), int(rng.integers(0, 4))
    f = random_piecewise(s, pieces, degree, dom, continuous=bool(rng.integers(0, 2)))
    g = random_piecewise(s + 7919, pieces, degree, dom)
    delta = float(P["delta"]) * (dom.length if dom.periodic else 1.0)
    slack = float(P["slack"])
    spec = ctx.modulus
    out = {}

    w_fg, h = modulus(f + g, k, delta, p, spec, return_h=True)
    wf = max(modulus(f, k, delta, p, spec), difference_power(f, k, h, p, spec.quad) ** (1 / p))
    wg = max(modulus(g, k, delta, p, spec), difference_power(g, k, h, p, spec.quad) ** (1 / p))
    out["quasi_triangle"] = (w_fg ** p1, wf ** p1 + wg ** p1 + slack)

    wk, hk = modulus(f, k, delta, p, spec, return_h=True)
    wr = max(modulus(f, r, delta, p, spec), difference_power(f, r, hk, p, spec.quad) ** (1 / p))
    out["order_step"] = (wk, 2.0 ** ((k - r) / p1) * wr + slack)
    out["order_norm"] = (2.0 ** ((k - r) / p1) * wr,
                         2.0 ** (k / p1) * lp_quasinorm(f, p, quad=spec.quad) + slack)

    worst = (0.0, 1.0)
    wr_d = modulus(f, r, delta, p, spec)
    for lam in P["lambdas"]:
        if not dom.periodic and lam * delta * r > dom.length:
            continue
        lhs = modulus(f, r, lam * delta, p, spec)
        rhs = r ** (1.0 / p1 - 1.0) * (1.0 + lam) ** (1.0 / p1 + r - 1.0) * wr_d + slack
        if lhs / rhs > worst[0] / worst[1]:
            worst = (lhs, rhs)
    out["dilation"] = worst

    ds = [delta * c for c in (0.1, 0.2, 0.5, 1.0)]
    vals = [modulus(f, r, d, p, spec) for d in ds]
    drop = max(max(vals[i] - vals[i + 1] for i in range(len(vals) - 1)), 0.0)
    out["monotone"] = (drop, 1e-10 * max(vals[-1], 1e-300) + slack)

    fs = random_piecewise(s + 104729, pieces, degree, SYM, continuous=bool(rng.integers(0, 2)))
    t = float(P["dt_t"])
    a = dt_modulus(fs, r, 2 * t, p, spec)
    b = dt_modulus(fs, r, t, p, spec)
    out["dt_doubling"] = (a, float(P["dt_doubling_cap"]) * b + slack)
    ak = dt_modulus(fs, k, t, p, spec)
    out["dt_order"] = (ak, float(P["dt_order_cap"]) * b + slack)
    return out


def moduli_props(ctx, P):
    count = int(P["count"])
    rows = ctx.pmap(lambda i: moduli_props_rows(ctx, P, i), range(count))
    lhs, counts, worst = [], {k: 0 for k in PROPS}, {k: 0.0 for k in PROPS}
    for props in rows:
        ratio = 0.0
        for name, (a, b) in props.items():
            q = a / b if b > 0 else (0.0 if a <= 0 else math.inf)
            worst[name] = max(worst[name], q)
            if q > 1.0:
                counts[name] += 1
            ratio = max(ratio, q)
        lhs.append(ratio)
    return Sweep("sample", list(range(count)), lhs, [1.0] * count,
                 {"violations": counts, "worst_ratio": worst})


# -- registry -------------------------------------------------------------------

def _r(id, description, statement, defaults, compute):
    return Recipe(CheckId(id), description, statement, defaults, compute)


_TRIG_F = f_eps(1e-3, 2)
_DIRECT_DEF = {"p": 0.6, "r": 1, "n": N_SWEEP, "verdict": BOUNDED}

RECIPES: dict[CheckId, Recipe] = {r.id: r for r in [
    _r("JACKSON_TRIG", "best trig approximation vs k-th modulus",
       "E_n(f)_p <= C w_k(f, 1/n)_p on the circle",
       {"f": _TRIG_F, "p": 0.6, "k": 1, "n": N_SWEEP, "verdict": BOUNDED}, jackson("trig")),
    _r("JACKSON_SPLINE", "best spline approximation of order k vs k-th modulus",
       "E_{k,n}(f)_p <= C w_k(f, 1/n)_p on [0,1], splines of order k",
       {"f": _TRIG_F, "p": 0.6, "k": 1, "n": N_SWEEP, "verdict": BOUNDED}, jackson("spline")),
    _r("JACKSON_ALG", "best polynomial approximation vs Ditzian-Totik modulus",
       "E_n(f)_p <= C w_k^phi(f, 1/n)_p on [-1,1], n > k",
       {"f": _TRIG_F, "p": 0.6, "k": 1, "n": N_SWEEP, "verdict": BOUNDED}, jackson("alg")),
    _r("DIRECT_TRIG", "trig error of f vs errors of its derivative",
       "E_n(f)_p <= C n^-r (E_n(f^(r))_p + n^(1-1/p) (sum_{nu>n} nu^-p E_nu(f^(r))_p^p)^(1/p))",
       dict(_DIRECT_DEF, f=_TRIG_F), direct("trig")),
    _r("SIMUL_TRIG", "derivative of the best trig approximant",
       "||f^(r) - T_n^(r)||_p <= C (E_n(f^(r))_p + n^(1-1/p) (sum_{nu>n} nu^-p E_nu(f^(r))_p^p)^(1/p)),"
       " T_n best for f",
       dict(_DIRECT_DEF, f=_TRIG_F), simul("trig")),
    _r("INVDER_TRIG", "derivative error from the error sequence of f",
       "||f^(k) - T_n^(k)||_p <= C (n^k E_n(f)_p + (sum_{nu>n} nu^(kp-1) E_nu(f)_p^p)^(1/p))",
       {"f": _TRIG_F, "p": 0.6, "k": 1, "n": N_SWEEP, "verdict": BOUNDED}, invder("trig")),
    _r("BRIDGE_TRIG", "modulus of f vs moduli of its derivative",
       "w_{r+k}(f,d)_p <= C d^r w_k(f^(r),d)_p + C d^(r+1/p-1) (int_0^d w_m(f^(r),t)_p^p t^(p-2) dt)^(1/p)",
       {"f": _TRIG_F, "p": 0.6, "r": 1, "k": 1, "m_int": 1, "delta": DELTAS, "verdict": BOUNDED},
       bridge("trig")),
    _r("INVMOD_TRIG", "modulus of a derivative vs an integral of moduli of f",
       "w_{r-k}(f^(k),d)_p <= C (int_0^d w_r(f,t)_p^p t^(-pk-1) dt)^(1/p), k < r",
       {"f": f_eps(1e-2, 2), "p": 0.6, "r": 2, "k": 1, "delta": DELTAS, "verdict": BOUNDED},
       invmod("trig")),
    _r("JACKSON2_TRIG", "trig error vs an integral of moduli of the derivative",
       "E_n(f)_p <= C n^(-r-1/p+1) (int_0^(1/n) w_k(f^(r),t)_p^p t^(p-2) dt)^(1/p)",
       {"f": _TRIG_F, "p": 0.6, "r": 1, "k": 1, "n": N_SWEEP, "verdict": BOUNDED}, jackson2_trig),
    _r("LOWER_TRIG", "lower estimate of the trig error by a modulus",
       "w_s(f, 1/n)_p <= L E_n(f)_p for the pulse family",
       {"f": f_eps(1e-3, 1), "p": 0.6, "s": 1, "n": N_SWEEP, "verdict": LOWER}, lower("trig")),
    _r("DIRECT_SPLINE", "spline error of f vs spline errors of its derivative",
       "E_{m,n}(f)_p <= C n^-r (E_{m-r,n}(f^(r))_p + n^(1-1/p) (sum_{nu>n} nu^-p E_{m-r,nu}(f^(r))_p^p)^(1/p))",
       dict(_DIRECT_DEF, f=_TRIG_F, m=2), direct("spline")),
    _r("SIMUL_SPLINE", "derivative of the best spline approximant",
       "||f^(r) - S_n^(r)||_p <= C (E_{m-r,n}(f^(r))_p + n^(1-1/p) (sum_{nu>n} nu^-p E_{m-r,nu}(f^(r))_p^p)^(1/p))",
       dict(_DIRECT_DEF, f=_TRIG_F, m=2), simul("spline")),
    _r("INVDER_SPLINE", "spline derivative error from the spline error sequence",
       "||f^(k) - S_n^(k)||_p <= C (n^k E_{m,n}(f)_p + (sum_{nu>n} nu^(kp-1) E_{m,nu}(f)_p^p)^(1/p)), k < m",
       {"f": _TRIG_F, "p": 0.6, "k": 1, "m": 2, "n": N_SWEEP, "verdict": BOUNDED}, invder("spline")),
    _r("BRIDGE_SPLINE", "interval modulus of f vs moduli of its derivative",
       "w_{r+k}(f,d)_p <= C d^r w_k(f^(r),d)_p + C d^(r+1/p-1) (int_0^d w_m(f^(r),t)_p^p t^(p-2) dt)^(1/p)"
       " on [0,1]",
       {"f": _TRIG_F, "p": 0.6, "r": 1, "k": 1, "m_int": 1, "delta": DELTAS, "verdict": BOUNDED},
       bridge("spline")),
    _r("INVMOD_SPLINE", "interval modulus of a derivative vs moduli of f",
       "w_{r-k}(f^(k),d)_p <= C (int_0^d w_r(f,t)_p^p t^(-pk-1) dt)^(1/p) on [0,1], k < r",
       {"f": f_eps(1e-2, 2), "p": 0.6, "r": 2, "k": 1, "delta": DELTAS, "verdict": BOUNDED},
       invmod("spline")),
    _r("LOWER_SPLINE", "lower estimate of the spline error by a modulus",
       "w_s(f, 1/n)_p <= L E_{m,n}(f)_p, m > s, for the pulse family on [0,1]",
       {"f": f_eps(1e-3, 1), "p": 0.6, "s": 1, "m": 2, "n": N_SWEEP, "verdict": LOWER},
       lower("spline")),
    _r("DIRECT_ALG", "polynomial error of f vs weighted errors of its derivative",
       "E_n(f)_p <= C n^-r (E_{n-r}(f^(r))_{p,phi^r} + n^(2-2/p) (sum_{nu>n} nu^(1-2p)"
       " E_{nu-r}(f^(r))_{p,phi^r}^p)^(1/p))",
       dict(_DIRECT_DEF, f=_TRIG_F), direct("alg")),
    _r("SIMUL_ALG", "weighted derivative of the best polynomial approximant",
       "||phi^r (f^(r) - P_n^(r))||_p <= C (E_{n-r}(f^(r))_{p,phi^r} + n^(2-2/p) (sum_{nu>n} nu^(1-2p)"
       " E_{nu-r}(f^(r))_{p,phi^r}^p)^(1/p))",
       dict(_DIRECT_DEF, f=_TRIG_F), simul("alg")),
    _r("INVDER_ALG", "weighted derivative error from the polynomial error sequence",
       "||phi^k (f^(k) - P_n^(k))||_p <= C (n^k E_n(f)_p + (sum_{nu>n} nu^(kp-1) E_nu(f)_p^p)^(1/p)), n > k",
       {"f": _TRIG_F, "p": 0.6, "k": 1, "n": N_SWEEP, "verdict": BOUNDED}, invder("alg")),
    _r("BRIDGE_ALG", "Ditzian-Totik modulus of f vs main-part modulus of its derivative",
       "w_{r+k}^phi(f,d)_p <= C d^r Omega_k^phi(f^(r),d)_{p,phi^r} + C d^(r+2/p-2) (sum_{nu>=[1/d]}"
       " nu^(1-2p) E_{nu-r}(f^(r))_{p,phi^r}^p)^(1/p)",
       {"f": _TRIG_F, "p": 0.6, "r": 1, "k": 1, "delta": [2.0 ** -k for k in range(2, 6)],
        "verdict": BOUNDED}, bridge_alg),
    _r("INVMOD_ALG", "main-part modulus of a derivative vs Ditzian-Totik moduli of f",
       "Omega_{r-k}^phi(f^(k),d)_{p,phi^k} <= C (int_0^d w_r^phi(f,t)_p^p t^(-pk-1) dt)^(1/p), k < r",
       {"f": f_eps(1e-2, 2), "p": 0.6, "r": 2, "k": 1, "delta": DELTAS, "verdict": BOUNDED},
       invmod("alg")),
    _r("DT_SCALING", "growth of the Ditzian-Totik modulus under dilation",
       "w_r^phi(f, lambda d)_p <= C (1+lambda)^(r+2(1/p1-1)) w_r^phi(f, d)_p",
       {"f": {"family": "abs"}, "p": 0.6, "r": 2, "delta": 1.0 / 64, "lambda": [2.0, 4.0, 8.0],
        "verdict": {"kind": "exponent_le", "target": "dt_scaling", "tol": 0.3}}, dt_scaling),
    _r("LOWER_ALG", "lower estimate of the polynomial error by a Ditzian-Totik modulus",
       "w_s^phi(f, 1/n)_p <= L E_n(f)_p for the pulse family on [-1,1]",
       {"f": f_eps(1e-3, 1), "p": 0.6, "s": 1, "n": N_SWEEP, "verdict": LOWER}, lower("alg")),
    _r("STECHKIN_NIK", "derivative norm vs difference norm for trig polynomials",
       "h^r ||T^(r)||_p ~ ||Delta_h^r T||_p for T of degree n, 0 < h <= pi/n",
       {"p": 0.5, "r": 2, "count": 100, "n_max": 16,
        "verdict": {"kind": "spread", "cap": 50.0}}, stechkin_nik),
    _r("NIKOLSKII_T", "different-metrics inequality for trig polynomials",
       "||T||_q <= C n^(1/p-1/q) ||T||_p",
       {"p": 0.5, "q": 2.0, "n": N_SWEEP, "count": 3,
        "verdict": {"kind": "exponent", "target": "nikolskii", "tol": 0.2}}, nikolskii("trig")),
    _r("NIKOLSKII_S", "different-metrics inequality for splines",
       "||S||_q <= C n^(1/p-1/q) ||S||_p",
       {"p": 0.5, "q": 2.0, "m": 2, "n": N_SWEEP, "count": 3,
        "verdict": {"kind": "exponent", "target": "nikolskii", "tol": 0.2}}, nikolskii("spline")),
    _r("NIKOLSKII_P", "weighted different-metrics inequality for algebraic polynomials",
       "||phi^r P||_q <= C n^(2(1/p-1/q)) ||phi^r P||_p",
       # the 1/n^2 endpoint scale needs n >= 16 to separate from the interval
       {"p": 0.5, "q": 2.0, "sigma": 1, "n": [16, 32, 64, 128], "count": 3,
        "verdict": {"kind": "exponent", "target": "nikolskii_weighted", "tol": 0.2}},
       nikolskii("alg")),
    _r("MARKOV_S", "derivative bound for splines",
       "||S^(r)||_p <= C n^r ||S||_p, r < m",
       {"p": 0.6, "m": 3, "r": 1, "n": N_SWEEP, "count": 3, "verdict": BOUNDED}, markov_s),
    _r("SPLINE_EQUIV", "spline modulus vs truncated-power coefficients",
       "w_m(S, 1/n)_p^p ~ n^-(1+(m-1)p) sum_j |a_j|^p",
       {"p": 0.6, "m": 3, "n": N_SWEEP, "count": 4,
        "verdict": {"kind": "spread", "cap": 50.0}}, spline_equiv),
    _r("MODULI_PROPS", "quasi-triangle, order, dilation, monotonicity and doubling of moduli",
       "w_k(f+g)^p1 <= w_k(f)^p1 + w_k(g)^p1; w_k <= 2^((k-r)/p1) w_r <= 2^(k/p1) ||f||;"
       " w_r(f, l d) <= r^(1/p1-1) (1+l)^(1/p1+r-1) w_r(f, d); w_r^phi(f, 2t) <= C w_r^phi(f, t)",
       {"p": [0.5, 0.75], "count": 12, "delta": 0.05, "lambdas": [0.5, 2.0, 5.0], "slack": 1e-6,
        "dt_t": 0.05, "dt_doubling_cap": 10.0, "dt_order_cap": 1e3,
        "verdict": {"kind": "zero_violations"}}, moduli_props),
    _r("LP_DERIV_DEFECT", "convergence of difference quotients to the derivative in L_p",
       "||Delta_h^k f / h^k - (-1)^k f^(k)||_p -> 0 as h -> 0",
       {"f": f_eps(0.05, 2), "p": 0.6, "k": 1, "h": [1e-2, 1e-3, 1e-4],
        "verdict": {"kind": "decreasing"}}, lp_deriv_defect),
]}

assert list(RECIPES) == list(CheckId)


def list_checks() -> list[dict]:
    """Declaration-ordered table of ``{id, description, statement}``."""
    return [{"id": r.id.value, "description": r.description, "statement": r.statement}
            for r in RECIPES.values()]


def _listed(d: dict) -> list:
    return [[k, d[k]] for k in sorted(d)]


# -- parameters -------------------------------------------------------------------

def resolve_params(check, overrides: dict | None = None) -> dict:
    """Defaults of ``check`` updated by ``overrides`` (unknown keys rejected)."""
    rec = RECIPES[CheckId(check)]
    P = copy.deepcopy(rec.defaults)
    for key, val in (overrides or {}).items():
        if key not in P:
            raise ConfigError(f"{rec.id.value} has no parameter {key!r}; "
                              f"known: {', '.join(sorted(P))}")
        if key == "verdict":
            if not isinstance(val, dict):
                raise ConfigError("verdict overrides must be a table")
            P["verdict"] = {**P["verdict"], **val}
        else:
            P[key] = copy.deepcopy(val)
    return P


# -- verdicts ------------------------------------------------------------------------

def _target(name: str, P: dict) -> float:
    if isinstance(name, (int, float)):
        return float(name)
    p = float(P["p"])
    if name == "nikolskii":
        return 1.0 / p - 1.0 / float(P["q"])
    if name == "nikolskii_weighted":
        return 2.0 * (1.0 / p - 1.0 / float(P["q"]))
    if name == "dt_scaling":
        p1 = min(p, 1.0)
        return float(P["r"]) + 2.0 * (1.0 / p1 - 1.0)
    raise ConfigError(f"unknown exponent target {name!r}")


def _trend_x(sweep: Sweep) -> tuple[np.ndarray, str]:
    x = np.asarray(sweep.values, float)
    if sweep.name == "delta":
        return 1.0 / x, "ratio_vs_inv_delta"
    return x, f"ratio_vs_{sweep.name}"


def judge(sweep: Sweep, ratios: np.ndarray, P: dict, x=None) -> tuple[bool, str, dict, dict]:
    """Apply the verdict in ``P['verdict']``; returns ``(passed, criterion, fitted, stats)``."""
    V = P["verdict"]
    kind = V["kind"]
    fitted, stats = {}, {}
    if ratios.size:
        stats = {"max_ratio": float(np.max(ratios)), "min_ratio": float(np.min(ratios))}
    if kind in ("bounded", "lower"):
        xs, label = _trend_x(sweep) if x is None else (x, "ratio_trend")
        pos = ratios > 0
        slope = 0.0
        if np.count_nonzero(pos) >= 3:
            s, c, res = fit_exponent(xs[pos], ratios[pos])
            fitted[label] = {"slope": s, "intercept": c, "residual": res}
            slope = s
        if kind == "bounded":
            cap, ms = float(V["cap"]), float(V["max_slope"])
            ok = bool(ratios.size) and stats["max_ratio"] <= cap and slope <= ms
            crit = f"max ratio <= {cap:g} and ratio slope <= {ms:g}"
        else:
            fl, ms = float(V["floor"]), float(V["min_slope"])
            ok = bool(ratios.size) and stats["min_ratio"] >= fl and slope >= ms
            crit = f"min ratio >= {fl:g} and ratio slope >= {ms:g}"
        return ok, crit, fitted, stats
    if kind in ("exponent", "exponent_le"):
        xs = np.asarray(sweep.values, float)
        s, c, res = fit_exponent(xs, np.asarray(sweep.lhs, float))
        fitted["lhs_vs_" + sweep.name] = {"slope": s, "intercept": c, "residual": res}
        tgt, tol = _target(V["target"], P), float(V["tol"])
        stats["target"] = tgt
        if kind == "exponent":
            return abs(s - tgt) <= tol, f"|slope - {tgt:.4g}| <= {tol:g}", fitted, stats
        return s <= tgt + tol, f"slope <= {tgt:.4g} + {tol:g}", fitted, stats
    if kind == "spread":
        cap = float(V["cap"])
        spread = stats["max_ratio"] / stats["min_ratio"] if ratios.size and stats["min_ratio"] > 0 \
            else math.inf
        stats["spread"] = spread
        return spread < cap, f"max ratio / min ratio < {cap:g}", fitted, stats
    if kind == "zero_violations":
        bad = int(np.count_nonzero(ratios > 1.0))
        stats["violations"] = bad
        return bad == 0, "every property holds within its slack", fitted, stats
    if kind == "decreasing":
        lhs = np.asarray(sweep.lhs, float)
        ok = bool(np.all(np.diff(lhs) < 0))
        if np.all(lhs > 0) and lhs.size >= 3:
            s, c, res = fit_exponent(np.asarray(sweep.values, float), lhs)
            fitted["lhs_vs_" + sweep.name] = {"slope": s, "intercept": c, "residual": res}
        return ok, "lhs strictly decreasing along the sweep", fitted, stats
    raise ConfigError(f"unknown verdict kind {kind!r}")


def report_from_sweep(check: CheckId, P: dict, sweep: Sweep, runtime: float = 0.0) -> CheckReport:
    lhs = np.asarray(sweep.lhs, float)
    rhs = np.asarray(sweep.rhs, float)
    keep = rhs != 0
    excluded = int(np.count_nonzero(~keep))
    kept = Sweep(sweep.name, [v for v, k in zip(sweep.values, keep) if k],
                 [float(v) for v in lhs[keep]], [float(v) for v in rhs[keep]], sweep.extras)
    ratios = lhs[keep] / rhs[keep]
    passed, crit, fitted, stats = judge(kept, ratios, P)
    return CheckReport(check=check.value, params=P, sweep_name=sweep.name,
                       sweep=[float(v) for v in kept.values], lhs=kept.lhs, rhs=kept.rhs,
                       ratios=[float(v) for v in ratios], fitted=fitted, passed=bool(passed),
                       criterion=crit, stats=stats, excluded=excluded, extras=sweep.extras,
                       runtime=runtime)


# -- running -----------------------------------------------------------------------

def run_check(check, params: dict | None = None, ctx: Context | None = None,
              seed: int = 0) -> CheckReport:
    """Run one check with parameter ``params`` overriding its defaults."""
    cid = CheckId(check)
    P = resolve_params(cid, params)
    ctx = ctx if ctx is not None else Context(seed=seed)
    t0 = time.perf_counter()
    sweep = RECIPES[cid].compute(ctx, P)
    return report_from_sweep(cid, P, sweep, time.perf_counter() - t0)


def run_catalog(checks=None, params: dict | None = None, seed: int = 0, jobs: int = 1,
                ctx: Context | None = None) -> list[CheckReport]:
    """Run several checks (default: all) and return reports in declaration order.

    Checks run concurrently when ``jobs > 1``; they share memoised solves, so
    results are identical for any ``jobs``.
    """
    ids = [CheckId(c) for c in (checks if checks is not None else list(CheckId))]
    params = params or {}
    ctx = ctx if ctx is not None else Context(seed=seed, jobs=jobs)
    ordered = sorted(set(ids), key=list(CheckId).index)
    return ctx.pmap(lambda c: run_check(c, params.get(c.value), ctx), ordered)


__all__ = ["CheckId", "Recipe", "RECIPES", "Sweep", "list_checks", "resolve_params", "run_check",
           "run_catalog", "judge", "extremal", "moduli_props_rows", "PROPS"]
