"""Best L_p approximation, 0 < p <= 2, by continuation in p.

The objective ``||w (f - e)||_p^p`` is non-convex for p < 1, so the solver

1. solves the p = 2 problem on a collocation set (weighted least squares);
2. walks down a path of exponents, each stage an iteratively reweighted
   least-squares (IRLS) loop warm-started from the previous one, with a
   smoothing floor on the residuals that decays geometrically to
   ``eta * scale``;
3. restarts the non-convex stages from perturbed copies of the last convex
   solution (multistart) and keeps the best;
4. for small dimension, polishes the winner with Nelder-Mead on the accurate
   (adaptive quadrature) objective.

The reported error is always recomputed with :func:`lp_quasinorm` on the
returned expansion, so it is an upper bound for the true infimum.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from numpy.polynomial import chebyshev as C
from scipy.optimize import minimize

from ..corefun import PiecewisePoly, PiecewiseSmooth, PointFunction, combine, roundoff_floor
from ..errors import GridTooLarge, NonConvergent, OutOfDomain
from ..quasinorm import DEFAULT_QUAD, QuadratureSpec, as_function, as_pnorm, lp_power
from .spaces import ApproxSpace, Expansion, bspline_basis

_GL = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class BestApproxConfig:
    """Solver controls.

    ``p_path=None`` means the default continuation ``2, 1.5, 1, 0.8`` (the
    entries above the target) followed by the target exponent.
    """

    starts: int = 12
    p_path: tuple | None = None
    max_iters: int = 400
    seed: int = 0
    rel_tol: float = 1e-6
    eta: float = 1e-8
    nodes_per_dim: int = 32
    polish_max_dim: int = 5
    perturb: float = 0.25
    jobs: int = 1
    quad: QuadratureSpec = field(default_factory=lambda: DEFAULT_QUAD)

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def path(self, p: float) -> tuple:
        if self.p_path is None:
            return tuple(q for q in (2.0, 1.5, 1.0, 0.8) if q > p) + (p,)
        path = tuple(float(q) for q in self.p_path)
        if not path or abs(path[-1] - p) > 1e-12:
            raise ValueError("p_path must end at the target exponent")
        return path


@dataclass(frozen=True, eq=False)
class BestApproxResult:
    expansion: Expansion
    error: float
    p: float
    diagnostics: dict

    @property
    def coeffs(self) -> np.ndarray:
        return self.expansion.coeffs

    @property
    def nonconvergent(self) -> bool:
        return bool(self.diagnostics.get("nonconvergent", False))

    def to_dict(self) -> dict:
        return {
            "space": self.expansion.space.to_json(),
            "coeffs": [float(c) for c in self.expansion.coeffs],
            "error": float(self.error),
            "p": float(self.p),
            "flags": {"nonconvergent": self.nonconvergent},
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, obj) -> "BestApproxResult":
        e = Expansion(ApproxSpace.from_json(obj["space"]), np.asarray(obj["coeffs"], float))
        diag = dict(obj.get("diagnostics", {}))
        diag.setdefault("nonconvergent", obj.get("flags", {}).get("nonconvergent", False))
        return cls(e, float(obj["error"]), float(obj["p"]), diag)


# -- residuals and exact objective ------------------------------------------

def residual(f, e: Expansion):
    """``f - e`` as an evaluable (exact piecewise polynomial when possible)."""
    f = as_function(f)
    if f.domain != e.domain and not (
            abs(f.domain.a - e.domain.a) < 1e-12 and abs(f.domain.b - e.domain.b) < 1e-12):
        raise OutOfDomain(f"function on {f.domain} cannot be approximated on {e.domain}")
    if isinstance(f, PiecewisePoly) and e.space.kind == "spline":
        return combine([(1.0, f), (-1.0, e.as_piecewise())])
    breaks = tuple(np.union1d(np.asarray(getattr(f, "interior_breaks", ()), float),
                              e.space.knots))
    ev = e.as_evaluable()

    def func(x):
        return np.asarray(f(x), float) - np.asarray(ev(x), float)

    if isinstance(f, PointFunction):
        return PointFunction(func, e.domain, f.smoothness, breaks)
    scan = max(getattr(f, "scan", 256), getattr(ev, "scan", 256))
    noise = roundoff_floor(f, 2.0) + roundoff_floor(ev, 2.0)
    return PiecewiseSmooth(func, e.domain, breaks, scan, noise)


def approx_error(f, e: Expansion, p, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``||w (f - e)||_p`` with the space's weight."""
    pn = as_pnorm(p)
    return lp_power(residual(f, e), pn, quad=quad, sigma=e.space.weight_sigma) ** (1.0 / pn.p)


# -- collocation -------------------------------------------------------------

def collocation(f, space: ApproxSpace, nodes_per_dim: int = 32):
    """Gauss-Legendre nodes and weights on panels split at every break of ``f``.

    Panels are uniform (trig, spline; spline panels align with the knots) or
    Chebyshev-distributed (algebraic), about ``nodes_per_dim * dim`` nodes in
    total before the breaks of ``f`` are added.
    """
    dom = space.domain
    K = max(8, int(math.ceil(nodes_per_dim * space.dim / 16)))
    if space.kind == "spline":
        K = space.n * max(1, int(math.ceil(K / space.n)))
        edges = np.linspace(0.0, 1.0, K + 1)
    elif space.kind == "trig":
        edges = np.linspace(dom.a, dom.b, K + 1)
    else:
        edges = -np.cos(np.pi * np.arange(K + 1) / K)
        edges[0], edges[-1] = -1.0, 1.0
    fb = np.asarray(getattr(as_function(f), "interior_breaks", ()), float)
    fb = fb[(fb > dom.a) & (fb < dom.b)]
    edges = np.unique(np.concatenate([edges, fb]))
    edges = edges[np.concatenate([[True], np.diff(edges) > 1e-14 * dom.length])]
    edges[-1] = dom.b
    t, w = _GL
    half = 0.5 * np.diff(edges)
    x = (edges[:-1, None] + half[:, None] * (t + 1.0)).reshape(-1)
    q = (half[:, None] * w).reshape(-1)
    return x, q


class _Design:
    """Basis matrix at the nodes plus fast weighted Gram assembly."""

    def __init__(self, space: ApproxSpace, x: np.ndarray):
        self.space = space
        self.x = x
        N, d = x.size, space.dim
        self.sparse = None
        self.prod = None
        if space.kind == "spline":
            B = bspline_basis(x, space.m, space.n)
            self.B = B
            self.sparse = sp.csr_matrix(B)
        else:
            self.B = space.basis(x)
            if N * d * d > 2e7:
                if space.kind == "trig":
                    L = 2 * space.n
                    ang = np.outer(x, np.arange(L + 1))
                    self.prod = (np.cos(ang), np.sin(ang))
                else:
                    self.prod = (C.chebvander(x, 2 * space.n),)

    def matvec(self, c):
        return self.sparse @ c if self.sparse is not None else self.B @ c

    def solve(self, W, F):
        """Weighted least squares ``min sum W (F - B c)^2``."""
        d = self.space.dim
        if self.sparse is not None:
            G = (self.sparse.T @ self.sparse.multiply(W[:, None])).toarray()
            rhs = self.sparse.T @ (W * F)
            return _spd_solve(G, rhs)
        if self.prod is None:
            s = np.sqrt(W)
            c, *_ = np.linalg.lstsq(self.B * s[:, None], s * F, rcond=None)
            return c
        rhs = self.B.T @ (W * F)
        if self.space.kind == "trig":
            Sc = self.prod[0].T @ W
            Ss = self.prod[1].T @ W
            n = self.space.n
            G = np.empty((d, d))
            k = np.arange(n + 1)
            J, K = np.meshgrid(k, k, indexing="ij")
            cc = 0.5 * (Sc[np.abs(J - K)] + Sc[J + K])
            ss = 0.5 * (Sc[np.abs(J - K)] - Sc[J + K])
            # cos(jx) sin(kx) = (sin((j+k)x) - sin((j-k)x)) / 2
            cs = 0.5 * (Ss[J + K] - np.sign(J - K) * Ss[np.abs(J - K)])
            ic = np.concatenate([[0], 2 * np.arange(1, n + 1) - 1])
            isn = 2 * np.arange(1, n + 1)
            G[np.ix_(ic, ic)] = cc
            G[np.ix_(isn, isn)] = ss[1:, 1:]
            G[np.ix_(ic, isn)] = cs[:, 1:]
            G[np.ix_(isn, ic)] = cs[:, 1:].T
        else:
            S = self.prod[0].T @ W
            k = np.arange(d)
            J, K = np.meshgrid(k, k, indexing="ij")
            G = 0.5 * (S[J + K] + S[np.abs(J - K)])
        return _spd_solve(G, rhs)


def _spd_solve(G, rhs):
    d = G.shape[0]
    jitter = 1e-14 * max(float(np.trace(G)) / d, 1e-300)
    try:
        cf = sla.cho_factor(G + jitter * np.eye(d), check_finite=False)
        return sla.cho_solve(cf, rhs, check_finite=False)
    except np.linalg.LinAlgError:
        c, *_ = np.linalg.lstsq(G, rhs, rcond=None)
        return c


def _stage(design, F, q, wp, c, p, cfg, scale):
    """IRLS at exponent p from coefficients c; returns (c, objective, iters, converged)."""
    floor = cfg.eta * scale
    if p == 2.0:
        c = design.solve(q * wp, F)
        r = F - design.matvec(c)
        return c, float(np.sum(q * wp * r * r)), 1, True

    def obj(r):
        return float(np.sum(q * wp * np.abs(r) ** p))

    r = F - design.matvec(c)
    best_c, best = c, obj(r)
    e = max(floor, 0.1 * math.sqrt(float(np.sum(q * r * r)) / float(np.sum(q))))
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        W = q * wp * (r * r + e * e) ** (0.5 * p - 1.0)
        c_new = design.solve(W, F)
        r_new = F - design.matvec(c_new)
        val = obj(r_new)
        improved = best - val
        if val < best:
            best_c, best = c_new, val
        c, r = c_new, r_new
        if e <= floor and abs(improved) <= cfg.rel_tol * best:
            converged = True
            break
        e = max(floor, 0.5 * e)
    return best_c, best, it, converged


def _scale_of(F, q, wp):
    return math.sqrt(float(np.sum(q * wp * F * F)) / float(np.sum(q)))


def best_approx(f, space: ApproxSpace, p, cfg: BestApproxConfig = BestApproxConfig(),
                strict: bool = False) -> BestApproxResult:
    """Approximate ``inf_e ||w (f - e)||_p`` over ``space``; see module docstring."""
    pn = as_pnorm(p)
    if pn.p > 2:
        raise ValueError("best_approx supports 0 < p <= 2")
    f = as_function(f)
    path = cfg.path(pn.p)
    x, q = collocation(f, space, cfg.nodes_per_dim)
    F = np.asarray(f(x), float)
    w = space.weight(x)
    design = _Design(space, x)
    history = []

    def wp_for(s):
        return w ** s if space.weight_sigma else np.ones_like(x)

    scale = _scale_of(F, q, wp_for(2.0))
    if scale == 0.0:
        e = Expansion(space, np.zeros(space.dim))
        diag = {"starts": [0.0], "chosen_start": 0, "history": [], "nonconvergent": False,
                "path": list(path), "discrete_objective": 0.0, "polished": False}
        return BestApproxResult(e, 0.0, pn.p, diag)

    # convex part of the path, shared by every start
    c = np.zeros(space.dim)
    k = 0
    while k < len(path) and path[k] >= 1.0:
        c, val, its, ok = _stage(design, F, q, wp_for(path[k]), c, path[k], cfg, scale)
        history.append({"start": 0, "p": path[k], "iters": its, "objective": val, "converged": ok})
        k += 1
    rest = path[k:]
    rng = np.random.default_rng(cfg.seed)
    cscale = max(float(np.max(np.abs(c))), scale)
    inits = [c] + [c + cfg.perturb * cscale * rng.standard_normal(space.dim)
                   for _ in range(cfg.starts - 1)] if rest else [c]

    def run(i):
        ci = inits[i]
        hist = []
        ok_all = True
        for ps in rest:
            ci, val, its, ok = _stage(design, F, q, wp_for(ps), ci, ps, cfg, scale)
            hist.append({"start": i, "p": ps, "iters": its, "objective": val, "converged": ok})
            ok_all = ok_all and ok
        err = approx_error(f, Expansion(space, ci), pn, cfg.quad)
        return ci, err, hist, ok_all

    if cfg.jobs > 1 and len(inits) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            outs = list(ex.map(run, range(len(inits))))
    else:
        outs = [run(i) for i in range(len(inits))]
    errs = [o[1] for o in outs]
    chosen = int(np.argmin(errs))  # argmin returns the first minimum
    for o in outs:
        history.extend(o[2])
    c_best, err_best, _, ok_best = outs[chosen]
    polished = False
    if space.dim <= cfg.polish_max_dim:
        c_pol, err_pol = _polish(f, space, pn, c_best, cfg.quad, cscale)
        if err_pol < err_best:
            c_best, err_best, polished = c_pol, err_pol, True
    e = Expansion(space, c_best)
    error = approx_error(f, e, pn, cfg.quad)
    nonconv = bool(rest) and not ok_best and not polished
    diag = {
        "starts": [float(v) for v in errs],
        "chosen_start": chosen,
        "history": history,
        "nonconvergent": nonconv,
        "path": list(path),
        "polished": polished,
    }
    if strict and nonconv:
        raise NonConvergent("IRLS hit the iteration cap without reaching rel_tol")
    return BestApproxResult(e, error, pn.p, diag)


def _polish(f, space, pn, c0, quad, cscale, step=None, maxiter=None):
    """Nelder-Mead on the accurate objective from ``c0``."""
    d = space.dim
    step = 0.05 * cscale if step is None else step
    simplex = np.vstack([c0] + [c0 + step * np.eye(d)[i] for i in range(d)])

    def obj(c):
        return lp_power(residual(f, Expansion(space, c)), pn, quad=quad, sigma=space.weight_sigma)

    res = minimize(obj, c0, method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-10 * cscale, "fatol": 1e-13,
                            "maxiter": maxiter or 400 * d, "maxfev": maxiter or 400 * d})
    return np.asarray(res.x), float(res.fun) ** (1.0 / pn.p)


# -- exhaustive oracle -------------------------------------------------------

MAX_LATTICE = 10 ** 7
MAX_ORACLE_DIM = 4


def default_lattice(f, space: ApproxSpace, points: int | None = None, width: float = 1.5):
    """Lattice ``(lo, hi, step)`` per coefficient, centred on the L_2 solution."""
    f = as_function(f)
    x, q = collocation(f, space, 64)
    F = np.asarray(f(x), float)
    w = space.weight(x)
    design = _Design(space, x)
    c = design.solve(q * w * w, F)
    scale = max(float(np.max(np.abs(F))), 1e-300)
    points = points or {1: 401, 2: 161, 3: 41, 4: 21}.get(space.dim, 11)
    half = width * scale
    step = 2 * half / (points - 1)
    return [(float(ci - half), float(ci + half), float(step)) for ci in c]


def oracle_best_approx(f, space: ApproxSpace, p, grid=None, nodes: int = 512,
                       polish: bool = True, quad: QuadratureSpec = DEFAULT_QUAD,
                       chunk: int = 4096) -> BestApproxResult:
    """Exhaustive lattice search (dimension <= 4) followed by a Nelder-Mead polish."""
    pn = as_pnorm(p)
    f = as_function(f)
    d = space.dim
    if d > MAX_ORACLE_DIM:
        raise GridTooLarge(f"oracle limited to dimension {MAX_ORACLE_DIM}, got {d}")
    grid = default_lattice(f, space) if grid is None else grid
    if len(grid) != d:
        raise ValueError("one (lo, hi, step) triple per coefficient expected")
    axes = []
    for lo, hi, step in grid:
        count = int(round((hi - lo) / step)) + 1
        axes.append(lo + step * np.arange(count))
    total = int(np.prod([a.size for a in axes]))
    if total > MAX_LATTICE:
        raise GridTooLarge(f"lattice has {total} points (limit {MAX_LATTICE})")
    x, q = collocation(f, space, max(16, nodes // d))
    F = np.asarray(f(x), float)
    wp = q * space.weight(x) ** pn.p
    B = space.basis(x)
    best_val, best_idx = math.inf, 0
    shape = [a.size for a in axes]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk))
        sub = np.unravel_index(idx, shape)
        Cc = np.stack([axes[i][sub[i]] for i in range(d)], axis=1)
        vals = (np.abs(F[None, :] - Cc @ B.T) ** pn.p) @ wp
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val, best_idx = float(vals[j]), int(idx[j])
    sub = np.unravel_index(best_idx, shape)
    c = np.array([axes[i][sub[i]] for i in range(d)])
    lattice_err = approx_error(f, Expansion(space, c), pn, quad)
    diag = {"lattice_points": total, "lattice_min": best_val ** (1.0 / pn.p),
            "lattice_error": lattice_err, "lattice_coeffs": [float(v) for v in c], "polished": False}
    err = lattice_err
    if polish:
        step = min(g[2] for g in grid)
        c2, e2 = _polish(f, space, pn, c, quad, max(float(np.max(np.abs(c))), 1.0), step=step)
        if e2 < err:
            c, err = c2, e2
            diag["polished"] = True
    e = Expansion(space, c)
    return BestApproxResult(e, approx_error(f, e, pn, quad), pn.p, diag)
