"""L_p quasi-norms, 0 < p < inf, with optional weight (1 - x^2)^(sigma/2).

For 0 < p < 1 the integrand |g|^p has algebraic singularities (in its
derivatives) at every zero of g.  For structured inputs the integration
interval is therefore cut at breakpoints and at the real roots of g, and each
panel is integrated with a Gauss-Jacobi rule whose weight absorbs the
|x - root|^p behaviour at root endpoints.  Panels are then bisected
adaptively until the local error estimate meets the relative tolerance.
Black-box :class:`~smoothlab.corefun.PointFunction` integrands use a dense
composite Gauss-Legendre rule that is doubled until it settles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .corefun import PiecewisePoly, PointFunction, _horner
from .errors import NonConvergent, OutOfDomain


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature controls.

    base_panels
        Panels per unit length for black-box integrands.
    refinement
        Levels of graded bisection toward each detected root (and doublings
        allowed for black-box integrands).
    rel_tol
        Target relative accuracy of the integral of ``|f|^p``.
    max_depth, max_panels
        Limits of adaptive bisection; panels still open at either limit
        count as unresolved.
    """

    base_panels: int = 4096
    refinement: int = 6
    rel_tol: float = 1e-8
    nodes: int = 16
    max_depth: int = 48
    max_panels: int = 1 << 20

    def __post_init__(self):
        if self.base_panels < 64:
            raise ValueError("base_panels must be >= 64")
        if self.refinement < 0:
            raise ValueError("refinement must be >= 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class PNorm:
    p: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"p must be a positive finite number, got {self.p}")

    @property
    def p1(self) -> float:
        return min(self.p, 1.0)


def as_pnorm(p) -> PNorm:
    return p if isinstance(p, PNorm) else PNorm(float(p))


@lru_cache(maxsize=512)
def _jacobi(n: int, alpha: float, beta: float):
    if alpha == 0.0 and beta == 0.0:
        t, w = np.polynomial.legendre.leggauss(n)
    else:
        t, w = roots_jacobi(n, alpha, beta)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def _panel_sums(evalf, p, a, b, ea, eb, tags, n, sigma):
    """Gauss-Jacobi estimates of int_a^b |w g|^p on each panel."""
    out = np.empty(a.shape)
    if not (np.any(ea) or np.any(eb)):
        groups = [(0.0, 0.0, slice(None))]
    else:
        # Jacobi exponents pair up as one complex key; 1-d unique is much faster
        uniq, inv = np.unique(eb + 1j * ea, return_inverse=True)
        inv = inv.reshape(-1)
        groups = [(u.real, u.imag, inv == k) for k, u in enumerate(uniq)]
    for alpha, beta, sel in groups:
        t, w = _jacobi(n, float(alpha), float(beta))
        aa, bb = a[sel, None], b[sel, None]
        half = 0.5 * (bb - aa)
        x = aa + half * (t + 1.0)
        v = np.abs(evalf(x, tags[sel]))
        if sigma:
            v = v * np.sqrt(np.clip((1.0 - x) * (1.0 + x), 0.0, None)) ** sigma
        v = v ** p
        if alpha:
            v = v / (1.0 - t) ** alpha
        if beta:
            v = v / (1.0 + t) ** beta
        out[sel] = half[:, 0] * (v @ w)
    return out


def _adaptive(evalf, p, a, b, ea, eb, tags, quad: QuadratureSpec, sigma=0.0, raise_on_fail=True,
              noise=0.0):
    """Adaptive bisection of all panels at once; returns int |w g|^p.

    A panel is also accepted once its error estimate is below
    ``2 noise^p (b - a)``: values known only to ``noise`` carry that much
    uncertainty in ``|g|^p`` anyway.
    """
    floor = 2.0 * noise ** p if noise > 0 else 0.0
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if a.size == 0:
        return 0.0
    ea = np.asarray(ea, float)
    eb = np.asarray(eb, float)
    tags = np.asarray(tags)
    n = quad.nodes
    q = _panel_sums(evalf, p, a, b, ea, eb, tags, n, sigma)
    ltot = float(np.sum(b - a))
    est = float(np.sum(q))
    total = 0.0
    unresolved = 0.0
    for depth in range(quad.max_depth + 1):
        m = 0.5 * (a + b)
        zeros = np.zeros_like(a)
        ql = _panel_sums(evalf, p, a, m, ea, zeros, tags, n, sigma)
        qr = _panel_sums(evalf, p, m, b, zeros, eb, tags, n, sigma)
        qc = ql + qr
        err = np.abs(qc - q)
        est = max(est, total + float(np.sum(qc)))
        tol = quad.rel_tol * est * (b - a) / ltot
        done = err <= np.maximum(np.maximum(tol, floor * (b - a)), 1e-300)
        if depth == quad.max_depth or 2 * int(np.sum(~done)) > quad.max_panels:
            unresolved = float(np.sum(err[~done]))
            done[:] = True
        total += float(np.sum(qc[done]))
        keep = ~done
        if not np.any(keep):
            break
        a, m, b = a[keep], m[keep], b[keep]
        ea, eb, tags = ea[keep], eb[keep], tags[keep]
        ql, qr = ql[keep], qr[keep]
        a = np.concatenate([a, m])
        b = np.concatenate([m, b])
        ea, eb = np.concatenate([ea, np.zeros_like(ea)]), np.concatenate([np.zeros_like(eb), eb])
        tags = np.concatenate([tags, tags])
        q = np.concatenate([ql, qr])
    if raise_on_fail and unresolved > 1e3 * quad.rel_tol * max(total, 1e-300):
        raise NonConvergent(f"adaptive quadrature stalled (residual {unresolved:.2e} of {total:.2e})")
    return total


def _graded_split(lo, hi, root_lo, root_hi, levels):
    """Split [lo, hi] geometrically toward root endpoints."""
    if levels == 0 or not (root_lo or root_hi):
        return [(lo, hi, root_lo, root_hi)]
    if root_lo and root_hi:
        mid = 0.5 * (lo + hi)
        return (_graded_split(lo, mid, True, False, levels - 1)
                + _graded_split(mid, hi, False, True, levels - 1))
    L = hi - lo
    cuts = [L * 0.5 ** k for k in range(1, levels + 1)]
    if root_lo:
        pts = [lo] + [lo + c for c in reversed(cuts)] + [hi]
        return [(pts[i], pts[i + 1], i == 0, False) for i in range(len(pts) - 1)]
    pts = [lo] + [hi - c for c in cuts] + [hi]
    return [(pts[i], pts[i + 1], False, i == len(pts) - 2) for i in range(len(pts) - 1)]


def _bisect_roots(g, lo, hi, tags, iters=100):
    """Vectorised Illinois iteration on brackets with g(lo) * g(hi) < 0.

    Every step keeps a sign-changing bracket; a bisection step is taken
    whenever the secant point would not shrink it to half within two steps.
    """
    lo = lo.copy()
    hi = hi.copy()
    glo = g(lo, tags)
    ghi = g(hi, tags)
    side = np.zeros(lo.shape, dtype=int)
    width = hi - lo
    for it in range(iters):
        done = (hi - lo) <= 4.0 * np.spacing(np.maximum(np.abs(lo), np.abs(hi)))
        if np.all(done):
            break
        with np.errstate(divide="ignore", invalid="ignore"):
            x = hi - ghi * (hi - lo) / (ghi - glo)
        mid = 0.5 * (lo + hi)
        bad = ~np.isfinite(x) | (x <= lo) | (x >= hi)
        if it % 2 == 1:
            bad |= (hi - lo) > 0.5 * width
            width = hi - lo
        x = np.where(bad, mid, x)
        gx = g(x, tags)
        left = np.sign(gx) == np.sign(glo)
        # Illinois: halve the stale endpoint value when the same side moves twice
        ghi = np.where(left & (side == 1), 0.5 * ghi, ghi)
        glo = np.where(~left & (side == -1), 0.5 * glo, glo)
        side = np.where(left, 1, -1)
        lo, glo = np.where(left, x, lo), np.where(left, gx, glo)
        hi, ghi = np.where(left, hi, x), np.where(left, ghi, gx)
        exact = gx == 0
        lo, hi = np.where(exact, x, lo), np.where(exact, x, hi)
    return 0.5 * (lo + hi)


def _segment_roots(g, seg_lo, seg_hi, tags, nscan):
    """Roots (by sign change) inside each segment, scanning ``nscan[i]`` points.

    Returns root positions and the index of the segment holding each.
    """
    seg_lo = np.asarray(seg_lo, float)
    seg_hi = np.asarray(seg_hi, float)
    nscan = np.asarray(nscan, int)
    lo_all, hi_all, tag_all, seg_all, exact, exact_seg = [], [], [], [], [], []
    for n in np.unique(nscan):
        idx = np.nonzero(nscan == n)[0]
        u = np.linspace(0.0, 1.0, n + 1)[1:-1]
        xs = seg_lo[idx, None] + (seg_hi - seg_lo)[idx, None] * u
        v = g(xs, tags[idx])
        sv = np.sign(v)
        ch = sv[:, :-1] * sv[:, 1:] < 0
        rows, cols = np.nonzero(ch)
        lo_all.append(xs[rows, cols])
        hi_all.append(xs[rows, cols + 1])
        tag_all.append(tags[idx][rows])
        seg_all.append(idx[rows])
        z = (sv[:, 1:-1] == 0) & (sv[:, :-2] * sv[:, 2:] < 0)
        rows, cols = np.nonzero(z)
        exact.append(xs[rows, cols + 1])
        exact_seg.append(idx[rows])
    lo = np.concatenate(lo_all)
    roots = np.empty(0)
    rseg = np.empty(0, dtype=int)
    if lo.size:
        hi = np.concatenate(hi_all)
        tg = np.concatenate(tag_all)
        roots = _bisect_roots(lambda x, t: g(x[:, None], t)[:, 0], lo, hi, tg)
        rseg = np.concatenate(seg_all)
    roots = np.concatenate([roots] + exact)
    rseg = np.concatenate([rseg] + exact_seg).astype(int)
    return roots, None, rseg


def _segments_to_panels(seg_lo, seg_hi, seg_tags, roots, root_seg, init_panels, levels,
                        end_roots=None):
    a, b, ea, eb, tags = [], [], [], [], []
    by_seg = {}
    for r, s in zip(np.atleast_1d(roots), np.atleast_1d(root_seg)):
        by_seg.setdefault(int(s), []).append(float(r))
    for i, (s0, s1) in enumerate(zip(seg_lo, seg_hi)):
        pts = [s0] + sorted(by_seg.get(i, [])) + [s1]
        is_root = [False] + [True] * (len(pts) - 2) + [False]
        if end_roots is not None:
            is_root[0], is_root[-1] = bool(end_roots[i, 0]), bool(end_roots[i, 1])
        for j in range(len(pts) - 1):
            lo, hi = pts[j], pts[j + 1]
            if not hi > lo:
                continue
            k = max(1, int(init_panels[i] * (hi - lo) / (s1 - s0)))
            grid = np.linspace(lo, hi, k + 1)
            for m in range(k):
                rl = is_root[j] and m == 0
                rh = is_root[j + 1] and m == k - 1
                for u, v, fl, fh in _graded_split(grid[m], grid[m + 1], rl, rh, levels):
                    a.append(u)
                    b.append(v)
                    ea.append(fl)
                    eb.append(fh)
                    tags.append(seg_tags[i])
    return (np.asarray(a), np.asarray(b), np.asarray(ea, float), np.asarray(eb, float),
            np.asarray(tags))


def as_function(f):
    """Expansions convert themselves to a piecewise or smooth evaluator."""
    conv = getattr(f, "as_evaluable", None)
    return conv() if conv is not None else f


def _check_interval(f, a, b):
    dom = f.domain
    if dom.periodic:
        if not (b > a and b - a <= dom.length * (1 + 1e-12)):
            raise OutOfDomain("interval longer than the period")
        return
    slop = 1e-12 * dom.length
    if a < dom.a - slop or b > dom.b + slop or not b >= a:
        raise OutOfDomain(f"[{a}, {b}] is not inside [{dom.a}, {dom.b}]")


def _pp_integral(f: PiecewisePoly, p, a, b, quad, sigma):
    if (a, b) != (f.breaks[0], f.breaks[-1]):
        f = f.shifted(0.0, a, b)
    c = f.coeffs
    nz = np.any(c != 0.0, axis=1)
    if not np.any(nz):
        return 0.0
    piece = np.nonzero(nz)[0]
    seg_lo = f.breaks[piece]
    seg_hi = f.breaks[piece + 1]
    left = f.breaks

    def g(x, tags):
        tags = np.asarray(tags)
        t = x - left[tags].reshape(tags.shape + (1,) * (x.ndim - tags.ndim))
        idx = np.broadcast_to(tags.reshape(tags.shape + (1,) * (x.ndim - tags.ndim)), x.shape)
        return _horner(c, idx, t)

    sub = c[piece]
    deg = sub.shape[1] - 1 - np.argmax(sub[:, ::-1] != 0.0, axis=1)
    roots, rseg = [], []
    lin = np.nonzero(deg == 1)[0]
    if lin.size:
        t = -sub[lin, 0] / sub[lin, 1]
        ok = (t > 0) & (t < (seg_hi - seg_lo)[lin])
        roots.append(seg_lo[lin[ok]] + t[ok])
        rseg.append(lin[ok])
    high = np.nonzero(deg >= 2)[0]
    if high.size:
        r, _, sg = _segment_roots(g, seg_lo[high], seg_hi[high], piece[high],
                                  np.full(high.size, 64))
        roots.append(r)
        rseg.append(high[sg])
    roots = np.concatenate(roots) if roots else np.empty(0)
    rseg = np.concatenate(rseg).astype(int) if rseg else np.empty(0, dtype=int)
    # a piece vanishing at its own end point behaves like |x - end|^p there
    scale = np.sum(np.abs(sub) * (seg_hi - seg_lo)[:, None] ** np.arange(sub.shape[1]), axis=1)
    v_lo = sub[:, 0]
    v_hi = _horner(c, piece, seg_hi - seg_lo)
    end_roots = np.stack([np.abs(v_lo) <= 1e-13 * scale, np.abs(v_hi) <= 1e-13 * scale], axis=1)
    init = np.ones(piece.size, dtype=int)
    pan = _segments_to_panels(seg_lo, seg_hi, piece, roots, rseg, init, quad.refinement, end_roots)
    return _weighted(g, p, pan, quad, sigma)


def _weighted(g, p, pan, quad, sigma, noise=0.0):
    # root flags become Jacobi exponents p; the weight adds sigma*p/2 at +-1
    a, b, ea, eb, tags = pan
    ea = ea * p
    eb = eb * p
    if sigma:
        ea = ea + np.where(np.abs(a + 1.0) <= 1e-15, 0.5 * sigma * p, 0.0)
        eb = eb + np.where(np.abs(b - 1.0) <= 1e-15, 0.5 * sigma * p, 0.0)
    return _adaptive(g, p, a, b, ea, eb, tags, quad, sigma=sigma, noise=noise)


def _smooth_integral(f, p, a, b, quad, sigma):
    """Integrand smooth between known breaks; roots located by scanning."""
    dom = f.domain
    br = np.asarray(getattr(f, "interior_breaks", ()), float)
    if dom.periodic:
        P = dom.length
        ks = range(math.floor((a - dom.a) / P) - 1, math.ceil((b - dom.a) / P) + 1)
        br = np.concatenate([br + k * P for k in ks] + [np.array([dom.a + k * P for k in ks])])
    br = np.unique(br[(br > a) & (br < b)])
    pts = np.concatenate([[a], br, [b]])
    seg_lo, seg_hi = pts[:-1], pts[1:]
    keep = seg_hi > seg_lo
    seg_lo, seg_hi = seg_lo[keep], seg_hi[keep]
    density = float(getattr(f, "scan", 256))
    nscan = np.maximum(64, np.ceil(density * (seg_hi - seg_lo))).astype(int)
    tags = np.zeros(seg_lo.size, dtype=int)
    noise = float(getattr(f, "noise", 0.0))

    def g(x, _tags):
        v = np.asarray(f(x), dtype=float)
        if noise > 0.0:
            v = np.where(np.abs(v) <= noise, 0.0, v)
        return v

    roots, _, rseg = _segment_roots(g, seg_lo, seg_hi, tags, nscan)
    init = np.maximum(1, nscan // 16)
    pan = _segments_to_panels(seg_lo, seg_hi, tags, roots, rseg, init, quad.refinement)
    return _weighted(g, p, pan, quad, sigma, noise)


def _blackbox_integral(f: PointFunction, p, a, b, quad, sigma):
    br = np.asarray(f.breaks, float)
    pts = np.unique(np.concatenate([[a], br[(br > a) & (br < b)], [b]]))
    t, w = _jacobi(quad.nodes, 0.0, 0.0)

    def rule(per_unit):
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            k = max(1, int(math.ceil(per_unit * (hi - lo))))
            e = np.linspace(lo, hi, k + 1)
            half = 0.5 * np.diff(e)[:, None]
            x = e[:-1, None] + half * (t + 1.0)
            v = np.abs(np.asarray(f(x), float))
            if sigma:
                v = v * np.sqrt(np.clip((1 - x) * (1 + x), 0, None)) ** sigma
            total += float(np.sum(half[:, 0] * ((v ** p) @ w)))
        return total

    prev = rule(quad.base_panels)
    per = quad.base_panels
    for _ in range(max(1, quad.refinement)):
        per *= 2
        cur = rule(per)
        if abs(cur - prev) <= quad.rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise NonConvergent("composite rule did not settle for black-box integrand")


def lp_power(f, p, interval=None, quad: QuadratureSpec = DEFAULT_QUAD, sigma: float = 0.0) -> float:
    """``int_a^b |phi^sigma f|^p dx`` (the p-th power of the quasi-norm)."""
    p = as_pnorm(p).p
    f = as_function(f)
    a, b = (f.domain.a, f.domain.b) if interval is None else (float(interval[0]), float(interval[1]))
    _check_interval(f, a, b)
    if b == a:
        return 0.0
    if sigma and (a < -1 - 1e-12 or b > 1 + 1e-12):
        raise OutOfDomain("weighted norms live on [-1, 1]")
    if isinstance(f, PiecewisePoly):
        return _pp_integral(f, p, a, b, quad, sigma)
    if isinstance(f, PointFunction):
        return _blackbox_integral(f, p, a, b, quad, sigma)
    return _smooth_integral(f, p, a, b, quad, sigma)


def lp_quasinorm(f, p, interval=None, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``(int_a^b |f|^p)^(1/p)`` over ``interval`` (default: the whole domain)."""
    pn = as_pnorm(p)
    return lp_power(f, pn, interval, quad) ** (1.0 / pn.p)


def weighted_lp_quasinorm(f, p, sigma: float, interval=(-1.0, 1.0),
                          quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """``||phi^sigma f||_{L_p[a,b]}`` with ``phi(x) = sqrt(1 - x^2)``."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    f = as_function(f)
    dom = f.domain
    if dom.periodic or dom.a < -1 - 1e-12 or dom.b > 1 + 1e-12:
        raise OutOfDomain("weighted norms need a function on [-1, 1]")
    pn = as_pnorm(p)
    return lp_power(f, pn, interval, quad, sigma=float(sigma)) ** (1.0 / pn.p)
