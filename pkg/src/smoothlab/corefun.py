"""Exact piecewise-polynomial functions on the circle and on intervals.

Everything here is immutable.  A :class:`PiecewisePoly` stores one coefficient
row per piece in the local power basis ``sum_k c[i, k] * (x - breaks[i])**k``.
At an interior breakpoint the value of the left piece is used; at the left
end of the domain the first piece is used.

The test families (the trapezoid pulse and its periodic integrals) and a
seeded random generator live here as well.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import BadEpsilon, NonZeroMean, OutOfDomain

MAX_DEGREE = 16
TWO_PI = 2.0 * math.pi
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Domain:
    """An interval ``[a, b]``; ``periodic`` identifies ``a`` with ``b``."""

    a: float
    b: float
    periodic: bool = False
    name: str | None = None

    @property
    def length(self) -> float:
        return self.b - self.a

    def reduce(self, x):
        """Map ``x`` into ``[a, b)`` (periodic) or check it lies in ``[a, b]``."""
        x = np.asarray(x, dtype=float)
        if self.periodic:
            y = np.mod(x - self.a, self.length) + self.a
            # mod can round up to exactly b
            return np.where(y >= self.b, self.a, y)
        slop = 1e-12 * self.length
        if np.any((x < self.a - slop) | (x > self.b + slop)) or np.any(np.isnan(x)):
            raise OutOfDomain(f"point outside [{self.a}, {self.b}]")
        return np.clip(x, self.a, self.b)

    def sub(self, lo: float, hi: float) -> "Domain":
        """Plain (non-periodic) interval ``[lo, hi]``."""
        if lo == self.a and hi == self.b and not self.periodic:
            return self
        return Domain(float(lo), float(hi), False, None)

    def to_json(self):
        if self.name is not None:
            return self.name
        return {"a": self.a, "b": self.b, "periodic": self.periodic}

    @staticmethod
    def from_json(obj) -> "Domain":
        if isinstance(obj, str):
            try:
                return DOMAINS[obj]
            except KeyError:
                raise ValueError(f"unknown domain tag {obj!r}") from None
        return Domain(float(obj["a"]), float(obj["b"]), bool(obj.get("periodic", False)))


CIRCLE = Domain(0.0, TWO_PI, True, "Circle2Pi")
UNIT = Domain(0.0, 1.0, False, "UnitInterval")
SYM = Domain(-1.0, 1.0, False, "SymInterval")
DOMAINS = {d.name: d for d in (CIRCLE, UNIT, SYM)}


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def taylor_shift(coeffs: np.ndarray, delta) -> np.ndarray:
    """Re-expand rows of ascending coefficients about a point moved by ``delta``.

    Row ``i`` describes ``sum_k c[i,k] (x-b)^k``; the result describes the same
    polynomial as ``sum_k d[i,k] (x-b-delta[i])^k``.  Repeated synthetic
    division, vectorised over rows.
    """
    d = np.array(coeffs, dtype=float, copy=True)
    if d.ndim == 1:
        d = d[None, :]
    delta = np.broadcast_to(np.asarray(delta, dtype=float), d.shape[:1])
    n = d.shape[1]
    for i in range(n - 1):
        for k in range(n - 2, i - 1, -1):
            d[:, k] += delta * d[:, k + 1]
    return d


def _horner(coeffs: np.ndarray, idx: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        out = out * t + coeffs[idx, k]
    return out


def _merge_breaks(points: Iterable[float], lo: float, hi: float) -> np.ndarray:
    pts = np.asarray(sorted(set(float(p) for p in points)), dtype=float)
    pts = pts[(pts > lo) & (pts < hi)]
    tol = 1e-13 * (hi - lo)
    out = [lo]
    for p in pts:
        if p - out[-1] > tol:
            out.append(p)
    if hi - out[-1] <= tol and len(out) > 1:
        out.pop()
    out.append(hi)
    return np.asarray(out)


@dataclass(frozen=True, eq=False)
class PiecewisePoly:
    """Piecewise polynomial on ``domain`` with breakpoints ``breaks``.

    ``coeffs[i]`` holds the ascending local power-basis coefficients of the
    piece on ``[breaks[i], breaks[i+1])``.  ``meta`` carries bookkeeping such
    as the jumps whose point masses were dropped by :meth:`derivative`.
    """

    domain: Domain
    breaks: np.ndarray
    coeffs: np.ndarray
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        br = _frozen(self.breaks)
        c = np.array(self.coeffs, dtype=float)
        if c.ndim == 1:
            c = c[None, :]
        if br.ndim != 1 or br.size < 2:
            raise ValueError("need at least two breakpoints")
        if np.any(np.diff(br) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if c.shape[0] != br.size - 1:
            raise ValueError("one coefficient row per piece expected")
        if not (np.isclose(br[0], self.domain.a, rtol=0, atol=1e-12 * self.domain.length)
                and np.isclose(br[-1], self.domain.b, rtol=0, atol=1e-12 * self.domain.length)):
            raise ValueError("breakpoints must span the domain")
        if c.shape[1] - 1 > MAX_DEGREE:
            raise ValueError(f"degree {c.shape[1] - 1} exceeds cap {MAX_DEGREE}")
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "breaks", br)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    # -- basic protocol ---------------------------------------------------
    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def npieces(self) -> int:
        return self.coeffs.shape[0]

    @property
    def interior_breaks(self) -> np.ndarray:
        return self.breaks[1:-1]

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breaks)

    def piece_index(self, x) -> np.ndarray:
        idx = np.searchsorted(self.breaks, x, side="left") - 1
        return np.clip(idx, 0, self.npieces - 1)

    def __call__(self, x):
        x = self.domain.reduce(x)
        idx = self.piece_index(x)
        out = _horner(self.coeffs, idx, x - self.breaks[idx])
        return out if out.ndim else float(out)

    def right_values(self) -> np.ndarray:
        """Value of each piece at its own left end."""
        return self.coeffs[:, 0].copy()

    def left_values(self) -> np.ndarray:
        """Value of each piece at its own right end."""
        idx = np.arange(self.npieces)
        return _horner(self.coeffs, idx, self.lengths)

    def jumps(self) -> list[tuple[float, float]]:
        """``(x, f(x+) - f(x-))`` at every breakpoint where the value jumps."""
        left, right = self.left_values(), self.right_values()
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        out = []
        for i in range(1, self.npieces):
            j = right[i] - left[i - 1]
            if abs(j) > 1e-12 * scale:
                out.append((float(self.breaks[i]), float(j)))
        if self.domain.periodic:
            j = right[0] - left[-1]
            if abs(j) > 1e-12 * scale:
                out.append((float(self.breaks[0]), float(j)))
        return out

    # -- calculus ---------------------------------------------------------
    def derivative(self, k: int = 1) -> "PiecewisePoly":
        """Piecewise ``k``-th derivative; point masses at jumps are dropped."""
        f = self
        for _ in range(k):
            dropped = tuple(f.jumps())
            c = f.coeffs
            if c.shape[1] == 1:
                d = np.zeros_like(c)
            else:
                d = c[:, 1:] * np.arange(1, c.shape[1])
            meta = dict(f.meta)
            meta["dropped_jumps"] = dropped
            f = PiecewisePoly(f.domain, f.breaks, d, meta)
        return f

    def piece_integrals(self) -> np.ndarray:
        c = self.coeffs
        L = self.lengths[:, None]
        k = np.arange(c.shape[1])
        return np.sum(c * L ** (k + 1) / (k + 1), axis=1)

    def integral(self) -> float:
        return float(np.sum(self.piece_integrals()))

    def mean(self) -> float:
        return self.integral() / self.domain.length

    def antiderivative(self) -> "PiecewisePoly":
        """Continuous antiderivative vanishing at the left end."""
        c = self.coeffs
        k = np.arange(1, c.shape[1] + 1)
        g = np.zeros((c.shape[0], c.shape[1] + 1))
        g[:, 1:] = c / k
        g[:, 0] = np.concatenate([[0.0], np.cumsum(self.piece_integrals())[:-1]])
        return PiecewisePoly(self.domain, self.breaks, g)

    # -- algebra ----------------------------------------------------------
    def refine(self, points: Iterable[float]) -> "PiecewisePoly":
        new = _merge_breaks(list(points) + list(self.breaks), self.breaks[0], self.breaks[-1])
        return self._resample(new, 0.0)

    def _resample(self, new_breaks: np.ndarray, shift: float) -> "PiecewisePoly":
        """Pieces of ``x -> f(x + shift)`` on the partition ``new_breaks``."""
        left = new_breaks[:-1] + shift
        mid = 0.5 * (new_breaks[:-1] + new_breaks[1:]) + shift
        if self.domain.periodic:
            red = self.domain.reduce(mid)
            offset = mid - red
        else:
            red = self.domain.reduce(mid)
            offset = np.zeros_like(mid)
        idx = self.piece_index(red)
        delta = left - offset - self.breaks[idx]
        rows = taylor_shift(self.coeffs[idx], delta)
        dom = Domain(float(new_breaks[0]), float(new_breaks[-1]), False, None)
        if (self.domain.periodic and new_breaks[0] == self.domain.a
                and new_breaks[-1] == self.domain.b):
            dom = self.domain
        elif new_breaks[0] == self.domain.a and new_breaks[-1] == self.domain.b:
            dom = self.domain
        return PiecewisePoly(dom, new_breaks, rows)

    def shifted(self, s: float, lo: float | None = None, hi: float | None = None) -> "PiecewisePoly":
        """``x -> f(x + s)`` on ``[lo, hi]`` (default: the whole domain).

        On the circle arguments wrap; on an interval ``[lo+s, hi+s]`` must lie
        inside the domain.
        """
        lo = self.domain.a if lo is None else float(lo)
        hi = self.domain.b if hi is None else float(hi)
        if not hi > lo:
            raise ValueError("empty interval")
        if self.domain.periodic:
            P = self.domain.length
            b = self.breaks[:-1]
            kmin = math.floor((lo + s - self.domain.a) / P) - 1
            kmax = math.ceil((hi + s - self.domain.a) / P) + 1
            pts = [bb - s + k * P for k in range(kmin, kmax + 1) for bb in b]
        else:
            slop = 1e-12 * self.domain.length
            if lo + s < self.domain.a - slop or hi + s > self.domain.b + slop:
                raise OutOfDomain("shifted interval leaves the domain")
            pts = list(self.breaks - s)
        new = _merge_breaks(pts, lo, hi)
        return self._resample(new, s)

    def restrict(self, lo: float, hi: float) -> "PiecewisePoly":
        return self.shifted(0.0, lo, hi)

    def affine(self, alpha: float, beta: float, domain: Domain) -> "PiecewisePoly":
        """``x -> f(alpha*x + beta)`` on ``domain`` (``alpha > 0``)."""
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        lo, hi = alpha * domain.a + beta, alpha * domain.b + beta
        g = self.shifted(0.0, lo, hi)
        breaks = (g.breaks - beta) / alpha
        breaks[0], breaks[-1] = domain.a, domain.b
        scale = alpha ** np.arange(g.coeffs.shape[1])
        return PiecewisePoly(domain, breaks, g.coeffs * scale)

    def __neg__(self):
        return PiecewisePoly(self.domain, self.breaks, -self.coeffs)

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return PiecewisePoly(self.domain, self.breaks, self.coeffs * float(c))

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, PiecewisePoly):
            return combine([(1.0, self), (1.0, other)], chop=False)
        if np.isscalar(other):
            c = self.coeffs.copy()
            c[:, 0] += other
            return PiecewisePoly(self.domain, self.breaks, c)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rsub__(self, other):
        return (-1.0) * self + other

    # -- serialisation ----------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "domain": self.domain.to_json(),
            "breakpoints": [float(b) for b in self.breaks],
            "pieces": [[float(v) for v in row] for row in self.coeffs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: Mapping) -> "PiecewisePoly":
        pieces = obj["pieces"]
        width = max(len(p) for p in pieces)
        c = np.zeros((len(pieces), width))
        for i, p in enumerate(pieces):
            c[i, : len(p)] = p
        return cls(Domain.from_json(obj["domain"]), np.asarray(obj["breakpoints"], float), c)

    @classmethod
    def from_json(cls, text: str) -> "PiecewisePoly":
        return cls.from_dict(json.loads(text))

    def __repr__(self):
        return (f"PiecewisePoly(domain={self.domain.name or (self.domain.a, self.domain.b)}, "
                f"pieces={self.npieces}, degree={self.degree})")


def combine(terms: Sequence[tuple[float, PiecewisePoly]], chop: bool = True) -> PiecewisePoly:
    """Exact linear combination ``sum alpha_i f_i`` of functions on one interval.

    With ``chop`` set, coefficients that are pure cancellation noise (below a
    few ulps of the summands' magnitude on that piece) are zeroed, so that
    e.g. differences of a polynomial annihilated by the stencil come out as
    exact zeros.
    """
    first = terms[0][1]
    lo, hi = first.breaks[0], first.breaks[-1]
    for _, f in terms[1:]:
        if not (np.isclose(f.breaks[0], lo, atol=1e-12 * (hi - lo), rtol=0)
                and np.isclose(f.breaks[-1], hi, atol=1e-12 * (hi - lo), rtol=0)):
            raise ValueError("combine needs functions on the same interval")
    new = _merge_breaks([b for _, f in terms for b in f.breaks], lo, hi)
    width = max(f.coeffs.shape[1] for _, f in terms)
    total = np.zeros((new.size - 1, width))
    mag = np.zeros_like(total)
    L = np.diff(new)[:, None] ** np.arange(width)
    for alpha, f in terms:
        g = f._resample(new, 0.0) if not np.array_equal(f.breaks, new) else f
        c = np.zeros_like(total)
        c[:, : g.coeffs.shape[1]] = g.coeffs
        total += alpha * c
        if chop:
            mag += np.sum(np.abs(alpha * c) * L, axis=1, keepdims=True)
    if chop:
        total[np.abs(total) * L <= 64 * _EPS * mag] = 0.0
    return PiecewisePoly(first.domain if new[0] == first.domain.a and new[-1] == first.domain.b
                         else Domain(float(lo), float(hi)), new, total)


@dataclass(frozen=True, eq=False)
class PointFunction:
    """Black-box vectorised evaluator ``x -> value`` on ``domain``.

    ``smoothness`` is a declared hint (number of continuous derivatives,
    ``-1`` for possibly discontinuous); ``breaks`` lists known interior
    points of non-smoothness, if any.
    """

    func: Callable
    domain: Domain
    smoothness: int = 0
    breaks: tuple = ()

    @property
    def interior_breaks(self) -> np.ndarray:
        return np.asarray(self.breaks, dtype=float)

    def __call__(self, x):
        x = self.domain.reduce(x)
        out = np.asarray(self.func(x), dtype=float)
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class PiecewiseSmooth:
    """Vectorised evaluator known to be smooth between ``breaks``.

    Unlike :class:`PointFunction`, integrals of ``|f|^p`` for this type use
    root splitting; ``scan`` is the number of sample points per unit length
    used to bracket sign changes.  Values with ``|f(x)| <= noise`` are treated
    as exact zeros, which keeps ``|f|^p`` of cancellation roundoff out of
    the integrals.
    """

    func: Callable
    domain: Domain
    breaks: tuple = ()
    scan: int = 256
    noise: float = 0.0

    @property
    def interior_breaks(self) -> np.ndarray:
        b = np.asarray(self.breaks, dtype=float)
        return b[(b > self.domain.a) & (b < self.domain.b)]

    def __call__(self, x):
        x = self.domain.reduce(x)
        out = np.asarray(self.func(x), dtype=float)
        return out if out.ndim else float(out)


def magnitude(f, samples: int = 2049) -> float:
    """Sampled ``max |f|`` (breakpoint sides included for piecewise polynomials)."""
    dom = f.domain
    x = np.linspace(dom.a, dom.b, samples)
    m = float(np.max(np.abs(f(x))))
    if isinstance(f, PiecewisePoly):
        m = max(m, float(np.max(np.abs(f.right_values()))), float(np.max(np.abs(f.left_values()))))
    return m


def roundoff_floor(f, terms: float) -> float:
    """Absolute roundoff level of a combination of ``terms`` evaluations of ``f``."""
    return 8.0 * _EPS * terms * magnitude(f) + terms * float(getattr(f, "noise", 0.0))


def evaluate(f, x):
    """Evaluate any supported function object at ``x``."""
    return f(x)


def periodic_integral(f: PiecewisePoly, tol: float = 1e-12) -> PiecewisePoly:
    """The zero-mean antiderivative of a zero-mean function on the circle."""
    if not f.domain.periodic:
        raise ValueError("periodic_integral needs a function on the circle")
    total = f.integral()
    scale = max(1.0, float(np.sum(np.abs(f.piece_integrals()))))
    if abs(total) > tol * scale:
        raise NonZeroMean(f"integral {total:.3e} is not zero")
    g = f.antiderivative()
    return g + (-g.mean())


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps < math.pi / 2:
        raise BadEpsilon(f"epsilon must lie in (0, pi/2), got {eps}")
    return eps


@lru_cache(maxsize=256)
def phi_eps(eps: float, centered: bool = False) -> PiecewisePoly:
    """Trapezoid pulse: rises on ``[0, eps)``, flat, falls on ``[pi-eps, pi)``, zero after.

    ``centered=True`` returns the pulse minus its mean.
    """
    eps = _check_eps(eps)
    pi = math.pi
    breaks = [0.0, eps, pi - eps, pi, TWO_PI]
    coeffs = [[0.0, 1.0 / eps], [1.0, 0.0], [1.0, -1.0 / eps], [0.0, 0.0]]
    f = PiecewisePoly(CIRCLE, breaks, coeffs)
    if centered:
        f = f + (-(pi - eps) / TWO_PI)
    return f


@lru_cache(maxsize=256)
def f_eps_r(eps: float, r: int) -> PiecewisePoly:
    """``(r-1)``-fold zero-mean periodic integral of the centred pulse."""
    if r < 1:
        raise ValueError("r must be >= 1")
    f = phi_eps(eps, centered=True)
    for _ in range(r - 1):
        f = periodic_integral(f)
    return f


def interval_family(eps: float, r: int, domain: Domain = UNIT, offset: float = -math.pi / 2) -> PiecewisePoly:
    """``f_eps_r`` pulled back to an interval: ``x -> f(alpha x + beta)``.

    The interval is mapped onto one full period starting at ``offset``, so
    with the default offset the pulse edges sit at the quarter points.
    """
    f = f_eps_r(eps, r)
    alpha = TWO_PI / domain.length
    beta = offset - alpha * domain.a
    return f.affine(alpha, beta, domain)


def random_piecewise(seed: int, pieces: int, degree: int, domain: Domain = UNIT,
                     continuous: bool = False, zero_mean: bool = False) -> PiecewisePoly:
    """Seeded random piecewise polynomial.

    Interior breakpoints are uniform on the domain; coefficients are uniform on
    ``[-1, 1]`` with respect to the piece-normalised variable
    ``(x - b_i) / (b_{i+1} - b_i)``.
    """
    if pieces < 1 or degree < 0:
        raise ValueError("pieces >= 1 and degree >= 0 required")
    rng = np.random.default_rng(seed)
    inner = np.sort(rng.uniform(domain.a, domain.b, size=pieces - 1))
    breaks = _merge_breaks(inner, domain.a, domain.b)
    npieces = breaks.size - 1
    u = rng.uniform(-1.0, 1.0, size=(npieces, degree + 1))
    L = np.diff(breaks)[:, None]
    c = u / L ** np.arange(degree + 1)
    if continuous:
        idx = np.arange(npieces)
        for i in range(1, npieces):
            end = _horner(c, idx[i - 1:i], L[i - 1])[0]
            c[i, 0] = end
        if domain.periodic and npieces > 0:
            end = _horner(c, idx[-1:], L[-1])[0]
            gap = end - c[0, 0]
            if degree == 0:
                c[:, 0] = c[0, 0]
            else:
                # subtract a global ramp gap*(x-a)/P to close the loop
                start = breaks[:-1] - domain.a
                c[:, 0] -= gap * start / domain.length
                c[:, 1] -= gap / domain.length
    f = PiecewisePoly(domain, breaks, c)
    if zero_mean:
        f = f + (-f.mean())
    return f
