"""Approximation spaces and their expansions.

Three families:

``Trig(n)``
    real trigonometric polynomials of degree at most ``n`` on the circle,
    basis ``1, cos x, sin x, ..., cos nx, sin nx``;
``Spline(m, n)``
    splines of order ``m`` (degree ``m - 1``, smoothness ``C^{m-2}``) on
    the uniform knots ``j / n`` of ``[0, 1]``, B-spline basis over the
    extended knot vector ``j / n, j = -(m-1), ..., n + m - 1``;
``AlgPoly(n)``
    algebraic polynomials of degree at most ``n`` on ``[-1, 1]`` in the
    Chebyshev basis, optionally measured with weight ``(1 - x^2)^(sigma/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import chebyshev as C

from ..corefun import CIRCLE, SYM, UNIT, Domain, PiecewisePoly, PiecewiseSmooth
from ..errors import DegreeExhausted

KINDS = ("trig", "spline", "alg")


@dataclass(frozen=True)
class ApproxSpace:
    kind: str
    n: int
    m: int = 0
    weight_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.n < 0 or (self.kind == "spline" and self.n < 1):
            raise ValueError("space order out of range")
        if self.kind == "spline" and self.m < 1:
            raise ValueError("spline order m must be >= 1")
        if self.weight_sigma < 0:
            raise ValueError("weight_sigma must be >= 0")
        if self.weight_sigma and self.kind != "alg":
            raise ValueError("weights are only supported for algebraic polynomials")

    # constructors mirroring the usual notation
    @classmethod
    def Trig(cls, n: int) -> "ApproxSpace":
        return cls("trig", int(n))

    @classmethod
    def Spline(cls, m: int, n: int) -> "ApproxSpace":
        return cls("spline", int(n), int(m))

    @classmethod
    def AlgPoly(cls, n: int, weight_sigma: float = 0.0) -> "ApproxSpace":
        return cls("alg", int(n), 0, float(weight_sigma))

    @property
    def dim(self) -> int:
        if self.kind == "trig":
            return 2 * self.n + 1
        if self.kind == "spline":
            return self.n + self.m - 1
        return self.n + 1

    @property
    def domain(self) -> Domain:
        return {"trig": CIRCLE, "spline": UNIT, "alg": SYM}[self.kind]

    @property
    def label(self) -> str:
        if self.kind == "trig":
            return f"Trig({self.n})"
        if self.kind == "spline":
            return f"Spline({self.m},{self.n})"
        w = f",sigma={self.weight_sigma:g}" if self.weight_sigma else ""
        return f"AlgPoly({self.n}{w})"

    def with_order(self, n: int) -> "ApproxSpace":
        return ApproxSpace(self.kind, int(n), self.m, self.weight_sigma)

    @property
    def knots(self) -> np.ndarray:
        """Interior breakpoints (splines only)."""
        if self.kind != "spline":
            return np.empty(0)
        return np.arange(1, self.n) / self.n

    def basis(self, x) -> np.ndarray:
        """Basis values, shape ``x.shape + (dim,)``."""
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        if self.kind == "trig":
            out = _trig_basis(flat, self.n)
        elif self.kind == "alg":
            out = C.chebvander(flat, self.n)
        else:
            out = bspline_basis(flat, self.m, self.n)
        return out.reshape(x.shape + (self.dim,))

    def weight(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.weight_sigma:
            return np.ones_like(x)
        return np.sqrt(np.clip((1 - x) * (1 + x), 0, None)) ** self.weight_sigma

    def to_json(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.kind == "spline":
            d["m"] = self.m
        if self.weight_sigma:
            d["weight_sigma"] = self.weight_sigma
        return d

    @classmethod
    def from_json(cls, obj) -> "ApproxSpace":
        return cls(obj["kind"], int(obj["n"]), int(obj.get("m", 0)), float(obj.get("weight_sigma", 0.0)))


Trig = ApproxSpace.Trig
Spline = ApproxSpace.Spline
AlgPoly = ApproxSpace.AlgPoly


def _trig_basis(x: np.ndarray, n: int) -> np.ndarray:
    """Columns ``1, cos x, sin x, ...`` by the angle-addition recurrence."""
    out = np.empty((x.size, 2 * n + 1))
    out[:, 0] = 1.0
    if n == 0:
        return out
    c1, s1 = np.cos(x), np.sin(x)
    ck, sk = c1, s1
    for k in range(1, n + 1):
        out[:, 2 * k - 1] = ck
        out[:, 2 * k] = sk
        ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
    return out


def _trig_eval(x: np.ndarray, coeffs: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Sum of a trig series, accumulating the angle-addition recurrence in blocks."""
    n = (coeffs.size - 1) // 2
    out = np.full(x.shape, coeffs[0])
    for s in range(0, x.size, chunk):
        xs = x[s:s + chunk]
        c1, s1 = np.cos(xs), np.sin(xs)
        ck, sk = c1, s1
        acc = out[s:s + chunk]
        for k in range(1, n + 1):
            acc += coeffs[2 * k - 1] * ck + coeffs[2 * k] * sk
            ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
    return out


def bspline_basis(x: np.ndarray, m: int, n: int) -> np.ndarray:
    """Uniform B-splines of order ``m`` on ``[0, 1]`` via the Cox-de Boor recurrence.

    Basis function ``i`` is supported on ``[(i-m+1)/n, (i+1)/n]``.  The right
    end point belongs to the last interval.
    """
    d = m - 1
    x = np.asarray(x, dtype=float)
    if np.any((x < -1e-12) | (x > 1 + 1e-12)):
        from ..errors import OutOfDomain
        raise OutOfDomain("spline argument outside [0, 1]")
    u = np.clip(x, 0.0, 1.0) * n
    j = np.minimum(np.floor(u).astype(int), n - 1)  # interval index
    t = u - j                                          # local coordinate in [0, 1]
    # N[k] = value of the degree-q B-spline supported on [j-q+k, j+k+1]
    N = np.zeros((x.size, d + 1))
    N[:, 0] = 1.0
    for q in range(1, d + 1):
        new = np.zeros_like(N)
        for k in range(q + 1):
            # B_{j-q+k}^{q}(u) = (u - (j-q+k))/q * B^{q-1}_{j-q+k}
            #                  + ((j+k+1) - u)/q * B^{q-1}_{j-q+k+1}
            left = N[:, k - 1] if k >= 1 else 0.0
            right = N[:, k] if k <= q - 1 else 0.0
            new[:, k] = ((t + q - k) * left + (k + 1 - t) * right) / q
        N = new
    out = np.zeros((x.size, n + d))
    rows = np.arange(x.size)
    for k in range(d + 1):
        out[rows, j + k] = N[:, k]
    return out


@dataclass(frozen=True, eq=False)
class Expansion:
    """Coefficients over an :class:`ApproxSpace`."""

    space: ApproxSpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size != self.space.dim:
            raise ValueError(f"{self.space.label} needs {self.space.dim} coefficients, got {c.size}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def domain(self) -> Domain:
        return self.space.domain

    @property
    def interior_breaks(self) -> np.ndarray:
        return self.space.knots

    def __call__(self, x):
        x = self.domain.reduce(x)
        sp = self.space
        if sp.kind == "alg":
            out = C.chebval(x, self.coeffs)
        elif sp.kind == "spline":
            out = self.as_piecewise()(x)
        else:
            xa = np.asarray(x, dtype=float)
            out = _trig_eval(xa.reshape(-1), self.coeffs).reshape(xa.shape)
        out = np.asarray(out, dtype=float)
        return out if out.ndim else float(out)

    def as_piecewise(self) -> PiecewisePoly:
        """Exact piecewise-polynomial form (splines only)."""
        if self.space.kind != "spline":
            raise TypeError("only spline expansions are piecewise polynomials")
        return self._pp

    @cached_property
    def _pp(self) -> PiecewisePoly:
        sp = self.space
        m, n = sp.m, sp.n
        d = m - 1
        # local polynomial of each piece from d+1 samples, in u = n (x - j/n)
        u = (np.arange(d + 1) + 0.5) / (d + 1)
        V = np.vander(u, d + 1, increasing=True)
        rows = np.empty((n, d + 1))
        j = np.arange(n)
        x = (j[:, None] + u[None, :]) / n
        vals = bspline_basis(x.reshape(-1), m, n) @ self.coeffs
        rows = np.linalg.solve(V, vals.reshape(n, d + 1).T).T
        rows = rows * float(n) ** np.arange(d + 1)
        return PiecewisePoly(UNIT, np.arange(n + 1) / n, rows)

    def as_evaluable(self):
        sp = self.space
        if sp.kind == "spline":
            return self._pp
        # trig and Chebyshev bases are bounded by 1, so this bounds the
        # evaluation roundoff of the three-term recurrences
        noise = 8.0 * np.finfo(float).eps * (sp.n + 1) * float(np.sum(np.abs(self.coeffs)))
        if sp.kind == "trig":
            return PiecewiseSmooth(self, CIRCLE, (), scan=max(256, 16 * sp.n), noise=noise)
        return PiecewiseSmooth(self, SYM, (), scan=int(min(65536, max(256, 8 * sp.n * sp.n))),
                               noise=noise)

    def derivative(self, k: int = 1) -> "Expansion":
        return expansion_derivative(self, k)

    def scaled(self, c: float) -> "Expansion":
        return Expansion(self.space, c * self.coeffs)

    def to_dict(self) -> dict:
        return {"space": self.space.to_json(), "coeffs": [float(v) for v in self.coeffs]}

    @classmethod
    def from_dict(cls, obj) -> "Expansion":
        return cls(ApproxSpace.from_json(obj["space"]), np.asarray(obj["coeffs"], float))


def eval_expansion(e: Expansion, x):
    return e(x)


def expansion_derivative(e: Expansion, k: int = 1) -> Expansion:
    """Exact ``k``-th derivative within the same family."""
    if k < 0:
        raise ValueError("k must be >= 0")
    sp = e.space
    c = np.array(e.coeffs)
    if k == 0:
        return e
    if sp.kind == "trig":
        for _ in range(k):
            a, b = c[1::2].copy(), c[2::2].copy()
            kk = np.arange(1, sp.n + 1)
            c = np.zeros_like(c)
            c[1::2] = kk * b
            c[2::2] = -kk * a
        return Expansion(sp, c)
    if sp.kind == "alg":
        new_n = max(sp.n - k, 0)
        d = C.chebder(c, k) if k <= sp.n else np.zeros(1)
        out = np.zeros(new_n + 1)
        out[: min(d.size, new_n + 1)] = d[: new_n + 1]
        return Expansion(ApproxSpace("alg", new_n, 0, sp.weight_sigma), out)
    if k > sp.m - 1:
        raise DegreeExhausted(f"order-{sp.m} splines have only {sp.m - 1} classical derivatives")
    for _ in range(k):
        c = sp.n * np.diff(c)
    return Expansion(ApproxSpace("spline", sp.n, sp.m - k), c)


def truncated_power_coeffs(e: Expansion) -> np.ndarray:
    """Jumps of ``S^{(m-1)} / (m-1)!`` at the interior knots ``j/n``.

    With these, ``S(x) = P(x) + sum_j a_j (x - j/n)_+^{m-1}`` where ``P`` is
    the first piece.
    """
    sp = e.space
    if sp.kind != "spline" or sp.m < 2:
        raise ValueError("need a spline of order m >= 2")
    pp = e.as_piecewise()
    lead = pp.coeffs[:, sp.m - 1]
    return np.diff(lead)


def truncated_power_eval(e: Expansion, x) -> np.ndarray:
    """Evaluate the truncated-power representation (for round-trip checks)."""
    sp = e.space
    pp = e.as_piecewise()
    x = np.asarray(x, dtype=float)
    first = pp.coeffs[0]
    out = np.polynomial.polynomial.polyval(x, first)
    for tj, a in zip(sp.knots, truncated_power_coeffs(e)):
        out = out + a * np.clip(x - tj, 0.0, None) ** (sp.m - 1)
    return out


def random_expansion(space: ApproxSpace, seed: int) -> Expansion:
    """Seeded random element with coefficients uniform on ``[-1, 1]``."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, size=space.dim)
    if space.kind == "trig" and space.n > 0:
        # keep the top frequency present so the degree is really n
        c[-2:] = np.sign(c[-2:]) * np.maximum(np.abs(c[-2:]), 0.5)
    return Expansion(space, c)


def lift_expansion(e: Expansion, n: int) -> Expansion:
    """Same function viewed in a larger trig or polynomial space."""
    sp = e.space
    if sp.kind == "spline" or n < sp.n:
        raise ValueError("can only lift trig/algebraic expansions upward")
    new = sp.with_order(n)
    c = np.zeros(new.dim)
    c[: sp.dim] = e.coeffs
    return Expansion(new, c)


__all__ = [
    "ApproxSpace", "Trig", "Spline", "AlgPoly", "Expansion", "eval_expansion",
    "expansion_derivative", "truncated_power_coeffs", "truncated_power_eval",
    "bspline_basis", "random_expansion", "lift_expansion",
]
