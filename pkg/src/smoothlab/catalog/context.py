"""Shared state of a catalog run: test functions, memoised solves and moduli."""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..approx import ApproxSpace, BestApproxConfig, BestApproxResult, best_approx
from ..approx.spaces import random_expansion
from ..corefun import CIRCLE, SYM, UNIT, PiecewisePoly, f_eps_r, interval_family, random_piecewise
from ..errors import ConfigError
from ..moduli import DEFAULT_SPEC, ModulusSpec, modulus_curve, modulus_integral
from ..quasinorm import DEFAULT_QUAD, QuadratureSpec

DOMAIN_OF = {"trig": CIRCLE, "spline": UNIT, "alg": SYM}
FAMILIES = ("f_eps_r", "abs", "random_pp", "element")

#: catalog solver budget; the library default is tuned for accuracy, not sweeps
CATALOG_SOLVER = {"starts": 3, "max_iters": 200}


def abs_function() -> PiecewisePoly:
    """``|x|`` on ``[-1, 1]``."""
    return PiecewisePoly(SYM, [-1.0, 0.0, 1.0], [[1.0, -1.0], [0.0, 1.0]])


def build_function(desc: dict, kind: str):
    """Test function named by ``desc`` on the domain of space ``kind``.

    Families: ``f_eps_r`` (``eps``, ``r``, interval ``offset``), ``abs``,
    ``random_pp`` (``seed``, ``pieces``, ``degree``) and ``element`` (a
    seeded random element of the space itself, ``n``).
    """
    fam = desc.get("family")
    dom = DOMAIN_OF[kind]
    if fam == "f_eps_r":
        eps, r = float(desc["eps"]), int(desc["r"])
        if kind == "trig":
            return f_eps_r(eps, r)
        return interval_family(eps, r, dom, float(desc.get("offset", -1.0)))
    if fam == "abs":
        if kind != "alg":
            raise ConfigError("the abs family lives on [-1, 1]")
        return abs_function()
    if fam == "random_pp":
        return random_piecewise(int(desc["seed"]), int(desc.get("pieces", 4)),
                                int(desc.get("degree", 2)), dom,
                                continuous=bool(desc.get("continuous", False)))
    if fam == "element":
        sp = {"trig": ApproxSpace.Trig, "alg": ApproxSpace.AlgPoly}.get(kind)
        if kind == "spline":
            space = ApproxSpace.Spline(int(desc.get("m", 2)), int(desc["n"]))
        else:
            space = sp(int(desc["n"]))
        return random_expansion(space, int(desc.get("seed", 0)))
    raise ConfigError(f"unknown function family {fam!r}")


def _key(*parts) -> str:
    return json.dumps(parts, sort_keys=True, default=str)


@dataclass
class Context:
    """Configuration plus memo tables shared by the checks of one run.

    Memo keys are full descriptions of the computation, so results do not
    depend on which check asked first.
    """

    seed: int = 0
    jobs: int = 1
    solver: dict = field(default_factory=lambda: dict(CATALOG_SOLVER))
    quad: QuadratureSpec = DEFAULT_QUAD
    modulus: ModulusSpec = DEFAULT_SPEC
    _memo: dict = field(default_factory=dict, repr=False)
    _locks: dict = field(default_factory=dict, repr=False)
    _guard: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        self.modulus = replace(self.modulus, quad=self.quad)

    @property
    def solver_config(self) -> BestApproxConfig:
        return BestApproxConfig(seed=self.seed, quad=self.quad, **self.solver)

    def memo(self, key: str, compute):
        with self._guard:
            if key in self._memo:
                return self._memo[key]
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            with self._guard:
                if key in self._memo:
                    return self._memo[key]
            value = compute()
            with self._guard:
                self._memo[key] = value
            return value

    def pmap(self, fn, items):
        items = list(items)
        if self.jobs > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as ex:
                return list(ex.map(fn, items))
        return [fn(x) for x in items]

    # -- functions ----------------------------------------------------------

    def function(self, desc: dict, kind: str, deriv: int = 0):
        def make():
            f = build_function(desc, kind)
            if deriv:
                f = f.derivative(deriv)
            return f
        return self.memo(_key("fn", desc, kind, deriv), make)

    # -- best approximation -------------------------------------------------

    def best(self, desc: dict, deriv: int, space: ApproxSpace, p: float) -> BestApproxResult:
        f = self.function(desc, space.kind, deriv)
        key = _key("best", desc, deriv, space.to_json(), float(p), self.solver, self.seed)
        return self.memo(key, lambda: best_approx(f, space, p, self.solver_config))

    def error(self, desc: dict, deriv: int, space: ApproxSpace, p: float) -> float:
        return self.best(desc, deriv, space, p).error

    def error_samples(self, desc, deriv, spaces: dict, p) -> dict:
        """``nu -> E`` for a mapping ``nu -> space`` (solved through :meth:`pmap`)."""
        nus = sorted(spaces)
        vals = self.pmap(lambda nu: self.error(desc, deriv, spaces[nu], p), nus)
        return dict(zip(nus, vals))

    # -- moduli -------------------------------------------------------------

    def curve(self, desc, kind, deriv, r, deltas, p, variant="plain", sigma=None) -> dict:
        """Moduli at ``deltas`` from one shared step grid; returns ``delta -> value``."""
        deltas = tuple(sorted({float(d) for d in deltas}))
        f = self.function(desc, kind, deriv)
        key = _key("curve", desc, kind, deriv, r, deltas, float(p), variant, sigma,
                   self.modulus.h_grid, self.modulus.h_span)
        vals = self.memo(key, lambda: modulus_curve(f, r, deltas, p, self.modulus, variant, sigma))
        return dict(zip(deltas, (float(v) for v in vals)))

    def integral(self, desc, kind, deriv, r, p, a_exp, deltas, levels=20, variant="plain",
                 sigma=None) -> dict:
        """``delta -> (int_0^delta omega_r(t)^p t^-a dt)^(1/p)`` for a dyadic family.

        All integrals share one modulus curve evaluated on the union of
        their dyadic ``t`` ladders.
        """
        deltas = [float(d) for d in deltas]
        ts = sorted({d * 2.0 ** -j for d in deltas for j in range(levels + 1)})
        table = self.curve(desc, kind, deriv, r, ts, p, variant, sigma)
        keys = np.array(sorted(table))
        vals = np.array([table[k] for k in keys])

        def omega(t):
            idx = np.searchsorted(keys, np.asarray(t) * (1 - 1e-12))
            return vals[idx]

        f = self.function(desc, kind, deriv)
        return {d: modulus_integral(f, r, p, a_exp, d, self.modulus, levels, variant, sigma,
                                    omega=omega) for d in deltas}


def dyadic(n0: int, n1: int) -> list[int]:
    """``n0, 2 n0, 4 n0, ...`` up to and including ``n1``."""
    out, v = [], int(n0)
    while v <= n1:
        out.append(v)
        v *= 2
    return out


def root(x: float, p: float) -> float:
    return x ** (1.0 / p) if x > 0 else 0.0


__all__ = ["Context", "build_function", "abs_function", "dyadic", "root", "DOMAIN_OF",
           "CATALOG_SOLVER"]
