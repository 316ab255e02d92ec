"""Metric models: the product model of a GIB structure, the upper half-space and Heintze groups."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from ..report import VerificationReport
from ..simstruct import PULLBACK_TOL, GIBData


class OutOfDomain(ValueError):
    pass


class MetricModel:
    """Riemannian metric on an open subset of R^dim given by a Gram matrix per point."""

    dim: int

    def tensor(self, point) -> np.ndarray:
        raise NotImplementedError

    def sample_point(self, rng) -> np.ndarray:
        raise NotImplementedError

    def blocks(self) -> dict:
        """Named tangent subspaces (columns span the block) used by pullback sampling."""
        return {"all": np.eye(self.dim)}


@dataclass(frozen=True, eq=False)
class UpperHalfSpace(MetricModel):
    """``(|dx|^2 + dt^2) / t^2`` on points ``(x_1, ..., x_{n-1}, t)`` with t > 0."""

    n: int

    @property
    def dim(self) -> int:
        return self.n

    def tensor(self, point) -> np.ndarray:
        t = float(point[-1])
        if not t > 0:
            raise OutOfDomain(f"height {t} is not positive")
        return np.eye(self.n) / t ** 2

    def sample_point(self, rng) -> np.ndarray:
        return np.append(rng.uniform(-2, 2, self.n - 1), math.exp(rng.uniform(-2, 2)))


@dataclass(frozen=True, eq=False)
class Heintze(MetricModel):
    """``dt^2 + |e^{tA} dx|^2`` on points ``(t, x)``; the fixed point at infinity is t = -inf."""

    A: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        if a.shape[0] != a.shape[1]:
            raise ValueError("A must be square")
        object.__setattr__(self, "A", a)

    @property
    def dim(self) -> int:
        return self.A.shape[0] + 1

    def tensor(self, point) -> np.ndarray:
        s = expm(float(point[0]) * self.A)
        g = np.zeros((self.dim, self.dim))
        g[0, 0] = 1.0
        g[1:, 1:] = s.T @ s
        return g

    def sample_point(self, rng) -> np.ndarray:
        return rng.uniform(-1, 1, self.dim)


def uhs_to_heintze(point) -> np.ndarray:
    """Upper half-space (x, y) to Heintze(I) coordinates (t, x) with y = e^{-t}."""
    p = np.asarray(point, dtype=float)
    return np.concatenate([[-math.log(p[-1])], p[:-1]])


def heintze_to_uhs(point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    return np.append(p[1:], math.exp(-p[0]))


@dataclass(frozen=True, eq=False)
class ProductGIB(MetricModel):
    """``b_E + (b_F + dt^2)/t^2`` on points ``(x, t)``, x in R^n, t > 0."""

    data: GIBData

    @property
    def dim(self) -> int:
        return self.data.n + 1

    def tensor(self, point) -> np.ndarray:
        t = float(point[-1])
        if not t > 0:
            raise OutOfDomain(f"height {t} is not positive")
        inv = np.linalg.inv(self.data.basis)      # x -> (c_E, c_F)
        q = self.data.q
        cE, cF = inv[:q], inv[q:]
        g = np.zeros((self.dim, self.dim))
        g[:-1, :-1] = cE.T @ self.data.gramE.G @ cE + cF.T @ self.data.gramF.G @ cF / t ** 2
        g[-1, -1] = 1.0 / t ** 2
        return g

    def sample_point(self, rng) -> np.ndarray:
        return np.append(rng.uniform(-2, 2, self.data.n), math.exp(rng.uniform(-2, 2)))

    def blocks(self) -> dict:
        n = self.data.n
        e = np.vstack([self.data.subspaces.basisE, np.zeros((1, self.data.q))])
        f = np.zeros((n + 1, self.data.m + 1))
        f[:n, : self.data.m] = self.data.subspaces.basisF
        f[n, self.data.m] = 1.0
        return {"E": e, "N": f}


def metric_eval(model: MetricModel, point, u, v) -> float:
    return float(np.asarray(u, dtype=float) @ model.tensor(point) @ np.asarray(v, dtype=float))


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``p -> M p + b`` on full model coordinates."""

    M: np.ndarray
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.M, dtype=float))
        object.__setattr__(self, "M", m)
        b = np.zeros(m.shape[0]) if self.b is None else np.asarray(self.b, dtype=float)
        object.__setattr__(self, "b", b)

    def __call__(self, p) -> np.ndarray:
        return self.M @ np.asarray(p, dtype=float) + self.b

    @classmethod
    def identity(cls, dim: int) -> "AffineMap":
        return cls(np.eye(dim))


def glide_map(data: GIBData, t_scale: Optional[float] = None) -> AffineMap:
    return AffineMap(data.glide_matrix(t_scale))


def translation_map(data: GIBData, i: int) -> AffineMap:
    return AffineMap(np.eye(data.n + 1), data.translation(i))


def pullback_ratio_report(model: MetricModel, amap: AffineMap, samples: int = 100, seed=0,
                          expected: Optional[dict] = None, tol: float = PULLBACK_TOL,
                          label: str = "") -> VerificationReport:
    """Sample ``sqrt(g(dphi u, dphi u) / g(u, u))`` per block.

    A block passes when the sampled ratios stay within ``tol`` of their median
    and, if an expected ratio is given for the block, of that value.
    """
    rng = np.random.default_rng(seed)
    rep = VerificationReport()
    prefix = f"{label} " if label else ""
    for name, basis in model.blocks().items():
        ratios = []
        for _ in range(samples):
            p = model.sample_point(rng)
            u = basis @ rng.normal(size=basis.shape[1])
            g0 = metric_eval(model, p, u, u)
            g1 = metric_eval(model, amap(p), amap.M @ u, amap.M @ u)
            ratios.append(math.sqrt(g1 / g0))
        r = np.array(ratios)
        med = float(np.median(r))
        spread = float(np.max(np.abs(r - med)))
        ok = spread <= tol
        detail = f"median={med:.15g} spread={spread:.3e}"
        resid = spread
        if expected is not None and name in expected:
            dev = float(np.max(np.abs(r - expected[name])))
            ok = ok and dev <= tol
            resid = max(spread, dev)
            detail += f" expected={expected[name]:.15g}"
        rep.add(f"{prefix}pullback {name}", ok, resid, detail)
        rep.values[f"{prefix}ratio {name}"] = med
    return rep


def gib_pullback_report(data: GIBData, samples: int = 100, seed=0,
                        t_scale: Optional[float] = None) -> VerificationReport:
    """Glide: ratio lambda_E on E and 1 on N; each lattice translation: 1 on both."""
    model = ProductGIB(data)
    tol = data.tol.pullback
    rep = pullback_ratio_report(model, glide_map(data, t_scale), samples, seed,
                                {"E": data.lambdaE, "N": 1.0}, tol, "glide")
    for i in range(data.n):
        rep.extend(pullback_ratio_report(model, translation_map(data, i), samples, seed,
                                         {"E": 1.0, "N": 1.0}, tol, f"translation e{i}"))
    return rep
