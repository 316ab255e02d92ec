"""Curvature of ``dt^2 + |e^{tA} dx|^2`` from the Lie algebra ``[T, X] = A X``."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .models import Heintze


class DegeneratePlane(ValueError):
    pass


def structure_constants(A) -> np.ndarray:
    """``C[i, j, k] = <[e_i, e_j], e_k>`` for the orthonormal basis e_0 = T, e_i = X_i."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0] + 1
    C = np.zeros((n, n, n))
    C[0, 1:, 1:] = A.T          # [T, X_i] = sum_k A[k, i] X_k
    C[1:, 0, 1:] = -A.T
    return C


def levi_civita(C: np.ndarray) -> np.ndarray:
    """``G[i, j, k] = <nabla_{e_i} e_j, e_k>`` by the Koszul formula."""
    return 0.5 * (C - np.einsum("jki->ijk", C) + np.einsum("kij->ijk", C))


def riemann_tensor(A) -> np.ndarray:
    """``R[i, j, k, m] = <R(e_i, e_j) e_k, e_m>`` with ``R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y]``."""
    C = structure_constants(A)
    G = levi_civita(C)
    return (np.einsum("jkl,ilm->ijkm", G, G)
            - np.einsum("ikl,jlm->ijkm", G, G)
            - np.einsum("ijl,lkm->ijkm", C, G))


def sectional(R: np.ndarray, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    area = (x @ x) * (y @ y) - (x @ y) ** 2
    if area <= 1e-12 * (x @ x) * (y @ y):
        raise DegeneratePlane("vectors are (nearly) parallel")
    return float(np.einsum("ijkm,i,j,k,m->", R, x, y, y, x) / area)


@dataclass
class CurvatureScan:
    A: np.ndarray
    planes: list            # (x, y, K)
    seed: object

    @property
    def values(self) -> np.ndarray:
        return np.array([k for _, _, k in self.planes])

    @property
    def min(self) -> float:
        return float(self.values.min())

    @property
    def max(self) -> float:
        return float(self.values.max())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        n = self.A.shape[0] + 1
        w.writerow([f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)] + ["K"])
        for x, y, k in self.planes:
            w.writerow([repr(float(v)) for v in x] + [repr(float(v)) for v in y] + [repr(k)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "planes": len(self.planes), "min": self.min,
                "max": self.max, "seed": self.seed}


def heintze_curvature(A, plane_samples: int = 100, seed=0) -> CurvatureScan:
    """Sectional curvatures on all coordinate planes plus seeded random orthonormal planes."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    R = riemann_tensor(A)
    n = A.shape[0] + 1
    eye = np.eye(n)
    planes = []
    for i in range(n):
        for j in range(i + 1, n):
            planes.append((eye[i], eye[j], sectional(R, eye[i], eye[j])))
    rng = np.random.default_rng(seed)
    while len(planes) < n * (n - 1) // 2 + plane_samples:
        x, y = rng.normal(size=n), rng.normal(size=n)
        x /= np.linalg.norm(x)
        y -= (x @ y) * x
        if np.linalg.norm(y) < 1e-6:
            continue    # degenerate draw, resample
        y /= np.linalg.norm(y)
        planes.append((x, y, sectional(R, x, y)))
    return CurvatureScan(A, planes, seed)


# finite differences on the coordinate metric ---------------------------------

def _christoffel(model: Heintze, p, h: float) -> np.ndarray:
    """``Gam[m, i, j]`` of the coordinate metric, derivatives by central differences."""
    n = model.dim
    dg = np.zeros((n, n, n))      # dg[l] = d_l g
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dg[l] = (model.tensor(p + e) - model.tensor(p - e)) / (2 * h)
    ginv = np.linalg.inv(model.tensor(p))
    low = 0.5 * (dg + np.einsum("jil->ijl", dg) - np.einsum("lij->ijl", dg))   # [i, j, l]
    return np.einsum("ml,ijl->mij", ginv, low)


def fd_sectional(A, point, u, v, h: float = 1e-3) -> float:
    """Sectional curvature of the coordinate plane span(u, v) at ``point`` by nested differences."""
    model = Heintze(A)
    p = np.asarray(point, dtype=float)
    n = model.dim
    gam = _christoffel(model, p, h)
    dgam = np.zeros((n, n, n, n))     # dgam[l] = d_l Gam
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dgam[l] = (_christoffel(model, p + e, h) - _christoffel(model, p - e, h)) / (2 * h)
    # R(d_i, d_j) d_k = Rm[m, i, j, k] d_m
    Rm = (np.einsum("imjk->mijk", dgam) - np.einsum("jmik->mijk", dgam)
          + np.einsum("ljk,mil->mijk", gam, gam) - np.einsum("lik,mjl->mijk", gam, gam))
    g = model.tensor(p)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    num = np.einsum("mijk,i,j,k,mn,n->", Rm, u, v, v, g, u)
    area = (u @ g @ u) * (v @ g @ v) - (u @ g @ v) ** 2
    return float(num / area)


def coordinate_to_algebra(A, point, w) -> np.ndarray:
    """Coordinate tangent ``(tau, dx)`` at ``(t, x)`` in the orthonormal frame ``(T, X_i)``.

    The vertical direction reverses because T points toward the fixed point at t = -inf.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    w = np.asarray(w, dtype=float)
    t = float(point[0])
    return np.concatenate([[-w[0]], expm(t * A) @ w[1:]])
