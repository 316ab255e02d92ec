"""Jacobi fields along vertical geodesics of a Heintze group.

The geodesic runs at unit speed toward the fixed point at t = -inf, i.e. along
the left-invariant field T. The horospherical field ``(0, w0)`` at the start
has norm ``|e^{-s A} w0|`` after distance s, which gives a closed-form oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from ..report import VerificationReport
from .curvature import levi_civita, riemann_tensor, structure_constants
from .models import Heintze, UpperHalfSpace

STEPS_PER_UNIT = 10_000


class NotContracting(ArithmeticError):
    pass


def _rk4_propagator(K: np.ndarray, h: float) -> np.ndarray:
    # one classical RK4 step of z' = K z is multiplication by this matrix
    hk = h * K
    hk2 = hk @ hk
    hk3 = hk2 @ hk
    return np.eye(K.shape[0]) + hk + hk2 / 2 + hk3 / 6 + hk3 @ hk / 24


@dataclass
class JacobiResult:
    A: np.ndarray
    alpha: float
    direction: np.ndarray
    norms: np.ndarray
    closed_form: float
    report: VerificationReport = field(default_factory=VerificationReport)

    @property
    def ratio(self) -> float:
        return float(self.norms[-1] / self.norms[0])

    @property
    def contracting(self) -> bool:
        return self.report.passed

    def to_json(self) -> dict:
        return {"A": self.A.tolist(), "alpha": self.alpha, "direction": self.direction.tolist(),
                "steps": len(self.norms) - 1, "ratio": self.ratio,
                "closed_form": self.closed_form, "report": self.report.to_json()}


def _model_matrix(model) -> np.ndarray:
    if isinstance(model, UpperHalfSpace):
        return np.eye(model.n - 1)      # y = e^{-t} identifies it with Heintze(I)
    if isinstance(model, Heintze):
        return model.A
    return np.atleast_2d(np.asarray(model, dtype=float))


def jacobi_contraction(model, alpha: float, direction, steps_per_unit: int = STEPS_PER_UNIT,
                       tol: float = 1e-6) -> JacobiResult:
    """Integrate ``J'' = -R(J, g')g'`` over distance ``alpha`` toward the fixed point.

    ``direction`` is a vector in R^{n-1}, tangent to the horosphere t = 0; it is
    normalised. Works in the orthonormal left-invariant frame, where the
    covariant system has constant coefficients.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    A = np.atleast_2d(np.asarray(_model_matrix(model), dtype=float))
    k = A.shape[0]
    n = k + 1
    w0 = np.asarray(direction, dtype=float).ravel()
    if w0.shape != (k,) or not np.linalg.norm(w0) > 0:
        raise ValueError(f"direction must be a nonzero vector of length {k}")
    w0 = w0 / np.linalg.norm(w0)

    C = structure_constants(A)
    G = levi_civita(C)
    R = riemann_tensor(A)
    N = G[0]                       # N[a, b] = <nabla_T e_a, e_b>
    Rg = R[:, 0, 0, :].T           # (Rg j)_m = sum_k j_k R[k, 0, 0, m]
    # state z = (j, w) with w the covariant derivative of J in frame components
    K = np.block([[-N.T, np.eye(n)], [-Rg, -N.T]])
    j0 = np.concatenate([[0.0], w0])
    w_init = np.concatenate([[0.0], -A @ w0]) + N.T @ j0
    z = np.concatenate([j0, w_init])

    steps = int(math.ceil(alpha * steps_per_unit)) if alpha > 0 else 0
    norms = [float(np.linalg.norm(z[:n]))]
    if steps:
        P = _rk4_propagator(K, alpha / steps)
        for _ in range(steps):
            z = P @ z
            norms.append(float(np.linalg.norm(z[:n])))
    norms = np.array(norms)
    closed = float(np.linalg.norm(expm(-alpha * A) @ w0))

    res = JacobiResult(A, float(alpha), w0, norms, closed)
    diffs = np.diff(norms)
    worst = float(diffs.max()) if len(diffs) else 0.0
    res.report.add("strictly decreasing", worst < 0 or steps == 0, worst,
                   f"{steps} RK4 steps; largest step change {worst:.3e}")
    err = abs(res.ratio - closed)
    res.report.add("closed form", err <= tol, err, f"ratio={res.ratio:.12g} |e^(-alpha A) w0|={closed:.12g}")
    return res
