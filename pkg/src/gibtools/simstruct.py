"""Invariant splittings, similarity Gram forms and the product-model structure of a certificate.

For a unimodular integer matrix ``A`` whose spectrum has two modulus classes,
``R^n = E + F`` splits into real invariant subspaces. ``A`` restricted to each
is a similarity for a suitable scalar product, and ``Z^n`` together with the
glide ``(x, t) -> (A x, s t)`` acts on ``E x (F x R_+)`` preserving
``b_E + (b_F + dt^2) / t^2`` up to the ratio ``lambda_E`` on the first block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .polyclass import (
    IntMatrix,
    TwoClassCertificate,
    char_poly,
    factor_over_integers,
    resolve_class,
)
from .polyclass.polynomial import exact_rank, poly_of_matrix
from .report import VerificationReport

SUBSPACE_TOL = 1e-8
GRAM_TOL = 1e-10
PULLBACK_TOL = 1e-9
BIEBERBACH_TOL = 1e-12


class NotSemisimpleOnClass(ValueError):
    pass


class IllConditioned(ArithmeticError):
    pass


class NoPositiveDefiniteSolution(ArithmeticError):
    pass


@dataclass(frozen=True)
class Tolerances:
    subspace: float = SUBSPACE_TOL
    gram: float = GRAM_TOL
    pullback: float = PULLBACK_TOL
    bieberbach: float = BIEBERBACH_TOL

    def to_json(self) -> dict:
        return {"subspace": self.subspace, "gram": self.gram,
                "pullback": self.pullback, "bieberbach": self.bieberbach}


@dataclass(frozen=True, eq=False)
class SubspacePair:
    basisE: np.ndarray          # n x q, orthonormal columns
    basisF: np.ndarray          # n x m
    residualsE: tuple
    residualsF: tuple
    sigma_min: float            # smallest singular value of [basisE basisF]

    @property
    def q(self) -> int:
        return self.basisE.shape[1]

    @property
    def m(self) -> int:
        return self.basisF.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        return self.q, self.m


@dataclass(frozen=True, eq=False)
class GramForm:
    G: np.ndarray
    lam: float
    residual: float
    min_eig: float

    @property
    def dim(self) -> int:
        return self.G.shape[0]


def _check_semisimple(A: IntMatrix, cert: TwoClassCertificate):
    # f(A) must have nullity e*deg f for every repeated irreducible factor f^e
    for f, e in factor_over_integers(cert.poly):
        if e == 1:
            continue
        fa = poly_of_matrix(f.coeffs, A)
        nullity = A.dim - exact_rank(fa.tolist())
        if nullity != e * f.degree:
            raise NotSemisimpleOnClass(
                f"factor {f} has multiplicity {e} but f(A) has nullity {nullity}, not {e * f.degree}")


def _sorted_schur(a: np.ndarray, select):
    _, z, sdim = linalg.schur(a, output="real", sort=select)
    return z, sdim


def invariant_subspaces(A: IntMatrix, cert: TwoClassCertificate, e_class: str = "expanding",
                        tol: float = SUBSPACE_TOL) -> SubspacePair:
    """Orthonormal bases of the invariant subspaces belonging to the two modulus classes.

    ``e_class`` picks which class plays E. Each basis comes from a real Schur
    form reordered so that the class's eigenvalues lead.
    """
    if char_poly(A) != cert.poly:
        raise ValueError("certificate does not match the characteristic polynomial of A")
    _check_semisimple(A, cert)
    which = resolve_class(cert, e_class)
    a = A.to_numpy().astype(float)
    cut = math.sqrt(float(cert.class_a.hi) * float(cert.class_b.lo))
    qa, sa = _sorted_schur(a, lambda re, im: math.hypot(re, im) < cut)
    qb, sb = _sorted_schur(a, lambda re, im: math.hypot(re, im) > cut)
    if (sa, sb) != cert.multiplicities:
        raise IllConditioned(f"Schur reordering found sizes {(sa, sb)}, expected {cert.multiplicities}")
    basis_a, basis_b = qa[:, :sa], qb[:, :sb]
    if which == "B":
        basis_a, basis_b = basis_b, basis_a
    scale = max(1.0, np.linalg.norm(a, 2))

    def residuals(q):
        av = a @ q
        return tuple(float(x) / scale for x in np.linalg.norm(av - q @ (q.T @ av), axis=0))

    rE, rF = residuals(basis_a), residuals(basis_b)
    sigma = float(np.linalg.svd(np.hstack([basis_a, basis_b]), compute_uv=False).min())
    if sigma < tol:
        raise IllConditioned(f"E and F nearly dependent (sigma_min = {sigma:.2e})")
    if max(rE + rF) > tol:
        raise IllConditioned(f"invariance residual {max(rE + rF):.2e} exceeds {tol:.0e}")
    return SubspacePair(basis_a, basis_b, rE, rF, sigma)


def _sym_basis(d: int) -> list[np.ndarray]:
    out = []
    for i in range(d):
        for j in range(i, d):
            e = np.zeros((d, d))
            e[i, j] = e[j, i] = 1.0
            out.append(e)
    return out


def _gram_residual(T, G, lam) -> float:
    return float(np.linalg.norm(T.T @ G @ T - lam ** 2 * G) / np.linalg.norm(G))


def similarity_gram(T: np.ndarray, lam: float, tol: float = GRAM_TOL, max_horizon: int = 1 << 16) -> GramForm:
    """Positive definite G with ``T^T G T = lam^2 G``, normalised to trace = dim.

    Solves for the kernel of ``G -> T^T G T - lam^2 G`` on symmetric matrices.
    A one-dimensional kernel fixes G up to sign. A larger kernel is resolved by
    projecting the Cesaro mean of ``lam^(-2k) (T^k)^T T^k`` onto it, with the
    horizon doubled until the projection is positive definite.
    """
    T = np.atleast_2d(np.asarray(T, dtype=float))
    d = T.shape[0]
    basis = _sym_basis(d)
    M = np.column_stack([(T.T @ E @ T - lam ** 2 * E).ravel() for E in basis])
    _, s, vt = np.linalg.svd(M)
    smax = max(s.max(initial=0.0), lam ** 2, 1.0)
    rank = int(np.sum(s > 1e-9 * smax))
    kernel = vt[rank:]
    if kernel.shape[0] == 0:
        raise NoPositiveDefiniteSolution("no symmetric form is scaled by lam^2")
    to_mat = lambda c: sum(ci * E for ci, E in zip(c, basis))

    def finish(G):
        G = 0.5 * (G + G.T)
        G *= d / np.trace(G)
        w = float(np.linalg.eigvalsh(G).min())
        r = _gram_residual(T, G, lam)
        return GramForm(G, float(lam), r, w)

    if kernel.shape[0] == 1:
        G = to_mat(kernel[0])
        if np.trace(G) < 0:
            G = -G
        out = finish(G)
        if out.min_eig <= 0 or out.residual > tol:
            raise NoPositiveDefiniteSolution(
                f"kernel form not positive definite (min eig {out.min_eig:.2e}, residual {out.residual:.2e})")
        return out

    project = lambda S: kernel.T @ (kernel @ _sym_coords(S, d))
    acc = np.zeros((d, d))
    P = np.eye(d)
    k = 0
    horizon = 8
    while horizon <= max_horizon:
        while k < horizon:
            acc += P.T @ P
            P = (T @ P) / lam
            k += 1
        G = to_mat(project(acc / k))
        if np.trace(G) > 0:
            out = finish(G)
            if out.min_eig > 0 and out.residual <= tol:
                return out
        horizon *= 2
    raise NoPositiveDefiniteSolution("Cesaro average did not produce a positive definite invariant form")


def _sym_coords(S: np.ndarray, d: int) -> np.ndarray:
    # inverse of _sym_basis expansion for a symmetric matrix
    return np.array([S[i, j] for i in range(d) for j in range(i, d)])


@dataclass(frozen=True, eq=False)
class GIBData:
    A: IntMatrix
    cert: TwoClassCertificate
    e_class: str
    subspaces: SubspacePair
    gramE: GramForm
    gramF: GramForm
    lambdaE: float
    lambdaF: float
    tScale: float
    tol: Tolerances = field(default_factory=Tolerances)

    @property
    def q(self) -> int:
        return self.subspaces.q

    @property
    def m(self) -> int:
        return self.subspaces.m

    @property
    def n(self) -> int:
        return self.A.dim

    @property
    def basis(self) -> np.ndarray:
        return np.hstack([self.subspaces.basisE, self.subspaces.basisF])

    @property
    def TE(self) -> np.ndarray:
        qe = self.subspaces.basisE
        return qe.T @ self.A.to_numpy().astype(float) @ qe

    @property
    def TF(self) -> np.ndarray:
        qf = self.subspaces.basisF
        return qf.T @ self.A.to_numpy().astype(float) @ qf

    @property
    def literal_t_scale(self) -> float:
        """The glide scaling ``lambda_E^-1`` read literally; equals tScale only when q = m."""
        return 1.0 / self.lambdaE

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c = np.linalg.solve(self.basis, x)
        return c[: self.q], c[self.q:]

    def metric(self, point: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
        """``h = b_E + (b_F + dt^2)/t^2`` at ``point = (x, t)``."""
        t = point[-1]
        if t <= 0:
            raise ValueError("t must be positive")
        uE, uF = self.split(u[:-1])
        vE, vF = self.split(v[:-1])
        flat = uF @ self.gramF.G @ vF + u[-1] * v[-1]
        return float(uE @ self.gramE.G @ vE + flat / t ** 2)

    def glide_matrix(self, t_scale: Optional[float] = None) -> np.ndarray:
        s = self.tScale if t_scale is None else t_scale
        out = np.zeros((self.n + 1, self.n + 1))
        out[: self.n, : self.n] = self.A.to_numpy().astype(float)
        out[-1, -1] = s
        return out

    def translation(self, i: int) -> np.ndarray:
        b = np.zeros(self.n + 1)
        b[i] = 1.0
        return b

    def to_json(self) -> dict:
        return {
            "matrix": self.A.tolist(),
            "certificate": self.cert.to_json(),
            "e_class": self.e_class,
            "q": self.q,
            "m": self.m,
            "basisE": self.subspaces.basisE.tolist(),
            "basisF": self.subspaces.basisF.tolist(),
            "gramE": self.gramE.G.tolist(),
            "gramF": self.gramF.G.tolist(),
            "lambdaE": self.lambdaE,
            "lambdaF": self.lambdaF,
            "tScale": self.tScale,
            "tolerances": self.tol.to_json(),
        }


def build_gib_data(A: IntMatrix, cert: TwoClassCertificate, e_class: str = "expanding",
                   t_scale: Optional[float] = None, tol: Tolerances = Tolerances()) -> GIBData:
    """Assemble the product-model data; ``t_scale`` overrides the glide scaling (fault runs)."""
    if abs(A.det()) != 1:
        raise ValueError("A is not unimodular")
    which = resolve_class(cert, e_class)
    other = "B" if which == "A" else "A"
    sub = invariant_subspaces(A, cert, which, tol.subspace)
    a = A.to_numpy().astype(float)
    TE = sub.basisE.T @ a @ sub.basisE
    TF = sub.basisF.T @ a @ sub.basisF
    lamE = float(cert.cluster(which).mid)
    lamF = float(cert.cluster(other).mid)
    gE = similarity_gram(TE, lamE, tol.gram)
    gF = similarity_gram(TF, lamF, tol.gram)
    s = lamF if t_scale is None else float(t_scale)
    return GIBData(A, cert, which, sub, gE, gF, lamE, lamF, s, tol)


def ratio_identity_residual(rho: float, phi: float, q: int) -> float:
    """``|log rho + log(phi)/q|``; zero exactly when rho = phi^(-1/q)."""
    return abs(math.log(rho) + math.log(phi) / q)


def bieberbach_ratio_check(data: GIBData) -> VerificationReport:
    """Check the ratio equation for the glide: rho = phi^(-1/q) with phi = |det A|_F|."""
    rep = VerificationReport()
    tol = data.tol.bieberbach
    phi = abs(float(np.linalg.det(data.TF)))
    rho = data.lambdaE
    r = ratio_identity_residual(rho, phi, data.q)
    rep.add("bieberbach ratio", r <= tol, r,
            f"rho={rho:.15g} phi={phi:.15g} q={data.q}")
    det = data.A.det()
    rep.add("lattice determinant", abs(det) == 1, float(abs(abs(det) - 1)), f"det A = {det}")
    expected = data.lambdaE ** (-data.q / data.m)
    dev = abs(data.tScale / expected - 1)
    rep.add("t-scale exponent", dev <= tol, dev,
            f"tScale={data.tScale:.15g} lambdaE^(-q/m)={expected:.15g}")
    rep.values.update({"rho": rho, "phi": phi, "q": data.q, "m": data.m})
    return rep


def _sample_points(data: GIBData, rng, samples: int) -> np.ndarray:
    x = rng.uniform(-2, 2, size=(samples, data.n))
    t = np.exp(rng.uniform(-2, 2, size=(samples, 1)))
    return np.hstack([x, t])


def conformal_factor_check(data: GIBData, samples: int = 100, seed=0) -> VerificationReport:
    """Equivariance of the height factor and the flat/similarity metrics it produces.

    Two factors are examined. ``f = t`` flattens the hyperbolic block into
    ``b_F + dt^2``; the glide rescales it by ``lambda_F``. ``f* = t^(-m/q)``
    is the factor whose glide ratio is the similarity ratio ``lambda_E``,
    turning ``b_E + f*^2 g_N`` into a metric the whole group scales by rho.
    """
    rng = np.random.default_rng(seed)
    tol = data.tol.pullback
    rep = VerificationReport()
    pts = _sample_points(data, rng, samples)
    g = data.glide_matrix()
    moved = pts @ g.T
    t0, t1 = pts[:, -1], moved[:, -1]
    expo = -data.m / data.q

    dev = np.max(np.abs((t1 / t0) / data.lambdaF - 1))
    rep.add("equivariance f=t", dev <= tol, dev,
            f"f(glide p)/f(p) vs lambda_F={data.lambdaF:.12g}")
    dev = np.max(np.abs((t1 ** expo / t0 ** expo) / data.lambdaE - 1))
    rep.add("equivariance f=t^(-m/q)", dev <= tol, dev,
            f"f(glide p)/f(p) vs rho=lambda_E={data.lambdaE:.12g}")

    GF, GE = data.gramF.G, data.gramE.G
    flat_dev, prod_dev = 0.0, 0.0
    for p, p1 in zip(pts, moved):
        u = rng.normal(size=data.n + 1)
        du = g @ u
        _, uF = data.split(u[:-1])
        _, duF = data.split(du[:-1])
        flat0 = uF @ GF @ uF + u[-1] ** 2
        flat1 = duF @ GF @ duF + du[-1] ** 2
        flat_dev = max(flat_dev, abs(math.sqrt(flat1 / flat0) / data.lambdaF - 1))

        uE, uF = data.split(u[:-1])
        duE, duF = data.split(du[:-1])
        w0 = p[-1] ** (2 * expo - 2)
        w1 = p1[-1] ** (2 * expo - 2)
        h0 = uE @ GE @ uE + w0 * (uF @ GF @ uF + u[-1] ** 2)
        h1 = duE @ GE @ duE + w1 * (duF @ GF @ duF + du[-1] ** 2)
        prod_dev = max(prod_dev, abs(math.sqrt(h1 / h0) / data.lambdaE - 1))
    rep.add("flat metric similarity", flat_dev <= tol, flat_dev,
            "glide on b_F + dt^2, ratio vs lambda_F")
    rep.add("product similarity", prod_dev <= tol, prod_dev,
            "glide on b_E + f*^2 g_N, ratio vs lambda_E")

    worst = 0.0
    for i in range(data.n):
        shifted = pts + data.translation(i)
        worst = max(worst, float(np.max(np.abs(shifted[:, -1] - pts[:, -1]))))
    rep.add("translation invariance", worst == 0.0, worst, f"{data.n} lattice generators")
    rep.values.update({"samples": samples, "seed": seed})
    return rep
