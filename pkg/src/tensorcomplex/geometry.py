"""Metric charts, Calabi operators, curvature of data metrics and shell residuals.

Curvature convention: R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z
and Rm(X1, X2, X3, X4) = G(R(X1, X2)X3, X4).  With this convention a metric of
constant sectional curvature k has Rm_1212 = -k det G.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import EPS, partial
from .fields import (CURV4, CURV4_2D, CURV4_3D, CURV5, CURV5_3D, SCALAR, TENSOR02SYM, TensorField, Valence,
                     ValenceError, from_dense)
from .mesh import Domain, erode


class GeometryError(ValueError):
    """Degenerate metric, immersion or chart mismatch."""


# ------------------------------------------------------------------- charts
@dataclass(frozen=True)
class MetricChart:
    """Metric and Christoffel symbols of a chart as closed forms of the coordinates.

    ``metric_fn(*coords)`` returns G as an (n, n, *grid) array and
    ``christoffel_fn(*coords)`` returns Gamma[k, i, j] = Gamma^k_ij, or None for
    a flat Cartesian chart.  ``k`` is the constant sectional curvature (None if
    the chart has none).
    """

    chart: str
    ndim: int
    k: float | None
    metric_fn: Callable[..., np.ndarray]
    christoffel_fn: Callable[..., np.ndarray | None]
    radius: float | None = None

    @classmethod
    def cartesian(cls, n: int) -> "MetricChart":
        def metric(*X):
            return np.broadcast_to(np.eye(n).reshape((n, n) + (1,) * len(X[0].shape)), (n, n) + X[0].shape)

        return cls(f"cartesian{n}", n, 0.0, metric, lambda *X: None)

    @classmethod
    def spherical(cls, R: float = 1.0) -> "MetricChart":
        """Round sphere of radius R in (theta, phi), phi the polar angle."""

        def metric(theta, phi):
            G = np.zeros((2, 2) + phi.shape)
            G[0, 0] = R * R * np.sin(phi) ** 2
            G[1, 1] = R * R
            return G

        def christoffel(theta, phi):
            Gam = np.zeros((2, 2, 2) + phi.shape)
            Gam[1, 0, 0] = -0.5 * np.sin(2 * phi)
            cot = np.cos(phi) / np.sin(phi)
            Gam[0, 0, 1] = cot
            Gam[0, 1, 0] = cot
            return Gam

        return cls("spherical", 2, 1.0 / (R * R), metric, christoffel, radius=float(R))

    @classmethod
    def for_domain(cls, domain: Domain) -> "MetricChart":
        if domain.chart == "spherical":
            return cls.spherical(domain.radius)
        return cls.cartesian(domain.ndim)

    @property
    def flat(self) -> bool:
        return self.chart.startswith("cartesian")

    def check_domain(self, domain: Domain) -> None:
        if domain.ndim != self.ndim:
            raise GeometryError(f"{self.ndim}D metric chart used on a {domain.ndim}D domain")
        if self.chart != "custom" and self.chart != domain.chart:
            raise GeometryError(f"metric chart {self.chart!r} does not match domain chart {domain.chart!r}")
        if self.chart == "spherical" and not math.isclose(self.radius, domain.radius):
            raise GeometryError("spherical metric radius differs from the domain radius")

    def _cached(self, domain: Domain, name: str, make):
        key = ("metric", self.chart, self.radius, id(self.metric_fn), name)
        cache = domain._cache
        if key not in cache:
            arr = np.ascontiguousarray(make())
            arr.flags.writeable = False
            cache[key] = arr
        return cache[key]

    def G(self, domain: Domain) -> np.ndarray:
        return self._cached(domain, "G", lambda: np.array(self.metric_fn(*domain.coords()), dtype=float))

    def Ginv(self, domain: Domain) -> np.ndarray:
        G = self.G(domain)
        return self._cached(domain, "Ginv", lambda: np.moveaxis(np.linalg.inv(np.moveaxis(G, (0, 1), (-2, -1))),
                                                                 (-2, -1), (0, 1)))

    def sqrt_det(self, domain: Domain) -> np.ndarray:
        G = self.G(domain)
        return self._cached(domain, "sqrtdet",
                            lambda: np.sqrt(np.linalg.det(np.moveaxis(G, (0, 1), (-2, -1)))))

    def christoffel(self, domain: Domain) -> np.ndarray | None:
        if self.flat:
            return None
        return self._cached(domain, "Gamma", lambda: np.array(self.christoffel_fn(*domain.coords()), dtype=float))


def _metric_for(f: TensorField, metric: MetricChart | None) -> MetricChart:
    metric = MetricChart.for_domain(f.domain) if metric is None else metric
    metric.check_domain(f.domain)
    return metric


# ------------------------------------------------------------ index helpers
def curv4_indices(n: int) -> list[tuple[int, int, int, int]]:
    names = CURV4_3D if n == 3 else CURV4_2D
    return [tuple(int(c) - 1 for c in name) for name in names]


def curv4_dense(s: TensorField) -> np.ndarray:
    """Full s_abcd from stored components (s = eps_abp eps_cdq S_pq in 3D)."""
    if s.valence.kind != "curv4":
        raise ValenceError("expected a curv4 field")
    n = s.n
    if n == 2:
        e2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
        return np.einsum("ab,cd,...->abcd...", e2, e2, s.data[0])
    S = np.empty((3, 3) + s.domain.shape)
    order = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    for c, (p, q) in enumerate(order):
        S[p, q] = S[q, p] = s.data[c]
    return np.einsum("abp,cdq,pq...->abcd...", EPS, EPS, S)


def _pick(full_fn, n: int) -> np.ndarray:
    return np.stack([full_fn(*idx) for idx in curv4_indices(n)])


def _check_posdef(C: np.ndarray, valid: np.ndarray) -> None:
    """Leading principal minors positive at every valid node."""
    n = C.shape[0]
    for m in range(1, n + 1):
        with np.errstate(invalid="ignore"):
            minor = np.linalg.det(np.moveaxis(C[:m, :m], (0, 1), (-2, -1)))
        bad = valid & ~(minor > 0)
        if bad.any():
            raise GeometryError(f"metric not positive-definite at {int(bad.sum())} nodes (minor {m})")


# ------------------------------------------------------------- Calabi chain
def lower(U: TensorField, metric: MetricChart) -> np.ndarray:
    G = metric.G(U.domain)
    return np.einsum("ij...,j...->i...", G, U.data)


def killing_D0(U: TensorField, metric: MetricChart | None = None) -> TensorField:
    """(D0 U)_ij = (U_i;j + U_j;i) / 2 with U_i = G_ij U^j."""
    if U.valence.kind != "vector" or U.valence.m(U.n) != U.n:
        raise ValenceError("Killing operator needs a tangent vector field")
    metric = _metric_for(U, metric)
    n, h = U.n, U.domain.grid.spacing
    Ul = lower(U, metric)
    cov = np.stack([np.stack([partial(Ul[i], j, h[j], n) for j in range(n)]) for i in range(n)])
    Gam = metric.christoffel(U.domain)
    if Gam is not None:
        cov = cov - np.einsum("mji...,m...->ij...", Gam, Ul)
    sym = 0.5 * (cov + np.swapaxes(cov, 0, 1))
    return from_dense(U.domain, TENSOR02SYM, sym, erode(U.valid))


class _Cov:
    """Covariant derivatives of a symmetric (0,2) field, memoized per component."""

    def __init__(self, e: np.ndarray, Gam: np.ndarray | None, h, n: int):
        self.e, self.Gam, self.h, self.n = e, Gam, h, n
        self._t1: dict = {}
        self._t2: dict = {}

    def t1(self, c, b, d):
        """e_bd;c"""
        key = (c, b, d)
        if key not in self._t1:
            v = partial(self.e[b, d], c, self.h[c], self.n)
            if self.Gam is not None:
                for m in range(self.n):
                    v = v - self.Gam[m, c, b] * self.e[m, d] - self.Gam[m, c, d] * self.e[b, m]
            self._t1[key] = v
        return self._t1[key]

    def t2(self, a, c, b, d):
        """e_bd;ca (second covariant derivative, last index outermost)."""
        key = (a, c, b, d)
        if key not in self._t2:
            v = partial(self.t1(c, b, d), a, self.h[a], self.n)
            if self.Gam is not None:
                for m in range(self.n):
                    v = v - (self.Gam[m, a, c] * self.t1(m, b, d) + self.Gam[m, a, b] * self.t1(c, m, d)
                             + self.Gam[m, a, d] * self.t1(c, b, m))
            self._t2[key] = v
        return self._t2[key]


def _sym_input(e: TensorField) -> None:
    if e.valence.kind != "tensor02sym":
        raise ValenceError(f"expected a tensor02sym field, got {e.valence.spec()}")


def _linear_curvature(e: TensorField, metric: MetricChart, k_sign: float) -> TensorField:
    _sym_input(e)
    metric = _metric_for(e, metric)
    if metric.k is None:
        raise GeometryError("linearized curvature needs a chart with constant curvature k")
    n = e.n
    E = e.dense()
    G = metric.G(e.domain)
    cov = _Cov(E, metric.christoffel(e.domain), e.domain.grid.spacing, n)
    k = metric.k

    def comp(i1, i2, i3, i4):
        L = (cov.t2(i1, i3, i2, i4) + cov.t2(i2, i4, i1, i3)
             - cov.t2(i1, i4, i2, i3) - cov.t2(i2, i3, i1, i4))
        if k == 0.0:
            return L
        kt = G[i2, i3] * E[i1, i4] - G[i1, i3] * E[i2, i4] - G[i2, i4] * E[i1, i3] + G[i1, i4] * E[i2, i3]
        return L + k_sign * k * kt

    valid = erode(erode(e.valid))
    return TensorField(e.domain, CURV4, _pick(comp, n), valid)


def calabi_D1(e: TensorField, metric: MetricChart | None = None) -> TensorField:
    """Linearized compatibility operator of the Calabi complex.

    It is the derivative at A = G of the curvature defect Rm^A - k (A wedge A),
    whose kernel on D0-images makes D1 o D0 = 0.  In coordinates,
    (D1 e)_1234 = e_24;31 + e_13;42 - e_23;41 - e_14;32
                  - k (G_23 e_14 - G_13 e_24 - G_24 e_13 + G_14 e_23).
    """
    return _linear_curvature(e, metric, -1.0)


def linearized_riemann(e: TensorField, metric: MetricChart | None = None) -> TensorField:
    """Derivative of Rm^A alone at A = G (twice the linearized Riemann tensor).

    Differs from :func:`calabi_D1` only in the sign of the k-terms; it does not
    annihilate D0-images on curved charts.
    """
    return _linear_curvature(e, metric, +1.0)


def calabi_D2(s: TensorField, metric: MetricChart | None = None) -> TensorField:
    """(D2 s)_abcde = s_bcde;a + s_cade;b + s_abde;c, components 12323, 21313, 31212."""
    if s.valence.kind != "curv4":
        raise ValenceError("D2 needs a curv4 field")
    if s.n != 3:
        raise GeometryError("D2 is only part of the 3D complex")
    metric = _metric_for(s, metric)
    S = curv4_dense(s)
    h = s.domain.grid.spacing
    Gam = metric.christoffel(s.domain)

    def cov(a, b, c, d, e):
        v = partial(S[b, c, d, e], a, h[a], 3)
        if Gam is not None:
            for m in range(3):
                v = v - (Gam[m, a, b] * S[m, c, d, e] + Gam[m, a, c] * S[b, m, d, e]
                         + Gam[m, a, d] * S[b, c, m, e] + Gam[m, a, e] * S[b, c, d, m])
        return v

    out = []
    for name in CURV5_3D:
        a, b, c, d, e = (int(ch) - 1 for ch in name)
        out.append(cov(a, b, c, d, e) + cov(b, c, a, d, e) + cov(c, a, b, d, e))
    return TensorField(s.domain, CURV5, np.stack(out), erode(s.valid))


def sphere_compat_residual(e: TensorField, physical: bool = False) -> TensorField:
    """Linearized compatibility residual on the round sphere in (theta, phi).

    With coordinate components e_11 = e_theta theta etc. the residual is
        e11,pp - 2 e12,tp + e22,tt - 2 cot(p) e11,p - sin(2p)/2 e22,p
        + 2 e11 / sin^2(p) + 2 sin^2(p) e22,
    which equals (D1 e)_1212.  With ``physical=True`` the stored components are
    taken in the orthonormal frame and converted first:
    e11 = R^2 sin^2(p) e_tt, e12 = R^2 sin(p) e_tp, e22 = R^2 e_pp.
    """
    _sym_input(e)
    dom = e.domain
    if dom.chart != "spherical":
        raise GeometryError("sphere_compat_residual needs the spherical chart")
    R = dom.radius
    _, phi = dom.coords()
    sp = np.sin(phi)
    E = e.dense()
    e11, e12, e22 = E[0, 0], E[0, 1], E[1, 1]
    if physical:
        e11 = R * R * sp * sp * e11
        e12 = R * R * sp * e12
        e22 = R * R * e22
    ht, hp = dom.grid.spacing

    def d(a, axis):
        return partial(a, axis, (ht, hp)[axis], 2)

    res = (d(d(e11, 1), 1) - 2.0 * d(d(e12, 1), 0) + d(d(e22, 0), 0)
           - 2.0 * np.cos(phi) / sp * d(e11, 1) - 0.5 * np.sin(2 * phi) * d(e22, 1)
           + 2.0 / (sp * sp) * e11 + 2.0 * sp * sp * e22)
    return TensorField(dom, SCALAR, res[None], erode(erode(e.valid)))


# ----------------------------------------------------------- data metrics
def jacobian(phi: TensorField) -> np.ndarray:
    """F[i, I] = phi^i,_I by central differences."""
    if phi.valence.kind != "vector":
        raise ValenceError("an embedding is a vector(m) field of map components")
    n, h = phi.n, phi.domain.grid.spacing
    return np.stack([np.stack([partial(phi.data[i], I, h[I], n) for I in range(n)])
                     for i in range(phi.data.shape[0])])


def green_deformation(phi: TensorField, ambient: MetricChart | None = None) -> TensorField:
    """C_IJ = g_ij F^i_I F^j_J for a map into Cartesian R^2 or R^3."""
    m = phi.valence.m(phi.n)
    if m not in (2, 3) or m < phi.n:
        raise GeometryError("ambient space must be Cartesian R^2 or R^3 of at least the body dimension")
    if ambient is not None and not ambient.flat:
        raise GeometryError("only Cartesian ambient spaces are supported")
    F = jacobian(phi)
    valid = erode(phi.valid)
    C = np.einsum("iI...,iJ...->IJ...", F, F)
    with np.errstate(invalid="ignore"):
        det = np.linalg.det(np.moveaxis(C, (0, 1), (-2, -1)))
    scale = np.max(np.abs(C[:, :, valid])) if valid.any() else 1.0
    bad = valid & ~(det > 1e-12 * scale ** phi.n)
    if bad.any():
        raise GeometryError(f"rank-deficient Jacobian at {int(bad.sum())} interior nodes")
    return from_dense(phi.domain, TENSOR02SYM, C, valid)


def christoffel_of(C: TensorField) -> tuple[np.ndarray, np.ndarray]:
    """Gamma[k, i, j] of a data metric by central differences; also returns the valid region."""
    _sym_input(C)
    n, h = C.n, C.domain.grid.spacing
    M = C.dense()
    _check_posdef(M, C.valid)
    with np.errstate(invalid="ignore"):
        Minv = np.moveaxis(np.linalg.inv(np.moveaxis(np.nan_to_num(M, nan=0.0) + _nan_eye(M, C.valid),
                                                     (0, 1), (-2, -1))), (-2, -1), (0, 1))
    dM = np.stack([np.stack([np.stack([partial(M[i, j], a, h[a], n) for a in range(n)])
                             for j in range(n)]) for i in range(n)])  # dM[i, j, a] = C_ij,a
    low = np.empty((n, n, n) + C.domain.shape)  # low[l, i, j] = Gamma_lij
    for l in range(n):
        for i in range(n):
            for j in range(n):
                low[l, i, j] = 0.5 * (dM[l, j, i] + dM[l, i, j] - dM[i, j, l])
    Gam = np.einsum("kl...,lij...->kij...", Minv, low)
    return Gam, erode(C.valid)


def _nan_eye(M: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Identity on invalid nodes so batched inverses stay finite there."""
    n = M.shape[0]
    out = np.zeros_like(M)
    for i in range(n):
        out[i, i] = np.where(valid, 0.0, 1.0)
    return out


def _riemann_lowered(C: TensorField):
    """Rm(a, b, c, d) = C_de R^e_{c ab}; returns a component function and valid region."""
    n, h = C.n, C.domain.grid.spacing
    M = C.dense()
    Gam, valid1 = christoffel_of(C)
    memo: dict = {}

    def dGam(a, d, b, c):
        key = (a, d, b, c)
        if key not in memo:
            memo[key] = partial(Gam[d, b, c], a, h[a], n)
        return memo[key]

    def Rv(a, b, c, d):
        # d-component of R(e_a, e_b) e_c
        v = dGam(a, d, b, c) - dGam(b, d, a, c)
        for e in range(n):
            v = v + Gam[e, b, c] * Gam[d, a, e] - Gam[e, a, c] * Gam[d, b, e]
        return v

    def Rm(a, b, c, d):
        return sum(M[d, e] * Rv(a, b, c, e) for e in range(n))

    return Rm, Gam, erode(valid1)


def curvature_of_metric(C: TensorField) -> TensorField:
    """Stored curvature components Rm_abcd of the data metric C."""
    Rm, _, valid = _riemann_lowered(C)
    return TensorField(C.domain, CURV4, _pick(Rm, C.n), valid)


def sectional_curvature(C: TensorField) -> TensorField:
    """K = -Rm_1212 / det C for a 2D metric."""
    if C.n != 2:
        raise GeometryError("sectional_curvature is provided for 2D metrics")
    R = curvature_of_metric(C)
    M = C.dense()
    det = M[0, 0] * M[1, 1] - M[0, 1] ** 2
    return TensorField(C.domain, SCALAR, (-R.data[0] / det)[None], R.valid)


def nonlinear_compat_residual(C: TensorField, khat: float = 0.0) -> TensorField:
    """Rm^C(X1..X4) - khat [C(X3, X2) C(X1, X4) - C(X3, X1) C(X2, X4)] per stored component."""
    Rm, _, valid = _riemann_lowered(C)
    M = C.dense()

    def comp(a, b, c, d):
        return Rm(a, b, c, d) - khat * (M[c, b] * M[a, d] - M[c, a] * M[b, d])

    return TensorField(C.domain, CURV4, _pick(comp, C.n), valid)


# ------------------------------------------------------------------ shells
def shell_data(phi: TensorField) -> tuple[TensorField, TensorField]:
    """First fundamental form C and extrinsic tensor theta of an immersed surface in R^3.

    The unit normal is the normalized cross product of the chart partials;
    theta_IJ = N . phi,_IJ with composed central differences.
    """
    if phi.n != 2 or phi.valence.m(2) != 3:
        raise GeometryError("shell data needs a map from a 2D chart into R^3")
    h = phi.domain.grid.spacing
    F = jacobian(phi)  # F[i, I]
    valid1 = erode(phi.valid)
    cross = np.cross(F[:, 0], F[:, 1], axis=0)
    norm = np.sqrt(np.sum(cross ** 2, axis=0))
    scale = np.max(np.abs(F[:, :, valid1])) if valid1.any() else 1.0
    bad = valid1 & ~(norm > 1e-12 * scale ** 2)
    if bad.any():
        raise GeometryError(f"degenerate normal at {int(bad.sum())} nodes")
    N = cross / np.where(valid1, norm, 1.0)
    C = np.einsum("iI...,iJ...->IJ...", F, F)
    theta = np.empty((2, 2) + phi.domain.shape)
    for I in range(2):
        for J in range(I, 2):
            second = np.stack([partial(F[i, J], I, h[I], 2) for i in range(3)])
            theta[I, J] = theta[J, I] = np.sum(N * second, axis=0)
    valid2 = erode(valid1)
    return (from_dense(phi.domain, TENSOR02SYM, C, valid1),
            from_dense(phi.domain, TENSOR02SYM, theta, valid2))


def gauss_codazzi_residual(C: TensorField, theta: TensorField, khat: float = 0.0
                           ) -> tuple[TensorField, TensorField]:
    """Gauss residual Rm^C_1212 + det(theta) + khat det(C) and Codazzi residuals
    (nabla_1 theta)_2K - (nabla_2 theta)_1K, K = 1, 2."""
    _sym_input(C)
    _sym_input(theta)
    if C.n != 2 or theta.domain != C.domain:
        raise GeometryError("shell residuals need C and theta on the same 2D domain")
    Rm, Gam, valid_R = _riemann_lowered(C)
    M, Th = C.dense(), theta.dense()
    h = C.domain.grid.spacing
    gauss = (Rm(0, 1, 0, 1) + Th[0, 0] * Th[1, 1] - Th[0, 1] * Th[1, 0]
             + khat * (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]))

    def cov(a, b, c):
        # (nabla_a theta)_bc
        v = partial(Th[b, c], a, h[a], 2)
        for m in range(2):
            v = v - Gam[m, a, b] * Th[m, c] - Gam[m, a, c] * Th[b, m]
        return v

    codazzi = np.stack([cov(0, 1, K) - cov(1, 0, K) for K in range(2)])
    valid = valid_R & erode(theta.valid) & erode(erode(C.valid))
    gauss_valid = valid_R & theta.valid
    return (TensorField(C.domain, SCALAR, gauss[None], gauss_valid),
            TensorField(C.domain, Valence("vector", 2), codazzi, valid))


def ricci_residual(C: TensorField, theta: TensorField) -> TensorField:
    """Ricci-equation residual for a hypersurface.

    The normal bundle has rank one, so its curvature vanishes and the shape
    operator S = C^{-1} theta commutes with itself; the residual S S - S S is
    evaluated literally and is identically zero.
    """
    _sym_input(C)
    _sym_input(theta)
    M, Th = C.dense(), theta.dense()
    valid = C.valid & theta.valid
    safe = np.where(valid, 1.0, np.nan)
    S = np.einsum("ik...,kj...->ij...", _inv2(M), Th) * safe
    comm = np.einsum("ik...,kj...->ij...", S, S) - np.einsum("ik...,kj...->ij...", S, S)
    return TensorField(C.domain, SCALAR, np.max(np.abs(comm), axis=(0, 1))[None], valid)


def _inv2(M: np.ndarray) -> np.ndarray:
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return np.stack([np.stack([M[1, 1], -M[0, 1]]), np.stack([-M[1, 0], M[0, 0]])]) / det
