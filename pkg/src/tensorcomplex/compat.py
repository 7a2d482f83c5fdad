"""Compatibility checks: a local residual plus periods over homology generators.

A field passes a check when its local residual is below ``tol_local`` and every
period is below ``tol_period``.  It fails when any of these numbers exceeds ten
times its tolerance; anything in between is reported as inconclusive.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import calculus, geometry
from .calculus import EPS
from .fields import TENSOR20, TensorField, Valence, ValenceError, interpolate
from .mesh import Chain1, Chain2, Domain, validate_chain

DEFAULT_TOL = 1e-6
BAND = 10.0


class ChainError(ValueError):
    """A chain is unusable on the domain (leaves the mask, not closed, badly oriented)."""


@dataclass
class CompatReport:
    check: str
    local_residual_linf: float
    coverage: float
    periods: list[tuple[str, list[float]]]
    tol_local: float
    tol_period: float
    verdict: str
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = asdict(self)
        out["periods"] = [{"chain": cid, "values": list(vals)} for cid, vals in self.periods]
        return out

    @property
    def max_period(self) -> float:
        return max((abs(v) for _, vals in self.periods for v in vals), default=0.0)


def verdict_of(local: float, periods: Sequence[float], tol_local: float, tol_period: float) -> str:
    """compatible / incompatible / inconclusive from raw numbers (NaN counts as a failure)."""
    values = [(local, tol_local)] + [(abs(p), tol_period) for p in periods]
    if any(not np.isfinite(v) or v > BAND * tol for v, tol in values):
        return "incompatible"
    if all(v <= tol for v, tol in values):
        return "compatible"
    return "inconclusive"


# ------------------------------------------------------------------ integrands
def row_matrix(T: TensorField) -> np.ndarray:
    """Integrand rows as an (m, n, *grid) array: row i is contracted with the tangent or normal."""
    kind = T.valence.kind
    if kind in ("tensor20", "twopoint", "tensor02sym"):
        return T.dense()
    if kind == "form" and T.valence.degree == 1:
        return T.dense()
    if kind == "vector" and T.valence.m(T.n) == T.n:
        return T.data[None]
    raise ValenceError(f"no line integrand for {T.valence.spec()}")


def _rows_field(domain: Domain, M: np.ndarray, valid: np.ndarray) -> TensorField:
    m, n = M.shape[:2]
    return TensorField(domain, Valence("twopoint", m), M.reshape((m * n,) + domain.shape), valid)


def _check_chain(domain: Domain, chain) -> None:
    problems = validate_chain(domain, chain)
    if problems:
        raise ChainError(f"chain {chain.id!r}: " + "; ".join(problems))


def _line(domain: Domain, M: np.ndarray, valid: np.ndarray, loop: Chain1, mode: str) -> np.ndarray:
    _check_chain(domain, loop)
    m, n = M.shape[:2]
    V = loop.vertices
    vals = interpolate(_rows_field(domain, M, valid), V).reshape(len(V), m, n)
    seg = np.diff(V, axis=0)
    if mode == "tangent":
        w = seg
    elif mode == "normal":
        if n != 2:
            raise ValueError("normal-mode line integrals are 2D only")
        # unit normal rotated +90 degrees from the unit tangent, times segment length
        w = np.stack([-seg[:, 1], seg[:, 0]], axis=1)
    else:
        raise ValueError(f"unknown line-integral mode {mode!r}")
    avg = 0.5 * (vals[:-1] + vals[1:])
    return np.einsum("sij,sj->i", avg, w)


def line_integral(T: TensorField, loop: Chain1, mode: str = "tangent") -> np.ndarray:
    """Composite trapezoid rule of T^{iJ} t_J dS (or T^{iJ} N_J dS) over a closed polyline."""
    return _line(T.domain, row_matrix(T), T.valid, loop, mode)


def _triangle_rule(rule: str) -> np.ndarray:
    # barycentric quadrature points with equal weights
    if rule == "centroid":
        return np.array([[1 / 3, 1 / 3, 1 / 3]])
    if rule == "edge":
        return np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    raise ValueError(f"unknown triangle rule {rule!r}")


def surface_integral(T: TensorField, surf: Chain2, moment: bool = False, origin: Sequence[float] | None = None,
                     rule: str = "centroid") -> np.ndarray:
    """Force (and optionally moment) of T over a closed outward-oriented triangle mesh.

    Force_i = sum over triangles of T^{iL} N_L dA.  The moment adds
    eps_KIJ (X - origin)^I T^{JL} N_L dA.  ``rule`` is "centroid" (one point) or
    "edge" (edge midpoints, exact for quadratic integrands on flat triangles).
    """
    dom = T.domain
    if dom.ndim != 3:
        raise ValueError("surface integrals need a 3D domain")
    _check_chain(dom, surf)
    M = row_matrix(T)
    m = M.shape[0]
    V = surf.vertices
    tri = V[surf.triangles]  # (t, 3 corners, 3 coords)
    area_normal = 0.5 * np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    bary = _triangle_rule(rule)
    pts = np.einsum("qc,tcx->tqx", bary, tri)
    vals = interpolate(_rows_field(dom, M, T.valid), pts.reshape(-1, 3)).reshape(len(tri), len(bary), m, 3)
    traction = np.einsum("tqil,tl->tqi", vals, area_normal) / len(bary)
    force = traction.sum(axis=(0, 1))
    if not moment:
        return force
    if m != 3:
        raise ValenceError("moments need three rows")
    X = pts - (np.zeros(3) if origin is None else np.asarray(origin, float))
    mom = np.einsum("kij,tqi,tqj->k", EPS, X, traction)
    return np.concatenate([force, mom])


# -------------------------------------------------------------- check kinds
@dataclass(frozen=True)
class Kind:
    id: str
    chains: str  # "loops", "surfaces" or "none"
    description: str


KINDS = {k.id: k for k in [
    Kind("grad3d", "loops", "tensor20 3D: curl^T T = 0 and tangent periods"),
    Kind("curlT3d", "surfaces", "tensor20 3D: div T = 0 and force fluxes"),
    Kind("Grad3d", "loops", "two-point 3D: Curl^T F = 0 and tangent periods"),
    Kind("CurlT3d", "surfaces", "two-point 3D: Div P = 0 and force fluxes"),
    Kind("grad2d", "loops", "tensor20 2D: c(T) = 0 and tangent periods"),
    Kind("s2d", "loops", "tensor20 2D: div T = 0 and normal periods"),
    Kind("Grad2d", "loops", "two-point 2D: C(F) = 0 and tangent periods"),
    Kind("S2d", "loops", "two-point 2D: Div P = 0 and normal periods"),
    Kind("surfGrad", "loops", "two-point on a surface chart: C(F) = 0 and tangent periods"),
    Kind("dispgrad", "loops", "R^m-valued 1-form: d kappa = 0 and periods"),
    Kind("linstrain3d", "loops", "symmetric 3D: curl curl e = 0 and both line-integral families"),
    Kind("linstrain2d", "loops", "symmetric 2D: D_c e = 0 and both line-integral families"),
    Kind("beltrami", "surfaces", "symmetric 3D: div T = 0, force and moment fluxes"),
    Kind("curlTstress", "surfaces", "stress 3D (tensor20 or two-point): div = 0 and force fluxes"),
    Kind("greenC", "none", "right Cauchy-Green tensor: curvature of C vanishes"),
    Kind("shell", "none", "first and second fundamental forms: Gauss and Codazzi equations"),
    Kind("calabi", "none", "linear strain on a constant-curvature chart: D1 e = 0"),
]}


def _need(T: TensorField, kinds: tuple[str, ...], n: int, check: str) -> None:
    if T.valence.kind not in kinds or T.n != n:
        raise ValenceError(f"check {check} expects a {'/'.join(kinds)} field on a {n}D domain, "
                           f"got {T.valence.spec()} on {T.n}D")


def _as_tensor20(e: TensorField) -> TensorField:
    if e.valence.kind == "tensor02sym":
        return TensorField(e.domain, TENSOR20, e.dense().reshape((-1,) + e.domain.shape), e.valid)
    return e


def _strain_families(e: TensorField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrand rows of the two line-integral families of the linear strain criterion.

    Family A (rows I, columns J): e^{IJ} - X^K (e^{IJ},K - e^{JK},I).
    Family B (rows (I, J) over all ordered pairs, columns K): e^{IK},J - e^{JK},I.
    """
    n = e.n
    E = e.dense()
    dE = calculus._D(e).grad(E)  # dE[I, J, K] = e^{IJ},K
    X = e.domain.coords()
    A = E.copy()
    for I in range(n):
        for J in range(n):
            for K in range(n):
                A[I, J] -= X[K] * (dE[I, J, K] - dE[J, K, I])
    B = np.empty((n * n, n) + e.domain.shape)
    for I in range(n):
        for J in range(n):
            for K in range(n):
                B[I * n + J, K] = dE[I, K, J] - dE[J, K, I]
    valid = calculus.erode(e.valid)
    return A, B, valid


def check(kind: str, field: TensorField | tuple[TensorField, TensorField], loops: Sequence[Chain1] | None = None,
          surfaces: Sequence[Chain2] | None = None, tol_local: float = DEFAULT_TOL,
          tol_period: float = DEFAULT_TOL, khat: float = 0.0, metric=None,
          surface_rule: str = "centroid") -> CompatReport:
    """Run compatibility check ``kind`` on ``field`` with the given homology generators.

    ``loops`` / ``surfaces`` of None means "not supplied": on a domain whose relevant
    Betti number is nonzero the verdict is then at best inconclusive.  ``shell`` takes
    the pair (C, theta); ``greenC`` and ``shell`` use ``khat`` as the ambient curvature.
    """
    if kind not in KINDS:
        raise KeyError(f"unknown check kind {kind!r}; expected one of {sorted(KINDS)}")
    spec = KINDS[kind]
    notes: list[str] = []
    extra: dict = {}
    periods: list[tuple[str, list[float]]] = []
    T = field[0] if isinstance(field, tuple) else field
    dom = T.domain

    if kind == "grad3d":
        _need(T, ("tensor20",), 3, kind)
        local = calculus.curlT(T)
    elif kind == "curlT3d":
        _need(T, ("tensor20",), 3, kind)
        local = calculus.div_t(T)
    elif kind == "Grad3d":
        _need(T, ("twopoint",), 3, kind)
        local = calculus.CurlT2p(T)
    elif kind == "CurlT3d":
        _need(T, ("twopoint",), 3, kind)
        local = calculus.Div2p(T)
    elif kind == "grad2d":
        _need(T, ("tensor20",), 2, kind)
        local = calculus.c2d(T)
    elif kind == "s2d":
        _need(T, ("tensor20",), 2, kind)
        local = calculus.div_t(T)
    elif kind == "Grad2d":
        _need(T, ("twopoint",), 2, kind)
        local = calculus.C2d(T)
    elif kind == "S2d":
        _need(T, ("twopoint",), 2, kind)
        local = calculus.Div2p(T)
    elif kind == "surfGrad":
        _need(T, ("twopoint",), 2, kind)
        metric = geometry.MetricChart.for_domain(dom) if metric is None else metric
        local = calculus.surfC(T, metric)
    elif kind == "dispgrad":
        if T.valence.kind == "twopoint":
            from .isomorphisms import forward

            T = forward("I1" if T.n == 3 else "J1", T)
        if T.valence.kind != "form" or T.valence.degree != 1:
            raise ValenceError("dispgrad expects an R^m-valued 1-form or a two-point field")
        local = calculus.exterior_d(T)
    elif kind in ("linstrain3d", "linstrain2d"):
        n = 3 if kind == "linstrain3d" else 2
        _need(T, ("tensor20", "tensor02sym"), n, kind)
        T = _as_tensor20(T)
        local = calculus.curlcurl(T) if n == 3 else calculus.Dc(T)
    elif kind == "beltrami":
        _need(T, ("tensor20", "tensor02sym"), 3, kind)
        T = _as_tensor20(T)
        calculus._require_symmetric(T)
        local = calculus.div_t(T)
    elif kind == "curlTstress":
        _need(T, ("tensor20", "twopoint"), 3, kind)
        local = calculus.div_t(T) if T.valence.kind == "tensor20" else calculus.Div2p(T)
    elif kind == "greenC":
        local = geometry.nonlinear_compat_residual(T, khat)
    elif kind == "shell":
        if not isinstance(field, tuple) or len(field) != 2:
            raise ValenceError("shell check expects the pair (C, theta)")
        gauss, codazzi = geometry.gauss_codazzi_residual(field[0], field[1], khat)
        valid = gauss.valid & codazzi.valid
        local = TensorField(dom, Valence("vector", 3), np.concatenate([gauss.data, codazzi.data]), valid)
    else:  # calabi
        local = geometry.calabi_D1(T, metric)

    local_linf = local.max_abs()
    coverage = float(local.valid.sum()) / float(dom.mask.sum())

    # periods over the supplied generators
    if spec.chains == "loops":
        chains = loops
        if kind in ("linstrain3d", "linstrain2d"):
            A, B, valid = _strain_families(T)
            for loop in loops or []:
                pa = _line(dom, A, valid, loop, "tangent")
                pb = _line(dom, B, valid, loop, "tangent")
                periods.append((f"{loop.id}:A", pa.tolist()))
                periods.append((f"{loop.id}:B", pb.tolist()))
            extra["moment_origin"] = [0.0] * dom.ndim
        else:
            mode = "normal" if kind in ("s2d", "S2d") else "tangent"
            if kind == "surfGrad":
                from .isomorphisms import forward

                integrand = forward("Jsurf1", T)  # lowered with the chart metric
            else:
                integrand = T
            for loop in loops or []:
                periods.append((loop.id, line_integral(integrand, loop, mode).tolist()))
    elif spec.chains == "surfaces":
        chains = surfaces
        want_moment = kind == "beltrami"
        for surf in surfaces or []:
            periods.append((surf.id, surface_integral(T, surf, moment=want_moment, rule=surface_rule).tolist()))
        if want_moment:
            extra["moment_origin"] = [0.0] * 3
        extra["surface_rule"] = surface_rule
    else:
        chains = None

    flat = [v for _, vals in periods for v in vals]
    verdict = verdict_of(local_linf, flat, tol_local, tol_period)

    from .cohomology import betti

    b = betti(dom)
    relevant = {"loops": b[1], "surfaces": b[2], "none": b[1]}[spec.chains]
    extra["betti"] = list(b)
    if spec.chains != "none" and chains is None and relevant > 0:
        notes.append(f"domain has {relevant} independent {spec.chains} but none were supplied; "
                     "periods not evaluated")
        if verdict == "compatible":
            verdict = "inconclusive"
    elif spec.chains != "none" and chains is not None and len(chains) < relevant:
        notes.append(f"{len(chains)} {spec.chains} supplied but the domain needs {relevant}")
        if verdict == "compatible":
            verdict = "inconclusive"
    if spec.chains == "none" and relevant > 0:
        notes.append("local criterion only; sufficient on simply connected domains")
        if verdict == "compatible":
            verdict = "inconclusive"
    return CompatReport(kind, local_linf, coverage, periods, tol_local, tol_period, verdict, notes, extra)
