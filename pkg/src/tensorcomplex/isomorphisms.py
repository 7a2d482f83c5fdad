"""Relabelings between tensor complexes and vector-valued de Rham complexes.

Each isomorphism is a pointwise linear bijection.  Most are pure relabelings;
the ``*2`` maps in 3D weight by the Levi-Civita symbol and the surface maps
``Jsurf1``/``Jsurf2`` weight by the chart metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import calculus
from .calculus import EPS
from .fields import (CURV4, CURV5, SCALAR, TENSOR02SYM, TENSOR20, TensorField, Valence, ValenceError, _combos,
                     form, from_dense)


def _need(f: TensorField, kind: str, n: int | None = None, m: int | None = None) -> None:
    if f.valence.kind != kind:
        raise ValenceError(f"isomorphism expects a {kind} field, got {f.valence.spec()}")
    if n is not None and f.n != n:
        raise ValenceError(f"isomorphism expects a {n}D domain, got {f.n}D")
    if m is not None and f.valence.m(f.n) != m:
        raise ValenceError(f"isomorphism expects value dimension {m}, got {f.valence.m(f.n)}")


def _need_form(f: TensorField, k: int, n: int | None = None, m: int | None = None) -> None:
    _need(f, "form", n, m)
    if f.valence.degree != k:
        raise ValenceError(f"isomorphism expects a {k}-form, got {f.valence.spec()}")


def _form(f: TensorField, k: int, M: np.ndarray) -> TensorField:
    """Form field from an (m, ncombos, *grid) array."""
    m = M.shape[0]
    return TensorField(f.domain, form(k, m), M.reshape((-1,) + f.domain.shape), f.valid)


def _eps2_3d(M: np.ndarray) -> np.ndarray:
    """Rows M[i, L] -> [i]_{JK} = eps_JKL M[i, L] in combination order (12, 13, 23)."""
    return np.stack([np.einsum("l,il...->i...", EPS[J, K], M) for J, K in _combos(3, 2)], axis=1)


def _eps2_3d_inv(A: np.ndarray) -> np.ndarray:
    # [i]_12 = M^i3, [i]_13 = -M^i2, [i]_23 = M^i1
    return np.stack([A[:, 2], -A[:, 1], A[:, 0]], axis=1)


# ---------------------------------------------------------------- registry
@dataclass(frozen=True)
class Iso:
    id: str
    forward: Callable[[TensorField], TensorField]
    inverse: Callable[[TensorField], TensorField]
    relabeling: bool = True


ISOS: dict[str, Iso] = {}


def _register(iso: Iso) -> None:
    ISOS[iso.id] = iso


# scalar / vector calculus in 3D -----------------------------------------------
_register(Iso(
    "imath0",
    lambda f: (_need(f, "scalar", 3), _form(f, 0, f.data[None]))[1],
    lambda a: (_need_form(a, 0, 3, 1), TensorField(a.domain, SCALAR, a.data, a.valid))[1]))
_register(Iso(
    "imath1",
    lambda Y: (_need(Y, "vector", 3, 3), _form(Y, 1, Y.data[None]))[1],
    lambda a: (_need_form(a, 1, 3, 1), TensorField(a.domain, Valence("vector"), a.data, a.valid))[1]))
_register(Iso(
    "imath2",
    lambda Y: (_need(Y, "vector", 3, 3), _form(Y, 2, _eps2_3d(Y.data[None])))[1],
    lambda a: (_need_form(a, 2, 3, 1),
               TensorField(a.domain, Valence("vector"), _eps2_3d_inv(a.dense())[0], a.valid))[1],
    relabeling=False))
_register(Iso(
    "imath3",
    lambda f: (_need(f, "scalar", 3), _form(f, 3, f.data[None]))[1],
    lambda a: (_need_form(a, 3, 3, 1), TensorField(a.domain, SCALAR, a.data, a.valid))[1]))


# vector-valued families ------------------------------------------------------------
def _family(prefix: str, n: int, row_kind: str, vec_m: int | None) -> None:
    """Register prefix0..prefix{n}: point vector -> 0-form, rows -> 1-form, (n-1)-form, n-form."""

    def f0(Y):
        _need(Y, "vector", n, vec_m)
        return _form(Y, 0, Y.data[:, None])

    def i0(a):
        _need_form(a, 0, n, vec_m)
        return TensorField(a.domain, Valence("vector", a.valence.m(n)), a.data, a.valid)

    def f1(T):
        _need(T, row_kind, n, vec_m if row_kind == "twopoint" else None)
        return _form(T, 1, T.dense())

    def i1(a):
        _need_form(a, 1, n, vec_m)
        m = a.valence.m(n)
        if row_kind == "tensor20" and m != n:
            raise ValenceError("tensor20 rows need value dimension n")
        val = TENSOR20 if row_kind == "tensor20" else Valence("twopoint", m)
        return TensorField(a.domain, val, a.data, a.valid)

    def fn(Y):
        _need(Y, "vector", n, vec_m)
        return _form(Y, n, Y.data[:, None])

    def inn(a):
        _need_form(a, n, n, vec_m)
        return TensorField(a.domain, Valence("vector", a.valence.m(n)), a.data, a.valid)

    _register(Iso(f"{prefix}0", f0, i0))
    _register(Iso(f"{prefix}1", f1, i1))
    if n == 3:
        def f2(T):
            _need(T, row_kind, 3, vec_m if row_kind == "twopoint" else None)
            return _form(T, 2, _eps2_3d(T.dense()))

        def i2(a):
            _need_form(a, 2, 3, vec_m)
            m = a.valence.m(3)
            val = TENSOR20 if row_kind == "tensor20" else Valence("twopoint", m)
            return TensorField(a.domain, val, _eps2_3d_inv(a.dense()).reshape((-1,) + a.domain.shape), a.valid)

        _register(Iso(f"{prefix}2", f2, i2, relabeling=False))
        _register(Iso(f"{prefix}3", fn, inn))
    else:
        _register(Iso(f"{prefix}2", fn, inn))


_family("bimath", 3, "tensor20", 3)
_family("I", 3, "twopoint", None)
_family("j", 2, "tensor20", 2)
_family("J", 2, "twopoint", None)


# surface maps weighted by the chart metric ---------------------------------------------
def _metric(f: TensorField):
    from .geometry import MetricChart

    metric = MetricChart.for_domain(f.domain)
    metric.check_domain(f.domain)
    return metric


def _js0(U):
    _need(U, "vector", 2)
    return _form(U, 0, U.data[:, None])


def _js0_inv(a):
    _need_form(a, 0, 2)
    return TensorField(a.domain, Valence("vector", a.valence.m(2)), a.data, a.valid)


def _js1(F):
    _need(F, "twopoint", 2)
    G = _metric(F).G(F.domain)
    return _form(F, 1, np.einsum("JI...,iI...->iJ...", G, F.dense()))


def _js1_inv(a):
    _need_form(a, 1, 2)
    Gi = _metric(a).Ginv(a.domain)
    out = np.einsum("IJ...,iJ...->iI...", Gi, a.dense())
    return TensorField(a.domain, Valence("twopoint", a.valence.m(2)), out.reshape((-1,) + a.domain.shape), a.valid)


def _js2(U):
    _need(U, "vector", 2)
    sq = _metric(U).sqrt_det(U.domain)
    return _form(U, 2, (U.data * sq)[:, None])


def _js2_inv(a):
    _need_form(a, 2, 2)
    sq = _metric(a).sqrt_det(a.domain)
    return TensorField(a.domain, Valence("vector", a.valence.m(2)), a.data / sq, a.valid)


_register(Iso("Jsurf0", _js0, _js0_inv))
_register(Iso("Jsurf1", _js1, _js1_inv, relabeling=False))
_register(Iso("Jsurf2", _js2, _js2_inv, relabeling=False))


# elasticity ---------------------------------------------------------------------
def _sym_tensor(T: TensorField, n: int) -> None:
    _need(T, "tensor20", n)
    scale = max(1.0, T.max_abs())
    if (T - from_dense(T.domain, TENSOR20, np.swapaxes(T.dense(), 0, 1), T.valid)).max_abs() > 1e-10 * scale:
        raise ValenceError("isomorphism expects a symmetric tensor field")


def _to_cov(T: TensorField) -> TensorField:
    _sym_tensor(T, T.n)
    return from_dense(T.domain, TENSOR02SYM, T.dense(), T.valid)


def _from_cov(e: TensorField) -> TensorField:
    _need(e, "tensor02sym")
    return from_dense(e.domain, TENSOR20, e.dense(), e.valid)


def _vec_id(n: int):
    def fwd(Y):
        _need(Y, "vector", n, n)
        return Y

    return fwd


def _iota2(T):
    _sym_tensor(T, 3)
    M = T.dense()
    data = np.stack([M[0, 0], M[0, 1], M[0, 2], M[1, 1], M[1, 2], M[2, 2]])
    return TensorField(T.domain, CURV4, data, T.valid)


def _iota2_inv(s):
    _need(s, "curv4", 3)
    S = np.empty((3, 3) + s.domain.shape)
    for c, (p, q) in enumerate([(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]):
        S[p, q] = S[q, p] = s.data[c]
    return from_dense(s.domain, TENSOR20, S, s.valid)


def _iota3(Y):
    _need(Y, "vector", 3, 3)
    return TensorField(Y.domain, CURV5, Y.data, Y.valid)


def _iota3_inv(h):
    _need(h, "curv5", 3)
    return TensorField(h.domain, Valence("vector"), h.data, h.valid)


def _gamma2(f):
    _need(f, "scalar", 2)
    return TensorField(f.domain, CURV4, f.data, f.valid)


def _gamma2_inv(s):
    _need(s, "curv4", 2)
    return TensorField(s.domain, SCALAR, s.data, s.valid)


def _cov_n(n):
    def fwd(T):
        _sym_tensor(T, n)
        return _to_cov(T)

    def inv(e):
        _need(e, "tensor02sym", n)
        return _from_cov(e)

    return fwd, inv


_register(Iso("iota0", _vec_id(3), _vec_id(3)))
_register(Iso("iota1", *_cov_n(3)))
_register(Iso("iota2", _iota2, _iota2_inv))
_register(Iso("iota3", _iota3, _iota3_inv))
_register(Iso("gamma0", _vec_id(2), _vec_id(2)))
_register(Iso("gamma1", *_cov_n(2)))
_register(Iso("gamma2", _gamma2, _gamma2_inv))


def _get(iso: str) -> Iso:
    if iso not in ISOS:
        raise KeyError(f"unknown isomorphism {iso!r}")
    return ISOS[iso]


def forward(iso: str, field: TensorField) -> TensorField:
    return _get(iso).forward(field)


def inverse(iso: str, field: TensorField) -> TensorField:
    return _get(iso).inverse(field)


# --------------------------------------------------------------- diagrams
def form_operator(op: str, field: TensorField, metric=None) -> TensorField:
    """Apply a de Rham-side operator: d, delta, or the Calabi operators D0, D1, D2."""
    from . import geometry

    if op in ("d", "d_k"):
        return calculus.exterior_d(field)
    if op in ("delta", "delta_k"):
        return calculus.codifferential(field)
    if op == "D0":
        return geometry.killing_D0(field, metric)
    if op == "D1":
        return geometry.calabi_D1(field, metric)
    if op == "D2":
        return geometry.calabi_D2(field, metric)
    raise KeyError(f"unknown form-side operator {op!r}")


def diagram_residual(iso_pair: tuple[str, str], op_tensor: str, op_form: str, probe: TensorField,
                     out_sign: float = 1.0, metric=None) -> float:
    """Max-abs of out_sign * iso_out(op_tensor(probe)) - op_form(iso_in(probe)) over common nodes."""
    from .geometry import MetricChart

    iso_in, iso_out = iso_pair
    metric = MetricChart.for_domain(probe.domain) if metric is None else metric
    lhs = forward(iso_out, calculus.apply(op_tensor, probe, metric))
    rhs = form_operator(op_form, forward(iso_in, probe), metric)
    if not lhs.valence.same_as(rhs.valence, probe.n):
        raise ValenceError(f"diagram does not close: {lhs.valence.spec()} vs {rhs.valence.spec()}")
    return (lhs * out_sign - rhs).max_abs()
