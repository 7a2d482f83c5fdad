"""Central-difference differential operators of the tensor complexes.

Every first derivative is a second-order central difference.  Second-order
operators compose first-order stencils, so discrete compositions such as
curl^T(grad Y) vanish up to floating-point round-off.  Outputs are defined on
the eroded region of the input (one ring per derivative order); elsewhere they
are NaN.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .fields import (SCALAR, TENSOR20, TensorField, Valence, ValenceError, _combos, asymmetry, form,
                     from_dense)
from .mesh import erode

# Levi-Civita symbol, eps[0, 1, 2] = +1
EPS = np.zeros((3, 3, 3))
for _p in itertools.permutations(range(3)):
    EPS[_p] = np.linalg.det(np.eye(3)[list(_p)])

SYMMETRY_TOL = 1e-10


def partial(arr: np.ndarray, axis: int, h: float, ndim: int) -> np.ndarray:
    """Central difference along grid ``axis``; the last ``ndim`` axes of ``arr`` are the grid."""
    ax = arr.ndim - ndim + axis
    out = np.full(arr.shape, np.nan)
    inner = [slice(None)] * arr.ndim
    plus = [slice(None)] * arr.ndim
    minus = [slice(None)] * arr.ndim
    inner[ax] = slice(1, -1)
    plus[ax] = slice(2, None)
    minus[ax] = slice(0, -2)
    out[tuple(inner)] = (arr[tuple(plus)] - arr[tuple(minus)]) / (2.0 * h)
    return out


class _D:
    """Partial-derivative helper bound to one grid."""

    def __init__(self, f: TensorField):
        self.n = f.n
        self.h = f.domain.grid.spacing

    def __call__(self, arr: np.ndarray, axis: int) -> np.ndarray:
        return partial(arr, axis, self.h[axis], self.n)

    def grad(self, arr: np.ndarray) -> np.ndarray:
        """Stack of partials as a new trailing tensor index placed before the grid axes."""
        parts = [self(arr, a) for a in range(self.n)]
        return np.stack(parts, axis=arr.ndim - self.n)


def _require(f: TensorField, kind: str, dims: tuple[int, ...], value_dim: int | None = None) -> None:
    if f.valence.kind != kind:
        raise ValenceError(f"operator needs a {kind} field, got {f.valence.spec()}")
    if f.n not in dims:
        raise ValenceError(f"operator needs a {' or '.join(map(str, dims))}D domain, got {f.n}D")
    if value_dim is not None and f.valence.m(f.n) != value_dim:
        raise ValenceError(f"operator needs value dimension {value_dim}, got {f.valence.m(f.n)}")


def _require_symmetric(T: TensorField) -> None:
    scale = max(1.0, T.max_abs())
    if asymmetry(T) > SYMMETRY_TOL * scale:
        raise ValenceError("operator needs a symmetric tensor field")


def _out(f: TensorField, valence: Valence, data: np.ndarray, order: int = 1) -> TensorField:
    valid = f.valid
    for _ in range(order):
        valid = erode(valid)
    return TensorField(f.domain, valence, data, valid)


# ------------------------------------------------------------ vector calculus
def grad_v(f: TensorField) -> TensorField:
    _require(f, "scalar", (2, 3))
    D = _D(f)
    return _out(f, Valence("vector"), np.stack([D(f.data[0], a) for a in range(f.n)]))


def curl_v(Y: TensorField) -> TensorField:
    """(curl Y)^I = eps_IJK Y^K,_J."""
    _require(Y, "vector", (3,), 3)
    D = _D(Y)
    dY = D.grad(Y.data)  # dY[K, J] = Y^K,_J
    return _out(Y, Valence("vector"), np.einsum("ijk,kj...->i...", EPS, dY))


def div_v(Y: TensorField) -> TensorField:
    _require(Y, "vector", (2, 3))
    if Y.valence.m(Y.n) != Y.n:
        raise ValenceError("divergence needs a tangent vector field")
    D = _D(Y)
    return _out(Y, SCALAR, sum(D(Y.data[a], a) for a in range(Y.n))[None])


# ------------------------------------------------------------ rows of tensors
def _row_grad(M: np.ndarray, D: _D) -> np.ndarray:
    """M[i] (rows) -> [i, J] = M^i,_J."""
    return D.grad(M)


def _row_curl(M: np.ndarray, D: _D) -> np.ndarray:
    """Row-wise curl of a (rows, 3) array: out[i, J] = eps_JKL M[i, L],_K."""
    dM = D.grad(M)  # dM[i, L, K]
    return np.einsum("jkl,ilk...->ij...", EPS, dM)


def _row_div(M: np.ndarray, D: _D) -> np.ndarray:
    return sum(D(M[:, a], a) for a in range(D.n))


def grad_t(Y: TensorField) -> TensorField:
    """(grad Y)^IJ = Y^I,_J."""
    _require(Y, "vector", (2, 3))
    if Y.valence.m(Y.n) != Y.n:
        raise ValenceError("grad needs a tangent vector field; use Grad2p for point fields")
    return _out(Y, TENSOR20, _row_grad(Y.data, _D(Y)).reshape((Y.n * Y.n,) + Y.domain.shape))


def curlT(T: TensorField) -> TensorField:
    """(curl^T T)^IJ = eps_JKL T^IL,_K, i.e. the transpose of the row curl."""
    _require(T, "tensor20", (3,))
    out = _row_curl(T.dense(), _D(T))
    return _out(T, TENSOR20, out.reshape((9,) + T.domain.shape))


def div_t(T: TensorField) -> TensorField:
    """(div T)^I = T^IJ,_J."""
    _require(T, "tensor20", (2, 3))
    return _out(T, Valence("vector"), _row_div(T.dense(), _D(T)))


def Grad2p(Y: TensorField) -> TensorField:
    _require(Y, "vector", (2, 3))
    m = Y.valence.m(Y.n)
    return _out(Y, Valence("twopoint", m), _row_grad(Y.data, _D(Y)).reshape((m * Y.n,) + Y.domain.shape))


def CurlT2p(F: TensorField) -> TensorField:
    """(Curl^T F)^iI = eps_IKL F^iL,_K."""
    _require(F, "twopoint", (3,))
    m = F.valence.m(3)
    out = _row_curl(F.dense(), _D(F))
    return _out(F, Valence("twopoint", m), out.reshape((m * 3,) + F.domain.shape))


def Div2p(F: TensorField) -> TensorField:
    _require(F, "twopoint", (2, 3))
    return _out(F, Valence("vector", F.valence.m(F.n)), _row_div(F.dense(), _D(F)))


def _c_rows(M: np.ndarray, D: _D) -> np.ndarray:
    return D(M[:, 1], 0) - D(M[:, 0], 1)


def _s_rows(Y: np.ndarray, D: _D) -> np.ndarray:
    return np.stack([D(Y, 1), -D(Y, 0)], axis=1)


def c2d(T: TensorField) -> TensorField:
    """(c T)^I = T^I2,_1 - T^I1,_2."""
    _require(T, "tensor20", (2,))
    return _out(T, Valence("vector"), _c_rows(T.dense(), _D(T)))


def s2d(Y: TensorField) -> TensorField:
    """(s Y)^I1 = Y^I,_2 and (s Y)^I2 = -Y^I,_1."""
    _require(Y, "vector", (2,), 2)
    return _out(Y, TENSOR20, _s_rows(Y.data, _D(Y)).reshape((4,) + Y.domain.shape))


def C2d(F: TensorField) -> TensorField:
    _require(F, "twopoint", (2,))
    return _out(F, Valence("vector", F.valence.m(2)), _c_rows(F.dense(), _D(F)))


def S2d(Y: TensorField) -> TensorField:
    _require(Y, "vector", (2,))
    m = Y.valence.m(2)
    return _out(Y, Valence("twopoint", m), _s_rows(Y.data, _D(Y)).reshape((2 * m,) + Y.domain.shape))


# ----------------------------------------------------------------- elasticity
def gradS(Y: TensorField) -> TensorField:
    """Symmetric gradient (Y^I,_J + Y^J,_I) / 2."""
    _require(Y, "vector", (2, 3))
    if Y.valence.m(Y.n) != Y.n:
        raise ValenceError("gradS needs a tangent vector field")
    g = _row_grad(Y.data, _D(Y))
    sym = 0.5 * (g + np.swapaxes(g, 0, 1))
    return _out(Y, TENSOR20, sym.reshape((Y.n * Y.n,) + Y.domain.shape))


def curlcurl(T: TensorField) -> TensorField:
    """eps_IKL eps_JMN T^LN,_KM, built as a row curl followed by a column curl."""
    _require(T, "tensor20", (3,))
    D = _D(T)
    A = _row_curl(T.dense(), D)  # A^LJ = eps_JMN T^LN,_M
    B = _row_curl(np.swapaxes(A, 0, 1), D)  # B'^JI = eps_IKL A^LJ,_K
    return _out(T, TENSOR20, np.swapaxes(B, 0, 1).reshape((9,) + T.domain.shape), order=2)


def Dc(T: TensorField) -> TensorField:
    """T^11,_22 - 2 T^12,_12 + T^22,_11 for symmetric 2D tensors."""
    _require(T, "tensor20", (2,))
    _require_symmetric(T)
    D = _D(T)
    M = T.dense()
    out = D(D(M[0, 0], 1), 1) - 2.0 * D(D(M[0, 1], 1), 0) + D(D(M[1, 1], 0), 0)
    return _out(T, SCALAR, out[None], order=2)


def Ds(f: TensorField) -> TensorField:
    """Airy map: (Ds f)^11 = f,_22, (Ds f)^12 = -f,_12, (Ds f)^22 = f,_11."""
    _require(f, "scalar", (2,))
    D = _D(f)
    a = f.data[0]
    f22 = D(D(a, 1), 1)
    f12 = D(D(a, 1), 0)
    f11 = D(D(a, 0), 0)
    out = np.stack([f22, -f12, -f12, f11])
    return _out(f, TENSOR20, out, order=2)


# ------------------------------------------------------------------- surfaces
def _metric_arrays(metric, f: TensorField):
    if metric is None:
        raise ValueError("surface operators need a metric chart")
    metric.check_domain(f.domain)
    return metric.G(f.domain), metric.Ginv(f.domain), metric.sqrt_det(f.domain)


def surfGrad(U: TensorField, metric) -> TensorField:
    """(Grad U)^iI = G^IJ U^i,_J on a 2D chart."""
    _require(U, "vector", (2,))
    _, Gi, _ = _metric_arrays(metric, U)
    m = U.valence.m(2)
    dU = _row_grad(U.data, _D(U))
    out = np.einsum("IJ...,iJ...->iI...", Gi, dU)
    return _out(U, Valence("twopoint", m), out.reshape((2 * m,) + U.domain.shape))


def surfC(F: TensorField, metric) -> TensorField:
    """(C F)^i = [(G_2K F^iK),_1 - (G_1K F^iK),_2] / sqrt(det G)."""
    _require(F, "twopoint", (2,))
    G, _, sq = _metric_arrays(metric, F)
    low = np.einsum("JK...,iK...->iJ...", G, F.dense())  # G_JK F^iK
    D = _D(F)
    out = (D(low[:, 1], 0) - D(low[:, 0], 1)) / sq
    return _out(F, Valence("vector", F.valence.m(2)), out)


# ---------------------------------------------------------------------- forms
def _sorted_sign(idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx`` (0 when an index repeats) and the sorted tuple."""
    if len(set(idx)) < len(idx):
        return 0, idx
    lst = list(idx)
    sign = 1
    for i in range(len(lst)):
        for j in range(len(lst) - 1 - i):
            if lst[j] > lst[j + 1]:
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
                sign = -sign
    return sign, tuple(lst)


def exterior_d(alpha: TensorField) -> TensorField:
    """(d beta)_{I0..Ik} = sum_i (-1)^i beta_{I0..^Ii..Ik},_{Ii}, per value component."""
    if alpha.valence.kind != "form":
        raise ValenceError(f"exterior derivative needs a form, got {alpha.valence.spec()}")
    n, k = alpha.n, alpha.valence.degree
    if k >= n:
        raise ValenceError(f"d of a {k}-form in dimension {n} lands in the zero space")
    m = alpha.valence.m(n)
    src = {c: i for i, c in enumerate(_combos(n, k))}
    D = _D(alpha)
    A = alpha.dense()
    out = []
    for combo in _combos(n, k + 1):
        acc = 0.0
        for pos, axis in enumerate(combo):
            rest = combo[:pos] + combo[pos + 1:]
            term = D(A[:, src[rest]], axis)
            acc = acc + term if pos % 2 == 0 else acc - term
        out.append(acc)
    data = np.stack(out, axis=1).reshape((-1,) + alpha.domain.shape)
    return _out(alpha, form(k + 1, m), data)


def codifferential(alpha: TensorField) -> TensorField:
    """(delta beta)_{I1..I(k-1)} = -beta_{J I1..I(k-1)},_J on orthonormal charts."""
    if alpha.valence.kind != "form":
        raise ValenceError(f"codifferential needs a form, got {alpha.valence.spec()}")
    if not alpha.domain.chart.startswith("cartesian"):
        raise ValueError("codifferential is only defined here on Cartesian (orthonormal) charts")
    n, k = alpha.n, alpha.valence.degree
    if k < 1:
        raise ValenceError("codifferential needs k >= 1")
    m = alpha.valence.m(n)
    src = {c: i for i, c in enumerate(_combos(n, k))}
    D = _D(alpha)
    A = alpha.dense()
    out = []
    for combo in _combos(n, k - 1):
        acc = np.zeros((m,) + alpha.domain.shape)
        for J in range(n):
            sign, key = _sorted_sign((J,) + combo)
            if sign:
                acc = acc - sign * D(A[:, src[key]], J)
        out.append(acc)
    data = np.stack(out, axis=1).reshape((-1,) + alpha.domain.shape)
    return _out(alpha, form(k - 1, m), data)


# ------------------------------------------------------------------- registry
@dataclass(frozen=True)
class Operator:
    id: str
    fn: Callable
    needs_metric: bool = False
    symmetric_input: bool = False
    order: int = 1


OPERATORS: dict[str, Operator] = {
    op.id: op
    for op in [
        Operator("grad_v", grad_v),
        Operator("curl_v", curl_v),
        Operator("div_v", div_v),
        Operator("grad_t", grad_t),
        Operator("curlT", curlT),
        Operator("div_t", div_t),
        Operator("Grad2p", Grad2p),
        Operator("CurlT2p", CurlT2p),
        Operator("Div2p", Div2p),
        Operator("c2d", c2d),
        Operator("s2d", s2d),
        Operator("C2d", C2d),
        Operator("S2d", S2d),
        Operator("gradS", gradS),
        Operator("curlcurl", curlcurl, symmetric_input=True, order=2),
        Operator("Dc", Dc, symmetric_input=True, order=2),
        Operator("Ds", Ds, order=2),
        Operator("surfGrad", surfGrad, needs_metric=True),
        Operator("surfC", surfC, needs_metric=True),
        Operator("d_k", exterior_d),
        Operator("delta_k", codifferential),
    ]
}
_ALIASES = {"d": "d_k", "delta": "delta_k", "grad": "grad_t", "div": "div_t"}


def get_operator(op: str) -> Operator:
    key = _ALIASES.get(op, op)
    if key not in OPERATORS:
        raise KeyError(f"unknown operator {op!r}")
    return OPERATORS[key]


def apply(op: str, field: TensorField, metric=None) -> TensorField:
    """Apply operator ``op`` (an id of :data:`OPERATORS`) to ``field``."""
    spec = get_operator(op)
    if spec.needs_metric:
        return spec.fn(field, metric)
    return spec.fn(field)


def composition_residual(first: str, second: str, probe: TensorField, metric=None) -> float:
    """Max-abs of second(first(probe)) over the nodes where it is defined."""
    mid = apply(first, probe, metric)
    try:
        out = apply(second, mid, metric)
    except ValenceError as exc:
        raise ValenceError(f"{first} does not chain into {second}: {exc}") from None
    return out.max_abs()


def from_matrix(domain, M: np.ndarray, valid: np.ndarray) -> TensorField:
    """tensor20 field from an (n, n, *grid) array."""
    return from_dense(domain, TENSOR20, M, valid)
