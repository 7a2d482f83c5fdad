"""Reconstruction of potentials: path integration for gradient-type fields,
a radial homotopy operator for curl^T-images, and rotation plus path
integration for s-images."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from . import calculus
from .fields import TENSOR20, TensorField, Valence, ValenceError, interpolate
from .mesh import Domain

GRAD_KINDS = ("grad", "Grad", "surfGrad", "displacement")


class PotentialError(ValueError):
    """Input cannot be integrated (disconnected region, failed precheck, bad star centre)."""


def _grid_graph(valid: np.ndarray):
    """Sparse adjacency of axis-neighbouring valid nodes; returns (graph, flat ids of valid nodes)."""
    shape = valid.shape
    idx = np.full(shape, -1, dtype=np.int64)
    nodes = np.flatnonzero(valid.ravel())
    idx.ravel()[nodes] = np.arange(len(nodes))
    rows, cols = [], []
    for a in range(valid.ndim):
        lo = [slice(None)] * valid.ndim
        hi = [slice(None)] * valid.ndim
        lo[a] = slice(0, -1)
        hi[a] = slice(1, None)
        both = valid[tuple(lo)] & valid[tuple(hi)]
        rows.append(idx[tuple(lo)][both])
        cols.append(idx[tuple(hi)][both])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    g = coo_matrix((np.ones(len(r)), (r, c)), shape=(len(nodes), len(nodes))).tocsr()
    return g, nodes


def _flat_index(shape: tuple[int, ...], node: Sequence[int]) -> int:
    node = tuple(int(i) for i in node)
    if len(node) != len(shape) or any(not 0 <= i < s for i, s in zip(node, shape)):
        raise PotentialError(f"base node {node} is outside the grid {shape}")
    return int(np.ravel_multi_index(node, shape))


def _integrate_rows(domain: Domain, M: np.ndarray, valid: np.ndarray, base_node: Sequence[int] | None
                    ) -> np.ndarray:
    """Trapezoid integration of rows M (m, n, *grid) along a BFS spanning tree of ``valid``."""
    shape = domain.shape
    n = domain.ndim
    m = M.shape[0]
    graph, nodes = _grid_graph(valid)
    if len(nodes) == 0:
        raise PotentialError("no nodes where the input is defined")
    ncomp, _ = connected_components(graph, directed=False)
    if ncomp != 1:
        raise PotentialError(f"region where the input is defined has {ncomp} components")
    if base_node is None:
        root_flat = int(nodes[0])
    else:
        root_flat = _flat_index(shape, base_node)
        if not valid.ravel()[root_flat]:
            raise PotentialError(f"base node {tuple(base_node)} is not in the region where the input is defined")
    root = int(np.searchsorted(nodes, root_flat))
    order, pred = breadth_first_order(graph, root, directed=False, return_predecessors=True)

    flatM = M.reshape(m, n, -1)[:, :, nodes]  # (m, n, nvalid)
    coords = np.stack([c.ravel()[nodes] for c in domain.coords()])  # (n, nvalid)
    child = order[1:]
    parent = pred[child]
    step = coords[:, child] - coords[:, parent]  # (n, k)
    inc = 0.5 * np.einsum("ijk,jk->ik", flatM[:, :, child] + flatM[:, :, parent], step)

    # accumulate along the tree level by level (BFS order guarantees parents come first)
    depth = np.zeros(len(nodes), dtype=np.int64)
    for c, p in zip(child.tolist(), parent.tolist()):
        depth[c] = depth[p] + 1
    Y = np.zeros((m, len(nodes)))
    inc_of = np.zeros((m, len(nodes)))
    inc_of[:, child] = inc
    by_depth = np.argsort(depth[order], kind="stable")
    levels = order[by_depth]
    d_sorted = depth[levels]
    bounds = np.flatnonzero(np.diff(d_sorted)) + 1
    for chunk in np.split(levels, bounds)[1:]:
        Y[:, chunk] = Y[:, pred[chunk]] + inc_of[:, chunk]

    out = np.full((m,) + shape, np.nan)
    out.reshape(m, -1)[:, nodes] = Y
    return out


def _gradient_rows(T: TensorField, kind: str, metric=None) -> np.ndarray:
    vk = T.valence.kind
    if kind == "grad":
        if vk != "tensor20":
            raise ValenceError("grad potentials need a tensor20 field")
        return T.dense()
    if kind == "Grad":
        if vk != "twopoint":
            raise ValenceError("Grad potentials need a two-point field")
        return T.dense()
    if kind == "surfGrad":
        if vk != "twopoint" or T.n != 2:
            raise ValenceError("surfGrad potentials need a two-point field on a 2D chart")
        from .geometry import MetricChart

        metric = MetricChart.for_domain(T.domain) if metric is None else metric
        metric.check_domain(T.domain)
        return np.einsum("JI...,iI...->iJ...", metric.G(T.domain), T.dense())  # U^i,J
    if kind == "displacement":
        if vk == "form" and T.valence.degree == 1:
            return T.dense()
        if vk in ("twopoint", "tensor20"):
            return T.dense()
        raise ValenceError("displacement potentials need an R^m-valued 1-form")
    raise ValueError(f"unknown gradient kind {kind!r}; expected one of {GRAD_KINDS}")


def _precheck(check_kind: str, T: TensorField, precheck) -> None:
    if precheck is None:
        return
    from .compat import check

    loops, surfaces = precheck
    report = check(check_kind, T, loops=loops, surfaces=surfaces)
    if report.verdict == "incompatible":
        raise PotentialError(f"{check_kind} check is incompatible; no potential exists")


def reconstruct_grad(T: TensorField, base_node: Sequence[int] | None = None, kind: str = "grad", metric=None,
                     precheck: tuple | None = None) -> TensorField:
    """Potential Y with grad Y = T (per row), Y = 0 at ``base_node``.

    ``kind`` selects the input convention: tensor20 rows (grad), two-point rows
    (Grad), metric-raised two-point rows on a surface chart (surfGrad), or an
    R^m-valued 1-form (displacement).  ``precheck`` = (loops, surfaces) runs the
    matching compatibility check first and refuses incompatible input.
    """
    check_kind = {"grad": "grad3d" if T.n == 3 else "grad2d", "Grad": "Grad3d" if T.n == 3 else "Grad2d",
                  "surfGrad": "surfGrad", "displacement": "dispgrad"}.get(kind)
    M = _gradient_rows(T, kind, metric)
    _precheck(check_kind, T, precheck)
    Y = _integrate_rows(T.domain, M, T.valid, base_node)
    m = M.shape[0]
    valence = Valence("vector") if (kind == "grad" and m == T.n) else Valence("vector", m)
    return TensorField(T.domain, valence, Y, T.valid)


def reconstruct_s(T: TensorField, base_node: Sequence[int] | None = None, precheck: tuple | None = None
                  ) -> TensorField:
    """Y with s(Y) = T on a 2D domain.

    s(Y) has rows (Y^i,2, -Y^i,1), so the rotated rows (-T^i2, T^i1) are gradients of Y^i.
    """
    if T.valence.kind not in ("tensor20", "twopoint") or T.n != 2:
        raise ValenceError("reconstruct_s needs a 2D tensor20 or two-point field")
    _precheck("s2d" if T.valence.kind == "tensor20" else "S2d", T, precheck)
    D = T.dense()
    rot = np.stack([-D[:, 1], D[:, 0]], axis=1)
    Y = _integrate_rows(T.domain, rot, T.valid, base_node)
    m = D.shape[0]
    valence = Valence("vector") if m == 2 else Valence("vector", m)
    return TensorField(T.domain, valence, Y, T.valid)


def simpson_weights(panels: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite Simpson rule on [0, 1] (``panels`` even)."""
    if panels < 2 or panels % 2:
        raise ValueError("Simpson's rule needs an even number of panels")
    t = np.linspace(0.0, 1.0, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return t, w / (3.0 * panels)


def reconstruct_curlT(T: TensorField, star_center: Sequence[float] | None, panels: int = 64,
                      precheck: tuple | None = None) -> TensorField:
    """W with curl^T W = T on a domain star-shaped about ``star_center``.

    Row i of T becomes the closed 2-form beta^i = eps_JKL T^{iL} dX^J dX^K.  The radial
    homotopy operator (K beta)(x)_K = int_0^1 t beta(x0 + t (x - x0))(x - x0, e_K) dt
    gives a 1-form whose components are the rows of W.  Every radial segment must stay
    where T is defined; the centre is declared by the caller, not inferred.
    """
    if star_center is None:
        raise PotentialError("curl^T potentials need a declared star centre")
    if T.valence.kind != "tensor20" or T.n != 3:
        raise ValenceError("reconstruct_curlT needs a tensor20 field on a 3D domain")
    _precheck("curlT3d", T, precheck)
    dom = T.domain
    x0 = np.asarray(star_center, dtype=float)
    if x0.shape != (3,):
        raise PotentialError("star centre needs three coordinates")
    t, w = simpson_weights(panels)
    nodes = np.argwhere(T.valid)
    X = np.stack([c[T.valid] for c in dom.coords()], axis=1)  # (k, 3)
    R = X - x0
    W = np.zeros((len(X), 3, 3))  # W[node, i, K]
    # beta^i(r, e_K) with beta^i_JK = eps_JKL T^iL:  r^J eps_JKL T^iL
    for tq, wq in zip(t, w):
        if tq == 0.0:
            continue
        pts = x0 + tq * R
        try:
            vals = interpolate(T, pts).reshape(len(X), 3, 3)  # T^{iL}
        except Exception as exc:
            raise PotentialError(f"domain is not star-shaped about {x0.tolist()} "
                                 f"(radial segment leaves the field's region): {exc}") from None
        W += wq * tq * np.einsum("pj,jkl,pil->pik", R, calculus.EPS, vals)
    out = np.full((3, 3) + dom.shape, np.nan)
    out[(slice(None), slice(None)) + tuple(nodes.T)] = np.moveaxis(W, 0, -1)
    return TensorField(dom, TENSOR20, out.reshape((9,) + dom.shape), T.valid)
