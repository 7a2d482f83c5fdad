"""Cubical homology of masked domains and cohomology dimensions of the tensor complexes.

Betti numbers come from exact ranks of the cubical boundary matrices over GF(2).
Subsets of R^2 and R^3 have torsion-free integral homology, so GF(2) ranks
give the rational Betti numbers.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import ndimage

from .mesh import Domain, DomainError

RANK_METHOD = "exact GF(2) column reduction with clearing"

COMPLEXES = ("gcd", "GCD", "gc", "sd", "GC", "SD", "derham", "calabi", "elasticity2d", "elasticity3d")


def _cells(mask: np.ndarray) -> dict[tuple[int, ...], np.ndarray]:
    """Masked-in cubical cells keyed by their spanning axes; values are boolean base-node arrays."""
    n = mask.ndim
    cells = {}
    for k in range(n + 1):
        for axes in itertools.combinations(range(n), k):
            sl = tuple(slice(0, -1) if a in axes else slice(None) for a in range(n))
            ok = mask[sl].copy()
            for bits in itertools.product((0, 1), repeat=k):
                if not any(bits):
                    continue
                sel = [slice(None)] * n
                for a, b in zip(axes, bits):
                    sel[a] = slice(b, mask.shape[a] - 1 + b)
                ok &= mask[tuple(sel)]
            cells[axes] = ok
    return cells


class CubicalComplex:
    """Cells of the cubical complex spanned by the masked-in grid nodes."""

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise DomainError("mask is empty")
        self.mask = mask
        self.n = mask.ndim
        self.cells = _cells(mask)
        # global id per (axes, base node) inside each dimension
        self.ids: dict[tuple[int, ...], np.ndarray] = {}
        self.counts = [0] * (self.n + 1)
        for axes, ok in self.cells.items():
            k = len(axes)
            ids = np.full(ok.shape, -1, dtype=np.int64)
            ids[ok] = self.counts[k] + np.arange(int(ok.sum()))
            self.counts[k] += int(ok.sum())
            self.ids[axes] = ids

    def euler(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.counts))

    def boundary_columns(self, k: int) -> list[np.ndarray]:
        """Columns of the boundary map from k-cells to (k-1)-cells, as sorted face-id arrays."""
        cols: list[np.ndarray | None] = [None] * self.counts[k]
        faces_all = []
        order_all = []
        for axes in itertools.combinations(range(self.n), k):
            ok = self.cells[axes]
            base = np.argwhere(ok)
            if not len(base):
                continue
            own = self.ids[axes][ok]
            faces = []
            for a in axes:
                sub = tuple(b for b in axes if b != a)
                fid = self.ids[sub]
                for shift in (0, 1):
                    p = base.copy()
                    p[:, a] += shift
                    faces.append(fid[tuple(p.T)])
            faces_all.append(np.stack(faces, axis=1))
            order_all.append(own)
        if faces_all:
            F = np.sort(np.concatenate(faces_all), axis=1)
            own = np.concatenate(order_all)
            for j, row in zip(own.tolist(), F):
                cols[j] = row
        return cols  # type: ignore[return-value]

    def dense_boundary(self, k: int) -> np.ndarray:
        """Dense integer boundary matrix (for small instances and tests)."""
        M = np.zeros((self.counts[k - 1], self.counts[k]), dtype=np.int64)
        for j, col in enumerate(self.boundary_columns(k)):
            M[col, j] = 1
        return M


def _reduce(columns: list[np.ndarray], skip: set[int]) -> tuple[int, set[int]]:
    """Rank of a GF(2) matrix given by columns; also returns the pivot rows (for clearing)."""
    pivot_of: dict[int, set[int]] = {}
    for j, col in enumerate(columns):
        if j in skip:
            continue
        cur = set(col.tolist())
        while cur:
            low = max(cur)
            other = pivot_of.get(low)
            if other is None:
                pivot_of[low] = cur
                break
            cur ^= other
    return len(pivot_of), set(pivot_of)


def boundary_ranks(cx: CubicalComplex) -> list[int]:
    """ranks[k] = rank of the boundary map from k-cells (ranks[0] = 0)."""
    ranks = [0] * (cx.n + 2)
    skip: set[int] = set()
    for k in range(cx.n, 0, -1):
        # a k-cell that is the pivot of a reduced (k+1)-column has a zero reduced column
        r, pivots = _reduce(cx.boundary_columns(k), skip)
        ranks[k] = r
        skip = pivots
    return ranks


def betti(domain: Domain | np.ndarray) -> tuple[int, int, int]:
    """(b0, b1, b2) of the masked-in region (b2 = 0 for planar domains)."""
    mask = domain.mask if isinstance(domain, Domain) else np.asarray(domain, dtype=bool)
    cache = domain._cache if isinstance(domain, Domain) else None
    if cache is not None and "betti" in cache:
        return cache["betti"]
    cx = CubicalComplex(mask)
    ranks = boundary_ranks(cx)
    b = [cx.counts[k] - ranks[k] - ranks[k + 1] for k in range(cx.n + 1)]
    if sum((-1) ** k * v for k, v in enumerate(b)) != cx.euler():
        raise RuntimeError("Euler characteristic mismatch in homology computation")
    out = (b[0], b[1], b[2] if cx.n == 3 else 0)
    if cache is not None:
        cache["betti"] = out
    return out


def components(mask: np.ndarray) -> int:
    """Number of face-connected components (equals b0 of the cubical complex)."""
    _, count = ndimage.label(mask, structure=ndimage.generate_binary_structure(mask.ndim, 1))
    return int(count)


def complex_dims(complex_id: str, b: tuple[int, ...], n: int | None = None) -> dict[str, int]:
    """Cohomology dimensions of a tensor complex from the Betti numbers of the domain.

    gcd/GCD are three copies of the de Rham complex, gc/sd/GC/SD two copies, and the
    Calabi (linear elasticity) complexes carry the n(n+1)/2 Killing multiplicity.
    Only the groups H1..H(n-1), the ones that carry the integral conditions, are returned.
    """
    b = tuple(int(v) for v in b) + (0,) * (3 - len(b))
    if complex_id in ("gcd", "GCD"):
        mult, n = 3, 3
    elif complex_id in ("gc", "sd", "GC", "SD"):
        mult, n = 2, 2
    elif complex_id == "derham":
        mult, n = 1, (n or 3)
    elif complex_id == "elasticity3d":
        mult, n = killing_dim(3), 3
    elif complex_id == "elasticity2d":
        mult, n = killing_dim(2), 2
    elif complex_id == "calabi":
        if n is None:
            raise ValueError("the calabi complex needs the dimension n")
        mult = killing_dim(n)
    else:
        raise KeyError(f"unknown complex {complex_id!r}; expected one of {COMPLEXES}")
    return {f"H{k}": mult * b[k] for k in range(1, n)}


def killing_dim(n: int) -> int:
    """Dimension of the Killing algebra of flat or round n-space."""
    if n not in (2, 3):
        raise ValueError(f"killing_dim supports n in {{2, 3}}, got {n}")
    return n * (n + 1) // 2
