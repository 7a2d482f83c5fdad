from __future__ import annotations

import numpy as np
import pytest

from tensorcomplex import catalog, cohomology
from tensorcomplex.cohomology import CubicalComplex, betti, complex_dims
from tensorcomplex.mesh import GridSpec, build_domain


def _dense_betti(mask: np.ndarray) -> tuple[int, ...]:
    """Independent oracle: dense Gaussian elimination over GF(2)."""
    cx = CubicalComplex(mask)
    ranks = [0] * (cx.n + 2)
    for k in range(1, cx.n + 1):
        M = cx.dense_boundary(k) % 2
        ranks[k] = _gf2_rank(M.astype(np.uint8))
    return tuple(cx.counts[k] - ranks[k] - ranks[k + 1] for k in range(cx.n + 1))


def _gf2_rank(M: np.ndarray) -> int:
    M = M.copy()
    rank = 0
    rows, cols = M.shape
    for c in range(cols):
        piv = np.flatnonzero(M[rank:, c])
        if piv.size == 0:
            continue
        p = rank + piv[0]
        M[[rank, p]] = M[[p, rank]]
        hits = np.flatnonzero(M[:, c])
        hits = hits[hits != rank]
        M[hits] ^= M[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _grid(n, N, hw=2.0):
    ax = np.linspace(-hw, hw, N)
    return np.meshgrid(*([ax] * n), indexing="ij")


def _small_masks():
    x, y = _grid(2, 14)
    r = np.hypot(x, y)
    yield "annulus", (r >= 0.5) & (r <= 1.8)
    x, y, z = _grid(3, 16)
    yield "torus", (np.hypot(x, y) - 1.2) ** 2 + z ** 2 <= 0.6 ** 2
    r = np.sqrt(x * x + y * y + z * z)
    yield "shell", (r >= 0.8) & (r <= 1.8)
    two_holes = np.ones((12, 12), bool)
    two_holes[3:5, 3:5] = False
    two_holes[7:9, 6:9] = False
    yield "two-holes", two_holes


@pytest.mark.parametrize("name,mask", list(_small_masks()))
def test_ranks_match_dense_oracle(name, mask):
    slow = _dense_betti(mask) + (0,)
    assert betti(mask) == slow[:3]


@pytest.mark.parametrize("make,expected", [
    (lambda N: catalog.annulus(N, r_in=0.0), (1, 0, 0)),
    (lambda N: catalog.annulus(N), (1, 1, 0)),
    (lambda N: catalog.solid_torus(N), (1, 1, 0)),
    (lambda N: catalog.spherical_shell(N), (1, 0, 1)),
])
def test_betti_stable_under_refinement(make, expected):
    for N in (24, 40):
        assert betti(make(N)) == expected


def test_box_minus_box():
    g = GridSpec.from_bounds((16, 16, 16), (0, 0, 0), (1, 1, 1))
    d = build_domain(g, {"name": "box-minus-box", "outer_lo": [0, 0, 0], "outer_hi": [1, 1, 1],
                         "inner_lo": [0.3, 0.3, 0.3], "inner_hi": [0.7, 0.7, 0.7]}, "cartesian3")
    assert betti(d) == (1, 0, 1)


def test_euler_characteristic(torus):
    cx = CubicalComplex(torus.mask)
    b = betti(torus)
    assert b[0] - b[1] + b[2] == cx.euler()


def test_components_agree_with_b0(annulus):
    assert cohomology.components(annulus.mask) == betti(annulus)[0]


def test_complex_dimensions():
    shell, torus, annulus = (1, 0, 1), (1, 1, 0), (1, 1, 0)
    assert complex_dims("elasticity3d", shell) == {"H1": 0, "H2": 6}
    assert complex_dims("elasticity3d", torus) == {"H1": 6, "H2": 0}
    assert complex_dims("elasticity2d", annulus) == {"H1": 3}
    assert complex_dims("gcd", shell) == {"H1": 0, "H2": 3}
    assert complex_dims("gc", annulus) == {"H1": 2}
    assert complex_dims("derham", torus) == {"H1": 1, "H2": 0}
    assert complex_dims("calabi", annulus, n=2) == {"H1": 3}
    with pytest.raises(ValueError):
        complex_dims("calabi", annulus)
    with pytest.raises(KeyError):
        complex_dims("hodge", annulus)


def test_killing_dims():
    assert cohomology.killing_dim(2) == 3
    assert cohomology.killing_dim(3) == 6
    with pytest.raises(ValueError):
        cohomology.killing_dim(4)


def test_two_holes_have_two_loops():
    mask = dict(_small_masks())["two-holes"]
    assert betti(mask) == (1, 2, 0)
