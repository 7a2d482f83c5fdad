from __future__ import annotations

import json

import numpy as np
import pytest

from tensorcomplex import mesh
from tensorcomplex.mesh import Chain1, Chain2, DomainError, GridSpec, build_domain


def test_gridspec_rejects_bad_input():
    with pytest.raises(DomainError):
        GridSpec((3, 10), (0, 0), (0.1, 0.1))
    with pytest.raises(DomainError):
        GridSpec((10, 10), (0, 0), (0.1, -0.1))
    with pytest.raises(DomainError):
        GridSpec((10,), (0,), (0.1,))
    with pytest.raises(DomainError):
        GridSpec((10, 10), (0, float("nan")), (0.1, 0.1))


def test_from_bounds_hits_both_ends():
    g = GridSpec.from_bounds((5, 9), (0.0, -1.0), (1.0, 1.0))
    assert g.axis_coords(0)[-1] == pytest.approx(1.0)
    assert g.axis_coords(1)[0] == -1.0
    assert g.spacing == (0.25, 0.25)


def test_chart_dimension_mismatch():
    g = GridSpec.from_bounds((8, 8), (0, 0), (1, 1))
    with pytest.raises(DomainError):
        build_domain(g, "full", "cartesian3")
    with pytest.raises(DomainError):
        build_domain(g, "full", "polar")


def test_disconnected_mask_rejected():
    g = GridSpec.from_bounds((10, 10), (0, 0), (1, 1))
    bits = np.zeros((10, 10), bool)
    bits[:, :4] = True
    bits[:, 6:] = True
    with pytest.raises(DomainError, match="disconnected"):
        build_domain(g, bits, "cartesian2")


def test_thin_mask_rejected():
    g = GridSpec.from_bounds((10, 10), (0, 0), (1, 1))
    bits = np.zeros((10, 10), bool)
    bits[:, 3:5] = True
    with pytest.raises(DomainError, match="interior"):
        build_domain(g, bits, "cartesian2")


def test_box_minus_box_needs_nested_boxes():
    g = GridSpec.from_bounds((12, 12), (0, 0), (1, 1))
    with pytest.raises(DomainError):
        build_domain(g, {"name": "box-minus-box", "outer_lo": [0, 0], "outer_hi": [1, 1],
                         "inner_lo": [0.5, 0.5], "inner_hi": [1.2, 0.8]}, "cartesian2")


def test_mask_rules_select_expected_nodes(annulus, shell, torus):
    for dom, rad in ((annulus, lambda X: np.hypot(*X)),):
        r = rad(dom.coords())
        assert np.all((r[dom.mask] >= 0.5) & (r[dom.mask] <= 1.8))
        assert not np.any(dom.mask[(r > 0.5) & (r < 1.8)] == False)  # noqa: E712
    X = shell.coords()
    r = np.sqrt(sum(c * c for c in X))
    assert np.all((r[shell.mask] >= 0.6) & (r[shell.mask] <= 1.8))
    x, y, z = torus.coords()
    assert np.all((np.hypot(x, y) - 1.2)[torus.mask] ** 2 + z[torus.mask] ** 2 <= 0.55 ** 2 + 1e-12)


def test_domain_json_round_trip_is_exact(annulus):
    text = json.dumps(annulus.to_json())
    back = mesh.Domain.from_json(json.loads(text))
    assert back == annulus
    assert back.grid == annulus.grid
    assert np.array_equal(back.mask, annulus.mask)


def test_bitmap_round_trip(tmp_path):
    g = GridSpec((8, 9), (0.1, 0.2), (1 / 3, 0.7))
    bits = np.ones((8, 9), bool)
    bits[0, 0] = False
    dom = build_domain(g, bits, "cartesian2")
    path = tmp_path / "d.tdom"
    mesh.save_domain(dom, path)
    back = mesh.load_domain(path)
    assert back == dom
    assert back.grid.spacing == (1 / 3, 0.7)


def test_contains_respects_mask(annulus):
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.2], [1.95, 1.95]])
    assert annulus.contains(pts).tolist() == [False, True, True, False]


def test_contains_accepts_grid_nodes_on_edge(box2):
    # a point on the upper boundary face only touches masked-in nodes
    assert box2.contains(np.array([[1.0, 1.0], [0.0, 0.5]])).all()
    assert not box2.contains(np.array([[1.0 + 1e-3, 0.5]])).any()


def test_validate_chain_messages(annulus):
    good = mesh.circle_loop((0, 0), 1.15, 512)
    assert mesh.validate_chain(annulus, good) == []
    open_loop = Chain1(good.vertices[:-1])
    assert "not closed" in mesh.validate_chain(annulus, open_loop)
    coarse = mesh.circle_loop((0, 0), 1.15, 8)
    assert any("segments" in p for p in mesh.validate_chain(annulus, coarse))
    through_hole = mesh.circle_loop((0, 0), 0.3, 512)
    assert any("outside" in p for p in mesh.validate_chain(annulus, through_hole))


def test_validate_surface(shell):
    s = mesh.icosphere((0, 0, 0), 1.2, 3)
    assert mesh.validate_chain(shell, s) == []
    assert len(s.triangles) == 20 * 4 ** 3
    flipped = Chain2(s.vertices, np.vstack([s.triangles[:1, ::-1], s.triangles[1:]]))
    assert any("orientation" in p for p in mesh.validate_chain(shell, flipped))
    holed = Chain2(s.vertices, s.triangles[1:])
    assert any("boundary edge" in p for p in mesh.validate_chain(shell, holed))


def test_surfaces_are_outward():
    assert mesh.signed_volume(mesh.icosphere((0, 0, 0), 1.0, 4)) == pytest.approx(4 / 3 * np.pi, rel=5e-3)
    assert mesh.signed_volume(mesh.box_surface((0, 0, 0), (1, 2, 3), 0.5)) == pytest.approx(6.0)


def test_box_loop_area_is_positive():
    L = mesh.box_loop((0, 0), (2, 1), 0.1)
    V = L.vertices
    area = 0.5 * np.sum(V[:-1, 0] * V[1:, 1] - V[1:, 0] * V[:-1, 1])
    assert area == pytest.approx(2.0)


def test_canonical_generators(annulus, shell, torus):
    loops, surfs = mesh.canonical_generators(annulus)
    assert len(loops) == 1 and not surfs
    loops, surfs = mesh.canonical_generators(shell, subdivisions=3)
    assert not loops and len(surfs) == 1
    loops, _ = mesh.canonical_generators(torus, segments=1024)
    assert mesh.validate_chain(torus, loops[0]) == []


def test_chain_json_round_trip():
    L = mesh.circle_loop((0, 0), 1.0, 64)
    S = mesh.icosphere((0, 0, 0), 1.0, 1)
    loops, surfs = mesh.chains_from_json(json.loads(json.dumps(mesh.chains_to_json([L], [S]))))
    assert np.array_equal(loops[0].vertices, L.vertices)
    assert np.array_equal(surfs[0].triangles, S.triangles)
