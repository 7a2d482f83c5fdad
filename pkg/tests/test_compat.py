from __future__ import annotations

import math

import numpy as np
import pytest

from tensorcomplex import calculus, catalog, compat, geometry as geo, mesh
from tensorcomplex.compat import ChainError, check, verdict_of
from tensorcomplex.fields import (TENSOR02SYM, TENSOR20, VECTOR, Valence, ValenceError, from_dense,
                                  random_polynomial, sample, symmetrize)
from tensorcomplex.geometry import MetricChart


def test_verdict_rule():
    assert verdict_of(1e-12, [0.0, 5e-7], 1e-6, 1e-6) == "compatible"
    assert verdict_of(5e-6, [0.0], 1e-6, 1e-6) == "inconclusive"
    assert verdict_of(1e-12, [2e-5], 1e-6, 1e-6) == "incompatible"
    assert verdict_of(float("nan"), [], 1e-6, 1e-6) == "incompatible"
    assert verdict_of(9e-6, [], 1e-6, 1e-6) == "inconclusive"


@pytest.fixture(scope="module")
def vortex_setup():
    dom = catalog.annulus(128)
    return dom, catalog.vortex_rows(dom)


def test_vortex_is_locally_exact_but_has_a_period(vortex_setup):
    dom, T = vortex_setup
    loops, _ = mesh.canonical_generators(dom)
    rep = check("grad2d", T, loops=loops)
    assert rep.local_residual_linf <= 1e-10
    (cid, vals), = rep.periods
    assert vals[0] == pytest.approx(2 * math.pi, abs=1e-4)
    assert vals[1] == 0.0
    assert rep.verdict == "incompatible"


def test_period_is_homotopy_invariant(vortex_setup):
    dom, T = vortex_setup
    a = compat.line_integral(T, mesh.circle_loop((0, 0), 0.9, 2048))
    b = compat.line_integral(T, mesh.circle_loop((0.1, -0.05), 1.3, 2048))
    assert a[0] == pytest.approx(b[0], abs=5e-4)  # interpolation error on a 128^2 grid
    # a loop that does not wind around the hole only sees interpolation error
    c = compat.line_integral(T, mesh.circle_loop((1.2, 0.0), 0.3, 512))
    assert abs(c[0]) < 1e-3


def test_periods_scale_linearly(vortex_setup):
    dom, T = vortex_setup
    loop = mesh.circle_loop((0, 0), 1.15, 1024)
    assert np.allclose(compat.line_integral(2.5 * T, loop), 2.5 * compat.line_integral(T, loop), rtol=1e-13)


def test_missing_chains_make_verdict_inconclusive(vortex_setup):
    dom, T = vortex_setup
    rep = check("grad2d", T)
    assert rep.verdict == "inconclusive"
    assert rep.notes and "none were supplied" in rep.notes[0]


def test_bad_chain_raises(vortex_setup):
    dom, T = vortex_setup
    with pytest.raises(ChainError):
        check("grad2d", T, loops=[mesh.circle_loop((0, 0), 0.3, 512)])


def test_constant_field_is_compatible(annulus):
    T = sample({"11": 1.0, "12": -2.0, "21": 0.5, "22": 3.0}, annulus, TENSOR20)
    loops, _ = mesh.canonical_generators(annulus, segments=1024)
    for kind in ("grad2d", "s2d"):
        rep = check(kind, T, loops=loops)
        assert rep.verdict == "compatible", kind
        assert rep.max_period <= 1e-12


def test_normal_mode_flux_of_rotated_vortex(vortex_setup):
    dom, T = vortex_setup
    # (Y,2, -Y,1) with Y the angle: divergence free rows whose normal flux is 2*pi
    D = T.dense()
    S = from_dense(dom, TENSOR20, np.stack([np.stack([D[0, 1], -D[0, 0]]), np.zeros_like(D[1])]), T.valid)
    rep = check("s2d", S, loops=mesh.canonical_generators(dom)[0])
    assert rep.local_residual_linf <= 1e-10
    assert abs(rep.periods[0][1][0]) == pytest.approx(2 * math.pi, abs=1e-4)
    assert rep.verdict == "incompatible"


def test_inverse_square_flux(shell):
    T = catalog.inverse_square_rows(shell)
    surf = mesh.icosphere((0, 0, 0), 1.2, 4)
    rep = check("curlT3d", T, surfaces=[surf])
    assert np.allclose(rep.periods[0][1], 4 * math.pi, atol=1e-2)
    assert rep.verdict == "incompatible"
    edge = compat.surface_integral(T, surf, rule="edge")
    assert np.allclose(edge, 4 * math.pi, atol=2e-3)


def test_beltrami_images_are_compatible(shell, rng):
    W = random_polynomial(shell, TENSOR20, rng, symmetric=True)
    sigma = symmetrize(calculus.curlcurl(W))
    rep = check("beltrami", sigma, surfaces=[mesh.icosphere((0, 0, 0), 1.2, 3)])
    assert len(rep.periods[0][1]) == 6
    assert rep.verdict == "compatible", rep.to_json()


def test_moment_detects_a_torque(box3):
    # rows (0, 0, x) style field: div free, zero force, nonzero moment about a box
    T = sample({"11": 0.0, "12": 0.0, "13": 0.0, "21": 0.0, "22": 0.0, "23": 0.0,
                "31": 0.0, "32": 0.0, "33": 0.0}, box3, TENSOR20)
    surf = mesh.box_surface((0.2, 0.2, 0.2), (0.8, 0.8, 0.8), 0.05)
    assert np.allclose(compat.surface_integral(T, surf, moment=True), 0.0)
    P = sample({"11": 0.0, "12": 1.0, "13": 0.0, "21": 1.0, "22": 0.0, "23": 0.0,
                "31": 0.0, "32": 0.0, "33": 0.0}, box3, TENSOR20)
    # constant symmetric stress: force and moment both vanish over a closed surface
    assert np.allclose(compat.surface_integral(P, surf, moment=True), 0.0, atol=1e-13)


def test_linstrain_families_on_the_torus(torus, rng):
    Y = random_polynomial(torus, VECTOR, rng)
    e = calculus.gradS(Y)
    loops, _ = mesh.canonical_generators(torus, segments=2048)
    rep = check("linstrain3d", e, loops=loops)
    ids = [cid for cid, _ in rep.periods]
    assert ids == ["loop0:A", "loop0:B"]
    assert len(rep.periods[0][1]) == 3 and len(rep.periods[1][1]) == 9
    assert rep.max_period <= 1e-6
    assert rep.verdict == "compatible"


def test_linstrain2d_accepts_covariant_input(annulus, rng):
    Y = random_polynomial(annulus, VECTOR, rng)
    e = calculus.gradS(Y)
    e_cov = from_dense(annulus, TENSOR02SYM, e.dense(), e.valid)
    loops, _ = mesh.canonical_generators(annulus, segments=1024)
    assert check("linstrain2d", e_cov, loops=loops).verdict == "compatible"


def test_shell_counterexample_is_incompatible(box2):
    rep = check("shell", catalog.flat_shell_counterexample(box2))
    assert rep.verdict == "incompatible"
    assert rep.local_residual_linf == pytest.approx(1.0)


def test_metric_is_not_a_calabi_image():
    d = catalog.sphere_patch(1 / 32, R=1.3)
    G = from_dense(d, TENSOR02SYM, np.array(MetricChart.spherical(1.3).G(d)), d.mask)
    assert check("calabi", G).verdict == "incompatible"


def test_green_tensor_of_rigid_motion(box3):
    phi = sample({"1": "y + 1", "2": "-x", "3": "z"}, box3, VECTOR)
    rep = check("greenC", geo.green_deformation(phi))
    assert rep.verdict == "compatible"


def test_local_only_check_capped_on_torus(torus):
    one = np.ones(torus.shape)
    zero = np.zeros(torus.shape)
    C = from_dense(torus, TENSOR02SYM, np.array([[one, zero, zero], [zero, one, zero], [zero, zero, one]]),
                   torus.mask)
    rep = check("greenC", C)
    assert rep.verdict == "inconclusive"
    assert "simply connected" in rep.notes[0]


def test_wrong_valence_and_kind(box2, rng):
    with pytest.raises(ValenceError):
        check("grad3d", random_polynomial(box2, TENSOR20, rng))
    with pytest.raises(KeyError):
        check("nonsense", random_polynomial(box2, TENSOR20, rng))
    with pytest.raises(ValenceError):
        check("Grad2d", random_polynomial(box2, TENSOR20, rng))
    assert check("Grad2d", random_polynomial(box2, Valence("twopoint", 3), rng)).verdict != "compatible"


def test_report_json_round_trip(vortex_setup):
    import json

    dom, T = vortex_setup
    rep = check("grad2d", T, loops=mesh.canonical_generators(dom, segments=1024)[0])
    obj = json.loads(json.dumps(rep.to_json()))
    assert obj["verdict"] == "incompatible"
    assert obj["periods"][0]["chain"] == "loop0"
