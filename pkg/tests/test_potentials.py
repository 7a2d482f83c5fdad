from __future__ import annotations

import numpy as np
import pytest

from tensorcomplex import calculus, catalog, mesh, potentials as P
from tensorcomplex.fields import TENSOR20, VECTOR, Valence, ValenceError, random_polynomial, sample
from tensorcomplex.geometry import MetricChart
from tensorcomplex.potentials import PotentialError


def test_simpson_weights():
    t, w = P.simpson_weights(8)
    assert w.sum() == pytest.approx(1.0)
    assert np.dot(w, t ** 3) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        P.simpson_weights(7)


def test_linear_potential_is_exact(box3):
    # trapezoid integration of a constant gradient is exact
    Y = sample({"1": "2*x - y + 1", "2": "3*z", "3": "x + y + z"}, box3, VECTOR)
    T = calculus.grad_t(Y)
    Yh = P.reconstruct_grad(T)
    assert (calculus.grad_t(Yh) - T).max_abs() <= 1e-12


def test_grad_round_trip_polynomial(rng):
    d = catalog.box(2, 65)
    T = calculus.grad_t(random_polynomial(d, VECTOR, rng))
    Yh = P.reconstruct_grad(T)
    # cubic terms carry an O(h^2) trapezoid bias
    assert (calculus.grad_t(Yh) - T).max_abs() < 2e-3


def test_base_point_only_shifts_the_potential(rng):
    d = catalog.box(3, 33)
    T = calculus.grad_t(random_polynomial(d, VECTOR, rng))
    a = P.reconstruct_grad(T)
    b = P.reconstruct_grad(T, base_node=(10, 12, 7))
    diff = (a - b).data[:, a.valid]
    assert np.max(np.abs(diff - diff[:, :1])) <= 1e-8
    assert np.allclose(b.data[:, 10, 12, 7], 0.0)


def test_base_node_must_be_valid(annulus, rng):
    T = calculus.grad_t(random_polynomial(annulus, VECTOR, rng))
    with pytest.raises(PotentialError):
        P.reconstruct_grad(T, base_node=(64, 64))
    with pytest.raises(PotentialError):
        P.reconstruct_grad(T, base_node=(500, 0))


def test_precheck_refuses_vortex():
    dom = catalog.annulus(96)
    T = catalog.vortex_rows(dom)
    loops, _ = mesh.canonical_generators(dom, segments=1024)
    with pytest.raises(PotentialError, match="incompatible"):
        P.reconstruct_grad(T, precheck=(loops, None))
    # without a precheck the path integral still runs and is single valued on the tree
    assert P.reconstruct_grad(T).valid.any()


def test_s_round_trip(rng):
    d = catalog.box(2, 33)
    Y = sample({"1": "x*y + 2*x", "2": "y - x"}, d, VECTOR)
    T = calculus.s2d(Y)
    Yh = P.reconstruct_s(T)
    assert (calculus.s2d(Yh) - T).max_abs() <= 1e-12
    with pytest.raises(ValenceError):
        P.reconstruct_s(random_polynomial(catalog.box(3, 8), TENSOR20, rng))


def test_surface_grad_round_trip():
    d = catalog.sphere_patch(1 / 32, R=1.3)
    m = MetricChart.spherical(1.3)
    U = sample({"1": "theta", "2": "2*phi - theta", "3": "0.5*theta + phi"}, d, Valence("vector", 3))
    F = calculus.surfGrad(U, m)
    Uh = P.reconstruct_grad(F, kind="surfGrad")
    assert (calculus.surfGrad(Uh, m) - F).max_abs() <= 1e-12


def test_curlT_homotopy_on_quadratic_potential():
    d = catalog.box(3, 17, -0.5, 0.5)
    comps = {f"{i}{j}": f"{0.1 * (i + j)}*x*y + {0.2 * i - 0.3 * j}*z**2 + {j}*x - y" for i in (1, 2, 3)
             for j in (1, 2, 3)}
    T = calculus.curlT(sample(comps, d, TENSOR20))
    Wh = P.reconstruct_curlT(T, (0.0, 0.0, 0.0), panels=16)
    assert (calculus.curlT(Wh) - T).max_abs() <= 1e-10


def test_curlT_needs_star_center(box3, rng):
    T = calculus.curlT(random_polynomial(box3, TENSOR20, rng))
    with pytest.raises(PotentialError):
        P.reconstruct_curlT(T, None)


def test_curlT_rejects_non_star_shaped_domain(shell, rng):
    T = calculus.curlT(random_polynomial(shell, TENSOR20, rng))
    with pytest.raises(PotentialError, match="star-shaped"):
        P.reconstruct_curlT(T, (0.0, 0.0, 0.0), panels=4)


def test_disconnected_region_rejected(box2, rng):
    T = calculus.grad_t(random_polynomial(box2, VECTOR, rng))
    cut = T.valid.copy()
    cut[15:17, :] = False
    with pytest.raises(PotentialError, match="components"):
        P.reconstruct_grad(T.restrict(cut))


def test_curlT_of_constant_field_gives_linear_potential(box3):
    d = catalog.box(3, 17, -0.5, 0.5)
    T = sample({"11": 1.0, "12": 2.0, "13": -1.0, "21": 0.5, "22": 0.0, "23": 3.0,
                "31": -2.0, "32": 1.5, "33": 0.25}, d, TENSOR20)
    W = P.reconstruct_curlT(T, (0.1, -0.1, 0.0), panels=8)
    assert (calculus.curlT(W) - T).max_abs() <= 1e-6
    # W is linear in x - x0, so second differences vanish
    assert calculus.grad_t(calculus.div_t(W)).max_abs() <= 1e-10
