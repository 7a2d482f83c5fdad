from __future__ import annotations

import numpy as np
import pytest

from tensorcomplex import calculus, catalog
from tensorcomplex.fields import (SCALAR, TENSOR20, VECTOR, FieldExpr, Valence, ValenceError, form,
                                  asymmetry, random_polynomial, sample, symmetrize)

# symbolic curl curl of W = [[x^3+yz, xy^2, z^2x], [xy^2, y^3-xz, xyz], [z^2x, xyz, x^2y+z^3]]
# at (1/4, 1/2, 3/4), computed with sympy as eps_ikl eps_jmn d_k d_m W_ln
CURLCURL_ORACLE = np.array([[-0.5, 0.0, 1.75], [0.0, -2.0, -1.0], [1.75, -1.0, -2.0]])


def test_curlcurl_matches_symbolic_value():
    dom = catalog.box(3, 9)  # h = 1/8, node (2, 4, 6) sits at (1/4, 1/2, 3/4)
    W = sample({"11": "x**3 + y*z", "12": "x*y**2", "13": "z**2*x",
                "21": "x*y**2", "22": "y**3 - x*z", "23": "x*y*z",
                "31": "z**2*x", "32": "x*y*z", "33": "x**2*y + z**3"}, dom, TENSOR20)
    out = calculus.curlcurl(W).dense()[:, :, 2, 4, 6]
    assert np.allclose(out, CURLCURL_ORACLE, atol=1e-12)


@pytest.mark.parametrize("first,second,valence,n,sym", [
    ("grad_v", "curl_v", SCALAR, 3, False),
    ("curl_v", "div_v", VECTOR, 3, False),
    ("grad_t", "curlT", VECTOR, 3, False),
    ("curlT", "div_t", TENSOR20, 3, False),
    ("Grad2p", "CurlT2p", Valence("vector", 3), 3, False),
    ("CurlT2p", "Div2p", Valence("twopoint", 3), 3, False),
    ("grad_t", "c2d", VECTOR, 2, False),
    ("s2d", "div_t", VECTOR, 2, False),
    ("Grad2p", "C2d", Valence("vector", 3), 2, False),
    ("S2d", "Div2p", Valence("vector", 3), 2, False),
    ("gradS", "curlcurl", VECTOR, 3, False),
    ("curlcurl", "div_t", TENSOR20, 3, True),
    ("gradS", "Dc", VECTOR, 2, False),
    ("Ds", "div_t", SCALAR, 2, False),
    ("d_k", "d_k", form(1, 2), 3, False),
    ("delta_k", "delta_k", form(3, 2), 3, False),
])
def test_compositions_vanish(first, second, valence, n, sym, rng, box2, box3):
    dom = box3 if n == 3 else box2
    probe = random_polynomial(dom, valence, rng, symmetric=sym)
    assert calculus.composition_residual(first, second, probe) <= 1e-10


def test_valid_region_erodes_per_derivative(box3, rng):
    W = random_polynomial(box3, TENSOR20, rng, symmetric=True)
    one = calculus.curlT(W)
    two = calculus.curlcurl(W)
    assert one.valid.sum() == 30 ** 3
    assert two.valid.sum() == 28 ** 3
    assert np.all(np.isnan(two.data[:, ~two.valid]))


def _trig_error(N: int) -> float:
    dom = catalog.box(3, N + 1)
    Y = sample(FieldExpr({"1": "sin(2*x)*cos(y)", "2": "exp(z)*x", "3": "cos(x+y+z)"}), dom, VECTOR)
    exact = sample(FieldExpr({"11": "2*cos(2*x)*cos(y)", "12": "-sin(2*x)*sin(y)", "13": 0.0,
                              "21": "exp(z)", "22": 0.0, "23": "exp(z)*x",
                              "31": "-sin(x+y+z)", "32": "-sin(x+y+z)", "33": "-sin(x+y+z)"}), dom, TENSOR20)
    return (calculus.grad_t(Y) - exact).max_abs()


def test_first_derivatives_are_second_order():
    e = [_trig_error(N) for N in (8, 16, 32)]
    assert 3.6 < e[0] / e[1] < 4.4
    assert 3.6 < e[1] / e[2] < 4.4


def test_curlcurl_preserves_symmetry(box3, rng):
    sym = symmetrize(random_polynomial(box3, TENSOR20, rng))
    assert asymmetry(calculus.curlcurl(sym)) <= 1e-10


def test_dc_rejects_asymmetric_input(box2, rng):
    with pytest.raises(ValenceError):
        calculus.Dc(random_polynomial(box2, TENSOR20, rng))


def test_codifferential_refuses_curvilinear_chart(rng):
    d = catalog.sphere_patch(1 / 16)
    with pytest.raises(ValueError, match="Cartesian"):
        calculus.codifferential(random_polynomial(d, form(1, 1), rng))


def test_operator_dimension_checks(box2, box3, rng):
    with pytest.raises(ValenceError):
        calculus.curlT(random_polynomial(box2, TENSOR20, rng))
    with pytest.raises(ValenceError):
        calculus.c2d(random_polynomial(box3, TENSOR20, rng))
    with pytest.raises(ValenceError):
        calculus.exterior_d(random_polynomial(box2, form(2, 1), rng))
    with pytest.raises(KeyError):
        calculus.get_operator("laplace")


def test_surface_operators_need_metric(rng):
    d = catalog.sphere_patch(1 / 16)
    with pytest.raises(ValueError):
        calculus.surfGrad(random_polynomial(d, Valence("vector", 3), rng), None)


def test_div_of_linear_field(box3):
    Y = sample({"1": "2*x", "2": "-y", "3": "3*z + x"}, box3, VECTOR)
    d = calculus.div_v(Y)
    assert np.allclose(d.data[0][d.valid], 4.0)
