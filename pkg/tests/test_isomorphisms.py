from __future__ import annotations

import numpy as np
import pytest

from tensorcomplex import catalog, isomorphisms, verify
from tensorcomplex.fields import SCALAR, TENSOR20, VECTOR, Valence, ValenceError, random_polynomial

V3 = Valence("vector", 3)
TP3 = Valence("twopoint", 3)

# iso id -> (input valence, chart, symmetric probe)
INPUTS = {
    "imath0": (SCALAR, "c3", False), "imath1": (VECTOR, "c3", False),
    "imath2": (VECTOR, "c3", False), "imath3": (SCALAR, "c3", False),
    "bimath0": (VECTOR, "c3", False), "bimath1": (TENSOR20, "c3", False),
    "bimath2": (TENSOR20, "c3", False), "bimath3": (VECTOR, "c3", False),
    "I0": (V3, "c3", False), "I1": (TP3, "c3", False), "I2": (TP3, "c3", False), "I3": (V3, "c3", False),
    "j0": (VECTOR, "c2", False), "j1": (TENSOR20, "c2", False), "j2": (VECTOR, "c2", False),
    "J0": (V3, "c2", False), "J1": (TP3, "c2", False), "J2": (V3, "c2", False),
    "Jsurf0": (V3, "sph", False), "Jsurf1": (TP3, "sph", False), "Jsurf2": (V3, "sph", False),
    "iota0": (VECTOR, "c3", False), "iota1": (TENSOR20, "c3", True),
    "iota2": (TENSOR20, "c3", True), "iota3": (VECTOR, "c3", False),
    "gamma0": (VECTOR, "c2", False), "gamma1": (TENSOR20, "c2", True), "gamma2": (SCALAR, "c2", False),
}


@pytest.fixture(scope="module")
def domains():
    return {"c2": catalog.box(2, 12), "c3": catalog.box(3, 10),
            "sph": catalog.sphere_patch(1 / 16, R=1.3)}


def test_every_iso_is_covered():
    assert set(INPUTS) == set(isomorphisms.ISOS)


@pytest.mark.parametrize("iso", sorted(INPUTS))
def test_round_trip(iso, domains, rng):
    valence, chart, sym = INPUTS[iso]
    f = random_polynomial(domains[chart], valence, rng, symmetric=sym)
    back = isomorphisms.inverse(iso, isomorphisms.forward(iso, f))
    assert back.valence.same_as(f.valence, f.n)
    assert (back - f).max_abs() <= 1e-12


def test_imath2_ordering(domains):
    d = domains["c3"]
    Y = random_polynomial(d, VECTOR, np.random.default_rng(1))
    a = isomorphisms.forward("imath2", Y)
    # components on dX1dX2, dX1dX3, dX2dX3 are Y3, -Y2, Y1
    assert np.array_equal(a.data[0], Y.data[2])
    assert np.array_equal(a.data[1], -Y.data[1])
    assert np.array_equal(a.data[2], Y.data[0])


def test_surface_weighting(domains):
    d = domains["sph"]
    U = random_polynomial(d, V3, np.random.default_rng(2))
    a = isomorphisms.forward("Jsurf2", U)
    phi = d.coords()[1]
    assert np.allclose(a.data, U.data * 1.3 ** 2 * np.sin(phi))


def test_iota_rejects_asymmetric(domains, rng):
    with pytest.raises(ValenceError):
        isomorphisms.forward("iota1", random_polynomial(domains["c3"], TENSOR20, rng))


def test_wrong_valence_rejected(domains, rng):
    with pytest.raises(ValenceError):
        isomorphisms.forward("bimath1", random_polynomial(domains["c3"], VECTOR, rng))
    with pytest.raises(KeyError):
        isomorphisms.forward("nope", random_polynomial(domains["c3"], VECTOR, rng))


@pytest.mark.parametrize("cid", sorted(verify.COMPLEXES))
def test_diagrams_commute(cid):
    res = verify.verify_complex(cid, probes=2, seed=7)
    assert res["pass"], res["max_residual"]


def test_sd_square_needs_the_sign(rng):
    d = catalog.box(2, 16)
    T = random_polynomial(d, TENSOR20, rng)
    with_sign = isomorphisms.diagram_residual(("j1", "j0"), "div_t", "delta", T, out_sign=-1.0)
    without = isomorphisms.diagram_residual(("j1", "j0"), "div_t", "delta", T)
    assert with_sign <= 1e-10
    assert without > 1e-2
