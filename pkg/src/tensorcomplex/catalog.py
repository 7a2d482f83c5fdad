"""Named example domains, fields and embeddings used by the checks, the CLI and the tests."""

from __future__ import annotations

import math

import numpy as np

from . import calculus
from .fields import TENSOR20, TensorField, Valence, from_dense
from .mesh import Domain, GridSpec, build_domain


def annulus(nodes: int = 256, r_in: float = 0.5, r_out: float = 1.8, half_width: float = 2.0) -> Domain:
    spec = GridSpec.from_bounds((nodes, nodes), (-half_width,) * 2, (half_width,) * 2)
    return build_domain(spec, {"name": "annulus", "r_in": r_in, "r_out": r_out}, "cartesian2")


def spherical_shell(nodes: int = 64, r_in: float = 0.6, r_out: float = 1.8, half_width: float = 2.0) -> Domain:
    spec = GridSpec.from_bounds((nodes,) * 3, (-half_width,) * 3, (half_width,) * 3)
    return build_domain(spec, {"name": "spherical-shell", "r_in": r_in, "r_out": r_out}, "cartesian3")


def solid_torus(nodes: int = 48, R: float = 1.2, r: float = 0.55, half_width: float = 2.0) -> Domain:
    spec = GridSpec.from_bounds((nodes,) * 3, (-half_width,) * 3, (half_width,) * 3)
    return build_domain(spec, {"name": "solid-torus", "R": R, "r": r}, "cartesian3")


def box(n: int, nodes: int = 32, lo: float = 0.0, hi: float = 1.0) -> Domain:
    spec = GridSpec.from_bounds((nodes,) * n, (lo,) * n, (hi,) * n)
    return build_domain(spec, "full", f"cartesian{n}")


def sphere_patch(h: float, R: float = 1.0, theta0: float = 0.0, phi0: float = 0.5, extent: float = 1.0) -> Domain:
    """Spherical-chart domain with spacing h on [theta0, theta0+extent] x [phi0, phi0+extent]."""
    nodes = int(round(extent / h)) + 1
    return build_domain(GridSpec((nodes, nodes), (theta0, phi0), (h, h)), "full", "spherical", radius=R)


def _wrap(a: np.ndarray) -> np.ndarray:
    return (a + math.pi) % (2 * math.pi) - math.pi


def vortex_rows(domain: Domain, rows: tuple[int, ...] = (0,)) -> TensorField:
    """Rows = discrete gradient of the polar angle (multivalued), other rows zero.

    Central differences of the angle are taken modulo 2*pi, so the field is the
    exact discrete gradient of a local branch around every node: c(T) vanishes to
    round-off while the period around the hole is 2*pi.
    """
    if domain.ndim != 2:
        raise ValueError("the vortex field lives on a 2D domain")
    x, y = domain.coords()
    theta = np.arctan2(y, x)
    h = domain.grid.spacing
    g = np.full((2,) + domain.shape, np.nan)
    g[0, 1:-1, :] = _wrap(theta[2:, :] - theta[:-2, :]) / (2 * h[0])
    g[1, :, 1:-1] = _wrap(theta[:, 2:] - theta[:, :-2]) / (2 * h[1])
    M = np.zeros((2, 2) + domain.shape)
    for r in rows:
        M[r] = g
    valid = calculus.erode(domain.mask)
    return from_dense(domain, TENSOR20, M, valid)


def inverse_square_rows(domain: Domain, rows: tuple[int, ...] = (0, 1, 2)) -> TensorField:
    """Rows = X / |X|^3 (divergence free away from the origin, flux 4*pi through any enclosing surface)."""
    if domain.ndim != 3:
        raise ValueError("the inverse-square field lives on a 3D domain")
    X = np.stack(domain.coords())
    r3 = np.sum(X * X, axis=0) ** 1.5
    with np.errstate(divide="ignore", invalid="ignore"):
        v = X / r3
    M = np.zeros((3, 3) + domain.shape)
    for r in rows:
        M[r] = v
    return from_dense(domain, TENSOR20, M, domain.mask)


# -------------------------------------------------------------- embeddings
def _vec(domain: Domain, comps) -> TensorField:
    data = np.stack([np.asarray(c, dtype=float) * np.ones(domain.shape) for c in comps])
    return TensorField(domain, Valence("vector", len(comps)), data, domain.mask)


def embedding(name: str, domain: Domain) -> TensorField:
    """Test maps: ``twist3d``, ``bend3d`` (3D bodies), ``wave2d`` (planar), ``cylinder``, ``sphere`` (surfaces)."""
    X = domain.coords()
    if name == "twist3d":
        x, y, z = X
        a = 0.4 * z
        return _vec(domain, [x * np.cos(a) - y * np.sin(a), x * np.sin(a) + y * np.cos(a), z + 0.1 * x * x])
    if name == "bend3d":
        x, y, z = X
        return _vec(domain, [x + 0.2 * np.sin(y), y + 0.15 * z * z, z + 0.1 * np.sin(x + y)])
    if name == "wave2d":
        x, y = X
        return _vec(domain, [x + 0.2 * np.sin(y), y + 0.1 * x * x])
    if name == "cylinder":
        # non-uniform parametrization of a cylinder of radius 1.3
        u, v = X
        ang = u + 0.3 * u * u + 0.2 * v
        return _vec(domain, [1.3 * np.cos(ang), 1.3 * np.sin(ang), v + 0.25 * u * v])
    if name == "sphere":
        # sphere of radius 1.1 with reparametrized angles
        u, v = X
        t = u + 0.2 * v * v
        p = v + 0.1 * np.sin(u)
        return _vec(domain, [1.1 * np.sin(p) * np.cos(t), 1.1 * np.sin(p) * np.sin(t), 1.1 * np.cos(p)])
    raise KeyError(f"unknown embedding {name!r}")


def flat_shell_counterexample(domain: Domain) -> tuple[TensorField, TensorField]:
    """C = identity with theta = diag(1, -1): violates the Gauss equation."""
    one = np.ones(domain.shape)
    zero = np.zeros(domain.shape)
    C = from_dense(domain, Valence("tensor02sym"), np.array([[one, zero], [zero, one]]), domain.mask)
    theta = from_dense(domain, Valence("tensor02sym"), np.array([[one, zero], [zero, -one]]), domain.mask)
    return C, theta
