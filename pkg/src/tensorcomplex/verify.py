"""Registry of the tensor complexes and their de Rham diagrams, with a seeded verifier."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import calculus, isomorphisms
from .fields import SCALAR, TENSOR20, VECTOR, Valence, form, random_polynomial
from .geometry import MetricChart
from .mesh import Domain, GridSpec, build_domain

TOLERANCE = 1e-10


@dataclass(frozen=True)
class Stage:
    valence: Valence
    symmetric: bool = False


@dataclass(frozen=True)
class Square:
    iso_in: str
    iso_out: str
    op_tensor: str
    op_form: str
    probe: Stage
    sign: float = 1.0


@dataclass(frozen=True)
class Complex:
    id: str
    chart: str
    ops: tuple[str, ...]
    stages: tuple[Stage, ...]  # input of each operator
    squares: tuple[Square, ...] = ()
    surface: tuple["Complex", ...] = field(default=())

    @property
    def ndim(self) -> int:
        return 3 if self.chart == "cartesian3" else 2


V3 = Valence("vector", 3)
TP3 = Valence("twopoint", 3)
SYM = Stage(TENSOR20, True)

_SURFACE_GC = Complex(
    "surfGC", "spherical", ("surfGrad", "surfC"), (Stage(V3), Stage(TP3)),
    (Square("Jsurf0", "Jsurf1", "surfGrad", "d", Stage(V3)),
     Square("Jsurf1", "Jsurf2", "surfC", "d", Stage(TP3))))

COMPLEXES: dict[str, Complex] = {c.id: c for c in [
    Complex("gcd", "cartesian3", ("grad_t", "curlT", "div_t"), (Stage(VECTOR), Stage(TENSOR20), Stage(TENSOR20)),
            (Square("bimath0", "bimath1", "grad_t", "d", Stage(VECTOR)),
             Square("bimath1", "bimath2", "curlT", "d", Stage(TENSOR20)),
             Square("bimath2", "bimath3", "div_t", "d", Stage(TENSOR20)))),
    Complex("GCD", "cartesian3", ("Grad2p", "CurlT2p", "Div2p"), (Stage(V3), Stage(TP3), Stage(TP3)),
            (Square("I0", "I1", "Grad2p", "d", Stage(V3)),
             Square("I1", "I2", "CurlT2p", "d", Stage(TP3)),
             Square("I2", "I3", "Div2p", "d", Stage(TP3)))),
    Complex("gc", "cartesian2", ("grad_t", "c2d"), (Stage(VECTOR), Stage(TENSOR20)),
            (Square("j0", "j1", "grad_t", "d", Stage(VECTOR)),
             Square("j1", "j2", "c2d", "d", Stage(TENSOR20)))),
    Complex("sd", "cartesian2", ("s2d", "div_t"), (Stage(VECTOR), Stage(TENSOR20)),
            (Square("j2", "j1", "s2d", "delta", Stage(VECTOR)),
             Square("j1", "j0", "div_t", "delta", Stage(TENSOR20), sign=-1.0))),
    Complex("GC", "cartesian2", ("Grad2p", "C2d"), (Stage(V3), Stage(TP3)),
            (Square("J0", "J1", "Grad2p", "d", Stage(V3)),
             Square("J1", "J2", "C2d", "d", Stage(TP3))),
            surface=(_SURFACE_GC,)),
    Complex("SD", "cartesian2", ("S2d", "Div2p"), (Stage(V3), Stage(TP3)),
            (Square("J2", "J1", "S2d", "delta", Stage(V3)),
             Square("J1", "J0", "Div2p", "delta", Stage(TP3), sign=-1.0))),
    Complex("elasticity3d", "cartesian3", ("gradS", "curlcurl", "div_t"), (Stage(VECTOR), SYM, SYM),
            (Square("iota0", "iota1", "gradS", "D0", Stage(VECTOR)),
             Square("iota1", "iota2", "curlcurl", "D1", SYM),
             Square("iota2", "iota3", "div_t", "D2", SYM))),
    Complex("elasticity2d", "cartesian2", ("gradS", "Dc"), (Stage(VECTOR), SYM),
            (Square("gamma0", "gamma1", "gradS", "D0", Stage(VECTOR)),
             Square("gamma1", "gamma2", "Dc", "D1", SYM))),
    Complex("derham", "cartesian3", ("d_k", "d_k", "d_k"),
            (Stage(form(0, 1)), Stage(form(1, 1)), Stage(form(2, 1))),
            (Square("imath0", "imath1", "grad_v", "d", Stage(SCALAR)),
             Square("imath1", "imath2", "curl_v", "d", Stage(VECTOR)),
             Square("imath2", "imath3", "div_v", "d", Stage(VECTOR)))),
    Complex("codifferential", "cartesian3", ("delta_k", "delta_k", "delta_k"),
            (Stage(form(3, 3)), Stage(form(2, 3)), Stage(form(1, 3)))),
]}


def default_domain(chart: str, nodes: int = 32) -> Domain:
    """Full 32^n box on [0, 1]^n, or a pole-free spherical patch."""
    if chart == "spherical":
        spec = GridSpec.from_bounds((nodes, nodes), (0.0, 0.5), (1.0, 1.5))
        return build_domain(spec, "full", "spherical", radius=1.0)
    n = 3 if chart == "cartesian3" else 2
    return build_domain(GridSpec.from_bounds((nodes,) * n, (0.0,) * n, (1.0,) * n), "full", chart)


def _probe(domain: Domain, stage: Stage, rng: np.random.Generator):
    return random_polynomial(domain, stage.valence, rng, degree=3, symmetric=stage.symmetric)


def verify_complex(complex_id: str, domain: Domain | None = None, probes: int = 5, seed: int = 0,
                   tolerance: float = TOLERANCE) -> dict:
    """Composition and diagram residuals of a complex on seeded degree-3 polynomial probes."""
    if complex_id not in COMPLEXES:
        raise KeyError(f"unknown complex {complex_id!r}; expected one of {sorted(COMPLEXES)}")
    if probes < 1:
        raise ValueError("need at least one probe")
    cx = COMPLEXES[complex_id]
    rng = np.random.default_rng(seed)
    comps, diags = [], []
    for part in (cx,) + cx.surface:
        if domain is not None and domain.chart == part.chart:
            dom = domain
        else:
            dom = default_domain(part.chart)
        metric = MetricChart.for_domain(dom)
        for p in range(probes):
            for k in range(len(part.ops) - 1):
                probe = _probe(dom, part.stages[k], rng)
                r = calculus.composition_residual(part.ops[k], part.ops[k + 1], probe, metric)
                comps.append({"part": part.id, "first": part.ops[k], "second": part.ops[k + 1], "probe": p,
                              "residual": r})
            for sq in part.squares:
                probe = _probe(dom, sq.probe, rng)
                r = isomorphisms.diagram_residual((sq.iso_in, sq.iso_out), sq.op_tensor, sq.op_form, probe,
                                                  out_sign=sq.sign, metric=metric)
                diags.append({"part": part.id, "square": f"{sq.iso_in}->{sq.iso_out}", "op_tensor": sq.op_tensor,
                              "op_form": sq.op_form, "sign": sq.sign, "probe": p, "residual": r})
    worst = max([c["residual"] for c in comps] + [d["residual"] for d in diags], default=0.0)
    return {"complex": complex_id, "probes": probes, "seed": seed, "tolerance": tolerance,
            "compositions": comps, "diagrams": diags, "max_residual": worst, "pass": bool(worst <= tolerance)}
