"""Command-line interface.

Exit codes: 0 success or compatible, 2 incompatible (or a failed identity check),
3 inconclusive, 1 usage or I/O error (with a JSON error object on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__, _io, catalog, cohomology, compat, potentials, verify
from .fields import FieldExpr, TensorField, Valence, load_field, random_polynomial, sample, save_field
from .mesh import (GridSpec, build_domain, canonical_generators, chains_from_json, chains_to_json, load_domain,
                   save_domain)

EXIT_OK, EXIT_ERROR, EXIT_INCOMPATIBLE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
VERDICT_EXIT = {"compatible": EXIT_OK, "incompatible": EXIT_INCOMPATIBLE, "inconclusive": EXIT_INCONCLUSIVE}


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route usage errors through the JSON error path
        raise CliError(f"usage: {message}")


def threads() -> int:
    """Thread cap from TC_THREADS (computations are single-threaded; the value is validated and reported)."""
    raw = os.environ.get("TC_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise CliError(f"TC_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise CliError(f"TC_THREADS must be a positive integer, got {raw!r}")
    return value


def _digests(paths) -> dict:
    return {str(p): _io.sha256_file(p) for p in paths if p is not None}


def _envelope(command: str, inputs, **payload) -> dict:
    out = {"tool": "tensorcomplex", "version": __version__, "command": command,
           "input_digests": _digests(inputs), "threads": threads()}
    out.update(payload)
    return out


def _emit(obj: dict, out: str | None) -> None:
    text = _io.dumps(obj, indent=2) + "\n"
    if out:
        _io.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _csv_list(text: str, cast=float) -> list:
    return [cast(v) for v in text.split(",") if v.strip() != ""]


def _params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise CliError(f"mask parameter {item!r} is not key=value")
        key, value = item.split("=", 1)
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


# ---------------------------------------------------------------- commands
def cmd_domain_build(a) -> int:
    n = len(a.dims)
    lo, hi = _csv_list(a.lo), _csv_list(a.hi)
    if len(lo) != n or len(hi) != n:
        raise CliError("--lo and --hi need one value per axis")
    spec = GridSpec.from_bounds(a.dims, lo, hi)
    if a.mask == "bitmap":
        if not a.bitmap:
            raise CliError("bitmap masks need --bitmap file.npy")
        rule = np.load(a.bitmap).astype(bool)
    else:
        rule = {"name": a.mask, **_params(a.param)}
    dom = build_domain(spec, rule, a.chart, radius=a.radius)
    save_domain(dom, a.out)
    if a.generators:
        loops, surfs = canonical_generators(dom, segments=a.segments, subdivisions=a.subdivisions)
        _io.atomic_write(a.generators, _io.dumps(chains_to_json(loops, surfs)))
    return EXIT_OK


def cmd_field_sample(a) -> int:
    dom = load_domain(a.domain)
    if a.catalog:
        name = a.catalog
        if name == "vortex":
            f = catalog.vortex_rows(dom)
        elif name == "inverse-square":
            f = catalog.inverse_square_rows(dom)
        elif name.startswith("embedding:"):
            f = catalog.embedding(name.split(":", 1)[1], dom)
        else:
            raise CliError(f"unknown catalog field {name!r}")
    else:
        if not a.valence:
            raise CliError("--valence is required unless --catalog is given")
        val = Valence.parse(a.valence)
        if a.random_degree is not None:
            rng = np.random.default_rng(a.seed)
            f = random_polynomial(dom, val, rng, degree=a.random_degree, symmetric=a.symmetric)
        else:
            comps = {}
            for item in a.expr or []:
                if "=" not in item:
                    raise CliError(f"--expr {item!r} is not NAME=EXPRESSION")
                key, value = item.split("=", 1)
                comps[key.strip()] = value
            f = sample(FieldExpr(comps), dom, val)
    save_field(f, a.out)
    return EXIT_OK


def cmd_verify_complex(a) -> int:
    dom = load_domain(a.domain) if a.domain else None
    res = verify.verify_complex(a.complex, dom, probes=a.probes, seed=a.seed)
    _emit(_envelope("verify-complex", [a.domain], **res), a.out)
    return EXIT_OK if res["pass"] else EXIT_INCOMPATIBLE


def _load_chains(path):
    if not path:
        return None, None
    with open(path) as fh:
        return chains_from_json(_io.loads(fh.read()))


def _check_domain(field: TensorField, domain_path: str | None) -> None:
    if domain_path:
        dom = load_domain(domain_path)
        if dom != field.domain:
            raise CliError("field was sampled on a different domain than --domain")


def cmd_compat_check(a) -> int:
    f = load_field(a.field)
    _check_domain(f, a.domain)
    field = f
    if a.kind == "shell":
        if not a.field2:
            raise CliError("the shell check needs --field2 with the extrinsic tensor")
        field = (f, load_field(a.field2))
    loops, surfs = _load_chains(a.chains)
    kind = compat.KINDS.get(a.kind)
    if kind is not None and kind.chains == "loops" and loops is not None and surfs is not None:
        surfs = None
    if kind is not None and kind.chains == "surfaces" and loops is not None:
        loops = None
    rep = compat.check(a.kind, field, loops=loops, surfaces=surfs, tol_local=a.tol_local,
                       tol_period=a.tol_period, khat=a.khat, surface_rule=a.surface_rule)
    payload = rep.to_json()
    _emit(_envelope("compat check", [a.field, a.field2, a.domain, a.chains], report=payload), a.out)
    return VERDICT_EXIT[rep.verdict]


def cmd_potential(a) -> int:
    f = load_field(a.field)
    base = tuple(_csv_list(a.base, int)) if a.base else None
    if a.kind in ("grad", "Grad", "surfGrad", "displacement"):
        out = potentials.reconstruct_grad(f, base, kind=a.kind)
    elif a.kind == "s":
        out = potentials.reconstruct_s(f, base)
    elif a.kind == "curlT":
        center = _csv_list(a.star_center) if a.star_center else None
        out = potentials.reconstruct_curlT(f, center, panels=a.panels)
    else:
        raise CliError(f"unknown potential kind {a.kind!r}")
    save_field(out, a.out)
    return EXIT_OK


def cmd_cohomology(a) -> int:
    dom = load_domain(a.domain)
    b = cohomology.betti(dom)
    dims = cohomology.complex_dims(a.complex, b, dom.ndim)
    res = _envelope("cohomology", [a.domain], complex=a.complex, betti=list(b[:dom.ndim]),
                    rank_method=cohomology.RANK_METHOD, **dims)
    _emit(res, a.out)
    return EXIT_OK


def _rows_for(report: dict) -> tuple[list[str], list[list]]:
    if "report" in report:  # compat check
        rep = report["report"]
        header = ["check", "chain", "component", "value", "tol", "verdict"]
        rows = [[rep["check"], "local", "linf", rep["local_residual_linf"], rep["tol_local"], rep["verdict"]]]
        for p in rep["periods"]:
            for i, v in enumerate(p["values"]):
                rows.append([rep["check"], p["chain"], i, v, rep["tol_period"], rep["verdict"]])
        return header, rows
    if "compositions" in report:  # verify-complex
        header = ["complex", "kind", "part", "item", "probe", "residual"]
        rows = [[report["complex"], "composition", c["part"], f"{c['first']}>{c['second']}", c["probe"],
                 c["residual"]] for c in report["compositions"]]
        rows += [[report["complex"], "diagram", d["part"], f"{d['square']}:{d['op_tensor']}/{d['op_form']}",
                  d["probe"], d["residual"]] for d in report["diagrams"]]
        return header, rows
    if "betti" in report:
        header = ["complex", "group", "dimension"]
        rows = [[report["complex"], k, v] for k, v in report.items() if k.startswith("H")]
        return header, rows
    raise CliError("unrecognized report layout")


def cmd_report_render(a) -> int:
    with open(a.report) as fh:
        report = _io.loads(fh.read())
    header, rows = _rows_for(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    if a.out:
        _io.atomic_write(a.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ----------------------------------------------------------------- parser
def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tensorcomplex", description="Discrete tensor complexes: identities, compatibility, potentials")
    p.add_argument("--version", action="version", version=f"tensorcomplex {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    dom = sub.add_parser("domain").add_subparsers(dest="action", parser_class=_Parser)
    b = dom.add_parser("build", help="build and validate a domain")
    b.add_argument("--dims", type=int, nargs="+", required=True)
    b.add_argument("--lo", required=True, help="comma-separated lower corner")
    b.add_argument("--hi", required=True, help="comma-separated upper corner")
    b.add_argument("--chart", required=True, choices=["cartesian2", "cartesian3", "spherical"])
    b.add_argument("--mask", default="full")
    b.add_argument("--param", action="append", help="mask parameter key=value (JSON value)")
    b.add_argument("--bitmap", help=".npy boolean array for bitmap masks")
    b.add_argument("--radius", type=float, default=1.0)
    b.add_argument("--generators", help="also write canonical generators to this tchn-1 file")
    b.add_argument("--segments", type=int, default=4096)
    b.add_argument("--subdivisions", type=int, default=5)
    b.add_argument("--out", required=True)
    b.set_defaults(fn=cmd_domain_build)

    fld = sub.add_parser("field").add_subparsers(dest="action", parser_class=_Parser)
    s = fld.add_parser("sample", help="sample a field on a domain")
    s.add_argument("--domain", required=True)
    s.add_argument("--valence")
    s.add_argument("--expr", action="append", help="component=expression, e.g. 11='x*y'")
    s.add_argument("--catalog", help="vortex | inverse-square | embedding:<name>")
    s.add_argument("--random-degree", type=int)
    s.add_argument("--symmetric", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(fn=cmd_field_sample)

    v = sub.add_parser("verify-complex", help="composition and diagram residuals of a complex")
    v.add_argument("--complex", required=True, choices=sorted(verify.COMPLEXES))
    v.add_argument("--domain")
    v.add_argument("--probes", type=int, default=5)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--out")
    v.set_defaults(fn=cmd_verify_complex)

    cp = sub.add_parser("compat").add_subparsers(dest="action", parser_class=_Parser)
    c = cp.add_parser("check", help="compatibility verdict for a field")
    c.add_argument("--kind", required=True, choices=sorted(compat.KINDS))
    c.add_argument("--field", required=True)
    c.add_argument("--field2", help="second input (extrinsic tensor for the shell check)")
    c.add_argument("--domain")
    c.add_argument("--chains")
    c.add_argument("--tol-local", type=float, default=compat.DEFAULT_TOL)
    c.add_argument("--tol-period", type=float, default=compat.DEFAULT_TOL)
    c.add_argument("--khat", type=float, default=0.0)
    c.add_argument("--surface-rule", default="centroid", choices=["centroid", "edge"])
    c.add_argument("--out")
    c.set_defaults(fn=cmd_compat_check)

    pt = sub.add_parser("potential").add_subparsers(dest="action", parser_class=_Parser)
    r = pt.add_parser("reconstruct", help="reconstruct a potential")
    r.add_argument("--kind", required=True, choices=["grad", "Grad", "surfGrad", "displacement", "curlT", "s"])
    r.add_argument("--field", required=True)
    r.add_argument("--base", help="base node indices i,j(,k)")
    r.add_argument("--star-center", help="star centre x,y,z for curlT")
    r.add_argument("--panels", type=int, default=64)
    r.add_argument("--out", required=True)
    r.set_defaults(fn=cmd_potential)

    h = sub.add_parser("cohomology", help="Betti numbers and cohomology dimensions")
    h.add_argument("--domain", required=True)
    h.add_argument("--complex", required=True, choices=list(cohomology.COMPLEXES))
    h.add_argument("--out")
    h.set_defaults(fn=cmd_cohomology)

    rp = sub.add_parser("report").add_subparsers(dest="action", parser_class=_Parser)
    rr = rp.add_parser("render", help="CSV table from a JSON report")
    rr.add_argument("--report", required=True)
    rr.add_argument("--out")
    rr.set_defaults(fn=cmd_report_render)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        threads()
        if not hasattr(args, "fn"):
            raise CliError("usage: missing subcommand")
        return args.fn(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # every tooling failure becomes exit 1 with a JSON error
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err) + "\n")
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
