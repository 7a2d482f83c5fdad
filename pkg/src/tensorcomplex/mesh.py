"""Structured-grid domains with inclusion masks, and closed integration chains."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import ndimage

from . import _io

CHARTS = ("cartesian2", "cartesian3", "spherical")
MASK_RULES = ("full", "annulus", "solid-torus", "spherical-shell", "box-minus-box", "bitmap")

# Pole-free band of the spherical chart (second coordinate is the polar angle).
PHI_MIN = 0.3
PHI_MAX = math.pi - 0.3


class DomainError(ValueError):
    """Raised for invalid grids, masks or charts."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform node grid: ``dims`` nodes per axis starting at ``origin``."""

    dims: tuple[int, ...]
    origin: tuple[float, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        origin = tuple(float(o) for o in self.origin)
        spacing = tuple(float(s) for s in self.spacing)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        if len(dims) not in (2, 3):
            raise DomainError(f"grid must have 2 or 3 axes, got {len(dims)}")
        if not (len(origin) == len(spacing) == len(dims)):
            raise DomainError("dims, origin and spacing must have the same length")
        if any(d < 4 for d in dims):
            raise DomainError(f"need at least 4 nodes per axis, got {dims}")
        if any(not (s > 0 and math.isfinite(s)) for s in spacing):
            raise DomainError(f"spacing must be positive, got {spacing}")
        if any(not math.isfinite(o) for o in origin):
            raise DomainError("origin must be finite")

    @classmethod
    def from_bounds(cls, dims: Sequence[int], lo: Sequence[float], hi: Sequence[float]) -> "GridSpec":
        """Grid with nodes on both ends of ``[lo, hi]`` along every axis."""
        spacing = [(b - a) / (d - 1) for d, a, b in zip(dims, lo, hi)]
        return cls(tuple(dims), tuple(lo), tuple(spacing))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def axis_coords(self, axis: int) -> np.ndarray:
        return self.origin[axis] + self.spacing[axis] * np.arange(self.dims[axis])

    def node_coords(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``dims``, one per axis (``ij`` indexing)."""
        axes = [self.axis_coords(a) for a in range(self.ndim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "origin": list(self.origin), "spacing": list(self.spacing)}

    @classmethod
    def from_json(cls, obj: dict) -> "GridSpec":
        return cls(tuple(obj["dims"]), tuple(obj["origin"]), tuple(obj["spacing"]))


def erode(valid: np.ndarray) -> np.ndarray:
    """Nodes whose central-difference stencil (all axis neighbours) lies in ``valid``."""
    out = valid.copy()
    for axis in range(valid.ndim):
        lo = [slice(None)] * valid.ndim
        hi = [slice(None)] * valid.ndim
        lo[axis] = slice(0, 1)
        hi[axis] = slice(-1, None)
        out[tuple(lo)] = False
        out[tuple(hi)] = False
        inner = [slice(None)] * valid.ndim
        inner[axis] = slice(1, -1)
        plus = [slice(None)] * valid.ndim
        plus[axis] = slice(2, None)
        minus = [slice(None)] * valid.ndim
        minus[axis] = slice(0, -2)
        out[tuple(inner)] &= valid[tuple(plus)] & valid[tuple(minus)]
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Domain:
    """A masked grid with a chart.

    ``mask`` is True on nodes that belong to the body.  ``radius`` is only used
    by the spherical chart.
    """

    grid: GridSpec
    mask: np.ndarray
    chart: str
    mask_rule: dict | None = None
    radius: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ndim(self) -> int:
        return self.grid.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.grid.dims

    @property
    def interior(self) -> np.ndarray:
        """Nodes where a first-order central stencil reads only masked-in nodes."""
        if "interior" not in self._cache:
            self._cache["interior"] = _frozen(erode(self.mask))
        return self._cache["interior"]

    @property
    def interior2(self) -> np.ndarray:
        """Second-ring interior, where composed second differences are defined."""
        if "interior2" not in self._cache:
            self._cache["interior2"] = _frozen(erode(self.interior))
        return self._cache["interior2"]

    def coords(self) -> tuple[np.ndarray, ...]:
        if "coords" not in self._cache:
            self._cache["coords"] = tuple(_frozen(c) for c in self.grid.node_coords())
        return self._cache["coords"]

    def node_position(self, index: Sequence[int]) -> np.ndarray:
        return np.array([self.grid.origin[a] + self.grid.spacing[a] * index[a] for a in range(self.ndim)])

    def contains(self, points: np.ndarray, valid: np.ndarray | None = None) -> np.ndarray:
        """True where every corner carrying interpolation weight lies in ``valid`` (default: mask)."""
        valid = self.mask if valid is None else valid
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx, frac = cell_locate(self.grid, pts)
        ok = np.all((idx >= 0) & (idx <= np.array(self.grid.dims) - 2), axis=1)
        idx = np.where(ok[:, None], idx, 0)
        inside = ok.copy()
        for corner in range(2 ** self.ndim):
            offs = [(corner >> a) & 1 for a in range(self.ndim)]
            sel = tuple(idx[:, a] + offs[a] for a in range(self.ndim))
            weight = np.ones(len(pts))
            for a in range(self.ndim):
                weight *= frac[:, a] if offs[a] else 1.0 - frac[:, a]
            inside &= valid[sel] | (weight == 0.0)
        return inside

    def key(self) -> str:
        """Content digest identifying the domain (grid, chart, radius and mask)."""
        if "key" not in self._cache:
            h = hashlib.sha256()
            h.update(repr((self.grid.dims, self.grid.origin, self.grid.spacing, self.chart, self.radius)).encode())
            h.update(np.packbits(self.mask.ravel()).tobytes())
            self._cache["key"] = h.hexdigest()
        return self._cache["key"]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Domain):
            return NotImplemented
        return self is other or self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    # serialization -------------------------------------------------------
    def to_json(self) -> dict:
        obj: dict[str, Any] = {"format": "tdom-1", "grid": self.grid.to_json(), "chart": self.chart}
        if self.chart == "spherical":
            obj["radius"] = self.radius
        if self.mask_rule is not None and self.mask_rule.get("name") != "bitmap":
            obj["mask_rule"] = dict(self.mask_rule)
        else:
            obj["bitmap"] = [int(v) for v in self.mask.ravel()]
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Domain":
        if obj.get("format") != "tdom-1":
            raise DomainError(f"not a tdom-1 document (format={obj.get('format')!r})")
        grid = GridSpec.from_json(obj["grid"])
        radius = float(obj.get("radius", 1.0))
        if "mask_rule" in obj:
            rule = obj["mask_rule"]
        elif "bitmap" in obj:
            bits = np.asarray(obj["bitmap"], dtype=bool)
            if bits.size != int(np.prod(grid.dims)):
                raise DomainError("bitmap length does not match grid")
            rule = {"name": "bitmap", "bitmap": bits.reshape(grid.dims)}
        else:
            raise DomainError("domain needs either mask_rule or bitmap")
        return build_domain(grid, rule, obj["chart"], radius=radius)


def cell_locate(grid: GridSpec, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower cell corner index and fractional offset in [0, 1] for each point."""
    pts = np.atleast_2d(points)
    origin = np.asarray(grid.origin)
    spacing = np.asarray(grid.spacing)
    s = (pts - origin) / spacing
    idx = np.floor(s).astype(np.int64)
    dims = np.asarray(grid.dims)
    # points on the upper face belong to the last cell
    on_top = (idx == dims - 1) & np.isclose(s, dims - 1, rtol=0, atol=1e-9)
    idx = np.where(on_top, dims - 2, idx)
    frac = s - idx
    # snap points that sit on a grid plane up to round-off
    frac = np.where(np.abs(frac) < 1e-9, 0.0, np.where(np.abs(frac - 1.0) < 1e-9, 1.0, frac))
    return idx, frac


# ---------------------------------------------------------------- mask rules
def _rule_mask(grid: GridSpec, rule: dict) -> np.ndarray:
    name = rule.get("name")
    X = grid.node_coords()
    n = grid.ndim
    center = np.asarray(rule.get("center", [0.0] * n), dtype=float)
    if center.shape != (n,):
        raise DomainError("mask rule center has the wrong dimension")
    Xc = [X[a] - center[a] for a in range(n)]
    if name == "full":
        return np.ones(grid.dims, dtype=bool)
    if name == "annulus":
        if n != 2:
            raise DomainError("annulus needs a 2D grid")
        r_in, r_out = float(rule["r_in"]), float(rule["r_out"])
        if not 0 <= r_in < r_out:
            raise DomainError("annulus needs 0 <= r_in < r_out")
        r = np.hypot(Xc[0], Xc[1])
        return (r >= r_in) & (r <= r_out)
    if name == "spherical-shell":
        if n != 3:
            raise DomainError("spherical-shell needs a 3D grid")
        r_in, r_out = float(rule["r_in"]), float(rule["r_out"])
        if not 0 <= r_in < r_out:
            raise DomainError("spherical-shell needs 0 <= r_in < r_out")
        r = np.sqrt(Xc[0] ** 2 + Xc[1] ** 2 + Xc[2] ** 2)
        return (r >= r_in) & (r <= r_out)
    if name == "solid-torus":
        if n != 3:
            raise DomainError("solid-torus needs a 3D grid")
        R, r = float(rule["R"]), float(rule["r"])
        if not 0 < r < R:
            raise DomainError("solid-torus needs 0 < r < R")
        rho = np.hypot(Xc[0], Xc[1])
        return (rho - R) ** 2 + Xc[2] ** 2 <= r * r
    if name == "box-minus-box":
        olo, ohi = np.asarray(rule["outer_lo"], float), np.asarray(rule["outer_hi"], float)
        ilo, ihi = np.asarray(rule["inner_lo"], float), np.asarray(rule["inner_hi"], float)
        for arr in (olo, ohi, ilo, ihi):
            if arr.shape != (n,):
                raise DomainError("box-minus-box bounds have the wrong dimension")
        if not (np.all(olo < ilo) and np.all(ilo < ihi) and np.all(ihi < ohi)):
            raise DomainError("box-minus-box needs the inner box strictly inside the outer box")
        inside_outer = np.ones(grid.dims, dtype=bool)
        inside_inner = np.ones(grid.dims, dtype=bool)
        for a in range(n):
            inside_outer &= (X[a] >= olo[a]) & (X[a] <= ohi[a])
            inside_inner &= (X[a] > ilo[a]) & (X[a] < ihi[a])
        return inside_outer & ~inside_inner
    if name == "bitmap":
        bits = np.asarray(rule["bitmap"], dtype=bool)
        if bits.shape != grid.dims:
            bits = bits.reshape(grid.dims)
        return bits.copy()
    raise DomainError(f"unknown mask rule {name!r}; expected one of {MASK_RULES}")


def build_domain(spec: GridSpec, mask_rule: dict | str | np.ndarray, chart: str, radius: float = 1.0) -> Domain:
    """Build a validated domain.

    ``mask_rule`` is a dict such as ``{"name": "annulus", "r_in": 0.5, "r_out": 1.8}``,
    the string ``"full"``, or a boolean array (explicit bitmap).
    """
    if isinstance(mask_rule, str):
        mask_rule = {"name": mask_rule}
    elif isinstance(mask_rule, np.ndarray):
        mask_rule = {"name": "bitmap", "bitmap": mask_rule}
    if chart not in CHARTS:
        raise DomainError(f"unknown chart {chart!r}; expected one of {CHARTS}")
    expected_dim = {"cartesian2": 2, "cartesian3": 3, "spherical": 2}[chart]
    if spec.ndim != expected_dim:
        raise DomainError(f"chart {chart} needs a {expected_dim}D grid")
    if chart == "spherical":
        if not radius > 0:
            raise DomainError("spherical chart needs a positive radius")
        if mask_rule["name"] not in ("full", "bitmap"):
            raise DomainError("spherical chart supports only full or bitmap masks")
        phi = spec.axis_coords(1)
        if phi[0] < PHI_MIN - 1e-12 or phi[-1] > PHI_MAX + 1e-12:
            raise DomainError(f"spherical chart needs phi within [{PHI_MIN}, pi-{PHI_MIN}]")
        theta = spec.axis_coords(0)
        if theta[-1] - theta[0] >= 2 * math.pi:
            raise DomainError("spherical chart needs a theta range shorter than 2*pi")

    mask = _rule_mask(spec, mask_rule)
    if not mask.any():
        raise DomainError("mask is empty")
    structure = ndimage.generate_binary_structure(spec.ndim, 1)
    _, ncomp = ndimage.label(mask, structure=structure)
    if ncomp != 1:
        raise DomainError(f"mask is disconnected ({ncomp} edge-connected components)")
    stored_rule = dict(mask_rule)
    if stored_rule["name"] == "bitmap":
        stored_rule = {"name": "bitmap"}
    dom = Domain(spec, _frozen(mask), chart, stored_rule, float(radius))
    interior = dom.interior
    for axis in range(spec.ndim):
        other = tuple(a for a in range(spec.ndim) if a != axis)
        count = int(np.count_nonzero(interior.any(axis=other)))
        if count < 4:
            raise DomainError(f"fewer than 4 interior-evaluable nodes along axis {axis + 1}")
    return dom


# ------------------------------------------------------------------- chains
@dataclass(frozen=True, eq=False)
class Chain1:
    """Closed polyline; the first vertex is repeated at the end."""

    vertices: np.ndarray
    id: str = "loop"
    closed: bool = True

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(np.asarray(self.vertices, dtype=float)))


@dataclass(frozen=True, eq=False)
class Chain2:
    """Closed oriented triangle mesh."""

    vertices: np.ndarray
    triangles: np.ndarray
    id: str = "surface"

    def __post_init__(self):
        object.__setattr__(self, "vertices", _frozen(np.asarray(self.vertices, dtype=float)))
        object.__setattr__(self, "triangles", _frozen(np.asarray(self.triangles, dtype=np.int64)))


def validate_chain(domain: Domain, chain: Chain1 | Chain2) -> list[str]:
    """List of violations; empty when the chain is usable on ``domain``."""
    problems: list[str] = []
    V = chain.vertices
    if V.ndim != 2 or V.shape[1] != domain.ndim:
        return [f"vertices must be points in {domain.ndim} coordinates"]
    if not np.all(np.isfinite(V)):
        problems.append("non-finite vertex coordinates")
        return problems
    outside = np.flatnonzero(~domain.contains(V))
    if outside.size:
        problems.append(f"{outside.size} vertices outside masked-in region (first index {int(outside[0])})")
    if isinstance(chain, Chain1):
        if len(V) < 4:
            problems.append("too few vertices for a closed loop")
        if not chain.closed or len(V) == 0 or not np.array_equal(V[0], V[-1]):
            problems.append("not closed")
        if len(V) > 1:
            seg = np.linalg.norm(np.diff(V, axis=0), axis=1)
            limit = 2 * max(domain.grid.spacing)
            long = np.flatnonzero(seg >= limit)
            if long.size:
                problems.append(f"{long.size} segments not shorter than 2*max spacing")
        return problems

    T = chain.triangles
    if T.ndim != 2 or T.shape[1] != 3 or len(T) == 0:
        return problems + ["triangles must be index triples"]
    if T.min() < 0 or T.max() >= len(V):
        return problems + ["triangle index out of range"]
    directed: dict[tuple[int, int], int] = {}
    for tri in T.tolist():
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            if a == b:
                problems.append(f"degenerate triangle {tri}")
                continue
            directed[(a, b)] = directed.get((a, b), 0) + 1
    reported = set()
    for (a, b), count in sorted(directed.items()):
        edge = (min(a, b), max(a, b))
        if edge in reported:
            continue
        fwd = directed.get((a, b), 0)
        back = directed.get((b, a), 0)
        if fwd == 1 and back == 1:
            continue
        reported.add(edge)
        if fwd + back == 1:
            problems.append(f"boundary edge {edge}")
        elif fwd + back == 2:
            problems.append(f"orientation mismatch on edge {edge}")
        else:
            problems.append(f"edge {edge} shared by {fwd + back} triangles")
    return problems


def signed_volume(surf: Chain2) -> float:
    """Volume enclosed by a closed triangle mesh; positive for outward orientation."""
    V = surf.vertices
    a, b, c = V[surf.triangles[:, 0]], V[surf.triangles[:, 1]], V[surf.triangles[:, 2]]
    return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)


def circle_loop(center: Sequence[float], radius: float, segments: int = 4096, id: str = "loop0",
                normal_axis: int | None = None) -> Chain1:
    """Counter-clockwise circle; in 3D it lies in the plane orthogonal to ``normal_axis`` (default 3rd axis)."""
    t = 2 * math.pi * np.arange(segments + 1) / segments
    c, s = np.cos(t), np.sin(t)
    c[-1], s[-1] = c[0], s[0]
    center = np.asarray(center, dtype=float)
    if center.size == 2:
        pts = np.stack([center[0] + radius * c, center[1] + radius * s], axis=1)
    else:
        axis = 2 if normal_axis is None else normal_axis
        plane = [a for a in range(3) if a != axis]
        pts = np.tile(center, (segments + 1, 1))
        pts[:, plane[0]] += radius * c
        pts[:, plane[1]] += radius * s
    return Chain1(pts, id=id)


def icosphere(center: Sequence[float], radius: float, subdivisions: int = 5, id: str = "surf0") -> Chain2:
    """Outward-oriented subdivided icosahedron projected onto a sphere (20*4**k triangles)."""
    p = (1 + math.sqrt(5)) / 2
    verts = [(-1, p, 0), (1, p, 0), (-1, -p, 0), (1, -p, 0), (0, -1, p), (0, 1, p),
             (0, -1, -p), (0, 1, -p), (p, 0, -1), (p, 0, 1), (-p, 0, -1), (-p, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    V = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def mid(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = V[i] + V[j]
                V.append(m / np.linalg.norm(m))
                cache[key] = len(V) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    pts = np.asarray(center, dtype=float) + radius * np.array(V)
    return Chain2(pts, np.array(faces), id=id)


def box_loop(lo: Sequence[float], hi: Sequence[float], step: float, id: str = "loop0") -> Chain1:
    """Counter-clockwise rectangle with edges split into pieces no longer than ``step``."""
    corners = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1]), (lo[0], lo[1])]
    pts = []
    for (x0, y0), (x1, y1) in zip(corners[:-1], corners[1:]):
        m = max(1, math.ceil(math.hypot(x1 - x0, y1 - y0) / step))
        t = np.arange(m) / m
        pts.append(np.stack([x0 + (x1 - x0) * t, y0 + (y1 - y0) * t], axis=1))
    pts.append(np.array([corners[0]], dtype=float))
    return Chain1(np.concatenate(pts), id=id)


def box_surface(lo: Sequence[float], hi: Sequence[float], step: float, id: str = "surf0") -> Chain2:
    """Outward-oriented triangulated surface of an axis-aligned box."""
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    m = [max(1, math.ceil((hi[a] - lo[a]) / step)) for a in range(3)]
    index: dict[tuple[int, int, int], int] = {}
    verts: list[np.ndarray] = []

    def vid(ijk: tuple[int, int, int]) -> int:
        if ijk not in index:
            index[ijk] = len(verts)
            verts.append(lo + (hi - lo) * np.array(ijk, float) / np.array(m, float))
        return index[ijk]

    tris = []
    for axis in range(3):
        u, v = [a for a in range(3) if a != axis]
        for side in (0, m[axis]):
            for i in range(m[u]):
                for j in range(m[v]):
                    quad = []
                    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        ijk = [0, 0, 0]
                        ijk[axis], ijk[u], ijk[v] = side, i + di, j + dj
                        quad.append(vid(tuple(ijk)))
                    a, b, c, d = quad
                    # e_u x e_v points along +e_axis unless axis is the middle one
                    outward = (axis != 1) == (side > 0)
                    if outward:
                        tris += [(a, b, c), (a, c, d)]
                    else:
                        tris += [(a, c, b), (a, d, c)]
    return Chain2(np.array(verts), np.array(tris), id=id)


def canonical_generators(domain: Domain, segments: int = 4096, subdivisions: int = 5
                         ) -> tuple[list[Chain1], list[Chain2]]:
    """Loops and closed surfaces generating first and second homology of a named domain."""
    rule = domain.mask_rule or {"name": "bitmap"}
    name = rule["name"]
    n = domain.ndim
    center = rule.get("center", [0.0] * n)
    if name == "bitmap":
        raise DomainError("generators must be supplied by the user")
    if name == "full":
        return [], []
    if name == "annulus":
        r = 0.5 * (float(rule["r_in"]) + float(rule["r_out"]))
        return [circle_loop(center, r, segments)], []
    if name == "solid-torus":
        return [circle_loop(center, float(rule["R"]), segments)], []
    if name == "spherical-shell":
        r = 0.5 * (float(rule["r_in"]) + float(rule["r_out"]))
        return [], [icosphere(center, r, subdivisions)]
    if name == "box-minus-box":
        lo = 0.5 * (np.asarray(rule["outer_lo"], float) + np.asarray(rule["inner_lo"], float))
        hi = 0.5 * (np.asarray(rule["outer_hi"], float) + np.asarray(rule["inner_hi"], float))
        step = min(domain.grid.spacing)
        if n == 2:
            return [box_loop(lo, hi, step)], []
        return [], [box_surface(lo, hi, step)]
    raise DomainError(f"no generators for mask rule {name!r}")


# --------------------------------------------------------------- chain files
def chains_to_json(loops: Sequence[Chain1], surfaces: Sequence[Chain2]) -> dict:
    return {
        "format": "tchn-1",
        "loops": [{"id": c.id, "vertices": c.vertices.tolist()} for c in loops],
        "surfaces": [{"id": s.id, "vertices": s.vertices.tolist(), "triangles": s.triangles.tolist()}
                     for s in surfaces],
    }


def chains_from_json(obj: dict) -> tuple[list[Chain1], list[Chain2]]:
    if obj.get("format") != "tchn-1":
        raise DomainError(f"not a tchn-1 document (format={obj.get('format')!r})")
    loops = [Chain1(np.array(c["vertices"], dtype=float), id=str(c["id"])) for c in obj.get("loops", [])]
    surfs = [Chain2(np.array(s["vertices"], dtype=float), np.array(s["triangles"], dtype=np.int64), id=str(s["id"]))
             for s in obj.get("surfaces", [])]
    return loops, surfs


def save_domain(domain: Domain, path) -> None:
    _io.atomic_write(path, _io.dumps(domain.to_json()))


def load_domain(path) -> Domain:
    with open(path) as fh:
        return Domain.from_json(_io.loads(fh.read()))
