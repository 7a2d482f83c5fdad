"""Typed tensor fields on masked grids, closed-form sampling and pointwise algebra."""

from __future__ import annotations

import ast
import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _io
from .mesh import Domain, cell_locate

KINDS = ("scalar", "vector", "tensor20", "tensor02sym", "twopoint", "form", "curv4", "curv5")

CURV4_3D = ("2323", "3123", "1223", "1313", "2113", "1212")
CURV4_2D = ("1212",)
CURV5_3D = ("12323", "21313", "31212")


class ValenceError(ValueError):
    """Field valence does not fit the requested operation."""


class InterpolationError(ValueError):
    """A query point reads nodes where the field is undefined."""


def _combos(n: int, k: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(n), k))


@dataclass(frozen=True)
class Valence:
    """Tensor type of a field.

    ``value_dim`` is the number of value components for vector, two-point and
    form valences (``None`` means the domain dimension); ``degree`` is the form
    degree.
    """

    kind: str
    value_dim: int | None = None
    degree: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValenceError(f"unknown valence {self.kind!r}")
        if self.value_dim is not None and not 1 <= self.value_dim <= 9:
            raise ValenceError("value dimension must be between 1 and 9")
        if self.kind == "form" and self.degree < 0:
            raise ValenceError("form degree must be non-negative")

    # -- naming ------------------------------------------------------------
    def m(self, n: int) -> int:
        return n if self.value_dim is None else self.value_dim

    def names(self, n: int) -> tuple[str, ...]:
        k = self.kind
        if k == "scalar":
            return ("f",)
        if k == "vector":
            return tuple(str(i + 1) for i in range(self.m(n)))
        if k == "tensor20":
            return tuple(f"{i + 1}{j + 1}" for i in range(n) for j in range(n))
        if k == "twopoint":
            return tuple(f"{i + 1}{j + 1}" for i in range(self.m(n)) for j in range(n))
        if k == "tensor02sym":
            return tuple(f"{i + 1}{j + 1}" for i in range(n) for j in range(i, n))
        if k == "form":
            if self.degree > n:
                raise ValenceError(f"no {self.degree}-forms in dimension {n}")
            return tuple(f"{i + 1}|" + "".join(str(a + 1) for a in c)
                         for i in range(self.m(n)) for c in _combos(n, self.degree))
        if k == "curv4":
            return CURV4_3D if n == 3 else CURV4_2D
        if k == "curv5":
            if n != 3:
                raise ValenceError("curv5 fields exist only in 3D")
            return CURV5_3D
        raise ValenceError(k)

    def spec(self) -> str:
        if self.kind == "form":
            return f"form({self.degree},{self.value_dim if self.value_dim is not None else 'n'})"
        if self.kind in ("vector", "twopoint") and self.value_dim is not None:
            return f"{self.kind}({self.value_dim})"
        return self.kind

    def resolved(self, n: int) -> "Valence":
        """Same valence with the value dimension made explicit."""
        if self.kind in ("vector", "twopoint", "form"):
            return Valence(self.kind, self.m(n), self.degree)
        return self

    @classmethod
    def parse(cls, text: str) -> "Valence":
        text = text.strip()
        m = re.fullmatch(r"form\((\d+),\s*(\d+|n)\)", text)
        if m:
            vd = None if m.group(2) == "n" else int(m.group(2))
            return cls("form", vd, int(m.group(1)))
        m = re.fullmatch(r"(vector|twopoint)\((\d+)\)", text)
        if m:
            return cls(m.group(1), int(m.group(2)))
        if text in KINDS and text != "form":
            return cls(text)
        raise ValenceError(f"cannot parse valence {text!r}")

    def same_as(self, other: "Valence", n: int) -> bool:
        return self.resolved(n) == other.resolved(n)


SCALAR = Valence("scalar")
VECTOR = Valence("vector")
TENSOR20 = Valence("tensor20")
TENSOR02SYM = Valence("tensor02sym")
TWOPOINT = Valence("twopoint")
CURV4 = Valence("curv4")
CURV5 = Valence("curv5")


def form(degree: int, value_dim: int | None = None) -> Valence:
    return Valence("form", value_dim, degree)


def _sym_index(n: int) -> dict[tuple[int, int], int]:
    out = {}
    c = 0
    for i in range(n):
        for j in range(i, n):
            out[(i, j)] = out[(j, i)] = c
            c += 1
    return out


@dataclass(frozen=True, eq=False)
class TensorField:
    """Component array ``data[c, *grid]`` of a declared valence on a domain.

    ``valid`` marks nodes where the values are defined (the mask for sampled
    fields, an eroded interior for derivatives).  Elsewhere values are NaN.
    """

    domain: Domain
    valence: Valence
    data: np.ndarray
    valid: np.ndarray
    frame: str = field(default="")

    def __post_init__(self):
        n = self.domain.ndim
        val = self.valence.resolved(n)
        object.__setattr__(self, "valence", val)
        names = val.names(n)
        data = np.array(self.data, dtype=float)
        if data.shape != (len(names),) + self.domain.shape:
            raise ValenceError(f"{val.spec()} needs data of shape {(len(names),) + self.domain.shape}, got {data.shape}")
        valid = np.array(self.valid, dtype=bool) & self.domain.mask
        data[:, ~valid] = np.nan
        if __debug__ and not np.all(np.isfinite(data[:, valid])):
            raise AssertionError("non-finite values on nodes flagged valid")
        data.flags.writeable = False
        valid.flags.writeable = False
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "valid", valid)
        if not self.frame:
            object.__setattr__(self, "frame", self.domain.chart)
        elif self.frame != self.domain.chart:
            raise ValenceError(f"frame {self.frame!r} does not match domain chart {self.domain.chart!r}")

    # -- views ---------------------------------------------------------------
    @property
    def n(self) -> int:
        return self.domain.ndim

    @property
    def names(self) -> tuple[str, ...]:
        return self.valence.names(self.n)

    def components(self) -> dict[str, np.ndarray]:
        return {name: self.data[i] for i, name in enumerate(self.names)}

    def component(self, name: str) -> np.ndarray:
        try:
            return self.data[self.names.index(name)]
        except ValueError:
            raise KeyError(f"{self.valence.spec()} has no component {name!r}") from None

    def dense(self) -> np.ndarray:
        """Array with explicit tensor axes.

        vector (m,), tensor20 (n,n), twopoint (m,n), tensor02sym (n,n) symmetric,
        form(k,m) (m, C(n,k)) in combination order; scalar and curvature types stay flat.
        """
        n, g = self.n, self.domain.shape
        k = self.valence.kind
        if k in ("tensor20",):
            return self.data.reshape((n, n) + g)
        if k == "twopoint":
            return self.data.reshape((self.valence.m(n), n) + g)
        if k == "tensor02sym":
            idx = _sym_index(n)
            return np.stack([np.stack([self.data[idx[(i, j)]] for j in range(n)]) for i in range(n)])
        if k == "form":
            return self.data.reshape((self.valence.m(n), len(_combos(n, self.valence.degree))) + g)
        return self.data

    def max_abs(self) -> float:
        """Max-norm over valid nodes (0 when no node is valid)."""
        if not self.valid.any():
            return 0.0
        return float(np.max(np.abs(self.data[:, self.valid])))

    def with_data(self, data: np.ndarray, valid: np.ndarray | None = None) -> "TensorField":
        return TensorField(self.domain, self.valence, data, self.valid if valid is None else valid)

    def restrict(self, valid: np.ndarray) -> "TensorField":
        return TensorField(self.domain, self.valence, self.data, self.valid & valid)

    # -- arithmetic ------------------------------------------------------------
    def _check_same(self, other: "TensorField") -> None:
        if other.domain != self.domain or not other.valence.same_as(self.valence, self.n):
            raise ValenceError(f"cannot combine {self.valence.spec()} and {other.valence.spec()} fields")

    def __add__(self, other: "TensorField") -> "TensorField":
        self._check_same(other)
        return TensorField(self.domain, self.valence, self.data + other.data, self.valid & other.valid)

    def __sub__(self, other: "TensorField") -> "TensorField":
        self._check_same(other)
        return TensorField(self.domain, self.valence, self.data - other.data, self.valid & other.valid)

    def __neg__(self) -> "TensorField":
        return self.with_data(-self.data)

    def __mul__(self, c: float) -> "TensorField":
        return self.with_data(float(c) * self.data)

    __rmul__ = __mul__

    # -- serialization ---------------------------------------------------------
    def to_json(self) -> dict:
        comps = {}
        for i, name in enumerate(self.names):
            arr = self.data[i].ravel()
            comps[name] = [float(v) if ok else None for v, ok in zip(arr.tolist(), self.valid.ravel().tolist())]
        return {"format": "tfld-1", "domain": self.domain.to_json(), "valence": self.valence.spec(),
                "components": comps}

    @classmethod
    def from_json(cls, obj: dict) -> "TensorField":
        if obj.get("format") != "tfld-1":
            raise ValueError(f"not a tfld-1 document (format={obj.get('format')!r})")
        domain = Domain.from_json(obj["domain"])
        val = Valence.parse(obj["valence"])
        names = val.names(domain.ndim)
        comps = obj["components"]
        if set(comps) != set(names):
            raise ValenceError(f"components {sorted(comps)} do not match valence {val.spec()}")
        data = np.array([_io.nan_floats(comps[name]) for name in names]).reshape((len(names),) + domain.shape)
        valid = np.all(np.isfinite(data), axis=0) & domain.mask
        return cls(domain, val, data, valid)


def zeros(domain: Domain, valence: Valence, valid: np.ndarray | None = None) -> TensorField:
    n = domain.ndim
    data = np.zeros((len(valence.names(n)),) + domain.shape)
    return TensorField(domain, valence, data, domain.mask if valid is None else valid)


def from_dense(domain: Domain, valence: Valence, arr: np.ndarray, valid: np.ndarray) -> TensorField:
    """Inverse of :meth:`TensorField.dense`; symmetric parts are read from the upper triangle."""
    n = domain.ndim
    valence = valence.resolved(n)
    g = domain.shape
    if valence.kind == "tensor02sym":
        data = np.stack([arr[i, j] for i in range(n) for j in range(i, n)])
    else:
        data = np.asarray(arr).reshape((len(valence.names(n)),) + g)
    return TensorField(domain, valence, data, valid)


def save_field(f: TensorField, path) -> None:
    _io.atomic_write(path, _io.dumps(f.to_json()))


def load_field(path) -> TensorField:
    with open(path) as fh:
        return TensorField.from_json(_io.loads(fh.read()))


# ------------------------------------------------------------------ sampling
_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log, "sqrt": np.sqrt,
    "abs": np.abs, "atan2": np.arctan2, "arctan2": np.arctan2, "atan": np.arctan, "sinh": np.sinh,
    "cosh": np.cosh, "tanh": np.tanh,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_OPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def _compile(expr: str) -> Callable[[Mapping[str, np.ndarray]], np.ndarray]:
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if isinstance(node, (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Load) + _OPS):
            continue
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            continue
        if isinstance(node, ast.Name):
            continue
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
                and not node.keywords:
            continue
        raise ValueError(f"unsupported syntax in expression {expr!r}: {type(node).__name__}")
    code = compile(tree, "<field-expr>", "eval")

    def run(env: Mapping[str, np.ndarray]) -> np.ndarray:
        scope = dict(_FUNCS)
        scope.update(_CONSTS)
        scope.update(env)
        missing = [n.id for n in ast.walk(tree) if isinstance(n, ast.Name) and n.id not in scope]
        if missing:
            raise ValueError(f"unknown name(s) {missing} in expression {expr!r}")
        return eval(code, {"__builtins__": {}}, scope)

    return run


@dataclass(frozen=True)
class FieldExpr:
    """Closed-form field: one expression (string, callable or number) per component.

    String expressions use the chart coordinates ``X1, X2, X3`` (also ``x, y, z``;
    ``theta, phi`` on the spherical chart), ``r`` for the Euclidean norm of the
    coordinates, ``pi`` and the usual elementary functions.  Callables receive the
    coordinate arrays as positional arguments.
    """

    components: Mapping[str, str | float | Callable[..., np.ndarray]]

    def evaluate(self, name: str, coords: Sequence[np.ndarray], chart: str = "") -> np.ndarray:
        e = self.components[name]
        shape = coords[0].shape
        if callable(e):
            with np.errstate(all="ignore"):
                return np.broadcast_to(np.asarray(e(*coords), dtype=float), shape)
        if isinstance(e, (int, float)):
            return np.full(shape, float(e))
        env = {f"X{a + 1}": c for a, c in enumerate(coords)}
        env.update(dict(zip("xyz", coords)))
        env["r"] = np.sqrt(sum(c * c for c in coords))
        if chart == "spherical":
            env["theta"], env["phi"] = coords[0], coords[1]
        with np.errstate(all="ignore"):
            return np.broadcast_to(np.asarray(_compile(e)(env), dtype=float), shape)


def sample(expr: FieldExpr | Mapping, domain: Domain, valence: Valence) -> TensorField:
    """Evaluate a closed-form field at the masked-in nodes."""
    if not isinstance(expr, FieldExpr):
        expr = FieldExpr(dict(expr))
    names = valence.names(domain.ndim)
    if set(expr.components) != set(names):
        raise ValenceError(f"expression gives components {sorted(expr.components)}, "
                           f"valence {valence.spec()} needs {list(names)}")
    coords = domain.coords()
    data = np.stack([expr.evaluate(name, coords, domain.chart) for name in names])
    bad = ~np.all(np.isfinite(data[:, domain.mask]), axis=0)
    if bad.any():
        raise ValueError(f"expression is not finite at {int(bad.sum())} masked-in nodes")
    return TensorField(domain, valence, data, domain.mask)


def sample_function(domain: Domain, valence: Valence, fn: Callable[..., Sequence[np.ndarray]]) -> TensorField:
    """Sample ``fn(*coords)`` which returns one array per component in canonical order."""
    names = valence.names(domain.ndim)
    with np.errstate(all="ignore"):
        values = fn(*domain.coords())
    if len(values) != len(names):
        raise ValenceError(f"function returned {len(values)} components, valence needs {len(names)}")
    data = np.stack([np.broadcast_to(np.asarray(v, dtype=float), domain.shape) for v in values])
    return TensorField(domain, valence, data, domain.mask)


def random_polynomial(domain: Domain, valence: Valence, rng: np.random.Generator, degree: int = 3,
                      symmetric: bool = False) -> TensorField:
    """Seeded polynomial probe: each component a sum of all monomials up to ``degree``
    with coefficients uniform in [-1, 1].  ``symmetric`` symmetrizes tensor20 probes."""
    n = domain.ndim
    names = valence.names(n)
    coords = domain.coords()
    exps = [e for e in itertools.product(range(degree + 1), repeat=n) if sum(e) <= degree]
    monos = [np.prod([coords[a] ** e[a] for a in range(n)], axis=0) for e in exps]
    coef = rng.uniform(-1.0, 1.0, size=(len(names), len(exps)))
    data = np.einsum("cm,m...->c...", coef, np.stack(monos))
    f = TensorField(domain, valence, data, domain.mask)
    if symmetric:
        if valence.kind != "tensor20":
            raise ValenceError("only tensor20 probes can be symmetrized")
        f = symmetrize(f)
    return f


# ----------------------------------------------------------- pointwise algebra
def _require(f: TensorField, *kinds: str) -> None:
    if f.valence.kind not in kinds:
        raise ValenceError(f"expected valence in {kinds}, got {f.valence.spec()}")


def transpose(T: TensorField) -> TensorField:
    _require(T, "tensor20")
    D = T.dense()
    return from_dense(T.domain, T.valence, np.swapaxes(D, 0, 1), T.valid)


def symmetrize(T: TensorField) -> TensorField:
    _require(T, "tensor20")
    D = T.dense()
    return from_dense(T.domain, T.valence, 0.5 * (D + np.swapaxes(D, 0, 1)), T.valid)


def asymmetry(T: TensorField) -> float:
    """Max |T^IJ - T^JI| over valid nodes."""
    _require(T, "tensor20")
    return (T - transpose(T)).max_abs()


def traction(T: TensorField, N: Sequence[float]) -> TensorField:
    """Vector field N^I T^IJ for a constant unit vector N."""
    _require(T, "tensor20")
    N = np.asarray(N, dtype=float)
    if N.shape != (T.n,):
        raise ValenceError(f"normal must have {T.n} components")
    if abs(float(np.linalg.norm(N)) - 1.0) > 1e-12:
        raise ValueError("traction needs a unit normal (|N| = 1 within 1e-12)")
    D = T.dense()
    return TensorField(T.domain, VECTOR, np.einsum("i,ij...->j...", N, D), T.valid)


def contract(T: TensorField, Y: TensorField) -> TensorField:
    """Vector field T^IJ Y^J (rows of a tensor20 or two-point field against a vector field)."""
    _require(T, "tensor20", "twopoint")
    _require(Y, "vector")
    if Y.domain != T.domain or Y.valence.m(Y.n) != T.n:
        raise ValenceError("contraction needs a vector field over the second index space on the same domain")
    D = T.dense()
    out = np.einsum("ij...,j...->i...", D, Y.data)
    return TensorField(T.domain, Valence("vector", D.shape[0]), out, T.valid & Y.valid)


def interpolate(f: TensorField, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of every component at ``points``; shape (npoints, ncomp)."""
    dom = f.domain
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != dom.ndim:
        raise ValueError(f"points need {dom.ndim} coordinates")
    inside = dom.contains(pts, f.valid)
    if not inside.all():
        first = int(np.flatnonzero(~inside)[0])
        raise InterpolationError(f"{int((~inside).sum())} points leave the region where the field is defined "
                                 f"(first {pts[first].tolist()})")
    idx, frac = cell_locate(dom.grid, pts)
    out = np.zeros((len(pts), f.data.shape[0]))
    for corner in range(2 ** dom.ndim):
        w = np.ones(len(pts))
        sel = []
        for a in range(dom.ndim):
            bit = (corner >> a) & 1
            w *= frac[:, a] if bit else 1.0 - frac[:, a]
            sel.append(idx[:, a] + bit)
        vals = f.data[(slice(None),) + tuple(sel)].T
        out += np.where(w[:, None] > 0.0, w[:, None] * vals, 0.0)
    return out
