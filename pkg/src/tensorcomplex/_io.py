"""JSON helpers shared by the file formats: 17-digit reals, atomic writes, digests."""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import tempfile
from pathlib import Path
from typing import Any

_MARK = "\x00f:"
_MARK_RE = re.compile(r'"\\u0000f:([^"]*)"')


def _encode(obj: Any) -> Any:
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return None
        return _MARK + format(obj, ".17g")
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    # numpy scalars and arrays
    if hasattr(obj, "tolist"):
        return _encode(obj.tolist())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int | None = None) -> str:
    """Serialize with every float written as 17 significant digits; non-finite become null."""
    text = json.dumps(_encode(obj), indent=indent, sort_keys=False)
    return _MARK_RE.sub(lambda m: m.group(1), text)


def loads(text: str) -> Any:
    return json.loads(text)


def nan_floats(values) -> list[float]:
    """Read a JSON list where null stands for a masked-out value."""
    return [math.nan if v is None else float(v) for v in values]


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write via a temporary file in the target directory, then rename over the target."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_file(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()
