"""Canonical byte-stable serialization.

Every structure that enters the ledger's digest chain is serialized
through here: fixed key order (the insertion order of the dict that
built it), floats rendered with 17 significant digits so round-tripping
through text is lossless, no whitespace. Equal values always serialize
to identical bytes.
"""

from __future__ import annotations

import json
import math


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (round-trip exact)."""
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"non-finite value not serializable: {x}")
    return format(float(x), ".17g")


def _render(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            if not isinstance(k, str):
                raise TypeError(f"canonical keys must be str, got {type(k)}")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(":")
            _render(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _render(v, out)
        out.append("]")
    else:
        raise TypeError(f"not canonically serializable: {type(obj)}")


def dumps(obj) -> bytes:
    """Serialize to canonical bytes. Key order is preserved, not sorted."""
    out: list = []
    _render(obj, out)
    return "".join(out).encode("utf-8")


def loads(data: bytes):
    return json.loads(data.decode("utf-8"))
