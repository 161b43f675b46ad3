"""JSON system files and result documents.

Input and output share one format.  A system document has members ``n``,
``A``, ``C`` and optionally ``B``; each matrix may be written as a nested
array (vectors as flat arrays) or as a ``{"rows", "cols", "data"}`` object,
which is how results emit them.  A result document that embeds a
``"system"`` member can be fed straight back in as input.

Floats are printed with 17 significant digits so that every value survives
a parse/emit cycle bit for bit.
"""

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .realizations import System


def fmt_float(x):
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def matrix_doc(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m.reshape(1, -1)
    return {"rows": m.shape[0], "cols": m.shape[1], "data": _FloatRows(m)}


def poly_doc(p):
    return {"degree": p.degree, "coeffs": _Floats(p.coeffs)}


def system_doc(sys):
    doc = {"n": sys.n, "A": matrix_doc(sys.A)}
    if sys.B is not None:
        doc["B"] = matrix_doc(sys.B)
    doc["C"] = matrix_doc(sys.C)
    return doc


class _Floats(list):
    """List whose items are always emitted as floats, on one line."""


class _FloatRows(list):
    def __init__(self, m):
        super().__init__(_Floats(r) for r in np.asarray(m, dtype=np.float64))


def dumps(obj, indent=2):
    """Serialize ``obj`` as JSON with 17-significant-digit floats."""
    return _emit(obj, 0, indent) + "\n"


def _emit(obj, level, indent):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, _Floats):
        return "[" + ", ".join(fmt_float(v) for v in obj) + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, level + 1, indent)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_emit(v, level + 1, indent) for v in obj) + "]"
        items = [pad + _emit(v, level + 1, indent) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} is not allowed")


def loads(text):
    """Parse JSON text, reporting the line and column of syntax errors."""
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def digest(data):
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_matrix(value, field, shape):
    """Validate ``value`` against ``shape`` (rows, cols); vectors are accepted
    for single-row or single-column shapes."""
    rows, cols = shape
    if isinstance(value, dict):
        try:
            r, c, data = value["rows"], value["cols"], value["data"]
        except KeyError as exc:
            raise ValidationError(field, f"matrix object lacks {exc.args[0]!r}") from None
        if (r, c) != (rows, cols):
            raise ValidationError(field, f"declared {r}x{c}, expected {rows}x{cols}")
        value = data
    if not isinstance(value, list):
        raise ValidationError(field, "expected an array")
    if value and all(_is_number(v) for v in value) and (rows == 1 or cols == 1):
        if len(value) != rows * cols:
            raise ValidationError(field, f"has {len(value)} entries, expected {rows * cols}")
        return np.array(value, dtype=np.float64).reshape(rows, cols)
    if len(value) != rows:
        raise ValidationError(field, f"has {len(value)} rows, expected {rows}")
    for i, r in enumerate(value, start=1):
        if not isinstance(r, list) or len(r) != cols:
            got = len(r) if isinstance(r, list) else type(r).__name__
            raise ValidationError(field, f"row {i} has {got} entries, expected {cols}")
        for j, v in enumerate(r, start=1):
            if not _is_number(v):
                raise ValidationError(field, f"entry ({i},{j}) is not a number")
            if not math.isfinite(v):
                raise ValidationError(field, f"entry ({i},{j}) is not finite")
    return np.array(value, dtype=np.float64)


def system_from_doc(doc):
    if isinstance(doc, dict) and "system" in doc and "A" not in doc:
        return system_from_doc(doc["system"])
    if isinstance(doc, dict) and "payload" in doc and "A" not in doc:
        return system_from_doc(doc["payload"])
    if not isinstance(doc, dict):
        raise ValidationError("document", "expected an object")
    for key in ("n", "A", "C"):
        if key not in doc:
            raise ValidationError(key, "missing member")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError("n", f"must be a positive integer, got {n!r}")
    A = parse_matrix(doc["A"], "A", (n, n))
    C = parse_matrix(doc["C"], "C", (1, n))
    B = parse_matrix(doc["B"], "B", (n, 1)) if doc.get("B") is not None else None
    return System(A=A, C=C, B=B)


def parse_system(path):
    """Read and validate a system document from ``path``."""
    text = Path(path).read_text()
    return system_from_doc(loads(text))
