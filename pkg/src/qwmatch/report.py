"""CSV/JSON emitters that keep rationals exact and floats round-trippable.

Rationals are written as "p/q" strings, floats with 17 significant digits
(always containing '.', 'e', 'inf' or 'nan' so they parse back as floats),
integers as integers and missing values as empty CSV cells / JSON null.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.17g}"
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def parse_value(s: str):
    """Inverse of :func:`format_value` for CSV cells."""
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    if "/" in s:
        return Fraction(s)
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _json_token(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return json.dumps(format_value(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else json.dumps(format_float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, Mapping):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_token(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_token(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps_json(obj) -> str:
    """JSON text; non-finite floats become the strings "inf"/"-inf"/"nan"."""
    return _json_token(obj)


def loads_json_value(v):
    """Decode one scalar emitted by :func:`dumps_json` back to its Python value."""
    if isinstance(v, str):
        if "/" in v:
            return Fraction(v)
        if v in ("inf", "-inf", "nan"):
            return float(v)
    return v


def rows_to_csv(rows: Sequence[Mapping], columns: Sequence[str] | None = None) -> str:
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(format_value(row.get(c)) for c in columns)
    return buf.getvalue()


def csv_to_rows(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    return [dict(zip(header, (parse_value(c) for c in rec))) for rec in reader]


def rows_to_json(rows: Iterable[Mapping]) -> str:
    return dumps_json(list(rows)) + "\n"
