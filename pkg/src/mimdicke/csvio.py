"""Byte-stable CSV emission shared by the table-producing modules.

All floating-point fields are written with 17 significant digits so that a
round-trip through the file reproduces the double exactly and reruns are
byte-identical.
"""

from __future__ import annotations

import io
from typing import Iterable, Sequence


def format_float(x: float) -> str:
    return "%.17g" % float(x)


def format_row(values: Sequence) -> str:
    parts = []
    for v in values:
        if isinstance(v, str):
            parts.append(v)
        else:
            parts.append(format_float(v))
    return ",".join(parts)


def render_csv(header: str, rows: Iterable[Sequence]) -> str:
    """Render a complete CSV document (trailing newline included)."""
    buf = io.StringIO()
    buf.write(header)
    buf.write("\n")
    for row in rows:
        buf.write(format_row(row))
        buf.write("\n")
    return buf.getvalue()
