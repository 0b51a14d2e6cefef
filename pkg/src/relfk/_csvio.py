"""Columnar text output shared by the oracle and experiment layers.

One format everywhere: comma-separated, one header row, floats written
with ``repr`` so a rerun that produces the same numbers produces the
same bytes.  Writes go through a temporary file and an atomic rename.
"""

from __future__ import annotations

import hashlib
import os


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def write_csv(path, header, rows) -> tuple[int, str]:
    """Write rows atomically; returns ``(row_count, sha256_hex)``."""
    lines = [",".join(header)]
    count = 0
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
        count += 1
    blob = ("\n".join(lines) + "\n").encode("ascii")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)
    return count, hashlib.sha256(blob).hexdigest()
