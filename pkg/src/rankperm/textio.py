"""Plain-text matrix files.

Format: the first line holds n, then n lines of n whitespace-separated
entries.  An entry is a nonnegative integer, a rational ``p/q`` or a decimal
literal.  Any ``p/q`` entry makes the file exact; any decimal entry makes it
float; a file mixing the two is rejected.  Integer-only files are exact.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from pathlib import Path

from .errors import MatrixParseError
from .matrix import EXACT, FLOAT, Matrix

_INT = re.compile(r"^\d+$")
_RATIONAL = re.compile(r"^(\d+)/(\d+)$")


def _classify(token: str, where: str):
    if _INT.match(token):
        return "int", Fraction(int(token))
    m = _RATIONAL.match(token)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        if q == 0:
            raise MatrixParseError(f"{where}: zero denominator in {token!r}")
        return "rational", Fraction(p, q)
    try:
        x = float(token)
    except ValueError:
        raise MatrixParseError(f"{where}: cannot parse entry {token!r}") from None
    if not math.isfinite(x) or x < 0:
        raise MatrixParseError(f"{where}: entry {token!r} must be finite and nonnegative")
    return "decimal", x


def parse_matrix(text: str) -> Matrix:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise MatrixParseError("empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise MatrixParseError(f"first line must be the dimension, got {lines[0]!r}") from None
    if n < 1:
        raise MatrixParseError(f"dimension must be positive, got {n}")
    body = lines[1:]
    if len(body) != n:
        raise MatrixParseError(f"expected {n} rows, found {len(body)}")
    kinds = set()
    rows = []
    for i, line in enumerate(body, start=1):
        tokens = line.split()
        if len(tokens) != n:
            raise MatrixParseError(f"row {i}: expected {n} entries, found {len(tokens)}")
        row = []
        for j, tok in enumerate(tokens, start=1):
            kind, value = _classify(tok, f"row {i}, column {j}")
            kinds.add(kind)
            row.append(value)
        rows.append(row)
    if {"rational", "decimal"} <= kinds:
        raise MatrixParseError("file mixes rational p/q and decimal entries")
    if "decimal" in kinds:
        return Matrix([[float(x) for x in row] for row in rows], FLOAT)
    return Matrix(rows, EXACT)


def read_matrix(path) -> Matrix:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MatrixParseError(f"cannot read {path}: {exc}") from None
    return parse_matrix(text)


def format_entry(x, mode: str) -> str:
    if mode == EXACT:
        return str(x)
    return repr(float(x))


def format_matrix(A: Matrix) -> str:
    lines = [str(A.n)]
    for row in A.tolist():
        lines.append(" ".join(format_entry(x, A.mode) for x in row))
    return "\n".join(lines) + "\n"


def write_matrix(A: Matrix, path) -> None:
    Path(path).write_text(format_matrix(A), encoding="utf-8")
