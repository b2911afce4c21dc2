"""Adjacency-text and graph6 serialization."""

import re

import numpy as np

from .errors import InputShapeError, ParseError
from .graph import Graph, from_adjacency, n_slots

GRAPH6_MAX_N = 62

_ROW = re.compile(r"\[*([^\[\]]*)\]+")


def to_adjacency_text(g: Graph) -> str:
    """Bracketed 0/1 rows, e.g. ``[[0 1]\\n [1 0]]`` for K2."""
    a = g.adjacency()
    rows = ["[" + " ".join(str(int(x)) for x in row) + "]" for row in a]
    return "[" + "\n ".join(rows) + "]"


def from_adjacency_text(text: str) -> Graph:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty adjacency text")
    rows = []
    for lineno, line in enumerate(lines, start=1):
        mt = _ROW.fullmatch(line)
        if mt is None:
            raise ParseError(f"row {lineno}: not a bracketed row: {line!r}")
        tokens = mt.group(1).split()
        if any(t not in ("0", "1") for t in tokens):
            raise ParseError(f"row {lineno}: entries must be 0 or 1")
        rows.append([int(t) for t in tokens])
    n = len(rows)
    for i, row in enumerate(rows, start=1):
        if len(row) != n:
            raise ParseError(f"row {i}: has {len(row)} entries, expected {n}")
    a = np.array(rows, dtype=np.uint8)
    for i in range(n):
        if a[i, i]:
            raise ParseError(f"row {i + 1}: nonzero diagonal entry")
        bad = np.flatnonzero(a[i] != a[:, i])
        if bad.size:
            raise ParseError(f"row {i + 1}: asymmetric entry in column {bad[0] + 1}")
    return from_adjacency(a)


def _graph6_bits(g: Graph) -> list[int]:
    # graph6 packs the upper triangle column by column
    a = g.adjacency()
    return [int(a[i, j]) for j in range(1, g.n) for i in range(j)]


def to_graph6(g: Graph) -> str:
    if g.n > GRAPH6_MAX_N:
        raise InputShapeError(f"graph6 short form supports n <= {GRAPH6_MAX_N}")
    bits = _graph6_bits(g)
    bits += [0] * (-len(bits) % 6)
    out = [chr(g.n + 63)]
    for k in range(0, len(bits), 6):
        val = 0
        for b in bits[k:k + 6]:
            val = (val << 1) | b
        out.append(chr(val + 63))
    return "".join(out)


def from_graph6(text: str) -> Graph:
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    if not s:
        raise ParseError("empty graph6 string")
    codes = [ord(c) - 63 for c in s]
    for pos, c in enumerate(codes):
        if not 0 <= c <= 63:
            raise ParseError(f"byte {pos}: {s[pos]!r} is outside the graph6 range")
    n = codes[0]
    if n > GRAPH6_MAX_N:
        raise ParseError("byte 0: only the short form (n <= 62) is supported")
    if n == 0:
        raise ParseError("byte 0: graph has no vertices")
    need = (n_slots(n) + 5) // 6
    if len(codes) - 1 != need:
        raise ParseError(f"byte {len(codes)}: expected {need} data bytes for n={n}, got {len(codes) - 1}")
    bits = []
    for c in codes[1:]:
        bits.extend((c >> (5 - k)) & 1 for k in range(6))
    if any(bits[n_slots(n):]):
        raise ParseError(f"byte {len(codes) - 1}: nonzero padding bits")
    a = np.zeros((n, n), dtype=np.uint8)
    k = 0
    for j in range(1, n):
        for i in range(j):
            a[i, j] = a[j, i] = bits[k]
            k += 1
    return from_adjacency(a)


_MATRIX_LINE = re.compile(r"^\s*\[.*\d|\d.*\]\s*$")


def read_graph_text(text: str) -> Graph:
    """Parse adjacency text, a graph6 line, or a counterexample export block.

    Digits are not valid graph6 bytes, so any bracketed line containing a digit
    marks the input as adjacency text.
    """
    lines = text.splitlines()
    rows = [ln for ln in lines if _MATRIX_LINE.match(ln)]
    if rows:
        return from_adjacency_text("\n".join(rows))
    for line in lines:
        line = line.strip()
        if line.startswith("graph6:"):
            return from_graph6(line[len("graph6:"):])
    for line in lines:
        line = line.strip()
        if line and not line.startswith("#") and ":" not in line:
            return from_graph6(line)
    raise ParseError("no adjacency matrix or graph6 line found")
