"""Edge-list files for graph sequences.

Format::

    n=4
    1 3
    2 3

    1 2
    ...

A header ``n=<int>``, then one ``p q`` link per line with 1-based labels.
Blank lines separate graphs (rounds).  Self-loops are implicit.  Lines
starting with ``#`` are comments.
"""
from __future__ import annotations

from typing import Iterable

from .digraph import CommGraph


class ParseError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def parse_edge_list(text: str) -> tuple[int, list[CommGraph]]:
    n = None
    graphs: list[CommGraph] = []
    current: list[tuple[int, int]] | None = None

    def flush():
        nonlocal current
        if current is not None:
            graphs.append(CommGraph.from_edges(n, current))
        current = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if n is None:
            if not line:
                continue
            key, sep, val = line.partition("=")
            if key.strip() != "n" or not sep:
                raise ParseError(f"expected header 'n=<int>', got {raw!r}", lineno)
            try:
                n = int(val)
            except ValueError:
                raise ParseError(f"bad process count {val.strip()!r}", lineno) from None
            if n < 1:
                raise ParseError(f"process count must be >= 1, got {n}", lineno)
            continue
        if not line:
            if not raw.lstrip().startswith("#"):
                flush()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected 'p q', got {raw!r}", lineno)
        try:
            p, q = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer label in {raw!r}", lineno) from None
        if not (1 <= p <= n and 1 <= q <= n):
            raise ParseError(f"label outside 1..{n} in {raw!r}", lineno)
        if current is None:
            current = []
        current.append((p - 1, q - 1))
    if n is None:
        raise ParseError("missing header 'n=<int>'")
    flush()
    return n, graphs


def read_edge_list(path) -> tuple[int, list[CommGraph]]:
    with open(path) as fh:
        return parse_edge_list(fh.read())


def format_edge_list(graphs: Iterable[CommGraph]) -> str:
    """Inverse of :func:`parse_edge_list`; self-loops are omitted.

    A graph with self-loops only is written as the explicit loop ``1 1`` so
    that it still occupies a record.
    """
    graphs = list(graphs)
    if not graphs:
        raise ValueError("no graphs to write")
    out = [f"n={graphs[0].n}"]
    for i, g in enumerate(graphs):
        if i:
            out.append("")
        edges = [(p, q) for p, q in g.sorted_edges() if p != q]
        if not edges:
            out.append("1 1")
        out += [f"{p + 1} {q + 1}" for p, q in edges]
    return "\n".join(out) + "\n"
