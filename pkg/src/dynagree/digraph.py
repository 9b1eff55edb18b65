"""Directed communication graphs and the rootedness / nonsplit predicates.

Processes are numbered ``0 .. n-1`` in the Python API.  Text formats (DOT,
edge lists) use the conventional labels ``1 .. n``.

A link ``p -> q`` means that ``q`` receives the message sent by ``p``; the
adjacency matrix stores it as ``adj[p, q] = True``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import BudgetError, DomainError

DEFAULT_PRODUCT_BUDGET = 10**6


class Digraph:
    """Immutable directed graph on ``n`` processes.

    Self-loops are optional here; :class:`CommGraph` requires them.
    """

    __slots__ = ("_adj", "_hash")

    def __init__(self, adj):
        a = np.array(adj, dtype=bool, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DomainError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        a.setflags(write=False)
        self._adj = a
        self._hash = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise DomainError(f"n must be >= 1, got {n}")
        a = np.zeros((n, n), dtype=bool)
        for p, q in edges:
            if not (0 <= p < n and 0 <= q < n):
                raise DomainError(f"edge ({p}, {q}) has an endpoint outside 0..{n - 1}")
            a[p, q] = True
        return cls(a)

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def adj(self) -> np.ndarray:
        return self._adj

    @property
    def edges(self) -> frozenset:
        return frozenset(zip(*map(lambda v: v.tolist(), np.nonzero(self._adj))))

    def sorted_edges(self) -> list[tuple[int, int]]:
        ps, qs = np.nonzero(self._adj)
        return list(zip(ps.tolist(), qs.tolist()))

    def has_edge(self, p: int, q: int) -> bool:
        return bool(self._adj[p, q])

    def _check(self, p):
        if not 0 <= p < self.n:
            raise DomainError(f"process {p} outside 0..{self.n - 1}")

    def in_neighbors(self, p: int) -> frozenset:
        self._check(p)
        return frozenset(np.flatnonzero(self._adj[:, p]).tolist())

    def out_neighbors(self, p: int) -> frozenset:
        self._check(p)
        return frozenset(np.flatnonzero(self._adj[p]).tolist())

    def in_degrees(self) -> np.ndarray:
        return self._adj.sum(axis=0)

    def has_self_loops(self) -> bool:
        return bool(self._adj.diagonal().all())

    def __eq__(self, other):
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.n == other.n and bool((self._adj == other._adj).all())

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, np.packbits(self._adj).tobytes()))
        return self._hash

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, edges={self.sorted_edges()})"


GeneralizedGraph = Digraph


class CommGraph(Digraph):
    """Communication graph: a digraph with a self-loop at every process."""

    __slots__ = ()

    def __init__(self, adj):
        super().__init__(adj)
        if not self._adj.diagonal().all():
            missing = np.flatnonzero(~self._adj.diagonal()).tolist()
            raise DomainError(f"communication graph lacks self-loops at {missing}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]):
        """Build a communication graph; self-loops are added implicitly."""
        edges = list(edges)
        return super().from_edges(n, itertools.chain(edges, ((p, p) for p in range(n))))


def as_comm_graph(g: Digraph) -> CommGraph:
    return g if isinstance(g, CommGraph) else CommGraph(g.adj)


# -- constructors -----------------------------------------------------------

def complete(n: int) -> CommGraph:
    return CommGraph(np.ones((n, n), dtype=bool))


def identity(n: int) -> CommGraph:
    """Self-loops only."""
    return CommGraph(np.eye(n, dtype=bool))


def star(n: int, center: int = 0) -> CommGraph:
    return CommGraph.from_edges(n, ((center, q) for q in range(n)))


def chain(n: int) -> CommGraph:
    """Path ``0 -> 1 -> ... -> n-1`` with self-loops."""
    return CommGraph.from_edges(n, ((p, p + 1) for p in range(n - 1)))


def all_comm_graphs(n: int) -> Iterator[CommGraph]:
    """Every communication graph on ``n`` processes, ``2**(n*(n-1))`` of them."""
    off = [(p, q) for p in range(n) for q in range(n) if p != q]
    m = len(off)
    if m > 20:
        raise BudgetError(f"refusing to enumerate 2**{m} graphs")
    rows = np.array([p for p, _ in off], dtype=int)
    cols = np.array([q for _, q in off], dtype=int)
    for mask in range(1 << m):
        a = np.eye(n, dtype=bool)
        bits = (mask >> np.arange(m)) & 1
        a[rows, cols] = bits.astype(bool)
        yield CommGraph(a)


# -- products -----------------------------------------------------------------

def product(g: Digraph, h: Digraph) -> Digraph:
    """``g ∘ h``: link ``p -> q`` iff ``p -> r`` in ``g`` and ``r -> q`` in ``h``."""
    if g.n != h.n:
        raise DomainError(f"size mismatch: {g.n} vs {h.n}")
    a = (g.adj.astype(np.int64) @ h.adj.astype(np.int64)) > 0
    if isinstance(g, CommGraph) and isinstance(h, CommGraph):
        return CommGraph(a)
    return Digraph(a)


def compose(graphs: Sequence[Digraph]) -> Digraph:
    """Time-ordered product ``G(1) ∘ G(2) ∘ ... ∘ G(B)``.

    ``p -> q`` is a link of the result iff a message can travel from ``p``
    to ``q`` along the rounds in order, one hop (or a self-loop) per round.
    """
    if not graphs:
        raise DomainError("compose needs at least one graph")
    out = graphs[0]
    for g in graphs[1:]:
        out = product(out, g)
    return out


# -- strongly connected components -----------------------------------------

@dataclass(frozen=True)
class Condensation:
    """DAG of strongly connected components.

    Component ids are ordered by the smallest process they contain.
    """

    scc_of: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    dag_edges: frozenset

    @property
    def size(self) -> int:
        return len(self.components)

    def sources(self) -> list[int]:
        has_in = {b for _, b in self.dag_edges}
        return [c for c in range(self.size) if c not in has_in]


def _tarjan(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[v]).tolist() for v in range(n)]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def condensation(g: Digraph) -> Condensation:
    comps = sorted(_tarjan(g.adj), key=lambda c: c[0])
    scc_of = [0] * g.n
    for cid, comp in enumerate(comps):
        for v in comp:
            scc_of[v] = cid
    ps, qs = np.nonzero(g.adj)
    dag = {(scc_of[p], scc_of[q]) for p, q in zip(ps.tolist(), qs.tolist()) if scc_of[p] != scc_of[q]}
    return Condensation(tuple(scc_of), tuple(tuple(c) for c in comps), frozenset(dag))


def is_strongly_connected(g: Digraph) -> bool:
    return condensation(g).size == 1


def roots(g: Digraph) -> frozenset:
    """Processes from which every process is reachable."""
    c = condensation(g)
    src = c.sources()
    if len(src) != 1:
        return frozenset()
    return frozenset(c.components[src[0]])


def is_rooted(g: Digraph) -> bool:
    return len(condensation(g).sources()) == 1


def is_nonsplit(g: Digraph) -> bool:
    """Every pair of processes has a common in-neighbor."""
    a = g.adj.astype(np.int64)
    return bool(((a.T @ a) > 0).all())


def is_k_nonsplit(graphs: Iterable[Digraph], k: int, budget: int = DEFAULT_PRODUCT_BUDGET) -> bool:
    """Whether every ordered product of ``k`` graphs from ``graphs`` is nonsplit.

    Exhaustive over ``len(graphs)**k`` sequences; raises :class:`BudgetError`
    instead of sampling when that exceeds ``budget``.
    """
    if k < 1:
        raise DomainError(f"K must be >= 1, got {k}")
    gs = list(dict.fromkeys(graphs))
    if not gs:
        raise DomainError("empty graph set")
    if len({g.n for g in gs}) != 1:
        raise DomainError("graphs have different sizes")
    if len(gs) ** k > budget:
        raise BudgetError(f"{len(gs)}**{k} products exceed the budget of {budget}")
    mats = [g.adj.astype(np.int64) for g in gs]

    def walk(prefix, depth):
        if depth == k:
            return bool(((prefix.T @ prefix) > 0).all())
        for m in mats:
            nxt = (prefix @ m > 0).astype(np.int64)
            if not walk(nxt, depth + 1):
                return False
        return True

    return all(walk(m, 1) for m in mats)


def link_count(g: Digraph) -> int:
    return int(g.adj.sum())


def offdiag_link_count(g: Digraph) -> int:
    """Number of links that are not self-loops."""
    return link_count(g) - int(g.adj.diagonal().sum())


def to_dot(g: Digraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines += [f"  {p};" for p in range(1, g.n + 1)]
    lines += [f"  {p + 1} -> {q + 1};" for p, q in g.sorted_edges()]
    lines.append("}")
    return "\n".join(lines) + "\n"
