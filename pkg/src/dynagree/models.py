"""Network models and the communication patterns they generate.

Every generator accepts either an integer seed or a ``numpy`` Generator.
Patterns derive the generator of round ``k`` from ``SeedSequence([seed, k])``
so rounds are independent of each other and of evaluation order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import digraph
from .digraph import CommGraph
from .errors import DomainError, UnsolvableError

KINDS = (
    "complete",
    "rooted",
    "nonsplit",
    "complete_link_faults",
    "sender_faulty",
    "butterfly",
    "bidirectional",
    "non_rooted_witness",
    "async_crash",
)
LINK_FAULT_STRATEGIES = ("random", "adversarial_bipartition")
SENDER_FAULT_STRATEGIES = ("random", "silent", "rotating")


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def round_rng(seed: int, k: int) -> np.random.Generator:
    """Generator for round ``k`` of the stream ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, k]))


def _with_loops(a: np.ndarray) -> CommGraph:
    np.fill_diagonal(a, True)
    return CommGraph(a)


def _arborescence(n, rng, root):
    a = np.zeros((n, n), dtype=bool)
    order = [root] + [v for v in rng.permutation(n).tolist() if v != root]
    for i in range(1, n):
        parent = order[int(rng.integers(i))]
        a[parent, order[i]] = True
    return a


def sample_rooted(n: int, seed=None, density: float = 0.0) -> CommGraph:
    """Random arborescence from a random root, plus extra links w.p. ``density``."""
    rng = _rng(seed)
    root = int(rng.integers(n))
    a = _arborescence(n, rng, root)
    a |= rng.random((n, n)) < density
    return _with_loops(a)


def sample_nonsplit(n: int, seed=None, density: float = 0.2) -> CommGraph:
    """A random broadcaster heard by everyone, plus extra links w.p. ``density``."""
    rng = _rng(seed)
    a = rng.random((n, n)) < density
    a[int(rng.integers(n))] = True
    return _with_loops(a)


def complete_with_link_faults(n: int, budget: int, seed=None, strategy: str = "random") -> CommGraph:
    """Complete graph with exactly ``budget`` off-diagonal links removed.

    ``adversarial_bipartition`` first cuts every incoming link of one random
    process, then of a second one; with ``budget >= 2n - 2`` both become
    isolated sources and the graph is not rooted.  Links beyond ``2n - 2``
    are removed at random.
    """
    if not 0 <= budget <= n * n - n:
        raise DomainError(f"budget must lie in 0..{n * n - n}, got {budget}")
    rng = _rng(seed)
    off = [(p, q) for p in range(n) for q in range(n) if p != q]
    if strategy == "random":
        idx = rng.choice(len(off), size=budget, replace=False)
        cut = [off[i] for i in idx]
    elif strategy == "adversarial_bipartition":
        if n < 2:
            raise DomainError("adversarial_bipartition needs n >= 2")
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        targeted = [(p, u) for p in range(n) if p != u] + [(p, v) for p in range(n) if p != v]
        cut = targeted[:budget]
        rest = [e for e in off if e not in set(targeted)]
        extra = budget - len(cut)
        if extra > 0:
            cut += [rest[i] for i in rng.choice(len(rest), size=extra, replace=False)]
    else:
        raise DomainError(f"unknown link-fault strategy {strategy!r}")
    a = np.ones((n, n), dtype=bool)
    for p, q in cut:
        a[p, q] = False
    return CommGraph(a)


def non_rooted_witness(n: int) -> CommGraph:
    """Processes 0 and 1 hear nobody; both broadcast to the rest, which is complete."""
    if n < 2:
        raise DomainError("non_rooted_witness needs n >= 2")
    a = np.zeros((n, n), dtype=bool)
    a[:, 2:] = True
    return _with_loops(a)


def sender_faulty_round(n: int, f: int, seed=None, strategy: str = "random", round: int = 1) -> CommGraph:
    """Complete graph in which up to ``f`` senders omit some of their messages.

    ``random`` picks ``f`` senders, each dropping a uniformly random subset of
    its outgoing links; ``silent`` picks ``f`` senders that drop all of them;
    ``rotating`` silences ``round-1, ..., round+f-2`` (mod ``n``).
    """
    if not 0 <= f <= n - 1:
        raise DomainError(f"f must lie in 0..{n - 1}, got {f}")
    rng = _rng(seed)
    a = np.ones((n, n), dtype=bool)
    if strategy == "rotating":
        faulty = [(round - 1 + i) % n for i in range(f)]
    else:
        faulty = rng.choice(n, size=f, replace=False).tolist()
    for s in faulty:
        if strategy == "random":
            a[s] = rng.random(n) < 0.5
        elif strategy in ("silent", "rotating"):
            a[s] = False
        else:
            raise DomainError(f"unknown sender-fault strategy {strategy!r}")
    return _with_loops(a)


def mirror(m: int, p: int) -> int:
    return 2 * m - 1 - p


def butterfly(m: int) -> CommGraph:
    """The ``m``-butterfly on ``2m`` processes."""
    if m < 3:
        raise DomainError(f"butterfly needs m >= 3, got {m}")
    edges = []
    for p in range(m - 1):
        edges.append((p + 1, p))
    for p in range(m):
        edges.append((0, p))
    edges += [(mirror(m, p), mirror(m, q)) for p, q in edges]
    edges += [(m - 1, m), (m, m - 1)]
    return CommGraph.from_edges(2 * m, edges)


def sample_bidirectional_connected(n: int, seed=None, density: float = 0.1) -> CommGraph:
    """Random symmetric connected graph: spanning tree plus symmetric extras."""
    rng = _rng(seed)
    a = _arborescence(n, rng, int(rng.integers(n)))
    a |= np.triu(rng.random((n, n)) < density, 1)
    a |= a.T
    return _with_loops(a)


def async_crash_round(n: int, f: int, seed=None) -> CommGraph:
    """Each process hears itself and ``n - f - 1`` random others."""
    if n <= 2 * f:
        raise UnsolvableError(f"approximate consensus is not solvable with n={n} <= 2f={2 * f}")
    rng = _rng(seed)
    a = np.eye(n, dtype=bool)
    for p in range(n):
        others = [q for q in range(n) if q != p]
        a[rng.choice(others, size=n - f - 1, replace=False), p] = True
    return CommGraph(a)


# -- models and patterns ---------------------------------------------------

@dataclass(frozen=True)
class NetworkModel:
    kind: str
    n: int
    f: int = 0
    budget: int = 0
    density: float | None = None
    strategy: str = "random"
    m: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown model kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind == "butterfly":
            m = self.m if self.m is not None else self.n // 2
            if m < 3 or self.n != 2 * m:
                raise DomainError(f"butterfly needs m >= 3 and n == 2m, got n={self.n}, m={self.m}")
            object.__setattr__(self, "m", m)
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.kind == "sender_faulty" and not 0 <= self.f <= self.n - 1:
            raise DomainError(f"sender_faulty needs 0 <= f <= n-1, got f={self.f}")
        if self.kind == "sender_faulty" and self.strategy not in SENDER_FAULT_STRATEGIES:
            raise DomainError(f"unknown sender-fault strategy {self.strategy!r}")
        if self.kind == "complete_link_faults":
            if not 0 <= self.budget <= self.n * self.n - self.n:
                raise DomainError(f"budget must lie in 0..{self.n * self.n - self.n}")
            if self.strategy not in LINK_FAULT_STRATEGIES:
                raise DomainError(f"unknown link-fault strategy {self.strategy!r}")
        if self.kind == "async_crash" and self.n <= 2 * self.f:
            raise UnsolvableError(f"approximate consensus is not solvable with n={self.n} <= 2f")

    def sample(self, rng, round: int = 1) -> CommGraph:
        n = self.n
        k = self.kind
        if k == "complete":
            return digraph.complete(n)
        if k == "rooted":
            return sample_rooted(n, rng, 0.0 if self.density is None else self.density)
        if k == "nonsplit":
            return sample_nonsplit(n, rng, 0.2 if self.density is None else self.density)
        if k == "complete_link_faults":
            return complete_with_link_faults(n, self.budget, rng, self.strategy)
        if k == "sender_faulty":
            return sender_faulty_round(n, self.f, rng, self.strategy, round)
        if k == "butterfly":
            return butterfly(self.m)
        if k == "bidirectional":
            return sample_bidirectional_connected(n, rng, 0.1 if self.density is None else self.density)
        if k == "non_rooted_witness":
            return non_rooted_witness(n)
        if k == "async_crash":
            return async_crash_round(n, self.f, rng)
        raise AssertionError(k)

    def predicate(self) -> Callable[[CommGraph], bool]:
        """The defining property every graph of this model satisfies."""
        k = self.kind
        if k in ("nonsplit", "sender_faulty", "complete"):
            return digraph.is_nonsplit
        if k == "async_crash":
            return lambda g: bool((g.in_degrees() == self.n - self.f).all()) and digraph.is_nonsplit(g)
        if k == "bidirectional":
            return lambda g: bool((g.adj == g.adj.T).all()) and digraph.is_strongly_connected(g)
        if k == "butterfly":
            return digraph.is_strongly_connected
        if k == "non_rooted_witness":
            return lambda g: not digraph.is_rooted(g)
        if k == "complete_link_faults":
            cut = self.n * self.n - self.n - self.budget
            return lambda g: digraph.offdiag_link_count(g) == cut
        return digraph.is_rooted

    def classify(self) -> str:
        """``nonsplit``, ``coordinated``, ``unsolvable`` or ``unclassified``."""
        k = self.kind
        if k in ("nonsplit", "sender_faulty", "async_crash", "complete"):
            return "nonsplit"
        if k in ("rooted", "butterfly", "bidirectional"):
            return "coordinated"
        if k == "non_rooted_witness":
            return "unsolvable"
        if k == "complete_link_faults":
            if self.budget <= 2 * self.n - 3:
                return "coordinated"
            if self.strategy == "adversarial_bipartition":
                return "unsolvable"
        return "unclassified"


class Pattern:
    """Deterministic round -> communication graph map for ``(model, seed)``."""

    def __init__(self, model: NetworkModel, seed: int = 0):
        self.model = model
        self.seed = seed
        self.n = model.n

    def __call__(self, k: int) -> CommGraph:
        return self.model.sample(round_rng(self.seed, k), round=k)


class ConstantPattern:
    def __init__(self, g: CommGraph):
        self.graph = g
        self.n = g.n

    def __call__(self, k: int) -> CommGraph:
        return self.graph


class SequencePattern:
    """Plays ``graphs`` in order, cycling when exhausted."""

    def __init__(self, graphs: Sequence[CommGraph]):
        if not graphs:
            raise DomainError("empty graph sequence")
        self.graphs = list(graphs)
        self.n = self.graphs[0].n

    def __call__(self, k: int) -> CommGraph:
        return self.graphs[(k - 1) % len(self.graphs)]
