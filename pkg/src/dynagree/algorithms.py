"""Averaging rules.

Each per-process function takes the values a process received in a round,
keyed by sender, and returns ``(new_value, weights)``.  The rule classes
assemble the same weights into a round matrix for the engine and report
their guaranteed lower bound ``rho`` on positive weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import digraph
from .errors import ConfigurationError, DomainError, FaultBudgetError

REDUCE_SENTINEL = -1.0


def _weighted_sum(values: Mapping[int, float], weights: Mapping[int, float]) -> float:
    acc = 0.0
    for q in sorted(weights):
        acc += weights[q] * values[q]
    return acc


def equal_neighbor(in_values: Mapping[int, float]):
    if not in_values:
        raise DomainError("equal_neighbor needs at least the process's own value")
    w = 1.0 / len(in_values)
    weights = {q: w for q in in_values}
    return _weighted_sum(in_values, weights), weights


def fixed_weight(in_values: Mapping[int, float], alpha: Sequence[float], self_id: int, round=None):
    """Fixed weights ``1/alpha_q`` for other senders, the remainder kept by ``self_id``."""
    if self_id not in in_values:
        raise DomainError(f"process {self_id} must receive its own value")
    weights = {q: 1.0 / alpha[q] for q in in_values if q != self_id}
    own = 1.0 - sum(weights[q] for q in sorted(weights))
    if own <= 0:
        raise ConfigurationError(f"self-weight {own:.6g} of process {self_id} is not positive", round)
    weights[self_id] = own
    return _weighted_sum(in_values, weights), weights


def _sorted_senders(received: Mapping[int, float]):
    return sorted(received, key=lambda q: (received[q], q))


def reduce_procedure(received: Mapping[int, float], n: int, f: int):
    """Fill missing senders with -1, drop the ``f`` smallest, average the rest."""
    if n <= 2 * f:
        raise ConfigurationError(f"Reduce requires n > 2f, got n={n}, f={f}")
    if len(received) < n - f:
        raise FaultBudgetError(f"only {len(received)} of {n} values received with f={f}")
    if any(v <= REDUCE_SENTINEL for v in received.values()):
        raise DomainError("Reduce expects received values above the sentinel -1")
    slots = {q: received.get(q, REDUCE_SENTINEL) for q in range(n)}
    kept = _sorted_senders(slots)[f:]
    w = 1.0 / (n - f)
    weights = {q: w for q in kept}
    return _weighted_sum(slots, weights), weights


def center_procedure(received: Mapping[int, float], n: int, f: int):
    """Average the central received values, trimming symmetrically."""
    t = n - len(received)
    if t > f:
        raise FaultBudgetError(f"{t} values missing but only f={f} faults allowed")
    if n <= f:
        raise ConfigurationError(f"Center requires n > f, got n={n}, f={f}")
    order = _sorted_senders(received)
    drop, odd = divmod(f - t, 2)
    kept = order[drop:len(order) - drop]
    w = 1.0 / (n - f)
    weights = {q: w for q in kept}
    if odd:
        weights[kept[0]] = weights[kept[-1]] = w / 2
    return _weighted_sum(received, weights), weights


# -- rules -------------------------------------------------------------------

def _rows_from(fn, g: digraph.Digraph, received: np.ndarray) -> np.ndarray:
    n = g.n
    w = np.zeros((n, n))
    for p in range(n):
        ins = np.flatnonzero(g.adj[:, p]).tolist()
        _, weights = fn(p, {q: float(received[p, q]) for q in ins})
        for q, v in weights.items():
            w[p, q] = v
    return w


@dataclass(frozen=True)
class EqualNeighbor:
    kind = "equal_neighbor"
    value_dependent = False

    def rho(self, n: int) -> float:
        return 1.0 / n

    def matrix(self, g: digraph.Digraph, received=None, round=None) -> np.ndarray:
        a = g.adj.T.astype(np.float64)
        return a / a.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class FixedWeight:
    """``alpha=None`` means ``alpha_p = n`` for every process."""

    alpha: tuple | None = None
    kind = "fixed_weight"
    value_dependent = False

    def alphas(self, n: int) -> np.ndarray:
        if self.alpha is None:
            return np.full(n, float(n))
        a = np.asarray(self.alpha, dtype=np.float64)
        if a.shape != (n,) or (a <= 0).any():
            raise ConfigurationError(f"alpha must be {n} positive numbers, got {self.alpha}")
        return a

    def check_model(self, max_in_degrees) -> None:
        """Require ``alpha_p >= d_p`` for the model's maximum in-degrees."""
        a = self.alphas(len(max_in_degrees))
        bad = [p for p, d in enumerate(max_in_degrees) if a[p] < d]
        if bad:
            raise ConfigurationError(f"alpha below the maximum in-degree at processes {bad}")

    def rho(self, n: int) -> float:
        return float((1.0 / self.alphas(n)).min())

    def matrix(self, g: digraph.Digraph, received=None, round=None) -> np.ndarray:
        n = g.n
        inv = 1.0 / self.alphas(n)
        w = g.adj.T * inv[None, :]
        np.fill_diagonal(w, 0.0)
        own = 1.0 - w.sum(axis=1)
        rho = inv.min()
        bad = np.flatnonzero(own < rho - 1e-12)
        if bad.size:
            p = int(bad[0])
            what = "not positive" if own[p] <= 0 else f"below rho={rho:.6g}"
            raise ConfigurationError(f"self-weight {own[p]:.6g} of process {p} is {what}", round)
        np.fill_diagonal(w, own)
        return w


@dataclass(frozen=True)
class Reduce:
    f: int
    kind = "reduce"
    value_dependent = True

    def rho(self, n: int) -> float:
        return 1.0 / (n - self.f)

    def contraction(self, n: int) -> float:
        """Per-round bound on the ergodicity coefficient under ``f`` faulty senders."""
        return self.f / (n - self.f)

    def matrix(self, g: digraph.Digraph, received: np.ndarray, round=None) -> np.ndarray:
        return _rows_from(lambda p, vals: reduce_procedure(vals, g.n, self.f), g, received)


@dataclass(frozen=True)
class Center:
    f: int
    kind = "center"
    value_dependent = True

    def rho(self, n: int) -> float:
        return 1.0 / (2 * (n - self.f)) if self.f else 1.0 / n

    def contraction(self, n: int) -> float:
        return self.f / (2 * (n - self.f))

    def matrix(self, g: digraph.Digraph, received: np.ndarray, round=None) -> np.ndarray:
        try:
            return _rows_from(lambda p, vals: center_procedure(vals, g.n, self.f), g, received)
        except FaultBudgetError as exc:
            raise FaultBudgetError(f"round {round}: {exc}") from None


def sender_faulty_contraction(rule, n: int, f: int) -> float:
    """Per-round ergodicity bound of ``rule`` when at most ``f`` senders omit."""
    if isinstance(rule, (Reduce, Center)):
        return rule.contraction(n)
    if isinstance(rule, EqualNeighbor):
        return f / n
    raise DomainError(f"no sender-faulty contraction bound for {type(rule).__name__}")


# -- macro rounds --------------------------------------------------------------

@dataclass(frozen=True)
class MacroRound:
    """Equal-neighbor averaging applied once per block of ``block_length`` rounds.

    Not an averaging rule: processes flood ``(id, start value)`` pairs
    within the block and need identifiers.  ``block_length=None`` means
    ``n - 1``.
    """

    block_length: int | None = None
    kind = "macro_round"

    def length(self, n: int) -> int:
        return self.block_length if self.block_length is not None else max(1, n - 1)


def macro_round_equal_neighbor(block: Sequence[digraph.Digraph], x) -> np.ndarray:
    n = block[0].n
    known = [{p: float(x[p])} for p in range(n)]
    for g in block:
        nxt = []
        for p in range(n):
            merged = {}
            for q in np.flatnonzero(g.adj[:, p]).tolist():
                merged.update(known[q])
            nxt.append(merged)
        known = nxt
    return np.array([equal_neighbor(k)[0] for k in known])


RULES = {
    "equal_neighbor": EqualNeighbor,
    "fixed_weight": FixedWeight,
    "reduce": Reduce,
    "center": Center,
    "macro_round": MacroRound,
}
