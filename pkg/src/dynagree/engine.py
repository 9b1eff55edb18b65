"""Round-by-round execution of averaging rules.

Three paths are provided: synchronous rounds, delta-bounded rounds in which
a received value may be up to ``delta`` rounds old, and the equivalent
zero-delay evolution of ``n * delta`` virtual processes.  All row sums are
accumulated over senders in index order, which makes the delayed and the
virtual paths agree bit for bit.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import algorithms, stochmat
from .errors import DomainError, EquivalenceError, ScheduleError, ValidationError
from .models import NetworkModel, round_rng

WEIGHT_TOL = 1e-12
POLICIES = ("zero", "max", "uniform_random", "alternating", "explicit")


@dataclass
class ExecutionTrace:
    x: np.ndarray
    delta_history: np.ndarray
    matrices: list | None = None
    decisions: dict = field(default_factory=dict)
    delay: int = 1
    stopped_early: bool = False

    @property
    def rounds(self) -> int:
        return self.x.shape[0] - 1

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def window_spread(self, k: int) -> float:
        """Spread of ``x(k-delay+1) .. x(k)``; bounds every later value's range."""
        lo = max(0, k - self.delay + 1)
        w = self.x[lo:k + 1]
        return float(w.max() - w.min())

    def values_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["round", "process", "value"])
        for k, row in enumerate(self.x):
            for p, v in enumerate(row):
                wr.writerow([k, p + 1, repr(float(v))])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["round", "delta"])
        for k, d in enumerate(self.delta_history):
            wr.writerow([k, repr(float(d))])
        return buf.getvalue()


# -- delay schedules ---------------------------------------------------------

@dataclass(frozen=True)
class DelaySchedule:
    """How stale each received value is.

    ``lags(k, n)[p, q]`` is ``k - kappa - 1`` where ``kappa`` is the round
    whose value of ``q`` process ``p`` uses in round ``k``; lags lie in
    ``0 .. delta-1`` and the diagonal is always 0.  The ``explicit`` policy
    takes ``kappa(k, p, q)`` from a user callable.
    """

    delta: int = 1
    policy: str = "zero"
    seed: int = 0
    kappa_fn: Callable[[int, int, int], int] | None = None

    def __post_init__(self):
        if self.delta < 1:
            raise ScheduleError(f"delta must be >= 1, got {self.delta}")
        if self.policy not in POLICIES:
            raise ScheduleError(f"unknown delay policy {self.policy!r}")
        if self.policy == "explicit" and self.kappa_fn is None:
            raise ScheduleError("explicit policy needs kappa_fn")

    def lags(self, k: int, n: int) -> np.ndarray:
        d = self.delta
        if self.policy == "zero" or d == 1 and self.policy != "explicit":
            lag = np.zeros((n, n), dtype=np.int64)
        elif self.policy == "max":
            lag = np.full((n, n), d - 1, dtype=np.int64)
        elif self.policy == "uniform_random":
            lag = round_rng(self.seed, k).integers(0, d, size=(n, n))
        elif self.policy == "alternating":
            idx = np.add.outer(np.arange(n), np.arange(n)) + k
            lag = (idx % 2) * (d - 1)
        else:
            lag = np.empty((n, n), dtype=np.int64)
            for p in range(n):
                for q in range(n):
                    kappa = self.kappa_fn(k, p, q)
                    if not k - d <= kappa <= k - 1:
                        raise ScheduleError(
                            f"kappa({k}, {p}, {q}) = {kappa} outside {k - d}..{k - 1}")
                    if p == q and kappa != k - 1:
                        raise ScheduleError(f"own value of process {p} must be current in round {k}")
                    lag[p, q] = k - kappa - 1
            return lag
        np.fill_diagonal(lag, 0)
        return lag

    def kappa(self, k: int, p: int, q: int, n: int) -> int:
        return k - 1 - int(self.lags(k, n)[p, q])


SYNCHRONOUS = DelaySchedule()


# -- weight contract -----------------------------------------------------------

def check_weights(w: np.ndarray, g, rho: float, round=None) -> None:
    """Raise unless ``w`` is a valid round matrix for graph ``g`` with parameter ``rho``."""
    if (w < 0).any():
        raise ValidationError(f"round {round}: negative weight")
    if np.abs(w.sum(axis=1) - 1.0).max() > WEIGHT_TOL:
        raise ValidationError(f"round {round}: weights do not sum to 1")
    if (w[~g.adj.T] != 0).any():
        raise ValidationError(f"round {round}: weight on a link that is absent")
    pos = w[w > 0]
    if pos.size and pos.min() < rho * (1 - 1e-12):
        raise ValidationError(f"round {round}: positive weight {pos.min():.6g} below rho={rho:.6g}")


# -- runs -------------------------------------------------------------------------

def _validate_x0(x0) -> np.ndarray:
    x = np.array(x0, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("x0 must be a non-empty vector")
    if not np.isfinite(x).all() or x.min() < 0 or x.max() > 1:
        raise DomainError("initial values must lie in [0, 1]")
    return x


def run_synchronous(pattern, rule, x0, rounds: int, retain_matrices: bool = False,
                    stop_epsilon: float | None = None, check: bool = False) -> ExecutionTrace:
    """Evolve ``x(k) = W(k) x(k-1)`` for up to ``rounds`` rounds.

    With ``stop_epsilon`` the run ends after the first round whose spread is
    at most ``stop_epsilon``.
    """
    x = _validate_x0(x0)
    n = x.size
    xs = [x]
    mats = [] if retain_matrices else None
    stopped = False
    for k in range(1, rounds + 1):
        g = pattern(k)
        received = np.broadcast_to(x, (n, n)) if rule.value_dependent else None
        w = rule.matrix(g, received, round=k)
        if check:
            check_weights(w, g, rule.rho(n), k)
        x = stochmat.ordered_matvec(w, x)
        xs.append(x)
        if mats is not None:
            mats.append(w)
        if stop_epsilon is not None and stochmat.delta_seminorm(x) <= stop_epsilon:
            stopped = k < rounds
            break
    arr = np.array(xs)
    return ExecutionTrace(arr, arr.max(axis=1) - arr.min(axis=1), mats, stopped_early=stopped)


def run_delayed(pattern, rule, x0, schedule: DelaySchedule, rounds: int,
                retain_matrices: bool = False, stop_epsilon: float | None = None,
                check: bool = False) -> ExecutionTrace:
    """Delta-bounded execution: ``x_p(k) = sum_q w_qp(k) x_q(kappa)``.

    Values before round 0 are taken to equal ``x(0)``.  With
    ``stop_epsilon`` the run ends once the last ``delta`` vectors together
    span at most ``stop_epsilon``; no later value can leave that range.
    """
    x = _validate_x0(x0)
    n = x.size
    d = schedule.delta
    hist = np.tile(x, (d, 1))  # hist[j] = x(k-1-j)
    cols = np.arange(n)[None, :]
    xs = [x]
    mats = [] if retain_matrices else None
    stopped = False
    for k in range(1, rounds + 1):
        g = pattern(k)
        lag = schedule.lags(k, n)
        received = hist[lag, cols]
        w = rule.matrix(g, received, round=k)
        if check:
            check_weights(w, g, rule.rho(n), k)
        x = np.zeros(n)
        for q in range(n):
            x += w[:, q] * received[:, q]
        hist = np.vstack([x[None, :], hist[:-1]])
        xs.append(x)
        if mats is not None:
            mats.append(w)
        if stop_epsilon is not None and float(hist.max() - hist.min()) <= stop_epsilon:
            stopped = k < rounds
            break
    arr = np.array(xs)
    return ExecutionTrace(arr, arr.max(axis=1) - arr.min(axis=1), mats, delay=d, stopped_early=stopped)


def virtual_index(p: int, d: int, delta: int) -> int:
    """0-based position of ``x_p(k-d)`` inside the virtual state."""
    return p * delta + (delta - 1 - d)


def build_virtual_matrix(w: np.ndarray, lags: np.ndarray, delta: int) -> np.ndarray:
    """Zero-delay matrix on ``n * delta`` virtual processes for one round."""
    n = w.shape[0]
    big = np.zeros((n * delta, n * delta))
    for p in range(n):
        row = virtual_index(p, 0, delta)
        for q in range(n):
            big[row, virtual_index(q, int(lags[p, q]), delta)] = w[p, q]
        for d in range(1, delta):
            big[virtual_index(p, d, delta), virtual_index(p, d - 1, delta)] = 1.0
    return big


@dataclass
class EquivalenceReport:
    max_abs_diff: float
    exact: bool
    first_mismatch: tuple | None
    shifted_ok: bool


@dataclass
class VirtualTrace:
    x: np.ndarray  # (K+1, n*delta)
    delta: int

    def current(self) -> np.ndarray:
        """Columns holding ``x_p(k)`` for every process."""
        n = self.x.shape[1] // self.delta
        return self.x[:, [virtual_index(p, 0, self.delta) for p in range(n)]]


def run_virtual(pattern, rule, x0, schedule: DelaySchedule, rounds: int,
                reference: ExecutionTrace | None = None, tol: float = 1e-12):
    """Evolve the virtual state and compare it against ``run_delayed``.

    Returns ``(VirtualTrace, EquivalenceReport)``.  Raises
    :class:`EquivalenceError` naming the first differing ``(p, k)`` when the
    two paths disagree by more than ``tol``.
    """
    x0 = _validate_x0(x0)
    n = x0.size
    d = schedule.delta
    if reference is None:
        reference = run_delayed(pattern, rule, x0, schedule, rounds)
    xt = np.repeat(x0, d)
    out = [xt]
    for k in range(1, rounds + 1):
        g = pattern(k)
        lag = schedule.lags(k, n)
        idx = np.arange(n)[None, :] * d + (d - 1 - lag)
        w = rule.matrix(g, xt[idx], round=k)
        xt = stochmat.ordered_matvec(build_virtual_matrix(w, lag, d), xt)
        out.append(xt)
    vt = VirtualTrace(np.array(out), d)

    cur = vt.current()
    diff = np.abs(cur - reference.x)
    first = None
    bad = np.argwhere(diff > tol)
    if bad.size:
        k, p = (int(v) for v in bad[0])
        first = (p, k)
    shifted_ok = True
    for j in range(d):
        for p in range(n):
            col = vt.x[:, virtual_index(p, j, d)]
            past = reference.x[np.maximum(np.arange(rounds + 1) - j, 0), p]
            if np.abs(col - past).max() > tol:
                shifted_ok = False
    report = EquivalenceReport(float(diff.max()), bool((cur == reference.x).all()), first, shifted_ok)
    if first is not None:
        p, k = first
        raise EquivalenceError(
            f"virtual and delayed runs differ at process {p}, round {k} by {diff[k, p]:.3g}", p, k)
    if not shifted_ok:
        raise EquivalenceError("shifted virtual components do not match past values")
    return vt, report


def run_macro(pattern, x0, blocks: int, block_length: int | None = None,
              stop_epsilon: float | None = None) -> ExecutionTrace:
    """Equal-neighbor averaging once per block of rounds (ids flooded in between).

    The trace holds one row per block.
    """
    x = _validate_x0(x0)
    n = x.size
    b = block_length if block_length is not None else max(1, n - 1)
    xs = [x]
    stopped = False
    for i in range(blocks):
        block = [pattern(i * b + j) for j in range(1, b + 1)]
        x = algorithms.macro_round_equal_neighbor(block, x)
        xs.append(x)
        if stop_epsilon is not None and stochmat.delta_seminorm(x) <= stop_epsilon:
            stopped = i + 1 < blocks
            break
    arr = np.array(xs)
    return ExecutionTrace(arr, arr.max(axis=1) - arr.min(axis=1), stopped_early=stopped)


# -- decisions ---------------------------------------------------------------------

def _ceil(v: float) -> int | float:
    return math.ceil(v) if math.isfinite(v) else math.inf


def decision_round(kind: str, *, n: int, rho: float, epsilon: float, delay: int = 1,
                   k: int | None = None, contraction: float | None = None) -> int | float:
    """Round at which every process may decide for ``epsilon``-agreement.

    ``kind`` is one of ``nonsplit``, ``k_nonsplit``, ``coordinated`` or
    ``contraction`` (per-round ergodicity bound ``contraction``).  Natural
    logarithms throughout.  Returns ``math.inf`` when the bound overflows.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    if not 0 < rho <= 1:
        raise DomainError(f"rho must lie in (0, 1], got {rho}")
    log = -math.log(epsilon)
    if epsilon >= 1:
        return 0
    inv = 1.0 / rho

    def grouped(blk):
        try:
            return _ceil(blk * inv**blk * log) + blk - 1
        except OverflowError:
            return math.inf

    if kind == "contraction":
        if contraction is None or not 0 <= contraction < 1:
            raise DomainError(f"per-round contraction {contraction:g} is not below 1")
        return 1 if contraction == 0 else _ceil(log / -math.log(contraction))
    if kind == "nonsplit":
        return _ceil(inv * log) if delay == 1 else grouped(2 * delay - 1)
    if kind == "k_nonsplit":
        if k is None or k < 1:
            raise DomainError("k_nonsplit needs k >= 1")
        return grouped(k)
    if kind == "coordinated":
        return grouped(n * delay)
    raise DomainError(f"cannot decide in an {kind!r} model")


def bound_for(model: NetworkModel, rule, epsilon: float, delay: int = 1) -> tuple[int | float, str]:
    """Decision round for ``rule`` in ``model`` and the name of the bound used."""
    cls = model.classify()
    n = model.n
    if isinstance(rule, algorithms.MacroRound):
        raise DomainError("macro rounds are not an averaging rule; use macro_block_bound")
    if isinstance(rule, (algorithms.Reduce, algorithms.Center)):
        if model.kind != "sender_faulty" or delay != 1:
            raise DomainError(f"{rule.kind} has bounds only for synchronous sender-faulty rounds")
        return decision_round("contraction", n=n, rho=rule.rho(n), epsilon=epsilon,
                              contraction=rule.contraction(n)), "trimmed-contraction"
    if cls in ("unsolvable", "unclassified"):
        raise DomainError(f"cannot decide in a model classified as {cls}")
    rho = rule.rho(n)
    if (model.kind == "sender_faulty" and isinstance(rule, algorithms.EqualNeighbor)
            and delay == 1 and 2 * model.f < n):
        if epsilon >= 1:
            return 0, "sender-faulty-minority"
        return _ceil(math.log2(1 / epsilon)), "sender-faulty-minority"
    name = ("nonsplit" if cls == "nonsplit" else "coordinated") + ("-delayed" if delay > 1 else "")
    return decision_round(cls, n=n, rho=rho, epsilon=epsilon, delay=delay), name


def decide(trace: ExecutionTrace, rule, model: NetworkModel, epsilon: float) -> int | float:
    """Record ``dec_p`` for every process at the bound's round, if the trace reaches it.

    Returns the decision round.  Processes decide once; existing decisions
    are left untouched.
    """
    k, _ = bound_for(model, rule, epsilon, trace.delay)
    if k <= trace.rounds:
        for p in range(trace.n):
            trace.decisions.setdefault(p, (k, float(trace.x[k, p])))
    return k
