"""Solvability verdicts, convergence measurement and bound verification."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import algorithms, digraph, engine, models, stochmat
from .errors import BudgetError, DomainError, ValidationError
from .scenario import Scenario

MATRIX_DELTA_TOL = 1e-12
UNSOLVABLE_NOTE = ("not solvable: the model contains a non-rooted graph, whose two source "
                   "components never hear from each other")


def convergence_round(trace: engine.ExecutionTrace, epsilon: float) -> int | None:
    """First round ``k`` with ``delta(x(k)) <= epsilon``; ``None`` if never reached."""
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    hit = np.flatnonzero(trace.delta_history <= epsilon)
    return int(hit[0]) if hit.size else None


# -- solvability -------------------------------------------------------------

@dataclass(frozen=True)
class SolvabilityVerdict:
    coordinated: bool
    witness: digraph.Digraph | None = None


def decide_solvability(graphs: Iterable[digraph.Digraph]) -> SolvabilityVerdict:
    """Approximate consensus is solvable iff every graph of the model is rooted."""
    for g in graphs:
        if not digraph.is_rooted(g):
            return SolvabilityVerdict(False, g)
    return SolvabilityVerdict(True)


def impossibility_run(g: digraph.CommGraph, rule, rounds: int) -> engine.ExecutionTrace:
    """Run ``rule`` on constant ``g`` with 0 on one source component and 1 elsewhere.

    For a non-rooted ``g`` the spread stays 1 forever.
    """
    cond = digraph.condensation(g)
    sources = cond.sources()
    x0 = np.ones(g.n)
    x0[list(cond.components[sources[0]])] = 0.0
    return engine.run_synchronous(models.ConstantPattern(g), rule, x0, rounds)


@dataclass(frozen=True)
class ConsensusSetVerdict:
    consensus: bool
    probe_max_delta: float
    witness: int | None = None


def consensus_set_check(ms: Sequence, probes: int = 100, length: int = 10**4,
                        seed: int = 0) -> ConsensusSetVerdict:
    """Graph test for a finite set of stochastic matrices with positive diagonals.

    Also multiplies ``probes`` random backward products of ``length``
    factors and reports the largest ergodicity coefficient seen.
    """
    mats = [stochmat.check_stochastic(m) for m in ms]
    if not mats:
        raise DomainError("empty matrix set")
    for i, m in enumerate(mats):
        if (m.diagonal() <= 0).any():
            raise ValidationError(f"matrix {i} has a zero diagonal entry")
    witness = None
    for i, m in enumerate(mats):
        if not digraph.is_rooted(stochmat.associated_graph(m)):
            witness = i
            break
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        prod = np.eye(mats[0].shape[0])
        for j in rng.integers(len(mats), size=length):
            prod = mats[j] @ prod
        worst = max(worst, stochmat.delta_coeff(prod))
    return ConsensusSetVerdict(witness is None, worst, witness)


# -- bound verification ----------------------------------------------------------

@dataclass
class ConvergenceReport:
    epsilon: float
    observed_round: int | None
    theorem_bound: int | float | None
    bound_name: str
    bound_satisfied: bool | None
    rounds_run: int
    final_delta: float
    delta_at_decision: float | None = None
    matrix_delta_max: float | None = None
    matrix_delta_bound: float | None = None
    spread_ratio_max: float | None = None
    note: str = ""

    def row(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "observed_round": "" if self.observed_round is None else self.observed_round,
            "theorem_bound": "" if self.theorem_bound is None else self.theorem_bound,
            "bound": self.bound_name,
            "bound_satisfied": "" if self.bound_satisfied is None else self.bound_satisfied,
            "rounds_run": self.rounds_run,
            "final_delta": self.final_delta,
            "delta_at_decision": "" if self.delta_at_decision is None else self.delta_at_decision,
            "matrix_delta_max": "" if self.matrix_delta_max is None else self.matrix_delta_max,
            "matrix_delta_bound": "" if self.matrix_delta_bound is None else self.matrix_delta_bound,
            "spread_ratio_max": "" if self.spread_ratio_max is None else self.spread_ratio_max,
            "note": self.note,
        }

    def summary(self) -> str:
        lines = [f"epsilon            {self.epsilon:g}",
                 f"bound              {self.bound_name}" + ("" if self.theorem_bound is None else f": {self.theorem_bound}"),
                 f"observed round     {self.observed_round if self.observed_round is not None else 'not reached'}",
                 f"rounds run         {self.rounds_run}",
                 f"final spread       {self.final_delta:.6g}"]
        if self.matrix_delta_max is not None:
            lines.append(f"contraction bound  {self.matrix_delta_bound:.6g}")
            lines.append(f"max round coeff    {self.matrix_delta_max:.6g}")
            lines.append(f"max spread ratio   {self.spread_ratio_max:.6g}")
        verdict = {True: "satisfied", False: "VIOLATED", None: "n/a"}[self.bound_satisfied]
        lines.append(f"bound              {verdict}")
        if self.note:
            lines.append(f"note               {self.note}")
        return "\n".join(lines)


def macro_block_bound(n: int, epsilon: float) -> int:
    """Blocks needed by macro-round equal-neighbor averaging.

    Each block product is nonsplit with weights at least ``1/n``.
    """
    return engine.decision_round("nonsplit", n=n, rho=1.0 / n, epsilon=epsilon)


def pattern_for(s: Scenario):
    return models.Pattern(s.network_model(), s.resolved_seed())


def bound_suite(s: Scenario, retain_matrices: bool = False):
    """Run a scenario up to its decision bound and check the bound.

    Returns ``(report, trace)``.
    """
    model = s.network_model()
    rule = s.weight_rule()
    x0 = s.initial_values()
    pattern = pattern_for(s)
    eps = s.epsilon
    cls = model.classify()

    def unbounded(note):
        cap = s.cap if s.cap is not None else 1000
        trace = engine.run_delayed(pattern, rule, x0, s.schedule(), cap, retain_matrices)
        obs = convergence_round(trace, eps)
        if obs is None:
            note += f"; no convergence within {cap} rounds"
        rep = ConvergenceReport(eps, obs, None, "none", None, trace.rounds,
                                float(trace.delta_history[-1]), note=note)
        return rep, trace

    trimmed = isinstance(rule, (algorithms.Reduce, algorithms.Center))
    if cls == "unsolvable" and not trimmed:
        return unbounded(UNSOLVABLE_NOTE)

    if isinstance(rule, algorithms.MacroRound):
        b = rule.length(s.n)
        blocks = macro_block_bound(s.n, eps)
        bound = blocks * b
        limit = blocks + 1 if s.cap is None else min(blocks + 1, max(1, s.cap // b))
        trace = engine.run_macro(pattern, x0, limit, b, stop_epsilon=eps)
        obs_blocks = convergence_round(trace, eps)
        obs = None if obs_blocks is None else obs_blocks * b
        rep = ConvergenceReport(eps, obs, bound, "macro-round", obs is not None and obs <= bound,
                                trace.rounds * b, float(trace.delta_history[-1]))
        rep.delta_at_decision = _delta_at(trace, blocks)
        return rep, trace

    try:
        bound, name = engine.bound_for(model, rule, eps, s.delay.delta)
    except DomainError as exc:
        return unbounded(f"no bound applies: {exc}")
    cap = bound + 1 if math.isfinite(bound) else None
    if s.cap is not None:
        cap = s.cap if cap is None else min(cap, s.cap)
    if cap is None:
        raise BudgetError("bound overflows; set cap")
    watch = model.kind == "sender_faulty" and s.delay.delta == 1
    trace = engine.run_delayed(pattern, rule, x0, s.schedule(), int(cap),
                               retain_matrices=retain_matrices or watch, stop_epsilon=eps)
    obs = convergence_round(trace, eps)
    ok = obs is not None and obs <= bound
    rep = ConvergenceReport(eps, obs, bound, name, ok, trace.rounds, float(trace.delta_history[-1]))
    rep.delta_at_decision = _delta_at(trace, bound)
    if watch:
        coeffs = [stochmat.delta_coeff(w) for w in trace.matrices]
        rep.matrix_delta_max = max(coeffs) if coeffs else 0.0
        rep.spread_ratio_max = spread_ratio_max(trace)
        rep.matrix_delta_bound = algorithms.sender_faulty_contraction(rule, s.n, model.f)
        # Center weights depend on the value order, so only the spread contracts by f/(2(n-f))
        if isinstance(rule, algorithms.Center):
            d = trace.delta_history
            excess = float((d[1:] - rep.matrix_delta_bound * d[:-1]).max()) if d.size > 1 else 0.0
        else:
            excess = rep.matrix_delta_max - rep.matrix_delta_bound
        if excess > MATRIX_DELTA_TOL:
            rep.bound_satisfied = False
        if not retain_matrices:
            trace.matrices = None
    engine.decide(trace, rule, model, eps)
    return rep, trace


def spread_ratio_max(trace: engine.ExecutionTrace) -> float:
    """Largest ``delta(x(k)) / delta(x(k-1))`` over rounds with a nonzero previous spread."""
    d = trace.delta_history
    prev, cur = d[:-1], d[1:]
    mask = prev > 0
    return float((cur[mask] / prev[mask]).max()) if mask.any() else 0.0


def _delta_at(trace, k):
    """Spread at round ``k``, or the final window spread if the run stopped earlier.

    Once the last window spans at most epsilon no later round can exceed it.
    """
    if not math.isfinite(k):
        return None
    if k <= trace.rounds:
        return float(trace.delta_history[int(k)])
    return trace.window_spread(trace.rounds)


# -- butterfly lower bound -----------------------------------------------------

def butterfly_perron(m: int) -> np.ndarray:
    """Closed-form Perron vector of the equal-neighbor matrix of the m-butterfly."""
    half = [1 / 5] + [3 / (5 * 2**p) for p in range(2, m)] + [3 / (5 * 2 ** (m - 1))]
    return np.array(half + half[::-1])


def time_to_epsilon(w: np.ndarray, epsilon: float, cap: int = 10**7) -> int:
    """Smallest ``k`` with ``delta_coeff(W^k) <= epsilon``, by repeated multiplication."""
    p = np.eye(w.shape[0])
    for k in range(1, cap + 1):
        p = w @ p
        if stochmat.delta_coeff(p) <= epsilon:
            return k
    raise BudgetError(f"W^k did not reach {epsilon:g} within {cap} steps")


@dataclass
class ButterflyReport:
    m: int
    epsilon: float
    primitive: bool
    perron: np.ndarray
    perron_error: float
    pi_min: float
    bottleneck_half: float
    bottleneck_half_expected: float
    cheeger: float | None
    cheeger_set: frozenset | None
    second_modulus: float
    spectral_gap: float
    time_to_epsilon: int

    def row(self) -> dict:
        return {
            "m": self.m, "n": 2 * self.m, "epsilon": self.epsilon,
            "perron_error": self.perron_error, "pi_min": self.pi_min,
            "bottleneck_half": self.bottleneck_half,
            "bottleneck_half_expected": self.bottleneck_half_expected,
            "cheeger": "" if self.cheeger is None else self.cheeger,
            "second_modulus": self.second_modulus, "spectral_gap": self.spectral_gap,
            "time_to_epsilon": self.time_to_epsilon,
        }


def butterfly_experiment(m: int, epsilon: float = 1e-3, perron_tol: float = 1e-14,
                         cheeger_max_n: int = 16) -> ButterflyReport:
    """Perron vector, bottleneck ratio, spectral gap and mixing time of the m-butterfly.

    The Perron vector is computed by power iteration and compared with the
    closed form; the half-split bottleneck ratio is evaluated with the
    elimination-based Perron vector, which is accurate to a few ulps.
    """
    if not 3 <= m <= 12:
        raise BudgetError(f"butterfly_experiment supports 3 <= m <= 12, got {m}")
    w = stochmat.equal_neighbor_matrix(models.butterfly(m))
    prim = stochmat.is_primitive(w)
    pi = stochmat.perron_vector(w, tol=perron_tol)
    exact = butterfly_perron(m)
    pi_gth = stochmat.perron_vector(w, method="gth")
    half = stochmat.bottleneck_ratio(w, pi_gth, range(m))
    phi = phi_set = None
    if 2 * m <= cheeger_max_n:
        phi, phi_set = stochmat.cheeger_constant(w, pi_gth)
    lam = stochmat.second_eigenvalue_modulus(w)
    return ButterflyReport(
        m=m, epsilon=epsilon, primitive=prim, perron=pi,
        perron_error=float(np.abs(pi - exact).max()), pi_min=float(pi.min()),
        bottleneck_half=half, bottleneck_half_expected=1 / (5 * 2 ** (m - 2)),
        cheeger=phi, cheeger_set=phi_set, second_modulus=lam, spectral_gap=1 - lam,
        time_to_epsilon=time_to_epsilon(w, epsilon),
    )


# -- macro rounds versus plain averaging ------------------------------------------

@dataclass
class MacroComparison:
    n: int
    epsilon: float
    plain_rounds: int | None
    macro_rounds: int | None
    block_length: int
    products_match: bool


def macro_vs_plain_comparison(pattern, n: int, epsilon: float, x0=None, cap: int = 10**6,
                              check_blocks: int = 3) -> MacroComparison:
    """Rounds to ``epsilon`` for equal-neighbor vs macro-round averaging on one pattern.

    Also checks, for the first ``check_blocks`` blocks, that a macro step
    equals equal-neighbor averaging on the composed block graph.
    """
    if x0 is None:
        x0 = (np.arange(n) % 2).astype(np.float64)
    b = max(1, n - 1)
    plain = engine.run_synchronous(pattern, algorithms.EqualNeighbor(), x0, cap, stop_epsilon=epsilon)
    macro = engine.run_macro(pattern, x0, max(1, cap // b), b, stop_epsilon=epsilon)
    ok = True
    for i in range(min(check_blocks, macro.rounds)):
        block = [pattern(i * b + j) for j in range(1, b + 1)]
        expect = stochmat.equal_neighbor_matrix(digraph.compose(block)) @ macro.x[i]
        ok &= bool(np.allclose(expect, macro.x[i + 1], rtol=0, atol=1e-12))
    pr = convergence_round(plain, epsilon)
    mr = convergence_round(macro, epsilon)
    return MacroComparison(n, epsilon, pr, None if mr is None else mr * b, b, ok)
