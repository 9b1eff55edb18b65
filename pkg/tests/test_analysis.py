import math

import numpy as np
import pytest

from dynagree import algorithms as alg, analysis, digraph, engine, models, scenario, stochmat
from dynagree.errors import BudgetError, ValidationError


class TestConvergenceRound:
    def test_complete(self):
        tr = engine.run_synchronous(models.ConstantPattern(digraph.complete(3)), alg.EqualNeighbor(), [0, 0.5, 1], 5)
        assert analysis.convergence_round(tr, 1e-9) == 1

    def test_never(self):
        tr = engine.run_synchronous(models.ConstantPattern(digraph.identity(2)), alg.EqualNeighbor(), [0, 1], 50)
        assert analysis.convergence_round(tr, 0.5) is None

    @pytest.mark.parametrize("f", [0, 1, 2])
    def test_sender_faulty_minority(self, f):
        n, eps = 6, 1e-6
        tr = engine.run_synchronous(models.Pattern(models.NetworkModel("sender_faulty", n, f=f), f),
                                    alg.EqualNeighbor(), np.linspace(0, 1, n), 100)
        assert analysis.convergence_round(tr, eps) <= math.ceil(math.log2(1 / eps))
        assert (tr.delta_history[1:] <= f / n * tr.delta_history[:-1] + 1e-15).all()


class TestSolvability:
    def test_link_faults_exhaustive_n4(self):
        graphs = [g for g in digraph.all_comm_graphs(4) if digraph.offdiag_link_count(g) == 7]
        assert analysis.decide_solvability(graphs).coordinated

    def test_witness_returned(self):
        w = models.non_rooted_witness(4)
        v = analysis.decide_solvability([digraph.complete(4), w])
        assert not v.coordinated and v.witness == w

    def test_butterfly(self):
        assert analysis.decide_solvability([models.butterfly(4)]).coordinated

    @pytest.mark.parametrize("n", [3, 4])
    def test_agrees_with_execution(self, n):
        for g in digraph.all_comm_graphs(n):
            if analysis.decide_solvability([g]).coordinated:
                tr = engine.run_synchronous(models.ConstantPattern(g), alg.EqualNeighbor(), np.linspace(0, 1, n),
                                            engine.decision_round("coordinated", n=n, rho=1 / n, epsilon=1e-3),
                                            stop_epsilon=1e-3)
                assert analysis.convergence_round(tr, 1e-3) is not None
            else:
                assert (analysis.impossibility_run(g, alg.EqualNeighbor(), 50).delta_history == 1).all()


class TestConsensusSet:
    def test_rank_one(self):
        v = analysis.consensus_set_check([np.tile([0.5, 0.5], (2, 1))], probes=3, length=10)
        assert v.consensus and v.probe_max_delta == pytest.approx(0, abs=1e-15)

    def test_two_cliques(self):
        m = np.kron(np.eye(2), np.full((2, 2), 0.5))
        v = analysis.consensus_set_check([m], probes=3, length=50)
        assert not v.consensus and v.probe_max_delta == 1 and v.witness == 0

    def test_random_rooted(self):
        rng = np.random.default_rng(0)
        ms = [stochmat.equal_neighbor_matrix(models.sample_rooted(5, rng, 0.1)) for _ in range(5)]
        v = analysis.consensus_set_check(ms, probes=10, length=10**4)
        assert v.consensus and v.probe_max_delta <= 1e-6

    def test_zero_diagonal(self):
        with pytest.raises(ValidationError):
            analysis.consensus_set_check([np.array([[0.0, 1.0], [0.5, 0.5]])])


def make(**kw):
    return scenario.from_dict(kw)


class TestBoundSuite:
    def test_nonsplit_n8(self):
        rep, _ = analysis.bound_suite(make(n=8, epsilon=1e-6, seed=1, model={"kind": "nonsplit"}))
        assert rep.theorem_bound == 111 and rep.bound_satisfied and rep.observed_round <= 111

    def test_coordinated_n5(self):
        rep, _ = analysis.bound_suite(make(n=5, epsilon=1e-3, seed=1, model={"kind": "rooted"}))
        assert rep.theorem_bound == math.ceil(5 * 5**5 * math.log(1e3)) + 4
        assert rep.bound_satisfied

    @pytest.mark.parametrize("kind,f", [("center", 2), ("reduce", 2), ("equal_neighbor", 2)])
    def test_sender_faulty_round_checks(self, kind, f):
        rep, _ = analysis.bound_suite(make(n=5, epsilon=1e-4, seed=3, model={"kind": "sender_faulty", "f": f},
                                           rule={"kind": kind}))
        assert rep.bound_satisfied
        assert rep.spread_ratio_max <= rep.matrix_delta_bound + 1e-12

    def test_center_bound_value(self):
        rep, _ = analysis.bound_suite(make(n=5, epsilon=1e-4, model={"kind": "sender_faulty", "f": 2},
                                           rule={"kind": "center"}))
        assert rep.matrix_delta_bound == pytest.approx(1 / 3)

    def test_center_without_contraction_bound(self):
        rep, _ = analysis.bound_suite(make(n=5, cap=100, model={"kind": "sender_faulty", "f": 4},
                                           rule={"kind": "center"}))
        assert rep.theorem_bound is None and rep.note.startswith("no bound applies")

    @pytest.mark.parametrize("seed", range(10))
    def test_center_small_spreads_not_flagged(self, seed):
        # spread ratios drift by ~1e-11 once spreads reach 1e-6; the check is absolute
        rep, _ = analysis.bound_suite(make(n=5, epsilon=1e-9, seed=seed, model={"kind": "sender_faulty", "f": 1},
                                           rule={"kind": "center"}))
        assert rep.bound_satisfied

    def test_unsolvable(self):
        rep, tr = analysis.bound_suite(make(n=4, cap=200, model={"kind": "non_rooted_witness"},
                                            init={"kind": "split_halves"}))
        assert rep.observed_round is None and rep.bound_satisfied is None
        assert rep.note.startswith(analysis.UNSOLVABLE_NOTE)
        assert (tr.delta_history == 1).all()

    def test_macro(self):
        rep, _ = analysis.bound_suite(make(n=5, epsilon=1e-6, model={"kind": "rooted"},
                                           rule={"kind": "macro_round"}))
        assert rep.bound_satisfied and rep.bound_name == "macro-round"

    def test_delayed(self):
        rep, _ = analysis.bound_suite(make(n=4, epsilon=1e-3, model={"kind": "nonsplit"},
                                           delay={"delta": 2, "policy": "max"}))
        assert rep.bound_name == "nonsplit-delayed" and rep.bound_satisfied

    def test_decisions_recorded(self):
        rep, tr = analysis.bound_suite(make(n=6, epsilon=1e-3, cap=100, model={"kind": "complete"}))
        assert rep.bound_satisfied
        assert rep.delta_at_decision is not None and rep.delta_at_decision <= 1e-3


class TestButterfly:
    def test_m5_values(self):
        r = analysis.butterfly_experiment(5)
        assert r.pi_min == pytest.approx(3 / 80, abs=1e-12)
        assert abs(r.bottleneck_half - 1 / 40) <= 1e-15
        assert r.perron_error <= 1e-12 and r.primitive
        assert r.cheeger <= r.bottleneck_half + 1e-15

    def test_growth(self):
        ts = [analysis.butterfly_experiment(m).time_to_epsilon for m in range(3, 7)]
        assert all(b >= 1.8 * a for a, b in zip(ts, ts[1:]))

    def test_range(self):
        with pytest.raises(BudgetError):
            analysis.butterfly_experiment(2)
        with pytest.raises(BudgetError):
            analysis.butterfly_experiment(13)

    def test_time_to_epsilon_oracle(self):
        w = stochmat.equal_neighbor_matrix(models.butterfly(3))
        k = analysis.time_to_epsilon(w, 1e-3)
        assert stochmat.delta_coeff(np.linalg.matrix_power(w, k)) <= 1e-3
        assert stochmat.delta_coeff(np.linalg.matrix_power(w, k - 1)) > 1e-3


class TestMacroComparison:
    def test_complete(self):
        c = analysis.macro_vs_plain_comparison(models.ConstantPattern(digraph.complete(5)), 5, 1e-6)
        assert c.plain_rounds <= 4 and c.macro_rounds <= 4 and c.products_match

    def test_butterfly(self):
        m = 6
        c = analysis.macro_vs_plain_comparison(models.ConstantPattern(models.butterfly(m)), 2 * m, 1e-3)
        assert c.products_match and c.macro_rounds < c.plain_rounds / 2

    def test_rooted(self):
        c = analysis.macro_vs_plain_comparison(models.Pattern(models.NetworkModel("rooted", 6), 0), 6, 1e-4)
        assert c.products_match and c.macro_rounds is not None
