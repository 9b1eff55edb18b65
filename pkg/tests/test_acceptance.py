"""Acceptance criteria, one test each, with their tolerances and time limits.

Every test prints a PASS/FAIL line in the terminal summary.
"""
import itertools
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from dynagree import algorithms as alg, analysis, digraph, engine, models, scenario, stochmat
from dynagree.errors import FaultBudgetError

from conftest import brute_roots, random_stochastic

pytestmark = pytest.mark.filterwarnings("error")


@contextmanager
def timed(record_property, limit):
    t0 = time.perf_counter()
    box = {}
    yield box
    box["elapsed"] = elapsed = time.perf_counter() - t0
    record_property("elapsed", elapsed)
    assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"


@pytest.mark.acceptance(1, "rootedness matches brute-force reachability (n=3, n=4)")
def test_rootedness_oracle(record_property):
    graphs = list(digraph.all_comm_graphs(3)) + list(digraph.all_comm_graphs(4))
    assert len(graphs) == 64 + 4096
    expected = [brute_roots(g) for g in graphs]
    with timed(record_property, 1.0):
        got = [(digraph.roots(g), digraph.is_rooted(g)) for g in graphs]
    for (r, rooted), want in zip(got, expected):
        assert r == want and rooted == bool(want)


@pytest.mark.acceptance(2, "products of n-1 rooted graphs are nonsplit")
def test_rooted_products_nonsplit(record_property):
    with timed(record_property, 30.0):
        rooted3 = [g for g in digraph.all_comm_graphs(3) if digraph.is_rooted(g)]
        for a, b in itertools.product(rooted3, repeat=2):
            assert digraph.is_nonsplit(digraph.compose([a, b]))
        for n in range(4, 8):
            rng = np.random.default_rng(n)
            for i in range(1000):
                density = 0.0 if i % 2 else rng.uniform(0, 0.3)
                seq = [models.sample_rooted(n, rng, density) for _ in range(n - 1)]
                assert digraph.is_nonsplit(digraph.compose(seq))


@pytest.mark.acceptance(3, "n=4: >= 7 off-diagonal links is rooted; 2n-2 targeted faults is not")
def test_link_fault_threshold(record_property):
    n = 4
    with timed(record_property, 10.0):
        dense = [g for g in digraph.all_comm_graphs(n) if digraph.offdiag_link_count(g) >= n * n - 3 * n + 3]
        assert dense and all(digraph.is_rooted(g) for g in dense)
        witness = models.complete_with_link_faults(n, 2 * n - 2, 0, "adversarial_bipartition")
        assert digraph.offdiag_link_count(witness) == n * n - 3 * n + 2
        assert not digraph.is_rooted(witness)


@pytest.mark.acceptance(4, "nonsplit bound, n=8, eps=1e-6, 100 seeds, <= 111 rounds")
def test_nonsplit_bound(record_property):
    with timed(record_property, 10.0):
        for seed in range(100):
            s = scenario.from_dict({"n": 8, "epsilon": 1e-6, "seed": seed, "model": {"kind": "nonsplit"}})
            rep, _ = analysis.bound_suite(s)
            assert rep.theorem_bound == 111 == math.ceil(8 * math.log(1e6))
            assert rep.bound_satisfied and rep.observed_round <= 111


@pytest.mark.acceptance(5, "rooted patterns, n=5, eps=1e-3, 100 seeds, converge before the cap")
def test_coordinated_bound(record_property):
    cap = math.ceil(5 * 5**5 * math.log(1e3)) + 4
    with timed(record_property, 60.0):
        for seed in range(100):
            s = scenario.from_dict({"n": 5, "epsilon": 1e-3, "seed": seed, "model": {"kind": "rooted"}})
            rep, _ = analysis.bound_suite(s)
            assert rep.theorem_bound == cap
            assert rep.bound_satisfied and rep.observed_round <= cap


@pytest.mark.acceptance(6, "sender-faulty n=6: round coefficients <= f/n; f=2 within 20 rounds")
def test_sender_faulty(record_property):
    n = 6
    with timed(record_property, 10.0):
        for f in range(1, n):
            for strategy in models.SENDER_FAULT_STRATEGIES:
                for seed in range(5):
                    pattern = models.Pattern(models.NetworkModel("sender_faulty", n, f=f, strategy=strategy), seed)
                    for k in range(1, 60):
                        w = alg.EqualNeighbor().matrix(pattern(k))
                        assert stochmat.delta_coeff(w) <= f / n + 1e-12
        bound = math.ceil(math.log2(1e6))
        assert bound == 20
        for strategy in models.SENDER_FAULT_STRATEGIES:
            for seed in range(30):
                s = scenario.from_dict({"n": n, "epsilon": 1e-6, "seed": seed,
                                        "model": {"kind": "sender_faulty", "f": 2, "strategy": strategy}})
                rep, _ = analysis.bound_suite(s)
                assert rep.theorem_bound == bound and rep.bound_satisfied
                assert rep.observed_round <= bound


@pytest.mark.acceptance(7, "Reduce and Center per-round contraction, n=5, f=2, 1000 rounds")
def test_trimmed_contraction(record_property):
    # Reduce is checked on the weight matrix; Center on the spread, see the
    # counterexample in test_algorithms for why its matrix coefficient can be 2/3
    n, f = 5, 2
    rng = np.random.default_rng(7)
    with timed(record_property, 10.0):
        for k in range(1000):
            g = models.sender_faulty_round(n, f, rng, models.SENDER_FAULT_STRATEGIES[k % 3], k)
            x = rng.random(n)
            received = np.broadcast_to(x, (n, n))
            w = alg.Reduce(f).matrix(g, received)
            assert stochmat.delta_coeff(w) <= f / (n - f) + 1e-12
            w = alg.Center(f).matrix(g, received)
            ratio = stochmat.delta_seminorm(stochmat.ordered_matvec(w, x)) / stochmat.delta_seminorm(x)
            assert ratio <= f / (2 * (n - f)) + 1e-12


@pytest.mark.acceptance(8, "butterfly: Perron closed form, half-split bottleneck, time growth >= 1.8")
def test_butterfly(record_property):
    with timed(record_property, 120.0):
        reports = {m: analysis.butterfly_experiment(m, 1e-3) for m in range(3, 10)}
    for m in range(3, 9):
        r = reports[m]
        assert r.perron_error <= 1e-12
        assert abs(r.bottleneck_half - 1 / (5 * 2 ** (m - 2))) <= 1e-15
    for m in range(4, 9):
        assert reports[m + 1].time_to_epsilon >= 1.8 * reports[m].time_to_epsilon


@pytest.mark.acceptance(9, "virtual reduction matches delayed runs (500 scenarios); delta=1 bit-exact")
def test_virtual_reduction(record_property):
    rng = np.random.default_rng(9)
    kinds = ["rooted", "nonsplit", "sender_faulty", "complete_link_faults"]
    policies = ["uniform_random", "max", "alternating", "zero"]
    with timed(record_property, 60.0):
        for i in range(500):
            n = int(rng.integers(2, 7))
            delta = int(rng.integers(1, 5))
            kind = kinds[i % 4]
            model = models.NetworkModel(kind, n, f=int(rng.integers(0, n)) if kind == "sender_faulty" else 0,
                                        budget=int(rng.integers(0, 2 * n - 2)) if kind == "complete_link_faults" else 0)
            rule = alg.EqualNeighbor() if i % 3 else alg.FixedWeight()
            sched = engine.DelaySchedule(delta, policies[(i // 4) % 4], seed=i)
            x0 = rng.random(n)
            pattern = models.Pattern(model, i)
            ref = engine.run_delayed(pattern, rule, x0, sched, 200)
            _, rep = engine.run_virtual(pattern, rule, x0, sched, 200, reference=ref)
            assert rep.max_abs_diff <= 1e-12 and rep.shifted_ok
            if delta == 1:
                sync = engine.run_synchronous(pattern, rule, x0, 200)
                assert np.array_equal(sync.x, ref.x)


@pytest.mark.acceptance(10, "delayed nonsplit bound, delta=2, n=4, max delay, 100 seeds")
def test_delayed_bound(record_property):
    bound = math.ceil(3 * 4**3 * math.log(1e3)) + 2
    with timed(record_property, 60.0):
        for seed in range(100):
            s = scenario.from_dict({"n": 4, "epsilon": 1e-3, "seed": seed, "model": {"kind": "nonsplit"},
                                    "delay": {"delta": 2, "policy": "max"}})
            rep, _ = analysis.bound_suite(s)
            assert rep.theorem_bound == bound
            assert rep.bound_satisfied and rep.observed_round <= bound


@pytest.mark.acceptance(11, "non-rooted witness keeps the spread at exactly 1 for 1000 rounds")
def test_impossibility(record_property):
    n = 5
    g = models.non_rooted_witness(n)
    x0 = scenario.from_dict({"n": n, "init": {"kind": "split_halves"}}).initial_values()
    pattern = models.ConstantPattern(g)
    with timed(record_property, 5.0):
        for rule in (alg.EqualNeighbor(), alg.FixedWeight(), alg.Center(n - 1)):
            tr = engine.run_synchronous(pattern, rule, x0, 1000)
            assert (tr.delta_history == 1.0).all()
        macro = engine.run_macro(pattern, x0, 1000 // (n - 1))
        assert (macro.delta_history == 1.0).all()
        # sources hear a single value, below what Reduce needs for any f < n/2
        with pytest.raises(FaultBudgetError):
            engine.run_synchronous(pattern, alg.Reduce(2), x0, 1)


@pytest.mark.acceptance(12, "ergodicity coefficient: contraction and sub-multiplicativity, 10^4 instances")
def test_stochmat_properties(record_property):
    rng = np.random.default_rng(12)
    with timed(record_property, 10.0):
        for i in range(10**4):
            n = int(rng.integers(2, 9))
            sparsity = rng.uniform(0, 0.8)
            a = random_stochastic(rng, n, sparsity)
            b = random_stochastic(rng, n, sparsity)
            x = rng.random(n)
            da = stochmat.delta_coeff(a)
            assert stochmat.delta_seminorm(a @ x) <= da * stochmat.delta_seminorm(x) + 1e-15
            assert stochmat.delta_coeff(a @ b) <= da * stochmat.delta_coeff(b) + 1e-15
