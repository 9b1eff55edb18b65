import itertools

import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("ci", deadline=None, max_examples=200)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=20)
hypothesis.settings.load_profile("ci")


def reach_closure(adj):
    """Floyd-Warshall reachability on a plain list-of-lists copy (oracle)."""
    n = len(adj)
    r = [[bool(adj[i][j]) or i == j for j in range(n)] for i in range(n)]
    for k, i, j in itertools.product(range(n), repeat=3):
        if r[i][k] and r[k][j]:
            r[i][j] = True
    return r


def brute_roots(g):
    r = reach_closure(g.adj.tolist())
    return frozenset(p for p in range(g.n) if all(r[p]))


def brute_nonsplit(g):
    a = g.adj.tolist()
    n = len(a)
    return all(any(a[r][p] and a[r][q] for r in range(n)) for p in range(n) for q in range(n))


def random_stochastic(rng, n, sparsity=0.0):
    w = rng.random((n, n))
    w[rng.random((n, n)) < sparsity] = 0.0
    w[np.arange(n), np.arange(n)] += 1e-3
    return w / w.sum(axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    elapsed = dict(item.user_properties).get("elapsed")
    took = f" ({elapsed:.2f}s)" if elapsed is not None else ""
    status = "PASS" if rep.passed else "FAIL"
    _acceptance_lines.append((number, f"[{status}] criterion {number:2d}: {title}{took}"))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)
