"""Row-stochastic matrices: ergodicity coefficient, products, Perron vectors,
Cheeger constants and second eigenvalues.

Matrices are plain ``numpy`` float64 arrays.  Row ``p`` holds the weights
process ``p`` applies to the values it receives, so ``W[p, q] = w_qp``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import digraph
from .errors import BudgetError, DomainError, IterationError, ValidationError

ROW_SUM_TOL = 1e-12
PRODUCT_DRIFT_TOL = 1e-9
CHEEGER_MAX_N = 24


def check_stochastic(w, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Return ``w`` as a float array, raising if it is not row-stochastic."""
    a = np.asarray(w, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValidationError("matrix has non-finite entries")
    if (a < 0).any():
        raise ValidationError("matrix has negative entries")
    drift = np.abs(a.sum(axis=1) - 1.0)
    if drift.max() > tol:
        p = int(drift.argmax())
        raise ValidationError(f"row {p} sums to {a[p].sum()!r}, off by {drift[p]:.3g}")
    return a


def from_weights(n: int, weights: Mapping[int, Mapping[int, float]]) -> np.ndarray:
    """Assemble ``W`` from per-receiver weight maps ``{p: {q: w_qp}}``.

    Receivers missing from ``weights`` keep only their own value.
    """
    w = np.zeros((n, n))
    for p in range(n):
        row = weights.get(p, {p: 1.0})
        for q, v in row.items():
            if not 0 <= q < n:
                raise ValidationError(f"sender {q} outside 0..{n - 1}")
            if v < 0:
                raise ValidationError(f"negative weight {v} from {q} to {p}")
            w[p, q] = v
    return check_stochastic(w)


def associated_graph(w) -> digraph.Digraph:
    """Communication graph of ``w``: link ``q -> p`` iff ``W[p, q] > 0``.

    This is the orientation in which ``associated_graph(W(k)) == G(k)``;
    transpose the adjacency for the ``p -> q iff W[p, q] > 0`` reading.
    """
    return digraph.Digraph(np.asarray(w).T > 0)


def equal_neighbor_matrix(g: digraph.Digraph) -> np.ndarray:
    a = g.adj.T.astype(np.float64)
    return a / a.sum(axis=1, keepdims=True)


def ordered_matvec(w, x) -> np.ndarray:
    """``w @ x`` accumulated column by column in index order.

    Gives bit-reproducible results independent of the BLAS used: every row
    sum is formed left to right over senders ``0 .. n-1``.
    """
    w = np.asarray(w)
    out = np.zeros(w.shape[0])
    for q in range(w.shape[1]):
        out += w[:, q] * x[q]
    return out


def delta_seminorm(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    return float(x.max() - x.min())


def delta_coeff(w) -> float:
    """Dobrushin's coefficient of ergodicity ``1 - min_{p,q} sum_r min(W_pr, W_qr)``."""
    a = np.asarray(w, dtype=np.float64)
    n = a.shape[0]
    overlap = 1.0
    for p in range(n):
        s = np.minimum(a[p], a[p:]).sum(axis=1).min()
        overlap = min(overlap, s)
    return float(min(1.0, max(0.0, 1.0 - overlap)))


def backward_product(ws: Sequence) -> np.ndarray:
    """``W(l) ... W(k)`` for ``ws = [W(k), ..., W(l)]`` (oldest first).

    No renormalisation is applied; the result is checked for row-sum drift
    against :data:`PRODUCT_DRIFT_TOL`.
    """
    if len(ws) == 0:
        raise DomainError("empty product")
    out = np.asarray(ws[0], dtype=np.float64)
    for m in ws[1:]:
        m = np.asarray(m, dtype=np.float64)
        if m.shape != out.shape:
            raise DomainError(f"size mismatch: {m.shape} vs {out.shape}")
        out = m @ out
    check_stochastic(out, tol=PRODUCT_DRIFT_TOL)
    return out


def is_primitive(w) -> bool:
    """Strongly connected associated graph with a cycle-length gcd of 1."""
    g = associated_graph(w)
    if not digraph.is_strongly_connected(g):
        return False
    if g.adj.diagonal().any():
        return True
    # Period of a strongly connected graph: gcd of level differences along edges.
    n = g.n
    level = [-1] * n
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for v in frontier:
            for u in np.flatnonzero(g.adj[v]).tolist():
                if level[u] == -1:
                    level[u] = level[v] + 1
                    nxt.append(u)
        frontier = nxt
    period = 0
    for p, q in g.sorted_edges():
        period = math.gcd(period, level[p] + 1 - level[q])
    return period == 1


def perron_vector(w, tol: float = 1e-12, max_iter: int = 10**6, method: str = "power") -> np.ndarray:
    """Positive ``pi`` with ``W.T @ pi == pi`` and ``sum(pi) == 1``.

    ``method="power"`` iterates ``pi <- W.T pi`` with 1-norm renormalisation
    until ``||W.T pi - pi||_inf <= tol``.  ``method="gth"`` uses
    Grassmann-Taksar-Heyman elimination, which is subtraction free and
    accurate to a few ulps entrywise.
    """
    a = check_stochastic(w)
    if not is_primitive(a):
        raise DomainError("matrix is not primitive")
    if method == "gth":
        pi = _gth(a)
    elif method == "power":
        pi = _power(a, tol, max_iter)
    else:
        raise DomainError(f"unknown method {method!r}")
    return pi


def _power(a, tol, max_iter):
    n = a.shape[0]
    at = a.T
    pi = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = at @ pi
        nxt /= nxt.sum()
        if np.abs(at @ nxt - nxt).max() <= tol:
            return nxt
        pi = nxt
    raise IterationError(f"power iteration did not reach {tol:g} in {max_iter} steps")


def _gth(a):
    p = a.copy()
    n = p.shape[0]
    for k in range(n - 1, 0, -1):
        s = p[k, :k].sum()
        p[:k, k] /= s
        p[:k, :k] += np.outer(p[:k, k], p[k, :k])
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ p[:k, k]
    return pi / pi.sum()


def bottleneck_ratio(w, pi, subset) -> float:
    """``pi(S)^-1 * sum_{p in S} sum_{q not in S} pi_q W_pq``."""
    a = np.asarray(w, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    inside = np.zeros(a.shape[0], dtype=bool)
    inside[list(subset)] = True
    mass = pi[inside].sum()
    flow = (a[np.ix_(inside, ~inside)] * pi[~inside]).sum()
    return float(flow / mass)


def cheeger_constant(w, pi) -> tuple[float, frozenset]:
    """Minimum bottleneck ratio over all ``S`` with ``0 < pi(S) <= 1/2``.

    Exhaustive over subsets, hence limited to ``n <= 24``.  Returns the value
    and a minimising subset.
    """
    a = np.asarray(w, dtype=np.float64)
    n = a.shape[0]
    if n > CHEEGER_MAX_N:
        raise BudgetError(f"cheeger_constant enumerates 2**n subsets; n={n} > {CHEEGER_MAX_N}")
    pi = np.asarray(pi, dtype=np.float64)
    best, best_set = math.inf, frozenset()
    for r in range(1, n + 1):
        for s in itertools.combinations(range(n), r):
            mass = pi[list(s)].sum()
            if not 0 < mass <= 0.5:
                continue
            v = bottleneck_ratio(a, pi, s)
            if v < best:
                best, best_set = v, frozenset(s)
    return best, best_set


def second_eigenvalue_modulus(w) -> float:
    """Largest ``|lambda|`` over eigenvalues other than the Perron root 1."""
    a = check_stochastic(w)
    if not is_primitive(a):
        raise DomainError("matrix is not primitive")
    ev = np.linalg.eigvals(a)
    # Drop the single eigenvalue closest to 1.
    i = int(np.argmin(np.abs(ev - 1.0)))
    rest = np.delete(ev, i)
    if rest.size == 0:
        return 0.0
    return float(min(1.0, np.abs(rest).max()))


@dataclass(frozen=True)
class SpectralReport:
    perron: np.ndarray
    second_modulus: float
    cheeger: float
    cheeger_set: frozenset
    pi_min: float

    @property
    def spectral_gap(self) -> float:
        return 1.0 - self.second_modulus


def spectral_report(w, tol: float = 1e-12) -> SpectralReport:
    pi = perron_vector(w, tol=tol)
    phi, s = cheeger_constant(w, pi)
    return SpectralReport(pi, second_eigenvalue_modulus(w), phi, s, float(pi.min()))


# -- CSV ---------------------------------------------------------------------

def to_csv(w) -> str:
    """Row-major CSV with shortest round-trip decimal entries."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in np.asarray(w, dtype=np.float64):
        writer.writerow(repr(float(v)) for v in row)
    return buf.getvalue()


def from_csv(text: str, validate: bool = True) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    try:
        a = np.array([[float(v) for v in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"bad matrix CSV: {exc}") from None
    return check_stochastic(a) if validate else a
