"""Heuristic construction of feasible, short topologies.

Start from the complete graph and repeatedly try to delete an edge: pick a
random node ``p``, pick one of its neighbours by roulette wheel weighted by
edge length (long circuits go first) and keep the deletion if the topology
stays feasible. The loop stops after ``n`` consecutive rejected deletions.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .constraints import Evaluator, _model, complete_graph_feasible
from .errors import ParameterError, UnsatisfiableError
from .instance import Instance
from .selection import Individual
from .topology import Topology

__all__ = [
    "PruneState",
    "heuristic_solution",
    "init_population",
    "roulette_wheel",
    "init_stream",
]


class PruneState:
    """Exact feasibility bookkeeping for deleting edges from the complete graph.

    ``deletion_feasible(p, q)`` answers whether the topology stays feasible
    without edge ``(p, q)``; it only re-checks constraints that mention
    ``p`` or ``q``, which are the only ones the edge enters.
    """

    def __init__(self, inst: Instance):
        m = _model(inst)
        self.n = inst.n
        self._s = np.ascontiguousarray(m.s.T.astype(np.int64))
        self._ld = np.ascontiguousarray(m.ld.T.astype(np.int64))
        self._klass = np.ascontiguousarray(inst.k_class, dtype=np.int64)
        self._v3 = np.flatnonzero(self._klass == 3)
        self._S, self._Q, self._T, self._pos3 = _kernels.init_complete(self._s, self._klass)
        self.adj = np.ones((self.n, self.n), dtype=np.bool_)
        np.fill_diagonal(self.adj, False)

    def deletion_feasible(self, p: int, q: int) -> bool:
        if not self.adj[p, q]:
            raise ParameterError(f"edge ({p}, {q}) is not present")
        return bool(
            _kernels.deletion_feasible(
                self.adj, self._S, self._Q, self._T, self._pos3,
                self._s, self._ld, self._klass, p, q,
            )
        )

    def delete(self, p: int, q: int) -> None:
        _kernels.apply_deletion(self.adj, self._S, self._Q, self._T, self._v3, self._s, p, q)

    def topology(self) -> Topology:
        return Topology.from_matrix(self.adj.astype(np.uint8))


def roulette_wheel(weights: np.ndarray, rng: np.random.Generator) -> int:
    """Index drawn with probability proportional to ``weights``.

    All-zero weights (coincident nodes) fall back to a uniform draw.
    """
    total = float(np.sum(weights))
    if total <= 0:
        return int(rng.integers(len(weights)))
    cum = np.cumsum(weights)
    k = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(k, len(weights) - 1)


def heuristic_solution(
    inst: Instance,
    rng: np.random.Generator,
    patience: int | None = None,
    on_accept=None,
) -> Topology:
    """Prune the complete graph down to a short feasible topology.

    ``patience`` is the number of consecutive rejected deletions that ends
    the search (default ``n``). ``on_accept(p, q)`` is called after each
    accepted deletion; it is meant for tracing.
    """
    n = inst.n
    patience = n if patience is None else patience
    if not complete_graph_feasible(inst):
        raise UnsatisfiableError(f"{inst.name}: the complete graph is infeasible")
    state = PruneState(inst)
    adj = state.adj
    degree = adj.sum(axis=1)
    D = inst.distance

    count = 0
    while count < patience:
        live = np.flatnonzero(degree > 0)
        if live.size == 0:
            break
        p = int(live[rng.integers(live.size)])
        nbrs = np.flatnonzero(adj[p])
        q = int(nbrs[roulette_wheel(D[p, nbrs], rng)])
        if state.deletion_feasible(p, q):
            state.delete(p, q)
            degree[p] -= 1
            degree[q] -= 1
            count = 0
            if on_accept is not None:
                on_accept(p, q)
        else:
            count += 1
    return state.topology()


def init_stream(seed: int, index: int) -> np.random.Generator:
    """Random stream for the ``index``-th initial individual."""
    return np.random.default_rng([int(seed), 0, int(index)])


def init_population(
    inst: Instance,
    size: int,
    seed: int,
    evaluator: Evaluator | None = None,
    patience: int | None = None,
) -> list[Individual]:
    """``size`` independent heuristic solutions, each with its evaluation.

    Each individual draws from its own stream, so the result does not depend
    on the order in which individuals are built.
    """
    if size < 2:
        raise ParameterError(f"population size must be >= 2, got {size}")
    evaluator = evaluator or Evaluator(inst)
    pop = []
    for i in range(size):
        t = heuristic_solution(inst, init_stream(seed, i), patience)
        pop.append(Individual(t, evaluator(t)))
    return pop
