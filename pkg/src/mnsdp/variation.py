"""Offspring generation for binary-matrix individuals.

``matrix_de_offspring`` works on whole rows of the adjacency matrix: each
row ``j`` is picked with probability ``row_rate`` and every entry of a
picked row comes from the best solution (probability ``F``), else from the
donor (probability ``CR``), else from the parent. Because only one bit is
stored per unordered pair, rewriting row ``j`` rewrites column ``j`` too.

``per_bit_de_offspring`` applies the same three-way rule to every pair
independently; it is the ablation baseline without row grouping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import Evaluator
from .errors import ParameterError
from .selection import Individual, Population, best_index
from .topology import Topology, pair_index

__all__ = [
    "VariationParams",
    "PARENT",
    "DONOR",
    "BEST",
    "draw_row_sources",
    "matrix_de_offspring",
    "per_bit_de_offspring",
    "standstill_mutation",
    "OPERATORS",
]

PARENT, DONOR, BEST = 0, 1, 2


@dataclass(frozen=True)
class VariationParams:
    F: float = 0.2
    CR: float = 0.5
    row_rate: float | None = None  # None means 1/n

    def __post_init__(self):
        # closed intervals so the degenerate F=0 / CR=0 settings stay usable
        if not (0.0 <= self.F <= 1.0):
            raise ParameterError(f"F must lie in [0, 1], got {self.F}")
        if not (0.0 <= self.CR <= 1.0):
            raise ParameterError(f"CR must lie in [0, 1], got {self.CR}")
        if self.row_rate is not None and not (0.0 < self.row_rate <= 1.0):
            raise ParameterError(f"row_rate must lie in (0, 1], got {self.row_rate}")

    def rate(self, n: int) -> float:
        return 1.0 / n if self.row_rate is None else self.row_rate


def _same_n(*ts: Topology) -> int:
    n = ts[0].n
    for t in ts[1:]:
        if t.n != n:
            raise ParameterError(f"topologies over {n} and {t.n} nodes cannot be combined")
    return n


def _three_way(r1, r2, params):
    src = np.full(r1.shape, PARENT, dtype=np.int8)
    src[r2 <= params.CR] = DONOR
    src[r1 <= params.F] = BEST
    return src


def draw_row_sources(n: int, params: VariationParams, rng: np.random.Generator):
    """Random part of the row operator.

    Returns ``(rows, sources)``: the picked rows in ascending order and, for
    each, an ``n``-vector saying where entry ``(j, k)`` comes from
    (``PARENT``, ``DONOR`` or ``BEST``; the diagonal entry is meaningless).
    """
    picked = rng.random(n) < params.rate(n)
    rows = np.flatnonzero(picked)
    if rows.size == 0:
        rows = np.array([rng.integers(n)])
    r1 = rng.random((rows.size, n))
    r2 = rng.random((rows.size, n))
    return rows, _three_way(r1, r2, params)


def matrix_de_offspring(
    parent: Topology,
    donor: Topology,
    best: Topology,
    params: VariationParams,
    rng: np.random.Generator,
) -> Topology:
    n = _same_n(parent, donor, best)
    rows, sources = draw_row_sources(n, params, rng)
    idx = pair_index(n)
    choice = (parent.bits, donor.bits, best.bits)
    bits = parent.bits.copy()
    # rows are applied in order; a pair shared by two picked rows takes the later draw
    for j, src in zip(rows, sources):
        others = np.arange(n) != j
        pairs = idx[j, others]
        s = src[others]
        for code in (DONOR, BEST, PARENT):
            sel = s == code
            bits[pairs[sel]] = choice[code][pairs[sel]]
    return Topology(n, bits)


def per_bit_de_offspring(
    parent: Topology,
    donor: Topology,
    best: Topology,
    params: VariationParams,
    rng: np.random.Generator,
) -> Topology:
    n = _same_n(parent, donor, best)
    m = parent.bits.size
    src = _three_way(rng.random(m), rng.random(m), params)
    bits = np.where(
        src == BEST, best.bits, np.where(src == DONOR, donor.bits, parent.bits)
    )
    return Topology(n, bits)


OPERATORS = {
    "matrix-de": matrix_de_offspring,
    "per-bit-de": per_bit_de_offspring,
}


def standstill_mutation(
    pop: Population,
    stagnation: int,
    threshold: int,
    rng: np.random.Generator,
    evaluator: Evaluator,
) -> Population:
    """Random bit flips for every member but the best once progress stalls.

    Each pair flips with probability ``2 / (n (n - 1))``, one flip per
    individual on average. Members that changed are re-evaluated.
    """
    if threshold < 1:
        raise ParameterError(f"threshold must be >= 1, got {threshold}")
    if stagnation < threshold:
        return pop
    keep = best_index(pop)
    out = list(pop)
    for i, ind in enumerate(pop):
        if i == keep:
            continue
        m = ind.topology.bits.size
        flips = rng.random(m) < 1.0 / m
        if not flips.any():
            continue
        t = Topology(ind.topology.n, ind.topology.bits ^ flips)
        out[i] = Individual(t, evaluator(t))
    return out
