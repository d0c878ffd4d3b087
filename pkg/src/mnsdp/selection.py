"""Feasibility-rule comparison and the two-stage environmental selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import Evaluation
from .errors import ParameterError
from .topology import Topology

__all__ = [
    "Individual",
    "Population",
    "feasible_rule_better",
    "best_index",
    "environmental_selection",
]


@dataclass(frozen=True)
class Individual:
    topology: Topology
    eval: Evaluation

    @property
    def objective(self) -> float:
        return self.eval.objective

    @property
    def violation(self) -> float:
        return self.eval.violation

    @property
    def feasible(self) -> bool:
        return self.eval.feasible


Population = list[Individual]


def feasible_rule_better(a: Individual, b: Individual) -> bool:
    """True iff ``a`` strictly beats ``b`` under the basic feasibility rules.

    Feasible beats infeasible; two feasible solutions compare by objective;
    two infeasible ones by violation. Ties are never "better".
    """
    if a.feasible != b.feasible:
        return a.feasible
    if a.feasible:
        return a.objective < b.objective
    return a.violation < b.violation


def best_index(pop: Population) -> int:
    """Index of the best member; the earliest one wins ties."""
    best = 0
    for i in range(1, len(pop)):
        if feasible_rule_better(pop[i], pop[best]):
            best = i
    return best


def environmental_selection(
    pop: Population,
    off: Population,
    batchsize: int,
    rng: np.random.Generator,
) -> Population:
    """Merge offspring into the population in two stages.

    Stage 1 installs ``off[i]`` in slot ``i`` when its violation is strictly
    smaller than the parent's. Offspring with a larger violation but a
    strictly smaller objective than their (original) parent form an archive.
    Stage 2 runs ``len(pop) // batchsize`` rounds: sample ``batchsize`` slots
    with replacement and up to ``batchsize`` archive entries without
    replacement; if the most violated sampled slot has a larger objective
    than the least violated sampled archive entry, the entry takes the slot
    and leaves the archive.
    """
    N = len(pop)
    if len(off) != N:
        raise ParameterError(f"population has {N} members but offspring has {len(off)}")
    if not (1 <= batchsize <= N):
        raise ParameterError(f"batchsize must be in [1, {N}], got {batchsize}")

    out = list(pop)
    archive = []
    for i, (parent, child) in enumerate(zip(pop, off)):
        if child.violation < parent.violation:
            out[i] = child
        elif child.violation > parent.violation and child.objective < parent.objective:
            archive.append(child)

    if not archive:
        return out

    for _ in range(N // batchsize):
        if not archive:
            break
        slots = rng.integers(N, size=batchsize)
        picks = rng.choice(len(archive), size=min(batchsize, len(archive)), replace=False)
        worst = int(slots[0])
        for s in slots[1:]:
            if out[s].violation > out[worst].violation:
                worst = int(s)
        best = int(picks[0])
        for a in picks[1:]:
            if archive[a].violation < archive[best].violation:
                best = int(a)
        if out[worst].objective > archive[best].objective:
            out[worst] = archive.pop(best)
    return out
