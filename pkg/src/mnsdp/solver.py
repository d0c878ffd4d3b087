"""Main optimisation loop, exhaustive reference solver and convergence logs."""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .constraints import Evaluator, complete_graph_feasible, evaluate
from .errors import ConfigError, ParameterError, UnsatisfiableError
from .initializer import init_population
from .instance import Instance
from .selection import (
    Individual,
    Population,
    best_index,
    environmental_selection,
    feasible_rule_better,
)
from .topology import Topology, _triu
from .variation import OPERATORS, VariationParams, standstill_mutation

__all__ = [
    "SolverConfig",
    "GenerationRecord",
    "RunResult",
    "solve",
    "brute_force",
    "write_convergence_csv",
    "CSV_HEADER",
    "BRUTE_FORCE_MAX_PAIRS",
]

CSV_HEADER = ["generation", "evaluations", "best_objective", "best_violation", "feasible_count"]
BRUTE_FORCE_MAX_PAIRS = 22


@dataclass(frozen=True)
class SolverConfig:
    """Run settings. ``None`` fields are filled from the node count by :meth:`resolve`.

    Defaults: population ``20 n``, budget ``n * population`` evaluations,
    batch size ``min(10, population)``.
    """

    population_size: int | None = None
    max_evaluations: int | None = None
    F: float = 0.2
    CR: float = 0.5
    row_rate: float | None = None
    batchsize: int | None = None
    standstill_threshold: int = 20
    seed: int = 0
    operator: str = "matrix-de"

    def resolve(self, n: int) -> "SolverConfig":
        N = 20 * n if self.population_size is None else self.population_size
        budget = n * N if self.max_evaluations is None else self.max_evaluations
        batch = min(10, N) if self.batchsize is None else self.batchsize
        cfg = replace(self, population_size=N, max_evaluations=budget, batchsize=batch)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        N = self.population_size
        if N is None or N < 2:
            raise ConfigError(f"population_size must be >= 2, got {N}")
        if self.max_evaluations is None or self.max_evaluations < N:
            raise ConfigError(
                f"max_evaluations ({self.max_evaluations}) must cover the initial "
                f"population ({N})"
            )
        if self.batchsize is None or not (1 <= self.batchsize <= N):
            raise ConfigError(f"batchsize must be in [1, {N}], got {self.batchsize}")
        if self.standstill_threshold < 1:
            raise ConfigError("standstill_threshold must be >= 1")
        if self.operator not in OPERATORS:
            raise ConfigError(
                f"unknown operator {self.operator!r}; choose from {sorted(OPERATORS)}"
            )
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        try:
            self.variation_params()
        except ParameterError as exc:
            raise ConfigError(str(exc)) from exc

    def variation_params(self) -> VariationParams:
        return VariationParams(F=self.F, CR=self.CR, row_rate=self.row_rate)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    evaluations: int
    best_objective: float  # incumbent objective, nan until a feasible solution exists
    best_violation: float  # smallest violation in the population
    feasible_count: int


@dataclass
class RunResult:
    best: Individual
    history: list[GenerationRecord]
    wall_time: float
    evaluations: int
    config: SolverConfig = field(repr=False, default=None)


def _record(gen, evaluations, incumbent, pop) -> GenerationRecord:
    return GenerationRecord(
        generation=gen,
        evaluations=evaluations,
        best_objective=incumbent.objective if incumbent.feasible else math.nan,
        best_violation=min(ind.violation for ind in pop),
        feasible_count=sum(ind.feasible for ind in pop),
    )


def _stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *keys])


def solve(inst: Instance, cfg: SolverConfig | None = None, callback=None) -> RunResult:
    """Minimise total circuit length subject to the reliability constraints.

    Runs until the evaluation budget is spent; the last generation is always
    completed, so the count can overshoot by less than one population. The
    returned solution is the best one ever evaluated under the feasibility
    rules, not merely the best survivor. ``callback(record)`` is invoked
    after every generation.
    """
    cfg = (cfg or SolverConfig()).resolve(inst.n)
    if not complete_graph_feasible(inst):
        raise UnsatisfiableError(f"{inst.name}: the complete graph is infeasible")
    start = time.perf_counter()
    N = cfg.population_size
    operator = OPERATORS[cfg.operator]
    params = cfg.variation_params()
    ev = Evaluator(inst)

    pop = init_population(inst, N, cfg.seed, ev)
    incumbent = pop[best_index(pop)]
    history = [_record(0, ev.count, incumbent, pop)]
    if callback:
        callback(history[-1])

    stagnation = 0
    gen = 0
    while ev.count < cfg.max_evaluations:
        gen += 1
        previous = incumbent
        best_topology = incumbent.topology
        offspring: Population = []
        for i in range(N):
            rng = _stream(cfg.seed, 1, gen, i)
            d = int(rng.integers(N - 1))
            d += d >= i
            child = operator(pop[i].topology, pop[d].topology, best_topology, params, rng)
            ind = Individual(child, ev(child))
            offspring.append(ind)
            if feasible_rule_better(ind, incumbent):
                incumbent = ind

        pop = environmental_selection(pop, offspring, cfg.batchsize, _stream(cfg.seed, 2, gen))
        if ev.count < cfg.max_evaluations:
            pop = standstill_mutation(
                pop, stagnation, cfg.standstill_threshold, _stream(cfg.seed, 3, gen), ev
            )
            for ind in pop:
                if feasible_rule_better(ind, incumbent):
                    incumbent = ind

        stagnation = 0 if feasible_rule_better(incumbent, previous) else stagnation + 1
        history.append(_record(gen, ev.count, incumbent, pop))
        if callback:
            callback(history[-1])

    return RunResult(
        best=incumbent,
        history=history,
        wall_time=time.perf_counter() - start,
        evaluations=ev.count,
        config=cfg,
    )


def brute_force(inst: Instance) -> tuple[Topology, float]:
    """Exact optimum by enumerating every topology (``n(n-1)/2 <= 22`` pairs).

    Candidates are scanned in increasing order of length, so only the
    cheapest ones are checked for feasibility. Ties in length go to the
    lexicographically smallest edge list.
    """
    n = inst.n
    m = n * (n - 1) // 2
    if m > BRUTE_FORCE_MAX_PAIRS:
        raise ParameterError(
            f"brute force limited to {BRUTE_FORCE_MAX_PAIRS} pairs, instance has {m}"
        )
    iu, ju = _triu(n)
    d = inst.distance[iu, ju]
    masks = np.arange(1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(bool)
    approx = bits @ d
    order = np.argsort(approx, kind="stable")
    tol = 1e-9 * (1.0 + float(d.sum()))

    found: list[tuple[float, list, Topology]] = []
    limit = math.inf
    for k in order:
        if approx[k] > limit:
            break
        t = Topology(n, bits[k])
        e = evaluate(t, inst)
        if e.feasible:
            found.append((e.objective, t.edges(), t))
            limit = min(limit, approx[k] + tol)
    if not found:
        raise UnsatisfiableError(f"{inst.name}: no feasible topology exists")
    objective, _, topo = min(found, key=lambda f: (f[0], f[1]))
    return topo, objective


def write_convergence_csv(history, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in history:
            w.writerow(
                [
                    r.generation,
                    r.evaluations,
                    f"{r.best_objective:.6f}",
                    f"{r.best_violation:.6f}",
                    r.feasible_count,
                ]
            )
