import numpy as np
import pytest

from mnsdp import (
    ParameterError,
    Topology,
    UnsatisfiableError,
    brute_force,
    evaluate,
    generate_instance,
    heuristic_solution,
    init_population,
    total_length,
)
from mnsdp.initializer import init_stream, roulette_wheel

from builders import make_instance


def test_zero_load_instance_prunes_to_empty():
    inst = make_instance([0] * 6, [0] * 6, [1] * 6)
    t = heuristic_solution(inst, np.random.default_rng(0))
    assert t.num_edges == 0


def test_output_feasible_and_shorter_than_complete():
    inst = generate_instance(12, 1.5, 4, composition=(8, 4, 0))
    full = total_length(Topology.complete(12), inst)
    for seed in range(10):
        t = heuristic_solution(inst, np.random.default_rng(seed))
        e = evaluate(t, inst)
        assert e.feasible and e.objective <= full


def test_every_accepted_step_is_feasible_and_shorter():
    inst = generate_instance(14, 1.7, 2, composition=(8, 4, 2))
    steps = []
    heuristic_solution(inst, np.random.default_rng(3), on_accept=lambda p, q: steps.append((p, q)))
    cur = Topology.complete(inst.n)
    last = total_length(cur, inst)
    for p, q in steps:
        cur = cur.set_edge(p, q, 0)
        e = evaluate(cur, inst)
        assert e.feasible and e.objective < last
        last = e.objective
    assert steps


def test_four_node_output_is_a_feasible_enumerated_topology():
    inst = make_instance([4, 5, 6, 7], [2, 2, 2, 2], [1, 1, 2, 1])
    best, opt = brute_force(inst)
    for seed in range(20):
        t = heuristic_solution(inst, np.random.default_rng(seed))
        e = evaluate(t, inst)
        assert e.feasible and e.objective >= opt


def test_unsatisfiable_instance():
    # node 0 needs more than every other surplus combined
    inst = make_instance([100, 2, 2, 2], [90, 1, 1, 1], [1, 1, 1, 1])
    with pytest.raises(UnsatisfiableError):
        heuristic_solution(inst, np.random.default_rng(0))


def test_patience_bounds_work():
    inst = generate_instance(10, 1.5, 1, composition=(10, 0, 0))
    lazy = heuristic_solution(inst, np.random.default_rng(0), patience=0)
    assert lazy == Topology.complete(10)


def test_roulette_wheel():
    rng = np.random.default_rng(0)
    w = np.array([1.0, 0.0, 3.0])
    draws = np.array([roulette_wheel(w, rng) for _ in range(20000)])
    assert not np.any(draws == 1)
    frac = np.mean(draws == 2)
    assert abs(frac - 0.75) < 3 * np.sqrt(0.75 * 0.25 / 20000)
    zeros = [roulette_wheel(np.zeros(4), rng) for _ in range(400)]
    assert set(zeros) == {0, 1, 2, 3}


def test_init_population():
    inst = generate_instance(10, 1.5, 7)
    pop = init_population(inst, 200, seed=0)
    assert len(pop) == 200 == 20 * inst.n
    assert all(ind.feasible for ind in pop)
    assert len({ind.topology for ind in pop}) > 1
    with pytest.raises(ParameterError):
        init_population(inst, 1, seed=0)


def test_population_is_order_independent():
    inst = generate_instance(10, 1.5, 7)
    pop = init_population(inst, 6, seed=3)
    assert pop[4].topology == heuristic_solution(inst, init_stream(3, 4))


def test_diversity_across_seeds():
    inst = generate_instance(10, 1.5, 7)
    diverse = sum(
        len({ind.topology for ind in init_population(inst, 5, seed=s)}) >= 2
        for s in range(100)
    )
    assert diverse >= 95
