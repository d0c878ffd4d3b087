"""Acceptance criteria 1-10.

Each test prints one ``criterion N: PASS|FAIL`` line (collected again in the
terminal summary) and then asserts the same condition.
"""

import time

import numpy as np
import pytest

from mnsdp import (
    Individual,
    SolverConfig,
    Topology,
    VariationParams,
    brute_force,
    complete_graph_feasible,
    constraint_count,
    environmental_selection,
    evaluate,
    generate_instance,
    heuristic_solution,
    matrix_de_offspring,
    per_bit_de_offspring,
    solve,
    total_length,
)
from mnsdp.cli import main as cli_main
from mnsdp.constraints import Evaluation, eval_type2, eval_type3
from mnsdp.variation import BEST, DONOR, PARENT, draw_row_sources

from builders import k4_type3, triangle_type2
from oracles import binomial_3sigma, naive_evaluate

pytestmark = pytest.mark.acceptance


def test_c01_constraint_count(criterion):
    t0 = time.perf_counter()
    inst = generate_instance(100, 1.3, 1, composition=(30, 30, 40))
    count = constraint_count(inst)
    elapsed = time.perf_counter() - t0
    ok = count == 403030 and elapsed < 1.0
    criterion(1, ok, f"constraint_count={count} (want 403030) in {elapsed:.2f}s (< 1s)")
    assert ok


def test_c02_oracle_equivalence(criterion):
    rng = np.random.default_rng(20240601)
    mismatches = 0
    t0 = time.perf_counter()
    for _ in range(1000):
        n = int(rng.integers(4, 13))
        inst = generate_instance(
            n, float(rng.choice([1.3, 1.4, 1.5, 1.6, 1.7])), int(rng.integers(10**6)),
            require_complete_feasible=False,
        )
        t = Topology(n, rng.random(n * (n - 1) // 2) < rng.random())
        e = evaluate(t, inst)
        mismatches += (e.objective, e.violation) != naive_evaluate(t, inst)
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30.0
    criterion(2, ok, f"{mismatches} mismatches over 1000 pairs, n in 4..12, in {elapsed:.1f}s (< 30s)")
    assert ok


def test_c03_hand_cases(criterion):
    tri = triangle_type2()
    v2 = eval_type2(Topology.complete(3), tri, 0, 1)
    v2b = eval_type2(Topology.complete(3), triangle_type2(load0=3.0), 0, 1)
    k4 = k4_type3()
    v3 = eval_type3(Topology.complete(4), k4, 0, 1, 2)
    ok = (v2, v2b, v3) == (0.0, 1.0, 11.0)
    criterion(3, ok, f"type-II LHS 4 vs RHS 4 -> {v2} (want 0), L0+L1=5 -> {v2b} (want 1), "
                     f"K4 type-III -> {v3} (want 11)")
    assert ok


def test_c04_brute_force_optimality(criterion):
    ratios = (1.3, 1.5, 1.7)
    hits = total = 0
    seed = 0
    t0 = time.perf_counter()
    while total < 20:
        r = ratios[total % 3]
        inst = generate_instance(5, r, seed, composition=(5, 0, 0))
        seed += 1
        # the generator gives up after 100 draws; such instances have no feasible topology
        if not complete_graph_feasible(inst):
            continue
        _, opt = brute_force(inst)
        res = solve(inst, SolverConfig(max_evaluations=5000, seed=total))
        hits += res.best.feasible and res.best.objective == opt
        total += 1
    elapsed = time.perf_counter() - t0
    ok = hits >= 18 and elapsed < 120.0
    criterion(4, ok, f"optimum found in {hits}/20 runs (>= 18), {elapsed:.1f}s (< 120s)")
    assert ok


def test_c05_initializer(criterion):
    calls = feasible = monotone = bounded = 0
    for k in range(10):
        inst = generate_instance(20, 1.5, k)
        assert complete_graph_feasible(inst)
        full = total_length(Topology.complete(20), inst)
        for s in range(10):
            steps = []
            t = heuristic_solution(inst, np.random.default_rng([k, s]),
                                   on_accept=lambda p, q: steps.append((p, q)))
            cur, last, dec = Topology.complete(20), full, True
            for p, q in steps:
                cur = cur.set_edge(p, q, 0)
                obj = total_length(cur, inst)
                dec &= obj < last
                last = obj
            e = evaluate(t, inst)
            calls += 1
            feasible += e.feasible
            monotone += dec and cur == t
            bounded += e.objective <= full
    ok = feasible == monotone == bounded == calls == 100
    criterion(5, ok, f"{feasible}/100 feasible, {monotone}/100 strictly decreasing, "
                     f"{bounded}/100 <= complete graph")
    assert ok


def test_c06_operator_statistics(criterion):
    F, CR, n = 0.2, 0.5, 20
    params = VariationParams(F=F, CR=CR)
    m = n * (n - 1) // 2
    zeros = Topology(n, np.zeros(m, bool))
    ones = Topology(n, np.ones(m, bool))
    rng = np.random.default_rng(6)

    # parent 0 / donor 0 / best 1 exposes the best share; parent 0 / donor 1 / best 1
    # exposes best + donor. Only pairs with exactly one endpoint in a picked row count.
    def share(donor):
        hits = bits = 0
        while bits < 100_000:
            seed = int(rng.integers(1 << 62))
            rows, _ = draw_row_sources(n, params, np.random.default_rng(seed))
            child = matrix_de_offspring(zeros, donor, ones, params, np.random.default_rng(seed))
            picked = np.zeros(n, bool)
            picked[rows] = True
            x = child.matrix().astype(bool)
            mask = picked[:, None] ^ picked[None, :]
            mask = np.triu(mask, 1)
            hits += int(x[mask].sum())
            bits += int(mask.sum())
        return hits, bits

    best_hits, best_bits = share(zeros)
    both_hits, both_bits = share(ones)
    src = np.zeros(3, np.int64)
    while src.sum() < 100_000:
        _, s = draw_row_sources(n, params, rng)
        src += np.bincount(s.ravel(), minlength=3)
    freq_ok = (
        binomial_3sigma(best_hits, best_bits, F)
        and binomial_3sigma(both_hits, both_bits, F + (1 - F) * CR)
        and binomial_3sigma(src[BEST], src.sum(), F)
        and binomial_3sigma(src[DONOR], src.sum(), (1 - F) * CR)
        and binomial_3sigma(src[PARENT], src.sum(), (1 - F) * (1 - CR))
    )

    bad = 0
    for k in range(10_000):
        size = int(rng.integers(3, 16))
        mm = size * (size - 1) // 2
        a, b, c = (Topology(size, rng.random(mm) < 0.5) for _ in range(3))
        op = matrix_de_offspring if k % 2 == 0 else per_bit_de_offspring
        x = op(a, b, c, params, rng).matrix()
        bad += (not np.array_equal(x, x.T)) or bool(np.any(np.diag(x)))
    ok = freq_ok and bad == 0
    criterion(6, ok, f"best share {best_hits / best_bits:.4f} (F={F}), best+donor share "
                     f"{both_hits / both_bits:.4f} (want {F + (1 - F) * CR:.4f}), 3-sigma {freq_ok}; "
                     f"{bad} structural violations in 10^4 applications")
    assert ok


def _random_pop(rng, size):
    out = []
    for _ in range(size):
        viol = 0.0 if rng.random() < 0.3 else float(rng.uniform(0, 10))
        bits = rng.random(3) < 0.5
        out.append(Individual(Topology(3, bits), Evaluation(float(rng.uniform(0, 100)), viol)))
    return out


def test_c07_selection_semantics(criterion):
    rng = np.random.default_rng(7)
    stage1_bad = stage2_bad = 0
    for _ in range(1000):
        N = int(rng.integers(2, 40))
        pop, off = _random_pop(rng, N), _random_pop(rng, N)
        b = int(rng.integers(1, N + 1))
        out = environmental_selection(pop, off, b, np.random.default_rng(int(rng.integers(1 << 30))))
        archive = [o for p, o in zip(pop, off) if o.violation > p.violation and o.objective < p.objective]
        for i in range(N):
            stage1 = off[i] if off[i].violation < pop[i].violation else pop[i]
            stage1_bad += stage1.violation > pop[i].violation
            if out[i] is stage1:
                continue
            # anything else came from the archive in stage 2
            from_archive = any(out[i] is a for a in archive)
            stage2_bad += not (from_archive and out[i].objective < stage1.objective)
    pop = _random_pop(rng, 10)
    worse = [Individual(p.topology, Evaluation(p.objective + 1, p.violation + 1)) for p in pop]
    idem = environmental_selection(pop, worse, 5, rng) == pop
    ok = stage1_bad == 0 and stage2_bad == 0 and idem
    criterion(7, ok, f"1000 populations: {stage1_bad} stage-1 violation increases, "
                     f"{stage2_bad} stage-2 non-improving installs; empty-archive idempotence {idem}")
    assert ok


def test_c08_ablation_direction(criterion):
    inst = generate_instance(20, 1.6, 1)
    t0 = time.perf_counter()
    mat, bit = [], []
    for seed in range(10):
        mat.append(solve(inst, SolverConfig(seed=seed, operator="matrix-de")).best.objective)
        bit.append(solve(inst, SolverConfig(seed=seed, operator="per-bit-de")).best.objective)
    elapsed = time.perf_counter() - t0
    mat, bit = np.array(mat), np.array(bit)
    wins = int(np.sum(mat < bit))
    ties = int(np.sum(mat == bit))
    ok = mat.mean() <= bit.mean() and wins >= 8 and elapsed < 300.0
    criterion(8, ok, f"mean matrix-de {mat.mean():.4f} vs per-bit-de {bit.mean():.4f}, "
                     f"wins {wins}/10 (>= 8), ties {ties}, {elapsed:.0f}s (< 300s)")
    assert ok


def test_c09_cli_determinism(criterion, tmp_path):
    inst = tmp_path / "inst.json"
    cli_main(["gen", "--nodes", "12", "--ratio", "1.5", "--seed", "3", "--out", str(inst)])
    files = []
    for k in range(2):
        topo, conv = tmp_path / f"t{k}.json", tmp_path / f"c{k}.csv"
        rc = cli_main(["solve", "--instance", str(inst), "--seed", "11",
                       "--out", str(topo), "--log", str(conv)])
        assert rc == 0
        files.append((topo.read_bytes(), conv.read_bytes()))
    ok = files[0] == files[1]
    criterion(9, ok, f"topology and convergence files byte-identical across two runs: {ok}")
    assert ok


def test_c10_scale_smoke(criterion):
    inst = generate_instance(50, 1.5, 0)
    t0 = time.perf_counter()
    res = solve(inst)
    elapsed = time.perf_counter() - t0
    best = [h.best_objective for h in res.history]
    monotone = all(b <= a for a, b in zip(best, best[1:]))
    ok = res.best.feasible and monotone and elapsed < 900.0
    criterion(10, ok, f"n=50 defaults: feasible {res.best.feasible}, objective {res.best.objective:.4f}, "
                      f"history non-increasing {monotone}, {res.evaluations} evaluations in "
                      f"{elapsed:.0f}s (< 900s)")
    assert ok
