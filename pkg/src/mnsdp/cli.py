"""Command-line interface: ``mnsdp {gen,init,solve,eval,export-dot,bench}``.

Exit codes: 0 success, 2 usage or bad parameters, 3 infeasible or
unsatisfiable instance, 4 file or format error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .constraints import (
    complete_graph_feasible,
    constraint_count,
    evaluate,
    violation_breakdown,
)
from .errors import ConfigError, FormatError, ParameterError, UnsatisfiableError
from .initializer import heuristic_solution, init_stream
from .instance import generate_instance, load_instance, save_instance
from .solver import SolverConfig, solve, write_convergence_csv
from .topology import load_topology, save_topology, to_dot
from .variation import OPERATORS

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

log = logging.getLogger("mnsdp")


def _composition(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n1,n2,n3 integers, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three counts, got {text!r}")
    return parts


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _config_from_args(args, operator: str, seed: int) -> SolverConfig:
    return SolverConfig(
        population_size=args.pop,
        max_evaluations=args.budget,
        F=args.f,
        CR=args.cr,
        batchsize=args.batch,
        standstill_threshold=args.standstill,
        seed=seed,
        operator=operator,
    )


def _load_checked(path):
    inst = load_instance(path)
    if not complete_graph_feasible(inst):
        raise UnsatisfiableError(f"{inst.name}: the complete graph is infeasible")
    return inst


def cmd_gen(args) -> int:
    if args.nodes < 3:
        raise ParameterError(f"--nodes must be >= 3, got {args.nodes}")
    inst = generate_instance(args.nodes, args.ratio, args.seed, args.composition, name=args.name)
    save_instance(inst, args.out)
    n1, n2, n3 = inst.composition()
    print(f"instance: {inst.name}")
    print(f"nodes: {inst.n} (K=1: {n1}, K=2: {n2}, K=3: {n3})")
    print(f"constraint_count: {constraint_count(inst)}")
    print(f"complete_graph_feasible: {complete_graph_feasible(inst)}")
    return EXIT_OK


def cmd_init(args) -> int:
    """One heuristic solution, drawn from the stream of initial individual ``--index``."""
    inst = _load_checked(args.instance)
    t = heuristic_solution(inst, init_stream(args.seed, args.index))
    save_topology(t, inst, args.out)
    e = evaluate(t, inst)
    print(f"objective: {e.objective:.6f}")
    print(f"edges: {t.num_edges}")
    print(f"feasible: {e.feasible}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_checked(args.instance)
    cfg = _config_from_args(args, args.algo, args.seed)

    def progress(rec):
        log.info(
            "gen %d evals %d best %.6f viol %.6f feasible %d",
            rec.generation, rec.evaluations, rec.best_objective,
            rec.best_violation, rec.feasible_count,
        )

    result = solve(inst, cfg, callback=progress)
    if args.out:
        save_topology(result.best.topology, inst, args.out)
    if args.log:
        write_convergence_csv(result.history, args.log)
    print(f"objective: {result.best.objective:.6f}")
    print(f"violation: {result.best.violation:.6f}")
    print(f"feasible: {result.best.feasible}")
    print(f"evaluations: {result.evaluations}")
    print(f"wall_time: {result.wall_time:.2f}s")
    return EXIT_OK if result.best.feasible else EXIT_INFEASIBLE


def cmd_eval(args) -> int:
    inst = load_instance(args.instance)
    t = load_topology(args.topology, inst)
    e = evaluate(t, inst)
    b = violation_breakdown(t, inst)
    print(f"objective: {e.objective:.6f}")
    print(f"edges: {t.num_edges}")
    print(f"violation_type1: {b.type1:.6f}")
    print(f"violation_type2: {b.type2:.6f}")
    print(f"violation_type3: {b.type3:.6f}")
    print(f"violation_total: {b.total:.6f}")
    print(f"feasible: {e.feasible}")
    return EXIT_OK


def cmd_export_dot(args) -> int:
    inst = load_instance(args.instance)
    t = load_topology(args.topology, inst)
    text = to_dot(t, inst)
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot write {args.out}: {exc}") from exc
    print(f"wrote {args.out} ({t.num_edges} edges)")
    return EXIT_OK


def cmd_bench(args) -> int:
    """Paired-seed repetitions for one or more operators."""
    inst = _load_checked(args.instance)
    algos = args.algo or ["matrix-de", "per-bit-de"]
    seeds = [args.seed + r for r in range(args.repeats)]
    results = {a: [] for a in algos}
    for seed in seeds:
        row = []
        for a in algos:
            res = solve(inst, _config_from_args(args, a, seed))
            obj = res.best.objective if res.best.feasible else np.inf
            results[a].append(obj)
            row.append(f"{a}={obj:.6f}")
        print(f"seed {seed}: " + " ".join(row), flush=True)
    for a in algos:
        v = np.asarray(results[a])
        print(f"{a}: mean {v.mean():.6f} std {v.std(ddof=1) if v.size > 1 else 0.0:.6f} "
              f"best {v.min():.6f} worst {v.max():.6f}")
    if len(algos) == 2:
        a, b = (np.asarray(results[x]) for x in algos)
        print(f"wins {algos[0]} {int((a < b).sum())}/{len(seeds)}, "
              f"{algos[1]} {int((b < a).sum())}/{len(seeds)}, ties {int((a == b).sum())}")
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--seed", type=_nonneg_int, default=0, help="run seed (default 0)")
    p.add_argument("--pop", type=int, default=None, help="population size (default 20 n)")
    p.add_argument("--budget", type=int, default=None,
                   help="evaluation budget (default n * population)")
    p.add_argument("--f", type=float, default=0.2, help="probability of copying from the best")
    p.add_argument("--cr", type=float, default=0.5, help="probability of copying from the donor")
    p.add_argument("--batch", type=int, default=None, help="selection batch size (default 10)")
    p.add_argument("--standstill", type=int, default=20,
                   help="generations without progress before mutation (default 20)")


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on usage errors, matching EXIT_USAGE
    parser = argparse.ArgumentParser(prog="mnsdp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-generation progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--ratio", type=float, required=True, help="generation / load ratio (> 1)")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--composition", type=_composition, default=None,
                   help="node counts per class as n1,n2,n3")
    p.add_argument("--name", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("init", help="build one heuristic solution")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--index", type=_nonneg_int, default=0,
                   help="population slot whose random stream is used")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("solve", help="run the optimiser on an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--algo", choices=sorted(OPERATORS), default="matrix-de")
    _add_solver_flags(p)
    p.add_argument("--out", default=None, help="topology JSON output")
    p.add_argument("--log", default=None, help="convergence CSV output")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate a topology against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--topology", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-dot", help="write a Graphviz rendering of a topology")
    p.add_argument("--instance", required=True)
    p.add_argument("--topology", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("bench", help="paired-seed repetitions of one or more operators")
    p.add_argument("--instance", required=True)
    p.add_argument("--algo", choices=sorted(OPERATORS), action="append", default=None,
                   help="operator to run; repeat to compare (default: both)")
    p.add_argument("--repeats", type=int, default=10, help="number of seeds (default 10)")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ParameterError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UnsatisfiableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
