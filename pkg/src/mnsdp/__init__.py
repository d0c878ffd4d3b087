"""Multi-microgrid network structure design.

Instances of microgrids with N-K reliability classes, exact evaluation of
the circuit-length objective and reliability constraints, and a
binary-matrix differential evolution solver.
"""

from .constraints import (
    Evaluation,
    Evaluator,
    ViolationBreakdown,
    complete_graph_feasible,
    constraint_count,
    evaluate,
    violation_breakdown,
)
from .errors import (
    ConfigError,
    FormatError,
    MNSDPError,
    ParameterError,
    UnsatisfiableError,
)
from .initializer import heuristic_solution, init_population
from .instance import (
    Instance,
    Node,
    generate_instance,
    load_instance,
    save_instance,
)
from .selection import Individual, environmental_selection, feasible_rule_better
from .solver import RunResult, SolverConfig, brute_force, solve, write_convergence_csv
from .topology import Topology, load_topology, save_topology, to_dot, total_length
from .variation import (
    VariationParams,
    matrix_de_offspring,
    per_bit_de_offspring,
    standstill_mutation,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Evaluation",
    "Evaluator",
    "FormatError",
    "Individual",
    "Instance",
    "MNSDPError",
    "Node",
    "ParameterError",
    "RunResult",
    "SolverConfig",
    "Topology",
    "UnsatisfiableError",
    "VariationParams",
    "ViolationBreakdown",
    "brute_force",
    "complete_graph_feasible",
    "constraint_count",
    "environmental_selection",
    "evaluate",
    "feasible_rule_better",
    "generate_instance",
    "heuristic_solution",
    "init_population",
    "load_instance",
    "load_topology",
    "matrix_de_offspring",
    "per_bit_de_offspring",
    "save_instance",
    "save_topology",
    "solve",
    "standstill_mutation",
    "to_dot",
    "total_length",
    "violation_breakdown",
    "write_convergence_csv",
]
