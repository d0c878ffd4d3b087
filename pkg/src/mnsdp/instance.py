"""MNSDP problem instances: benchmark generator and JSON file I/O.

An instance places ``n`` microgrids in the plane. Each node has a generation
``G``, a load ``L`` and a reliability class ``k`` (1, 2 or 3) saying how many
simultaneous node failures (itself included) it must survive. Candidate
circuits are all unordered node pairs, priced by Euclidean length.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, ParameterError

__all__ = [
    "Node",
    "Instance",
    "generate_instance",
    "save_instance",
    "load_instance",
    "instance_to_dict",
    "instance_from_dict",
    "INSTANCE_SCHEMA",
]

logger = logging.getLogger(__name__)

INSTANCE_SCHEMA = "mnsdp-instance/1"

COORD_RANGE = (0.0, 10.0)
GENERATION_RANGE = (10.0, 100.0)
MAX_GENERATION_ATTEMPTS = 100


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    generation: float
    load: float
    k_class: int

    @property
    def surplus(self) -> float:
        return self.generation - self.load


@dataclass(frozen=True, eq=False)
class Instance:
    """An immutable MNSDP instance.

    Per-node quantities are also exposed as read-only numpy arrays
    (``generation``, ``load``, ``k_class``, ``xy``) and the Euclidean
    ``distance`` matrix is derived from the coordinates, never stored.
    """

    name: str
    nodes: tuple[Node, ...]
    ratio: float
    seed: int = 0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        _validate_nodes(self.nodes)
        if not isinstance(self.ratio, (int, float)) or not math.isfinite(self.ratio):
            raise ParameterError(f"ratio must be a finite number, got {self.ratio!r}")

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.name == other.name
            and self.ratio == other.ratio
            and self.seed == other.seed
            and self.nodes == other.nodes
        )

    def __hash__(self):
        return hash((self.name, self.ratio, self.seed, self.nodes))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def num_pairs(self) -> int:
        return self.n * (self.n - 1) // 2

    @cached_property
    def xy(self) -> np.ndarray:
        return _frozen(np.array([(nd.x, nd.y) for nd in self.nodes], dtype=float))

    @cached_property
    def generation(self) -> np.ndarray:
        return _frozen(np.array([nd.generation for nd in self.nodes], dtype=float))

    @cached_property
    def load(self) -> np.ndarray:
        return _frozen(np.array([nd.load for nd in self.nodes], dtype=float))

    @cached_property
    def k_class(self) -> np.ndarray:
        return _frozen(np.array([nd.k_class for nd in self.nodes], dtype=np.int64))

    @cached_property
    def distance(self) -> np.ndarray:
        diff = self.xy[:, None, :] - self.xy[None, :, :]
        d = np.sqrt(diff[..., 0] ** 2 + diff[..., 1] ** 2)
        return _frozen(d)

    def composition(self) -> tuple[int, int, int]:
        """Number of type-I, type-II and type-III nodes."""
        counts = np.bincount(self.k_class, minlength=4)
        return int(counts[1]), int(counts[2]), int(counts[3])


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _validate_nodes(nodes: Sequence[Node]) -> None:
    if len(nodes) < 3:
        raise ParameterError(f"an instance needs at least 3 nodes, got {len(nodes)}")
    for idx, nd in enumerate(nodes):
        where = f"nodes[{idx}]"
        if nd.id != idx:
            raise FormatError(f"expected id {idx}, got {nd.id!r}", field=f"{where}.id")
        for name in ("x", "y", "generation", "load"):
            v = getattr(nd, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise FormatError(f"must be a finite number, got {v!r}", field=f"{where}.{name}")
        if nd.generation < 0:
            raise FormatError("must be >= 0", field=f"{where}.generation")
        if nd.load < 0:
            raise FormatError("must be >= 0", field=f"{where}.load")
        if nd.k_class not in (1, 2, 3):
            raise FormatError(f"must be 1, 2 or 3, got {nd.k_class!r}", field=f"{where}.k")


def _draw(n, ratio, rng, composition, generation_range):
    xy = rng.uniform(*COORD_RANGE, size=(n, 2))
    gen = rng.uniform(*generation_range, size=n)
    if composition is None:
        classes = rng.integers(1, 4, size=n)
    else:
        classes = np.repeat([1, 2, 3], composition)
        rng.shuffle(classes)
    return tuple(
        Node(
            id=i,
            x=float(xy[i, 0]),
            y=float(xy[i, 1]),
            generation=float(gen[i]),
            load=float(gen[i]) / ratio,
            k_class=int(classes[i]),
        )
        for i in range(n)
    )


def generate_instance(
    n: int,
    ratio: float,
    seed: int,
    composition: Sequence[int] | None = None,
    *,
    name: str | None = None,
    generation_range: tuple[float, float] = GENERATION_RANGE,
    require_complete_feasible: bool = True,
) -> Instance:
    """Draw an MNSDP-LIB style instance.

    Positions are uniform in ``[0, 10]^2``, generations uniform in
    ``generation_range`` and loads are ``generation / ratio``. Classes are
    uniform over {1, 2, 3}, or a shuffled multiset when ``composition``
    gives the per-class counts.

    With ``require_complete_feasible`` the draw is repeated on derived
    sub-seeds until the complete graph satisfies every constraint, up to
    100 attempts. If no attempt succeeds the first draw is returned and a
    warning is logged; callers can check with
    :func:`mnsdp.constraints.complete_graph_feasible`.
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 3:
        raise ParameterError(f"n must be an integer >= 3, got {n!r}")
    n = int(n)
    if not isinstance(ratio, (int, float)) or not math.isfinite(ratio) or ratio <= 1:
        raise ParameterError(f"ratio must be > 1, got {ratio!r}")
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ParameterError(f"seed must be a nonnegative integer, got {seed!r}")
    if composition is not None:
        composition = tuple(int(c) for c in composition)
        if len(composition) != 3 or min(composition) < 0 or sum(composition) != n:
            raise ParameterError(
                f"composition must be three nonnegative counts summing to {n}, got {composition}"
            )
    lo, hi = generation_range
    if not (0 <= lo <= hi) or not math.isfinite(hi):
        raise ParameterError(f"bad generation range {generation_range!r}")

    if name is None:
        name = f"MNSDP-{n}-{ratio:g}-s{seed}"

    from .constraints import complete_graph_feasible

    attempts = MAX_GENERATION_ATTEMPTS if require_complete_feasible else 1
    first = None
    for attempt in range(attempts):
        rng = np.random.default_rng([int(seed), attempt])
        inst = Instance(
            name=name,
            nodes=_draw(n, float(ratio), rng, composition, generation_range),
            ratio=float(ratio),
            seed=int(seed),
        )
        if not require_complete_feasible or complete_graph_feasible(inst):
            return inst
        if first is None:
            first = inst
    logger.warning(
        "%s: complete graph infeasible in all %d draws; returning the first draw",
        name,
        attempts,
    )
    return first


def instance_to_dict(inst: Instance) -> dict:
    return {
        "schema": INSTANCE_SCHEMA,
        "name": inst.name,
        "n": inst.n,
        "ratio": inst.ratio,
        "seed": inst.seed,
        "nodes": [
            {
                "id": nd.id,
                "x": nd.x,
                "y": nd.y,
                "generation": nd.generation,
                "load": nd.load,
                "k": nd.k_class,
            }
            for nd in inst.nodes
        ],
    }


def _require(obj, key, kind, where=None):
    label = key if where is None else f"{where}.{key}"
    if key not in obj:
        raise FormatError("missing", field=label)
    v = obj[key]
    if kind == "int":
        ok = isinstance(v, int) and not isinstance(v, bool)
    elif kind == "number":
        ok = isinstance(v, (int, float)) and not isinstance(v, bool)
        if ok and not math.isfinite(v):
            raise FormatError(f"must be finite, got {v!r}", field=label)
    else:
        ok = isinstance(v, kind)
    if not ok:
        raise FormatError(f"wrong type {type(v).__name__}", field=label)
    return v


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise FormatError("top level must be a JSON object")
    schema = _require(data, "schema", str)
    if schema != INSTANCE_SCHEMA:
        raise FormatError(f"expected {INSTANCE_SCHEMA!r}, got {schema!r}", field="schema")
    name = _require(data, "name", str)
    n = _require(data, "n", "int")
    ratio = _require(data, "ratio", "number")
    seed = _require(data, "seed", "int")
    raw_nodes = _require(data, "nodes", list)
    if len(raw_nodes) != n:
        raise FormatError(f"has {len(raw_nodes)} entries but n = {n}", field="nodes")
    nodes = []
    for idx, raw in enumerate(raw_nodes):
        where = f"nodes[{idx}]"
        if not isinstance(raw, dict):
            raise FormatError("must be an object", field=where)
        k = _require(raw, "k", "int", where)
        if k not in (1, 2, 3):
            raise FormatError(f"must be 1, 2 or 3, got {k}", field=f"{where}.k")
        nodes.append(
            Node(
                id=_require(raw, "id", "int", where),
                x=float(_require(raw, "x", "number", where)),
                y=float(_require(raw, "y", "number", where)),
                generation=float(_require(raw, "generation", "number", where)),
                load=float(_require(raw, "load", "number", where)),
                k_class=k,
            )
        )
    try:
        return Instance(name=name, nodes=tuple(nodes), ratio=float(ratio), seed=seed)
    except ParameterError as exc:
        raise FormatError(str(exc), field="nodes") from exc


def save_instance(inst: Instance, path) -> None:
    text = json.dumps(instance_to_dict(inst), indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_instance(path) -> Instance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
    return instance_from_dict(data)
