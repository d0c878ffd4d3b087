"""The decision variable: a symmetric, zero-diagonal 0/1 adjacency matrix.

Only the strict upper triangle is stored (one boolean per unordered pair,
row-major over ``i < j``), so asymmetric or self-looped states cannot be
represented at all.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError, ParameterError
from .instance import Instance

__all__ = [
    "Topology",
    "pair_index",
    "total_length",
    "neighbors",
    "set_edge",
    "save_topology",
    "load_topology",
    "topology_to_dict",
    "topology_from_dict",
    "to_dot",
    "TOPOLOGY_SCHEMA",
]

TOPOLOGY_SCHEMA = "mnsdp-topology/1"


@lru_cache(maxsize=64)
def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    iu, ju = np.triu_indices(n, k=1)
    iu.setflags(write=False)
    ju.setflags(write=False)
    return iu, ju


@lru_cache(maxsize=64)
def pair_index(n: int) -> np.ndarray:
    """``(n, n)`` map from ``(i, j)`` to the packed pair index; -1 on the diagonal."""
    idx = np.full((n, n), -1, dtype=np.int64)
    iu, ju = _triu(n)
    k = np.arange(iu.size)
    idx[iu, ju] = k
    idx[ju, iu] = k
    idx.setflags(write=False)
    return idx


class Topology:
    """Undirected simple graph over nodes ``0..n-1``.

    Instances are treated as values: every mutating operation returns a new
    object and the packed ``bits`` array is read-only.
    """

    __slots__ = ("n", "_bits")

    def __init__(self, n: int, bits=None):
        if n < 2:
            raise ParameterError(f"n must be >= 2, got {n}")
        m = n * (n - 1) // 2
        if bits is None:
            arr = np.zeros(m, dtype=bool)
        else:
            arr = np.array(bits, dtype=bool).ravel()
            if arr.size != m:
                raise ParameterError(f"expected {m} pair bits for n={n}, got {arr.size}")
        arr.setflags(write=False)
        self.n = int(n)
        self._bits = arr

    @classmethod
    def empty(cls, n: int) -> "Topology":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Topology":
        return cls(n, np.ones(n * (n - 1) // 2, dtype=bool))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Topology":
        bits = np.zeros(n * (n - 1) // 2, dtype=bool)
        idx = pair_index(n)
        for i, j in edges:
            _check_pair(n, i, j)
            bits[idx[i, j]] = True
        return cls(n, bits)

    @classmethod
    def from_matrix(cls, matrix) -> "Topology":
        a = np.asarray(matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterError(f"need a square matrix, got shape {a.shape}")
        if not np.array_equal(a, a.T):
            raise ParameterError("adjacency matrix is not symmetric")
        if np.any(np.diag(a) != 0):
            raise ParameterError("adjacency matrix has a nonzero diagonal")
        if not np.all((a == 0) | (a == 1)):
            raise ParameterError("adjacency matrix entries must be 0 or 1")
        iu, ju = _triu(a.shape[0])
        return cls(a.shape[0], a[iu, ju] != 0)

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    @property
    def num_edges(self) -> int:
        return int(np.count_nonzero(self._bits))

    def matrix(self, dtype=np.uint8) -> np.ndarray:
        """Full symmetric adjacency matrix (a fresh, writable array)."""
        m = np.zeros((self.n, self.n), dtype=dtype)
        iu, ju = _triu(self.n)
        m[iu, ju] = self._bits
        m[ju, iu] = self._bits
        return m

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            _check_node(self.n, i)
            return False
        _check_pair(self.n, i, j)
        return bool(self._bits[pair_index(self.n)[i, j]])

    def __getitem__(self, ij) -> int:
        i, j = ij
        return int(self.has_edge(i, j))

    def set_edge(self, i: int, j: int, value) -> "Topology":
        if i == j:
            raise ParameterError(f"cannot write diagonal entry ({i}, {j})")
        _check_pair(self.n, i, j)
        bits = self._bits.copy()
        bits[pair_index(self.n)[i, j]] = bool(value)
        return Topology(self.n, bits)

    def neighbors(self, i: int) -> list[int]:
        _check_node(self.n, i)
        row = pair_index(self.n)[i]
        mask = np.zeros(self.n, dtype=bool)
        others = row >= 0
        mask[others] = self._bits[row[others]]
        return np.flatnonzero(mask).tolist()

    def edges(self) -> list[tuple[int, int]]:
        """Edges as ``(i, j)`` with ``i < j`` in lexicographic order."""
        iu, ju = _triu(self.n)
        sel = np.flatnonzero(self._bits)
        return [(int(iu[k]), int(ju[k])) for k in sel]

    def __eq__(self, other):
        if not isinstance(other, Topology):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash((self.n, self._bits.tobytes()))

    def __repr__(self):
        return f"Topology(n={self.n}, edges={self.num_edges})"


def _check_node(n, i):
    if not (0 <= i < n):
        raise ParameterError(f"node index {i} out of range for n={n}")


def _check_pair(n, i, j):
    _check_node(n, i)
    _check_node(n, j)
    if i == j:
        raise ParameterError(f"({i}, {j}) is a diagonal entry")


def _check_dims(t: Topology, inst: Instance):
    if t.n != inst.n:
        raise ParameterError(f"topology has {t.n} nodes but instance has {inst.n}")


def total_length(t: Topology, inst: Instance) -> float:
    """Total circuit length: each selected unordered pair counted once.

    Uses ``math.fsum`` so the result is the correctly rounded exact sum.
    """
    _check_dims(t, inst)
    iu, ju = _triu(t.n)
    return math.fsum(inst.distance[iu, ju][t.bits].tolist())


def neighbors(t: Topology, i: int) -> list[int]:
    return t.neighbors(i)


def set_edge(t: Topology, i: int, j: int, value) -> Topology:
    return t.set_edge(i, j, value)


def topology_to_dict(t: Topology, instance_name: str) -> dict:
    return {
        "schema": TOPOLOGY_SCHEMA,
        "instance": instance_name,
        "edges": [[i, j] for i, j in t.edges()],
    }


def topology_from_dict(data: dict, inst: Instance) -> Topology:
    if not isinstance(data, dict):
        raise FormatError("top level must be a JSON object")
    if data.get("schema") != TOPOLOGY_SCHEMA:
        raise FormatError(
            f"expected {TOPOLOGY_SCHEMA!r}, got {data.get('schema')!r}", field="schema"
        )
    if data.get("instance") != inst.name:
        raise FormatError(
            f"topology is for {data.get('instance')!r}, not {inst.name!r}", field="instance"
        )
    edges = data.get("edges")
    if not isinstance(edges, list):
        raise FormatError("missing or not a list", field="edges")
    pairs = []
    seen = set()
    for k, e in enumerate(edges):
        ok = (
            isinstance(e, list)
            and len(e) == 2
            and all(isinstance(v, int) and not isinstance(v, bool) for v in e)
        )
        if not ok or not (0 <= e[0] < e[1] < inst.n):
            raise FormatError(f"bad edge {e!r} for n={inst.n}", field=f"edges[{k}]")
        if (e[0], e[1]) in seen:
            raise FormatError(f"duplicate edge {e!r}", field=f"edges[{k}]")
        seen.add((e[0], e[1]))
        pairs.append((e[0], e[1]))
    return Topology.from_edges(inst.n, pairs)


def save_topology(t: Topology, inst: Instance, path) -> None:
    _check_dims(t, inst)
    text = json.dumps(topology_to_dict(t, inst.name), separators=(", ", ": "))
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_topology(path, inst: Instance) -> Topology:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON in {path}: {exc}") from exc
    return topology_from_dict(data, inst)


def to_dot(t: Topology, inst: Instance) -> str:
    """Graphviz rendering with fixed node positions and edge lengths as labels."""
    _check_dims(t, inst)
    lines = [f'graph "{inst.name}" {{', "  node [shape=circle];"]
    for nd in inst.nodes:
        lines.append(
            f'  {nd.id} [label="{nd.id} (K={nd.k_class})", pos="{nd.x:.6f},{nd.y:.6f}!"];'
        )
    for i, j in t.edges():
        lines.append(f'  {i} -- {j} [label="{inst.distance[i, j]:.2f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
