"""N-K reliability constraints, aggregate violation and feasibility.

For a node ``i`` with surplus ``s_i = G_i - L_i`` the building blocks are

* ``S_i``    total surplus of the neighbours of ``i``;
* ``r_ij``   ``x_ij * (s_i + s_j)``, the surplus the pair exchanges directly;
* ``s_ij``   surplus of the common neighbours of ``i`` and ``j``;
* ``t_ijk``  surplus of the common neighbours of ``i``, ``j`` and ``k``.

Type-I nodes need ``S_i >= L_i``. A type-II node ``j`` needs, for every
other node ``i``, ``S_j + S_i - r_ij - s_ij >= L_i + L_j``. A type-III node
``j`` needs, for every unordered pair ``{i, k}`` of other nodes,

    S_j + S_i - r_ji - s_ji + S_k - r_jk - s_jk + t_ijk - r_ik - s_ik
        >= L_i + L_j + L_k.

The violation of a topology is the sum of ``max(0, rhs - lhs)`` over all
constraints. It is computed exactly (see :mod:`mnsdp._fixed`) and rounded
once, so ``feasible`` is an exact statement and the vectorised evaluator
agrees bit-for-bit with any other exact evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _fixed
from .errors import ParameterError
from .instance import Instance
from .topology import Topology, total_length

__all__ = [
    "Evaluation",
    "ViolationBreakdown",
    "Evaluator",
    "ToggleEvaluator",
    "evaluate",
    "violation_breakdown",
    "surplus_support",
    "eval_type1",
    "eval_type2",
    "eval_type3",
    "constraint_count",
    "complete_graph_feasible",
]


@dataclass(frozen=True)
class Evaluation:
    objective: float
    violation: float

    def __post_init__(self):
        if not (self.violation >= 0) or self.violation == float("inf"):
            raise ValueError(f"violation must be finite and >= 0, got {self.violation}")

    @property
    def feasible(self) -> bool:
        return self.violation == 0


@dataclass(frozen=True)
class ViolationBreakdown:
    type1: float
    type2: float
    type3: float
    total: float


class _Model:
    """Fixed-point view of an instance, built once and reused."""

    def __init__(self, inst: Instance):
        self.n = n = inst.n
        gen = inst.generation.tolist()
        load = inst.load.tolist()
        self.exponent = _fixed.common_exponent(gen + load)
        g_int = [_fixed.to_scaled_int(v, self.exponent) for v in gen]
        self.load_int = [_fixed.to_scaled_int(v, self.exponent) for v in load]
        self.surplus_int = [g - l for g, l in zip(g_int, self.load_int)]
        nlimbs = _fixed.limb_count(self.surplus_int + self.load_int)
        self.s = _fixed.to_limbs(self.surplus_int, nlimbs)
        self.ld = _fixed.to_limbs(self.load_int, nlimbs)

        k = inst.k_class
        self.v1 = np.flatnonzero(k == 1)
        self.v2 = np.flatnonzero(k == 2)
        self.v3 = np.flatnonzero(k == 3)
        self.klass = k

        idx = np.arange(n)
        self.mask2 = idx[None, :] != self.v2[:, None]
        self.mask3 = self._pair_mask(self.v3)

    def _pair_mask(self, js):
        idx = np.arange(self.n)
        upper = idx[:, None] < idx[None, :]
        m = np.broadcast_to(upper, (len(js), self.n, self.n)).copy()
        m[np.arange(len(js)), js, :] = False
        m[np.arange(len(js)), :, js] = False
        return m

    # building blocks, limb axis first

    def support(self, X):
        return self.s @ X

    def pair_terms(self, X):
        """``r_ab + s_ab`` for every pair, shape ``(L, n, n)``."""
        common = (X[None] * self.s[:, None, :]) @ X
        mutual = X[None] * (self.s[:, :, None] + self.s[:, None, :])
        return common + mutual

    # slacks (lhs - rhs) per constraint family

    def slack1(self, S, nodes):
        return S[:, nodes] - self.ld[:, nodes]

    def slack2_rows(self, S, Q, js):
        return (
            S[:, js, None]
            + S[:, None, :]
            - Q[:, js, :]
            - self.ld[:, js, None]
            - self.ld[:, None, :]
        )

    def slack3_rows(self, X, S, Q, js):
        w = self.s[:, None, :] * X[js][None]
        T = (X[None, None] * w[:, :, None, :]) @ X
        ld = self.ld
        return (
            S[:, js, None, None]
            + S[:, None, :, None]
            + S[:, None, None, :]
            - Q[:, js, :, None]
            - Q[:, js, None, :]
            - Q[:, None, :, :]
            + T
            - ld[:, js, None, None]
            - ld[:, None, :, None]
            - ld[:, None, None, :]
        )

    def shortfalls(self, X) -> tuple[int, int, int]:
        S = self.support(X)
        f1 = _fixed.shortfall(self.slack1(S, self.v1))
        if self.v2.size == 0 and self.v3.size == 0:
            return f1, 0, 0
        Q = self.pair_terms(X)
        f2 = 0
        if self.v2.size:
            f2 = _fixed.shortfall(self.slack2_rows(S, Q, self.v2)[:, self.mask2])
        f3 = 0
        if self.v3.size:
            f3 = _fixed.shortfall(self.slack3_rows(X, S, Q, self.v3)[:, self.mask3])
        return f1, f2, f3

    def touched_shortfall(self, X, p, q) -> int:
        """Shortfall over exactly the constraints whose index set meets ``{p, q}``.

        Those are the only constraints that can change when ``x_pq`` toggles.
        """
        S = self.support(X)
        k = self.klass
        ends = np.array([p, q])
        total = _fixed.shortfall(self.slack1(S, ends[k[ends] == 1]))
        if self.v2.size == 0 and self.v3.size == 0:
            return total
        Q = self.pair_terms(X)
        idx = np.arange(self.n)

        on = ends[k[ends] == 2]
        if on.size:
            sl = self.slack2_rows(S, Q, on)
            total += _fixed.shortfall(sl[:, idx[None, :] != on[:, None]])
        off = self.v2[(self.v2 != p) & (self.v2 != q)]
        if off.size:
            sl = (
                S[:, off, None]
                + S[:, None, ends]
                - Q[:, off[:, None], ends[None, :]]
                - self.ld[:, off, None]
                - self.ld[:, None, ends]
            )
            total += _fixed.shortfall(sl)

        on = ends[k[ends] == 3]
        if on.size:
            sl = self.slack3_rows(X, S, Q, on)
            total += _fixed.shortfall(sl[:, self._pair_mask(on)])
        off = self.v3[(self.v3 != p) & (self.v3 != q)]
        if off.size:
            # pairs {i, k} with i in {p, q}; {p, q} itself is kept once (i = p)
            w = self.s[:, None, None, :] * X[ends][None, None] * X[off][None, :, None, :]
            T = w @ X
            ld = self.ld
            sl = (
                S[:, off, None, None]
                + S[:, None, ends, None]
                + S[:, None, None, :]
                - Q[:, off[:, None], ends[None, :]][..., None]
                - Q[:, off, None, :]
                - Q[:, None, ends, :]
                + T
                - ld[:, off, None, None]
                - ld[:, None, ends, None]
                - ld[:, None, None, :]
            )
            mask = np.ones((off.size, 2, self.n), dtype=bool)
            mask[:, 0, p] = False
            mask[:, 1, q] = False
            mask[:, 1, p] = False
            mask[np.arange(off.size), :, off] = False
            total += _fixed.shortfall(sl[:, mask])
        return total

    def to_float(self, units: int) -> float:
        return _fixed.to_float(units, self.exponent)


def _model(inst: Instance) -> _Model:
    m = inst._cache.get("model")
    if m is None:
        m = inst._cache["model"] = _Model(inst)
    return m


def _check(t: Topology, inst: Instance):
    if t.n != inst.n:
        raise ParameterError(f"topology has {t.n} nodes but instance has {inst.n}")


def evaluate(t: Topology, inst: Instance) -> Evaluation:
    """Objective and aggregate violation of ``t``; a pure function."""
    _check(t, inst)
    m = _model(inst)
    units = sum(m.shortfalls(t.matrix(np.float64)))
    return Evaluation(objective=total_length(t, inst), violation=m.to_float(units))


def violation_breakdown(t: Topology, inst: Instance) -> ViolationBreakdown:
    _check(t, inst)
    m = _model(inst)
    f1, f2, f3 = m.shortfalls(t.matrix(np.float64))
    return ViolationBreakdown(
        type1=m.to_float(f1),
        type2=m.to_float(f2),
        type3=m.to_float(f3),
        total=m.to_float(f1 + f2 + f3),
    )


class Evaluator:
    """Budget-counting wrapper around :func:`evaluate` for one instance."""

    def __init__(self, inst: Instance):
        self.instance = inst
        self.count = 0
        _model(inst)

    def __call__(self, t: Topology) -> Evaluation:
        self.count += 1
        return evaluate(t, self.instance)


class ToggleEvaluator:
    """Tracks the exact violation of one topology under single-edge toggles.

    Only the constraints touching the toggled pair are recomputed, so a
    trial costs O(n^3) with a small constant instead of a full evaluation.
    """

    def __init__(self, inst: Instance, t: Topology):
        _check(t, inst)
        self._model = _model(inst)
        self.n = inst.n
        self._X = t.matrix(np.float64)
        self._units = sum(self._model.shortfalls(self._X))

    @property
    def violation(self) -> float:
        return self._model.to_float(self._units)

    @property
    def feasible(self) -> bool:
        return self._units == 0

    def topology(self) -> Topology:
        return Topology.from_matrix(self._X.astype(np.uint8))

    def _flip(self, p, q):
        if p == q:
            raise ParameterError(f"cannot toggle diagonal entry ({p}, {q})")
        v = 1.0 - self._X[p, q]
        self._X[p, q] = v
        self._X[q, p] = v

    def _units_after(self, p, q) -> int:
        m = self._model
        before = m.touched_shortfall(self._X, p, q)
        self._flip(p, q)
        try:
            after = m.touched_shortfall(self._X, p, q)
        finally:
            self._flip(p, q)
        return self._units - before + after

    def violation_after_toggle(self, p: int, q: int) -> float:
        return self._model.to_float(self._units_after(p, q))

    def feasible_after_toggle(self, p: int, q: int) -> bool:
        if self._units != 0:
            return self._units_after(p, q) == 0
        self._flip(p, q)
        try:
            return self._model.touched_shortfall(self._X, p, q) == 0
        finally:
            self._flip(p, q)

    def toggle(self, p: int, q: int) -> None:
        self._units = self._units_after(p, q)
        self._flip(p, q)


# single-constraint evaluators (exact, rounded once)


def _node(inst, i):
    if not (0 <= i < inst.n):
        raise ParameterError(f"node index {i} out of range for n={inst.n}")


def _support_int(m, X, i):
    return sum(m.surplus_int[j] for j in range(m.n) if X[i, j])


def _common_int(m, X, a, b):
    return sum(m.surplus_int[c] for c in range(m.n) if c != a and c != b and X[a, c] and X[b, c])


def _mutual_int(m, X, a, b):
    return (m.surplus_int[a] + m.surplus_int[b]) if X[a, b] else 0


def surplus_support(t: Topology, inst: Instance, i: int) -> float:
    """Total surplus ``sum_j (G_j - L_j) x_ij`` of the neighbours of ``i``."""
    _check(t, inst)
    _node(inst, i)
    m = _model(inst)
    return m.to_float(_support_int(m, t.matrix(), i))


def _require_class(inst, j, k):
    if inst.k_class[j] != k:
        raise ParameterError(f"node {j} is type {inst.k_class[j]}, expected type {k}")


def eval_type1(t: Topology, inst: Instance, i: int) -> float:
    _check(t, inst)
    _node(inst, i)
    _require_class(inst, i, 1)
    m = _model(inst)
    slack = _support_int(m, t.matrix(), i) - m.load_int[i]
    return m.to_float(max(0, -slack))


def eval_type2(t: Topology, inst: Instance, j: int, i: int) -> float:
    _check(t, inst)
    _node(inst, j)
    _node(inst, i)
    _require_class(inst, j, 2)
    if i == j:
        raise ParameterError("type-II constraint needs i != j")
    m = _model(inst)
    X = t.matrix()
    lhs = (
        _support_int(m, X, j)
        + _support_int(m, X, i)
        - _mutual_int(m, X, i, j)
        - _common_int(m, X, i, j)
    )
    rhs = m.load_int[i] + m.load_int[j]
    return m.to_float(max(0, rhs - lhs))


def eval_type3(t: Topology, inst: Instance, j: int, i: int, k: int) -> float:
    _check(t, inst)
    for v in (i, j, k):
        _node(inst, v)
    _require_class(inst, j, 3)
    if len({i, j, k}) != 3:
        raise ParameterError("type-III constraint needs pairwise distinct i, j, k")
    m = _model(inst)
    X = t.matrix()
    triple = sum(
        m.surplus_int[l]
        for l in range(m.n)
        if l not in (i, j, k) and X[i, l] and X[j, l] and X[k, l]
    )
    lhs = (
        _support_int(m, X, j)
        + _support_int(m, X, i)
        - _mutual_int(m, X, j, i)
        - _common_int(m, X, j, i)
        + _support_int(m, X, k)
        - _mutual_int(m, X, j, k)
        - _common_int(m, X, j, k)
        + triple
        - _mutual_int(m, X, i, k)
        - _common_int(m, X, i, k)
    )
    rhs = m.load_int[i] + m.load_int[j] + m.load_int[k]
    return m.to_float(max(0, rhs - lhs))


def constraint_count(inst: Instance) -> int:
    """Constraint count in the ``n1 + n2*n + n3*n^2`` convention.

    This counts ordered ``(i, k)`` for type-III and all ``i`` for type-II;
    the evaluator itself visits ``n - 1`` partners per type-II node and each
    unordered pair once per type-III node.
    """
    n1, n2, n3 = inst.composition()
    n = inst.n
    return n1 + n2 * n + n3 * n * n


def complete_graph_feasible(inst: Instance) -> bool:
    return evaluate(Topology.complete(inst.n), inst).feasible
