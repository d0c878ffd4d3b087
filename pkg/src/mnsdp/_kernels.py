"""Compiled inner loop of the pruning heuristic.

The state holds exact limb-encoded integers (see :mod:`mnsdp._fixed`), limb
axis last:

* ``S[i]``       neighbour surplus of ``i``;
* ``Q[a, b]``    ``r_ab + s_ab``: direct plus common-neighbour surplus;
* ``T[c, i, k]`` common-neighbour surplus of ``v3[c]``, ``i`` and ``k``.

A deletion trial evaluates only the constraints that involve one of the two
endpoints, using post-deletion values, and stops at the first violated one.
Deleting ``(p, q)`` changes ``S`` at ``p, q``, ``Q`` on rows/columns ``p, q``
and ``T`` only on triples holding exactly one endpoint whose other members
all neighbour the other endpoint.
"""

from __future__ import annotations

import numba as nb
import numpy as np

from ._fixed import LIMB_BITS


@nb.njit(cache=True)
def _negative(v, L):
    carry = 0
    for l in range(L - 1):
        carry = (v[l] + carry) >> LIMB_BITS
    return v[L - 1] + carry < 0


@nb.njit(cache=True)
def init_complete(s, klass):
    """State arrays ``(S, Q, T, pos3)`` for the complete graph."""
    n, L = s.shape
    tot = np.zeros(L, dtype=np.int64)
    for i in range(n):
        for l in range(L):
            tot[l] += s[i, l]
    v3 = np.flatnonzero(klass == 3)
    pos3 = np.full(n, -1, dtype=np.int64)
    for c in range(v3.size):
        pos3[v3[c]] = c
    S = np.empty((n, L), dtype=np.int64)
    Q = np.zeros((n, n, L), dtype=np.int64)
    T = np.zeros((v3.size, n, n, L), dtype=np.int64)
    for i in range(n):
        for l in range(L):
            S[i, l] = tot[l] - s[i, l]
    for a in range(n):
        for b in range(n):
            if a != b:
                for l in range(L):
                    Q[a, b, l] = tot[l]
    for c in range(v3.size):
        j = v3[c]
        for i in range(n):
            for k in range(n):
                if i != k and i != j and k != j:
                    for l in range(L):
                        T[c, i, k, l] = tot[l] - s[i, l] - s[j, l] - s[k, l]
    return S, Q, T, pos3


@nb.njit(cache=True)
def _changed_row(adj, Q, s, e, o):
    """Row ``e`` of ``Q`` after deleting ``(e, o)``."""
    n, L = s.shape
    row = Q[e].copy()
    for k in range(n):
        if k != e and k != o and adj[k, o]:
            for l in range(L):
                row[k, l] -= s[o, l]
    for l in range(L):
        row[o, l] -= s[e, l] + s[o, l]
    return row


@nb.njit(cache=True)
def deletion_feasible(adj, S, Q, T, pos3, s, ld, klass, p, q):
    """Whether every constraint touching ``p`` or ``q`` holds without edge ``(p, q)``.

    The other constraints do not depend on the edge; the caller keeps them
    satisfied by only ever deleting from a feasible topology.
    """
    n, L = s.shape
    buf = np.empty(L, dtype=np.int64)
    S2 = S.copy()
    for l in range(L):
        S2[p, l] -= s[q, l]
        S2[q, l] -= s[p, l]
    rows = np.empty((2, n, L), dtype=np.int64)
    rows[0] = _changed_row(adj, Q, s, p, q)
    rows[1] = _changed_row(adj, Q, s, q, p)
    ends = np.array([p, q])

    for e in ends:
        if klass[e] == 1:
            for l in range(L):
                buf[l] = S2[e, l] - ld[e, l]
            if _negative(buf, L):
                return False

    for j in range(n):
        if klass[j] != 2:
            continue
        if j == p or j == q:
            r = 0 if j == p else 1
            for i in range(n):
                if i == j:
                    continue
                for l in range(L):
                    buf[l] = S2[j, l] + S2[i, l] - rows[r, i, l] - ld[i, l] - ld[j, l]
                if _negative(buf, L):
                    return False
        else:
            for r in range(2):
                i = ends[r]
                for l in range(L):
                    buf[l] = S2[j, l] + S2[i, l] - rows[r, j, l] - ld[i, l] - ld[j, l]
                if _negative(buf, L):
                    return False

    for j in range(n):
        if klass[j] != 3:
            continue
        c = pos3[j]
        if j == p or j == q:
            r = 0 if j == p else 1
            o = q if j == p else p
            ro = 1 - r
            for i in range(n):
                if i == j:
                    continue
                for k in range(i + 1, n):
                    if k == j:
                        continue
                    corr = i != o and k != o and adj[i, o] and adj[k, o]
                    for l in range(L):
                        if i == o:
                            qik = rows[ro, k, l]
                        elif k == o:
                            qik = rows[ro, i, l]
                        else:
                            qik = Q[i, k, l]
                        v = (
                            S2[j, l] + S2[i, l] + S2[k, l]
                            - rows[r, i, l] - rows[r, k, l] - qik
                            + T[c, i, k, l]
                            - ld[i, l] - ld[j, l] - ld[k, l]
                        )
                        if corr:
                            v -= s[o, l]
                        buf[l] = v
                    if _negative(buf, L):
                        return False
        else:
            for r in range(2):
                e = ends[r]
                o = ends[1 - r]
                jo = adj[j, o]
                for k in range(n):
                    if k == j or k == e or (r == 1 and k == p):
                        continue
                    corr = jo and k != o and adj[k, o]
                    for l in range(L):
                        if k == o:
                            qjk = rows[1 - r, j, l]
                        else:
                            qjk = Q[j, k, l]
                        v = (
                            S2[j, l] + S2[e, l] + S2[k, l]
                            - rows[r, j, l] - qjk - rows[r, k, l]
                            + T[c, e, k, l]
                            - ld[e, l] - ld[j, l] - ld[k, l]
                        )
                        if corr:
                            v -= s[o, l]
                        buf[l] = v
                    if _negative(buf, L):
                        return False
    return True


@nb.njit(cache=True)
def apply_deletion(adj, S, Q, T, v3, s, p, q):
    n, L = s.shape
    # T first: the corrections read the adjacency before deletion
    for c in range(v3.size):
        j = v3[c]
        if j == p or j == q:
            o = q if j == p else p
            for i in range(n):
                if i == j or not adj[i, o]:
                    continue
                for k in range(n):
                    if k != i and k != j and adj[k, o]:
                        for l in range(L):
                            T[c, i, k, l] -= s[o, l]
        else:
            for e, o in ((p, q), (q, p)):
                if not adj[j, o]:
                    continue
                for k in range(n):
                    if k != e and k != j and adj[k, o]:
                        for l in range(L):
                            T[c, e, k, l] -= s[o, l]
                            T[c, k, e, l] -= s[o, l]
    for a in range(n):
        if a != p and a != q:
            if adj[a, q]:
                for l in range(L):
                    Q[p, a, l] -= s[q, l]
                    Q[a, p, l] -= s[q, l]
            if adj[a, p]:
                for l in range(L):
                    Q[q, a, l] -= s[p, l]
                    Q[a, q, l] -= s[p, l]
    for l in range(L):
        Q[p, q, l] -= s[p, l] + s[q, l]
        Q[q, p, l] -= s[p, l] + s[q, l]
        S[p, l] -= s[q, l]
        S[q, l] -= s[p, l]
    adj[p, q] = False
    adj[q, p] = False
