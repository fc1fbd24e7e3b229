"""Compiled inner loops.

Arrays are 0-based here: position ``i`` holds coordinate / vertex ``i + 1``.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def resolve_targets(xi, target, start):
    """Fill ``target[start:]`` from ``xi`` in one forward pass.

    Odd values point at a vertex directly; an even value ``2j`` copies the
    already-resolved target of coordinate ``j``, which precedes position
    ``start`` or was filled earlier in this pass.
    """
    for i in range(start, xi.shape[0]):
        x = xi[i]
        if x & 1:
            target[i] = (x + 1) >> 1
        else:
            target[i] = target[(x >> 1) - 1]


@njit(cache=True, nogil=True)
def resolve_targets_2d(xi, target):
    for r in range(xi.shape[0]):
        resolve_targets(xi[r], target[r], 0)


@njit(cache=True, nogil=True)
def second_degrees_csr(n_vertices, eu, ev, indptr, inc):
    """Second degree of every vertex of an arbitrary multigraph.

    ``indptr``/``inc`` is a CSR incidence index over vertices ``1..n``
    (row ``v`` lists edge ids touching ``v``; loops may be listed twice).
    Counts each edge instance once: it must avoid ``t`` and touch a
    neighbour of ``t``.
    """
    out = np.zeros(n_vertices, dtype=np.int64)
    nbr_seen = np.zeros(n_vertices + 1, dtype=np.int64)
    edge_seen = np.zeros(eu.shape[0], dtype=np.int64)
    for t in range(1, n_vertices + 1):
        count = 0
        for p in range(indptr[t], indptr[t + 1]):
            e = inc[p]
            w = ev[e] if eu[e] == t else eu[e]
            if w == t or nbr_seen[w] == t:
                continue
            nbr_seen[w] = t
            for s in range(indptr[w], indptr[w + 1]):
                f = inc[s]
                if eu[f] == t or ev[f] == t or edge_seen[f] == t:
                    continue
                edge_seen[f] = t
                count += 1
        out[t - 1] = count
    return out


@njit(cache=True, nogil=True)
def forest_second_degrees(n_vertices, eu, ev):
    """Second degrees of a forest-with-loops multigraph (the m = 1 model).

    Without parallel edges or triangles, the second degree is a sum over
    neighbours ``u`` of (edges at ``u``) - 1.
    """
    edge_deg = np.zeros(n_vertices + 1, dtype=np.int64)
    for e in range(eu.shape[0]):
        edge_deg[eu[e]] += 1
        if ev[e] != eu[e]:
            edge_deg[ev[e]] += 1
    d2 = np.zeros(n_vertices, dtype=np.int64)
    for e in range(eu.shape[0]):
        u = eu[e]
        v = ev[e]
        if u != v:
            d2[u - 1] += edge_deg[v] - 1
            d2[v - 1] += edge_deg[u] - 1
    return d2


@njit(cache=True, nogil=True)
def xi_from_uniforms(u, a, xi):
    """Map uniforms on [0, 1) to coordinate values, one odd/even split per index."""
    for p in range(u.shape[0]):
        i = p + 1
        w = u[p] * ((a + 1.0) * i - 1.0)
        if w < a * i:
            j = int(w / a)
            if j > i - 1:
                j = i - 1
            xi[p] = 2 * j + 1
        else:
            j = int(w - a * i)
            if j > i - 2:
                j = i - 2
            xi[p] = 2 * j + 2
    xi[0] = 1


@njit(cache=True, nogil=True)
def build_incidence(n_vertices, eu, ev):
    """Counting-sort CSR incidence; each edge is listed under both endpoints."""
    indptr = np.zeros(n_vertices + 2, dtype=np.int64)
    for e in range(eu.shape[0]):
        indptr[eu[e] + 1] += 1
        indptr[ev[e] + 1] += 1
    for v in range(1, n_vertices + 2):
        indptr[v] += indptr[v - 1]
    fill = indptr[:-1].copy()
    inc = np.empty(2 * eu.shape[0], dtype=np.int64)
    for e in range(eu.shape[0]):
        inc[fill[eu[e]]] = e
        fill[eu[e]] += 1
        inc[fill[ev[e]]] = e
        fill[ev[e]] += 1
    return indptr, inc


@njit(cache=True)
def fill_c_table(a, l_max, k_max, ck):
    """k-major fill of the ``c(l, k)`` recurrence; row 0 and column 0 stay zero.

    ``ck[k]`` holds the degree-law constant ``c(k)`` feeding row ``l = 1``.
    """
    c = np.zeros((l_max + 1, k_max + 1))
    for k in range(1, k_max + 1):
        c[1, k] = (c[1, k - 1] + ck[k]) * (a + k - 1) / (k + 3 * a + 1)
        for l in range(2, l_max + 1):
            c[l, k] = (c[l, k - 1] * (a * l + k - 1) + c[l - 1, k] * (l - 2 + a)) / (
                l * (1 + a) + k + 2 * a
            )
    return c


@njit(cache=True)
def fill_p_table(a, l_max, k_max, p0):
    p = np.zeros((l_max + 1, k_max + 1))
    if l_max < 2:
        return p
    p[2, 0] = p0
    for l in range(3, l_max + 1):
        p[l, 0] = p[l - 1, 0] * (l - 2 + a) / (l * (1 + a) - 2 - a)
    for k in range(1, k_max + 1):
        for l in range(3, l_max + 1):
            p[l, k] = (p[l, k - 1] * (a * l + k - 2 * a - 1) + p[l - 1, k] * (l - 2 + a)) / (
                l * (1 + a) + k - 1 - a
            )
    return p


@njit(cache=True, nogil=True)
def forest_second_degrees_rows(target, vertices):
    """Second degrees of ``vertices`` in each row of an ``(R, N)`` target matrix (m = 1)."""
    n_rows, n = target.shape
    eu = np.arange(1, n + 1)
    out = np.empty((n_rows, vertices.shape[0]), dtype=np.int64)
    for r in range(n_rows):
        d2 = forest_second_degrees(n, eu, target[r])
        for j in range(vertices.shape[0]):
            out[r, j] = d2[vertices[j] - 1]
    return out
