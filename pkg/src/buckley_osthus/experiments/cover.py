"""Stable coordinate covers certifying the k-vertices of an m = 1 realisation.

For a k-vertex ``v`` a cover set ``K_v`` is a set of coordinates such that
``v`` stays a k-vertex whatever values the remaining coordinates take. A
collection is stable when every set that holds one coordinate leading to a
vertex holds all coordinates leading to it. ``L_v`` below denotes the
coordinates whose chains end at ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..exceptions import ConsistencyError, UnsupportedError
from ..model import sample_xi_array
from ..statistics import second_degrees
from ..validation import check_positive_int, check_seed


@dataclass(frozen=True, eq=False)
class StableCover:
    """Cover sets grouped by identical coordinate set.

    Attributes
    ----------
    k : int
    groups : list of (ndarray, ndarray)
        ``(vertices, coordinates)``; every vertex of a group uses the same
        coordinate set. The first group (if any) is the shared set of the
        neighbours of high-degree vertices.
    multiplicity : ndarray
        ``multiplicity[i - 1]`` is the number of cover sets containing ``i``.
    """

    k: int
    groups: list
    multiplicity: np.ndarray

    @property
    def q(self):
        return sum(len(v) for v, _ in self.groups)

    @property
    def vertices(self):
        if not self.groups:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate([v for v, _ in self.groups]))

    @property
    def costs(self):
        return np.minimum(2 * self.k + 1, self.multiplicity)

    @property
    def total_cost(self):
        return int(self.costs.sum())

    @property
    def budget(self):
        return (4 * self.k + 5) * self.q

    def within_budget(self):
        return self.total_cost <= self.budget

    def set_for(self, v):
        for verts, coords in self.groups:
            if v in verts:
                return coords
        raise KeyError(v)


def _leads_to(target):
    n = target.shape[0]
    order = np.argsort(target, kind="stable")
    indptr = np.zeros(n + 2, dtype=np.int64)
    np.cumsum(np.bincount(target, minlength=n + 1), out=indptr[1:])
    return indptr, order + 1


def build_stable_cover(g, seq, k):
    """Construct a stable cover of all vertices with second degree at least ``k``.

    Vertices of degree ``>= k + 2`` form ``V``; their neighbours ``NV`` share
    the set ``L(V) | L(BV)``, where ``BV`` are members of ``NV`` whose own
    edge does not go into ``V``. Every other k-vertex ``w`` takes ``L_w``
    plus ``L_u`` for neighbours ``u`` chosen in increasing index until the
    edges pinned by the set that avoid ``w`` number at least ``k``. If the
    neighbours alone fall short, the targets of their outgoing edges are
    added in the same order.
    """
    if g.m != 1 or seq.params is not None and seq.params.m != 1:
        raise UnsupportedError("stable covers are built for m = 1 realisations")
    target = np.asarray(seq.target)
    n = target.shape[0]
    if g.vertex_count != n:
        raise ConsistencyError("graph and sequence sizes differ")
    check_positive_int(k, "k", minimum=0)
    indptr, coords = _leads_to(target)

    def L(v):
        return coords[indptr[v]:indptr[v + 1]]

    deg = g.degrees
    d2 = second_degrees(g)
    is_k = d2 >= k
    mult = np.zeros(n, dtype=np.int64)
    groups = []

    in_v = np.zeros(n + 1, dtype=bool)
    in_v[1:] = deg >= k + 2
    src = np.arange(1, n + 1)
    nonloop = src != target
    # neighbours of V: endpoints of non-loop edges whose other end is in V
    in_nv = np.zeros(n + 1, dtype=bool)
    in_nv[src[nonloop & in_v[target]]] = True
    in_nv[target[nonloop & in_v[src]]] = True
    nv = np.flatnonzero(in_nv)
    if nv.size:
        if not is_k[nv - 1].all():
            raise ConsistencyError("a neighbour of a high-degree vertex is not a k-vertex")
        bv = nv[~in_v[target[nv - 1]]]
        members = np.zeros(n + 1, dtype=bool)
        for v in np.concatenate((np.flatnonzero(in_v), bv)):
            members[L(v)] = True
        shared = np.flatnonzero(members)
        mult[shared - 1] += nv.size
        groups.append((nv, shared))

    for w in np.flatnonzero(is_k & ~in_nv[1:]) + 1:
        w = int(w)
        chosen = {w}
        pinned = set(L(w).tolist())
        nbrs = g.neighbors(w)
        for u in nbrs:
            if _pinned_count(pinned, target, w) >= k:
                break
            chosen.add(int(u))
            pinned.update(L(int(u)).tolist())
        for u in nbrs:
            if _pinned_count(pinned, target, w) >= k:
                break
            x = int(target[u - 1])
            if x not in chosen:
                chosen.add(x)
                pinned.update(L(x).tolist())
        if _pinned_count(pinned, target, w) < k:
            raise ConsistencyError(f"could not certify k-vertex {w}")
        ks = np.array(sorted(pinned), dtype=np.int64)
        mult[ks - 1] += 1
        groups.append((np.array([w], dtype=np.int64), ks))
    return StableCover(k, groups, mult)


def _pinned_count(pinned, target, w):
    """Edges fixed by ``pinned`` that avoid ``w`` and touch a vertex whose link to ``w`` is also fixed."""

    def linked(e):
        return e != w and ((target[e - 1] == w and e in pinned) or (target[w - 1] == e and w in pinned))

    count = 0
    for i in pinned:
        t = int(target[i - 1])
        if i != w and t != w and (linked(i) or linked(t)):
            count += 1
    return count


def check_stability(cover, seq):
    """True when every cover set is closed under "leads to the same vertex"."""
    target = np.asarray(seq.target)
    indptr, coords = _leads_to(target)
    for _, ks in cover.groups:
        heads = np.unique(target[ks - 1])
        full = np.concatenate([coords[indptr[v]:indptr[v + 1]] for v in heads]) if heads.size else ks
        if full.size != ks.size or not np.array_equal(np.sort(full), ks):
            return False
    return True


def check_witness(cover, seq, completions=100, seed=0):
    """Resample coordinates outside each cover set and confirm every covered vertex stays a k-vertex.

    Returns
    -------
    list of (int, int)
        ``(vertex, completion index)`` pairs that failed; empty on success.
    """
    check_positive_int(completions, "completions")
    rng = np.random.default_rng(check_seed(seed))
    a = float(seq.params.a)
    n = len(seq)
    failures = []
    for verts, ks in cover.groups:
        xi = sample_xi_array(a, n, rng, (completions,))
        xi[:, ks - 1] = seq.xi[ks - 1]
        target = np.empty_like(xi)
        _kernels.resolve_targets_2d(xi, target)
        d2 = _kernels.forest_second_degrees_rows(target, np.ascontiguousarray(verts))
        bad_r, bad_j = np.nonzero(d2 < cover.k)
        failures.extend((int(verts[j]), int(r)) for r, j in zip(bad_r, bad_j))
    return failures
