"""Degree and second-degree statistics of a realised multigraph.

The second degree of ``t`` counts edge instances that avoid ``t`` and touch
at least one neighbour of ``t`` (a vertex other than ``t`` sharing an edge
with it). A loop at a neighbour counts once; an edge joining two neighbours
counts once.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

CSV_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class VertexStats:
    degree: int
    second_degree: int
    has_loop: bool


def second_degrees(g):
    """Second degree of every vertex, index ``v - 1``."""
    if g.vertex_count == 0:
        return np.zeros(0, dtype=np.int64)
    eu = np.ascontiguousarray(g.edges[:, 0])
    ev = np.ascontiguousarray(g.edges[:, 1])
    if g.m == 1:
        return _kernels.forest_second_degrees(g.vertex_count, eu, ev)
    indptr, inc = g.incidence
    return _kernels.second_degrees_csr(g.vertex_count, eu, ev, indptr, inc)


def second_degree(g, t):
    """Second degree of a single vertex ``t``."""
    g._check_vertex(t)
    counted = set()
    for u in g.neighbors(t):
        for e in g.incident_edges(int(u)):
            a, b = g.edges[e]
            if a != t and b != t:
                counted.add(int(e))
    return len(counted)


def vertex_stats(g):
    """Per-vertex :class:`VertexStats` list."""
    d2 = second_degrees(g)
    return [
        VertexStats(int(d), int(s), bool(lp))
        for d, s, lp in zip(g.degrees, d2, g.loop_counts)
    ]


def count_y(g, k):
    """Number of vertices with second degree at least ``k``."""
    return int(np.count_nonzero(second_degrees(g) >= k))


@dataclass(frozen=True)
class CountTables:
    """Sparse count tables of one realisation.

    ``X[k]`` is the number of vertices of second degree ``k``; ``N[(l, k)]``
    and ``P[(l, k)]`` split them by degree ``l`` and by absence / presence
    of a loop. ``Y(k)`` (vertices with second degree at least ``k``) is
    derived from ``X``.
    """

    n: int
    X: dict = field(default_factory=dict)
    N: dict = field(default_factory=dict)
    P: dict = field(default_factory=dict)

    @property
    def max_k(self):
        return max(self.X, default=0)

    def Y(self, k):
        return sum(c for j, c in self.X.items() if j >= k)

    def y_table(self):
        """Dense ``{k: Y(k)}`` for ``k = 0..max_k``."""
        out, run = {}, 0
        for k in range(self.max_k, -1, -1):
            run += self.X.get(k, 0)
            out[k] = run
        return dict(sorted(out.items()))

    def y_array(self, ks):
        ks = np.asarray(ks)
        keys = np.array(sorted(self.X), dtype=np.int64)
        vals = np.array([self.X[k] for k in keys], dtype=np.int64)
        tail = np.concatenate((np.cumsum(vals[::-1])[::-1], [0]))
        return tail[np.searchsorted(keys, ks, side="left")]

    def to_csv(self):
        """Two CSV blocks: ``k,Y,X`` rows then ``l,k,N,P`` rows."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "Y", "X"])
        for k, y in self.y_table().items():
            w.writerow([k, y, self.X.get(k, 0)])
        w.writerow([])
        w.writerow(["l", "k", "N", "P"])
        for l, k in sorted(set(self.N) | set(self.P)):
            w.writerow([l, k, self.N.get((l, k), 0), self.P.get((l, k), 0)])
        return buf.getvalue()

    def as_dict(self):
        return {
            "n": self.n,
            "Y": {str(k): v for k, v in self.y_table().items()},
            "X": {str(k): v for k, v in sorted(self.X.items())},
            "N": [[l, k, c] for (l, k), c in sorted(self.N.items())],
            "P": [[l, k, c] for (l, k), c in sorted(self.P.items())],
        }


def count_tables(g):
    """Tabulate ``X``, ``N`` and ``P`` for one realisation."""
    d2 = second_degrees(g)
    deg = g.degrees
    loop = g.loop_counts > 0
    xc = np.bincount(d2)
    ks = np.flatnonzero(xc)
    X = dict(zip(ks.tolist(), xc[ks].tolist()))
    return CountTables(g.vertex_count, X, _pair_counts(deg[~loop], d2[~loop]), _pair_counts(deg[loop], d2[loop]))


def _pair_counts(deg, d2):
    keys, counts = np.unique((deg.astype(np.int64) << 32) | d2, return_counts=True)
    return dict(zip(zip((keys >> 32).tolist(), (keys & 0xFFFFFFFF).tolist()), counts.tolist()))


def degree_histogram(g):
    """``{degree: number of vertices}`` over the realised support."""
    counts = np.bincount(g.degrees)
    nz = np.flatnonzero(counts)
    return dict(zip(nz.tolist(), counts[nz].tolist()))


def read_tables_csv(text):
    """Parse the output of :meth:`CountTables.to_csv` back into a CountTables.

    Lines starting with ``#`` are ignored.
    """
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    split = rows.index([])
    X = {int(k): int(x) for k, _, x in rows[1:split] if int(x)}
    N, P = {}, {}
    for l, k, nv, pv in rows[split + 2:]:
        if int(nv):
            N[(int(l), int(k))] = int(nv)
        if int(pv):
            P[(int(l), int(k))] = int(pv)
    n = int(rows[1][1]) if split > 1 else 0
    return CountTables(n, X, N, P)
