"""Undirected multigraph with loops, stored as an edge array plus a CSR incidence index."""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ._kernels import build_incidence
from .exceptions import ConsistencyError, ParameterError


class MultiGraph:
    """Undirected multigraph on vertices ``1..vertex_count``.

    Loops and parallel edges are kept. Edge order is significant: edge ``e``
    is the one contributed by coordinate ``e + 1`` when the graph comes from
    :func:`~buckley_osthus.model.materialize`.

    Parameters
    ----------
    vertex_count : int
        Number of vertices.
    edges : array_like of shape (E, 2)
        Endpoint pairs, 1-based.
    m : int, optional
        Edges per vertex of the generating model, if known. ``m == 1``
        enables the forest fast path in the statistics module.

    Notes
    -----
    Instances are read-only after construction; arrays are flagged
    non-writeable so they can be shared across threads.
    """

    def __init__(self, vertex_count, edges, m=None):
        vertex_count = int(vertex_count)
        if vertex_count < 0:
            raise ParameterError("vertex_count must be nonnegative")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 1 or edges.max() > vertex_count):
            raise ConsistencyError("edge endpoint outside 1..vertex_count")
        edges = edges.copy()
        edges.flags.writeable = False
        self.vertex_count = vertex_count
        self.edges = edges
        self.m = m

    def __repr__(self):
        return f"MultiGraph(vertex_count={self.vertex_count}, edge_count={self.edge_count})"

    def __eq__(self, other):
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self.vertex_count == other.vertex_count and np.array_equal(self.edges, other.edges)

    __hash__ = None

    @property
    def edge_count(self):
        return self.edges.shape[0]

    @cached_property
    def degrees(self):
        """Degree of each vertex, index ``v - 1``; a loop adds 2."""
        deg = np.bincount(self.edges.ravel(), minlength=self.vertex_count + 1)[1:]
        deg.flags.writeable = False
        return deg

    @cached_property
    def loop_counts(self):
        loops = self.edges[:, 0] == self.edges[:, 1]
        cnt = np.bincount(self.edges[loops, 0], minlength=self.vertex_count + 1)[1:]
        cnt.flags.writeable = False
        return cnt

    @cached_property
    def incidence(self):
        """CSR incidence ``(indptr, edge_ids)`` indexed by vertex ``1..n``.

        Each edge appears under both endpoints, so a loop is listed twice
        under its vertex.
        """
        indptr, inc = build_incidence(
            self.vertex_count,
            np.ascontiguousarray(self.edges[:, 0]),
            np.ascontiguousarray(self.edges[:, 1]),
        )
        indptr.flags.writeable = False
        inc.flags.writeable = False
        return indptr, inc

    def incident_edges(self, v):
        """Edge ids touching ``v`` (loops listed twice)."""
        self._check_vertex(v)
        indptr, inc = self.incidence
        return inc[indptr[v]:indptr[v + 1]]

    def neighbors(self, v):
        """Sorted distinct neighbours of ``v``, excluding ``v`` itself."""
        e = self.edges[self.incident_edges(v)]
        other = np.where(e[:, 0] == v, e[:, 1], e[:, 0])
        return np.unique(other[other != v])

    def has_loop(self, v):
        self._check_vertex(v)
        return bool(self.loop_counts[v - 1])

    def _check_vertex(self, v):
        if not 1 <= v <= self.vertex_count:
            raise ParameterError(f"vertex {v} outside 1..{self.vertex_count}")

    def relabel(self, permutation):
        """Return the isomorphic graph with vertex ``v`` renamed ``permutation[v - 1]``."""
        perm = np.asarray(permutation, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(1, self.vertex_count + 1)):
            raise ParameterError("permutation must be a rearrangement of 1..vertex_count")
        return MultiGraph(self.vertex_count, perm[self.edges - 1], m=None)
