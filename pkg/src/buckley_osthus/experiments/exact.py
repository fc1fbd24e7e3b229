"""Exhaustive enumeration of the coordinate product space for tiny n."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..exceptions import BudgetError, UnsupportedError
from ..model import ModelParams, XiSequence, attachment_law_check, materialize, outcome_count
from ..multigraph import MultiGraph
from ..statistics import count_tables

DEFAULT_MAX_OUTCOMES = 10_395


def _exact(a):
    return a if isinstance(a, Fraction) else Fraction(a)


def xi_probability(i, value, a):
    """Exact probability that coordinate ``i`` takes ``value``."""
    if i == 1:
        return Fraction(1)
    denom = (a + 1) * i - 1
    return (a if value % 2 else Fraction(1)) / denom


def enumerate_outcomes(n_coordinates, a, max_outcomes=DEFAULT_MAX_OUTCOMES):
    """Yield ``(xi, probability)`` over every outcome, probabilities as ``Fraction``."""
    if outcome_count(n_coordinates) > max_outcomes:
        raise BudgetError(
            f"{outcome_count(n_coordinates)} outcomes exceed the budget of {max_outcomes}"
        )
    a = _exact(a)
    per_coord = [
        [(v, xi_probability(i, v, a)) for v in range(1, 2 * i)]
        for i in range(1, n_coordinates + 1)
    ]
    for combo in itertools.product(*per_coord):
        prob = Fraction(1)
        for _, p in combo:
            prob *= p
        yield tuple(v for v, _ in combo), prob


def sampler_graph_law(n, a, max_outcomes=DEFAULT_MAX_OUTCOMES):
    """Distribution of the target vector induced by the coordinate sampler (m = 1)."""
    law = defaultdict(Fraction)
    for xi, prob in enumerate_outcomes(n, a, max_outcomes):
        seq = XiSequence.from_xi(xi)
        law[tuple(seq.target.tolist())] += prob
    return dict(law)


def sequential_graph_law(n, a):
    """Distribution of the target vector under vertex-by-vertex attachment (m = 1).

    Vertex ``t`` joins ``s`` with probability ``(d(s) - 1 + a) / ((a + 1) t - 1)``
    given the graph on the first ``t - 1`` vertices.
    """
    params = ModelParams(_exact(a), 1, 1)
    layer = {(): Fraction(1)}
    for t in range(1, n + 1):
        nxt = defaultdict(Fraction)
        for targets, prob in layer.items():
            prefix = None
            if t > 1:
                edges = np.column_stack((np.arange(1, t), np.array(targets)))
                prefix = MultiGraph(t - 1, edges, m=1)
            for s, p in enumerate(attachment_law_check(params, prefix, t), start=1):
                if p:
                    nxt[targets + (s,)] += prob * p
        layer = dict(nxt)
    return layer


@dataclass(frozen=True)
class ExactTables:
    """Exact expectations of the count tables, values as ``Fraction``."""

    params: ModelParams
    X: dict
    N: dict
    P: dict

    def Y(self, k):
        return sum((v for j, v in self.X.items() if j >= k), Fraction(0))

    def as_dict(self):
        def s(x):
            return f"{x.numerator}/{x.denominator}"

        return {
            "X": {str(k): s(v) for k, v in sorted(self.X.items())},
            "N": [[l, k, s(v)] for (l, k), v in sorted(self.N.items())],
            "P": [[l, k, s(v)] for (l, k), v in sorted(self.P.items())],
        }


def exact_small_n(params, max_outcomes=DEFAULT_MAX_OUTCOMES):
    """Exact ``E X``, ``E N`` and ``E P`` (and ``E Y`` via :meth:`ExactTables.Y`) for m = 1.

    Raises
    ------
    BudgetError
        If ``prod (2i - 1)`` exceeds ``max_outcomes``.
    """
    if params.m != 1:
        raise UnsupportedError("exact enumeration is implemented for m = 1")
    X, N, P = defaultdict(Fraction), defaultdict(Fraction), defaultdict(Fraction)
    for xi, prob in enumerate_outcomes(params.n, params.a, max_outcomes):
        tables = count_tables(materialize(XiSequence.from_xi(xi), params))
        for key, c in tables.X.items():
            X[key] += prob * c
        for key, c in tables.N.items():
            N[key] += prob * c
        for key, c in tables.P.items():
            P[key] += prob * c
    return ExactTables(params, dict(X), dict(N), dict(P))
