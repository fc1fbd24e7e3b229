"""Buckley-Osthus preferential attachment via independent coordinates.

Coordinate ``i`` (``1 <= i <= N``) takes a value in ``{1, ..., 2i - 1}``.
An odd value ``2j - 1`` sends the edge of vertex ``i`` to vertex ``j``; an
even value ``2j`` sends it wherever the edge of vertex ``j`` goes. With
``P(odd value) = a / ((a + 1) i - 1)`` and ``P(even value) = 1 / ((a + 1) i - 1)``
for each admissible value, the resulting graph has the preferential
attachment law with weight ``degree - 1 + a``. The ``m > 1`` graph on ``n``
vertices is obtained from the ``m = 1`` graph on ``m * n`` vertices by merging
consecutive blocks of ``m`` vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .exceptions import ConsistencyError, ParameterError, UnsupportedError
from .multigraph import MultiGraph
from .validation import check_attractiveness, check_positive_int, check_seed


@dataclass(frozen=True)
class ModelParams:
    """Parameters ``(a, m, n)`` of the random graph ``H_{a,m}^n``.

    ``a`` may be a :class:`fractions.Fraction` for exact enumeration.
    """

    a: float
    m: int = 1
    n: int = 1

    def __post_init__(self):
        check_attractiveness(self.a)
        check_positive_int(self.m, "m")
        check_positive_int(self.n, "n")

    @property
    def coordinates(self):
        """Number of coordinates ``N = m * n``."""
        return self.m * self.n

    def as_dict(self):
        return {"a": float(self.a), "m": self.m, "n": self.n}


@dataclass(frozen=True, eq=False)
class XiSequence:
    """Sampled coordinates and their resolved attachment targets.

    ``xi[i - 1]`` and ``target[i - 1]`` belong to coordinate ``i``.
    """

    xi: np.ndarray
    target: np.ndarray
    seed: int | None = None
    params: ModelParams | None = field(default=None)

    def __post_init__(self):
        for arr in (self.xi, self.target):
            arr.flags.writeable = False

    def __len__(self):
        return self.xi.shape[0]

    def __eq__(self, other):
        if not isinstance(other, XiSequence):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.params == other.params
            and np.array_equal(self.xi, other.xi)
            and np.array_equal(self.target, other.target)
        )

    __hash__ = None

    @classmethod
    def from_xi(cls, xi, seed=None, params=None):
        """Validate a coordinate vector and resolve its targets."""
        xi = np.array(xi, dtype=np.int64).ravel()
        check_xi(xi)
        return cls(xi, resolve_targets(xi), seed, params)

    def leads_to(self):
        """Map vertex ``v`` to the sorted coordinates whose chains end at ``v``.

        Returns ``(indptr, coords)`` in CSR form over vertices ``1..N``.
        """
        order = np.argsort(self.target, kind="stable")
        counts = np.bincount(self.target, minlength=len(self) + 1)
        indptr = np.zeros(len(self) + 2, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, order + 1


def check_xi(xi):
    """Raise :class:`ParameterError` unless ``1 <= xi[i-1] <= 2i - 1`` for every i."""
    i = np.arange(1, xi.shape[0] + 1)
    bad = np.flatnonzero((xi < 1) | (xi > 2 * i - 1))
    if bad.size:
        j = int(bad[0]) + 1
        raise ParameterError(f"xi[{j}] = {int(xi[j - 1])} outside 1..{2 * j - 1}")


def sample_xi(i, a, rng):
    """Draw one coordinate value for index ``i``.

    A single uniform ``u`` on ``[0, (a + 1) i - 1)`` is split into ``i`` odd
    cells of width ``a`` followed by ``i - 1`` even cells of width 1.

    Parameters
    ----------
    i : int
        Coordinate index, ``i >= 1``.
    a : float
        Initial attractiveness.
    rng : numpy.random.Generator

    Returns
    -------
    int
        A value in ``{1, ..., 2i - 1}``.
    """
    check_positive_int(i, "i")
    a = float(check_attractiveness(a))
    if i == 1:
        return 1
    u = rng.random() * ((a + 1.0) * i - 1.0)
    if u < a * i:
        return 2 * min(int(u / a), i - 1) + 1
    return 2 * min(int(u - a * i), i - 2) + 2


def sample_xi_array(a, size, rng, out_shape=None):
    """Vectorised :func:`sample_xi` for coordinates ``1..size``.

    ``out_shape`` may prepend a replica axis: ``(R,)`` yields an ``(R, size)``
    matrix with independent rows.
    """
    a = float(a)
    shape = (size,) if out_shape is None else tuple(out_shape) + (size,)
    if size == 0:
        return np.zeros(shape, dtype=np.int64)
    u = rng.random(shape).reshape(-1, size)
    xi = np.empty(u.shape, dtype=np.int64)
    for r in range(u.shape[0]):
        _kernels.xi_from_uniforms(u[r], a, xi[r])
    return xi.reshape(shape)


def resolve_targets(xi, start=0, target=None):
    """Resolve every coordinate to the vertex its chain leads to.

    Parameters
    ----------
    xi : ndarray of int64
    start : int, optional
        0-based position from which to (re)resolve; earlier entries of
        ``target`` are reused.
    target : ndarray, optional
        Existing target array to update in place.
    """
    xi = np.ascontiguousarray(xi, dtype=np.int64)
    if target is None:
        target = np.empty_like(xi)
    _kernels.resolve_targets(xi, target, start)
    return target


def build_sequence(params, seed):
    """Sample the coordinates of ``H_{a,m}^n`` and resolve their targets.

    Deterministic in ``(params, seed)``; cost is O(m n).
    """
    seed = check_seed(seed)
    rng = np.random.default_rng(seed)
    xi = np.empty(params.coordinates, dtype=np.int64)
    _kernels.xi_from_uniforms(rng.random(params.coordinates), float(params.a), xi)
    return XiSequence(xi, resolve_targets(xi), seed, params)


def materialize(seq, params=None):
    """Build the multigraph of a coordinate sequence.

    Coordinate ``i`` contributes the edge ``(ceil(i/m), ceil(target[i]/m))``.
    """
    params = params if params is not None else seq.params
    if params is None:
        raise ConsistencyError("materialize needs ModelParams")
    if len(seq) != params.coordinates:
        raise ConsistencyError(
            f"sequence has {len(seq)} coordinates, params require m*n = {params.coordinates}"
        )
    m = params.m
    src = np.arange(len(seq), dtype=np.int64) // m + 1
    dst = (seq.target - 1) // m + 1
    return MultiGraph(params.n, np.column_stack((src, dst)), m=m)


def generate(params, seed):
    """Convenience: :func:`build_sequence` followed by :func:`materialize`."""
    seq = build_sequence(params, seed)
    return seq, materialize(seq, params)


def attachment_law_check(params, prefix_graph, t):
    """Exact attachment distribution of vertex ``t`` given ``H_{a,1}^{t-1}``.

    Returns a list ``p`` with ``p[s - 1] = P(vertex t attaches to s)``:
    ``(d(s) - 1 + a) / ((a + 1) t - 1)`` for ``s < t`` and
    ``a / ((a + 1) t - 1)`` for the loop ``s = t``. Arithmetic follows the
    type of ``params.a``, so a ``Fraction`` yields exact values.
    """
    if params.m != 1:
        raise UnsupportedError("the sequential law is defined for m = 1 only")
    check_positive_int(t, "t")
    prefix_n = 0 if prefix_graph is None else prefix_graph.vertex_count
    if prefix_n != t - 1:
        raise ConsistencyError(f"prefix graph must have t - 1 = {t - 1} vertices, has {prefix_n}")
    a = params.a
    denom = (a + 1) * t - 1
    degs = [] if prefix_graph is None else prefix_graph.degrees.tolist()
    return [(d - 1 + a) / denom for d in degs] + [a / denom]


def save_sequence(seq, path):
    """Write a sequence as text: a header line of ``key=value`` pairs, then one xi per line."""
    p = seq.params
    header = f"# a={float(p.a)!r} m={p.m} n={p.n} seed={seq.seed}\n" if p else f"# seed={seq.seed}\n"
    body = "\n".join(map(str, seq.xi.tolist()))
    Path(path).write_text(header + body + "\n")


def load_sequence(path):
    lines = Path(path).read_text().splitlines()
    meta = {}
    if lines and lines[0].startswith("#"):
        meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
        lines = lines[1:]
    xi = [int(x) for x in lines if x.strip()]
    params = None
    if "a" in meta:
        params = ModelParams(float(meta["a"]), int(meta["m"]), int(meta["n"]))
    seed = None if meta.get("seed", "None") == "None" else int(meta["seed"])
    seq = XiSequence.from_xi(xi, seed=seed, params=params)
    if params is not None and len(seq) != params.coordinates:
        raise ConsistencyError("sequence length does not match header")
    return seq


def outcome_count(n_coordinates):
    """Size of the coordinate product space, ``prod (2i - 1)``."""
    return math.prod(2 * i - 1 for i in range(1, n_coordinates + 1))
