"""Closed-form and recurrent predictions for the second-degree statistics.

All beta/gamma quantities are evaluated through log-gamma, so arguments in
the ``10**4``-``10**8`` range neither overflow nor underflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli, binom, gamma as _gamma, gammaln

from . import _kernels
from .exceptions import BudgetError, DomainError, TruncationError
from .validation import check_attractiveness, check_positive_int

JSON_SCHEMA_VERSION = "1"
DEFAULT_MAX_CELLS = 50_000_000
_DIRECT_GAMMA_LIMIT = 30.0
_SERIES_TERMS = 10
_BERNOULLI = bernoulli(_SERIES_TERMS + 1)

# tail-bound geometry: c(l, k) <= C * TAIL_P**k / (1 + q)**l
TAIL_P = 2.0


def log_beta(x, y):
    return gammaln(x) + gammaln(y) - gammaln(x + y)


def _bernoulli_poly(n, x):
    return sum(binom(n, j) * _BERNOULLI[j] * x ** (n - j) for j in range(n + 1))


def _log_gamma_ratio_series(t, a):
    # ln G(t + a) - ln G(t) = a ln t + sum_n (-1)^(n+1) (B_{n+1}(a) - B_{n+1}) / (n (n+1) t^n)
    acc = 0.0
    for n in range(_SERIES_TERMS, 0, -1):
        term = (_bernoulli_poly(n + 1, a) - _BERNOULLI[n + 1]) / (n * (n + 1))
        acc = (acc + (-1) ** (n + 1) * term) / t
    return a * math.log(t) + acc


def gamma_ratio(t, a):
    """``Gamma(t + a) / Gamma(t)`` without overflow.

    Small arguments use the gamma function directly so that integer shifts
    come out exact. Large ``t`` uses the asymptotic series of the log ratio,
    which avoids the cancellation between two huge log-gamma values; the
    range in between goes through log-gamma.
    """
    t = float(t)
    a = float(a)
    if t <= 0 or t + a <= 0:
        raise DomainError(f"gamma_ratio needs t > 0 and t + a > 0, got t={t}, a={a}")
    if max(t, t + a) < _DIRECT_GAMMA_LIMIT:
        return float(_gamma(t + a) / _gamma(t))
    if t >= _DIRECT_GAMMA_LIMIT * max(1.0, abs(a)):
        return float(math.exp(_log_gamma_ratio_series(t, a)))
    return float(np.exp(gammaln(t + a) - gammaln(t)))


def gamma_ratio_asymptotic(t, a):
    """Leading-order ``t**a`` of :func:`gamma_ratio`."""
    return float(t) ** float(a)


def c_of_k(k, a):
    """Limiting degree-law constant ``c(k) = B(k - 1 + a, a + 2) / B(a, a + 1)``.

    ``c(k) * n`` is the leading term of the expected number of degree-k
    vertices when ``m = 1``.
    """
    if k < 1:
        raise DomainError(f"c(k) needs k >= 1, got {k}")
    a = float(check_attractiveness(a))
    return float(np.exp(log_beta(k - 1 + a, a + 2) - log_beta(a, a + 1)))


def _c_vector(k_max, a):
    k = np.arange(1, k_max + 1, dtype=np.float64)
    ck = np.zeros(k_max + 1)
    ck[1:] = np.exp(log_beta(k - 1 + a, a + 2) - log_beta(a, a + 1))
    return ck


@dataclass(frozen=True, eq=False)
class AnalyticTables:
    """Dense ``c(l, k)`` and/or ``p(l, k)`` tables for ``0 <= l <= l_max``, ``0 <= k <= k_max``.

    ``p`` is an upper-bound family for the expected loop-vertex counts, not
    an expectation. ``tail_bounds[k]`` bounds ``sum_{l > l_max} c(l, k)``;
    ``truncation_certificate`` is its maximum over ``k`` (may be ``inf``).
    """

    a: float
    l_max: int
    k_max: int
    c: np.ndarray | None = None
    p: np.ndarray | None = None
    p0: float | None = None
    tail_constant: float | None = None
    tail_bounds: np.ndarray | None = None
    truncation_certificate: float | None = None

    @property
    def tail_q(self):
        return tail_q(self.a)

    def merge(self, other):
        if (self.a, self.l_max, self.k_max) != (other.a, other.l_max, other.k_max):
            raise ValueError("tables disagree on (a, l_max, k_max)")
        pick = lambda x, y: x if x is not None else y  # noqa: E731
        return AnalyticTables(
            self.a, self.l_max, self.k_max,
            pick(self.c, other.c), pick(self.p, other.p), pick(self.p0, other.p0),
            pick(self.tail_constant, other.tail_constant),
            pick(self.tail_bounds, other.tail_bounds),
            pick(self.truncation_certificate, other.truncation_certificate),
        )

    def header(self):
        return {
            "schema_version": JSON_SCHEMA_VERSION,
            "a": self.a,
            "l_max": self.l_max,
            "k_max": self.k_max,
            "P0": self.p0,
            "tail_constant": self.tail_constant,
            "truncation_certificate": _json_float(self.truncation_certificate),
        }

    def to_json(self):
        doc = self.header()
        if self.c is not None:
            doc["c"] = self.c.tolist()
        if self.p is not None:
            doc["p"] = self.p.tolist()
        return json.dumps(doc)

    def csv_rows(self):
        """Yield ``(l, k, c, p)`` for ``l >= 1``; missing tables give ``nan``."""
        for l in range(1, self.l_max + 1):
            for k in range(self.k_max + 1):
                cv = float(self.c[l, k]) if self.c is not None else math.nan
                pv = float(self.p[l, k]) if self.p is not None else math.nan
                yield l, k, cv, pv


def _json_float(x):
    if x is None or math.isfinite(x):
        return x
    return str(x)


def tail_q(a):
    return min(float(a), 1.0) * (TAIL_P - 1.0) / TAIL_P


def _check_budget(l_max, k_max, max_cells):
    check_positive_int(l_max, "l_max")
    check_positive_int(k_max, "k_max")
    cells = (l_max + 1) * (k_max + 1)
    if cells > max_cells:
        raise BudgetError(f"table of {cells} cells exceeds budget {max_cells}")


def _fill_c_extended(a, l_max, k_max):
    a = np.longdouble(a)
    ck = np.zeros(k_max + 1, dtype=np.longdouble)
    # c(k + 1) / c(k) = (k - 1 + a) / (k + 1 + 2a), c(1) = (a + 1) / (2a + 1)
    ck[1] = (a + 1) / (2 * a + 1)
    for k in range(1, k_max):
        ck[k + 1] = ck[k] * (k - 1 + a) / (k + 1 + 2 * a)
    c = np.zeros((l_max + 1, k_max + 1), dtype=np.longdouble)
    for k in range(1, k_max + 1):
        c[1, k] = (c[1, k - 1] + ck[k]) * (a + k - 1) / (k + 3 * a + 1)
        for l in range(2, l_max + 1):
            c[l, k] = (c[l, k - 1] * (a * l + k - 1) + c[l - 1, k] * (l - 2 + a)) / (
                l * (1 + a) + k + 2 * a
            )
    return c


def _tail_certificate(a, c, l_max):
    """Calibrate ``C`` on row ``l = 1`` and bound the tail beyond ``l_max`` for each k."""
    k = np.arange(c.shape[1], dtype=np.float64)
    row = np.asarray(c[1], dtype=np.float64)
    q = tail_q(a)
    with np.errstate(divide="ignore"):
        log_row = np.log(row[1:])
    log_C = float(np.max(log_row + math.log(1 + a * TAIL_P) - k[1:] * math.log(TAIL_P)))
    log_tail = log_C + k * math.log(TAIL_P) - l_max * math.log1p(q) - math.log(q)
    with np.errstate(over="ignore"):
        tails = np.exp(log_tail)
    tails[0] = 0.0
    return math.exp(log_C), tails


def build_c_table(a, l_max, k_max, *, extended=False, max_cells=DEFAULT_MAX_CELLS):
    """Fill ``c(l, k)`` from ``c(l, 0) = c(0, k) = 0``.

    Row ``l = 1`` is driven by :func:`c_of_k`; rows ``l > 1`` by the
    two-term recurrence in ``(l - 1, k)`` and ``(l, k - 1)``.

    Parameters
    ----------
    a : float
    l_max, k_max : int
    extended : bool, optional
        Fill in ``numpy.longdouble`` instead of binary64.
    max_cells : int, optional
        Resource guard on ``(l_max + 1) * (k_max + 1)``.
    """
    a = float(check_attractiveness(a))
    _check_budget(l_max, k_max, max_cells)
    if extended:
        c = _fill_c_extended(a, l_max, k_max)
    else:
        c = _kernels.fill_c_table(a, l_max, k_max, _c_vector(k_max, a))
    C, tails = _tail_certificate(a, c, l_max)
    c.flags.writeable = False
    return AnalyticTables(
        a, l_max, k_max, c=c, tail_constant=C, tail_bounds=tails,
        truncation_certificate=float(tails.max()),
    )


def expected_loop_only_count(n, a):
    """Exact ``E P_n(2, 0)``: expected number of vertices whose only edge is their own loop.

    Returns the whole trajectory ``n' = 1..n`` as an array.
    """
    a = float(a)
    out = np.empty(n)
    e = 0.0
    for i in range(1, n + 1):
        denom = (a + 1) * i - 1
        e = e * (1 - (1 + a) / denom) + a / denom
        out[i - 1] = e
    return out


def default_p0(a, n_max=10_000):
    """Supremum of ``E P_n(2, 0)`` over ``n <= n_max``; the seed of the p-table."""
    return float(expected_loop_only_count(n_max, a).max())


def build_p_table(a, l_max, k_max, p0=None, *, extended=False, max_cells=DEFAULT_MAX_CELLS):
    """Fill the loop-vertex bound ``p(l, k)`` from ``p(2, 0) = P0``.

    ``p(l, k) = 0`` for ``l < 2`` and for ``l = 2, k >= 1``.

    Notes
    -----
    With the default ``P0`` the table dominates ``E P_n(l, k)`` for
    ``a >= 1``. For ``a < 1`` the cells with ``k < 1 / a`` can fall below the
    expectation at small ``n``; pass a larger ``p0`` if a strict bound is needed.
    """
    a = float(check_attractiveness(a))
    _check_budget(l_max, k_max, max_cells)
    p0 = default_p0(a) if p0 is None else float(p0)
    if not p0 > 0:
        raise DomainError(f"P0 must be positive, got {p0}")
    if extended:
        p = _fill_p_extended(a, l_max, k_max, p0)
    else:
        p = _kernels.fill_p_table(a, l_max, k_max, p0)
    p.flags.writeable = False
    return AnalyticTables(a, l_max, k_max, p=p, p0=p0)


def _fill_p_extended(a, l_max, k_max, p0):
    a = np.longdouble(a)
    p = np.zeros((l_max + 1, k_max + 1), dtype=np.longdouble)
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


def build_tables(a, l_max, k_max, p0=None, **kwargs):
    return build_c_table(a, l_max, k_max, **kwargs).merge(
        build_p_table(a, l_max, k_max, p0, **kwargs)
    )


def _ulps(value, reference):
    value = np.asarray(value, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    return np.abs(value - reference) / np.spacing(np.abs(value))


def c_recurrence_residual_ulps(tables):
    """Re-substitute every interior cell of ``c`` and return the residuals in ulps.

    The check evaluates the recurrence with pre-divided coefficients, a
    different rounding path from the fill, and returns an
    ``(l_max, k_max)`` array for ``l, k >= 1``.
    """
    a, c = tables.a, np.asarray(tables.c, dtype=np.float64)
    L, K = c.shape
    l = np.arange(1, L, dtype=np.float64)[:, None]
    k = np.arange(1, K, dtype=np.float64)[None, :]
    D = l * (1 + a) + k + 2 * a
    left = c[:-1, 1:].copy()
    left[0] = _c_vector(K - 1, a)[1:]
    coef_left = np.where(l == 1, a + k - 1, l - 2 + a)
    rhs = c[1:, :-1] * ((a * l + k - 1) / D) + left * (coef_left / D)
    return _ulps(c[1:, 1:], rhs)


def p_recurrence_residual_ulps(tables):
    """As :func:`c_recurrence_residual_ulps` for the recurrent cells of ``p``.

    Covers ``l >= 3`` in every column, including the ``k = 0`` column.
    """
    a, p = tables.a, np.asarray(tables.p, dtype=np.float64)
    L, K = p.shape
    l = np.arange(3, L, dtype=np.float64)[:, None]
    col0 = p[2:-1, 0] * ((l[:, 0] - 2 + a) / (l[:, 0] * (1 + a) - 2 - a))
    k = np.arange(1, K, dtype=np.float64)[None, :]
    D = l * (1 + a) + k - 1 - a
    rhs = p[3:, :-1] * ((a * l + k - 2 * a - 1) / D) + p[2:-1, 1:] * ((l - 2 + a) / D)
    return np.column_stack((_ulps(p[3:, 0], col0), _ulps(p[3:, 1:], rhs)))


@dataclass(frozen=True)
class SeriesSum:
    """Truncated ``sum_l c(l, k)`` with a rigorous bound on the omitted tail."""

    value: float
    certificate: float
    l_max: int


def sum_c_over_l(k, a, rel_tol=1e-10, *, l_start=None, max_cells=DEFAULT_MAX_CELLS):
    """Sum ``c(l, k)`` over ``l >= 1`` to relative accuracy ``rel_tol``.

    The truncation point doubles until the geometric tail bound drops below
    ``rel_tol`` times the partial sum.

    Raises
    ------
    TruncationError
        If the table budget runs out first.
    """
    check_positive_int(k, "k")
    a = float(check_attractiveness(a))
    L = l_start or max(64, 2 * k)
    partial, cert = math.nan, math.inf
    while (L + 1) * (k + 1) <= max_cells:
        t = build_c_table(a, L, k, max_cells=max_cells)
        partial = float(np.sum(t.c[1:, k]))
        cert = float(t.tail_bounds[k])
        if cert <= rel_tol * partial:
            return SeriesSum(partial, cert, L)
        L *= 2
    raise TruncationError(
        f"sum over l for k={k} did not reach rel_tol={rel_tol} within budget",
        partial_sum=partial,
        certificate=cert,
    )


def series_leading_term(k, a):
    """``(a + 1) Gamma(2a + 1) / (Gamma(a) k^(a + 1))``, the large-k value of ``sum_l c(l, k)``."""
    a = float(a)
    return float(np.exp(math.log(a + 1) + gammaln(2 * a + 1) - gammaln(a) - (a + 1) * math.log(k)))


def normalized_series_ratio(k, a, rel_tol=1e-10):
    return sum_c_over_l(k, a, rel_tol).value / series_leading_term(k, a)


def expected_degree_count(d, n, params):
    """Leading-order expected number of degree-``d`` vertices in ``H_{a,m}^n``.

    ``B(d - m + m a, a + 2) n / B(m a, a + 1)``; zero for ``d < m``.
    """
    a, m = float(params.a), params.m
    if d < m:
        return 0.0
    return float(np.exp(log_beta(d - m + m * a, a + 2) - log_beta(m * a, a + 1))) * n


def _y_constant_log(a):
    return math.log(a + 1) + gammaln(2 * a + 1) - gammaln(a + 1)


def expected_Y(n, k, a):
    """Leading term of the expected number of vertices with second degree at least ``k``.

    ``(a + 1) Gamma(2a + 1) n / (Gamma(a + 1) k^a)``, stated for ``k >= 2``.
    """
    if k < 2:
        raise DomainError(f"expected_Y is stated for k >= 2, got {k}")
    a = float(check_attractiveness(a))
    return float(n * np.exp(_y_constant_log(a) - a * math.log(k)))


def expected_X(n, k, a):
    """Leading term of the expected number of vertices with second degree exactly ``k``."""
    if k < 1:
        raise DomainError(f"expected_X needs k >= 1, got {k}")
    a = float(check_attractiveness(a))
    return float(n * np.exp(_y_constant_log(a) + math.log(a) - (a + 1) * math.log(k)))


def correction_terms(n, k, a):
    """Magnitudes of the two relative corrections: ``(ln k)^ceil(a+1) / k`` and ``k^(1+a) / n``."""
    a = float(a)
    return math.log(k) ** math.ceil(a + 1) / k, k ** (1 + a) / n
