"""Monte Carlo ensembles over independent realisations."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy import stats as sps

from ..exceptions import BuckleyOsthusError, ParameterError
from ..model import ModelParams, generate
from ..statistics import count_tables, degree_histogram
from ..validation import check_k_grid, check_positive_int, check_probability_open, check_seed


class ReplicaError(BuckleyOsthusError, RuntimeError):
    """A single replica failed; ``replica`` is its index."""

    def __init__(self, replica, seed, cause):
        super().__init__(f"replica {replica} (seed {seed}) failed: {cause!r}")
        self.replica = replica
        self.seed = seed


@dataclass(frozen=True)
class EnsembleSpec:
    """What to simulate and which statistics to keep.

    ``k_grid`` may start at 0. ``fit_k_max`` caps the k values entering the
    power-law fit; ``None`` means ``n ** (1 / (2 + a))``, the range where the
    second-degree counts concentrate.
    """

    params: ModelParams
    replicas: int
    base_seed: int = 0
    k_grid: tuple = (4, 8, 16, 32)
    l_grid: tuple | None = None
    d_grid: tuple | None = None
    fit_k_max: float | None = None
    n_jobs: int = 1

    def __post_init__(self):
        check_positive_int(self.replicas, "replicas")
        check_seed(self.base_seed)
        check_seed(self.base_seed + self.replicas - 1)
        object.__setattr__(self, "k_grid", tuple(check_k_grid(self.k_grid, minimum=0)))
        if self.l_grid is not None:
            object.__setattr__(self, "l_grid", tuple(check_k_grid(self.l_grid, "l_grid")))
        if self.d_grid is not None:
            object.__setattr__(self, "d_grid", tuple(check_k_grid(self.d_grid, "d_grid")))

    def seeds(self):
        return [self.base_seed + r for r in range(self.replicas)]

    def resolved_fit_k_max(self):
        if self.fit_k_max is not None:
            return self.fit_k_max
        return self.params.n ** (1.0 / (2.0 + float(self.params.a)))

    def as_dict(self):
        return {
            **self.params.as_dict(),
            "replicas": self.replicas,
            "base_seed": self.base_seed,
            "k_grid": list(self.k_grid),
            "l_grid": None if self.l_grid is None else list(self.l_grid),
            "d_grid": None if self.d_grid is None else list(self.d_grid),
            "fit_k_max": self.fit_k_max,
        }


@dataclass(frozen=True)
class PowerLawFit:
    """OLS fit of ``ln y = intercept + slope * ln k``."""

    slope: float
    slope_se: float
    intercept: float
    ks: tuple

    def predict(self, k):
        return np.exp(self.intercept) * np.asarray(k, dtype=float) ** self.slope


def fit_power_law(ks, ys):
    """Least squares on ``(ln k, ln y)``; needs at least two positive points."""
    ks = np.asarray(ks, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > 0
    if keep.sum() < 2:
        raise ParameterError("power-law fit needs at least two positive points")
    if keep.sum() == 2:
        x, y = np.log(ks[keep]), np.log(ys[keep])
        slope = (y[1] - y[0]) / (x[1] - x[0])
        return PowerLawFit(float(slope), math.nan, float(y[0] - slope * x[0]), tuple(ks[keep].tolist()))
    res = sps.linregress(np.log(ks[keep]), np.log(ys[keep]))
    return PowerLawFit(float(res.slope), float(res.stderr), float(res.intercept), tuple(ks[keep].astype(int).tolist()))


@dataclass
class EnsembleReport:
    """Per-replica samples and their aggregates.

    ``y_samples`` / ``x_samples`` have shape ``(replicas, len(k_grid))``.
    """

    spec: EnsembleSpec
    y_samples: np.ndarray
    x_samples: np.ndarray
    n_samples: dict = field(default_factory=dict)
    p_samples: dict = field(default_factory=dict)
    degree_samples: np.ndarray | None = None
    fit: PowerLawFit | None = None
    wall_time: float = 0.0

    @property
    def k_grid(self):
        return self.spec.k_grid

    @property
    def mean_Y(self):
        return self.y_samples.mean(axis=0)

    @property
    def sd_Y(self):
        return _sd(self.y_samples)

    @property
    def mean_X(self):
        return self.x_samples.mean(axis=0)

    @property
    def sd_X(self):
        return _sd(self.x_samples)

    @property
    def se_Y(self):
        return self.sd_Y / math.sqrt(self.spec.replicas)

    @property
    def se_X(self):
        return self.sd_X / math.sqrt(self.spec.replicas)

    def mean_N(self):
        return {key: float(np.mean(v)) for key, v in self.n_samples.items()}

    def mean_P(self):
        return {key: float(np.mean(v)) for key, v in self.p_samples.items()}

    @property
    def mean_degree_counts(self):
        return None if self.degree_samples is None else self.degree_samples.mean(axis=0)

    def as_dict(self):
        doc = {
            "spec": self.spec.as_dict(),
            "seeds": [self.spec.base_seed, self.spec.base_seed + self.spec.replicas - 1],
            "k_grid": list(self.k_grid),
            "mean_Y": self.mean_Y.tolist(),
            "sd_Y": self.sd_Y.tolist(),
            "mean_X": self.mean_X.tolist(),
            "sd_X": self.sd_X.tolist(),
            "mean_N": [[l, k, v] for (l, k), v in sorted(self.mean_N().items())],
            "mean_P": [[l, k, v] for (l, k), v in sorted(self.mean_P().items())],
            "wall_time_s": self.wall_time,
        }
        if self.degree_samples is not None:
            doc["d_grid"] = list(self.spec.d_grid)
            doc["mean_degree_counts"] = self.mean_degree_counts.tolist()
        if self.fit is not None:
            doc["fit"] = {
                "slope": self.fit.slope,
                "slope_se": _finite_or_none(self.fit.slope_se),
                "intercept": self.fit.intercept,
                "ks": list(self.fit.ks),
            }
        return doc


def _sd(samples):
    if samples.shape[0] < 2:
        return np.zeros(samples.shape[1])
    return samples.std(axis=0, ddof=1)


def _finite_or_none(x):
    return x if math.isfinite(x) else None


def _one_replica(spec, r):
    seed = spec.base_seed + r
    try:
        _, g = generate(spec.params, seed)
        tables = count_tables(g)
        ks = spec.k_grid
        y = tables.y_array(ks)
        x = np.array([tables.X.get(k, 0) for k in ks])
        cells = [(l, k) for l in spec.l_grid for k in ks] if spec.l_grid else []
        nv = [tables.N.get(c, 0) for c in cells]
        pv = [tables.P.get(c, 0) for c in cells]
        deg = None
        if spec.d_grid:
            hist = degree_histogram(g)
            deg = [hist.get(d, 0) for d in spec.d_grid]
        return y, x, cells, nv, pv, deg
    except Exception as exc:
        raise ReplicaError(r, seed, exc) from exc


def run_ensemble(spec):
    """Simulate ``spec.replicas`` graphs with seeds ``base_seed + r`` and aggregate.

    Results are reduced in replica order, so the report does not depend on
    ``n_jobs``.
    """
    t0 = time.perf_counter()
    if spec.n_jobs == 1:
        rows = [_one_replica(spec, r) for r in range(spec.replicas)]
    else:
        rows = Parallel(n_jobs=spec.n_jobs, prefer="threads")(
            delayed(_one_replica)(spec, r) for r in range(spec.replicas)
        )
    y = np.array([row[0] for row in rows], dtype=float)
    x = np.array([row[1] for row in rows], dtype=float)
    cells = rows[0][2]
    n_samples = {c: np.array([row[3][i] for row in rows], dtype=float) for i, c in enumerate(cells)}
    p_samples = {c: np.array([row[4][i] for row in rows], dtype=float) for i, c in enumerate(cells)}
    deg = np.array([row[5] for row in rows], dtype=float) if spec.d_grid else None

    fit = None
    kmax = spec.resolved_fit_k_max()
    fit_idx = [i for i, k in enumerate(spec.k_grid) if 0 < k <= kmax]
    means = y.mean(axis=0)
    if len(fit_idx) >= 2 and np.all(means[fit_idx] > 0):
        fit = fit_power_law(np.array(spec.k_grid)[fit_idx], means[fit_idx])
    return EnsembleReport(spec, y, x, n_samples, p_samples, deg, fit, time.perf_counter() - t0)


@dataclass(frozen=True)
class ExceedanceRate:
    k: int
    statistic: str
    threshold: float
    exceedances: int
    replicas: int
    low: float
    high: float

    @property
    def rate(self):
        return self.exceedances / self.replicas


def wilson_interval(successes, trials, alpha=0.05):
    from statsmodels.stats.proportion import proportion_confint

    low, high = proportion_confint(successes, trials, alpha=alpha, method="wilson")
    return float(low), float(high)


def concentration_probe(spec, epsilon, report=None):
    """Fraction of replicas whose ``Y(k)`` (and ``X(k)``) stray from the mean by more than ``mean**(1 - epsilon)``.

    The sample mean stands in for the unknown expectation.

    Returns
    -------
    list of ExceedanceRate
        One entry per ``(k, statistic)`` with ``statistic`` in ``{"Y", "X"}``.
    """
    epsilon = check_probability_open(epsilon)
    if report is None:
        report = run_ensemble(spec)
    out = []
    for name, samples in (("Y", report.y_samples), ("X", report.x_samples)):
        means = samples.mean(axis=0)
        for j, k in enumerate(spec.k_grid):
            thr = means[j] ** (1.0 - epsilon) if means[j] > 0 else 0.0
            hits = int(np.count_nonzero(np.abs(samples[:, j] - means[j]) > thr))
            low, high = wilson_interval(hits, spec.replicas)
            out.append(ExceedanceRate(k, name, float(thr), hits, spec.replicas, low, high))
    return out
