"""Single-coordinate perturbations and the Lipschitz audit of ``Y(k)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ParameterError
from ..model import XiSequence, build_sequence, materialize, resolve_targets
from ..statistics import second_degrees
from ..validation import check_positive_int, check_seed


def perturb_sequence(seq, i, new_value):
    """Copy of ``seq`` with coordinate ``i`` set to ``new_value``.

    Only targets at positions ``>= i`` are re-resolved; ``seq`` is untouched.
    """
    n = len(seq)
    if not 2 <= i <= n:
        raise ParameterError(f"coordinate index {i} outside 2..{n}")
    if not 1 <= new_value <= 2 * i - 1:
        raise ParameterError(f"value {new_value} outside 1..{2 * i - 1} for coordinate {i}")
    xi = seq.xi.copy()
    xi[i - 1] = new_value
    target = seq.target.copy()
    resolve_targets(xi, i - 1, target)
    return XiSequence(xi, target, seq.seed, seq.params)


def perturb_one_coordinate(seq, i, new_value, params=None):
    """Graph obtained after changing coordinate ``i`` to ``new_value``."""
    return materialize(perturb_sequence(seq, i, new_value), params)


def lipschitz_bound(m, k):
    """Largest change of ``Y(k)`` one coordinate can cause: ``2k + 1`` for m = 1, ``2k + 2`` otherwise."""
    return 2 * k + 1 if m == 1 else 2 * k + 2


@dataclass(frozen=True)
class LipschitzAudit:
    bound: int
    trials: int
    max_delta: int
    violations: int
    worst: tuple | None = None  # (seed, i, old, new) of the largest change


def _y(seq, params, k):
    return int(np.count_nonzero(second_degrees(materialize(seq, params)) >= k))


def lipschitz_audit(params, k, trials, seed, all_values=False):
    """Measure ``|Y(x) - Y(x')|`` over random single-coordinate changes.

    Each trial samples a fresh sequence, a uniform coordinate ``i >= 2`` and
    a uniform new value different from the current one. With
    ``all_values=True`` every admissible value of the chosen coordinate is
    tried instead, which is slower but more adversarial.
    """
    check_positive_int(trials, "trials")
    check_positive_int(k, "k", minimum=0)
    if params.coordinates < 2:
        raise ParameterError("need at least two coordinates to perturb")
    rng = np.random.default_rng(check_seed(seed))
    bound = lipschitz_bound(params.m, k)
    max_delta, violations, worst = 0, 0, None
    big = np.iinfo(np.int64).max
    for _ in range(trials):
        s = int(rng.integers(0, big))
        seq = build_sequence(params, s)
        i = int(rng.integers(2, params.coordinates + 1))
        old = int(seq.xi[i - 1])
        if all_values:
            values = [v for v in range(1, 2 * i) if v != old]
        else:
            v = int(rng.integers(1, 2 * i - 1))
            values = [v + 1 if v >= old else v]
        y0 = _y(seq, params, k)
        for v in values:
            delta = abs(_y(perturb_sequence(seq, i, v), params, k) - y0)
            if delta > bound:
                violations += 1
            if delta > max_delta or worst is None:
                max_delta = max(max_delta, delta)
                worst = (s, i, old, v)
    return LipschitzAudit(bound, trials, max_delta, violations, worst)
