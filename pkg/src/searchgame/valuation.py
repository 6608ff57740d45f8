"""Conditional expected times to detection V_i(xi).

For a sequence ``xi`` and a hider in box ``i``,

    V_i(xi) = sum_k (1 - q_i) ** (k - 1) * (b_i(k) - b_i(k - 1))

with ``b_i(k)`` the completion time of the k-th search of box i.  Periodic
realizations have a closed form; truncated ones are bracketed between the
partial sum and the partial sum plus a tail that assumes box i is revisited
only every ``m_hat`` time units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ProblemInstance, SearchGameError, as_strategy
from .gittins import (
    ExteriorHidingStrategy,
    SequenceRealization,
    _Chooser,
    _check_permutation,
    generate_sequence,
    identity_order,
)

DEFAULT_RATIO_TOL = 1e-10
DEFAULT_MAX_SEARCHES = 1_000_000


class MissingCycle(SearchGameError):
    pass


class BudgetExceeded(SearchGameError):
    pass


class DimensionMismatch(SearchGameError):
    pass


class BadWeights(SearchGameError):
    pass


@dataclass(frozen=True, eq=False)
class DetectionProfile:
    """Per-box expected detection times, exact or as [lo, hi] brackets."""

    lo: np.ndarray
    hi: np.ndarray
    mode: str = "exact"

    def __post_init__(self):
        if self.mode not in ("exact", "certified"):
            raise ValueError(f"unknown profile mode {self.mode!r}")
        if self.lo.shape != self.hi.shape:
            raise DimensionMismatch("lo and hi differ in length")
        if np.any(self.lo <= 0) or np.any(self.hi < self.lo):
            raise ValueError(f"invalid detection profile lo={self.lo} hi={self.hi}")

    @classmethod
    def exact(cls, values) -> "DetectionProfile":
        v = np.asarray(values, dtype=float)
        return cls(v, v.copy(), "exact")

    @property
    def n(self) -> int:
        return self.lo.size

    @property
    def values(self) -> np.ndarray:
        """Midpoints (the exact values for an exact profile)."""
        return 0.5 * (self.lo + self.hi)

    @property
    def max_rel_width(self) -> float:
        return float(np.max((self.hi - self.lo) / self.lo))

    def to_dict(self) -> dict:
        if self.mode == "exact":
            return {"mode": "exact", "values": self.lo.tolist()}
        return {
            "mode": "certified",
            "values": [{"lo": a, "hi": b} for a, b in zip(self.lo.tolist(), self.hi.tolist())],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DetectionProfile":
        if data["mode"] == "exact":
            return cls.exact(data["values"])
        lo = np.array([v["lo"] for v in data["values"]], dtype=float)
        hi = np.array([v["hi"] for v in data["values"]], dtype=float)
        return cls(lo, hi, "certified")


@dataclass(frozen=True)
class TruncationBound:
    """Any Gittins sequence revisits every box within ``m_hat`` time units."""

    m: int
    m_hat: float


def truncation_bound(instance: ProblemInstance) -> TruncationBound:
    logs = [b.log_miss for b in instance.boxes]
    ratio = 1.0
    for li in logs:
        if li == -math.inf:
            continue  # a certain box is never revisited, no gap to bound
        for lj in logs:
            ratio = max(ratio, 0.0 if lj == -math.inf else li / lj)
    m = math.floor(ratio) + 1
    return TruncationBound(m, m * float(instance.t.sum()))


def _tail_partial_sum(b: np.ndarray, miss: float, count: int) -> float:
    total, prev, surv = 0.0, 0.0, 1.0
    for k in range(count):
        total += surv * (b[k] - prev)
        prev = b[k]
        surv *= miss
    return total


def expected_detection_cyclic(instance: ProblemInstance, realization: SequenceRealization) -> DetectionProfile:
    """Exact V(xi) for a realization ``prefix + cycle*``.

    The series is split at the first in-cycle search of each box: from there
    on the gaps between consecutive searches of box i repeat with period x_i
    (its visits per cycle), so the remainder is a geometric series.
    """
    if realization.cycle is None:
        raise MissingCycle("realization has no repeating cycle")
    sched = realization.schedule(instance)
    period_time = realization.cycle_time(instance)
    values = np.empty(instance.n)
    for i, box in enumerate(instance.boxes):
        k_pre = realization.prefix.count(i)
        x = realization.cycle.count(i)
        b = sched[i]
        if x == 0:
            if box.q == 1.0 and k_pre > 0:
                values[i] = b[0]
                continue
            raise MissingCycle(f"box {i + 1} is never searched in the cycle")
        miss = 1.0 - box.q
        head = _tail_partial_sum(b, miss, k_pre + 1)
        gaps = np.diff(np.append(b[k_pre:], b[k_pre] + period_time))
        block = float(np.sum(miss ** np.arange(x) * gaps))
        values[i] = head + miss ** (k_pre + 1) * block / (1.0 - miss ** x)
    return DetectionProfile.exact(values)


def _bounds_from_prefix(instance, seq, m_hat):
    n = instance.n
    lower = np.zeros(n)
    surv = np.ones(n)
    last = np.zeros(n)
    clock = 0.0
    ts = [b.t for b in instance.boxes]
    miss = [1.0 - b.q for b in instance.boxes]
    for box in seq:
        clock += ts[box]
        lower[box] += surv[box] * (clock - last[box])
        last[box] = clock
        surv[box] *= miss[box]
    return lower, lower + m_hat * surv / instance.q


def expected_detection_acyclic(
    instance: ProblemInstance,
    p,
    tie_break: Sequence[int] | None = None,
    ratio_tol: float = DEFAULT_RATIO_TOL,
    max_searches: int = DEFAULT_MAX_SEARCHES,
    min_searches: int = 0,
) -> tuple[SequenceRealization, DetectionProfile]:
    """Co-generate a Gittins sequence and certified bounds on V(xi).

    Searches continue until, for every box, the tail bound
    ``m_hat * (1 - q_i)**K_i / q_i`` is below ``ratio_tol`` times the partial
    sum (and at least ``min_searches`` searches were made).
    """
    p = as_strategy(p)
    if p.probs.min() <= 0.0:
        raise ExteriorHidingStrategy(f"every box needs positive probability, got {p!r}")
    n = instance.n
    order = identity_order(n) if tie_break is None else _check_permutation(tie_break, n)
    chooser = _Chooser(instance, p, order)
    if chooser.mode == "integer":
        # periodic structure is not exploited here; keep the exact opening tie
        chooser.mode = "relative"
        chooser.step = [b.log_miss for b in instance.boxes]
        chooser.base = [0.0] * n
    m_hat = truncation_bound(instance).m_hat
    ts = [b.t for b in instance.boxes]
    qs = [b.q for b in instance.boxes]
    counts = [0] * n
    surv = [1.0] * n
    lower = [0.0] * n
    last = [0.0] * n
    done = [False] * n
    pending = n
    clock = 0.0
    seq: list[int] = []
    while pending or len(seq) < min_searches:
        if len(seq) >= max_searches:
            raise BudgetExceeded(f"stop rule not met within {max_searches} searches")
        box = chooser.choose(counts)
        if box < 0:
            break
        clock += ts[box]
        lower[box] += surv[box] * (clock - last[box])
        last[box] = clock
        surv[box] *= 1.0 - qs[box]
        counts[box] += 1
        seq.append(box)
        if not done[box] and m_hat * surv[box] / qs[box] < ratio_tol * lower[box]:
            done[box] = True
            pending -= 1
    lo = np.array(lower)
    hi = lo + m_hat * np.array(surv) / np.array(qs)
    realization = SequenceRealization(tuple(seq), None, len(seq), (tuple(p.probs), tuple(order)))
    return realization, DetectionProfile(lo, hi, "certified")


def evaluate_realization(instance: ProblemInstance, realization: SequenceRealization) -> DetectionProfile:
    """Exact values for periodic realizations, certified brackets otherwise."""
    if realization.cycle is not None:
        return expected_detection_cyclic(instance, realization)
    lo, hi = _bounds_from_prefix(instance, realization.prefix, truncation_bound(instance).m_hat)
    return DetectionProfile(lo, hi, "certified")


def gittins_counter(
    instance: ProblemInstance,
    p,
    tie_break: Sequence[int] | None = None,
    max_searches: int = DEFAULT_MAX_SEARCHES,
) -> tuple[SequenceRealization, DetectionProfile]:
    """A Gittins sequence against ``p`` together with its detection profile."""
    if instance.cyclic is not None:
        from .gittins import GenerationLimits

        seq = generate_sequence(instance, p, tie_break, GenerationLimits(max_searches))
        return seq, expected_detection_cyclic(instance, seq)
    return expected_detection_acyclic(instance, p, tie_break, max_searches=max_searches)


def _check_dims(p, profile: DetectionProfile) -> np.ndarray:
    probs = as_strategy(p).probs
    if probs.size != profile.n:
        raise DimensionMismatch(f"strategy has {probs.size} entries, profile {profile.n}")
    return probs


def expected_time_under_hiding(p, profile: DetectionProfile) -> float:
    """sum_i p_i V_i, using midpoints for certified profiles."""
    return float(_check_dims(p, profile) @ profile.values)


def expected_time_bounds(p, profile: DetectionProfile) -> tuple[float, float]:
    probs = _check_dims(p, profile)
    return float(probs @ profile.lo), float(probs @ profile.hi)


def evaluate_mixture(weights, profiles: Sequence[DetectionProfile]) -> DetectionProfile:
    """V(eta) for a mixture putting ``weights[k]`` on the k-th profile."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != len(profiles) or w.size == 0:
        raise DimensionMismatch("one weight per profile is required")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise BadWeights(f"weights {w} are not a probability vector")
    if len({pr.n for pr in profiles}) != 1:
        raise DimensionMismatch("profiles differ in the number of boxes")
    lo = sum(wk * pr.lo for wk, pr in zip(w, profiles))
    hi = sum(wk * pr.hi for wk, pr in zip(w, profiles))
    certified = any(pr.mode == "certified" for pr in profiles)
    if not certified:
        return DetectionProfile.exact(lo)
    return DetectionProfile(lo, np.maximum(hi, lo), "certified")


def search_times(
    instance: ProblemInstance,
    realization: SequenceRealization,
    box: int,
    k: np.ndarray,
) -> np.ndarray:
    """b_box(k) for an array of 1-based search counts ``k``.

    Periodic realizations are extended exactly; truncated ones are extended
    with revisits every ``m_hat`` time units.
    """
    b = realization.schedule(instance)[box]
    k = np.asarray(k, dtype=np.int64)
    if realization.cycle is not None:
        k_pre = realization.prefix.count(box)
        x = realization.cycle.count(box)
        if x == 0:
            if k_pre == 0 or np.any(k > k_pre):
                raise MissingCycle(f"box {box + 1} has no search number {int(k.max())}")
            return b[k - 1]
        j = np.maximum(k - k_pre - 1, 0)
        wraps, rem = np.divmod(j, x)
        tail = b[k_pre + rem] + wraps * realization.cycle_time(instance)
        return np.where(k <= k_pre, b[np.minimum(k, max(k_pre, 1)) - 1], tail)
    if b.size == 0:
        raise MissingCycle(f"box {box + 1} is never searched in the realization")
    m_hat = truncation_bound(instance).m_hat
    inside = b[np.minimum(k, b.size) - 1]
    return np.where(k <= b.size, inside, b[-1] + (k - b.size) * m_hat)


MC_CHUNK = 1 << 16


def monte_carlo_oracle(
    instance: ProblemInstance,
    hider_box: int,
    realization: SequenceRealization,
    trials: int,
    seed: int,
) -> tuple[float, float]:
    """Simulated mean time to detection for a hider in ``hider_box``.

    Each visit to the box detects independently with probability q, so the
    number of visits until detection is geometric.  Trials are drawn in
    fixed-size chunks, each from its own stream spawned from ``seed``, which
    keeps results independent of how chunks are scheduled.
    Returns (mean, standard error).
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    q = instance.boxes[hider_box].q
    total = 0.0
    total_sq = 0.0
    for chunk, start in enumerate(range(0, trials, MC_CHUNK)):
        size = min(MC_CHUNK, trials - start)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))
        visits = rng.geometric(q, size)
        times = search_times(instance, realization, hider_box, visits)
        total += float(times.sum())
        total_sq += float(np.square(times).sum())
    mean = total / trials
    if trials == 1:
        return mean, 0.0
    var = max(total_sq - trials * mean * mean, 0.0) / (trials - 1)
    return mean, math.sqrt(var / trials)
