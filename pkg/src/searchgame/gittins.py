"""Gittins search sequences against a known hiding strategy.

A Gittins search sequence always searches next a box maximising

    p_i * (1 - q_i) ** m_i * q_i / t_i

where ``m_i`` counts the searches already made in box ``i``.  Ties are broken
with a fixed preference ordering (a permutation of the box indices, earlier
entries preferred).

Three comparison modes are used, chosen per (instance, p):

* ``integer``: cyclic instance searched against p0.  All indices start equal,
  so box i's index is proportional to ``c ** (m_i / x_i)`` and the rule reduces
  to an exact comparison of the fractions ``m_i / x_i``.
* ``relative``: p0 on a non-cyclic instance.  The common initial factor is
  dropped and ``m_i * log(1 - q_i)`` is compared, so the opening tie is exact.
* ``float``: everything else, comparing log-indices with a 1e-12 tie band.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import HidingStrategy, ProblemInstance, SearchGameError, as_strategy

TIE_TOL = 1e-12
P0_RTOL = 1e-12


class ExteriorHidingStrategy(SearchGameError):
    """Some box has zero hiding probability, so it would never be searched."""


class CycleNotFound(SearchGameError):
    pass


class CapExceeded(SearchGameError):
    pass


@dataclass(frozen=True)
class SearchState:
    counts: tuple[int, ...]
    elapsed: float = 0.0

    @classmethod
    def initial(cls, n: int) -> "SearchState":
        return cls((0,) * n, 0.0)

    def after(self, box: int, instance: ProblemInstance) -> "SearchState":
        counts = list(self.counts)
        counts[box] += 1
        return SearchState(tuple(counts), self.elapsed + instance.boxes[box].t)


@dataclass(frozen=True)
class GenerationLimits:
    max_searches: int = 1_000_000


def identity_order(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def cyclic_shift_orders(n: int) -> list[tuple[int, ...]]:
    """(0, 1, ..., n-1), (1, ..., n-1, 0), ..."""
    return [tuple((s + k) % n for k in range(n)) for s in range(n)]


def _check_permutation(order: Sequence[int], n: int) -> tuple[int, ...]:
    order = tuple(int(i) for i in order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of 0..{n - 1}")
    return order


def p0_vector(instance: ProblemInstance) -> np.ndarray:
    w = instance.t / instance.q
    return w / w.sum()


def is_p0(instance: ProblemInstance, p: HidingStrategy) -> bool:
    p0 = p0_vector(instance)
    return bool(np.all(np.abs(p.probs - p0) <= P0_RTOL * p0))


def gittins_index(p_i: float, box, m_i: int) -> float:
    """Detection probability per unit time of the next search of ``box``."""
    if p_i == 0.0:
        return 0.0
    return p_i * (1.0 - box.q) ** m_i * box.q / box.t


class _Chooser:
    """Stateless next-box rule for one (instance, p, tie_break) triple."""

    def __init__(self, instance: ProblemInstance, p: HidingStrategy, tie_break: Sequence[int]):
        n = instance.n
        self.n = n
        order = _check_permutation(tie_break, n)
        self.rank = [0] * n
        for pos, box in enumerate(order):
            self.rank[box] = pos
        probs = p.probs
        if instance.cyclic is not None and is_p0(instance, p):
            self.mode = "integer"
            self.x = instance.cyclic.exponents
            return
        self.mode = "relative" if is_p0(instance, p) else "float"
        self.step = [b.log_miss for b in instance.boxes]
        if self.mode == "relative":
            self.base = [0.0] * n
        else:
            self.base = [
                math.log(probs[i]) + math.log(b.q) - math.log(b.t) if probs[i] > 0 else -math.inf
                for i, b in enumerate(instance.boxes)
            ]

    def log_index(self, i: int, m: int) -> float:
        if m == 0:
            return self.base[i]
        return self.base[i] + m * self.step[i]

    def choose(self, counts: Sequence[int]) -> int:
        if self.mode == "integer":
            return self._choose_integer(counts)
        vals = [self.log_index(i, counts[i]) for i in range(self.n)]
        top = max(vals)
        if top == -math.inf:
            return -1
        band = TIE_TOL * max(1.0, abs(top))
        best = -1
        for i, v in enumerate(vals):
            if v >= top - band and (best < 0 or self.rank[i] < self.rank[best]):
                best = i
        return best

    def _choose_integer(self, counts: Sequence[int]) -> int:
        # smallest m_i / x_i wins; compare by cross-multiplication
        x = self.x
        best = 0
        for i in range(1, self.n):
            lhs, rhs = counts[i] * x[best], counts[best] * x[i]
            if lhs < rhs or (lhs == rhs and self.rank[i] < self.rank[best]):
                best = i
        return best


def next_box(
    state: SearchState,
    p,
    instance: ProblemInstance,
    tie_break: Sequence[int] | None = None,
) -> int:
    """The box a constant-tie-break Gittins sequence searches from ``state``."""
    p = as_strategy(p)
    order = identity_order(instance.n) if tie_break is None else tie_break
    return _Chooser(instance, p, order).choose(state.counts)


@dataclass(frozen=True, eq=False)
class SequenceRealization:
    """A materialised search sequence.

    Either ``prefix`` followed by ``cycle`` repeated forever, or (when
    ``cycle`` is None) a finite prefix truncated after ``truncated_at``
    searches, long enough for certified valuation.
    """

    prefix: tuple[int, ...]
    cycle: tuple[int, ...] | None = None
    truncated_at: int | None = None
    provenance: tuple | None = field(default=None, compare=False)

    @property
    def key(self) -> tuple:
        return (self.prefix, self.cycle)

    def __eq__(self, other) -> bool:
        return isinstance(other, SequenceRealization) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def body(self) -> tuple[int, ...]:
        """Prefix plus one pass through the cycle."""
        return self.prefix + (self.cycle or ())

    def schedule(self, instance: ProblemInstance) -> list[np.ndarray]:
        """Per box, the completion times b_i(1), b_i(2), ... over the body."""
        t = [b.t for b in instance.boxes]
        times: list[list[float]] = [[] for _ in range(instance.n)]
        clock = 0.0
        for box in self.body:
            clock += t[box]
            times[box].append(clock)
        return [np.array(ts) for ts in times]

    def cycle_time(self, instance: ProblemInstance) -> float:
        return sum(instance.boxes[b].t for b in self.cycle) if self.cycle else 0.0

    def to_dict(self) -> dict:
        return {
            "prefix": [b + 1 for b in self.prefix],
            "cycle": None if self.cycle is None else [b + 1 for b in self.cycle],
            "truncated_at_searches": self.truncated_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SequenceRealization":
        cycle = data.get("cycle")
        return cls(
            tuple(b - 1 for b in data["prefix"]),
            None if cycle is None else tuple(b - 1 for b in cycle),
            data.get("truncated_at_searches"),
        )

    def __repr__(self) -> str:
        head = ",".join(str(b + 1) for b in self.prefix[:12])
        if len(self.prefix) > 12:
            head += ",..."
        if self.cycle is None:
            return f"SequenceRealization([{head}] truncated at {self.truncated_at})"
        cyc = ",".join(str(b + 1) for b in self.cycle)
        return f"SequenceRealization([{head}] + ({cyc})*)"


def canonical_split(seq: Sequence[int], start: int, period: int) -> tuple[tuple, tuple]:
    """Split ``seq`` at ``start`` into (prefix, cycle), shortening the prefix
    as far as the periodic tail allows."""
    prefix = list(seq[:start])
    cycle = deque(seq[start:start + period])
    while prefix and prefix[-1] == cycle[-1]:
        prefix.pop()
        cycle.rotate(1)
    return tuple(prefix), tuple(cycle)


def _require_interior(p: HidingStrategy) -> None:
    if p.probs.min() <= 0.0:
        raise ExteriorHidingStrategy(f"every box needs positive probability, got {p!r}")


def _generate_cyclic(instance, p, order, limits) -> SequenceRealization:
    chooser = _Chooser(instance, p, order)
    x = instance.cyclic.exponents
    period = sum(x)
    n = instance.n
    counts = [0] * n
    wcounts = [0] * n
    window: deque[int] = deque()
    seq: list[int] = []
    target = list(x)
    for _ in range(limits.max_searches):
        box = chooser.choose(counts)
        seq.append(box)
        counts[box] += 1
        window.append(box)
        wcounts[box] += 1
        if len(window) > period:
            wcounts[window.popleft()] -= 1
        if len(window) == period and wcounts == target:
            prefix, cycle = canonical_split(seq, len(seq) - period, period)
            return SequenceRealization(prefix, cycle, None, (tuple(p.probs), tuple(order)))
    raise CycleNotFound(f"no cycle within {limits.max_searches} searches")


def generate_sequence(
    instance: ProblemInstance,
    p,
    tie_break: Sequence[int] | None = None,
    limits: GenerationLimits | None = None,
) -> SequenceRealization:
    """Generate the Gittins sequence against ``p`` breaking ties by ``tie_break``.

    Cyclic instances yield ``prefix + cycle``; other instances a truncated
    prefix whose length meets the certified valuation stop rule.
    """
    p = as_strategy(p)
    _require_interior(p)
    order = identity_order(instance.n) if tie_break is None else _check_permutation(tie_break, instance.n)
    limits = limits or GenerationLimits()
    if instance.cyclic is not None:
        return _generate_cyclic(instance, p, order, limits)
    from .valuation import expected_detection_acyclic

    seq, _ = expected_detection_acyclic(instance, p, order, max_searches=limits.max_searches)
    return seq


def enumerate_constant_tiebreak_sequences(
    instance: ProblemInstance,
    p,
    cap: int = 720,
    limits: GenerationLimits | None = None,
) -> list[SequenceRealization]:
    """All distinct Gittins sequences against ``p`` that break every tie with
    one fixed preference ordering, in lexicographic order of the ordering."""
    p = as_strategy(p)
    _require_interior(p)
    if math.factorial(instance.n) > cap:
        raise CapExceeded(f"{instance.n}! orderings exceed the cap of {cap}")
    seen: dict[tuple, SequenceRealization] = {}
    for order in itertools.permutations(range(instance.n)):
        seq = generate_sequence(instance, p, order, limits)
        seen.setdefault(seq.key, seq)
    return list(seen.values())


def iter_searches(realization: SequenceRealization, cycles: int = 2):
    """Boxes of the realization: the prefix then ``cycles`` passes of the cycle."""
    yield from realization.prefix
    if realization.cycle:
        for _ in range(cycles):
            yield from realization.cycle


def index_shortfall(instance: ProblemInstance, p, realization: SequenceRealization) -> float:
    """Largest relative gap between the best available index and the index of
    the box actually searched, over the prefix and two cycle passes.

    Zero means the realization is a Gittins sequence against ``p``.
    """
    p = as_strategy(p)
    chooser = _Chooser(instance, p, identity_order(instance.n))
    if chooser.mode == "integer":
        # compare on the log scale anyway so the margin is a relative quantity
        chooser.mode = "relative"
        chooser.step = [b.log_miss for b in instance.boxes]
        chooser.base = [0.0] * instance.n
    counts = [0] * instance.n
    worst = 0.0
    for box in iter_searches(realization):
        vals = [chooser.log_index(i, counts[i]) for i in range(instance.n)]
        top = max(vals)
        if vals[box] == -math.inf:
            return math.inf
        worst = max(worst, math.expm1(top - vals[box]))
        counts[box] += 1
    return worst
