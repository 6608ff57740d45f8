"""Game-level solution: optimality tests and iterative value bounding.

The searcher's pure strategies are infinite sequences, so the game is solved
through finite subgames whose columns are Gittins sequences.  The value of a
subgame bounds the game value from above; the expected detection time of a
hiding strategy against its own Gittins counter bounds it from below.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .core import HidingStrategy, ProblemInstance, SearchGameError, as_strategy
from .gittins import (
    SequenceRealization,
    cyclic_shift_orders,
    identity_order,
    index_shortfall,
    p0_vector,
)
from .matrix_game import MatrixGameSolution, NumericalFailure, solve_zero_sum
from .valuation import DetectionProfile, evaluate_mixture, gittins_counter

OPTIMALITY_RTOL = 1e-6


class NotExterior(SearchGameError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1e-6
    max_iter: int = 150
    beta: float = 0.7
    interior_threshold: float = 1e-6
    permutation_cap: int = 720
    max_restore: int = 500
    max_searches: int = 1_000_000

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if not 0 < self.interior_threshold < 1:
            raise ValueError("interior_threshold must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class Column:
    sequence: SequenceRealization
    profile: DetectionProfile


class SequencePool:
    """The searcher's finite strategy set D, without duplicate realizations."""

    def __init__(self, columns: Sequence[Column] = ()):
        self.columns: list[Column] = []
        self._keys: set = set()
        for col in columns:
            self.add(col)

    def add(self, col: Column) -> bool:
        if col.sequence.key in self._keys:
            return False
        self._keys.add(col.sequence.key)
        self.columns.append(col)
        return True

    def __contains__(self, seq: SequenceRealization) -> bool:
        return seq.key in self._keys

    def __len__(self) -> int:
        return len(self.columns)

    def __iter__(self):
        return iter(self.columns)

    def copy(self) -> "SequencePool":
        return SequencePool(self.columns)

    def payoff(self) -> np.ndarray:
        return np.column_stack([c.profile.values for c in self.columns])

    def solve(self) -> MatrixGameSolution:
        return solve_zero_sum(self.payoff())


@dataclass(frozen=True)
class MixtureElement:
    weight: float
    sequence: SequenceRealization
    profile: DetectionProfile


def _support(sol: MatrixGameSolution, pool: SequencePool) -> list[MixtureElement]:
    return [
        MixtureElement(float(sol.col_strategy[j]), pool.columns[j].sequence, pool.columns[j].profile)
        for j in sol.support
    ]


def compute_p0(instance: ProblemInstance) -> HidingStrategy:
    """Hiding probabilities proportional to t_i / q_i, which tie every
    box's first Gittins index."""
    return HidingStrategy(p0_vector(instance))


def _counter(instance, p, order, config) -> Column:
    seq, prof = gittins_counter(instance, p, order, config.max_searches)
    return Column(seq, prof)


def constant_tiebreak_pool(instance: ProblemInstance, p, config: SolverConfig) -> SequencePool:
    pool = SequencePool()
    for order in itertools.permutations(range(instance.n)):
        pool.add(_counter(instance, p, order, config))
    return pool


@dataclass(frozen=True, eq=False)
class OptimalityVerdict:
    verdict: str  # "optimal" | "not_optimal" | "inconclusive"
    value: float = math.nan
    """Value of the subgame over the constant-tie-break counters."""
    v_p: float = math.nan
    """Expected detection time of p against its Gittins counters."""
    searcher: list[MixtureElement] = field(default_factory=list)
    n_sequences: int = 0
    reason: str = ""

    @property
    def optimal(self) -> bool:
        return self.verdict == "optimal"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "value": self.value,
            "v_p": self.v_p,
            "n_sequences": self.n_sequences,
            "reason": self.reason,
            "searcher": [
                {"weight": m.weight, "sequence": m.sequence.to_dict()} for m in self.searcher
            ],
        }


def test_hiding_optimality(
    instance: ProblemInstance,
    p,
    config: SolverConfig | None = None,
) -> OptimalityVerdict:
    """Decide whether ``p`` is optimal for the hider.

    ``p`` is optimal exactly when it is optimal in the finite subgame whose
    columns are the Gittins counters to ``p`` with constant tie-breaking; in
    that case the subgame's searcher mixture is optimal in the full game.
    """
    config = config or SolverConfig()
    p = as_strategy(p)
    if not p.is_interior(config.interior_threshold):
        return OptimalityVerdict("not_optimal", reason="exterior hiding strategy")
    if math.factorial(instance.n) > config.permutation_cap:
        return OptimalityVerdict(
            "inconclusive",
            reason=f"{instance.n}! tie-break orderings exceed cap {config.permutation_cap}",
        )
    pool = constant_tiebreak_pool(instance, p, config)
    sol = pool.solve()
    v_p = float(p.probs @ pool.columns[0].profile.values)
    optimal = abs(v_p - sol.value) / sol.value < OPTIMALITY_RTOL
    return OptimalityVerdict(
        "optimal" if optimal else "not_optimal",
        sol.value,
        v_p,
        _support(sol, pool),
        len(pool),
    )


# the name starts with test_ but this is library code
test_hiding_optimality.__test__ = False


def restore_interior(
    instance: ProblemInstance,
    pool: SequencePool,
    p,
    p_d,
    beta: float = 0.7,
    threshold: float = 1e-6,
    config: SolverConfig | None = None,
) -> tuple[SequencePool, HidingStrategy]:
    """One perturbation step towards an interior subgame solution.

    Boxes the subgame hider ignores get their current probability scaled by
    ``beta``; the rest keep the subgame's proportions.  A Gittins counter to
    the perturbed strategy is appended to a copy of ``pool``.
    """
    config = config or SolverConfig()
    p = as_strategy(p).probs
    p_d = np.asarray(p_d, dtype=float)
    low = p_d < threshold
    if not low.any():
        raise NotExterior("subgame hiding strategy is already interior")
    alpha = float(p[low].sum())
    p_bar = np.where(low, beta * p, p_d * (1.0 - beta * alpha))
    p_bar = HidingStrategy.normalized(p_bar)
    augmented = pool.copy()
    augmented.add(_counter(instance, p_bar, None, config))
    return augmented, p_bar


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    n_sequences: int
    lower: float
    upper: float


@dataclass(frozen=True, eq=False)
class GameSolution:
    lower: float
    upper: float
    hider: HidingStrategy
    searcher: list[MixtureElement]
    trace: list[TraceEntry]
    termination: str  # "gap" | "iter"
    n_sequences: int

    @property
    def gap_met(self) -> bool:
        return self.termination == "gap"

    @property
    def value(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def iterations(self) -> int:
        return len(self.trace)

    def searcher_profile(self) -> DetectionProfile:
        w = np.array([m.weight for m in self.searcher])
        return evaluate_mixture(w / w.sum(), [m.profile for m in self.searcher])

    def to_dict(self) -> dict:
        return {
            "L": self.lower,
            "U": self.upper,
            "hider": self.hider.probs.tolist(),
            "searcher": [
                {"weight": m.weight, "sequence": m.sequence.to_dict()} for m in self.searcher
            ],
            "termination": self.termination,
            "trace": [
                {"iter": e.iteration, "D": e.n_sequences, "L": e.lower, "U": e.upper}
                for e in self.trace
            ],
        }


def run_algorithm1(instance: ProblemInstance, config: SolverConfig | None = None) -> GameSolution:
    """Bound the game value from both sides until ``U / L - 1 < eps``.

    Starts from the counters to p0 under the n cyclic shifts of the identity
    ordering.  Each iteration solves the subgame, repairs an exterior subgame
    hider by perturbation, and adds the Gittins counter to the subgame hider.
    """
    config = config or SolverConfig()
    n = instance.n
    p = compute_p0(instance)
    pool = SequencePool()
    for order in cyclic_shift_orders(n):
        pool.add(_counter(instance, p, order, config))

    lower, upper = 0.0, math.inf
    trace: list[TraceEntry] = []
    termination = "iter"
    sol = pool.solve()
    for it in range(1, config.max_iter + 1):
        sol = pool.solve()
        restores = 0
        while sol.row_strategy.min() < config.interior_threshold:
            if restores >= config.max_restore:
                raise NumericalFailure(f"no interior subgame solution after {restores} perturbations")
            pool, p_bar = restore_interior(
                instance, pool, p, sol.row_strategy, config.beta, config.interior_threshold, config
            )
            sol = pool.solve()
            p = p_bar
            restores += 1
        p = HidingStrategy.normalized(sol.row_strategy)
        upper = sol.value
        col = _counter(instance, p, None, config)
        lower = max(lower, float(p.probs @ col.profile.values))
        trace.append(TraceEntry(it, len(pool), lower, upper))
        if upper / lower - 1.0 < config.eps:
            termination = "gap"
            break
        if it == config.max_iter:
            break
        if not pool.add(col) and not _add_alternative(instance, p, pool, config):
            break
    return GameSolution(lower, upper, p, _support(sol, pool), trace, termination, len(pool))


def _add_alternative(instance, p, pool: SequencePool, config) -> bool:
    # the first-index counter is already in D: try other tie-break orderings
    for order in cyclic_shift_orders(instance.n)[1:] + [tuple(reversed(identity_order(instance.n)))]:
        if pool.add(_counter(instance, p, order, config)):
            return True
    return False


@dataclass(frozen=True)
class VerificationReport:
    gittins_margin: float
    """Worst relative index shortfall of any support sequence against the hider."""
    equalization_spread: float
    """max_i V_i(eta) - min_i V_i(eta)."""
    value: float
    tol: float

    @property
    def counters_ok(self) -> bool:
        return self.gittins_margin <= self.tol

    @property
    def equalizing_ok(self) -> bool:
        return self.equalization_spread <= self.tol * self.value

    @property
    def passed(self) -> bool:
        return self.counters_ok and self.equalizing_ok

    def to_dict(self) -> dict:
        return {
            "gittins_margin": self.gittins_margin,
            "equalization_spread": self.equalization_spread,
            "counters_ok": self.counters_ok,
            "equalizing_ok": self.equalizing_ok,
            "tol": self.tol,
        }


def verify_solution(
    instance: ProblemInstance,
    solution: GameSolution | Sequence[MixtureElement],
    tol: float = 1e-6,
    hider=None,
) -> VerificationReport:
    """Check the two optimality conditions for a (hider, searcher) pair:
    every support sequence is a Gittins sequence against the hider, and the
    searcher mixture equalises V_i across boxes."""
    if isinstance(solution, GameSolution):
        support, hider = solution.searcher, solution.hider
    else:
        support = list(solution)
    hider = as_strategy(hider)
    margin = max(index_shortfall(instance, hider, m.sequence) for m in support)
    w = np.array([m.weight for m in support])
    v = evaluate_mixture(w / w.sum(), [m.profile for m in support]).values
    return VerificationReport(margin, float(v.max() - v.min()), float(v.mean()), tol)


@dataclass(frozen=True)
class RuckleSolution:
    q: float
    h_bar: float
    h: int
    p_star: float


def ruckle_h(q: float) -> RuckleSolution:
    """Closed-form solution of the two-box game t = (1, 1), q = (q, 1).

    ``h_bar`` solves h = 1/q + (1-q)^(h-1); the hider puts
    (1/q) / (1/q + (1-q)^(h-1)) on box 1 with h = floor(h_bar).
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie in (0, 1)")

    def excess(h):
        return h - 1.0 / q - (1.0 - q) ** (h - 1.0)

    # the root lies in [1/q, 1/q + 1] since 0 < (1-q)^(h-1) <= 1 there
    h_bar = brentq(excess, 1.0 / q, 1.0 / q + 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    h = math.floor(h_bar)
    p_star = (1.0 / q) / (1.0 / q + (1.0 - q) ** (h - 1))
    return RuckleSolution(q, h_bar, h, p_star)
