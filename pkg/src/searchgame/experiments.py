"""Random instance generation and the batch studies built on it.

Every instance in a batch gets its own generator, derived from the master seed
and the instance index, so a batch is reproducible regardless of how many
worker processes run it.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import reduce
from typing import Sequence

import numpy as np
from scipy.stats import spearmanr

from .core import BoxSpec, ProblemInstance, SearchGameError, validate_instance
from .solver import SolverConfig, compute_p0, run_algorithm1, test_hiding_optimality
from .valuation import gittins_counter

P0_OPTIMAL_PCT = 1e-4


class RejectionLimitExceeded(SearchGameError):
    pass


@dataclass(frozen=True)
class SampleScheme:
    name: str
    q_range: tuple[float, float]
    t_range: tuple[float, float] = (1.0, 5.0)
    x_range: tuple[int, int] = (1, 10)

    def __post_init__(self):
        ql, qu = self.q_range
        if not 0.0 < ql < qu < 1.0:
            raise ValueError(f"need 0 < q_l < q_u < 1, got {self.q_range}")


SCHEMES = {
    "varied": SampleScheme("varied", (0.1, 0.9)),
    "low": SampleScheme("low", (0.1, 0.5)),
    "medium": SampleScheme("medium", (0.3, 0.7)),
    "high": SampleScheme("high", (0.5, 0.9)),
}


def get_scheme(scheme: str | SampleScheme) -> SampleScheme:
    if isinstance(scheme, SampleScheme):
        return scheme
    try:
        return SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}") from None


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_acyclic(scheme, n: int, rng: np.random.Generator) -> ProblemInstance:
    scheme = get_scheme(scheme)
    q = rng.uniform(*scheme.q_range, size=n)
    t = rng.uniform(*scheme.t_range, size=n)
    return validate_instance(zip(q.tolist(), t.tolist()), acyclic=True)


def cyclic_q(q1: float, x1: int, x: Sequence[int]) -> np.ndarray:
    """Detection probabilities sharing the miss constant (1 - q1) ** x1."""
    c = (1.0 - q1) ** x1
    return 1.0 - c ** (1.0 / np.asarray(x, dtype=float))


def sample_cyclic(scheme, n: int, rng: np.random.Generator, max_rejections: int = 100_000) -> ProblemInstance:
    """Draw a cyclic instance, redrawing the whole instance until every
    detection probability falls inside the scheme's range."""
    scheme = get_scheme(scheme)
    ql, qu = scheme.q_range
    lo, hi = scheme.x_range
    for _ in range(max_rejections):
        x = rng.integers(lo, hi + 1, size=n)
        q1 = rng.uniform(ql, qu)
        t = rng.uniform(*scheme.t_range, size=n)
        q = cyclic_q(q1, int(x[0]), x)
        q[0] = q1
        if np.all((q >= ql) & (q <= qu)):
            g = reduce(math.gcd, x.tolist())
            xs = [int(v) // g for v in x]
            return validate_instance(zip(q.tolist(), t.tolist()), claimed_exponents=xs)
    raise RejectionLimitExceeded(f"no acceptable cyclic draw in {max_rejections} attempts")


def sample_instance(scheme, n: int, cyclic: bool, rng: np.random.Generator) -> ProblemInstance:
    return sample_cyclic(scheme, n, rng) if cyclic else sample_acyclic(scheme, n, rng)


@dataclass
class StudyRecord:
    id: int
    cyclic: bool
    n: int
    v_p0: float = math.nan
    L: float = math.nan
    U: float = math.nan
    p0_optimal: bool = False
    subopt_pct: float = math.nan
    iters: int = 0
    D_size: int = 0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


CSV_HEADER = ["id", "cyclic", "n", "v_p0", "L", "U", "p0_optimal", "subopt_pct", "iters", "D_size"]
SCATTER_HEADER = ["id", "log_fb_ratio", "log_odds"]


def study_one(instance: ProblemInstance, idx: int, config: SolverConfig) -> StudyRecord:
    """Compare p0 against the game value on a single instance."""
    rec = StudyRecord(idx, instance.cyclic is not None, instance.n)
    p0 = compute_p0(instance)
    verdict = None
    if math.factorial(instance.n) <= config.permutation_cap:
        verdict = test_hiding_optimality(instance, p0, config)
    if verdict is not None and verdict.optimal:
        rec.v_p0 = rec.L = rec.U = verdict.v_p
        rec.D_size = verdict.n_sequences
    else:
        sol = run_algorithm1(instance, config)
        _, prof = gittins_counter(instance, p0, None, config.max_searches)
        rec.v_p0 = float(p0.probs @ prof.values)
        rec.L, rec.U = sol.lower, sol.upper
        rec.iters, rec.D_size = sol.iterations, sol.n_sequences
    subopt = 100.0 * (rec.U - rec.v_p0) / rec.U
    rec.subopt_pct = max(subopt, 0.0)
    rec.p0_optimal = rec.subopt_pct < P0_OPTIMAL_PCT
    return rec


def _study_task(args) -> StudyRecord:
    scheme, n, cyclic, seed, idx, config = args
    try:
        inst = sample_instance(scheme, n, cyclic, instance_rng(seed, idx))
    except SearchGameError as exc:
        return StudyRecord(idx, cyclic, n, error=f"sampling: {exc}")
    try:
        return study_one(inst, idx, config)
    except Exception as exc:  # per-instance failures are recorded, not fatal
        return StudyRecord(idx, cyclic, n, error=f"{type(exc).__name__}: {exc}")


def _run_tasks(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def nearest_rank(values: Sequence[float], pct: float) -> float:
    """Empirical percentile: the ceil(pct/100 * N)-th smallest value."""
    xs = sorted(values)
    if not xs:
        return math.nan
    k = max(1, math.ceil(pct / 100.0 * len(xs)))
    return xs[k - 1]


@dataclass
class StudySummary:
    count: int
    failures: int
    mean: float
    p75: float
    p95: float
    p99: float
    pct_optimal: float
    mean_iters: float = math.nan
    mean_D: float = math.nan

    def to_dict(self) -> dict:
        return asdict(self)


def summarize(records: Sequence[StudyRecord]) -> StudySummary:
    good = [r for r in records if r.ok]
    sub = [r.subopt_pct for r in good]
    solved = [r for r in good if r.iters > 0]
    return StudySummary(
        count=len(good),
        failures=len(records) - len(good),
        mean=float(np.mean(sub)) if sub else math.nan,
        p75=nearest_rank(sub, 75),
        p95=nearest_rank(sub, 95),
        p99=nearest_rank(sub, 99),
        pct_optimal=100.0 * sum(r.p0_optimal for r in good) / len(good) if good else math.nan,
        mean_iters=float(np.mean([r.iters for r in solved])) if solved else math.nan,
        mean_D=float(np.mean([r.D_size for r in solved])) if solved else math.nan,
    )


def run_scheme_study(
    scheme,
    n: int,
    count: int,
    config: SolverConfig | None = None,
    seed: int = 0,
    cyclic: bool = False,
    jobs: int = 1,
) -> tuple[list[StudyRecord], StudySummary]:
    """How far p0 falls short of optimal over ``count`` random instances."""
    if count < 1:
        raise ValueError("count must be at least 1")
    config = config or SolverConfig()
    scheme = get_scheme(scheme)
    tasks = [(scheme, n, cyclic, seed, idx, config) for idx in range(count)]
    records = _run_tasks(_study_task, tasks, jobs)
    return records, summarize(records)


def future_benefit(box: BoxSpec) -> float:
    """Rate at which repeated searching drives down the miss probability."""
    return -math.log1p(-box.q) / box.t if box.q < 1.0 else math.inf


@dataclass
class ScatterRow:
    id: int
    log_fb_ratio: float = math.nan
    log_odds: float = math.nan
    error: str | None = None


def scatter_point(instance: ProblemInstance, config: SolverConfig, idx: int = 0) -> ScatterRow:
    """Log future-benefit ratio and log odds of p* against p0 for a two-box game."""
    if instance.n != 2:
        raise ValueError("the scatter study uses two-box instances")
    b1, b2 = instance.boxes
    if future_benefit(b1) > future_benefit(b2):
        instance = ProblemInstance((b2, b1), None, instance.acyclic)
        b1, b2 = b2, b1
    p0 = compute_p0(instance)
    verdict = test_hiding_optimality(instance, p0, config)
    if verdict.optimal:
        p_star = p0
    else:
        p_star = run_algorithm1(instance, config).hider
    fb = math.log(future_benefit(b2) / future_benefit(b1))
    odds = math.log(p_star[0] / p_star[1]) - math.log(p0[0] / p0[1])
    return ScatterRow(idx, fb, odds)


def _scatter_task(args) -> ScatterRow:
    seed, idx, config = args
    try:
        inst = sample_acyclic("varied", 2, instance_rng(seed, idx))
        return scatter_point(inst, config, idx)
    except Exception as exc:
        return ScatterRow(idx, error=f"{type(exc).__name__}: {exc}")


@dataclass
class ScatterSummary:
    count: int
    failures: int
    frac_negative: float
    spearman: float

    def to_dict(self) -> dict:
        return asdict(self)


def future_benefit_scatter(
    count: int,
    config: SolverConfig | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> tuple[list[ScatterRow], ScatterSummary]:
    config = config or SolverConfig()
    rows = _run_tasks(_scatter_task, [(seed, i, config) for i in range(count)], jobs)
    good = [r for r in rows if r.error is None]
    x = np.array([r.log_fb_ratio for r in good])
    y = np.array([r.log_odds for r in good])
    # anything below the solver's own resolution counts as zero
    neg = float(np.mean(y < -1e-6)) if good else math.nan
    rho = float(spearmanr(x, y).statistic) if len(good) > 2 else math.nan
    return rows, ScatterSummary(len(good), len(rows) - len(good), neg, rho)


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def records_csv(records: Sequence[StudyRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        if r.ok:
            w.writerow([fmt(getattr(r, k)) for k in CSV_HEADER])
    return buf.getvalue()


def scatter_csv(rows: Sequence[ScatterRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCATTER_HEADER)
    for r in rows:
        if r.error is None:
            w.writerow([r.id, fmt(r.log_fb_ratio), fmt(r.log_odds)])
    return buf.getvalue()
