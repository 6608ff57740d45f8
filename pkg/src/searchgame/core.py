"""Domain types for the hide-and-search game with overlook probabilities.

Boxes carry a detection probability ``q`` and a search time ``t``.  An
instance may additionally carry integer exponents ``x`` with
``(1 - q_i) ** x_i`` equal across boxes (a *cyclic* game), be tagged as
acyclic by its generator, or be left unclassified.

Box indices are 0-based throughout the Python API and 1-based in every
serialized report (JSON, CSV, CLI output).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

CYCLIC_RTOL = 1e-12
PROB_SUM_TOL = 1e-12
INTERIOR_THRESHOLD = 1e-6


class SearchGameError(Exception):
    """Base class for input and numerical errors raised by this package."""


class EmptyInstance(SearchGameError):
    pass


class InvalidBox(SearchGameError):
    pass


class ExponentMismatch(SearchGameError):
    pass


class NonCoprimeExponents(SearchGameError):
    pass


class InvalidStrategy(SearchGameError):
    pass


@dataclass(frozen=True)
class BoxSpec:
    """One hiding location: detection probability ``q`` per search, search time ``t``.

    ``q == 1`` is accepted (a box that is certain to reveal the hider on the
    first look); it cannot take part in a cyclic structure.
    """

    q: float
    t: float

    def __post_init__(self):
        if not (0.0 < self.q <= 1.0) or not math.isfinite(self.q):
            raise InvalidBox(f"detection probability must lie in (0, 1], got {self.q!r}")
        if not (self.t > 0.0) or not math.isfinite(self.t):
            raise InvalidBox(f"search time must be positive, got {self.t!r}")

    @property
    def log_miss(self) -> float:
        """log(1 - q); ``-inf`` for a certain box."""
        return math.log1p(-self.q) if self.q < 1.0 else -math.inf


@dataclass(frozen=True)
class CyclicStructure:
    exponents: tuple[int, ...]

    @property
    def cycle_length_searches(self) -> int:
        return sum(self.exponents)

    def cycle_length_time(self, boxes: Sequence[BoxSpec]) -> float:
        return sum(x * b.t for x, b in zip(self.exponents, boxes))

    def common_miss(self, boxes: Sequence[BoxSpec]) -> float:
        """The shared value of ``(1 - q_i) ** x_i``."""
        return (1.0 - boxes[0].q) ** self.exponents[0]


@dataclass(frozen=True)
class ProblemInstance:
    boxes: tuple[BoxSpec, ...]
    cyclic: CyclicStructure | None = None
    acyclic: bool = False

    @property
    def n(self) -> int:
        return len(self.boxes)

    @property
    def kind(self) -> str:
        if self.cyclic is not None:
            return "cyclic"
        return "acyclic" if self.acyclic else "unclassified"

    @property
    def q(self) -> np.ndarray:
        return np.array([b.q for b in self.boxes])

    @property
    def t(self) -> np.ndarray:
        return np.array([b.t for b in self.boxes])

    def to_dict(self) -> dict:
        out: dict = {"boxes": [{"q": b.q, "t": b.t} for b in self.boxes]}
        if self.cyclic is not None:
            out["cyclic_exponents"] = list(self.cyclic.exponents)
        if self.acyclic:
            out["acyclic"] = True
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemInstance":
        try:
            boxes = [(float(b["q"]), float(b["t"])) for b in data["boxes"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidBox(f"malformed instance: {exc}") from exc
        return validate_instance(
            boxes,
            claimed_exponents=data.get("cyclic_exponents"),
            acyclic=bool(data.get("acyclic", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ProblemInstance":
        return cls.from_dict(json.loads(text))


def validate_instance(
    boxes: Iterable[tuple[float, float] | BoxSpec],
    claimed_exponents: Sequence[int] | None = None,
    acyclic: bool = False,
) -> ProblemInstance:
    """Build a :class:`ProblemInstance`, verifying any claimed cyclic exponents.

    Cyclicity is never inferred from the floats; it is accepted only when the
    caller supplies exponents that satisfy ``(1-q_i)^x_i == (1-q_j)^x_j`` to
    a relative tolerance of 1e-12.  ``acyclic=True`` records the caller's
    assertion (e.g. continuous random draws) and is otherwise unchecked.
    """
    specs = tuple(b if isinstance(b, BoxSpec) else BoxSpec(float(b[0]), float(b[1])) for b in boxes)
    if not specs:
        raise EmptyInstance("an instance needs at least one box")
    if claimed_exponents is None:
        return ProblemInstance(specs, None, acyclic)
    if acyclic:
        raise ExponentMismatch("an instance cannot be both cyclic and acyclic")

    xs = tuple(int(x) for x in claimed_exponents)
    if len(xs) != len(specs):
        raise ExponentMismatch(f"expected {len(specs)} exponents, got {len(xs)}")
    if any(x < 1 for x in xs):
        raise ExponentMismatch("cyclic exponents must be positive integers")
    if reduce(math.gcd, xs) != 1:
        raise NonCoprimeExponents(f"exponents {xs} share a common factor")
    if any(b.q >= 1.0 for b in specs):
        raise ExponentMismatch("a box with q = 1 cannot be part of a cyclic game")
    powers = [(1.0 - b.q) ** x for b, x in zip(specs, xs)]
    ref = powers[0]
    spread = max(abs(a - b) for a in powers for b in powers) / ref
    if spread > CYCLIC_RTOL:
        raise ExponentMismatch(f"(1-q_i)^x_i disagree (relative spread {spread:.3g})")
    return ProblemInstance(specs, CyclicStructure(xs), False)


def load_instance(path: str | Path) -> ProblemInstance:
    return ProblemInstance.from_json(Path(path).read_text())


def save_instance(instance: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(instance.to_json() + "\n")


class HidingStrategy:
    """An immutable probability vector over the boxes."""

    __slots__ = ("_p",)

    def __init__(self, probs: Iterable[float]):
        p = np.array(list(probs) if not isinstance(probs, np.ndarray) else probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidStrategy("a hiding strategy is a non-empty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidStrategy(f"negative or non-finite probability in {p}")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise InvalidStrategy(f"probabilities sum to {float(p.sum())!r}, not 1")
        p.setflags(write=False)
        self._p = p

    @classmethod
    def normalized(cls, probs: Iterable[float]) -> "HidingStrategy":
        p = np.clip(np.asarray(list(probs), dtype=float), 0.0, None)
        return cls(p / p.sum())

    @property
    def probs(self) -> np.ndarray:
        return self._p

    @property
    def n(self) -> int:
        return self._p.size

    def __len__(self) -> int:
        return self._p.size

    def __getitem__(self, i):
        return self._p[i]

    def __iter__(self):
        return iter(self._p.tolist())

    def is_interior(self, threshold: float = INTERIOR_THRESHOLD) -> bool:
        return bool(self._p.min() >= threshold)

    def __eq__(self, other) -> bool:
        return isinstance(other, HidingStrategy) and np.array_equal(self._p, other._p)

    def __hash__(self) -> int:
        return hash(self._p.tobytes())

    def __repr__(self) -> str:
        return f"HidingStrategy({np.array2string(self._p, precision=6)})"


def as_strategy(p) -> HidingStrategy:
    return p if isinstance(p, HidingStrategy) else HidingStrategy(p)
