"""Finite two-person zero-sum matrix games.

Rows maximise, columns minimise.  After shifting the payoffs to be positive,
the column player's problem becomes

    maximise 1'y  subject to  B y <= 1,  y >= 0,

which starts feasible at the slack basis.  It is solved with a dense tableau
simplex under Bland's rule (no cycling, deterministic output).  The final
basis is then re-solved directly with LAPACK to clean up pivoting round-off,
which yields both the column strategy (primal) and row strategy (dual).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SearchGameError

PIVOT_TOL = 1e-11


class NumericalFailure(SearchGameError):
    pass


@dataclass(frozen=True, eq=False)
class MatrixGameSolution:
    value: float
    row_strategy: np.ndarray
    col_strategy: np.ndarray
    row_payoffs: np.ndarray
    """Expected payoff of each row against ``col_strategy``."""
    col_payoffs: np.ndarray
    """Expected payoff of each column against ``row_strategy``."""

    @property
    def row_guarantee(self) -> float:
        return float(self.col_payoffs.min())

    @property
    def col_guarantee(self) -> float:
        return float(self.row_payoffs.max())

    @property
    def duality_gap(self) -> float:
        return abs(self.col_guarantee - self.row_guarantee)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.col_strategy > 0)


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    col = T[:, c].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _bland_simplex(B: np.ndarray, max_pivots: int) -> list[int]:
    n, m = B.shape
    T = np.zeros((n + 1, m + n + 1))
    T[:n, :m] = B
    T[:n, m:m + n] = np.eye(n)
    T[:n, -1] = 1.0
    T[n, :m] = -1.0
    basis = list(range(m, m + n))
    scale = max(1.0, float(np.abs(B).max()))
    for _ in range(max_pivots):
        entering = np.flatnonzero(T[n, :-1] < -PIVOT_TOL)
        if entering.size == 0:
            return basis
        c = int(entering[0])
        colv = T[:n, c]
        rows = np.flatnonzero(colv > PIVOT_TOL * scale)
        if rows.size == 0:
            raise NumericalFailure("unbounded subproblem; payoffs must be positive after the shift")
        ratios = T[rows, -1] / colv[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-14 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, c)
        basis[r] = c
    raise NumericalFailure(f"simplex did not terminate within {max_pivots} pivots")


def solve_zero_sum(payoff, max_pivots: int = 100_000) -> MatrixGameSolution:
    """Value and optimal mixed strategies of the game with matrix ``payoff``.

    ``payoff[i, j]`` is what the row player receives when row i meets
    column j.
    """
    A = np.asarray(payoff, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError("payoff must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError("payoff entries must be finite")
    n, m = A.shape
    shift = 1.0 - A.min()
    B = A + shift

    basis = _bland_simplex(B, max_pivots)
    full = np.hstack([B, np.eye(n)])
    Bm = full[:, basis]
    try:
        x_b = np.linalg.solve(Bm, np.ones(n))
        cost = np.array([1.0 if j < m else 0.0 for j in basis])
        u = np.linalg.solve(Bm.T, cost)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"singular final basis: {exc}") from exc

    y = np.zeros(m + n)
    y[basis] = x_b
    y = np.clip(y[:m], 0.0, None)
    u = np.clip(u, 0.0, None)
    if y.sum() <= 0 or u.sum() <= 0:
        raise NumericalFailure("degenerate LP solution")
    eta = y / y.sum()
    p = u / u.sum()

    row_payoffs = A @ eta
    col_payoffs = p @ A
    lo, hi = float(col_payoffs.min()), float(row_payoffs.max())
    if hi - lo > 1e-7 * (1.0 + abs(hi)):
        raise NumericalFailure(f"duality gap {hi - lo:.3g} after basis refinement")
    return MatrixGameSolution(0.5 * (lo + hi), p, eta, row_payoffs, col_payoffs)
