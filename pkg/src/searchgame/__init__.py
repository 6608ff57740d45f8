"""Hide-and-search games in boxes with overlook probabilities and search times."""
from __future__ import annotations

from .core import (
    BoxSpec,
    CyclicStructure,
    EmptyInstance,
    ExponentMismatch,
    HidingStrategy,
    InvalidBox,
    InvalidStrategy,
    NonCoprimeExponents,
    ProblemInstance,
    SearchGameError,
    load_instance,
    save_instance,
    validate_instance,
)
from .gittins import (
    SearchState,
    SequenceRealization,
    enumerate_constant_tiebreak_sequences,
    generate_sequence,
    gittins_index,
    index_shortfall,
    next_box,
)
from .matrix_game import MatrixGameSolution, NumericalFailure, solve_zero_sum
from .solver import (
    GameSolution,
    OptimalityVerdict,
    RuckleSolution,
    SolverConfig,
    compute_p0,
    restore_interior,
    ruckle_h,
    run_algorithm1,
    test_hiding_optimality,
    verify_solution,
)
from .valuation import (
    DetectionProfile,
    evaluate_mixture,
    evaluate_realization,
    expected_detection_acyclic,
    expected_detection_cyclic,
    expected_time_under_hiding,
    gittins_counter,
    monte_carlo_oracle,
)

__version__ = "0.1.0"
