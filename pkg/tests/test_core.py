from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from searchgame.core import (
    BoxSpec,
    EmptyInstance,
    ExponentMismatch,
    HidingStrategy,
    InvalidBox,
    InvalidStrategy,
    NonCoprimeExponents,
    ProblemInstance,
    load_instance,
    save_instance,
    validate_instance,
)


def test_cyclic_pair_validates(ex1):
    assert ex1.kind == "cyclic"
    assert ex1.cyclic.exponents == (2, 1)
    assert ex1.cyclic.cycle_length_searches == 3
    assert ex1.cyclic.cycle_length_time(ex1.boxes) == pytest.approx(2.6)
    assert ex1.cyclic.common_miss(ex1.boxes) == pytest.approx(0.36)


def test_single_box_cyclic():
    inst = validate_instance([(0.5, 1.0)], [1])
    assert inst.kind == "cyclic" and inst.cyclic.cycle_length_searches == 1


def test_non_coprime_rejected():
    with pytest.raises(NonCoprimeExponents):
        validate_instance([(0.4, 1.0), (0.64, 0.6)], [4, 2])


def test_exponent_mismatch():
    with pytest.raises(ExponentMismatch):
        validate_instance([(0.4, 1.0), (0.6, 0.6)], [2, 1])
    with pytest.raises(ExponentMismatch):
        validate_instance([(0.4, 1.0), (0.64, 0.6)], [2])
    with pytest.raises(ExponentMismatch):
        validate_instance([(0.4, 1.0), (0.64, 0.6)], [0, 1])


def test_empty_and_bad_boxes():
    with pytest.raises(EmptyInstance):
        validate_instance([])
    for q, t in [(0.0, 1.0), (1.5, 1.0), (-0.1, 1.0), (0.5, 0.0), (0.5, -2.0), (float("nan"), 1.0)]:
        with pytest.raises(InvalidBox):
            BoxSpec(q, t)


def test_sure_box_allowed_but_not_cyclic():
    assert BoxSpec(1.0, 1.0).log_miss == -np.inf
    with pytest.raises(ExponentMismatch):
        validate_instance([(0.5, 1.0), (1.0, 1.0)], [1, 1])


def test_never_infers_cyclicity():
    inst = validate_instance([(0.5, 1.0), (0.5, 1.0)])
    assert inst.kind == "unclassified"
    assert validate_instance([(0.5, 1.0)], acyclic=True).kind == "acyclic"


def test_json_round_trip(tmp_path, ex1):
    path = tmp_path / "ex1.json"
    save_instance(ex1, path)
    data = json.loads(path.read_text())
    assert data == {"boxes": [{"q": 0.4, "t": 1.0}, {"q": 0.64, "t": 0.6}], "cyclic_exponents": [2, 1]}
    assert load_instance(path) == ex1


@given(st.lists(st.tuples(st.floats(0.01, 0.99), st.floats(0.1, 10.0)), min_size=1, max_size=6), st.booleans())
def test_round_trip_property(boxes, acyclic):
    inst = validate_instance(boxes, acyclic=acyclic)
    again = ProblemInstance.from_json(inst.to_json())
    assert again == inst
    assert again.to_json() == inst.to_json()


def test_hiding_strategy_validation():
    p = HidingStrategy([0.25, 0.75])
    assert p.is_interior() and list(p) == [0.25, 0.75]
    assert not HidingStrategy([1.0, 0.0]).is_interior()
    assert not HidingStrategy([1 - 1e-7, 1e-7]).is_interior()
    with pytest.raises(InvalidStrategy):
        HidingStrategy([0.5, 0.6])
    with pytest.raises(InvalidStrategy):
        HidingStrategy([1.5, -0.5])
    with pytest.raises(InvalidStrategy):
        HidingStrategy([])
    with pytest.raises(ValueError):
        p.probs[0] = 0.3  # immutable


def test_normalized():
    p = HidingStrategy.normalized([2.0, 6.0])
    assert np.allclose(p.probs, [0.25, 0.75])
