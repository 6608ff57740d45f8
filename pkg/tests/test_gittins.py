from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from searchgame.core import validate_instance
from searchgame.gittins import (
    CapExceeded,
    ExteriorHidingStrategy,
    SearchState,
    SequenceRealization,
    enumerate_constant_tiebreak_sequences,
    generate_sequence,
    gittins_index,
    index_shortfall,
    iter_searches,
    next_box,
)
from searchgame.solver import compute_p0

P0_EX1 = [8 / 11, 3 / 11]


def test_index_values(ex1):
    assert gittins_index(0.5, validate_instance([(0.5, 1.0)]).boxes[0], 0) == 0.25
    a = gittins_index(8 / 11, ex1.boxes[0], 0)
    b = gittins_index(3 / 11, ex1.boxes[1], 0)
    assert a == pytest.approx(0.290909090909, rel=1e-11)
    assert a == pytest.approx(b, rel=1e-14)
    assert gittins_index(0.0, ex1.boxes[0], 3) == 0.0


@given(st.floats(0.01, 1.0), st.floats(0.01, 0.99), st.floats(0.1, 5.0), st.integers(0, 60))
def test_index_decays(p, q, t, m):
    box = validate_instance([(q, t)]).boxes[0]
    assert gittins_index(p, box, m + 1) < gittins_index(p, box, m)


def test_next_box_examples(ex1, sym2):
    s0 = SearchState.initial(2)
    assert next_box(s0, P0_EX1, ex1, (0, 1)) == 0
    assert next_box(s0, P0_EX1, ex1, (1, 0)) == 1
    assert next_box(s0.after(0, ex1), P0_EX1, ex1, (0, 1)) == 1
    assert next_box(SearchState((1, 0)), [0.5, 0.5], sym2, (0, 1)) == 1


def test_state_elapsed(ex1):
    s = SearchState.initial(2).after(0, ex1).after(1, ex1).after(0, ex1)
    assert s.counts == (2, 1) and s.elapsed == pytest.approx(2.6)


def test_cyclic_pair_cycle(ex1):
    for order in [(0, 1), (1, 0)]:
        seq = generate_sequence(ex1, [0.75, 0.25], order)
        assert seq.prefix == () and seq.cycle == (0, 1, 0)


def test_single_box(single):
    seq = generate_sequence(single, [1.0])
    assert seq.prefix == () and seq.cycle == (0,)


def test_alternating(sym2):
    seq = generate_sequence(sym2, [0.5, 0.5], (0, 1))
    assert seq.prefix == () and seq.cycle == (0, 1)
    assert seq.to_dict() == {"prefix": [], "cycle": [1, 2], "truncated_at_searches": None}
    assert SequenceRealization.from_dict(seq.to_dict()) == seq


def test_enumeration_counts(ex1, single):
    assert len(enumerate_constant_tiebreak_sequences(ex1, [0.75, 0.25])) == 1
    seqs = enumerate_constant_tiebreak_sequences(ex1, P0_EX1)
    assert len(seqs) == 2
    assert {s.cycle for s in seqs} == {(0, 1, 0), (1, 0, 0)}
    assert len(enumerate_constant_tiebreak_sequences(single, [1.0])) == 1


def test_enumeration_at_upper_endpoint(ex1):
    # at p = 40/49 the second search of box 1 ties with the first of box 2
    seqs = enumerate_constant_tiebreak_sequences(ex1, [40 / 49, 9 / 49])
    assert {s.cycle for s in seqs} == {(0, 0, 1), (0, 1, 0)}


def test_cap_and_exterior():
    inst = validate_instance([(0.5, 1.0)] * 4)
    with pytest.raises(CapExceeded):
        enumerate_constant_tiebreak_sequences(inst, [0.25] * 4, cap=23)
    with pytest.raises(ExteriorHidingStrategy):
        generate_sequence(inst, [0.5, 0.5, 0.0, 0.0])


def test_p0_prefix_empty_for_cyclic():
    inst = validate_instance([(1 - 0.5 ** (1 / 3), 2.0), (0.5, 1.0), (1 - 0.5 ** 0.5, 3.0)], [3, 1, 2])
    for order in itertools.permutations(range(3)):
        seq = generate_sequence(inst, compute_p0(inst), order)
        assert seq.prefix == ()
        assert seq.cycle[:3] == order
        assert [seq.cycle.count(i) for i in range(3)] == [3, 1, 2]


def _random_cyclic(rng, n):
    x = rng.integers(1, 6, size=n)
    x = x // np.gcd.reduce(x)
    c = rng.uniform(0.05, 0.6)
    q = 1 - c ** (1.0 / x)
    t = rng.uniform(1, 5, size=n)
    return validate_instance(zip(q.tolist(), t.tolist()), x.tolist())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_cycle_content_and_replay(seed, n):
    rng = np.random.default_rng(seed)
    inst = _random_cyclic(rng, n)
    p = rng.dirichlet(np.ones(n))
    p = np.clip(p, 0.02, None)
    p /= p.sum()
    order = tuple(rng.permutation(n).tolist())
    seq = generate_sequence(inst, p, order)
    assert [seq.cycle.count(i) for i in range(n)] == list(inst.cyclic.exponents)
    # replaying the next-box rule reproduces the realization
    state = SearchState.initial(n)
    for box in iter_searches(seq):
        assert next_box(state, p, inst, order) == box
        state = state.after(box, inst)
    assert index_shortfall(inst, p, seq) <= 1e-12


def test_schedule_increasing(ex1):
    seq = generate_sequence(ex1, [0.75, 0.25])
    for b in seq.schedule(ex1):
        assert np.all(np.diff(b) > 0)
    assert seq.schedule(ex1)[0].tolist() == pytest.approx([1.0, 2.6])


def test_shortfall_detects_non_gittins(sym2):
    bad = SequenceRealization((0, 0), (0, 1))
    assert index_shortfall(sym2, [0.5, 0.5], bad) > 0.5
