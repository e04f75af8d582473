import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairabstain.cells import ABSTAIN_FIRST, PSEUDOCODE_ORDER, CellCounts, CellKey, Count, DecisionVector, \
    build_cells, counts_from_decisions, counts_objective, decisions_from_counts
from fairabstain.errors import DomainError


def test_cells_sorted_by_score_then_index():
    cells = build_cells([0, 0, 0, 1], [1, 1, 1, 0], [1, 1, 1, 0], [0.9, 0.2, 0.2, 0.5])
    assert cells.keys() == [CellKey(0, 1, 1), CellKey(1, 0, 0)]
    assert cells.cells[CellKey(0, 1, 1)] == (1, 2, 0)


def test_cell_key_text_round_trip():
    k = CellKey(3, 0, 1)
    assert str(k) == "z3_y0_b1"
    assert CellKey.parse(str(k)) == k
    assert k.baseline_wrong


def test_counts_validation():
    cells = build_cells([0, 0], [1, 1], [1, 1], [0.1, 0.2])
    key = CellKey(0, 1, 1)
    with pytest.raises(DomainError):
        CellCounts({key: Count(1, 0, 0)}).validate(cells)
    with pytest.raises(DomainError):
        CellCounts({key: Count(1, 1, 0, abstain_flip=2)}).validate(cells)
    with pytest.raises(DomainError):
        CellCounts().validate(cells)


def test_objective_counts_kept_mistakes_and_flipped_hits():
    cells = build_cells([0, 0, 0, 0], [1, 1, 0, 0], [1, 0, 0, 0], [0.1, 0.2, 0.3, 0.4])
    counts = CellCounts({
        CellKey(0, 1, 1): Count(keep=0, flip=1),   # correct prediction flipped: 1 error
        CellKey(0, 1, 0): Count(keep=1),           # mistake kept: 1 error
        CellKey(0, 0, 0): Count(abstain=1, keep=1),
    })
    assert counts_objective(counts, cells) == 2


def test_decisions_from_counts_order():
    cells = build_cells([0] * 4, [1] * 4, [1] * 4, [0.4, 0.3, 0.2, 0.1])
    counts = CellCounts({CellKey(0, 1, 1): Count(abstain=1, keep=2, flip=1)})
    dv = decisions_from_counts(counts, cells)
    # ascending score: idx 3, 2, 1, 0 -> abstain, flip, keep, keep
    assert dv.omega.tolist() == [1, 1, 1, 0]
    assert dv.flip.tolist() == [0, 0, 1, 0]
    dv2 = decisions_from_counts(counts, cells, PSEUDOCODE_ORDER)
    assert dv2.flip.tolist() == [1, 0, 0, 0]
    with pytest.raises(DomainError):
        decisions_from_counts(counts, cells, ("keep", "keep", "flip"))


def test_decision_vector_outputs_and_json():
    dv = DecisionVector([0, 1, 1], [1, 1, 0], [1, 1, 0])
    assert dv.outputs() == [None, 0, 0]
    assert DecisionVector.from_dict(dv.to_dict()) == dv


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_counts_decisions_round_trip(data):
    n = data.draw(st.integers(1, 30))
    ints = st.lists(st.integers(0, 1), min_size=n, max_size=n)
    g, y, b, w, f = (np.array(data.draw(ints)) for _ in range(5))
    scores = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    cells = build_cells(g, y, b, scores, 2)
    dv = DecisionVector(w, f, b)
    counts = counts_from_decisions(dv, cells)
    counts.validate(cells)
    order = data.draw(st.sampled_from([ABSTAIN_FIRST, PSEUDOCODE_ORDER]))
    assert counts_from_decisions(decisions_from_counts(counts, cells, order), cells) == counts
