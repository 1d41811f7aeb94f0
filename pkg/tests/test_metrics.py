import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qtrust.metrics import KeyLengthMismatch, pm, stitch, top_outcome, tvd


def test_pm_basic_ratio():
    counts = {"11": 80, "10": 16, "01": 4}
    assert pm(counts, "11") == pytest.approx(5.0)


def test_pm_correct_never_observed():
    assert pm({"00": 10, "01": 5}, "11") == 0.0


def test_pm_only_correct_observed():
    assert pm({"11": 100}, "11") == math.inf


def test_pm_width_mismatch():
    with pytest.raises(KeyLengthMismatch):
        pm({"11": 10}, "111")
    with pytest.raises(KeyLengthMismatch):
        pm({"11": 10, "101": 5}, "11")


def test_pm_below_one_when_wrong_answer_dominates():
    assert pm({"00": 60, "11": 40}, "11") < 1.0


def test_tvd_identical():
    assert tvd({"0": 1, "1": 1}, {"0": 5, "1": 5}) == pytest.approx(0.0)


def test_tvd_disjoint():
    assert tvd({"0": 10}, {"1": 10}) == pytest.approx(1.0)


def test_tvd_known_value():
    assert tvd({"0": 9, "1": 1}, {"0": 5, "1": 5}) == pytest.approx(0.4)


def test_tvd_normalizes_inputs():
    assert tvd({"0": 90, "1": 10}, {"0": 0.9, "1": 0.1}) == pytest.approx(0.0)


def test_tvd_empty_rejected():
    with pytest.raises(KeyLengthMismatch):
        tvd({}, {"0": 1})


_hist = st.dictionaries(
    st.text(alphabet="01", min_size=2, max_size=2),
    st.floats(min_value=0.001, max_value=100.0),
    min_size=1,
)


@given(_hist, _hist)
@settings(max_examples=80)
def test_tvd_symmetry(a, b):
    assert tvd(a, b) == pytest.approx(tvd(b, a), abs=1e-12)


@given(_hist, _hist, _hist)
@settings(max_examples=80)
def test_tvd_triangle_inequality(a, b, c):
    assert tvd(a, c) <= tvd(a, b) + tvd(b, c) + 1e-12


@given(_hist)
@settings(max_examples=40)
def test_tvd_identity_of_indiscernibles(a):
    assert tvd(a, a) == pytest.approx(0.0, abs=1e-12)


@given(_hist, _hist)
@settings(max_examples=80)
def test_tvd_bounded(a, b):
    value = tvd(a, b)
    assert -1e-12 <= value <= 1.0 + 1e-12


def test_stitch_sums_keywise():
    out = stitch([{"00": 3, "01": 1}, {"00": 2, "11": 4}])
    assert out == {"00": 5, "01": 1, "11": 4}


def test_stitch_rejects_mixed_widths():
    with pytest.raises(KeyLengthMismatch):
        stitch([{"00": 1}, {"000": 1}])


def test_stitch_empty_parts():
    assert stitch([]) == {}


def test_top_outcome_and_confidence():
    top, conf = top_outcome({"00": 6, "11": 4})
    assert top == "00"
    assert conf == pytest.approx(0.6)


def test_top_outcome_tie_breaks_lexicographically():
    top, _ = top_outcome({"10": 5, "01": 5})
    assert top == "01"
