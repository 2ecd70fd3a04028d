from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoidkit.errors import DomainError
from solenoidkit.exact_linalg import IntMatrix, RationalInterval
from solenoidkit.kms import kms_report, perturb, ruelle_weight, verify_eigenmeasure
from solenoidkit.sft import EventuallyPeriodicWord, SftSystem, entropy, kms_measure

GOLDEN = SftSystem.golden_mean()
FULL2 = SftSystem.full_shift(2)
ZERO = EventuallyPeriodicWord.periodic((0,))


@pytest.fixture(scope="module")
def golden():
    rho = entropy(GOLDEN, 60).rho
    return kms_measure(GOLDEN, 4), rho


def test_golden_eigenmeasure_passes(golden):
    m, rho = golden
    rep = verify_eigenmeasure(GOLDEN, m, rho)
    assert rep.passes and rep.consistent
    assert rep.max_defect < Fraction(1, 10 ** 20)


def test_full_shift_eigenmeasure_is_exact():
    m = kms_measure(FULL2, 3)
    rep = verify_eigenmeasure(FULL2, m, RationalInterval.point(2))
    assert rep.max_defect == 0 and rep.passes


def test_perturbation_is_detected(golden):
    m, rho = golden
    bad = perturb(m, (0, 0, 1, 0), Fraction(1, 1000))
    rep = verify_eigenmeasure(GOLDEN, bad, rho)
    assert not rep.passes and not rep.consistent
    assert rep.max_defect > Fraction(1, 1000)


def test_single_sheet_is_cylinder_mass(golden):
    m, _ = golden
    for spec, word in (("0", (0,)), ("1.0", (0,)), ("10.0", (0,)), ("01", (0, 1)), ("0.10", (1, 0))):
        assert ruelle_weight(GOLDEN, ZERO, m, [spec]) == m.mass(word)


def test_full_shift_weight():
    m = kms_measure(FULL2, 2)
    assert ruelle_weight(FULL2, ZERO, m, ["01"]).contains(Fraction(1, 4))


def test_overlapping_sheets_rejected(golden):
    m, _ = golden
    with pytest.raises(DomainError) as err:
        ruelle_weight(GOLDEN, ZERO, m, ["0", "01"])
    assert err.value.code == "bad_window"
    with pytest.raises(DomainError):
        ruelle_weight(GOLDEN, ZERO, m, ["1.1"])


def test_same_sheet_different_spelling_is_identified(golden):
    m, _ = golden
    # a past of zeros is absorbed by the zero tail, so these two overlap
    with pytest.raises(DomainError):
        ruelle_weight(GOLDEN, ZERO, m, ["0.0", "00.01"])


words = st.lists(st.integers(0, 1), min_size=1, max_size=4).map(tuple).filter(GOLDEN.is_admissible)


@given(words, st.sampled_from(["", "1", "10", "100"]))
@settings(max_examples=60, deadline=None)
def test_weight_additive_over_refinement(w, past):
    m = kms_measure(GOLDEN, 3)
    fmt = GOLDEN.format_word
    if past and not GOLDEN.is_admissible(GOLDEN.parse_word(past) + w):
        return
    whole = ruelle_weight(GOLDEN, ZERO, m, [f"{past}.{fmt(w)}"])
    parts = [f"{past}.{fmt(w + (a,))}" for a in GOLDEN.successors(w[-1])]
    split = ruelle_weight(GOLDEN, ZERO, m, parts)
    assert whole.intersects(split)


@given(st.lists(words, min_size=1, max_size=3, unique=True))
@settings(max_examples=60, deadline=None)
def test_weight_additive_over_disjoint_pasts(ws):
    m = kms_measure(GOLDEN, 3)
    fmt = GOLDEN.format_word
    # pasts 10, 1010, ... are pairwise distinct, so the sheets are disjoint
    specs = [f"{'10' * (i + 1)}.{fmt(w)}" for i, w in enumerate(ws)]
    specs = [s for s in specs if GOLDEN.is_admissible(GOLDEN.parse_word(s.replace(".", "")))]
    total = ruelle_weight(GOLDEN, ZERO, m, specs)
    pieces = sum((ruelle_weight(GOLDEN, ZERO, m, [s]) for s in specs), RationalInterval.point(0))
    assert total == pieces


def test_kms_report_mixing():
    r = kms_report(GOLDEN, 40, 3)
    assert r.unique and r.eigen.passes


def test_kms_report_non_mixing():
    r = kms_report(SftSystem(IntMatrix.from_rows([[0, 1], [1, 0]])), 10, 2)
    assert not r.unique
    assert r.rho.lo == r.rho.hi == 1


def test_kms_report_rejects_reducible():
    with pytest.raises(DomainError):
        kms_report(SftSystem(IntMatrix.from_rows([[1, 1], [0, 1]])), 10, 2)
