from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from solenoidkit.errors import DomainError
from solenoidkit.exact_linalg import IntMatrix
from solenoidkit.sft import (
    IRREDUCIBLE_NOT_MIXING,
    MIXING,
    REDUCIBLE,
    EventuallyPeriodicWord,
    SftSystem,
    _char_poly_and_adjugate,
    certified_perron_vector,
    ck_ktheory,
    entropy,
    kms_measure,
    perron_measure,
    recurrence_class,
)

from strategies import ep_words

GOLDEN = SftSystem.golden_mean()
PERM = SftSystem(IntMatrix.from_rows([[0, 1], [1, 0]]))
EP = EventuallyPeriodicWord


def test_system_validation():
    with pytest.raises(DomainError):
        SftSystem(IntMatrix.from_rows([[2, 0], [1, 1]]))
    with pytest.raises(DomainError):
        SftSystem(IntMatrix.from_rows([[1, 0], [0, 0]]))
    with pytest.raises(DomainError):
        SftSystem(IntMatrix.from_rows([[1, 1], [1, 1]]), alphabet=("a", "a"))


def test_words_and_counts():
    assert list(GOLDEN.words(2)) == [(0, 0), (0, 1), (1, 0)]
    assert [GOLDEN.count_words(n) for n in range(1, 7)] == [2, 3, 5, 8, 13, 21]
    assert GOLDEN.is_admissible((0, 1, 0)) and not GOLDEN.is_admissible((1, 1))


@st.composite
def sft_systems(draw, max_size=3):
    n = draw(st.integers(1, max_size))
    rows = draw(st.lists(st.lists(st.integers(0, 1), min_size=n, max_size=n), min_size=n, max_size=n))
    # a permutation keeps every row and column non-empty
    perm = draw(st.permutations(range(n)))
    rows = [[r[j] | (perm[i] == j) for j in range(n)] for i, r in enumerate(rows)]
    return SftSystem(IntMatrix.from_rows(rows))


@given(sft_systems(), st.integers(1, 5))
def test_word_count_is_matrix_power_sum(s, n):
    P = s.matrix ** (n - 1)
    assert s.count_words(n) == sum(P.entries) == len(list(s.words(n)))


def test_json_round_trip():
    s = SftSystem(IntMatrix.from_rows([[1, 1], [1, 0]]), alphabet=("a", "b"))
    again = SftSystem.from_json(s.to_json())
    assert again == s and again.to_json() == s.to_json()


def test_recurrence_classes():
    assert recurrence_class(GOLDEN) == MIXING
    assert recurrence_class(PERM) == IRREDUCIBLE_NOT_MIXING
    assert recurrence_class(SftSystem(IntMatrix.from_rows([[1, 1], [0, 1]]))) == REDUCIBLE


# -- eventually periodic words ----------------------------------------------


def test_normal_form():
    w = EP.of((0, 1, 0, 1), (0, 1))
    assert w == EP.periodic((0, 1)) and w.prefix == ()
    assert EP.of((1,), (0, 0)) == EP((1,), (0,))
    with pytest.raises(DomainError):
        EP((0,), (1, 0))


@given(ep_words(), ep_words())
def test_equality_is_sequence_equality(a, b):
    n = 2 * (len(a.prefix) + len(b.prefix) + a.period * b.period) + 2
    assert (a == b) == (a.take(n) == b.take(n))


@given(ep_words(), st.integers(0, 12))
def test_shift_drops_letters(w, m):
    assert w.shift(m).take(10) == w.take(m + 10)[m:]


@given(ep_words(), st.lists(st.integers(0, 1), max_size=4))
def test_prepend_inverts_shift(w, u):
    v = w.prepend(u)
    assert v.shift(len(u)) == w
    assert v.take(len(u)) == tuple(u)


@given(ep_words())
def test_format_parse_round_trip(w):
    s = SftSystem.full_shift(2)
    assert EP.parse(w.format(s), s) == w


def test_parse_rejects_inadmissible():
    with pytest.raises(DomainError):
        EP.parse("(1)", GOLDEN)


# -- K-theory ------------------------------------------------------------------


@pytest.mark.parametrize("n", range(2, 7))
def test_cuntz_algebras(n):
    k = ck_ktheory(SftSystem.full_shift(n))
    assert k.k0.free_rank == 0 and k.k0.torsion == ((n - 1,) if n > 2 else ())
    assert k.k1.is_trivial
    assert k.khom1 == k.k0 and k.khom0 == k.k1


def test_golden_mean_ktheory_is_trivial():
    k = ck_ktheory(GOLDEN)
    assert all(g.is_trivial for g in (k.k0, k.k1, k.khom0, k.khom1))


def test_permutation_matrix_ktheory():
    k = ck_ktheory(PERM)
    assert k.k0.free_rank == 1 and k.k1.free_rank == 1


def test_reducible_ktheory_rejected():
    with pytest.raises(DomainError):
        ck_ktheory(SftSystem(IntMatrix.from_rows([[1, 1], [0, 1]])))


@given(sft_systems(max_size=4), st.randoms(use_true_random=False))
@settings(max_examples=60)
def test_ktheory_invariant_under_relabelling(s, rnd):
    assume(recurrence_class(s) != REDUCIBLE)
    n = s.size
    perm = list(range(n))
    rnd.shuffle(perm)
    rows = [[s.matrix[perm[i], perm[j]] for j in range(n)] for i in range(n)]
    t = SftSystem(IntMatrix.from_rows(rows))
    assert ck_ktheory(s) == ck_ktheory(t)


# -- entropy and Perron data ---------------------------------------------------


def test_full_shift_entropy_exact_after_one_step():
    for n in range(2, 6):
        e = entropy(SftSystem.full_shift(n), 1)
        assert e.rho.lo == e.rho.hi == n
        assert e.beta.width < Fraction(1, 10 ** 30)
        assert abs(float(e.beta.mid) - math.log(n)) < 1e-15


def test_golden_entropy():
    e = entropy(GOLDEN, 40)
    phi = (1 + math.sqrt(5)) / 2
    assert abs(float(e.rho.lo) - phi) < 1e-12 and abs(float(e.rho.hi) - phi) < 1e-12
    assert abs(float(e.beta.mid) - math.log(phi)) < 1e-12


def test_char_poly_against_numpy():
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(1, 5))
        A = rng.integers(-3, 4, size=(n, n))
        coeffs, Ms = _char_poly_and_adjugate(IntMatrix.from_rows(A.tolist()))
        assert np.allclose(coeffs, np.poly(A), atol=1e-6)
        # (tI - A) adj(tI - A) = det(tI - A) I, checked at t = 5
        t = 5
        adj = sum(np.array(M.to_rows()) * t ** (n - 1 - k) for k, M in enumerate(Ms))
        lhs = (t * np.eye(n) - A) @ adj
        assert np.allclose(lhs, np.polyval(coeffs, t) * np.eye(n))


def test_perron_vector_golden():
    A = GOLDEN.matrix
    rho = entropy(GOLDEN, 40).rho
    v = certified_perron_vector(A, rho)
    phi = (1 + math.sqrt(5)) / 2
    assert abs(float(v[0].mid) - phi / (phi + 1)) < 1e-14
    assert sum(v[1:], v[0]).contains(1)


def test_golden_kms_measure():
    m = kms_measure(GOLDEN, 3)
    assert m.total().contains(1)
    assert not m.refinement_defects()
    assert m.mass((1, 1)).hi == 0


def test_full_shift_measure_is_uniform():
    m = kms_measure(SftSystem.full_shift(2), 2)
    for w in m.values:
        assert m.values[w].contains(Fraction(1, 4))


def test_kms_measure_requires_mixing():
    with pytest.raises(DomainError):
        kms_measure(PERM, 2)
    assert perron_measure(PERM, 2).total().contains(1)


@given(sft_systems(max_size=3), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_measure_sums_to_one(s, level):
    assume(recurrence_class(s) == MIXING)
    m = kms_measure(s, level, 60)
    assert m.total().contains(1)
    assert not m.refinement_defects()
    assert all(v.lo >= 0 for v in m.values.values())
