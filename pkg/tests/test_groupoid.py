from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoidkit.errors import DomainError
from solenoidkit.exact_linalg import IntMatrix
from solenoidkit.groupoid import (
    d_spectrum,
    commutator_bound_check,
    enumerate_groupoid,
    fock_truncation,
    heat_trace_convergence,
    kappa,
    localized_fiber,
    psi,
)
from solenoidkit.oracles import naive_kappa
from solenoidkit.sft import EventuallyPeriodicWord, SftSystem

from strategies import ep_words

EP = EventuallyPeriodicWord
FULL2 = SftSystem.full_shift(2)
GOLDEN = SftSystem.golden_mean()
ZERO = EP.periodic((0,))


def test_psi_values():
    assert psi(3, 0) == 3 and psi(-2, 2) == -4 and psi(2, 1) == -3
    with pytest.raises(DomainError):
        psi(-2, 1)


def test_kappa_examples():
    x = EP.of((1, 1), (0,))
    assert kappa(x, 0, ZERO) == 2
    assert kappa(x, 2, ZERO) == 0
    assert kappa(ZERO, -1, x) == 2
    assert kappa(EP.periodic((0, 1)), 1, ZERO) is None


@given(ep_words(), st.integers(-5, 5), ep_words())
@settings(max_examples=300)
def test_kappa_matches_naive(x, n, y):
    assert kappa(x, n, y) == naive_kappa(x, n, y)


@given(ep_words(max_cycle=2), st.integers(-4, 4), ep_words(max_cycle=2), st.integers(-4, 4), ep_words(max_cycle=2))
@settings(max_examples=200)
def test_composition_law(x, n, y, m, z):
    k1, k2 = kappa(x, n, y), kappa(y, m, z)
    if k1 is None or k2 is None:
        return
    k = kappa(x, n + m, z)
    assert k is not None
    assert k <= max(k2, k1 - m, -(n + m), 0)


@given(ep_words(), st.integers(-5, 5), ep_words())
def test_inverse_law(x, n, y):
    k = kappa(x, n, y)
    back = kappa(y, -n, x)
    assert (k is None) == (back is None)
    if k is not None:
        assert back == k + n


def test_small_buckets():
    assert enumerate_groupoid(FULL2, 2, ZERO).buckets[(2, 0)] == 4
    t = enumerate_groupoid(FULL2, 3, ZERO)
    assert all(k >= max(0, -n) for n, k in t.buckets)
    assert t.buckets[(0, 0)] == 1
    g = enumerate_groupoid(GOLDEN, 3, ZERO)
    assert g.buckets[(2, 0)] == 3


@pytest.mark.parametrize("s", [FULL2, GOLDEN], ids=["full2", "golden"])
def test_bucket_rank_is_word_count(s):
    t = enumerate_groupoid(s, 5, ZERO)
    for n in range(0, 6):
        assert t.buckets.get((n, 0), 0) == s.count_words(n)


@pytest.mark.parametrize("s", [FULL2, GOLDEN], ids=["full2", "golden"])
def test_commutator_bound(s):
    t = enumerate_groupoid(s, 6, ZERO)
    rep = commutator_bound_check(t)
    assert rep.max_difference == 2
    assert set(rep.histogram) <= {0, 1, 2}
    for (n, k) in t.buckets:
        assert (psi(n, k) >= 0) == (k == 0)


def test_enumerated_kappas_are_minimal():
    t = enumerate_groupoid(GOLDEN, 4, ZERO)
    for e in t.elements:
        assert naive_kappa(e.x, e.n, e.y) == e.kappa


def test_spectrum_totals():
    t = enumerate_groupoid(FULL2, 4, ZERO)
    spec = d_spectrum(t)
    assert sum(m for _, m in spec) == len(t.elements)


def test_enumeration_preconditions():
    perm = SftSystem(IntMatrix.from_rows([[0, 1], [1, 0]]))
    with pytest.raises(DomainError):
        enumerate_groupoid(perm, 2, EP.periodic((0, 1)))
    with pytest.raises(DomainError):
        enumerate_groupoid(FULL2, 2, EP.of((1,), (0,)))
    with pytest.raises(DomainError):
        enumerate_groupoid(GOLDEN, 2, EP.periodic((1,)))


def test_fiber_spectrum_and_kappa():
    fib = localized_fiber(GOLDEN, ZERO, ZERO, 3)
    assert fib.points
    for p in fib.points:
        assert p.eigenvalue == psi(p.j, p.kappa_z)


@given(st.fractions(Fraction(1, 4), 4), st.fractions(Fraction(1, 4), 4))
@settings(max_examples=25, deadline=None)
def test_heat_trace_non_increasing_in_t(t1, t2):
    fib = localized_fiber(FULL2, ZERO, ZERO, 3)
    lo, hi = sorted((t1, t2))
    assert fib.heat_trace(hi).lo <= fib.heat_trace(lo).hi


def test_heat_trace_converges():
    rep = heat_trace_convergence(GOLDEN, ZERO, ZERO, [2, 3, 4, 5], 1)
    assert rep["differences_decrease"]


def test_summability_profile_decreases_in_s():
    fib = localized_fiber(GOLDEN, ZERO, ZERO, 3)
    assert fib.summability_profile(2).hi < fib.summability_profile(1).lo


def test_fock_golden():
    f = fock_truncation(GOLDEN, 6)
    r = f.report
    assert r["interior_exact"]
    assert r["boundary_levels"] == [5]
    assert r["isometry_relation"]["defect_levels"] == [5]
    assert len(f.basis) == sum(GOLDEN.count_words(k) for k in range(1, 7))


def test_fock_full_shift():
    r = fock_truncation(FULL2, 4).report
    assert r["interior_exact"] and r["boundary_levels"] == [3]
