from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solenoidkit.errors import DomainError
from solenoidkit.exact_linalg import IntMatrix
from solenoidkit.oracles import odometer_carry, translation_nucleus_size
from solenoidkit.selfsimilar import (
    GroupElement,
    MealyAutomaton,
    Nucleus,
    Undetermined,
    dilation_automaton,
    grigorchuk,
    is_regular,
    limit_space,
    nucleus,
    odometer,
    trivial_automaton,
)

ODO = odometer()
GRIG = grigorchuk()


def words(length, k=2):
    return list(itertools.product(range(k), repeat=length))


def test_odometer_adds_one():
    a = ODO.element("a")
    for w in words(5):
        assert a.act(w) == odometer_carry(w)[0]


@given(st.lists(st.integers(0, 1), min_size=1, max_size=10), st.integers(-6, 6))
def test_odometer_powers(w, k):
    g = ODO.element("a" * k if k >= 0 else "a^-1" * -k)
    value = sum(b << i for i, b in enumerate(w))
    expect = (value + k) % (1 << len(w))
    assert g.act(w) == tuple((expect >> i) & 1 for i in range(len(w)))


def test_grigorchuk_relations():
    for g in ("a a", "b b", "c c", "d d", "b c d"):
        assert GRIG.element(g).is_identity
    assert not GRIG.element("a b").is_identity
    # (ad)^4 = 1 and ad has order exactly 4
    ad = GRIG.element("a d")
    assert (ad * ad * ad * ad).is_identity and not (ad * ad).is_identity


element_words = st.lists(st.tuples(st.sampled_from("abcd"), st.sampled_from([1, -1])), max_size=6)


@given(element_words, element_words, st.lists(st.integers(0, 1), max_size=6))
@settings(max_examples=80)
def test_products_act_right_to_left(u, v, w):
    g, h = GroupElement.of(GRIG, u), GroupElement.of(GRIG, v)
    assert (g * h).act(w) == g.act(h.act(w))


@given(element_words, st.lists(st.integers(0, 1), max_size=6))
@settings(max_examples=80)
def test_inverse_undoes_action(u, w):
    g = GroupElement.of(GRIG, u)
    assert g.inverse().act(g.act(w)) == tuple(w)
    assert (g * g.inverse()).is_identity


@given(element_words, st.integers(1, 5))
@settings(max_examples=60)
def test_action_is_level_bijection(u, level):
    g = GroupElement.of(GRIG, u)
    images = {g.act(w) for w in words(level)}
    assert len(images) == 2 ** level


def test_json_round_trip():
    for aut in (ODO, GRIG, dilation_automaton(IntMatrix.from_rows([[1, -1], [1, 1]]))):
        again = MealyAutomaton.from_json(aut.to_json())
        assert again.to_json() == aut.to_json()


def test_bad_automaton_rejected():
    with pytest.raises(DomainError):
        MealyAutomaton.from_json({"alphabet": ["0", "1"],
                                  "states": [{"name": "a", "wreath": [["0", "a"], ["0", "a"]]}]})
    with pytest.raises(DomainError):
        MealyAutomaton.from_json({"alphabet": ["0", "1"],
                                  "states": [{"name": "a", "wreath": [["1", "zz"], ["0", "a"]]}]})


def test_presets_nuclei():
    assert sorted(nucleus(ODO).names) == ["1", "a", "a^-1"]
    assert sorted(nucleus(GRIG).names) == ["1", "a", "b", "c", "d"]
    assert nucleus(trivial_automaton()).names == ["1"]


@pytest.mark.parametrize("aut", [ODO, GRIG], ids=["odometer", "grigorchuk"])
def test_nucleus_closed_under_restriction(aut):
    n = nucleus(aut)
    for g in n.elements:
        for x in range(len(aut.alphabet)):
            assert n.index_of(g.restrict((x,))) is not None


@given(element_words, st.lists(st.integers(0, 1), min_size=12, max_size=12))
@settings(max_examples=60, deadline=None)
def test_deep_restrictions_land_in_nucleus(u, w):
    n = nucleus(GRIG)
    g = GroupElement.of(GRIG, u)
    assert n.index_of(g.restrict(w)) is not None


@pytest.mark.parametrize("rows,size", [([[2]], 3), ([[3]], 3), ([[1, -1], [1, 1]], 7), ([[2, 1], [1, 3]], 19)])
def test_dilation_nuclei(rows, size):
    A = IntMatrix.from_rows(rows)
    n = nucleus(dilation_automaton(A))
    assert isinstance(n, Nucleus) and len(n.elements) == size
    assert translation_nucleus_size(A) == size


def test_nucleus_bound_can_be_exceeded():
    got = nucleus(dilation_automaton(IntMatrix.from_rows([[2, 1], [1, 3]])), bound=2)
    assert isinstance(got, Undetermined)


def test_regularity():
    assert is_regular(nucleus(ODO)).regular
    r = is_regular(nucleus(GRIG))
    assert not r.regular
    assert sorted(r.witness) == ["b", "c", "d"]
    assert r.witness_word == "111"


@pytest.mark.parametrize("level", range(1, 7))
def test_odometer_tiles_form_a_cycle(level):
    tc = limit_space(ODO, level)
    assert len(tc.vertices) == 2 ** level
    assert tc.is_cycle
    assert set(tc.shift_fibres()) == {2}


def test_grigorchuk_tiles_are_trees():
    for level in range(1, 5):
        tc = limit_space(GRIG, level)
        assert len(tc.components) == 1
        assert len(tc.edges) == 2 ** level - 1
