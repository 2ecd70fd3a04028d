"""Shared hypothesis strategies."""

from __future__ import annotations

from hypothesis import strategies as st

from solenoidkit.exact_linalg import IntMatrix
from solenoidkit.sft import EventuallyPeriodicWord


def int_matrices(min_size=1, max_size=3, lo=-3, hi=3, square=False):
    @st.composite
    def build(draw):
        r = draw(st.integers(min_size, max_size))
        c = r if square else draw(st.integers(min_size, max_size))
        rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c), min_size=r, max_size=r))
        return IntMatrix.from_rows(rows, c)
    return build()


def nonsingular(max_size=4, lo=-3, hi=3):
    return int_matrices(1, max_size, lo, hi, square=True).filter(lambda m: m.det() != 0)


def ep_words(alphabet=2, max_prefix=4, max_cycle=3):
    letters = st.integers(0, alphabet - 1)
    return st.builds(EventuallyPeriodicWord.of,
                     st.lists(letters, max_size=max_prefix),
                     st.lists(letters, min_size=1, max_size=max_cycle))
