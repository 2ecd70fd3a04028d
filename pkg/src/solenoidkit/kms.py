"""KMS data for shifts of finite type: eigenmeasure checks and Ruelle weights."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .errors import DomainError
from .exact_linalg import RationalInterval
from .sft import (
    MIXING,
    REDUCIBLE,
    CylinderMeasure,
    EventuallyPeriodicWord,
    SftSystem,
    Word,
    entropy,
    perron_measure,
    recurrence_class,
)


@dataclass(frozen=True)
class EigenmeasureReport:
    level: int
    max_defect: Fraction
    tolerance: Fraction
    consistent: bool
    worst_word: Word | None

    @property
    def passes(self) -> bool:
        """Defect within the combined widths of the compared enclosures."""
        return self.max_defect <= self.tolerance

    def to_json(self, system: SftSystem) -> dict:
        return {
            "level": self.level,
            "max_defect": str(self.max_defect),
            "max_defect_float": float(self.max_defect),
            "tolerance_float": float(self.tolerance),
            "passes": self.passes,
            "consistent": self.consistent,
            "worst_word": None if self.worst_word is None else system.format_word(self.worst_word),
        }


def verify_eigenmeasure(s: SftSystem, m: CylinderMeasure, rho: RationalInterval) -> EigenmeasureReport:
    """Check ``mu([i_0 ... i_k]) * rho`` against ``mu([i_1 ... i_k])`` at the measure's level.

    ``mu([i_1 ... i_k])`` is taken as the sum of its one-letter extensions, so
    every quantity comes from the stored level. The defect of a word is the
    largest distance between points of the two enclosures.
    """
    if m.level < 2:
        raise DomainError("eigenmeasure check needs level >= 2", "bad_level")
    worst, worst_word, consistent, tol = Fraction(0), None, True, Fraction(0)
    for w, value in sorted(m.values.items()):
        tail = w[1:]
        lhs = value * rho
        rhs = sum((m.values[tail + (a,)] for a in s.successors(tail[-1])), RationalInterval.point(0))
        defect = max(lhs.hi - rhs.lo, rhs.hi - lhs.lo)
        consistent &= lhs.intersects(rhs)
        tol = max(tol, lhs.width + rhs.width)
        if worst_word is None or defect > worst:
            worst, worst_word = defect, w
    return EigenmeasureReport(m.level, worst, tol, consistent, worst_word)


def perturb(m: CylinderMeasure, word: Sequence[int], delta) -> CylinderMeasure:
    """A copy of ``m`` with one cylinder value shifted by ``delta`` (fault injection)."""
    word = tuple(word)
    if word not in m.values:
        raise DomainError("word is not a cylinder of this measure")
    values = dict(m.values)
    values[word] = values[word] + Fraction(delta)
    return replace(m, values=values)


# --------------------------------------------------------------------------
# Ruelle weights


@dataclass(frozen=True)
class Sheet:
    """A compact open diagonal set over the cylinder ``[word]``.

    Its points have past ``... tail tail past`` (coordinates below 0) and
    future starting with ``word``.
    """

    tail: Word
    past: Word
    word: Word

    @classmethod
    def canonical(cls, tail: Sequence[int], past: Sequence[int], word: Sequence[int]) -> "Sheet":
        tail, past = tuple(tail), tuple(past)
        while past and past[0] == tail[0]:
            past = past[1:]
            tail = tail[1:] + tail[:1]
        return cls(tail, past, tuple(word))


def parse_sheet(spec, s: SftSystem, anchor: EventuallyPeriodicWord) -> Sheet:
    """Read ``"u.w"`` (past ``u``, future ``w``), a bare ``"w"``, or a dict form.

    The dict form ``{"tail": ..., "past": ..., "word": ...}`` picks a rotation
    of the anchor cycle as the tail; strings use the anchor cycle itself.
    """
    if isinstance(spec, dict):
        tail = s.parse_word(spec.get("tail", "")) or anchor.cycle
        past = s.parse_word(spec.get("past", ""))
        word = s.parse_word(spec.get("word", ""))
    elif isinstance(spec, str):
        if not re.fullmatch(r"[^.]*\.?[^.]*", spec):
            raise DomainError(f"malformed window {spec!r}", "bad_window")
        left, _, right = spec.rpartition(".")
        past, word, tail = s.parse_word(left), s.parse_word(right), anchor.cycle
    else:
        raise DomainError(f"malformed window {spec!r}", "bad_window")
    rotations = {anchor.cycle[r:] + anchor.cycle[:r] for r in range(anchor.period)}
    if tail not in rotations:
        raise DomainError("sheet tail is not a rotation of the anchor cycle", "bad_window")
    if not word:
        raise DomainError("sheet needs a non-empty future word", "bad_window")
    if not s.is_admissible(tail + tail + past + word):
        raise DomainError(f"window {spec!r} is not admissible", "bad_window")
    return Sheet.canonical(tail, past, word)


def ruelle_weight(s: SftSystem, anchor: EventuallyPeriodicWord, m: CylinderMeasure,
                  f: Sequence) -> RationalInterval:
    """Weight of the indicator of a disjoint union of sheets: the sum of base masses."""
    if not anchor.is_periodic:
        raise DomainError("the anchor must be purely periodic", "bad_anchor")
    sheets = [parse_sheet(spec, s, anchor) for spec in f]
    by_past: dict[tuple[Word, Word], list[Word]] = {}
    for sh in sheets:
        by_past.setdefault((sh.tail, sh.past), []).append(sh.word)
    for words in by_past.values():
        for i, a in enumerate(words):
            for b in words[i + 1:]:
                if a[:len(b)] == b or b[:len(a)] == a:
                    raise DomainError("window sheets overlap", "bad_window")
    return sum((m.mass(sh.word) for sh in sheets), RationalInterval.point(0))


# --------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class KmsReport:
    rho: RationalInterval
    beta: RationalInterval
    measure: CylinderMeasure
    unique: bool
    rationale: str
    eigen: EigenmeasureReport | None

    def to_json(self) -> dict:
        s = self.measure.system
        return {
            "rho": self.rho.to_json(),
            "beta": self.beta.to_json(),
            "unique": self.unique,
            "rationale": self.rationale,
            "measure": self.measure.to_json(),
            "eigenmeasure": None if self.eigen is None else self.eigen.to_json(s),
        }


def kms_report(s: SftSystem, iterations: int, level: int) -> KmsReport:
    cls = recurrence_class(s)
    if cls == REDUCIBLE:
        raise DomainError("KMS report needs an irreducible system", "reducible")
    ent = entropy(s, iterations)
    measure = perron_measure(s, level, iterations)
    unique = cls == MIXING
    eigen = verify_eigenmeasure(s, measure, ent.rho) if level >= 2 else None
    return KmsReport(ent.rho, ent.beta, measure, unique, cls, eigen)
