"""One-sided vertex shifts of finite type.

Words are stored as tuples of symbol indices; ``SftSystem.alphabet`` maps
indices to display labels.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import DomainError, StructuralFailure
from .exact_linalg import (
    AbelianGroup,
    IntMatrix,
    RationalInterval,
    abelian_group_of,
    is_irreducible,
    matrix_from_json,
    matrix_to_json,
    perron_bounds,
)

Word = tuple[int, ...]

MIXING = "mixing"
IRREDUCIBLE_NOT_MIXING = "irreducible_not_mixing"
REDUCIBLE = "reducible"


@dataclass(frozen=True)
class SftSystem:
    matrix: IntMatrix
    alphabet: tuple[str, ...] = ()

    def __post_init__(self):
        A = self.matrix
        if not A.is_square or A.rows == 0:
            raise DomainError("transition matrix must be square and non-empty", "bad_matrix")
        if any(a not in (0, 1) for a in A.entries):
            raise DomainError("transition matrix entries must be 0 or 1", "bad_matrix")
        if any(not any(A.row(i)) for i in range(A.rows)):
            raise DomainError("transition matrix has a zero row", "zero_row")
        if any(not any(A.column(j)) for j in range(A.cols)):
            raise DomainError("transition matrix has a zero column", "zero_column")
        if not self.alphabet:
            object.__setattr__(self, "alphabet", tuple(str(i) for i in range(A.rows)))
        if len(self.alphabet) != A.rows:
            raise DomainError("alphabet length must match the matrix dimension", "bad_alphabet")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise DomainError("alphabet labels must be distinct", "bad_alphabet")

    @property
    def size(self) -> int:
        return self.matrix.rows

    def allowed(self, a: int, b: int) -> bool:
        return self.matrix[a, b] == 1

    def successors(self, a: int) -> list[int]:
        return [b for b in range(self.size) if self.matrix[a, b]]

    def is_admissible(self, word: Sequence[int]) -> bool:
        if any(not 0 <= a < self.size for a in word):
            return False
        return all(self.allowed(a, b) for a, b in zip(word, word[1:]))

    def words(self, length: int) -> Iterator[Word]:
        """Admissible words of the given length in lexicographic order."""
        if length == 0:
            yield ()
            return
        stack: list[Word] = [(a,) for a in reversed(range(self.size))]
        while stack:
            w = stack.pop()
            if len(w) == length:
                yield w
                continue
            for b in reversed(self.successors(w[-1])):
                stack.append(w + (b,))

    def count_words(self, length: int) -> int:
        if length == 0:
            return 1
        counts = [1] * self.size
        for _ in range(length - 1):
            counts = [sum(counts[b] for b in self.successors(a)) for a in range(self.size)]
        return sum(counts)

    # labels -----------------------------------------------------------------

    def parse_word(self, text: str | Sequence[str]) -> Word:
        """Parse a word given as a string of one-character labels or a label list."""
        index = {label: i for i, label in enumerate(self.alphabet)}
        if isinstance(text, str):
            if all(len(a) == 1 for a in self.alphabet):
                tokens = list(text)
            else:
                tokens = [t for t in re.split(r"[\s,]+", text) if t]
        else:
            tokens = list(text)
        try:
            return tuple(index[t] for t in tokens)
        except KeyError as exc:
            raise DomainError(f"symbol {exc.args[0]!r} is not in the alphabet", "bad_symbol") from None

    def format_word(self, word: Sequence[int]) -> str:
        sep = "" if all(len(a) == 1 for a in self.alphabet) else ","
        return sep.join(self.alphabet[a] for a in word)

    # (de)serialisation -------------------------------------------------------

    def to_json(self) -> dict:
        return {"alphabet": list(self.alphabet), "matrix": matrix_to_json(self.matrix)}

    @classmethod
    def from_json(cls, data: dict) -> "SftSystem":
        if not isinstance(data, dict) or "matrix" not in data:
            raise DomainError("SFT input needs a 'matrix' field", "bad_input")
        alphabet = data.get("alphabet") or ()
        return cls(matrix_from_json(data["matrix"]), tuple(str(a) for a in alphabet))

    @classmethod
    def full_shift(cls, n: int) -> "SftSystem":
        if n < 1:
            raise DomainError("full shift needs at least one symbol")
        return cls(IntMatrix.from_rows([[1] * n for _ in range(n)]))

    @classmethod
    def golden_mean(cls) -> "SftSystem":
        return cls(IntMatrix.from_rows([[1, 1], [1, 0]]))


# --------------------------------------------------------------------------
# eventually periodic points


def _primitive_root(cycle: Word) -> Word:
    n = len(cycle)
    for p in range(1, n + 1):
        if n % p == 0 and cycle[:p] * (n // p) == cycle:
            return cycle[:p]
    return cycle


@dataclass(frozen=True)
class EventuallyPeriodicWord:
    """The one-sided sequence ``prefix . cycle . cycle ...`` in normal form.

    The normal form has the shortest possible prefix and a primitive cycle, so
    two instances denote the same sequence iff they compare equal. Use
    :meth:`of` to build one from arbitrary data.
    """

    prefix: Word
    cycle: Word

    def __post_init__(self):
        if not self.cycle:
            raise DomainError("cycle must be non-empty", "bad_word")
        if _primitive_root(self.cycle) != self.cycle or (
                self.prefix and self.prefix[-1] == self.cycle[-1]):
            raise DomainError("word is not in normal form; use EventuallyPeriodicWord.of", "bad_word")

    @classmethod
    def of(cls, prefix: Sequence[int], cycle: Sequence[int]) -> "EventuallyPeriodicWord":
        prefix, cycle = tuple(prefix), _primitive_root(tuple(cycle))
        if not cycle:
            raise DomainError("cycle must be non-empty", "bad_word")
        while prefix and prefix[-1] == cycle[-1]:
            prefix = prefix[:-1]
            cycle = cycle[-1:] + cycle[:-1]
        return cls(prefix, cycle)

    @classmethod
    def periodic(cls, cycle: Sequence[int]) -> "EventuallyPeriodicWord":
        return cls.of((), cycle)

    @property
    def is_periodic(self) -> bool:
        return not self.prefix

    @property
    def period(self) -> int:
        return len(self.cycle)

    def letter(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def take(self, n: int) -> Word:
        return tuple(self.letter(i) for i in range(n))

    def shift(self, m: int = 1) -> "EventuallyPeriodicWord":
        """``sigma^m`` of the sequence."""
        if m < 0:
            raise DomainError("shift exponent must be non-negative")
        if m <= len(self.prefix):
            return EventuallyPeriodicWord(self.prefix[m:], self.cycle)
        r = (m - len(self.prefix)) % len(self.cycle)
        return EventuallyPeriodicWord((), self.cycle[r:] + self.cycle[:r])

    def prepend(self, word: Sequence[int]) -> "EventuallyPeriodicWord":
        return EventuallyPeriodicWord.of(tuple(word) + self.prefix, self.cycle)

    def is_admissible(self, system: SftSystem) -> bool:
        return system.is_admissible(self.prefix + self.cycle + self.cycle[:1])

    def format(self, system: SftSystem | None = None) -> str:
        fmt = system.format_word if system else (lambda w: "".join(map(str, w)))
        return f"{fmt(self.prefix)}({fmt(self.cycle)})"

    @classmethod
    def parse(cls, text: str, system: SftSystem) -> "EventuallyPeriodicWord":
        """Parse ``"11(0)"`` (prefix then parenthesised cycle) or a bare cycle ``"01"``."""
        m = re.fullmatch(r"\s*([^()]*)\(([^()]+)\)\s*", text)
        if m:
            prefix, cycle = system.parse_word(m.group(1)), system.parse_word(m.group(2))
        else:
            prefix, cycle = (), system.parse_word(text.strip())
        w = cls.of(prefix, cycle)
        if not w.is_admissible(system):
            raise DomainError(f"word {text!r} is not admissible", "inadmissible")
        return w


# --------------------------------------------------------------------------
# operations


def _bool_product(X: list[list[bool]], Y: list[list[bool]]) -> list[list[bool]]:
    n = len(X)
    cols = [[Y[k][j] for k in range(n)] for j in range(n)]
    return [[any(a and b for a, b in zip(X[i], cols[j])) for j in range(n)] for i in range(n)]


def is_primitive(A: IntMatrix) -> bool:
    """Some power of A is strictly positive (Wielandt's exponent bound)."""
    if not is_irreducible(A):
        return False
    n = A.rows
    base = [[A[i, j] != 0 for j in range(n)] for i in range(n)]
    power = base
    for _ in range((n - 1) ** 2):
        if all(all(r) for r in power):
            return True
        power = _bool_product(power, base)
    return all(all(r) for r in power)


def recurrence_class(s: SftSystem) -> str:
    if not is_irreducible(s.matrix):
        return REDUCIBLE
    return MIXING if is_primitive(s.matrix) else IRREDUCIBLE_NOT_MIXING


@dataclass(frozen=True)
class CKTheory:
    khom0: AbelianGroup
    khom1: AbelianGroup
    k0: AbelianGroup
    k1: AbelianGroup

    def to_json(self) -> dict:
        return {k: getattr(self, k).to_json() for k in ("khom0", "khom1", "k0", "k1")}


def ck_ktheory(s: SftSystem) -> CKTheory:
    """K-homology and K-theory of the Cuntz-Krieger algebra of ``s``.

    K^0 = ker(1 - A), K^1 = coker(1 - A); K_0 = coker(1 - A^T), K_1 = ker(1 - A^T).
    """
    if recurrence_class(s) == REDUCIBLE:
        raise DomainError("Cuntz-Krieger K-theory needs an irreducible matrix", "reducible")
    one = IntMatrix.identity(s.size)
    khom0, khom1 = abelian_group_of(one - s.matrix)
    k1, k0 = abelian_group_of(one - s.matrix.T)
    return CKTheory(khom0, khom1, k0, k1)


@dataclass(frozen=True)
class EntropyReport:
    rho: RationalInterval
    beta: RationalInterval
    iterations: int

    def to_json(self) -> dict:
        return {"iterations": self.iterations, "rho": self.rho.to_json(), "beta": self.beta.to_json()}


def entropy(s: SftSystem, iterations: int) -> EntropyReport:
    """Certified enclosure of the spectral radius and of beta = log rho."""
    if recurrence_class(s) == REDUCIBLE:
        raise DomainError("entropy certificate needs an irreducible matrix", "reducible")
    rho = perron_bounds(s.matrix, iterations)
    return EntropyReport(rho, rho.log(), iterations)


# --------------------------------------------------------------------------
# Perron measure


def _char_poly_and_adjugate(A: IntMatrix) -> tuple[list[int], list[IntMatrix]]:
    """Faddeev-LeVerrier: ``adj(t I - A) = sum_k M[k] t^(n-1-k)`` and ``det(t I - A)``.

    Returns the characteristic coefficients (leading first) and ``M[0..n-1]``.
    """
    n = A.rows
    I = IntMatrix.identity(n)
    coeffs = [1]
    Ms: list[IntMatrix] = []
    M = IntMatrix.zeros(n, n)
    for k in range(1, n + 1):
        M = A @ M + I.scale(coeffs[-1])
        Ms.append(M)
        AM = A @ M
        tr = sum(AM[i, i] for i in range(n))
        if tr % k:
            raise StructuralFailure("Faddeev-LeVerrier produced a non-integral coefficient")
        coeffs.append(-tr // k)
    return coeffs, Ms


def _horner(coeffs: Sequence[int], t: RationalInterval) -> RationalInterval:
    acc = RationalInterval.point(0)
    for c in coeffs:
        acc = acc * t + c
    return acc


def certified_perron_vector(A: IntMatrix, rho: RationalInterval,
                            bits: int = 256) -> list[RationalInterval]:
    """Enclosures of the right Perron vector normalised to sum 1.

    For irreducible A every column of adj(rho I - A) is a positive multiple of
    the Perron vector; column 0 is evaluated in interval arithmetic over the
    rho enclosure.
    """
    _, Ms = _char_poly_and_adjugate(A)
    column = [[M[i, 0] for M in Ms] for i in range(A.rows)]
    comps = [_horner(c, rho).round_outward(bits) for c in column]
    if any(c.lo <= 0 for c in comps):
        raise StructuralFailure("Perron vector enclosure is not positive; raise the iteration count")
    # v_i / sum_j v_j, with v_i kept out of the denominator to avoid double counting
    out = []
    for i, ci in enumerate(comps):
        rest = sum((c for j, c in enumerate(comps) if j != i), RationalInterval.point(0))
        out.append((1 / (1 + rest / ci)).round_outward(bits))
    return out


@dataclass(frozen=True)
class CylinderMeasure:
    """Cylinder masses ``mu([i_0 ... i_k]) = rho^{-k} mu([i_k])`` at one level."""

    level: int
    values: dict[Word, RationalInterval] = field(hash=False, compare=False)
    rho: RationalInterval
    base: tuple[RationalInterval, ...]
    system: SftSystem

    def mass(self, word: Sequence[int]) -> RationalInterval:
        word = tuple(word)
        if not word:
            return RationalInterval.point(1)
        if not self.system.is_admissible(word):
            return RationalInterval.point(0)
        if len(word) == self.level and word in self.values:
            return self.values[word]
        return self.rho.reciprocal() ** (len(word) - 1) * self.base[word[-1]]

    def total(self) -> RationalInterval:
        return sum(self.values.values(), RationalInterval.point(0))

    def refinement_defects(self) -> list[Word]:
        """Words of length level-1 whose mass enclosure misses the sum over extensions."""
        bad = []
        for w in self.system.words(self.level - 1) if self.level >= 2 else ():
            ext = sum((self.values[w + (a,)] for a in self.system.successors(w[-1])),
                      RationalInterval.point(0))
            if not self.mass(w).intersects(ext):
                bad.append(w)
        return bad

    def max_width(self) -> Fraction:
        return max(v.width for v in self.values.values())

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "rho": self.rho.to_json(),
            "values": {self.system.format_word(w): v.to_json() for w, v in sorted(self.values.items())},
        }


def kms_measure(s: SftSystem, level: int, iterations: int = 60) -> CylinderMeasure:
    if recurrence_class(s) != MIXING:
        raise DomainError("the KMS measure is only unique for mixing systems", "not_mixing")
    return perron_measure(s, level, iterations)


def perron_measure(s: SftSystem, level: int, iterations: int = 60) -> CylinderMeasure:
    """Cylinder masses from the right Perron vector of an irreducible matrix."""
    if recurrence_class(s) == REDUCIBLE:
        raise DomainError("Perron measure needs an irreducible matrix", "reducible")
    if level < 1:
        raise DomainError("level must be at least 1")
    rho = perron_bounds(s.matrix, iterations)
    base = certified_perron_vector(s.matrix, rho)
    # eigen-relation certificate: (A mu - rho mu)_i must straddle 0
    for i in range(s.size):
        res = sum((base[j] for j in s.successors(i)), RationalInterval.point(0)) - rho * base[i]
        if not res.contains(0):
            raise StructuralFailure(f"Perron residual at symbol {i} excludes zero")
    inv = rho.reciprocal()
    scale = [RationalInterval.point(1)]
    for _ in range(level - 1):
        scale.append((scale[-1] * inv).round_outward(256))
    values = {w: (scale[level - 1] * base[w[-1]]).round_outward(256) for w in s.words(level)}
    return CylinderMeasure(level, values, rho, tuple(base), s)
