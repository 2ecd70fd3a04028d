"""Exact integer linear algebra.

Everything here works over Python's arbitrary-precision ``int`` and
``fractions.Fraction``; nothing is ever rounded. The K-theory computations of
the other modules reduce to kernels and cokernels of integer matrices, which
are read off a Smith decomposition ``U @ M @ V = S``.
"""

from __future__ import annotations

import itertools
import math
import operator
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from mpmath import iv
from mpmath.libmp import to_rational

from .errors import DomainError

__all__ = [
    "IntMatrix",
    "SmithDecomposition",
    "AbelianGroup",
    "StationaryLimitModule",
    "RationalInterval",
    "smith_normal_form",
    "abelian_group_of",
    "exterior_power",
    "leading_principal_minors",
    "positive_definite",
    "stationary_limit",
    "is_irreducible",
    "perron_bounds",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DomainError("matrix dimensions must be non-negative")
        if len(self.entries) != self.rows * self.cols:
            raise DomainError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )
        for e in self.entries:
            if isinstance(e, bool) or not isinstance(e, int):
                raise DomainError(f"matrix entries must be integers, got {e!r}")

    # construction -----------------------------------------------------------

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DomainError("ragged matrix rows")
        try:
            entries = tuple(operator.index(x) for r in rows for x in r)
        except TypeError:
            raise DomainError("matrix entries must be integers") from None
        return cls(len(rows), cols, entries)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(int(i == j) for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, tuple(values[i] if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def scalar(cls, value: int) -> "IntMatrix":
        return cls(1, 1, (int(value),))

    # access -----------------------------------------------------------------

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def column(self, j: int) -> tuple[int, ...]:
        return self.entries[j::self.cols] if self.cols else ()

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "IntMatrix":
        rows, cols = list(rows), list(cols)
        return IntMatrix(len(rows), len(cols), tuple(self[i, j] for i in rows for j in cols))

    # arithmetic -------------------------------------------------------------

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows,
                         tuple(self[i, j] for j in range(self.cols) for i in range(self.rows)))

    T = property(transpose)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DomainError(f"shape mismatch {self.shape} @ {other.shape}")
        ocols = [other.column(j) for j in range(other.cols)]
        out = []
        for i in range(self.rows):
            r = self.row(i)
            out.extend(sum(a * b for a, b in zip(r, c)) for c in ocols)
        return IntMatrix(self.rows, other.cols, tuple(out))

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(-a for a in self.entries))

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(c * a for a in self.entries))

    def __pow__(self, k: int) -> "IntMatrix":
        if not self.is_square or k < 0:
            raise DomainError("matrix powers need a square matrix and k >= 0")
        result, base = IntMatrix.identity(self.rows), self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def apply(self, vector: Sequence[int]) -> list[int]:
        return [sum(a * b for a, b in zip(self.row(i), vector)) for i in range(self.rows)]

    def _same_shape(self, other: "IntMatrix"):
        if self.shape != other.shape:
            raise DomainError(f"shape mismatch {self.shape} vs {other.shape}")

    # invariants -------------------------------------------------------------

    def det(self) -> int:
        """Determinant by Bareiss fraction-free elimination."""
        if not self.is_square:
            raise DomainError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.to_rows()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def rank(self) -> int:
        """Rank over the rationals (fraction-free elimination)."""
        a = self.to_rows()
        rank, col = 0, 0
        while rank < self.rows and col < self.cols:
            piv = next((i for i in range(rank, self.rows) if a[i][col] != 0), None)
            if piv is None:
                col += 1
                continue
            a[rank], a[piv] = a[piv], a[rank]
            p = a[rank][col]
            for i in range(rank + 1, self.rows):
                f = a[i][col]
                if f:
                    a[i] = [p * x - f * y for x, y in zip(a[i], a[rank])]
                    g = math.gcd(*a[i])
                    if g > 1:
                        a[i] = [x // g for x in a[i]]
            rank += 1
            col += 1
        return rank

    def is_symmetric(self) -> bool:
        return self.is_square and all(
            self[i, j] == self[j, i] for i in range(self.rows) for j in range(i + 1, self.cols))

    def is_scalar(self) -> bool:
        if not self.is_square:
            return False
        c = self[0, 0] if self.rows else 0
        return all(self[i, j] == (c if i == j else 0)
                   for i in range(self.rows) for j in range(self.cols))

    def __str__(self) -> str:
        return str(self.to_rows())


def matrix_to_json(m: IntMatrix) -> list[list[str]]:
    return [[str(x) for x in r] for r in m.to_rows()]


def matrix_from_json(data) -> IntMatrix:
    """Parse a JSON array of arrays of decimal strings (plain ints accepted)."""
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise DomainError("a matrix must be a JSON array of arrays")
    rows = []
    for r in data:
        row = []
        for x in r:
            if isinstance(x, bool):
                raise DomainError(f"bad matrix entry {x!r}")
            if isinstance(x, int):
                row.append(x)
            elif isinstance(x, str) and x.strip().lstrip("+-").isdigit():
                row.append(int(x))
            else:
                raise DomainError(f"bad matrix entry {x!r}")
        rows.append(row)
    return IntMatrix.from_rows(rows)


# --------------------------------------------------------------------------
# Smith normal form


@dataclass(frozen=True)
class SmithDecomposition:
    U: IntMatrix
    S: IntMatrix
    V: IntMatrix
    source: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.S[i, i] for i in range(min(self.S.shape)))

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d != 0)

    def check(self) -> bool:
        """Recompute every invariant of the decomposition."""
        d = self.diagonal
        off_diag_zero = all(self.S[i, j] == 0 for i in range(self.S.rows)
                            for j in range(self.S.cols) if i != j)
        chain = all(x >= 0 for x in d) and all(
            (b % a == 0) if a else b == 0 for a, b in zip(d, d[1:]))
        return (self.U @ self.source @ self.V == self.S and off_diag_zero and chain
                and abs(self.U.det()) == 1 and abs(self.V.det()) == 1)


def smith_normal_form(M: IntMatrix) -> SmithDecomposition:
    """Smith decomposition ``U @ M @ V = S`` with explicit unimodular transforms.

    The pivot is always an entry of minimal absolute value in the active block,
    which keeps intermediate coefficients small.
    """
    m, n = M.shape
    S = M.to_rows()
    U = IntMatrix.identity(m).to_rows()
    V = IntMatrix.identity(n).to_rows()

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in S:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        S[dst] = [a + q * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for r in S:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(S[i][j]), i, j) for i in range(t, m) for j in range(t, n) if S[i][j]]
            if not nz:
                break
            _, pi, pj = min(nz)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = S[t][t]
            clean = True
            for i in range(t + 1, m):
                if S[i][t]:
                    add_row(i, t, -(S[i][t] // p))
                    clean &= S[i][t] == 0
            for j in range(t + 1, n):
                if S[t][j]:
                    add_col(j, t, -(S[t][j] // p))
                    clean &= S[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, m)
                        for j in range(t + 1, n) if S[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad, 1)
        if S[t][t] < 0:
            S[t] = [-a for a in S[t]]
            U[t] = [-a for a in U[t]]

    return SmithDecomposition(
        U=IntMatrix.from_rows(U, m), S=IntMatrix.from_rows(S, n),
        V=IntMatrix.from_rows(V, n), source=M)


# --------------------------------------------------------------------------
# finitely generated abelian groups


@dataclass(frozen=True)
class AbelianGroup:
    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise DomainError("negative free rank")
        t = self.torsion
        if any(x < 2 for x in t) or any(b % a for a, b in zip(t, t[1:])):
            raise DomainError(f"torsion {t} is not an invariant-factor chain")

    @classmethod
    def from_orders(cls, free_rank: int, orders: Iterable[int]) -> "AbelianGroup":
        """Canonicalise ``Z^free_rank + sum Z/orders`` (orders 0 mean Z, 1 vanish)."""
        orders = [abs(o) for o in orders]
        free_rank += sum(1 for o in orders if o == 0)
        finite = [o for o in orders if o > 1]
        if not finite:
            return cls(free_rank)
        diag = smith_normal_form(IntMatrix.diagonal(finite)).diagonal
        return cls(free_rank, tuple(d for d in diag if d > 1))

    @classmethod
    def trivial(cls) -> "AbelianGroup":
        return cls(0)

    def __add__(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup.from_orders(self.free_rank + other.free_rank,
                                        self.torsion + other.torsion)

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def order(self) -> int | None:
        """Cardinality, or None when the group is infinite."""
        return None if self.free_rank else math.prod(self.torsion)

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion), "label": str(self)}

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def abelian_group_of(M: IntMatrix) -> tuple[AbelianGroup, AbelianGroup]:
    """Kernel and cokernel of ``M: Z^cols -> Z^rows``."""
    snf = smith_normal_form(M)
    r = snf.rank
    kernel = AbelianGroup(M.cols - r)
    coker = AbelianGroup.from_orders(M.rows - r, [d for d in snf.diagonal if d])
    return kernel, coker


# --------------------------------------------------------------------------
# exterior powers, definiteness


def exterior_power(M: IntMatrix, j: int) -> IntMatrix:
    """Matrix of ``j x j`` minors of ``M`` in the lexicographic basis of index tuples."""
    if not M.is_square:
        raise DomainError("exterior power of a non-square matrix")
    d = M.rows
    if j < 0 or j > d:
        raise DomainError(f"exterior power degree {j} outside 0..{d}")
    basis = list(itertools.combinations(range(d), j))
    return IntMatrix(len(basis), len(basis),
                     tuple(M.submatrix(I, J).det() for I in basis for J in basis))


def leading_principal_minors(M: IntMatrix) -> list[int]:
    return [M.submatrix(range(k), range(k)).det() for k in range(1, M.rows + 1)]


def positive_definite(M: IntMatrix) -> bool:
    """Sylvester's criterion, exactly."""
    if not M.is_symmetric():
        raise DomainError("positive_definite needs a symmetric matrix", "not_symmetric")
    return all(m > 0 for m in leading_principal_minors(M))


# --------------------------------------------------------------------------
# stationary inductive limits


@dataclass(frozen=True)
class StationaryLimitModule:
    """The group ``colim(Z^m -B-> Z^m -B-> ...)`` with ``t`` acting as the shift.

    In the colimit ``B`` becomes invertible and the Laurent variable acts as
    ``B^{-1}``; this is how ``coker(1 - B t)`` over ``Z[t, t^-1]`` is realised.
    Isomorphism testing between two such modules is deliberately not offered.
    """

    base_rank: int
    action: IntMatrix

    def __post_init__(self):
        if self.action.shape != (self.base_rank, self.base_rank):
            raise DomainError("stationary limit action must be base_rank x base_rank")

    @property
    def eventual_rank(self) -> int:
        if self.base_rank == 0:
            return 0
        return (self.action ** self.base_rank).rank()

    @property
    def label(self) -> str | None:
        """Canonical name when one is available, else None."""
        m, B = self.base_rank, self.action
        if self.eventual_rank == 0:
            return "0"
        if B.is_scalar():
            b = abs(B[0, 0])
            core = "Z" if b == 1 else f"Z[1/{b}]"
            return core if m == 1 else f"{core}^{m}"
        if abs(B.det()) == 1:
            return f"Z^{m}"
        return None

    @property
    def t_action(self) -> Fraction | None:
        """The scalar by which t acts, for rank-one modules with nonzero action."""
        if self.base_rank == 1 and self.action[0, 0] != 0:
            return Fraction(1, self.action[0, 0])
        return None

    def to_json(self) -> dict:
        t = self.t_action
        return {
            "base_rank": self.base_rank,
            "action": matrix_to_json(self.action),
            "eventual_rank": self.eventual_rank,
            "label": self.label,
            "t_acts_as": None if t is None else str(t),
        }


def stationary_limit(B: IntMatrix) -> StationaryLimitModule:
    if not B.is_square:
        raise DomainError("stationary limit needs a square connecting map")
    return StationaryLimitModule(B.rows, B)


# --------------------------------------------------------------------------
# certified Perron bounds


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "RationalInterval":
        return cls(Fraction(x), Fraction(x))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, RationalInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def intersects(self, other: "RationalInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    @staticmethod
    def _coerce(x) -> "RationalInterval":
        return x if isinstance(x, RationalInterval) else RationalInterval.point(x)

    def __add__(self, other) -> "RationalInterval":
        o = self._coerce(other)
        return RationalInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self) -> "RationalInterval":
        return RationalInterval(-self.hi, -self.lo)

    def __sub__(self, other) -> "RationalInterval":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalInterval":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalInterval":
        o = self._coerce(other)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RationalInterval(min(p), max(p))

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalInterval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return RationalInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "RationalInterval":
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other) -> "RationalInterval":
        return self._coerce(other) * self.reciprocal()

    def round_outward(self, bits: int) -> "RationalInterval":
        """Enclose in an interval with dyadic endpoints of ``bits`` fractional bits."""
        scale = 1 << bits
        lo = Fraction(math.floor(self.lo * scale), scale)
        hi = Fraction(math.ceil(self.hi * scale), scale)
        return RationalInterval(lo, hi)

    def __pow__(self, k: int) -> "RationalInterval":
        if k < 0:
            return self.reciprocal() ** -k
        out = RationalInterval.point(1)
        for _ in range(k):
            out = out * self
        return out

    def log(self, prec: int = 120) -> "RationalInterval":
        """Outward-rounded enclosure of ``log`` over the interval."""
        if self.lo <= 0:
            raise DomainError("log of a non-positive interval")
        return _iv_call(iv.log, self, prec)

    def exp(self, prec: int = 120) -> "RationalInterval":
        return _iv_call(iv.exp, self, prec)

    def to_json(self, digits: int = 20) -> dict:
        return {
            "lo": f"{self.lo.numerator}/{self.lo.denominator}",
            "hi": f"{self.hi.numerator}/{self.hi.denominator}",
            "lo_decimal": _decimal(self.lo, digits, floor=True),
            "hi_decimal": _decimal(self.hi, digits, floor=False),
        }

    def __str__(self) -> str:
        return f"[{_decimal(self.lo, 15, True)}, {_decimal(self.hi, 15, False)}]"


@contextmanager
def _iv_precision(prec: int):
    saved = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = saved


def _iv_fraction(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _iv_call(fn, x: RationalInterval, prec: int) -> RationalInterval:
    with _iv_precision(prec):
        flo, fhi = fn(_iv_fraction(x.lo)), fn(_iv_fraction(x.hi))  # both functions are increasing
        a = to_rational(flo._mpi_[0])
        b = to_rational(fhi._mpi_[1])
    return RationalInterval(Fraction(int(a[0]), int(a[1])), Fraction(int(b[0]), int(b[1])))


def _decimal(x: Fraction, digits: int, floor: bool) -> str:
    """Decimal string rounded toward -inf (floor) or +inf."""
    scale = 10 ** digits
    q = x * scale
    n = math.floor(q) if floor else math.ceil(q)
    sign = "-" if n < 0 else ""
    n = abs(n)
    whole, frac = divmod(n, scale)
    return f"{sign}{whole}.{frac:0{digits}d}"


def is_irreducible(A: IntMatrix) -> bool:
    """Whether the digraph with an edge i->j for A[i, j] != 0 is strongly connected."""
    n = A.rows
    if n == 0:
        return False
    adj = [[j for j in range(n) if A[i, j]] for i in range(n)]
    radj = [[i for i in range(n) if A[i, j]] for j in range(n)]
    for graph in (adj, radj):
        seen, stack = {0}, [0]
        while stack:
            for j in graph[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != n:
            return False
    # a 1x1 zero matrix is connected but has no edge at all
    return all(adj)


def perron_bounds(A: IntMatrix, iterations: int) -> RationalInterval:
    """Collatz-Wielandt enclosure of the spectral radius.

    Starting from the all-ones vector ``x``, apply ``A`` exactly ``iterations``
    times and return ``[min_i (Ax)_i / x_i, max_i (Ax)_i / x_i]``.
    """
    if not A.is_square:
        raise DomainError("Perron bounds need a square matrix")
    if any(a < 0 for a in A.entries):
        raise DomainError("Perron bounds need a non-negative matrix", "negative_entry")
    if any(not any(A.row(i)) for i in range(A.rows)):
        raise DomainError("matrix has a zero row", "zero_row")
    if not is_irreducible(A):
        raise DomainError("matrix is reducible", "reducible")
    if iterations < 0:
        raise DomainError("iterations must be non-negative")
    x = [1] * A.rows
    for _ in range(iterations):
        x = A.apply(x)
        g = math.gcd(*x)
        if g > 1:  # the ratios are scale invariant
            x = [v // g for v in x]
    y = A.apply(x)
    ratios = [Fraction(a, b) for a, b in zip(y, x)]
    return RationalInterval(min(ratios), max(ratios))
