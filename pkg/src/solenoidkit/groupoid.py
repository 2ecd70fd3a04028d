"""Finite-depth slices of the Deaconu-Renault groupoid of a shift of finite type.

Every infinite sequence is eventually periodic, so the minimal lag ``kappa``
is decided exactly. Besides the groupoid itself this module enumerates the
fibre used for localised spectral triples and assembles level-truncated Fock
representations of the Toeplitz generators.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import DomainError
from .exact_linalg import IntMatrix, RationalInterval
from .sft import MIXING, EventuallyPeriodicWord, SftSystem, Word, recurrence_class

__all__ = [
    "psi",
    "kappa",
    "GroupoidElement",
    "TruncatedGroupoid",
    "enumerate_groupoid",
    "d_spectrum",
    "commutator_bound_check",
    "FiberPoint",
    "LocalizedFiber",
    "localized_fiber",
    "heat_trace_convergence",
    "FockTruncation",
    "fock_truncation",
]


def psi(n: int, k: int) -> int:
    if k < max(0, -n):
        raise DomainError(f"({n}, {k}) is not an admissible index pair")
    return n if k == 0 else -abs(n) - k


def kappa(x: EventuallyPeriodicWord, n: int, y: EventuallyPeriodicWord,
          system: SftSystem | None = None) -> int | None:
    """Least ``k >= max(0, -n)`` with ``sigma^(n+k) x == sigma^k y``, or None.

    Once both sides are purely periodic the comparison can no longer change:
    equal periodic points stay equal under the shift, and the shift is
    injective on periodic points. So checking up to that lag is exhaustive.
    """
    if system is not None:
        for w in (x, y):
            if not w.is_admissible(system):
                raise DomainError("inadmissible word", "inadmissible")
    start = max(0, -n)
    stop = max(start, len(x.prefix) - n, len(y.prefix))
    for k in range(start, stop + 1):
        if x.shift(n + k) == y.shift(k):
            return k
    return None


@dataclass(frozen=True)
class GroupoidElement:
    x: EventuallyPeriodicWord
    n: int
    y: EventuallyPeriodicWord
    kappa: int
    psi_value: int

    @property
    def c(self) -> int:
        return self.n

    @classmethod
    def make(cls, x: EventuallyPeriodicWord, n: int, y: EventuallyPeriodicWord) -> "GroupoidElement | None":
        k = kappa(x, n, y)
        if k is None:
            return None
        return cls(x, n, y, k, psi(n, k))


@dataclass
class TruncatedGroupoid:
    system: SftSystem
    depth: int
    anchor: EventuallyPeriodicWord
    elements: list[GroupoidElement]
    buckets: dict[tuple[int, int], int] = field(default_factory=dict)

    def to_json(self, with_elements: bool = False) -> dict:
        out = {
            "depth": self.depth,
            "anchor": self.anchor.format(self.system),
            "element_count": len(self.elements),
            "buckets": [{"n": n, "k": k, "multiplicity": m, "psi": psi(n, k)}
                        for (n, k), m in sorted(self.buckets.items())],
        }
        if with_elements:
            out["elements"] = [
                {"x": e.x.format(self.system), "n": e.n, "y": e.y.format(self.system),
                 "kappa": e.kappa, "psi": e.psi_value} for e in self.elements]
        return out


def _candidate_points(s: SftSystem, depth: int, anchor: EventuallyPeriodicWord) -> list[EventuallyPeriodicWord]:
    """Distinct sequences ``w . sigma^r(anchor)`` with ``|w| <= depth``."""
    tails = [anchor.shift(r) for r in range(anchor.period)]
    seen: dict[EventuallyPeriodicWord, None] = {}
    for tail in tails:
        seen.setdefault(tail)
        for length in range(1, depth + 1):
            for w in s.words(length):
                if s.allowed(w[-1], tail.letter(0)):
                    seen.setdefault(tail.prepend(w))
    return list(seen)


def enumerate_groupoid(s: SftSystem, depth: int, anchor: EventuallyPeriodicWord) -> TruncatedGroupoid:
    """All ``(x, n, anchor)`` with ``|n| <= depth`` and ``kappa <= depth``.

    ``x`` runs over sequences that agree with a shift of the anchor after at
    most ``depth`` free letters.
    """
    if recurrence_class(s) != MIXING:
        raise DomainError("groupoid enumeration needs a mixing system", "not_mixing")
    if not anchor.is_periodic:
        raise DomainError("the anchor must be purely periodic", "bad_anchor")
    if not anchor.is_admissible(s):
        raise DomainError("the anchor is not admissible", "inadmissible")
    if depth < 0:
        raise DomainError("depth must be non-negative")
    elements = []
    for x in _candidate_points(s, depth, anchor):
        for n in range(-depth, depth + 1):
            e = GroupoidElement.make(x, n, anchor)
            if e is not None and e.kappa <= depth:
                elements.append(e)
    elements.sort(key=lambda e: (e.n, e.kappa, e.x.prefix, e.x.cycle))
    buckets = Counter((e.n, e.kappa) for e in elements)
    return TruncatedGroupoid(s, depth, anchor, elements, dict(sorted(buckets.items())))


def d_spectrum(t: TruncatedGroupoid) -> list[tuple[int, int]]:
    """Eigenvalues ``psi(n, k)`` of D with multiplicities merged across buckets."""
    spec: Counter = Counter()
    for (n, k), m in t.buckets.items():
        spec[psi(n, k)] += m
    return sorted(spec.items())


@dataclass(frozen=True)
class CommutatorReport:
    max_difference: int
    histogram: dict[int, int]
    worst: GroupoidElement | None

    def to_json(self, system: SftSystem) -> dict:
        w = self.worst
        return {
            "max_difference": self.max_difference,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "worst": None if w is None else {"x": w.x.format(system), "n": w.n,
                                             "y": w.y.format(system), "kappa": w.kappa},
        }


def commutator_bound_check(t: TruncatedGroupoid) -> CommutatorReport:
    """Largest ``|psi(x, n, y) - psi(g(x), n - 1, y)|`` over the enumeration."""
    hist: Counter = Counter()
    best, worst = 0, None
    for e in t.elements:
        partner = GroupoidElement.make(e.x.shift(1), e.n - 1, e.y)
        if partner is None:  # cannot happen: the partner lies in the same class
            raise DomainError("shifted partner left the groupoid")
        diff = abs(e.psi_value - partner.psi_value)
        hist[diff] += 1
        if worst is None or diff > best:
            best, worst = diff, e
    return CommutatorReport(best, dict(hist), worst)


# --------------------------------------------------------------------------
# localised fibre


@dataclass(frozen=True)
class FiberPoint:
    """A point ``x`` of the unstable set of the anchor orbit together with a lag ``j``.

    The past of ``x`` is the periodic tail ``left_tail`` repeated to the left;
    its coordinates ``0 .. |middle|-1`` are ``middle``; after that ``x``
    continues as ``sigma^(|middle| - j) v``.
    """

    left_tail: Word
    middle: Word
    j: int
    kappa_z: int
    eigenvalue: int


def _heat_term(lam: int, t: Fraction) -> RationalInterval:
    return (RationalInterval.point(-t * lam * lam)).exp()


def _zeta_term(lam: int, s: Fraction) -> RationalInterval:
    return (RationalInterval.point(1 + lam * lam).log() * (-s / 2)).exp()


@dataclass
class LocalizedFiber:
    system: SftSystem
    anchor: EventuallyPeriodicWord
    v: EventuallyPeriodicWord
    window: int
    points: list[FiberPoint]

    def spectrum(self) -> list[tuple[int, int]]:
        return sorted(Counter(p.eigenvalue for p in self.points).items())

    def heat_trace(self, t) -> RationalInterval:
        t = Fraction(t)
        if t <= 0:
            raise DomainError("heat trace needs t > 0")
        return sum((_heat_term(lam, t) * m for lam, m in self.spectrum()), RationalInterval.point(0))

    def summability_profile(self, s) -> RationalInterval:
        s = Fraction(s)
        return sum((_zeta_term(lam, s) * m for lam, m in self.spectrum()), RationalInterval.point(0))

    def to_json(self, heat: Sequence = (), zeta: Sequence = ()) -> dict:
        fmt = self.system.format_word
        return {
            "window": self.window,
            "anchor": self.anchor.format(self.system),
            "v": self.v.format(self.system),
            "point_count": len(self.points),
            "spectrum": [{"eigenvalue": lam, "multiplicity": m} for lam, m in self.spectrum()],
            "heat_trace": {str(Fraction(t)): self.heat_trace(t).to_json() for t in heat},
            "summability_profile": {str(Fraction(s)): self.summability_profile(s).to_json() for s in zeta},
            "points": [{"left_tail": fmt(p.left_tail), "middle": fmt(p.middle), "j": p.j,
                        "kappa_z": p.kappa_z, "eigenvalue": p.eigenvalue} for p in self.points],
        }


def localized_fiber(s: SftSystem, anchor: EventuallyPeriodicWord, v: EventuallyPeriodicWord,
                    window: int) -> LocalizedFiber:
    """Fibre points with ``|j| <= window`` and middle word of length ``<= window``.

    Each point is stored in its shortest form: the middle word cannot be
    shortened by absorbing its last letter into the tail of ``v``.
    """
    if recurrence_class(s) != MIXING:
        raise DomainError("localised fibre needs a mixing system", "not_mixing")
    if not anchor.is_periodic:
        raise DomainError("the anchor must be purely periodic", "bad_anchor")
    for w in (anchor, v):
        if any(a >= s.size for a in w.prefix + w.cycle):
            raise DomainError("word uses symbols outside the alphabet", "bad_symbol")
        if not w.is_admissible(s):
            raise DomainError("word is not admissible", "inadmissible")
    # the left tail ends at coordinate -1; rotation r ends with cycle[r-1]
    p = anchor.cycle
    tails = [p[r:] + p[:r] for r in range(len(p))]
    points = []
    for j in range(-window, window + 1):
        for length in range(max(0, j), window + 1):
            shift = length - j
            rest = v.shift(shift)
            words = s.words(length) if length else iter([()])
            for w in words:
                if w and not s.allowed(w[-1], rest.letter(0)):
                    continue
                if w and shift > 0 and w[-1] == v.letter(shift - 1):
                    continue  # not the shortest form
                first = w[0] if w else rest.letter(0)
                future = rest.prepend(w)
                k = kappa(future, j, v)
                for tail in tails:
                    if s.allowed(tail[-1], first):
                        points.append(FiberPoint(tail, w, j, k, psi(j, k)))
    points.sort(key=lambda q: (q.j, len(q.middle), q.middle, q.left_tail))
    return LocalizedFiber(s, anchor, v, window, points)


def heat_trace_convergence(s: SftSystem, anchor: EventuallyPeriodicWord, v: EventuallyPeriodicWord,
                           windows: Iterable[int], t) -> dict:
    """Heat traces over increasing windows and whether their increments shrink."""
    windows = sorted(windows)
    traces = [localized_fiber(s, anchor, v, w).heat_trace(t) for w in windows]
    diffs = [b - a for a, b in zip(traces, traces[1:])]
    decreasing = all(d2.hi <= d1.lo for d1, d2 in zip(diffs, diffs[1:]))
    return {"windows": windows, "traces": traces, "differences": diffs, "differences_decrease": decreasing}


# --------------------------------------------------------------------------
# Fock truncation


@dataclass
class FockTruncation:
    """Toeplitz generators on the Fock module cut off after ``levels`` levels.

    Level ``k`` (0-based) is spanned by admissible words of length ``k + 1``;
    ``S_i`` prepends ``i`` and vanishes on the top level.
    """

    system: SftSystem
    levels: int
    basis: list[Word]
    S: dict[int, IntMatrix]
    report: dict

    def to_json(self) -> dict:
        return {
            "levels": self.levels,
            "dimension": len(self.basis),
            "relations": self.report,
        }


def _word_levels(defects: Iterable[int], basis: list[Word]) -> list[int]:
    return sorted({len(basis[i]) - 1 for i in defects})


def fock_truncation(s: SftSystem, levels: int) -> FockTruncation:
    if levels < 2:
        raise DomainError("Fock truncation needs at least 2 levels")
    basis = [w for length in range(1, levels + 1) for w in s.words(length)]
    index = {w: i for i, w in enumerate(basis)}
    dim = len(basis)
    S = {}
    for i in range(s.size):
        rows = [[0] * dim for _ in range(dim)]
        for col, w in enumerate(basis):
            if len(w) < levels and s.allowed(i, w[0]):
                rows[index[(i,) + w]][col] = 1
        S[i] = IntMatrix.from_rows(rows, dim)
    St = {i: m.T for i, m in S.items()}

    def proj(j: int) -> IntMatrix:
        return IntMatrix.diagonal([int(w[0] == j) for w in basis])

    P = {j: proj(j) for j in range(s.size)}
    top = levels - 1

    def defect_columns(X: IntMatrix, Y: IntMatrix) -> list[int]:
        D = X - Y
        return [c for c in range(dim) if any(D.column(c))]

    star_defects, range_defects = {}, {}
    for i in range(s.size):
        for k in range(s.size):
            lhs = St[i] @ S[k]
            rhs = IntMatrix.zeros(dim, dim)
            if i == k:
                for j in range(s.size):
                    if s.allowed(i, j):
                        rhs = rhs + P[j]
            star_defects[(i, k)] = _word_levels(defect_columns(lhs, rhs), basis)
        range_defects[i] = _word_levels(defect_columns(S[i] @ St[i], P[i]), basis)

    all_star = sorted({l for ls in star_defects.values() for l in ls})
    all_range = sorted({l for ls in range_defects.values() for l in ls})
    interior_star = [l for l in all_star if l != top]
    # S_j S_j^* misses level 0, which no S_i reaches: the compact (Toeplitz) part
    interior_range = [l for l in all_range if l not in (0, top)]
    report = {
        "isometry_relation": {
            "holds_on_interior": not interior_star,
            "defect_levels": all_star,
        },
        "range_relation": {
            "holds_on_interior": not interior_range,
            "defect_levels": all_range,
        },
        "boundary_levels": sorted({l for l in all_star + all_range if l == top}),
        "toeplitz_levels": sorted({l for l in all_range if l == 0}),
        "interior_exact": not interior_star and not interior_range,
        "top_level": top,
    }
    return FockTruncation(s, levels, basis, S, report)
