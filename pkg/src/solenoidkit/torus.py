"""Integer dilation matrices acting on the d-torus."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, StructuralFailure
from .exact_linalg import (
    AbelianGroup,
    IntMatrix,
    RationalInterval,
    StationaryLimitModule,
    abelian_group_of,
    exterior_power,
    leading_principal_minors,
    matrix_to_json,
    stationary_limit,
)


@dataclass(frozen=True)
class DilationSystem:
    dimension: int
    A: IntMatrix
    det: int
    module_rank: int

    @classmethod
    def of(cls, A: IntMatrix) -> "DilationSystem":
        if not A.is_square or A.rows == 0:
            raise DomainError("dilation matrix must be square and non-empty", "bad_matrix")
        det = A.det()
        if det == 0:
            raise DomainError("dilation matrix is singular", "singular")
        return cls(A.rows, A, det, abs(det))

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "A": matrix_to_json(self.A),
                "det": str(self.det), "module_rank": str(self.module_rank)}


@dataclass(frozen=True)
class WielerCertificate:
    expansive: bool
    witness: tuple[int, ...]
    conformal_level: int | None

    def to_json(self) -> dict:
        return {"expansive": self.expansive, "witness": [str(m) for m in self.witness],
                "conformal_level": None if self.conformal_level is None else str(self.conformal_level)}


def analyze_dilation(A: IntMatrix) -> tuple[DilationSystem, WielerCertificate]:
    """Expansiveness via Sylvester's test on ``A^T A - I`` and conformality of ``A^T A``."""
    sys = DilationSystem.of(A)
    gram = A.T @ A
    witness = tuple(leading_principal_minors(gram - IntMatrix.identity(sys.dimension)))
    level = gram[0, 0] if gram.is_scalar() else None
    if level is not None and level ** sys.dimension != sys.det ** 2:
        raise StructuralFailure("conformal level inconsistent with the determinant")
    return sys, WielerCertificate(all(m > 0 for m in witness), witness, level)


def _require_expansive(sys: DilationSystem) -> WielerCertificate:
    cert = analyze_dilation(sys.A)[1]
    if not cert.expansive:
        raise DomainError("dilation matrix is not expansive", "not_expansive")
    return cert


def adjugate(M: IntMatrix) -> IntMatrix:
    n = M.rows
    if n == 1:
        return IntMatrix.identity(1)
    idx = range(n)
    return IntMatrix.from_rows([
        [(-1) ** (i + j) * M.submatrix([r for r in idx if r != j], [c for c in idx if c != i]).det()
         for j in idx]
        for i in idx])


@dataclass(frozen=True)
class BMatrixFamily:
    b: tuple[IntMatrix, ...]
    exterior: tuple[IntMatrix, ...]
    module_rank: int

    def check(self) -> bool:
        return all(B @ W == IntMatrix.identity(B.rows).scale(self.module_rank)
                   for B, W in zip(self.b, self.exterior))

    def to_json(self) -> list:
        return [matrix_to_json(B) for B in self.b]


def b_matrices(sys: DilationSystem) -> BMatrixFamily:
    """``B_j = |det A| (wedge^j A)^{-1}``, which is always an integer matrix."""
    bs, ws = [], []
    for j in range(sys.dimension + 1):
        W = exterior_power(sys.A, j)
        dw = W.det()
        adj = adjugate(W)
        num = adj.scale(sys.module_rank)
        if any(e % dw for e in num.entries):
            raise StructuralFailure(f"B_{j} is not integral")
        bs.append(IntMatrix(num.rows, num.cols, tuple(e // dw for e in num.entries)))
        ws.append(W)
    fam = BMatrixFamily(tuple(bs), tuple(ws), sys.module_rank)
    if not fam.check():
        raise StructuralFailure("B_j wedge^j A != |det A| id")
    if bs[-1] != IntMatrix.scalar(1 if sys.det > 0 else -1):
        raise StructuralFailure("top B matrix differs from sign(det A)")
    return fam


@dataclass(frozen=True)
class EquivariantKTheory:
    k0: tuple[StationaryLimitModule, ...]
    k1: tuple[StationaryLimitModule, ...]

    def to_json(self) -> dict:
        return {"k0": [m.to_json() for m in self.k0], "k1": [m.to_json() for m in self.k1]}


def equivariant_ktheory(sys: DilationSystem) -> EquivariantKTheory:
    """One stationary limit ``coker(1 - B_j t)`` per exterior degree, split by parity."""
    _require_expansive(sys)
    mods = [stationary_limit(B) for B in b_matrices(sys).b]
    return EquivariantKTheory(tuple(mods[0::2]), tuple(mods[1::2]))


@dataclass(frozen=True)
class KHomology:
    k0hom: AbelianGroup
    k1hom: AbelianGroup
    summands: dict

    def to_json(self) -> dict:
        return {"k0hom": self.k0hom.to_json(), "k1hom": self.k1hom.to_json(),
                "degrees": self.summands}


def khomology(sys: DilationSystem) -> KHomology:
    """K-homology of the Cuntz-Pimsner algebra of the dilation, case by sign of det."""
    if sys.module_rank < 2:
        raise DomainError("K-homology formula needs |det A| >= 2", "unimodular")
    _require_expansive(sys)
    d = sys.dimension
    fam = b_matrices(sys)

    def coker(j: int) -> AbelianGroup:
        B = fam.b[j]
        return abelian_group_of(IntMatrix.identity(B.rows) - B.T)[1]

    if sys.det > 1:
        even_js = [j for j in range(d) if j % 2 == 1]
        odd_js = [j for j in range(d) if j % 2 == 0]
        base = AbelianGroup(1)
    else:
        even_js = [j for j in range(d + 1) if j % 2 == 1]
        odd_js = [j for j in range(d + 1) if j % 2 == 0]
        base = AbelianGroup(0)
    k0 = sum((coker(j) for j in even_js), base)
    k1 = sum((coker(j) for j in odd_js), base)
    return KHomology(k0, k1, {"k0hom": even_js, "k1hom": odd_js, "free_summand": base.free_rank})


# --------------------------------------------------------------------------
# conformal dilations


def _sum_of_two_squares(N: int) -> bool:
    p, n = 2, N
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if p % 4 == 3 and e % 2:
            return False
        p += 1
    return not (n > 1 and n % 4 == 3)


def _legendre_excluded(N: int) -> bool:
    while N % 4 == 0 and N:
        N //= 4
    return N % 8 == 7


def _vectors_of_norm(d: int, N: int) -> list[tuple[int, ...]]:
    r = math.isqrt(N)
    out = []
    for v in itertools.product(range(-r, r + 1), repeat=d - 1):
        rest = N - sum(x * x for x in v)
        if rest < 0:
            continue
        s = math.isqrt(rest)
        if s * s == rest:
            out.extend(sorted({v + (s,), v + (-s,)}))
    return sorted(out)


def enumerate_conformal(d: int, N: int) -> list[IntMatrix]:
    """All ``A`` with ``A^T A = N I``, in lexicographic order of the row-major entries."""
    if d not in (2, 3):
        raise DomainError("conformal enumeration supports d in {2, 3}", "bad_dimension")
    if N < 1:
        raise DomainError("conformal level must be positive", "bad_level")
    cols = _vectors_of_norm(d, N)
    found = []

    def extend(chosen: list):
        if len(chosen) == d:
            found.append(IntMatrix.from_rows([[c[i] for c in chosen] for i in range(d)]))
            return
        for v in cols:
            if all(sum(a * b for a, b in zip(u, v)) == 0 for u in chosen):
                extend(chosen + [v])

    extend([])
    found.sort(key=lambda m: m.entries)
    if d == 2 and bool(found) != _sum_of_two_squares(N):
        raise StructuralFailure(f"two-square criterion contradicted at N={N}")
    if d == 3 and _legendre_excluded(N) and found:
        raise StructuralFailure(f"three-square criterion contradicted at N={N}")
    return found


def lattice_points_in_disk(radius: int) -> int:
    """Integer points with x^2 + y^2 <= radius^2, origin included."""
    r2 = radius * radius
    return sum(1 for x in range(-radius, radius + 1)
               for y in range(-radius, radius + 1) if x * x + y * y <= r2)


@dataclass(frozen=True)
class KmsBeta:
    half_dimension: Fraction
    level: int
    log_det: RationalInterval
    beta: RationalInterval

    def to_json(self) -> dict:
        return {"symbolic": {"coefficient": str(self.half_dimension), "log_of": str(self.level)},
                "beta": self.beta.to_json(), "log_abs_det": self.log_det.to_json()}


def kms_beta(sys: DilationSystem) -> KmsBeta:
    """``beta = (d/2) log N`` for a conformal dilation with ``A^T A = N I``."""
    cert = analyze_dilation(sys.A)[1]
    N = cert.conformal_level
    if N is None:
        raise DomainError("dilation is not conformal", "not_conformal")
    if N ** sys.dimension != sys.module_rank ** 2:
        raise StructuralFailure("(d/2) log N differs from log|det A|")
    half = Fraction(sys.dimension, 2)
    log_n = RationalInterval.point(N).log()
    return KmsBeta(half, N, RationalInterval.point(sys.module_rank).log(), log_n * half)


@dataclass(frozen=True)
class FrameTheta:
    e_action: IntMatrix
    g_action: IntMatrix
    product: IntMatrix
    blocks: tuple[tuple[IntMatrix, IntMatrix], ...]

    def to_json(self) -> dict:
        return {"e_action": matrix_to_json(self.e_action), "g_action": matrix_to_json(self.g_action),
                "product": matrix_to_json(self.product)}


def block_diagonal(blocks) -> IntMatrix:
    n = sum(b.rows for b in blocks)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                rows[off + i][off + j] = b[i, j]
        off += b.rows
    return IntMatrix.from_rows(rows, n)


def frame_theta(sys: DilationSystem) -> FrameTheta:
    """The actions of the module class and of the pullback class on exterior degrees."""
    _require_expansive(sys)
    fam = b_matrices(sys)
    E, G = block_diagonal(fam.b), block_diagonal(fam.exterior)
    P = E @ G
    if P != IntMatrix.identity(P.rows).scale(sys.module_rank):
        raise StructuralFailure("module class times pullback class is not |det A| id")
    return FrameTheta(E, G, P, tuple(zip(fam.b, fam.exterior)))
