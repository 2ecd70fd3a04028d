"""Fourier-mode model of the circle maps ``x -> n x`` and the logarithmic Dirac operator.

All operators are diagonal or shift-like on the basis ``e_k``, so they are
stored as coefficient functions plus index maps rather than as matrices.
Logarithms are enclosed in rational intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError
from .exact_linalg import RationalInterval

ZERO = RationalInterval.point(0)


@lru_cache(maxsize=None)
def log_interval(x: Fraction) -> RationalInterval:
    return RationalInterval.point(x).log()


def _sign(k: int) -> int:
    return (k > 0) - (k < 0)


def signlog(k: int) -> RationalInterval:
    if k == 0:
        return ZERO
    return log_interval(Fraction(abs(k))) * _sign(k)


def _abs_interval(x: RationalInterval) -> RationalInterval:
    if x.lo >= 0:
        return x
    if x.hi <= 0:
        return -x
    return RationalInterval(0, max(-x.lo, x.hi))


@dataclass(frozen=True)
class FourierTruncation:
    n: int
    K: int

    def __post_init__(self):
        if abs(self.n) < 2:
            raise DomainError("dilation degree must satisfy |n| >= 2", "bad_degree")
        if self.K < abs(self.n):
            raise DomainError("cutoff must satisfy K >= |n|", "bad_cutoff")

    @property
    def modes(self) -> range:
        return range(-self.K, self.K + 1)

    def is_interior(self, k: int) -> bool:
        """Whether ``V e_k`` stays inside the window."""
        return abs(self.n * k) <= self.K

    @property
    def interior_modes(self) -> list[int]:
        m = self.K // abs(self.n)
        return list(range(-m, m + 1))

    @property
    def boundary_modes(self) -> list[int]:
        return [k for k in self.modes if not self.is_interior(k)]

    # operators as (coefficient, target) -----------------------------------

    def V(self, k: int) -> tuple[int, int] | None:
        return (1, self.n * k) if self.is_interior(k) else None

    def transfer(self, k: int) -> tuple[int, int] | None:
        """The transfer operator: ``e_k -> n e_{k/n}`` when ``n | k``, else 0."""
        return (self.n, k // self.n) if k % self.n == 0 else None

    def V_star(self, k: int) -> tuple[Fraction, int] | None:
        t = self.transfer(k)
        return None if t is None else (Fraction(t[0], self.n), t[1])

    def z(self, k: int) -> tuple[int, int] | None:
        return (1, k + 1) if k + 1 <= self.K else None

    def dlog(self, k: int) -> RationalInterval:
        return signlog(k)

    # structural identities -------------------------------------------------

    def check_isometry(self) -> dict:
        bad_vv = []
        for k in self.interior_modes:
            _, t = self.V(k)
            coef, back = self.V_star(t)
            if coef != 1 or back != k:
                bad_vv.append(k)
        bad_proj = []
        for k in self.modes:
            vs = self.V_star(k)
            image = None if vs is None else self.V(vs[1])
            expected = k if k % self.n == 0 else None
            got = None if image is None else image[1]
            if got != expected:
                bad_proj.append(k)
        return {
            "v_star_v_is_identity_on_interior": not bad_vv,
            "v_v_star_is_projection_onto_multiples": not bad_proj,
            "violations": {"v_star_v": bad_vv, "v_v_star": bad_proj},
        }

    def to_json(self, sample: int = 3) -> dict:
        ks = [k for k in range(-sample, sample + 1)]
        return {
            "n": self.n,
            "K": self.K,
            "interior_range": [self.interior_modes[0], self.interior_modes[-1]],
            "boundary_mode_count": len(self.boundary_modes),
            "V": {str(k): None if self.V(k) is None else self.V(k)[1] for k in ks},
            "V_star": {str(k): None if self.V_star(k) is None else
                       [str(self.V_star(k)[0]), self.V_star(k)[1]] for k in ks},
            "D_log": {str(k): self.dlog(k).to_json() for k in ks},
            "checks": self.check_isometry(),
        }


def build(n: int, K: int) -> FourierTruncation:
    return FourierTruncation(n, K)


# --------------------------------------------------------------------------
# commutators


def dlog_z_display(k: int) -> RationalInterval:
    """Coefficient of ``e_{k+1}`` in ``[D_log, z] e_k`` as displayed in closed form."""
    if k == -1:
        return log_interval(Fraction(2))
    return log_interval(1 + Fraction(2 * abs(k) + 1, k * k + 1)) * _sign(k)


def dlog_z_direct(k: int) -> RationalInterval:
    """``signlog(k + 1) - signlog(k)``, the commutator computed from the diagonal."""
    return signlog(k + 1) - signlog(k)


@dataclass(frozen=True)
class CommutatorZReport:
    K: int
    table: dict[int, RationalInterval]
    direct: dict[int, RationalInterval]
    decay_bound: RationalInterval
    decay_at_cutoff: RationalInterval
    direct_decay_at_cutoff: RationalInterval

    def to_json(self, sample: int = 3) -> dict:
        ks = sorted(k for k in self.table if abs(k) <= sample or k == -1)
        return {
            "K": self.K,
            "coefficients": {str(k): self.table[k].to_json() for k in ks},
            "direct_coefficients": {str(k): self.direct[k].to_json() for k in ks},
            "sup_k_times_abs_entry": self.decay_bound.to_json(),
            "k_times_entry_at_cutoff": self.decay_at_cutoff.to_json(),
            "direct_k_times_entry_at_cutoff": self.direct_decay_at_cutoff.to_json(),
        }


def commutator_dlog_z(t: FourierTruncation) -> CommutatorZReport:
    """Closed-form coefficients of ``[D_log, z]`` for ``-K <= k < K`` with decay data."""
    ks = range(-t.K, t.K)
    table = {k: dlog_z_display(k) for k in ks}
    direct = {k: dlog_z_direct(k) for k in ks}
    weighted = [(_abs_interval(table[k]) * abs(k)) for k in ks if k != 0]
    sup = RationalInterval(max(w.lo for w in weighted), max(w.hi for w in weighted))
    cutoff = t.K - 1
    return CommutatorZReport(t.K, table, direct, sup, table[cutoff] * cutoff, direct[cutoff] * cutoff)


@dataclass(frozen=True)
class CommutatorVReport:
    n: int
    K: int
    norm: RationalInterval
    log_n: RationalInterval
    display_norm: RationalInterval
    direct_matches_display: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "K": self.K,
            "interior_norm": self.norm.to_json(),
            "display_norm": self.display_norm.to_json(),
            "log_abs_n": self.log_n.to_json(),
            "direct_matches_display": self.direct_matches_display,
        }


def commutator_dlog_v(t: FourierTruncation) -> CommutatorVReport:
    """Norm of ``[D_log, V]`` on interior modes.

    The operator sends ``e_k`` to a multiple of ``e_{nk}`` with distinct
    targets, so its norm is the largest coefficient modulus.
    """
    log_n = log_interval(Fraction(abs(t.n)))
    direct = [signlog(t.n * k) - signlog(k) for k in t.interior_modes]
    display = [log_n * _sign(k) for k in t.interior_modes]
    mods = [_abs_interval(c) for c in direct]
    norm = RationalInterval(max(m.lo for m in mods), max(m.hi for m in mods))
    dmods = [_abs_interval(c) for c in display]
    display_norm = RationalInterval(max(m.lo for m in dmods), max(m.hi for m in dmods))
    matches = all(a.intersects(b) for a, b in zip(direct, display))
    return CommutatorVReport(t.n, t.K, norm, log_n, display_norm, matches)


# --------------------------------------------------------------------------
# Toeplitz index


@dataclass(frozen=True)
class ToeplitzIndex:
    winding: int
    kernel: int
    cokernel: int

    @property
    def index(self) -> int:
        return self.kernel - self.cokernel

    def to_json(self) -> dict:
        return {"winding": self.winding, "kernel_dim": self.kernel,
                "cokernel_dim": self.cokernel, "index": self.index}


def dirac_pairing_check(t: FourierTruncation, winding: int = 1) -> ToeplitzIndex:
    """Index of ``P z^m P`` restricted to modes ``0..K``.

    The compression maps ``span(e_0..e_K)`` into ``span(e_0..e_{K+m})`` (or
    ``..e_{K-|m|}`` for negative ``m``), which captures the whole image of the
    infinite Toeplitz operator on that window. Ranks are counted from the
    partial-shift structure: every column has at most one nonzero entry and
    distinct columns hit distinct rows.
    """
    if t.K < 2:
        raise DomainError("pairing check needs K >= 2")
    m = winding
    if abs(m) > t.K:
        raise DomainError("winding exceeds the window")
    src = range(0, t.K + 1)
    tgt_dim = t.K + 1 + m
    hits = [k + m for k in src if 0 <= k + m < tgt_dim]
    if len(set(hits)) != len(hits):
        raise DomainError("compression is not a partial shift")
    rank = len(hits)
    return ToeplitzIndex(m, len(src) - rank, tgt_dim - rank)
