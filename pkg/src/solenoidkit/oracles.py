"""Brute-force reference computations.

Each function here recomputes something the main modules compute cleverly,
using the most direct method available. They back the ``--oracle`` CLI flag
and the test suite, so they deliberately share no code with the algorithms
they check beyond basic containers.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact_linalg import IntMatrix
from .sft import EventuallyPeriodicWord


# -- abelian groups ---------------------------------------------------------


def _det(rows: list[list[int]]) -> int:
    """Cofactor expansion (tiny matrices only)."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    return sum((-1) ** j * rows[0][j] * _det([r[:j] + r[j + 1:] for r in rows[1:]])
               for j in range(n) if rows[0][j])


def determinantal_divisors(M: IntMatrix) -> list[int]:
    """``D_k`` = gcd of all k x k minors, for k = 1 .. min(rows, cols)."""
    rows = M.to_rows()
    out = []
    for k in range(1, min(M.rows, M.cols) + 1):
        g = 0
        for I in itertools.combinations(range(M.rows), k):
            for J in itertools.combinations(range(M.cols), k):
                g = math.gcd(g, _det([[rows[i][j] for j in J] for i in I]))
        out.append(g)
    return out


def invariant_factors_by_minors(M: IntMatrix) -> tuple[int, list[int]]:
    """Rank and nonzero invariant factors ``d_k = D_k / D_{k-1}``."""
    ds = determinantal_divisors(M)
    rank = sum(1 for d in ds if d)
    factors, prev = [], 1
    for d in ds[:rank]:
        factors.append(d // prev)
        prev = d
    return rank, factors


def cokernel_by_cosets(M: IntMatrix) -> dict[int, int] | None:
    """For a finite cokernel, the number of elements killed by each ``m | order``.

    Works inside ``(Z/D)^rows`` where ``D`` is the cokernel order, which
    annihilates the cokernel. Returns None when the cokernel is infinite.
    """
    rank, factors = invariant_factors_by_minors(M)
    if rank < M.rows:
        return None
    D = math.prod(factors)
    n = M.rows
    if D == 1:
        return {1: 1}
    gens = [tuple(c % D for c in M.column(j)) for j in range(M.cols)]
    gens += [tuple(D * (i == r) % D for r in range(n)) for i in range(n)]
    zero = (0,) * n
    H = {zero}
    queue = deque([zero])
    while queue:
        h = queue.popleft()
        for g in gens:
            s = tuple((a + b) % D for a, b in zip(h, g))
            if s not in H:
                H.add(s)
                queue.append(s)
    order = D ** n // len(H)
    # one representative per coset: sweep the box, marking each new coset
    H_list = list(H)
    covered: set = set()
    reps = []
    for x in itertools.product(range(D), repeat=n):
        if x in covered:
            continue
        reps.append(x)
        covered.update(tuple((a + b) % D for a, b in zip(x, h)) for h in H_list)
    if len(reps) != order:
        raise AssertionError("coset sweep disagrees with the subgroup index")
    killed = {}
    for m in range(1, D + 1):
        if D % m == 0:
            killed[m] = sum(1 for x in reps
                            if tuple((m * a) % D for a in x) in H)
    return killed


def killed_counts_from_torsion(torsion: Sequence[int], order: int) -> dict[int, int]:
    return {m: math.prod(math.gcd(m, t) for t in torsion) for m in range(1, order + 1) if order % m == 0}


# -- shifts -----------------------------------------------------------------


def naive_kappa(x: EventuallyPeriodicWord, n: int, y: EventuallyPeriodicWord,
                search: int | None = None) -> int | None:
    """Compare long literal expansions lag by lag."""
    period = x.period * y.period // math.gcd(x.period, y.period)
    horizon = len(x.prefix) + len(y.prefix) + abs(n) + 2 * period + 2
    search = search if search is not None else horizon + 2 * period
    span = horizon + search + abs(n) + 2 * period
    xs = [x.letter(i) for i in range(span + search + abs(n) + 1)]
    ys = [y.letter(i) for i in range(span + search + 1)]
    for k in range(max(0, -n), search + 1):
        if xs[n + k:n + k + horizon] == ys[k:k + horizon]:
            return k
    return None


def power_iteration_ratio(A: IntMatrix, iterations: int) -> tuple[Fraction, Fraction]:
    """Collatz-Wielandt bounds recomputed with Fractions and no rescaling."""
    x = [Fraction(1)] * A.rows
    rows = A.to_rows()
    for _ in range(iterations):
        x = [sum(a * b for a, b in zip(r, x)) for r in rows]
    y = [sum(a * b for a, b in zip(r, x)) for r in rows]
    ratios = [a / b for a, b in zip(y, x)]
    return min(ratios), max(ratios)


# -- conformal matrices -----------------------------------------------------


def conformal_brute_force(d: int, N: int) -> list[tuple[int, ...]]:
    """All integer ``A`` with ``A^T A = N I`` by scanning every entry tuple (vectorised)."""
    r = math.isqrt(N) + (0 if math.isqrt(N) ** 2 == N else 1)
    vals = np.arange(-r, r + 1)
    cols = np.array(list(itertools.product(vals, repeat=d)), dtype=np.int64)
    cols = cols[(cols * cols).sum(axis=1) == N]
    if len(cols) == 0:
        return []
    found = []
    for combo in itertools.product(range(len(cols)), repeat=d):
        C = cols[list(combo)]  # rows of C are the columns of A
        if np.array_equal(C @ C.T, N * np.eye(d, dtype=np.int64)):
            found.append(tuple(int(v) for v in C.T.reshape(-1)))
    return sorted(found)


def lattice_count_grid(radius: int) -> int:
    xs = np.arange(-radius, radius + 1)
    X, Y = np.meshgrid(xs, xs)
    return int(np.count_nonzero(X * X + Y * Y <= radius * radius))


# -- self-similar groups ----------------------------------------------------


def odometer_carry(word: Sequence[int]) -> tuple[tuple[int, ...], bool]:
    """Add one to a binary word (least significant digit first); report overflow."""
    value = sum(b << i for i, b in enumerate(word)) + 1
    overflow = value >> len(word) == 1
    return tuple((value >> i) & 1 for i in range(len(word))), overflow


def translation_nucleus_size(A: IntMatrix, box: int = 6) -> int:
    """Nucleus of the digit-expansion action of Z^d, computed on translation vectors.

    Vectors reachable from cycles of ``v -> A^{-1}(v + x - x')`` (all digit
    pairs with an integral result) starting from a box of small vectors.
    """
    d = A.rows
    M = np.array(A.to_rows(), dtype=float)
    Minv = np.linalg.inv(M)
    det = round(np.linalg.det(M))
    # coset representatives by brute force inside a box
    reps: list[tuple[int, ...]] = []
    for v in itertools.product(range(-abs(det), abs(det) + 1), repeat=d):
        if all(not _in_lattice(Minv, np.subtract(v, r)) for r in reps):
            reps.append(v)
        if len(reps) == abs(det):
            break
    graph = {}
    nodes = set(itertools.product(range(-box, box + 1), repeat=d))
    frontier = list(nodes)
    while frontier:
        v = frontier.pop()
        out = []
        for x in reps:
            u = np.add(v, x)
            for y in reps:
                w = Minv @ np.subtract(u, y)
                wi = np.rint(w)
                if np.allclose(w, wi, atol=1e-9):
                    t = tuple(int(c) for c in wi)
                    out.append(t)
                    if t not in nodes:
                        nodes.add(t)
                        frontier.append(t)
                    break
        graph[v] = out
    # nodes lying on cycles, then their forward closure
    cyc = set()
    for v in graph:
        seen, stack = set(), list(graph[v])
        while stack:
            u = stack.pop()
            if u == v:
                cyc.add(v)
                break
            if u not in seen:
                seen.add(u)
                stack.extend(graph[u])
    closure, stack = set(cyc), list(cyc)
    while stack:
        for u in graph[stack.pop()]:
            if u not in closure:
                closure.add(u)
                stack.append(u)
    return len(closure)


def _in_lattice(Minv, v) -> bool:
    w = Minv @ np.asarray(v, dtype=float)
    return bool(np.allclose(w, np.rint(w), atol=1e-9))
