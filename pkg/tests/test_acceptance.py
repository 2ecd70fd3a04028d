"""The twelve acceptance criteria, each with its stated time limit.

Every criterion prints one ``acceptance N: PASS/FAIL`` line (also collected
into the terminal summary).
"""

from __future__ import annotations

import functools
import random
import time
from fractions import Fraction

from mpmath import mp

from solenoidkit.exact_linalg import IntMatrix, abelian_group_of, exterior_power
from solenoidkit.groupoid import kappa
from solenoidkit.oracles import cokernel_by_cosets, killed_counts_from_torsion, naive_kappa
from solenoidkit.sft import EventuallyPeriodicWord
from solenoidkit.torus import DilationSystem, b_matrices

from conftest import ACCEPTANCE, cli


def criterion(number: int, title: str, limit: float):
    def wrap(fn):
        @functools.wraps(fn)
        def test():
            start = time.perf_counter()
            status, detail = "FAIL", ""
            try:
                fn()
                elapsed = time.perf_counter() - start
                assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"
                status = "PASS"
            except AssertionError as exc:
                detail = f" ({str(exc).splitlines()[0] if str(exc) else 'assertion failed'})"
                raise
            finally:
                elapsed = time.perf_counter() - start
                line = f"acceptance {number:2d}: {status} [{elapsed:6.2f}s / {limit:g}s] {title}{detail}"
                print(line)
                ACCEPTANCE.append(line)
        return test
    return wrap


def hp(expr) -> Fraction:
    with mp.workdps(50):
        return Fraction(mp.nstr(expr(), 45))


def frac(s: str) -> Fraction:
    return Fraction(s)


@criterion(1, "Cuntz algebra K-theory for N = 2..6", 1.0)
def test_criterion_01_cuntz_ktheory():
    for n in range(2, 7):
        res = cli("sft", "ktheory", "--preset", f"full-{n}-shift", "--oracle")["results"]
        assert res["k0"]["free_rank"] == 0
        assert res["k0"]["torsion"] == ([n - 1] if n > 2 else [])
        assert res["oracle"]["agrees"]


@criterion(2, "entropy certificates (full N-shift, golden mean)", 1.0)
def test_criterion_02_entropy():
    for n in range(2, 7):
        res = cli("sft", "entropy", "--preset", f"full-{n}-shift", "--iters", "1")["results"]
        assert frac(res["rho"]["lo"]) == frac(res["rho"]["hi"]) == n
        beta = (frac(res["beta"]["lo"]), frac(res["beta"]["hi"]))
        log_n = hp(lambda: mp.log(n))
        assert beta[0] - Fraction(1, 10 ** 30) <= log_n <= beta[1] + Fraction(1, 10 ** 30)
    res = cli("sft", "entropy", "--preset", "golden-mean", "--iters", "40", "--oracle")["results"]
    phi = hp(lambda: (1 + mp.sqrt(5)) / 2)
    lo, hi = frac(res["rho"]["lo"]), frac(res["rho"]["hi"])
    assert lo <= phi <= hi
    assert hi - lo < Fraction(1, 10 ** 9)
    assert res["oracle"]["agrees"]


@criterion(3, "n-solenoid K-homology and equivariant K-theory, n = 2..5", 5.0)
def test_criterion_03_n_solenoid():
    for n in range(2, 6):
        res = cli("torus", "khomology", "--preset", f"dilation-{n}", "--oracle")["results"]
        assert res["k0hom"] == {"free_rank": 1, "torsion": [], "label": "Z"}
        assert res["k1hom"]["free_rank"] == 1
        assert res["k1hom"]["torsion"] == ([n - 1] if n > 2 else [])
        assert res["oracle"]["agrees"]
        kt = cli("torus", "ktheory", "--preset", f"dilation-{n}")["results"]
        (k0,), (k1,) = kt["k0"], kt["k1"]
        assert k0["label"] == f"Z[1/{n}]" and frac(k0["t_acts_as"]) == Fraction(1, n)
        assert k1["label"] == "Z" and frac(k1["t_acts_as"]) == 1
    kt = cli("torus", "ktheory", "--preset", "dilation--3")["results"]
    assert frac(kt["k1"][0]["t_acts_as"]) == -1


@criterion(4, "B-matrix identity on 100 random matrices and the conformal example", 5.0)
def test_criterion_04_b_matrices():
    rng = random.Random(20240401)
    done = 0
    while done < 100:
        d = rng.randint(1, 4)
        A = IntMatrix.from_rows([[rng.randint(-3, 3) for _ in range(d)] for _ in range(d)])
        if A.det() == 0:
            continue
        fam = b_matrices(DilationSystem.of(A))
        for j, B in enumerate(fam.b):
            assert B @ exterior_power(A, j) == IntMatrix.identity(B.rows).scale(abs(A.det()))
        done += 1
    res = cli("torus", "bmatrices", "--preset", "conformal-2d")["results"]
    assert res["b_matrices"][1] == [["1", "1"], ["-1", "1"]]
    assert res["identity_holds"]


@criterion(5, "conformal enumeration and lattice count", 1.0)
def test_criterion_05_conformal():
    counts = {}
    for d, N in ((2, 2), (2, 3), (3, 7)):
        res = cli("torus", "conformal-enum", "--dim", str(d), "--level", str(N), "--oracle")["results"]
        assert res["oracle"]["agrees"]
        counts[(d, N)] = res["count"]
    assert counts == {(2, 2): 8, (2, 3): 0, (3, 7): 0}
    res = cli("torus", "lattice-count", "--radius", "10", "--oracle")["results"]
    assert res["count"] == 317 and res["oracle"]["agrees"]


@criterion(6, "depth-10 groupoid commutator bound and psi positivity", 30.0)
def test_criterion_06_groupoid_bounds():
    for preset in ("full-2-shift", "golden-mean"):
        res = cli("groupoid", "commutator-check", "--preset", preset, "--depth", "10")["results"]
        assert res["max_difference"] == 2
        assert max(int(k) for k in res["histogram"]) <= 2
        assert res["positivity_holds"]


@criterion(7, "bucket multiplicities equal admissible word counts", 5.0)
def test_criterion_07_bucket_ranks():
    expected_n2 = {"full-2-shift": 4, "golden-mean": 3}
    for preset, n2 in expected_n2.items():
        res = cli("groupoid", "enumerate", "--preset", preset, "--depth", "6")["results"]
        mult = {(b["n"], b["k"]): b["multiplicity"] for b in res["buckets"]}
        assert mult[(2, 0)] == n2
        for n in range(0, 7):
            assert mult.get((n, 0), 0) == res["admissible_word_counts"][str(n)]


@criterion(8, "Cuntz-Krieger relations on the golden-mean Fock truncation", 5.0)
def test_criterion_08_fock():
    rel = cli("groupoid", "fock", "--preset", "golden-mean", "--levels", "6")["results"]["relations"]
    assert rel["interior_exact"]
    assert rel["isometry_relation"]["defect_levels"] == [rel["top_level"]]
    assert rel["boundary_levels"] == [rel["top_level"]] == [5]


@criterion(9, "self-similar suite: nuclei, regularity, odometer tiles", 10.0)
def test_criterion_09_selfsimilar():
    odo = cli("ssg", "nucleus", "--preset", "odometer")["results"]
    assert sorted(odo["elements"]) == ["1", "a", "a^-1"] and odo["size"] == 3
    assert cli("ssg", "nucleus", "--preset", "grigorchuk")["results"]["size"] == 5
    assert cli("ssg", "regular", "--preset", "odometer")["results"]["regular"] is True
    grig = cli("ssg", "regular", "--preset", "grigorchuk")["results"]
    assert grig["regular"] is False and grig["witness"] == ["b", "c", "d"]
    for level in range(1, 7):
        tc = cli("ssg", "limit-space", "--preset", "odometer", "--level", str(level))["results"]
        assert tc["vertex_count"] == 2 ** level
        assert tc["is_cycle"] and tc["shift_fibre_sizes"] == [2]


@criterion(10, "circle operators: isometry, commutators, Toeplitz index", 1.0)
def test_criterion_10_circle():
    tol = Fraction(1, 10 ** 12)
    b = cli("circle", "build", "-n", "2", "-K", "512")["results"]
    assert b["checks"]["v_star_v_is_identity_on_interior"]
    cz = cli("circle", "comm-z", "-n", "2", "-K", "512")["results"]["coefficients"]
    for k, exact in (("-1", hp(lambda: mp.log(2))), ("1", hp(lambda: mp.log(mp.mpf(5) / 2)))):
        lo, hi = frac(cz[k]["lo"]), frac(cz[k]["hi"])
        assert hi - lo < tol and abs((lo + hi) / 2 - exact) < tol
    for n in (2, 3):
        cv = cli("circle", "comm-v", "-n", str(n), "-K", "512")["results"]["interior_norm"]
        lo, hi = frac(cv["lo"]), frac(cv["hi"])
        assert hi - lo < tol and abs((lo + hi) / 2 - hp(lambda: mp.log(n))) < tol
    for m in (1, 2, 3):
        idx = cli("circle", "pairing", "-n", "2", "-K", "64", "--winding", str(m))["results"]
        assert idx["index"] == -m


@criterion(11, "KMS eigenmeasure and Ruelle weight coherence", 1.0)
def test_criterion_11_kms():
    rep = cli("kms", "report", "--preset", "golden-mean", "--level", "3")["results"]
    eig = rep["eigenmeasure"]
    assert eig["passes"] and eig["max_defect_float"] <= eig["tolerance_float"]
    mass = rep["measure"]["values"]

    def weight(*middles):
        window = '{"anchor": "0", "middles": [' + ", ".join(f'"{m}"' for m in middles) + "]}"
        w = cli("kms", "weight", "--preset", "golden-mean", "--window", window)["results"]["weight"]
        return frac(w["lo"]), frac(w["hi"])

    def close(a, b):
        return a[0] <= b[1] and b[0] <= a[1]

    # single sheet equals the cylinder mass
    w = weight("0.010")
    assert close(w, (frac(mass["010"]["lo"]), frac(mass["010"]["hi"])))
    # additivity over disjoint sheets
    parts = [weight("1.00"), weight("1.01"), weight("10.0")]
    total = weight("1.00", "1.01", "10.0")
    assert close(total, (sum(p[0] for p in parts), sum(p[1] for p in parts)))


@criterion(12, "oracle equivalence: cokernels (500) and kappa (1000)", 60.0)
def test_criterion_12_oracles():
    rng = random.Random(12)
    for _ in range(500):
        r, c = rng.randint(1, 3), rng.randint(1, 3)
        M = IntMatrix.from_rows([[rng.randint(-2, 2) for _ in range(c)] for _ in range(r)])
        _, coker = abelian_group_of(M)
        killed = cokernel_by_cosets(M)
        if coker.free_rank:
            assert killed is None
        else:
            assert killed == killed_counts_from_torsion(coker.torsion, coker.order)

    def word():
        prefix = [rng.randint(0, 1) for _ in range(rng.randint(0, 5))]
        cycle = [rng.randint(0, 1) for _ in range(rng.randint(1, 3))]
        return EventuallyPeriodicWord.of(prefix, cycle)

    for _ in range(1000):
        x, y, n = word(), word(), rng.randint(-6, 6)
        assert kappa(x, n, y) == naive_kappa(x, n, y)
