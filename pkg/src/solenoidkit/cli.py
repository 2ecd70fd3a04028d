"""Command-line entry point.

Every subcommand prints one JSON report on standard output:
``{"tool", "version", "subcommand", "input_digest", "parameters", "results", "timing"}``.
Reports are byte-identical for identical inputs apart from ``timing``.

Exit status: 0 on success, 2 on domain errors (the report then carries an
``error`` object), 64 on usage errors, 70 if an internal consistency check fails.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
import time
from fractions import Fraction
from typing import Any, Callable

from . import __version__
from . import groupoid as gp
from . import kms as km
from . import oracles
from . import selfsimilar as ss
from . import sft as sf
from . import spectral_circle as sc
from . import torus as tr
from .errors import DomainError, StructuralFailure
from .exact_linalg import IntMatrix, matrix_from_json, matrix_to_json

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_INTERNAL = 0, 2, 64, 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# inputs


def _preset(name: str) -> tuple[str, Any]:
    m = re.fullmatch(r"full-(\d+)-shift", name)
    if m:
        return "sft", sf.SftSystem.full_shift(int(m.group(1))).to_json()
    m = re.fullmatch(r"dilation-(-?\d+)", name)
    if m:
        return "matrix", [[m.group(1)]]
    table = {
        "golden-mean": ("sft", sf.SftSystem.golden_mean().to_json()),
        "odometer": ("automaton", ss.odometer().to_json()),
        "grigorchuk": ("automaton", ss.grigorchuk().to_json()),
        "conformal-2d": ("matrix", [["1", "-1"], ["1", "1"]]),
    }
    if name not in table:
        raise DomainError(f"unknown preset {name!r}", "unknown_preset")
    return table[name]


def _load_input(args) -> Any:
    if args.preset:
        return _preset(args.preset)[1]
    if args.matrix:
        return json.loads(args.matrix)
    if args.input and args.input != "-":
        with open(args.input, encoding="utf-8") as fh:
            return json.load(fh)
    if args.input == "-" or not sys.stdin.isatty():
        text = sys.stdin.read()
        if text.strip():
            return json.loads(text)
    raise DomainError("no input: give --preset, --matrix, --input FILE or JSON on stdin", "no_input")


def _sft(data) -> sf.SftSystem:
    if isinstance(data, list):
        return sf.SftSystem(matrix_from_json(data))
    if isinstance(data, dict) and "system" in data:
        data = data["system"]
    return sf.SftSystem.from_json(data)


def _dilation(data) -> tr.DilationSystem:
    if isinstance(data, dict):
        data = data.get("A", data.get("matrix"))
    return tr.DilationSystem.of(matrix_from_json(data))


def _automaton(data) -> ss.MealyAutomaton:
    if isinstance(data, dict) and "states" in data:
        return ss.MealyAutomaton.from_json(data)
    if isinstance(data, (list, dict)):  # a dilation matrix
        return ss.dilation_automaton(_dilation(data).A)
    raise DomainError("automaton input must be an object with 'states'", "bad_automaton")


def _anchor(s: sf.SftSystem, text: str | None) -> sf.EventuallyPeriodicWord:
    if not text:
        return sf.EventuallyPeriodicWord.periodic((0,))
    return sf.EventuallyPeriodicWord.parse(text, s)


def _fractions(text: str | None) -> list[Fraction]:
    if not text:
        return []
    try:
        return [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError:
        raise DomainError(f"bad number list {text!r}", "bad_parameter") from None


# --------------------------------------------------------------------------
# handlers: each returns (results, oracle-or-None)


def sft_ktheory(args, data):
    s = _sft(data)
    k = sf.ck_ktheory(s)
    res = {"system": s.to_json(), "class": sf.recurrence_class(s), **k.to_json()}
    oracle = None
    if args.oracle:
        one = IntMatrix.identity(s.size)
        checks = {}
        for name, M, grp in (("khom1", one - s.matrix, k.khom1), ("k0", one - s.matrix.T, k.k0)):
            rank, factors = oracles.invariant_factors_by_minors(M)
            checks[name] = (s.size - rank == grp.free_rank
                            and [f for f in factors if f > 1] == list(grp.torsion))
        oracle = {"method": "determinantal divisors", "agrees": all(checks.values()), "checks": checks}
    return res, oracle


def sft_entropy(args, data):
    s = _sft(data)
    e = sf.entropy(s, args.iters)
    res = {"class": sf.recurrence_class(s), **e.to_json()}
    oracle = None
    if args.oracle:
        lo, hi = oracles.power_iteration_ratio(s.matrix, args.iters)
        oracle = {"method": "unscaled Fraction power iteration",
                  "agrees": (lo, hi) == (e.rho.lo, e.rho.hi)}
    return res, oracle


def sft_kms(args, data):
    s = _sft(data)
    m = sf.kms_measure(s, args.level, args.iters)
    res = m.to_json()
    res["total_contains_one"] = m.total().contains(1)
    res["refinement_defects"] = [s.format_word(w) for w in m.refinement_defects()]
    return res, None


def sft_recurrence(args, data):
    s = _sft(data)
    return {"class": sf.recurrence_class(s)}, None


def torus_analyze(args, data):
    sys_, cert = tr.analyze_dilation(_dilation(data).A)
    return {"system": sys_.to_json(), "certificate": cert.to_json()}, None


def torus_ktheory(args, data):
    sys_ = _dilation(data)
    return {"system": sys_.to_json(), "b_matrices": tr.b_matrices(sys_).to_json(),
            **tr.equivariant_ktheory(sys_).to_json()}, None


def torus_bmatrices(args, data):
    sys_ = _dilation(data)
    fam = tr.b_matrices(sys_)
    return {"system": sys_.to_json(), "b_matrices": fam.to_json(), "identity_holds": fam.check()}, None


def torus_khomology(args, data):
    sys_ = _dilation(data)
    kh = tr.khomology(sys_)
    res = {"system": sys_.to_json(), **kh.to_json()}
    oracle = None
    if args.oracle:
        fam = tr.b_matrices(sys_)
        ok = True
        for j, B in enumerate(fam.b):
            M = IntMatrix.identity(B.rows) - B.T
            rank, factors = oracles.invariant_factors_by_minors(M)
            got = tr.abelian_group_of(M)[1]
            ok &= (B.rows - rank == got.free_rank and [f for f in factors if f > 1] == list(got.torsion))
        oracle = {"method": "determinantal divisors of 1 - B_j^T", "agrees": ok}
    return res, oracle


def torus_conformal_enum(args, data):
    mats = tr.enumerate_conformal(args.dim, args.level)
    res = {"dim": args.dim, "level": args.level, "count": len(mats),
           "matrices": [matrix_to_json(m) for m in mats]}
    oracle = None
    if args.oracle:
        brute = oracles.conformal_brute_force(args.dim, args.level)
        oracle = {"method": "exhaustive entry scan", "count": len(brute),
                  "agrees": brute == [m.entries for m in mats]}
    return res, oracle


def torus_lattice_count(args, data):
    res = {"radius": args.radius, "count": tr.lattice_points_in_disk(args.radius)}
    oracle = None
    if args.oracle:
        c = oracles.lattice_count_grid(args.radius)
        oracle = {"method": "grid scan", "count": c, "agrees": c == res["count"]}
    return res, oracle


def torus_kms(args, data):
    sys_ = _dilation(data)
    return {"system": sys_.to_json(), **tr.kms_beta(sys_).to_json()}, None


def torus_frame(args, data):
    sys_ = _dilation(data)
    return {"system": sys_.to_json(), **tr.frame_theta(sys_).to_json()}, None


def _groupoid(args, data) -> tuple[sf.SftSystem, gp.TruncatedGroupoid]:
    s = _sft(data)
    return s, gp.enumerate_groupoid(s, args.depth, _anchor(s, args.anchor))


def _kappa_oracle(t: gp.TruncatedGroupoid) -> dict:
    mismatches = sum(1 for e in t.elements if oracles.naive_kappa(e.x, e.n, e.y) != e.kappa)
    return {"method": "literal shift comparison", "checked": len(t.elements),
            "mismatches": mismatches, "agrees": mismatches == 0}


def groupoid_enumerate(args, data):
    s, t = _groupoid(args, data)
    res = t.to_json(with_elements=args.elements)
    res["admissible_word_counts"] = {str(n): s.count_words(n) for n in range(args.depth + 1)}
    return res, _kappa_oracle(t) if args.oracle else None


def groupoid_spectrum(args, data):
    _, t = _groupoid(args, data)
    spec = gp.d_spectrum(t)
    return {"depth": t.depth, "spectrum": [{"eigenvalue": v, "multiplicity": m} for v, m in spec]}, \
        (_kappa_oracle(t) if args.oracle else None)


def groupoid_commutator(args, data):
    s, t = _groupoid(args, data)
    rep = gp.commutator_bound_check(t)
    res = {"depth": t.depth, **rep.to_json(s),
           "positivity_holds": all((gp.psi(n, k) >= 0) == (k == 0) for n, k in t.buckets)}
    return res, _kappa_oracle(t) if args.oracle else None


def groupoid_dv(args, data):
    s = _sft(data)
    anchor = _anchor(s, args.anchor)
    v = sf.EventuallyPeriodicWord.parse(args.v, s) if args.v else anchor
    fib = gp.localized_fiber(s, anchor, v, args.window)
    res = fib.to_json(heat=_fractions(args.heat), zeta=_fractions(args.zeta))
    if not args.points:
        res.pop("points")
    return res, None


def groupoid_fock(args, data):
    s = _sft(data)
    return gp.fock_truncation(s, args.levels).to_json(), None


def ssg_nucleus(args, data):
    aut = _automaton(data)
    n = ss.nucleus(aut, args.bound)
    return n.to_json(), None


def ssg_regular(args, data):
    aut = _automaton(data)
    n = ss.nucleus(aut, args.bound)
    if isinstance(n, ss.Undetermined):
        raise DomainError("nucleus undetermined within the bound", "undetermined")
    return ss.is_regular(n).to_json(), None


def ssg_limit_space(args, data):
    aut = _automaton(data)
    tc = ss.limit_space(aut, args.level, bound=args.bound)
    res = tc.to_json()
    if not args.vertices:
        res.pop("vertices")
        res.pop("edges")
    return res, None


def ssg_act(args, data):
    aut = _automaton(data)
    g = aut.element(args.element)
    w = aut.parse_word(args.word)
    img, r = g.act_and_restrict(w)
    res = {"element": str(g), "word": aut.format_word(w), "image": aut.format_word(img), "restriction": str(r)}
    oracle = None
    if args.oracle and args.preset == "odometer":
        out = w
        steps = 0
        for s_, e in g.word:
            steps += e
        for _ in range(steps % (1 << len(w)) if w else 0):
            out, _ = oracles.odometer_carry(out)
        oracle = {"method": "binary carry", "image": aut.format_word(out), "agrees": tuple(out) == img}
    return res, oracle


def kms_report_cmd(args, data):
    s = _sft(data)
    return km.kms_report(s, args.iters, args.level).to_json(), None


def kms_weight(args, data):
    spec = args.window
    if spec is None:
        raise DomainError("--window is required", "bad_window")
    try:
        window = json.loads(spec)
    except json.JSONDecodeError:
        with open(spec, encoding="utf-8") as fh:
            window = json.load(fh)
    s = _sft(data)
    anchor = sf.EventuallyPeriodicWord.parse(window.get("anchor", s.alphabet[0]), s)
    middles = window.get("middles", [])
    if not isinstance(middles, list) or not middles:
        raise DomainError("window needs a non-empty 'middles' list", "bad_window")
    level = max(len(str(mid).rpartition(".")[2]) if isinstance(mid, str) else 1 for mid in middles)
    m = sf.kms_measure(s, max(level, 1), args.iters)
    w = km.ruelle_weight(s, anchor, m, middles)
    return {"anchor": anchor.format(s), "middles": middles, "weight": w.to_json()}, None


def _circle(args) -> sc.FourierTruncation:
    return sc.build(args.n, args.K)


def circle_build(args, data):
    return _circle(args).to_json(), None


def circle_comm_z(args, data):
    r = sc.commutator_dlog_z(_circle(args))
    oracle = None
    if args.oracle:
        f = {k: (math.log(2) if k == -1 else math.copysign(1, k) * math.log1p((2 * abs(k) + 1) / (k * k + 1))
                 if k else 0.0) for k in r.table}
        err = max(abs(f[k] - float(r.table[k].mid)) for k in r.table)
        oracle = {"method": "float log1p", "max_abs_error": err, "agrees": err < 1e-12}
    return r.to_json(), oracle


def circle_comm_v(args, data):
    r = sc.commutator_dlog_v(_circle(args))
    oracle = None
    if args.oracle:
        err = abs(math.log(abs(args.n)) - float(r.display_norm.mid))
        oracle = {"method": "float log", "abs_error": err, "agrees": err < 1e-12}
    return r.to_json(), oracle


def circle_pairing(args, data):
    return sc.dirac_pairing_check(_circle(args), args.winding).to_json(), None


# --------------------------------------------------------------------------
# parser


NEEDS_INPUT = {"sft", "torus", "groupoid", "ssg", "kms"}
NO_INPUT = {("torus", "conformal-enum"), ("torus", "lattice-count")}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="solenoidkit", description="Exact invariants of Wieler solenoids.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = p.add_subparsers(dest="group", metavar="GROUP", parser_class=_Parser)
    groups.required = True

    def common(sp):
        sp.add_argument("--preset", help="bundled input: full-N-shift, golden-mean, odometer, "
                                         "grigorchuk, conformal-2d, dilation-N")
        sp.add_argument("--input", help="JSON input file ('-' for stdin)")
        sp.add_argument("--matrix", help="inline JSON matrix")
        sp.add_argument("--oracle", action="store_true", help="also run the brute-force oracle")
        sp.add_argument("--json", action="store_true", help="JSON output (the default)")

    def add(group, name, fn: Callable, **opts):
        sp = group.add_parser(name)
        common(sp)
        for flag, kw in opts.items():
            names = kw.pop("flags", None) or ["--" + flag.replace("_", "-")]
            sp.add_argument(*names, dest=flag, **kw)
        sp.set_defaults(handler=fn)
        return sp

    sft_p = groups.add_parser("sft").add_subparsers(dest="cmd", metavar="CMD", parser_class=_Parser)
    sft_p.required = True
    add(sft_p, "ktheory", sft_ktheory)
    add(sft_p, "entropy", sft_entropy, iters=dict(type=int, default=40))
    add(sft_p, "kms", sft_kms, level=dict(type=int, default=2), iters=dict(type=int, default=60))
    add(sft_p, "class", sft_recurrence)

    tor = groups.add_parser("torus").add_subparsers(dest="cmd", metavar="CMD", parser_class=_Parser)
    tor.required = True
    add(tor, "analyze", torus_analyze)
    add(tor, "ktheory", torus_ktheory)
    add(tor, "bmatrices", torus_bmatrices)
    add(tor, "khomology", torus_khomology)
    add(tor, "conformal-enum", torus_conformal_enum, dim=dict(type=int, required=True),
        level=dict(type=int, required=True))
    add(tor, "lattice-count", torus_lattice_count, radius=dict(type=int, default=10))
    add(tor, "kms", torus_kms)
    add(tor, "frame", torus_frame)

    grp = groups.add_parser("groupoid").add_subparsers(dest="cmd", metavar="CMD", parser_class=_Parser)
    grp.required = True
    g_opts = dict(depth=dict(type=int, default=4), anchor=dict(default=None))
    add(grp, "enumerate", groupoid_enumerate, elements=dict(action="store_true"), **g_opts)
    add(grp, "spectrum", groupoid_spectrum, **g_opts)
    add(grp, "commutator-check", groupoid_commutator, **g_opts)
    add(grp, "dv", groupoid_dv, v=dict(default=None), window=dict(type=int, default=3),
        heat=dict(default="1"), zeta=dict(default=None), anchor=dict(default=None),
        points=dict(action="store_true"))
    add(grp, "fock", groupoid_fock, levels=dict(type=int, default=4))

    ssg = groups.add_parser("ssg").add_subparsers(dest="cmd", metavar="CMD", parser_class=_Parser)
    ssg.required = True
    add(ssg, "nucleus", ssg_nucleus, bound=dict(type=int, default=20))
    add(ssg, "regular", ssg_regular, bound=dict(type=int, default=20))
    add(ssg, "limit-space", ssg_limit_space, level=dict(type=int, default=3),
        bound=dict(type=int, default=20), vertices=dict(action="store_true"))
    add(ssg, "act", ssg_act, element=dict(required=True), word=dict(required=True))

    kp = groups.add_parser("kms").add_subparsers(dest="cmd", metavar="CMD", parser_class=_Parser)
    kp.required = True
    add(kp, "report", kms_report_cmd, iters=dict(type=int, default=60), level=dict(type=int, default=2))
    add(kp, "weight", kms_weight, window=dict(default=None), iters=dict(type=int, default=60))

    cp = groups.add_parser("circle").add_subparsers(dest="cmd", metavar="CMD", parser_class=_Parser)
    cp.required = True
    c_opts = dict(n=dict(type=int, default=2, flags=["-n"]), K=dict(type=int, default=64, flags=["-K"]))
    add(cp, "build", circle_build, **{k: dict(v) for k, v in c_opts.items()})
    add(cp, "comm-z", circle_comm_z, **{k: dict(v) for k, v in c_opts.items()})
    add(cp, "comm-v", circle_comm_v, **{k: dict(v) for k, v in c_opts.items()})
    add(cp, "pairing", circle_pairing, winding=dict(type=int, default=1),
        **{k: dict(v) for k, v in c_opts.items()})
    return p


def _parameters(args) -> dict:
    skip = {"handler", "group", "cmd", "input", "matrix", "json"}
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def _digest(data) -> str:
    blob = json.dumps(data, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Dispatch ``argv``; returns the exit status and the text printed."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return EXIT_USAGE, str(exc)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0), ""
    subcommand = f"{args.group} {args.cmd}"
    report = {
        "tool": "solenoidkit",
        "version": __version__,
        "subcommand": subcommand,
        "parameters": _parameters(args),
    }
    start = time.perf_counter()
    status = EXIT_OK
    try:
        data = None
        if args.group in NEEDS_INPUT and (args.group, args.cmd) not in NO_INPUT:
            try:
                data = _load_input(args)
            except json.JSONDecodeError as exc:
                raise DomainError(f"input is not valid JSON: {exc}", "bad_json") from None
            except OSError as exc:
                raise DomainError(f"cannot read input: {exc}", "bad_input") from None
        report["input_digest"] = _digest(data)
        results, oracle = args.handler(args, data)
        if oracle is not None:
            results["oracle"] = oracle
        report["results"] = results
    except DomainError as exc:
        status = EXIT_DOMAIN
        report["error"] = {"code": exc.code, "message": str(exc)}
    except StructuralFailure as exc:
        status = EXIT_INTERNAL
        report["error"] = {"code": "structural_failure", "message": str(exc)}
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    return status, json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv: list[str] | None = None) -> int:
    status, text = run(argv)
    stream = sys.stderr if status == EXIT_USAGE else sys.stdout
    stream.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
