"""Command-line front end.

Exit codes are a stable contract for scripting:

  0  success: matrix verified, nonexistence certificate found, search done
  1  refuted or invalid input (bad file, failing matrix, bad parameters)
  2  inconclusive (no certificate, LP optimum reaches n)
  3  resource bounds exceeded (enumeration cap, search budget, node limit)

File formats (all plain text, LF, single spaces):

  matrix       "BH n q" header, then n rows of n exponents in 0..q-1
  pair list    "p k g q | a: a_0 ... a_{k-1} | b: b_0 ... b_{k-1}" per line
  certificate  "CERT" block: n, q, classes, one line per class, z0, value, ...
  lp witness   "LP" block: classes, one line per z-class with its dual, max
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import __version__
from ._io import atomic_write
from .circulant import (
    ComplementaryPair,
    NotComplementaryError,
    SearchBudgetExceeded,
    assemble_2circulant,
    build_cosets,
    format_pair,
    search_complementary,
)
from .matrices import MatrixFormatError, fixtures, read_matrix, verify_bh, write_matrix
from .orbits import DEFAULT_CAP, BoundsExceeded, enumerate_ort_classes, enumerate_z_classes, ort_size

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_BOUNDS = 3


def _say(msg: str) -> None:
    print(msg, flush=True)


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# ---------------------------------------------------------------- commands


def cmd_verify(args) -> int:
    try:
        M = read_matrix(args.path)
    except (OSError, MatrixFormatError) as exc:
        _say(f"error: {exc}")
        return EXIT_REFUTED
    rep = verify_bh(M, exhaustive=args.exhaustive)
    _say(f"n {M.n} q {M.q} pairs_checked {rep.checked_pairs}")
    if rep.is_bh:
        _say(f"BH({M.n},{M.q}) verified")
        return EXIT_OK
    i, j = rep.failing_pair
    _say(f"not BH: rows {i} and {j} (0-based) are not orthogonal")
    for a, b in rep.failures[1:]:
        _say(f"also rows {a} and {b}")
    return EXIT_REFUTED


def cmd_classes(args) -> int:
    classes = enumerate_ort_classes(args.n, args.q, args.cap)
    _say(f"ORT classes for n={args.n} q={args.q}: {len(classes)}, |ORT| = {ort_size(classes)}")
    for i, cl in enumerate(classes):
        prof = " ".join(map(str, cl.rep.counts))
        _say(f"class {i} perm_orbit {cl.perm_orbit_size} orbit {cl.psg_orbit_size} profile {prof}")
    if args.z:
        zcs = enumerate_z_classes(args.n, args.q, args.cap)
        _say(f"z-classes: {len(zcs)}")
        for zc in zcs:
            _say(f"z {' '.join(map(str, zc.rep))} size {zc.class_size}")
    return EXIT_OK


def cmd_cert(args) -> int:
    from .spectrum import find_certificate, format_certificate, parse_certificate, recheck_certificate

    if args.check:
        try:
            rec = parse_certificate(Path(args.check).read_text())
        except (OSError, ValueError, KeyError) as exc:
            _say(f"error: {exc}")
            return EXIT_REFUTED
        ok = recheck_certificate(rec)
        _say(f"certificate {'valid' if ok else 'INVALID'}: conclusion {rec.conclusion}")
        if not ok:
            return EXIT_REFUTED
        return EXIT_OK if rec.conclusion == "nonexistent" else EXIT_INCONCLUSIVE
    if args.n is None or args.q is None:
        _say("error: cert needs n and q (or --check FILE)")
        return EXIT_REFUTED
    try:
        cert = find_certificate(args.n, args.q, args.z0, cap=args.cap)
    except ValueError as exc:
        _say(f"error: {exc}")
        return EXIT_REFUTED
    text = format_certificate(cert)
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK if cert.nonexistent else EXIT_INCONCLUSIVE


def cmd_lp(args) -> int:
    from .lp_certificates import build_lp, format_outcome, solve_exact, verify_outcome

    lp = build_lp(args.n, args.q, impose_total=args.impose_total, cap=args.cap)
    _progress(f"lp: {lp.num_vars} variables, {len(lp.rows)} z-class constraints")
    out = solve_exact(lp)
    if not verify_outcome(lp, out):
        _say("error: solver outcome failed the exact re-check")
        return EXIT_REFUTED
    text = format_outcome(lp, out)
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    return EXIT_OK if out.nonexistent else EXIT_INCONCLUSIVE


def cmd_circ_search(args) -> int:
    try:
        cs = build_cosets(args.p, args.k, args.g)
    except ValueError as exc:
        _say(f"error: {exc}")
        return EXIT_REFUTED
    pairs = search_complementary(args.p, args.k, args.g, args.q, budget=args.budget)
    text = "".join(format_pair(pr, cs, args.q) + "\n" for pr in pairs)
    if args.out:
        atomic_write(args.out, text)
    sys.stdout.write(text)
    _progress(f"circ-search: {len(pairs)} pairs")
    return EXIT_OK


def cmd_circ_build(args) -> int:
    if len(args.a) != args.k or len(args.b) != args.k:
        _say(f"error: a and b need {args.k} entries each")
        return EXIT_REFUTED
    try:
        cs = build_cosets(args.p, args.k, args.g)
        M = assemble_2circulant(ComplementaryPair(tuple(args.a), tuple(args.b), "cli"), cs, args.q)
    except NotComplementaryError as exc:
        _say(f"error: not complementary: {exc}")
        return EXIT_REFUTED
    except ValueError as exc:
        _say(f"error: {exc}")
        return EXIT_REFUTED
    if args.out:
        write_matrix(M, args.out)
    _say(f"BH({M.n},{M.q}) verified")
    return EXIT_OK


def _parse_config(path: str):
    from .guided_search import SearchConfig

    kw: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, val = line.partition(" ")
        val = val.strip()
        if key in ("enforce_distinct_y", "enforce_half_split", "fixed_h10"):
            if val not in ("true", "false"):
                raise ValueError(f"line {lineno}: {key} must be true or false")
            kw[key] = val == "true"
        elif key == "y_order":
            kw[key] = tuple(int(t) for t in val.split())
        elif key == "magnitude2_rows":
            # "3:1 4:6"
            kw[key] = tuple(tuple(int(x) for x in t.split(":")) for t in val.split())
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    cfg = SearchConfig(**kw)
    cfg.validate()
    return cfg


def _search_worker(job):
    from .guided_search import staged_search

    config, depth, shard, max_nodes, collect = job
    return staged_search(config, depth, shard=shard, max_nodes=max_nodes, collect=collect)


def cmd_search18(args) -> int:
    from .guided_search import SearchConfig, StageCounts, staged_search

    try:
        config = _parse_config(args.config) if args.config else SearchConfig()
        idx, mod = (int(t) for t in args.shard.split("/"))
        if mod < 1 or not 0 <= idx < mod:
            raise ValueError("shard must be i/m with 0 <= i < m")
    except (OSError, ValueError) as exc:
        _say(f"error: {exc}")
        return EXIT_REFUTED
    collect = args.out is not None
    if args.threads <= 1:
        res = staged_search(config, args.depth, shard=(idx, mod), max_nodes=args.max_nodes,
                            collect=collect, progress=_progress)
        counts, mats = res.counts, res.matrices
    else:
        # worker w takes the h3 indices congruent to idx + mod*w modulo mod*threads
        T = args.threads
        jobs = [(config, args.depth, (idx + mod * w, mod * T), args.max_nodes, collect) for w in range(T)]
        with ProcessPoolExecutor(max_workers=T) as ex:
            parts = list(ex.map(_search_worker, jobs))
        counts = StageCounts()
        mats = []
        for part in parts:
            for name in ("triplets", "quadruples", "after_y0", "after_y2", "after_y3",
                         "after_y4", "after_y5", "completions"):
                setattr(counts, name, getattr(counts, name) + getattr(part.counts, name))
            counts.truncated |= part.counts.truncated
            mats.extend(part.matrices)
        mats.sort(key=lambda M: M.entries)
    report = f"depth {args.depth}\nshard {idx}/{mod}\n{counts}\n"
    sys.stdout.write(report)
    if args.out:
        out = Path(args.out)
        atomic_write(out / "counts.txt", report)
        for i, M in enumerate(mats):
            write_matrix(M, out / f"bh18_14_{i:05d}.txt")
    return EXIT_BOUNDS if counts.truncated else EXIT_OK


def cmd_fixtures(args) -> int:
    status = EXIT_OK
    for name, M in fixtures().items():
        rep = verify_bh(M)
        _say(f"{name} n {M.n} q {M.q} {'ok' if rep.is_bh else 'FAIL'}")
        if not rep.is_bh:
            status = EXIT_REFUTED
        if args.out:
            safe = name.replace("(", "_").replace(")", "").replace(",", "_")
            write_matrix(M, Path(args.out) / f"{safe}.txt")
    return status


# ---------------------------------------------------------------- parser


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input (1), not "inconclusive" (argparse's 2)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_REFUTED, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="butson",
        description="Exact tools for Butson Hadamard matrices.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check that a matrix file is a BH(n, q)")
    p.add_argument("path")
    p.add_argument("--exhaustive", action="store_true", help="report every failing pair")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classes", help="list ORT classes (and optionally z-classes)")
    p.add_argument("n", type=_positive)
    p.add_argument("q", type=_positive)
    p.add_argument("--z", action="store_true", help="also list z-class representatives")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("cert", help="search a single-z nonexistence certificate")
    p.add_argument("n", type=_positive, nargs="?")
    p.add_argument("q", type=_positive, nargs="?")
    p.add_argument("--z0", type=int, nargs="+", help="use this z0 instead of scanning")
    p.add_argument("--out", help="write the witness file here")
    p.add_argument("--check", metavar="FILE", help="re-check an existing witness file")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_cert)

    p = sub.add_parser("lp", help="exact LP over the class values")
    p.add_argument("n", type=_positive)
    p.add_argument("q", type=_positive)
    p.add_argument("--impose-total", action="store_true",
                   help="add the equality 1 + sum |Orb_i| c_i = n")
    p.add_argument("--out")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP)
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("circ-search", help="scan for complementary simple-vector pairs")
    for name in ("p", "k", "g", "q"):
        p.add_argument(name, type=_positive)
    p.add_argument("--budget", type=_positive, default=10**7, help="largest q^k to scan")
    p.add_argument("--out")
    p.set_defaults(func=cmd_circ_search)

    p = sub.add_parser("circ-build", help="assemble and verify a 2-circulant BH(2p, q)")
    for name in ("p", "k", "g", "q"):
        p.add_argument(name, type=_positive)
    p.add_argument("--a", type=int, nargs="+", required=True)
    p.add_argument("--b", type=int, nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_circ_build)

    p = sub.add_parser("search18", help="staged search for BH(18, 14)")
    p.add_argument("--depth", type=int, choices=range(3, 11), default=3,
                   help="rows to place (3..9), or 10 to adjoin h10 and complete")
    p.add_argument("--shard", default="0/1", help="i/m: keep h3 candidates with index i mod m")
    p.add_argument("--max-nodes", type=_positive, help="stop after this many partial cases")
    p.add_argument("--config", help="plain-text file of assumption toggles")
    p.add_argument("--threads", type=_positive, default=1)
    p.add_argument("--out", help="directory for counts.txt and completed matrices")
    p.set_defaults(func=cmd_search18)

    p = sub.add_parser("fixtures", help="verify (and optionally write) the built-in matrices")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixtures)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # --help/--version exit 0, usage errors exit 1
        return exc.code if isinstance(exc.code, int) else EXIT_REFUTED
    try:
        return args.func(args)
    except (BoundsExceeded, SearchBudgetExceeded) as exc:
        _say(f"bounds exceeded: {exc}")
        return EXIT_BOUNDS


if __name__ == "__main__":
    sys.exit(main())
