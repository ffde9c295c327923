"""Command-line front end.

Subcommands: bound, per, maxdiag, check, search, sweep, replay.  Every
command except replay appends a run record (JSON line) to the record file.

Exit codes: 0 ok; 2 invalid arguments; 3 matrix parse failure; 4 matrix too
large; 5 diagonal check without sigma; 10 candidate violation; 11 certified
violation; 1 replay mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import bounds, records
from .diagonal import diagonal_product, max_diagonal_product
from .errors import (
    DimensionTooLarge,
    MatrixParseError,
    MissingSigma,
    RankPermError,
)
from .matrix import MAX_DENOMINATOR, TOL_RANK, TOL_STOCH, Permutation, rationalize
from .permanent import permanent_ryser
from .search import (
    CANDIDATE_VIOLATION,
    CERTIFIED_VIOLATION,
    SearchConfig,
    search_and_certify,
    sweep,
)
from .textio import read_matrix

EXIT_INVALID = 2
EXIT_PARSE = 3
EXIT_TOO_LARGE = 4
EXIT_MISSING_SIGMA = 5
EXIT_CANDIDATE = 10
EXIT_CERTIFIED = 11

VERDICT_EXIT = {CANDIDATE_VIOLATION: EXIT_CANDIDATE, CERTIFIED_VIOLATION: EXIT_CERTIFIED}

DEFAULT_RECORD = "rankperm_runs.jsonl"


@dataclass
class Result:
    lines: list[str] = field(default_factory=list)
    outputs: dict = field(default_factory=dict)
    exit_code: int = 0
    files: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x} = {float(x)!r}"
    return repr(x)


def _value_str(x) -> str:
    return str(x) if isinstance(x, Fraction) else repr(float(x))


def _load(path: str, res: Result):
    A = read_matrix(path)
    res.inputs[path] = records.digest_file(path)
    return A


def _sigma(text: str | None):
    if text is None:
        return None
    try:
        return Permutation.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- commands ----------------------------------------------------------------


def cmd_bound(cfg: dict) -> Result:
    res = Result()
    report = bounds.bound_stochastic(cfg["n"], cfg["k"], cfg["kind"])
    res.lines.append(f"stochastic bound: {_fmt(report.stochastic_bound)}")
    res.lines.append(f"n={report.n} k={report.k} r={report.r} s={report.s} "
                     f"composition={report.composition} kind={report.kind}")
    res.outputs["bound"] = report
    if cfg.get("scale"):
        A = _load(cfg["scale"], res)
        if A.n != cfg["n"]:
            raise ValueError(f"--scale matrix is {A.n}x{A.n}, expected n={cfg['n']}")
        nn = bounds.bound_nonnegative(A, cfg["k"], cfg["kind"])
        res.lines.append(f"scale: {_fmt(nn.scale)}")
        res.lines.append(f"nonnegative bound: {_fmt(nn.total)}")
        res.outputs["nonnegative"] = nn
    return res


def cmd_per(cfg: dict) -> Result:
    res = Result()
    A = _load(cfg["matrix"], res)
    if cfg.get("exact") and not A.is_exact:
        raise ValueError("--exact requires rational (p/q or integer) entries")
    value = permanent_ryser(A)
    res.lines.append(_value_str(value))
    res.outputs.update(value=value, mode=A.mode, n=A.n)
    return res


def cmd_maxdiag(cfg: dict) -> Result:
    res = Result()
    A = _load(cfg["matrix"], res)
    sigma = _sigma(cfg.get("sigma"))
    if sigma is not None:
        value = diagonal_product(A, sigma)
    else:
        value, sigma = max_diagonal_product(A)
    res.lines.append(f"{_value_str(value)} sigma={sigma.one_line()}")
    res.outputs.update(value=value, sigma=sigma, mode=A.mode, n=A.n)
    return res


def cmd_check(cfg: dict) -> Result:
    res = Result()
    A = _load(cfg["matrix"], res)
    if not A.is_exact:
        if not cfg.get("rationalize"):
            raise ValueError("check needs exact (rational) input; pass --rationalize for float files")
        A = rationalize(A, cfg.get("max_denominator", MAX_DENOMINATOR))
    kind = bounds.normalize_kind(cfg["kind"])
    sigma = _sigma(cfg.get("sigma"))
    if kind == bounds.DIAGONAL and sigma is None:
        raise MissingSigma("check --kind diag needs --sigma")
    chk = bounds.check_attainment(A, cfg["k"], kind, sigma)
    v = chk.verdict
    res.lines.append(f"case {v.case_number}: {v.case}" if v.holds else "none")
    for side, wit in v.witnesses.items():
        res.lines.append(f"{side} witnesses: " + " ".join(
            f"{name}={w.one_line()}" for name, w in wit.items()))
    res.lines.append(f"value: {_fmt(chk.value)}")
    res.lines.append(f"bound: {_fmt(chk.bound)}")
    res.lines.append(f"attained: {chk.attained}")
    if not chk.consistent:
        res.lines.append("MISMATCH: equality conditions and exact attainment disagree")
    res.outputs.update(verdict=v, value=chk.value, bound=chk.bound,
                       attained=chk.attained, consistent=chk.consistent)
    return res


def _search_config(cfg: dict, n: int, k: int, objective: str, seed: int) -> SearchConfig:
    return SearchConfig(n=n, k=k, objective=objective, restarts=cfg["restarts"],
                        iterations=cfg["iters"], step=cfg["step"], decay=cfg["decay"],
                        seed=seed, margin=cfg["margin"])


def cmd_search(cfg: dict) -> Result:
    res = Result()
    config = _search_config(cfg, cfg["n"], cfg["k"], cfg["objective"], cfg["seed"])
    outcome = search_and_certify(config, workers=cfg.get("workers", 1))
    rec = records.outcome_record(outcome, "search")
    res.lines.append(records.dumps(rec))
    res.outputs.update(record=rec, trace=outcome.trace, explanation=outcome.explanation,
                       best_matrix=outcome.best_matrix)
    if outcome.exact_matrix is not None:
        res.outputs["exact_matrix"] = outcome.exact_matrix
    res.exit_code = VERDICT_EXIT.get(outcome.verdict, 0)
    return res


def cmd_sweep(cfg: dict) -> Result:
    res = Result()
    template = _search_config(cfg, 1, 1, "permanent", cfg["seed"])
    objectives = [bounds.normalize_kind(o) for o in cfg["objectives"].split(",")]
    outcomes = sweep(cfg["nmax"], objectives, template, workers=cfg.get("workers", 1))
    lines = [records.dumps(records.outcome_record(o, "sweep")) for o in outcomes]
    if cfg.get("out"):
        res.files[cfg["out"]] = "".join(line + "\n" for line in lines)
        res.lines.append(f"wrote {len(lines)} records to {cfg['out']}")
    else:
        res.lines.extend(lines)
    res.outputs["records"] = [records.outcome_record(o, "sweep") for o in outcomes]
    res.exit_code = max((VERDICT_EXIT.get(o.verdict, 0) for o in outcomes), default=0)
    return res


COMMANDS = {
    "bound": cmd_bound,
    "per": cmd_per,
    "maxdiag": cmd_maxdiag,
    "check": cmd_check,
    "search": cmd_search,
    "sweep": cmd_sweep,
}


def run_command(cmd: str, cfg: dict) -> Result:
    try:
        return COMMANDS[cmd](cfg)
    except MatrixParseError as exc:
        return Result([f"error: {exc}"], {"error": str(exc)}, EXIT_PARSE)
    except DimensionTooLarge as exc:
        return Result([f"error: {exc}"], {"error": str(exc)}, EXIT_TOO_LARGE)
    except MissingSigma as exc:
        return Result([f"error: {exc}"], {"error": str(exc)}, EXIT_MISSING_SIGMA)
    except (RankPermError, ValueError, argparse.ArgumentTypeError) as exc:
        return Result([f"error: {exc}"], {"error": str(exc)}, EXIT_INVALID)


def cmd_replay(path: str, line: int | None) -> int:
    recs = records.read_records(path)
    if not recs:
        print(f"error: no records in {path}", file=sys.stderr)
        return EXIT_INVALID
    rec = recs[-1] if line is None else recs[line - 1]
    for fname, digest in rec.get("inputs_digest", {}).items():
        if not os.path.exists(fname) or records.digest_file(fname) != digest:
            print(f"error: input {fname} changed since the recorded run", file=sys.stderr)
            return 1
    res = run_command(rec["cmd"], rec["config"])
    again = records.dumps({"outputs": res.outputs, "exit_code": res.exit_code})
    recorded = records.dumps({"outputs": rec["outputs"], "exit_code": rec.get("exit_code", 0)})
    if again != recorded:
        print("replay MISMATCH")
        return 1
    print("replay OK")
    return 0


# -- argument parsing ---------------------------------------------------------


def _add_search_args(p: argparse.ArgumentParser, restarts: int, iters: int):
    p.add_argument("--restarts", type=int, default=restarts)
    p.add_argument("--iters", type=int, default=iters)
    p.add_argument("--step", type=float, default=1.0, help="initial bump size")
    p.add_argument("--decay", type=float, default=0.997, help="multiplicative step decay")
    p.add_argument("--margin", type=float, default=1e-7, help="violation margin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1, help="parallel restarts (does not change results)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankperm", description=__doc__.split("\n\n")[0])
    parser.add_argument("--record", default=os.environ.get("RANKPERM_RECORD", DEFAULT_RECORD),
                        help="run-record file (JSON lines, appended)")
    parser.add_argument("--no-record", action="store_true", help="do not write a run record")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("bound", help="conjectured bound for given n, k")
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p.add_argument("--kind", choices=["per", "diag"], default="per")
    p.add_argument("--scale", metavar="MATRIX", help="matrix file for the nonnegative bound")

    p = sub.add_parser("per", help="permanent of a matrix file")
    p.add_argument("matrix")
    p.add_argument("--exact", action="store_true", help="require exact rational input")

    p = sub.add_parser("maxdiag", help="maximum (or given) diagonal product")
    p.add_argument("matrix")
    p.add_argument("--sigma", help="one-line 1-based permutation, e.g. 2,1,3")

    p = sub.add_parser("check", help="decide the equality case for a matrix")
    p.add_argument("matrix")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=["per", "diag"], default="per")
    p.add_argument("--sigma")
    p.add_argument("--rationalize", action="store_true")
    p.add_argument("--max-denominator", type=int, default=MAX_DENOMINATOR)

    p = sub.add_parser("search", help="hill-climb one (n, k) cell")
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p.add_argument("--objective", choices=["per", "maxdiag"], default="per")
    _add_search_args(p, restarts=50, iters=2000)

    p = sub.add_parser("sweep", help="search every cell k <= n <= nmax")
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--objectives", default="per,maxdiag")
    p.add_argument("--out", help="output file for the record stream (default stdout)")
    _add_search_args(p, restarts=50, iters=2000)

    p = sub.add_parser("replay", help="re-run a recorded invocation and compare outputs")
    p.add_argument("record_file")
    p.add_argument("--line", type=int, help="1-based record line (default: last)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "replay":
        return cmd_replay(args.record_file, args.line)
    cfg = {k: v for k, v in vars(args).items() if k not in ("cmd", "record", "no_record")}
    cfg.update(tol_stoch=TOL_STOCH, tol_rank=TOL_RANK)
    cfg.setdefault("max_denominator", MAX_DENOMINATOR)
    res = run_command(args.cmd, cfg)
    for path, content in res.files.items():
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(content)
    stream = sys.stderr if res.exit_code in (EXIT_INVALID, EXIT_PARSE, EXIT_TOO_LARGE,
                                             EXIT_MISSING_SIGMA) else sys.stdout
    for line in res.lines:
        print(line, file=stream)
    if not args.no_record:
        rec = records.run_record(args.cmd, cfg, res.outputs, res.inputs)
        rec["exit_code"] = res.exit_code
        records.append_record(args.record, rec)
    return res.exit_code
