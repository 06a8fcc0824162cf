"""Command line front end.

    neuroterm analyze FILE [options]
    neuroterm bench DIR [--seeds 0,1,2,3,4] [options]

Option values resolve as: command line flag, then NEUROTERM_SOLVER (solver
only), then neuroterm.cfg in the working directory, then built-in defaults.
Exit codes: 0 proved terminating, 2 unknown, 3 input file error, 4 parse
error, 5 solver unavailable.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from fractions import Fraction
from pathlib import Path

from .cfg import build_cfg, dump_cfg
from .learner import format_candidate
from .pipeline import PipelineConfig, analyze_text, bench
from .syntax import ParseError
from .tracer import dump_traces
from .verifier import SolverNotFoundError

_INT_KEYS = {"samples", "hidden", "seed", "max_trace_len", "retries", "round_digits", "workers", "max_iters", "patience"}
_FLOAT_KEYS = {"lr", "timeout"}
_STR_KEYS = {"strategy", "solver", "out_dir"}
_FRACTION_KEYS = {"delta"}


def load_config_file(path: Path) -> dict[str, str]:
    """`key = value` lines; # starts a comment; unknown keys rejected."""
    if not path.exists():
        return {}
    out: dict[str, str] = {}
    known = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _FRACTION_KEYS
    for i, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{i}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ValueError(f"{path}:{i}: unknown key {key!r}")
        out[key] = value
    return out


def _convert(key: str, value: str):
    if key in _INT_KEYS:
        return int(value)
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _FRACTION_KEYS:
        return Fraction(value)
    return value


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=None, help="inputs sampled per attempt")
    p.add_argument("--strategy", choices=["uniform", "gaussian", "pas"], default=None)
    p.add_argument("--hidden", type=int, default=None, help="hidden units per output")
    p.add_argument("--delta", type=Fraction, default=None, help="required decrease per iteration")
    p.add_argument("--lr", type=float, default=None, help="Adam step size")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-trace-len", type=int, default=None, help="snapshot budget per trace")
    p.add_argument("--solver", type=str, default=None, help="solver command reading smt2 on stdin")
    p.add_argument("--timeout", type=float, default=None, help="seconds per solver query")
    p.add_argument("--round-digits", type=int, default=None, help="max binary digits kept when rounding")
    p.add_argument("--retries", type=int, default=None, help="training attempts before giving up")
    p.add_argument("--workers", type=int, default=None, help="parallel solver processes")
    p.add_argument("--out-dir", type=str, default=None, help="where smt2 scripts and bench csv go")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="neuroterm", description="neural termination analysis for integer programs")
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="analyze one program")
    pa.add_argument("file")
    _add_common(pa)
    pa.add_argument("--dump-traces", metavar="PATH", default=None, help="write sampled traces as csv")
    pa.add_argument("--dump-model", metavar="PATH", default=None, help="write the verified certificate")
    pa.add_argument("--dump-cfg", action="store_true", help="print the control flow graph and stop")

    pb = sub.add_parser("bench", help="analyze every .nt file in a directory across seeds")
    pb.add_argument("dir")
    pb.add_argument("--seeds", default=None, help="comma separated list, default 0,1,2,3,4")
    _add_common(pb)
    return ap


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    try:
        file_conf = load_config_file(Path("neuroterm.cfg"))
    except ValueError as e:
        raise SystemExit(f"error: {e}")
    cfg = PipelineConfig()
    for key in _INT_KEYS | _FLOAT_KEYS | _FRACTION_KEYS | {"strategy", "out_dir"}:
        flag = getattr(args, key, None)
        if flag is not None:
            setattr(cfg, key, flag)
        elif key in file_conf:
            setattr(cfg, key, _convert(key, file_conf[key]))
    solver_text = args.solver or os.environ.get("NEUROTERM_SOLVER") or file_conf.get("solver")
    if solver_text:
        cfg.solver = shlex.split(solver_text)
    if cfg.out_dir is None:
        cfg.out_dir = "out"
    return cfg


def _print_report(rep) -> None:
    print(f"program {rep.name}: {rep.verdict}")
    print(f"  reason: {rep.reason}")
    if rep.n_headers:
        print(f"  loops: {rep.n_headers} (depth {rep.m})  paths: {rep.n_paths}  pairs: {rep.n_pairs}")
    print(f"  attempts: {rep.attempts_used}  candidates tried: {rep.candidates_tried}")
    if rep.certificate is not None and rep.certificate.m > 0:
        print(f"  certificate: k={rep.k_used} delta_v={rep.certificate.delta_v}")
    if rep.outcome is not None:
        statuses = ", ".join(f"{q.name}:{q.status}" for q in rep.outcome.queries)
        print(f"  queries: {statuses}")
    print(f"  elapsed: {rep.elapsed:.2f}s")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = _resolve_config(args)

    if args.command == "analyze":
        try:
            text = Path(args.file).read_text()
        except OSError as e:
            print(f"error: cannot read {args.file}: {e}", file=sys.stderr)
            return 3
        try:
            prog_name = Path(args.file).stem
            if args.dump_cfg:
                from .syntax import parse_program

                graph = build_cfg(parse_program(text))
                print(dump_cfg(graph))
                return 0
            rep = analyze_text(text, cfg, name=prog_name)
        except ParseError as e:
            print(f"parse error: {args.file}:{e}", file=sys.stderr)
            return 4
        except (SolverNotFoundError, FileNotFoundError) as e:
            print(f"error: solver unavailable: {e}", file=sys.stderr)
            return 5
        _print_report(rep)
        if args.dump_traces:
            Path(args.dump_traces).write_text(dump_traces(rep.traces, rep.program))
        if args.dump_model and rep.certificate is not None:
            Path(args.dump_model).write_text(format_candidate(rep.certificate))
        return 0 if rep.verdict == "TERMINATING" else 2

    if args.command == "bench":
        d = Path(args.dir)
        if not d.is_dir():
            print(f"error: not a directory: {d}", file=sys.stderr)
            return 3
        seeds = None
        if args.seeds:
            seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
        try:
            out_csv = Path(cfg.out_dir) / "bench.csv" if cfg.out_dir else None
            summary = bench(d, cfg, seeds=seeds, out_csv=out_csv)
        except ParseError as e:
            print(f"parse error: {e}", file=sys.stderr)
            return 4
        except (SolverNotFoundError, FileNotFoundError) as e:
            print(f"error: solver unavailable: {e}", file=sys.stderr)
            return 5
        print(summary.table())
        if out_csv:
            print(f"csv written to {out_csv}")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
