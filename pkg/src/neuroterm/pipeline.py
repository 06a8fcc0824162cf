"""End-to-end analysis: parse, trace, fit, round, verify.

A program is declared TERMINATING only when the solver returns unsat for
every iteration-path query of some rounded candidate; anything else is
UNKNOWN.  Retries resample and reinitialise; rounding is swept over
0..round_digits binary digits per trained network, trying the bias-free
simplification of each rounding first.  A rejected candidate
redirects later attempts: solver models are genuine transitions the traces
missed, so they join the training set, and the sampler switches from entry
inputs to the iteration paths' own guard-feasible regions.
"""

from __future__ import annotations

import csv
import shutil
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cfg import build_cfg, find_loop_headers, header_segments
from .learner import (
    RankingCandidate,
    SorNetwork,
    TrainConfig,
    TrainingReport,
    round_parameters,
    train,
)
from .syntax import Program, parse_program
from .tracer import ObservationPair, SamplerConfig, Trace, build_pairs, run_traces, sample_inputs
from .verifier import (
    Havoc,
    VerificationOutcome,
    check_candidate,
    iteration_paths,
    replay_model,
    run_path,
)

_REPO_ROOT = Path(__file__).resolve().parents[2]


def discover_solver() -> list[str] | None:
    """Default solver: a z3 binary on PATH, else the bundled node shim."""
    z3 = shutil.which("z3")
    if z3:
        return [z3, "-in"]
    node = shutil.which("node")
    if node:
        for base in (Path.cwd(), _REPO_ROOT):
            shim = base / "scripts" / "z3_stdin.js"
            if shim.exists():
                return [node, str(shim)]
    return None


@dataclass
class PipelineConfig:
    samples: int = 1000
    strategy: str = "pas"
    hidden: int = 5
    delta: Fraction = Fraction(1)
    lr: float = 0.05
    seed: int = 0
    max_trace_len: int = 1000
    max_iters: int = 20000
    retries: int = 3
    round_digits: int = 3
    segment_cap: int = 4096
    timeout: float = 60.0
    workers: int = 4
    solver: list[str] | None = None
    out_dir: str | None = None
    patience: int = 2000


@dataclass
class AnalysisReport:
    name: str
    verdict: str  # TERMINATING | UNKNOWN
    reason: str = ""
    certificate: RankingCandidate | None = None
    k_used: int | None = None
    attempts_used: int = 0
    candidates_tried: int = 0
    training: TrainingReport | None = None
    outcome: VerificationOutcome | None = None
    elapsed: float = 0.0
    n_headers: int = 0
    n_paths: int = 0
    n_pairs: int = 0
    m: int = 0
    traces: list[Trace] = field(default_factory=list)
    program: Program | None = None


def _solver_cmd(cfg: PipelineConfig) -> list[str]:
    if cfg.solver:
        return cfg.solver
    found = discover_solver()
    if found is None:
        raise FileNotFoundError("no solver found: install z3 or the node shim")
    return found


def _scale_key(cand: RankingCandidate):
    """Candidates that differ by a positive scalar prove the same thing."""
    flat = [Fraction(w) for row in cand.weights for w in row] + [Fraction(b) for b in cand.biases]
    return tuple(f / cand.delta_v for f in flat)


def _candidate_sweep(net: SorNetwork, round_digits: int, delta: Fraction) -> list[RankingCandidate]:
    """Rounded candidates in the order they get checked.

    Biases stop receiving gradient once the hinge is slack, so their trained
    values are optimizer drift, not signal.  At each precision the bias-free
    simplification goes first; the verifier rejects it when the offsets were
    load-bearing and the full rounding is tried next.
    """
    out: list[RankingCandidate] = []
    for k in range(round_digits + 1):
        full = round_parameters(net, k, delta)
        out.append(replace(full, biases=tuple(0 for _ in full.biases)))
        out.append(full)
    return out


def _counterexample_pairs(rng, variables, li, paths, outcome, seen, per_cex=24, spread=4):
    """Turn solver models into extra training pairs for the next attempt.

    Each sat query names a concrete transition of the program that the
    candidate fails to rank.  Those states are usually unreachable from the
    sampled entry points, so traces alone can never exhibit them; feeding
    them (plus a small cloud of nearby states pushed through the same path)
    back into training steers the next fit toward nets that rank the whole
    transition relation, not just the sampled slice of it.
    """
    by_id = {f"vc_{p.path_id}": p for p in paths}
    out: list[ObservationPair] = []
    for qr in outcome.queries:
        if qr.status != "sat" or qr.model is None:
            continue
        path = by_id.get(qr.name)
        if path is None:
            continue
        lex = li.lex_index[path.header]
        pre, post, ok, havocs = replay_model(variables, path, qr.model)
        key = (qr.name, tuple(pre[v] for v in variables))
        if key in seen:
            continue
        seen.add(key)
        if ok:
            out.append(ObservationPair(tuple(pre[v] for v in variables), tuple(post[v] for v in variables), lex))
        made = 0
        tries = 0
        while made < per_cex and tries < per_cex * 8:
            tries += 1
            state = {v: pre[v] + int(rng.integers(-spread, spread + 1)) for v in variables}
            hv = [h + int(rng.integers(-spread, spread + 1)) for h in havocs]
            nxt = run_path(variables, path, state, hv)
            if nxt is None:
                continue
            out.append(ObservationPair(tuple(state[v] for v in variables), tuple(nxt[v] for v in variables), lex))
            made += 1
    return out


def _path_transition_pairs(rng, variables, li, paths, per_path=500, box=64):
    """Sample each iteration path's transition relation directly.

    Pre-states (and havoc fills) are drawn uniformly from a box and pushed
    through the path; states failing an assume are rejected.  Unlike trace
    pairs these cover the whole guard-feasible region the checks quantify
    over, including states no entry point reaches, and they contain no
    cross-iteration resets, so group g trains only against the very
    transitions its component must rank.
    """
    out: list[ObservationPair] = []
    for path in paths:
        lex = li.lex_index[path.header]
        n_havoc = sum(len(a.vars) for a in path.actions if isinstance(a, Havoc))
        made = 0
        tries = 0
        while made < per_path and tries < per_path * 10:
            tries += 1
            state = {v: int(rng.integers(-box, box + 1)) for v in variables}
            hv = [int(rng.integers(-box, box + 1)) for _ in range(n_havoc)]
            nxt = run_path(variables, path, state, hv)
            if nxt is None:
                continue
            out.append(ObservationPair(tuple(state[v] for v in variables), tuple(nxt[v] for v in variables), lex))
            made += 1
    return out


def analyze_program(prog: Program, cfg: PipelineConfig) -> AnalysisReport:
    t0 = time.monotonic()
    graph = build_cfg(prog)
    li = find_loop_headers(graph)
    report = AnalysisReport(name=prog.name, verdict="UNKNOWN", m=li.m, n_headers=len(li.headers))

    if not li.headers:
        report.verdict = "TERMINATING"
        report.reason = "loop-free"
        report.certificate = RankingCandidate(
            n=len(prog.variables), m=0, h=cfg.hidden, k=0, delta_v=Fraction(cfg.delta), weights=(), biases=()
        )
        report.elapsed = time.monotonic() - t0
        return report

    segments = header_segments(graph, li, cap=cfg.segment_cap)
    paths = iteration_paths(graph, li, segments, cap=cfg.segment_cap)
    report.n_paths = len(paths)
    solver_cmd = _solver_cmd(cfg)
    variables = list(prog.variables)
    n = len(variables)

    tried: set = set()
    extra_pairs: list[ObservationPair] = []
    cex_seen: set = set()
    use_transitions = False
    consecutive_failed = 0
    for attempt in range(cfg.retries):
        ss = np.random.SeedSequence([cfg.seed, attempt])
        ss_sample, ss_init = ss.spawn(2)
        sampler = SamplerConfig(
            strategy=cfg.strategy,
            count=cfg.samples,
            seed=int(ss_sample.generate_state(1)[0]),
        )
        inputs = sample_inputs(sampler, len(prog.params))
        traces = run_traces(prog, li, inputs, max_len=cfg.max_trace_len)
        if use_transitions:
            # A rejected candidate means trace reachability and the checked
            # region disagree; retrain on the checked region itself.
            trans_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, attempt, 23]))
            per_path = max(200, cfg.samples // max(1, len(paths)))
            pairs = _path_transition_pairs(trans_rng, variables, li, paths, per_path=per_path) + extra_pairs
        else:
            pairs = build_pairs(traces, li) + extra_pairs
        report.traces = traces
        report.n_pairs = len(pairs)
        report.attempts_used = attempt + 1

        if not pairs:
            # Nothing observed: only the zero candidate makes sense, and it
            # can still go through when the loop body is unreachable.
            zero = SorNetwork(n, li.m, cfg.hidden, np.zeros((li.m * cfg.hidden, n)), np.zeros(li.m * cfg.hidden))
            cands = [round_parameters(zero, 0, cfg.delta)]
            report.training = None
        else:
            net = SorNetwork.initial(n, li.m, cfg.hidden, np.random.default_rng(ss_init), init_scale=0.1)
            tc = TrainConfig(
                delta=float(cfg.delta),
                lr=cfg.lr,
                max_iters=cfg.max_iters,
                patience=cfg.patience,
            )
            rep = train(net, pairs, tc)
            report.training = rep
            if not rep.converged:
                consecutive_failed += 1
            else:
                consecutive_failed = 0
            cands = _candidate_sweep(net, cfg.round_digits, cfg.delta)

        cex_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, attempt, 1709]))
        for cand in cands:
            key = _scale_key(cand)
            if key in tried:
                continue
            tried.add(key)
            report.candidates_tried += 1
            outcome = check_candidate(
                variables,
                paths,
                cand,
                solver_cmd,
                timeout=cfg.timeout,
                workers=cfg.workers,
                out_dir=cfg.out_dir,
            )
            report.outcome = outcome
            if outcome.verdict == "valid":
                report.verdict = "TERMINATING"
                report.reason = "certificate-verified"
                report.certificate = cand
                report.k_used = cand.k
                report.elapsed = time.monotonic() - t0
                return report
            got = _counterexample_pairs(cex_rng, variables, li, paths, outcome, cex_seen)
            if got:
                use_transitions = True
                extra_pairs.extend(got)
        if len(extra_pairs) > 1500:
            extra_pairs = extra_pairs[-1500:]

        if not pairs:
            report.reason = "no-observations"
            break
        if consecutive_failed >= 2:
            report.reason = "training-not-converging"
            break

    if not report.reason:
        report.reason = "no-verified-candidate"
    report.elapsed = time.monotonic() - t0
    return report


def analyze_text(text: str, cfg: PipelineConfig, name: str | None = None) -> AnalysisReport:
    prog = parse_program(text)
    rep = analyze_program(prog, cfg)
    rep.program = prog
    if name:
        rep.name = name
    return rep


def analyze_file(path: str | Path, cfg: PipelineConfig) -> AnalysisReport:
    p = Path(path)
    rep = analyze_text(p.read_text(), cfg, name=p.stem)
    return rep


# ---------------------------------------------------------------------------
# Benchmark harness


@dataclass
class BenchRow:
    program: str
    seed: int
    verdict: str
    attempts: int
    k: int | None
    elapsed: float


@dataclass
class BenchSummary:
    rows: list[BenchRow]
    programs: list[str]
    seeds: list[int]
    per_seed_solved: dict[int, int]
    avg_rate: float
    elapsed: float

    def solved(self, program: str, seed: int) -> bool:
        for r in self.rows:
            if r.program == program and r.seed == seed:
                return r.verdict == "TERMINATING"
        return False

    def table(self) -> str:
        width = max((len(p) for p in self.programs), default=7) + 2
        head = "program".ljust(width) + " ".join(f"s{s}" for s in self.seeds)
        lines = [head, "-" * len(head)]
        for p in self.programs:
            marks = " ".join(("T" if self.solved(p, s) else "U").ljust(len(f"s{s}")) for s in self.seeds)
            lines.append(p.ljust(width) + marks)
        lines.append("-" * len(head))
        counts = " ".join(str(self.per_seed_solved[s]).ljust(len(f"s{s}")) for s in self.seeds)
        lines.append("solved".ljust(width) + counts)
        lines.append(f"average solve rate: {self.avg_rate:.1%}")
        return "\n".join(lines)


def bench(
    directory: str | Path,
    cfg: PipelineConfig,
    seeds: list[int] | None = None,
    out_csv: str | Path | None = None,
) -> BenchSummary:
    seeds = list(seeds) if seeds is not None else [0, 1, 2, 3, 4]
    files = sorted(Path(directory).glob("*.nt"))
    t0 = time.monotonic()
    rows: list[BenchRow] = []
    for f in files:
        for seed in seeds:
            run_cfg = PipelineConfig(**{**cfg.__dict__, "seed": seed})
            rep = analyze_file(f, run_cfg)
            rows.append(BenchRow(f.stem, seed, rep.verdict, rep.attempts_used, rep.k_used, rep.elapsed))
    programs = [f.stem for f in files]
    per_seed = {
        s: sum(1 for r in rows if r.seed == s and r.verdict == "TERMINATING") for s in seeds
    }
    total = len(programs) * len(seeds)
    avg = sum(per_seed.values()) / total if total else 0.0
    summary = BenchSummary(rows, programs, seeds, per_seed, avg, time.monotonic() - t0)
    if out_csv is not None:
        path = Path(out_csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["program", "seed", "verdict", "attempts", "k", "elapsed_s"])
            for r in rows:
                w.writerow([r.program, r.seed, r.verdict, r.attempts, "" if r.k is None else r.k, f"{r.elapsed:.3f}"])
    return summary
