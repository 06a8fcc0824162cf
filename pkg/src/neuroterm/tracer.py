"""Input sampling, concrete execution with header snapshots, and pair mining.

Snapshots are taken every time control reaches a loop header, before the
guard is evaluated (so the final, guard-failing visit is recorded too).
Adjacent same-header snapshots become the training pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cfg import LoopInfo
from .syntax import And, Assign, BinOp, Cmp, Cond, Expr, If, IntLit, Neg, Not, Or, Program, Skip, Stmt, Var, While


@dataclass
class SamplerConfig:
    strategy: str = "pas"  # uniform | gaussian | pas
    count: int = 1000
    seed: int = 0
    uniform_range: int = 1000
    gaussian_variance: float = 1000.0
    pas_pair_variance: float = 100.0
    pas_pair_covariance: float = -99.0
    pas_other_variance: float = 1.0


def _pair_choices(n_params: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n_params) for j in range(i + 1, n_params)]


def sample_inputs_detailed(
    cfg: SamplerConfig, n_params: int
) -> tuple[list[tuple[int, ...]], list[tuple[int, int] | None]]:
    """Draw input vectors; also report which coordinate pair each PAS sample
    anticorrelated (None for non-PAS draws)."""
    rng = np.random.default_rng(cfg.seed)
    count = cfg.count
    if n_params == 0:
        return [() for _ in range(count)], [None] * count

    if cfg.strategy == "uniform":
        b = cfg.uniform_range
        mat = rng.integers(-b, b + 1, size=(count, n_params))
        return [tuple(int(v) for v in row) for row in mat], [None] * count

    if cfg.strategy == "gaussian":
        mat = rng.normal(0.0, np.sqrt(cfg.gaussian_variance), size=(count, n_params))
        mat = np.rint(mat).astype(np.int64)
        return [tuple(int(v) for v in row) for row in mat], [None] * count

    if cfg.strategy == "pas":
        if n_params == 1:
            mat = rng.normal(0.0, np.sqrt(cfg.pas_other_variance), size=(count, 1))
            mat = np.rint(mat).astype(np.int64)
            return [tuple(int(v) for v in row) for row in mat], [None] * count
        choices = _pair_choices(n_params)
        picked = rng.integers(0, len(choices), size=count)
        out = np.empty((count, n_params), dtype=np.int64)
        for pi, (a, b) in enumerate(choices):
            rows = np.flatnonzero(picked == pi)
            if rows.size == 0:
                continue
            cov = np.full(n_params, cfg.pas_other_variance) * np.eye(n_params)
            cov[a, a] = cov[b, b] = cfg.pas_pair_variance
            cov[a, b] = cov[b, a] = cfg.pas_pair_covariance
            draws = rng.multivariate_normal(np.zeros(n_params), cov, size=rows.size)
            out[rows] = np.rint(draws).astype(np.int64)
        vecs = [tuple(int(v) for v in row) for row in out]
        return vecs, [choices[p] for p in picked]

    raise ValueError(f"unknown sampling strategy {cfg.strategy!r}")


def sample_inputs(cfg: SamplerConfig, n_params: int) -> list[tuple[int, ...]]:
    return sample_inputs_detailed(cfg, n_params)[0]


# ---------------------------------------------------------------------------
# Concrete execution


@dataclass(frozen=True)
class Snapshot:
    header: int  # CFG location id
    values: tuple[int, ...]  # params then locals, declaration order


@dataclass
class Trace:
    input: tuple[int, ...]
    steps: list[Snapshot]
    truncated: bool


class _TraceBudget(Exception):
    pass


def eval_expr(e: Expr, env: dict[str, int]) -> int:
    match e:
        case IntLit(v):
            return v
        case Var(name):
            return env[name]
        case Neg(x):
            return -eval_expr(x, env)
        case BinOp("+", l, r):
            return eval_expr(l, env) + eval_expr(r, env)
        case BinOp("-", l, r):
            return eval_expr(l, env) - eval_expr(r, env)
        case BinOp("*", l, r):
            return eval_expr(l, env) * eval_expr(r, env)
    raise AssertionError(e)


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def eval_cond(c: Cond, env: dict[str, int]) -> bool:
    match c:
        case Cmp(op, l, r):
            return _CMP[op](eval_expr(l, env), eval_expr(r, env))
        case Not(x):
            return not eval_cond(x, env)
        case And(l, r):
            return eval_cond(l, env) and eval_cond(r, env)
        case Or(l, r):
            return eval_cond(l, env) or eval_cond(r, env)
    raise AssertionError(c)


def execute_trace(prog: Program, li: LoopInfo, input_vec: tuple[int, ...], max_len: int = 1000) -> Trace:
    """Run the program on one input, recording a snapshot at each header
    visit.  Execution halts early once a snapshot would exceed max_len."""
    if len(input_vec) != len(prog.params):
        raise ValueError(f"expected {len(prog.params)} inputs, got {len(input_vec)}")
    env: dict[str, int] = dict(zip(prog.params, (int(v) for v in input_vec)))
    for name in prog.locals:
        env[name] = 0
    steps: list[Snapshot] = []
    truncated = False

    def snap(header: int) -> None:
        nonlocal truncated
        if len(steps) >= max_len:
            truncated = True
            raise _TraceBudget()
        steps.append(Snapshot(header, tuple(env[v] for v in prog.variables)))

    def run(stmts: tuple[Stmt, ...]) -> None:
        for s in stmts:
            match s:
                case Skip():
                    pass
                case Assign(var, e):
                    env[var] = eval_expr(e, env)
                case If(c, t, f):
                    run(t if eval_cond(c, env) else f)
                case While(c, b, loop_id):
                    header = li.loop_of[loop_id]
                    while True:
                        snap(header)
                        if not eval_cond(c, env):
                            break
                        run(b)

    try:
        run(prog.body)
    except _TraceBudget:
        pass
    return Trace(tuple(int(v) for v in input_vec), steps, truncated)


def run_traces(
    prog: Program, li: LoopInfo, inputs: list[tuple[int, ...]], max_len: int = 1000
) -> list[Trace]:
    return [execute_trace(prog, li, vec, max_len) for vec in inputs]


# ---------------------------------------------------------------------------
# Observation pairs


@dataclass(frozen=True)
class ObservationPair:
    x: tuple[int, ...]
    y: tuple[int, ...]
    lex_index: int  # 1-based component this pair trains


def build_pairs(traces: list[Trace], li: LoopInfo) -> list[ObservationPair]:
    """Sliding window over same-header snapshots, per trace.

    Interleaved visits to other headers do not break adjacency: for each
    header the pair list is consecutive visits in time order.  Duplicates
    are retained.
    """
    pairs: list[ObservationPair] = []
    for tr in traces:
        by_header: dict[int, list[tuple[int, ...]]] = {h: [] for h in li.headers}
        for s in tr.steps:
            by_header[s.header].append(s.values)
        for h in li.headers:
            seq = by_header[h]
            j = li.lex_index[h]
            for a, b in zip(seq, seq[1:]):
                pairs.append(ObservationPair(a, b, j))
    return pairs


def dump_traces(traces: list[Trace], prog: Program) -> str:
    """CSV-ish text: header line naming variables, then one line per
    snapshot: trace_id,step,header_id,v1,...,vn.  Byte-stable."""
    lines = ["trace_id,step,header_id," + ",".join(prog.variables)]
    for tid, tr in enumerate(traces):
        for step, s in enumerate(tr.steps):
            lines.append(f"{tid},{step},{s.header}," + ",".join(str(v) for v in s.values))
    return "\n".join(lines) + "\n"
