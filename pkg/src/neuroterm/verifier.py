"""Verification conditions for integer ranking candidates.

One query is emitted per loop iteration path: a composition of
header-to-header segments that starts and ends at the same header, with
every inner loop collapsed to a havoc of the variables it may write
followed by its exit guard.  A candidate is valid when the solver reports
unsat for every query, i.e. no reachable iteration violates lexicographic
decrease.  Exit-bound segments leave the loop and need no decrease.
"""

from __future__ import annotations

import re
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

from .cfg import Assume, Cfg, IrreducibleGraphError, LoopInfo, Segment, SegmentBudgetError, Update
from .learner import RankingCandidate
from .syntax import And, BinOp, Cmp, IntLit, Neg, Not, Or, Var
from .tracer import eval_cond, eval_expr


class SolverNotFoundError(Exception):
    pass


@dataclass(frozen=True)
class Havoc:
    """Nondeterministic write to a set of variables (inner loop summary)."""

    vars: tuple[str, ...]


@dataclass(frozen=True)
class IterationPath:
    header: int
    seg_ids: tuple[int, ...]
    actions: tuple

    @property
    def path_id(self) -> str:
        return "-".join(str(s) for s in self.seg_ids)


def iteration_paths(cfg: Cfg, li: LoopInfo, segments: list[Segment], cap: int = 4096) -> list[IterationPath]:
    """Enumerate iteration paths of every loop.

    From a header h, follow segments; on reaching a header d strictly inside
    loop(h), append Havoc(modified(d)) and continue only along segments that
    escape loop(d).  A path completes on returning to h.  Segments to the
    exit location or out of loop(h) are exit paths and are skipped.
    """
    by_src: dict[int, list[Segment]] = {}
    for s in segments:
        by_src.setdefault(s.src, []).append(s)
    for v in by_src.values():
        v.sort(key=lambda s: s.seg_id)

    paths: list[IterationPath] = []
    pushes = 0
    for h in li.headers:
        stack: list[tuple[int, tuple, tuple[int, ...], frozenset[int]]] = [(h, (), (), frozenset((h,)))]
        while stack:
            loc, acts, sids, visited = stack.pop()
            for seg in reversed(by_src.get(loc, [])):
                if loc != h and seg.dst in li.inner[loc] | {loc}:
                    continue  # stay out of the summarised inner loop
                new_acts = acts + tuple(seg.actions)
                new_sids = sids + (seg.seg_id,)
                if seg.dst == h:
                    paths.append(IterationPath(h, new_sids, new_acts))
                    if len(paths) > cap:
                        raise SegmentBudgetError(f"more than {cap} iteration paths")
                elif seg.dst == cfg.exit or seg.dst not in li.inner[h]:
                    continue
                else:
                    if seg.dst in visited:
                        raise IrreducibleGraphError("revisited header within one iteration")
                    havoc = Havoc(tuple(sorted(li.modified[seg.dst])))
                    stack.append((seg.dst, new_acts + (havoc,), new_sids, visited | {seg.dst}))
                    pushes += 1
                    if pushes > cap:
                        raise SegmentBudgetError(f"more than {cap} path prefixes")
    return paths


# ---------------------------------------------------------------------------
# SMT-LIB encoding


def _smt_int(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def _smt_expr(e, env: dict[str, str]) -> str:
    if isinstance(e, IntLit):
        return _smt_int(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, Neg):
        return f"(- {_smt_expr(e.operand, env)})"
    if isinstance(e, BinOp):
        return f"({e.op} {_smt_expr(e.left, env)} {_smt_expr(e.right, env)})"
    raise TypeError(f"unknown expression {e!r}")


_CMP_SMT = {"<": "<", "<=": "<=", ">": ">", ">=": ">=", "==": "="}


def _smt_cond(c, env: dict[str, str]) -> str:
    if isinstance(c, Cmp):
        a, b = _smt_expr(c.left, env), _smt_expr(c.right, env)
        if c.op == "!=":
            return f"(not (= {a} {b}))"
        return f"({_CMP_SMT[c.op]} {a} {b})"
    if isinstance(c, Not):
        return f"(not {_smt_cond(c.operand, env)})"
    if isinstance(c, And):
        return f"(and {_smt_cond(c.left, env)} {_smt_cond(c.right, env)})"
    if isinstance(c, Or):
        return f"(or {_smt_cond(c.left, env)} {_smt_cond(c.right, env)})"
    raise TypeError(f"unknown condition {c!r}")


def _output_expr(cand: RankingCandidate, g: int, env: dict[str, str], order: list[str]) -> str:
    terms = []
    for kk in range(g * cand.h, (g + 1) * cand.h):
        lin = []
        for w, var in zip(cand.weights[kk], order):
            if w == 0:
                continue
            x = env[var]
            if w == 1:
                lin.append(x)
            elif w == -1:
                lin.append(f"(- {x})")
            else:
                lin.append(f"(* {_smt_int(w)} {x})")
        b = cand.biases[kk]
        if b != 0 or not lin:
            lin.append(_smt_int(b))
        pre = lin[0] if len(lin) == 1 else "(+ " + " ".join(lin) + ")"
        terms.append(f"(ite (>= {pre} 0) {pre} 0)")
    return terms[0] if len(terms) == 1 else "(+ " + " ".join(terms) + ")"


def _expr_nonlinear(e) -> bool:
    if isinstance(e, BinOp):
        if e.op == "*" and _has_var(e.left) and _has_var(e.right):
            return True
        return _expr_nonlinear(e.left) or _expr_nonlinear(e.right)
    if isinstance(e, Neg):
        return _expr_nonlinear(e.operand)
    return False


def _has_var(e) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Neg):
        return _has_var(e.operand)
    if isinstance(e, BinOp):
        return _has_var(e.left) or _has_var(e.right)
    return False


def _cond_nonlinear(c) -> bool:
    if isinstance(c, Cmp):
        return _expr_nonlinear(c.left) or _expr_nonlinear(c.right)
    if isinstance(c, Not):
        return _cond_nonlinear(c.operand)
    if isinstance(c, (And, Or)):
        return _cond_nonlinear(c.left) or _cond_nonlinear(c.right)
    return False


def vc_logic(paths: list[IterationPath]) -> str:
    """QF_LIA unless some path action multiplies two variable terms."""
    for p in paths:
        for act in p.actions:
            if isinstance(act, Assume) and _cond_nonlinear(act.cond):
                return "QF_NIA"
            if isinstance(act, Update) and _expr_nonlinear(act.expr):
                return "QF_NIA"
    return "QF_LIA"


@dataclass
class VcQuery:
    name: str
    script: str
    path: IterationPath


class _Ssa:
    """Shared versioned-name scheme for the encoder and the model replay."""

    def __init__(self, variables: list[str]):
        self.counter = {v: 0 for v in variables}
        self.env = {v: f"{v}_0" for v in variables}
        self.decls = [f"{v}_0" for v in variables]

    def fresh(self, v: str) -> str:
        self.counter[v] += 1
        name = f"{v}_{self.counter[v]}"
        self.env[v] = name
        self.decls.append(name)
        return name


def encode_vc(variables: list[str], path: IterationPath, cand: RankingCandidate, logic: str) -> VcQuery:
    ssa = _Ssa(variables)
    pre_env = dict(ssa.env)
    asserts = []
    for act in path.actions:
        if isinstance(act, Assume):
            asserts.append(_smt_cond(act.cond, ssa.env))
        elif isinstance(act, Update):
            rhs = _smt_expr(act.expr, ssa.env)
            asserts.append(f"(= {ssa.fresh(act.var)} {rhs})")
        elif isinstance(act, Havoc):
            for v in act.vars:
                ssa.fresh(v)
        else:
            raise TypeError(f"unknown action {act!r}")
    post_env = ssa.env

    o_pre = [_output_expr(cand, g, pre_env, variables) for g in range(cand.m)]
    o_post = [_output_expr(cand, g, post_env, variables) for g in range(cand.m)]
    p, q = cand.delta_v.numerator, cand.delta_v.denominator
    disjuncts = []
    for j in range(cand.m):
        if q == 1:
            dec = f"(<= {o_post[j]} (- {o_pre[j]} {_smt_int(p)}))"
        else:
            dec = f"(<= (* {q} {o_post[j]}) (- (* {q} {o_pre[j]}) {_smt_int(p)}))"
        parts = [dec] + [f"(<= {o_post[i]} {o_pre[i]})" for i in range(j)]
        disjuncts.append(parts[0] if len(parts) == 1 else "(and " + " ".join(parts) + ")")
    decrease = disjuncts[0] if len(disjuncts) == 1 else "(or " + " ".join(disjuncts) + ")"

    lines = ["(set-option :produce-models true)", f"(set-logic {logic})"]
    lines += [f"(declare-const {d} Int)" for d in ssa.decls]
    lines += [f"(assert {a})" for a in asserts]
    lines.append(f"(assert (not {decrease}))")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return VcQuery(name=f"vc_{path.path_id}", script="\n".join(lines) + "\n", path=path)


def encode_nonneg_query(cand: RankingCandidate, variables: list[str]) -> str:
    """Sanity script: some output negative at a free state.  Must be unsat."""
    env = {v: v for v in variables}
    outs = [_output_expr(cand, g, env, variables) for g in range(cand.m)]
    neg = [f"(< {o} 0)" for o in outs]
    body = neg[0] if len(neg) == 1 else "(or " + " ".join(neg) + ")"
    lines = ["(set-logic QF_LIA)"]
    lines += [f"(declare-const {v} Int)" for v in variables]
    lines.append(f"(assert {body})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Solver driver


@dataclass
class QueryResult:
    name: str
    status: str  # unsat | sat | timeout | unknown | error
    elapsed: float
    model: dict[str, int] | None = None
    confirmed: bool | None = None  # sat only: replay agrees the model breaks decrease


@dataclass
class Counterexample:
    path_id: str
    pre: dict[str, int]
    post: dict[str, int]
    confirmed: bool


@dataclass
class VerificationOutcome:
    verdict: str  # valid | counterexample | unknown
    queries: list[QueryResult]
    counterexample: Counterexample | None = None


def run_solver(script: str, cmd: list[str], timeout: float) -> tuple[str, str, float]:
    """Feed one script on stdin; classify the first verdict line."""
    t0 = time.monotonic()
    try:
        proc = subprocess.run(
            cmd, input=script.encode(), capture_output=True, timeout=timeout
        )
    except subprocess.TimeoutExpired:
        return "timeout", "", time.monotonic() - t0
    out = proc.stdout.decode(errors="replace")
    for line in out.splitlines():
        word = line.strip()
        if word in ("sat", "unsat", "unknown"):
            return word, out, time.monotonic() - t0
    return "error", out + proc.stderr.decode(errors="replace"), time.monotonic() - t0


def _parse_model(out: str) -> dict[str, int]:
    """Pull name -> value out of (define-fun name () Int value) entries."""
    lines = out.splitlines()
    starts = [i for i, ln in enumerate(lines) if ln.strip() == "sat"]
    tail = "\n".join(lines[starts[0] + 1 :]) if starts else out
    tokens = re.findall(r"\(|\)|[^\s()]+", tail)
    pos = 0

    def parse():
        nonlocal pos
        if tokens[pos] == "(":
            pos += 1
            items = []
            while pos < len(tokens) and tokens[pos] != ")":
                items.append(parse())
            pos += 1
            return items
        atom = tokens[pos]
        pos += 1
        return atom

    exprs = []
    while pos < len(tokens):
        if tokens[pos] == ")":
            pos += 1
            continue
        exprs.append(parse())

    model: dict[str, int] = {}

    def value_of(v):
        if isinstance(v, str):
            return int(v)
        if isinstance(v, list) and len(v) == 2 and v[0] == "-":
            return -int(v[1])
        raise ValueError(f"unsupported model value {v!r}")

    def scan(node):
        if not isinstance(node, list):
            return
        if len(node) >= 5 and node[0] == "define-fun" and isinstance(node[1], str):
            try:
                model[node[1]] = value_of(node[4])
                return
            except (ValueError, TypeError):
                return
        for child in node:
            scan(child)

    for e in exprs:
        scan(e)
    return model


def lex_decreases(cand: RankingCandidate, pre_vals: list[int], post_vals: list[int]) -> bool:
    ox = cand.outputs(pre_vals)
    oy = cand.outputs(post_vals)
    p, q = cand.delta_v.numerator, cand.delta_v.denominator
    for j in range(cand.m):
        if q * oy[j] <= q * ox[j] - p and all(oy[i] <= ox[i] for i in range(j)):
            return True
    return False


def replay_model(variables: list[str], path: IterationPath, model: dict[str, int]):
    """Re-run the path on the model's values; mirrors the encoder's naming.

    Returns (pre state, post state, assumes and updates consistent, havoc
    values in encounter order)."""
    counter = {v: 0 for v in variables}
    values = {v: model.get(f"{v}_0", 0) for v in variables}
    pre = dict(values)
    havocs: list[int] = []
    ok = True
    for act in path.actions:
        if isinstance(act, Assume):
            ok = ok and bool(eval_cond(act.cond, values))
        elif isinstance(act, Update):
            values[act.var] = eval_expr(act.expr, values)
            counter[act.var] += 1
            name = f"{act.var}_{counter[act.var]}"
            if name in model and model[name] != values[act.var]:
                ok = False
        elif isinstance(act, Havoc):
            for v in act.vars:
                counter[v] += 1
                values[v] = model.get(f"{v}_{counter[v]}", 0)
                havocs.append(values[v])
    return pre, dict(values), ok, havocs


def run_path(variables: list[str], path: IterationPath, pre: dict[str, int], havocs: list[int]):
    """Execute the path concretely from a chosen pre state.  Returns the post
    state, or None when an assume fails.  Havoc slots consume the given
    values in order (0 once exhausted)."""
    values = dict(pre)
    slot = 0
    for act in path.actions:
        if isinstance(act, Assume):
            if not eval_cond(act.cond, values):
                return None
        elif isinstance(act, Update):
            values[act.var] = eval_expr(act.expr, values)
        elif isinstance(act, Havoc):
            for v in act.vars:
                values[v] = havocs[slot] if slot < len(havocs) else 0
                slot += 1
    return values


def check_candidate(
    variables: list[str],
    paths: list[IterationPath],
    cand: RankingCandidate,
    solver_cmd: list[str],
    timeout: float = 60.0,
    workers: int = 4,
    out_dir: str | Path | None = None,
) -> VerificationOutcome:
    logic = vc_logic(paths)
    queries = [encode_vc(variables, p, cand, logic) for p in paths]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for q in queries:
            (out / f"{q.name}.smt2").write_bytes(q.script.encode())

    results: list[QueryResult] = []

    def solve(q: VcQuery) -> QueryResult:
        status, out_text, elapsed = run_solver(q.script, solver_cmd, timeout)
        if status != "sat":
            return QueryResult(q.name, status, elapsed)
        try:
            model = _parse_model(out_text)
        except (ValueError, IndexError):
            model = {}
        pre, post, assumes_ok, _ = replay_model(variables, q.path, model)
        confirmed = assumes_ok and not lex_decreases(cand, [pre[v] for v in variables], [post[v] for v in variables])
        return QueryResult(q.name, "sat", elapsed, model, confirmed)

    try:
        if workers > 1 and len(queries) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(solve, queries))
        else:
            results = [solve(q) for q in queries]
    except FileNotFoundError as e:
        raise SolverNotFoundError(str(e)) from e

    cex = None
    for q, r in zip(queries, results):
        if r.status == "sat" and cex is None:
            pre, post, ok, _ = replay_model(variables, q.path, r.model or {})
            cex = Counterexample(q.path.path_id, pre, post, bool(r.confirmed))
    if cex is not None:
        verdict = "counterexample"
    elif all(r.status == "unsat" for r in results):
        verdict = "valid"
    else:
        verdict = "unknown"
    return VerificationOutcome(verdict, results, cex)


# ---------------------------------------------------------------------------
# Exhaustive oracle for small boxes (tests only; exponential)


def brute_force_violations(
    variables: list[str],
    path: IterationPath,
    cand: RankingCandidate,
    bound: int,
    budget: int = 2_000_000,
    limit: int = 10,
) -> list[tuple[dict[str, int], dict[str, int]]]:
    """All (pre, post) pairs within [-bound, bound] that the path can reach
    and that violate lexicographic decrease.  Havoc values range over the
    same box."""
    n = len(variables)
    span = range(-bound, bound + 1)
    work = 0
    found: list[tuple[dict[str, int], dict[str, int]]] = []
    for vec in product(span, repeat=n):
        states = [dict(zip(variables, vec))]
        pre = dict(zip(variables, vec))
        for act in path.actions:
            if not states:
                break
            if isinstance(act, Assume):
                states = [s for s in states if eval_cond(act.cond, s)]
            elif isinstance(act, Update):
                for s in states:
                    s[act.var] = eval_expr(act.expr, s)
            elif isinstance(act, Havoc):
                nxt = []
                for s in states:
                    for hv in product(span, repeat=len(act.vars)):
                        t = dict(s)
                        t.update(zip(act.vars, hv))
                        nxt.append(t)
                states = nxt
            work += len(states)
            if work > budget:
                raise SegmentBudgetError("brute force budget exceeded")
        pre_vec = [pre[v] for v in variables]
        for s in states:
            if not lex_decreases(cand, pre_vec, [s[v] for v in variables]):
                found.append((pre, s))
                if len(found) >= limit:
                    return found
    return found
