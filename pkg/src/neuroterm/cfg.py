"""Control-flow graphs for structured programs, loop analysis, and segments.

Locations exist for the entry, the exit, every while header, and every
if-join.  Edges carry the straight-line work between locations as an action
list (guard assumptions and assignments).  All cycles pass through a header,
so the graph between headers is acyclic and header-to-header paths are
finitely enumerable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import Assign, Cond, Expr, If, Not, Program, Skip, Stmt, While


class IrreducibleGraphError(Exception):
    """A strongly connected component with more than one entry location."""


class SegmentBudgetError(Exception):
    """Segment enumeration exceeded the configured cap."""


@dataclass(frozen=True)
class Assume:
    cond: Cond


@dataclass(frozen=True)
class Update:
    var: str
    expr: Expr


Action = Assume | Update


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    actions: tuple[Action, ...]


@dataclass
class Cfg:
    entry: int
    exit: int
    n_locations: int
    edges: list[Edge]
    loc_names: dict[int, str]
    header_of_loop: dict[int, int]  # While.loop_id -> header location
    loop_modified: dict[int, frozenset[str]]  # While.loop_id -> assigned vars

    def successors(self) -> dict[int, list[Edge]]:
        out: dict[int, list[Edge]] = {loc: [] for loc in range(self.n_locations)}
        for e in self.edges:
            out[e.src].append(e)
        return out

    def predecessors(self) -> dict[int, set[int]]:
        preds: dict[int, set[int]] = {loc: set() for loc in range(self.n_locations)}
        for e in self.edges:
            preds[e.dst].add(e.src)
        return preds


def _assigned_vars(stmts: tuple[Stmt, ...]) -> frozenset[str]:
    out: set[str] = set()
    todo = list(stmts)
    while todo:
        s = todo.pop()
        match s:
            case Assign(var, _):
                out.add(var)
            case If(_, t, f):
                todo.extend(t)
                todo.extend(f)
            case While(_, b, _):
                todo.extend(b)
            case Skip():
                pass
    return frozenset(out)


def build_cfg(prog: Program) -> Cfg:
    """Lower a structured program to its location/edge graph."""
    edges: list[Edge] = []
    names = {0: "entry", 1: "exit"}
    header_of_loop: dict[int, int] = {}
    loop_modified: dict[int, frozenset[str]] = {}
    next_loc = [2]

    def new_loc() -> int:
        loc = next_loc[0]
        next_loc[0] += 1
        names[loc] = f"L{loc}"
        return loc

    def lower(stmts: tuple[Stmt, ...], cur: int, pending: tuple[Action, ...]) -> tuple[int, tuple[Action, ...]]:
        for s in stmts:
            match s:
                case Skip():
                    pass
                case Assign(var, e):
                    pending = pending + (Update(var, e),)
                case If(c, t, f):
                    join = new_loc()
                    tcur, tpend = lower(t, cur, pending + (Assume(c),))
                    edges.append(Edge(tcur, join, tpend))
                    fcur, fpend = lower(f, cur, pending + (Assume(Not(c)),))
                    edges.append(Edge(fcur, join, fpend))
                    cur, pending = join, ()
                case While(c, b, loop_id):
                    header = new_loc()
                    header_of_loop[loop_id] = header
                    loop_modified[loop_id] = _assigned_vars(b)
                    edges.append(Edge(cur, header, pending))
                    bcur, bpend = lower(b, header, (Assume(c),))
                    edges.append(Edge(bcur, header, bpend))  # back edge
                    cur, pending = header, (Assume(Not(c)),)
        return cur, pending

    cur, pending = lower(prog.body, 0, ())
    edges.append(Edge(cur, 1, pending))
    return Cfg(0, 1, next_loc[0], edges, names, header_of_loop, loop_modified)


# ---------------------------------------------------------------------------
# Loop structure


@dataclass
class LoopInfo:
    headers: list[int]  # ordered by (depth, location id)
    depth: dict[int, int]  # header -> nesting depth, 1-based
    lex_index: dict[int, int]  # header -> lexicographic position (== depth)
    m: int  # number of lexicographic components
    loop_of: dict[int, int]  # While.loop_id -> header
    inner: dict[int, frozenset[int]]  # header -> headers strictly inside its loop
    modified: dict[int, frozenset[str]]  # header -> vars assigned in its loop body


def _cyclic_sccs(nodes: set[int], succ: dict[int, set[int]]) -> list[set[int]]:
    """Tarjan SCCs of the induced subgraph, keeping only those with a cycle.

    Iterative so deep graphs cannot overflow the stack; output ordered by
    smallest member for determinism.
    """
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = [0]
    sccs: list[set[int]] = []

    for root in sorted(nodes):
        if root in index:
            continue
        work: list[tuple[int, list[int], int]] = [(root, sorted(succ[root] & nodes), 0)]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, nbrs, i = work.pop()
            advanced = False
            while i < len(nbrs):
                w = nbrs[i]
                i += 1
                if w not in index:
                    work.append((v, nbrs, i))
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, sorted(succ[w] & nodes), 0))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                scc: set[int] = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.add(w)
                    if w == v:
                        break
                if len(scc) > 1 or v in succ[v]:
                    sccs.append(scc)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return sorted(sccs, key=min)


def find_loop_headers(cfg: Cfg) -> LoopInfo:
    """Identify loop headers and nesting purely from the graph.

    A header is the unique location of a cyclic SCC that receives an edge
    from outside the SCC; nesting is recovered by peeling headers and
    re-running the SCC decomposition.  Multi-entry SCCs are rejected.
    """
    succ: dict[int, set[int]] = {loc: set() for loc in range(cfg.n_locations)}
    for e in cfg.edges:
        succ[e.src].add(e.dst)
    preds = cfg.predecessors()

    headers: list[int] = []
    depth: dict[int, int] = {}
    inner: dict[int, frozenset[int]] = {}

    def peel(nodes: set[int], d: int) -> list[int]:
        found: list[int] = []
        for scc in _cyclic_sccs(nodes, succ):
            entries = sorted(v for v in scc if preds[v] - scc)
            if len(entries) != 1:
                raise IrreducibleGraphError(
                    f"cycle with {len(entries)} entry locations: {sorted(scc)}"
                )
            h = entries[0]
            headers.append(h)
            depth[h] = d
            found.append(h)
            nested = peel(scc - {h}, d + 1)
            inner[h] = frozenset(nested)
            found.extend(nested)
        return found

    peel(set(range(cfg.n_locations)), 1)
    headers.sort(key=lambda h: (depth[h], h))

    header_to_loop = {h: lid for lid, h in cfg.header_of_loop.items()}
    modified = {h: cfg.loop_modified[header_to_loop[h]] for h in headers if h in header_to_loop}
    m = max(depth.values(), default=0)
    lex_index = dict(depth)
    return LoopInfo(headers, depth, lex_index, m, dict(cfg.header_of_loop), inner, modified)


# ---------------------------------------------------------------------------
# Header-to-header segments


@dataclass(frozen=True)
class Segment:
    seg_id: int
    src: int  # header location
    dst: int  # header location or cfg.exit
    actions: tuple[Action, ...]


def header_segments(cfg: Cfg, li: LoopInfo, cap: int = 4096) -> list[Segment]:
    """Enumerate acyclic paths from each header to the next header or exit.

    Intermediate locations are if-joins only, so the walk terminates; the
    cap guards against branch explosion inside one loop body.
    """
    succ = cfg.successors()
    header_set = set(li.headers)
    segments: list[Segment] = []

    def walk(origin: int, loc: int, actions: tuple[Action, ...], seen: frozenset[int]) -> None:
        for e in succ[loc]:
            acts = actions + e.actions
            if e.dst in header_set or e.dst == cfg.exit:
                if len(segments) >= cap:
                    raise SegmentBudgetError(f"more than {cap} segments")
                segments.append(Segment(len(segments), origin, e.dst, acts))
            else:
                if e.dst in seen:
                    raise IrreducibleGraphError(f"cycle through non-header location {e.dst}")
                walk(origin, e.dst, acts, seen | {e.dst})
        return None

    for h in li.headers:
        walk(h, h, (), frozenset([h]))
    return segments


def dump_cfg(cfg: Cfg) -> str:
    """One edge per line: `src -> dst [action; action; ...]`."""
    from .syntax import _fmt_cond, _fmt_expr  # reuse the canonical formatters

    def fmt_action(a: Action) -> str:
        if isinstance(a, Assume):
            return _fmt_cond(a.cond)
        return f"{a.var} := {_fmt_expr(a.expr)}"

    lines = []
    for e in cfg.edges:
        label = "; ".join(fmt_action(a) for a in e.actions)
        lines.append(f"{cfg.loc_names[e.src]} -> {cfg.loc_names[e.dst]} [{label}]")
    return "\n".join(lines) + "\n"
