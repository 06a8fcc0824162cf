import pytest

from neuroterm.cfg import Assume, SegmentBudgetError, Update, build_cfg, dump_cfg, find_loop_headers, header_segments
from neuroterm.syntax import parse_program
from neuroterm.tracer import eval_cond, eval_expr

from conftest import read_program


def info(src: str):
    prog = parse_program(src)
    cfg = build_cfg(prog)
    li = find_loop_headers(cfg)
    return prog, cfg, li


def test_straight_line_has_no_headers():
    prog, cfg, li = info(read_program("straight_line"))
    assert li.headers == []
    assert li.m == 0


def test_single_loop_one_header_depth_one():
    prog, cfg, li = info(read_program("countdown"))
    assert len(li.headers) == 1
    h = li.headers[0]
    assert li.depth[h] == 1
    assert li.lex_index[h] == 1
    assert li.m == 1
    assert li.modified[h] == frozenset({"x"})


def test_nested_loops_index_outer_before_inner():
    prog, cfg, li = info(read_program("nested_counting"))
    assert li.m == 2
    outer, inner = li.headers
    assert li.depth[outer] == 1 and li.depth[inner] == 2
    assert li.lex_index[outer] == 1 and li.lex_index[inner] == 2
    assert li.inner[outer] == frozenset({inner})
    assert li.inner[inner] == frozenset()
    assert li.modified[outer] == frozenset({"i", "j"})
    assert li.modified[inner] == frozenset({"j"})


def test_sequential_loops_share_component():
    # index equals nesting depth, so two top-level loops share component 1
    prog, cfg, li = info(read_program("sequential_loops"))
    assert len(li.headers) == 2
    assert [li.depth[h] for h in li.headers] == [1, 1]
    assert [li.lex_index[h] for h in li.headers] == [1, 1]
    assert li.m == 1


def test_countdown_segments_enumerate_by_hand():
    prog, cfg, li = info(read_program("countdown"))
    segs = header_segments(cfg, li)
    h = li.headers[0]
    looping = [s for s in segs if s.dst == h]
    exiting = [s for s in segs if s.dst == cfg.exit]
    assert len(looping) == 1 and len(exiting) == 1
    (loop_seg,) = looping
    kinds = [type(a).__name__ for a in loop_seg.actions]
    assert kinds == ["Assume", "Update"]


def test_branchy_loop_segment_count():
    # two-way if chain under a disjunctive guard: x-branch, y-branch, and an
    # else branch that is unreachable under the guard but still enumerated,
    # plus the exit segment
    prog, cfg, li = info(read_program("sor_two_phase"))
    segs = header_segments(cfg, li)
    h = li.headers[0]
    looping = [s for s in segs if s.dst == h]
    exiting = [s for s in segs if s.dst == cfg.exit]
    assert len(exiting) == 1
    assert len(looping) == 3


def test_segments_replay_matches_direct_interpretation():
    """Executing any program and logging header visits must agree with
    stepping through exactly one matching segment at each visit."""
    from neuroterm.cfg import LoopInfo  # local alias only for clarity

    for name, inputs in [
        ("countdown", [(5,), (0,), (-3,)]),
        ("nested_counting", [(0, 4), (2, 2), (-1, 3)]),
        ("sor_two_phase", [(3, 1, 0), (0, 0, 5)]),
        ("phase_switch", [(2, 2,)]),
        ("gauss_sum", [(4,)]),
    ]:
        prog, cfg, li = info(read_program(name))
        segs = header_segments(cfg, li)
        from neuroterm.tracer import run_traces

        traces = run_traces(prog, li, inputs, max_len=200)
        for tr in traces:
            steps = tr.steps
            for a, b in zip(steps, steps[1:]):
                matches = 0
                for seg in segs:
                    if seg.src != a.header or seg.dst != b.header:
                        continue
                    values = dict(zip(prog.variables, a.values))
                    ok = True
                    for act in seg.actions:
                        if isinstance(act, Assume):
                            if not eval_cond(act.cond, values):
                                ok = False
                                break
                        else:
                            values[act.var] = eval_expr(act.expr, values)
                    if ok and tuple(values[v] for v in prog.variables) == b.values:
                        matches += 1
                assert matches == 1, (name, a, b)


def test_segment_cap_enforced():
    # 2^12 paths through 12 sequential ifs inside one loop
    branches = " ".join(
        f"if (x > {i}) {{ x = x - 1; }} else {{ x = x - 2; }}" for i in range(12)
    )
    src = f"fn blowup(x) {{ while (x > 0) {{ {branches} }} }}"
    prog = parse_program(src)
    cfg = build_cfg(prog)
    li = find_loop_headers(cfg)
    with pytest.raises(SegmentBudgetError):
        header_segments(cfg, li, cap=1000)


def test_dump_cfg_mentions_every_header_and_the_boundaries():
    prog, cfg, li = info(read_program("nested_counting"))
    text = dump_cfg(cfg)
    assert "entry ->" in text
    assert "-> exit" in text
    for h in li.headers:
        assert f"L{h}" in text
