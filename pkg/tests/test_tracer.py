import numpy as np
import pytest

from neuroterm.cfg import build_cfg, find_loop_headers
from neuroterm.syntax import parse_program
from neuroterm.tracer import (
    ObservationPair,
    SamplerConfig,
    build_pairs,
    dump_traces,
    execute_trace,
    run_traces,
    sample_inputs,
    sample_inputs_detailed,
)

from conftest import read_program


def setup(name: str):
    prog = parse_program(read_program(name))
    cfg = build_cfg(prog)
    li = find_loop_headers(cfg)
    return prog, li


# ---------------------------------------------------------------------------
# Interpreter


def test_countdown_snapshots_by_hand():
    prog, li = setup("countdown")
    tr = execute_trace(prog, li, (3,))
    assert [s.values for s in tr.steps] == [(3,), (2,), (1,), (0,)]
    assert not tr.truncated


def test_guard_false_still_snapshots_once():
    prog, li = setup("countdown")
    tr = execute_trace(prog, li, (0,))
    assert [s.values for s in tr.steps] == [(0,)]


def test_nested_counting_replay_small_case():
    # i=0,k=2: outer header sees (0,2,·),(1,2,·),(2,2,·); the first inner
    # visit happens with j=0 and i=0 so the inner guard is false at once
    prog, li = setup("nested_counting")
    outer, inner = li.headers
    tr = execute_trace(prog, li, (0, 2))
    outer_vals = [s.values for s in tr.steps if s.header == outer]
    inner_vals = [s.values for s in tr.steps if s.header == inner]
    assert [v[:2] for v in outer_vals] == [(0, 2), (1, 2), (2, 2)]
    assert inner_vals[0] == (0, 2, 0)
    assert inner_vals[-1][2] >= 1


def test_locals_start_at_zero():
    prog, li = setup("gauss_sum")
    tr = execute_trace(prog, li, (2,))
    assert tr.steps[0].values == (2, 0, 0)


def test_truncation_at_max_len():
    prog, li = setup("countdown")
    tr = execute_trace(prog, li, (10_000,), max_len=50)
    assert tr.truncated
    assert len(tr.steps) == 50


def test_truncation_on_divergence():
    prog = parse_program("fn spin(x) { while (x > 0) { x = x + 1; } }")
    cfg = build_cfg(prog)
    li = find_loop_headers(cfg)
    tr = execute_trace(prog, li, (1,), max_len=100)
    assert tr.truncated and len(tr.steps) == 100


def test_run_traces_keeps_input_association():
    prog, li = setup("countdown")
    traces = run_traces(prog, li, [(2,), (5,)])
    assert traces[0].input == (2,) and traces[1].input == (5,)


# conftest imports neuroterm before numpy seeds anything; keep the module
# constant for truncation checks above
def test_truncation_budget_matches_max_len_argument():
    prog, li = setup("countdown")
    tr = execute_trace(prog, li, (10_000,), max_len=1000)
    assert len(tr.steps) == 1000


# ---------------------------------------------------------------------------
# Pair construction


def test_pairs_are_consecutive_same_header():
    prog, li = setup("countdown")
    traces = run_traces(prog, li, [(3,)])
    pairs = build_pairs(traces, li)
    assert [(p.x, p.y) for p in pairs] == [((3,), (2,)), ((2,), (1,)), ((1,), (0,))]
    assert all(p.lex_index == 1 for p in pairs)


def test_pairs_cross_inner_boundary():
    # consecutive inner-header snapshots straddling an outer iteration are
    # still pairs: no intermediate visit to the inner header occurs between
    # them
    prog, li = setup("nested_counting")
    outer, inner = li.headers
    traces = run_traces(prog, li, [(1, 3)])
    pairs = build_pairs(traces, li)
    inner_pairs = [p for p in pairs if p.lex_index == 2]
    boundary = [p for p in inner_pairs if p.y[2] == 0 and p.x[2] != 0]
    assert boundary, "expected at least one cross-boundary inner pair"
    assert all(p.y[0] == p.x[0] + 1 for p in boundary)


def test_pairs_do_not_cross_traces():
    prog, li = setup("countdown")
    traces = run_traces(prog, li, [(1,), (1,)])
    pairs = build_pairs(traces, li)
    assert len(pairs) == 2 * 1


def test_pair_lex_index_is_header_depth():
    prog, li = setup("nested_counting")
    traces = run_traces(prog, li, [(0, 3)])
    for p in build_pairs(traces, li):
        assert p.lex_index in (1, 2)


def test_duplicate_pairs_retained():
    prog = parse_program("fn twice(x) { var t; t = 2; while (t > 0) { t = t - 1; } }")
    cfg = build_cfg(prog)
    li = find_loop_headers(cfg)
    traces = run_traces(prog, li, [(7,), (7,)])
    pairs = build_pairs(traces, li)
    assert len(pairs) == len(traces) * 2
    assert len(set(pairs)) == 2


# ---------------------------------------------------------------------------
# Samplers


def test_uniform_sampler_within_range_and_deterministic():
    cfg = SamplerConfig(strategy="uniform", count=500, seed=9, uniform_range=50)
    a = sample_inputs(cfg, 3)
    b = sample_inputs(cfg, 3)
    assert a == b
    arr = np.array(a)
    assert arr.min() >= -50 and arr.max() <= 50


def test_gaussian_sampler_variance():
    cfg = SamplerConfig(strategy="gaussian", count=20_000, seed=3)
    arr = np.array(sample_inputs(cfg, 2), dtype=float)
    assert abs(arr.mean()) < 1.0
    assert 900 < arr.var() < 1100


def test_pas_sampler_anticorrelates_chosen_pair():
    cfg = SamplerConfig(strategy="pas", count=20_000, seed=5)
    vecs, pairs = sample_inputs_detailed(cfg, 3)
    arr = np.array(vecs, dtype=float)
    rows_ab = np.array([p == (0, 1) for p in pairs])
    sub = arr[rows_ab]
    corr = np.corrcoef(sub[:, 0], sub[:, 1])[0, 1]
    assert corr < -0.9
    # the untouched coordinate stays near unit variance
    assert sub[:, 2].var() < 3.0


def test_pas_single_param_falls_back_to_tight_gaussian():
    cfg = SamplerConfig(strategy="pas", count=5_000, seed=1)
    arr = np.array(sample_inputs(cfg, 1), dtype=float)
    assert arr.var() < 3.0


def test_zero_param_programs_get_empty_tuples():
    cfg = SamplerConfig(count=10)
    assert sample_inputs(cfg, 0) == [()] * 10


def test_unknown_strategy_rejected():
    with pytest.raises(ValueError):
        sample_inputs(SamplerConfig(strategy="sobol"), 2)


# ---------------------------------------------------------------------------
# Dumps


def test_dump_traces_is_stable_and_readable():
    prog, li = setup("countdown")
    traces = run_traces(prog, li, [(2,)])
    text1 = dump_traces(traces, prog)
    text2 = dump_traces(run_traces(prog, li, [(2,)]), prog)
    assert text1 == text2
    assert "x" in text1 and "2" in text1
