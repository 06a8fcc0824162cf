"""Data-driven termination analysis for integer programs.

Pipeline: sample executions, fit a sum-of-ReLU lexicographic ranking
network on consecutive loop-header states, round it to integers, and let
an SMT solver confirm strict decrease on every loop iteration path.
"""

from .cfg import (
    Assume,
    Cfg,
    IrreducibleGraphError,
    LoopInfo,
    Segment,
    SegmentBudgetError,
    Update,
    build_cfg,
    dump_cfg,
    find_loop_headers,
    header_segments,
)
from .learner import (
    RankingCandidate,
    SorNetwork,
    TrainConfig,
    TrainingReport,
    dataset_loss,
    format_candidate,
    pair_loss,
    parse_candidate,
    round_parameters,
    train,
)
from .pipeline import (
    AnalysisReport,
    BenchSummary,
    PipelineConfig,
    analyze_file,
    analyze_program,
    analyze_text,
    bench,
    discover_solver,
)
from .syntax import ParseError, Program, parse_program, pretty_print
from .tracer import (
    ObservationPair,
    SamplerConfig,
    Snapshot,
    Trace,
    build_pairs,
    dump_traces,
    execute_trace,
    run_traces,
    sample_inputs,
)
from .verifier import (
    Counterexample,
    Havoc,
    IterationPath,
    SolverNotFoundError,
    VcQuery,
    VerificationOutcome,
    brute_force_violations,
    check_candidate,
    encode_nonneg_query,
    encode_vc,
    iteration_paths,
    lex_decreases,
    run_solver,
    vc_logic,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "Assume",
    "BenchSummary",
    "Cfg",
    "Counterexample",
    "Havoc",
    "IrreducibleGraphError",
    "IterationPath",
    "LoopInfo",
    "ObservationPair",
    "ParseError",
    "PipelineConfig",
    "Program",
    "RankingCandidate",
    "SamplerConfig",
    "Segment",
    "SegmentBudgetError",
    "Snapshot",
    "SolverNotFoundError",
    "SorNetwork",
    "Trace",
    "TrainConfig",
    "TrainingReport",
    "Update",
    "VcQuery",
    "VerificationOutcome",
    "analyze_file",
    "analyze_program",
    "analyze_text",
    "bench",
    "brute_force_violations",
    "build_cfg",
    "build_pairs",
    "check_candidate",
    "dataset_loss",
    "discover_solver",
    "dump_cfg",
    "dump_traces",
    "encode_nonneg_query",
    "encode_vc",
    "execute_trace",
    "find_loop_headers",
    "format_candidate",
    "header_segments",
    "iteration_paths",
    "lex_decreases",
    "pair_loss",
    "parse_candidate",
    "parse_program",
    "pretty_print",
    "round_parameters",
    "run_solver",
    "run_traces",
    "sample_inputs",
    "train",
    "vc_logic",
]
