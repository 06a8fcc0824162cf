import shutil
from pathlib import Path

import pytest

from neuroterm.pipeline import discover_solver

REPO = Path(__file__).resolve().parents[1]
PROGRAMS = REPO / "programs"


@pytest.fixture(scope="session")
def solver_cmd():
    cmd = discover_solver()
    if cmd is None:
        pytest.skip("no SMT solver available (need z3 on PATH or node + scripts/z3_stdin.js)")
    return cmd


@pytest.fixture(scope="session")
def programs_dir():
    return PROGRAMS


def read_program(name: str) -> str:
    return (PROGRAMS / f"{name}.nt").read_text()


@pytest.fixture(scope="session")
def has_node():
    return shutil.which("node") is not None
