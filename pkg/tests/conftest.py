import os
import random
from pathlib import Path

import pytest

from mergeguard.parser import parse
from mergeguard.smt import SolverSession, find_solver

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"

needs_solver = pytest.mark.skipif(find_solver() is None, reason="no SMT solver on PATH")


@pytest.fixture(scope="session")
def session():
    if find_solver() is None:
        pytest.skip("no SMT solver on PATH")
    s = SolverSession(timeout_ms=10_000)
    yield s
    s.close()


@pytest.fixture
def rng():
    return random.Random(int(os.environ.get("MERGEGUARD_TEST_SEED", "0")))


def load(name):
    d = CORPUS / name
    return [parse((d / f"{f}.imp").read_text()) for f in ("base", "a", "b", "merge")]


def P(text):
    return parse(text)
