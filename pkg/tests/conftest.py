"""Shared fixtures: the five-item demonstration population, the grading
worked example, scripted service sessions, and the acceptance verdict
lines printed after the run."""

from __future__ import annotations

import numpy as np
import pytest

from cj_engine.core import GradingScheme, RankDistribution
from cj_engine.service import SessionService
from cj_engine.sim import TargetPopulation
from cj_engine.store import Store

#: Verdicts recorded by the acceptance tests, echoed after the run so the
#: one-line summaries survive pytest's output capture.
ACCEPTANCE_VERDICTS: list[tuple[str, bool]] = []


def record_verdict(name: str, ok: bool) -> None:
    ACCEPTANCE_VERDICTS.append((name, ok))


def pytest_terminal_summary(terminalreporter, exitstatus, config) -> None:
    if not ACCEPTANCE_VERDICTS:
        return
    terminalreporter.section("acceptance verdicts")
    for name, ok in ACCEPTANCE_VERDICTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")


#: Five-item demonstration population used throughout the docs and tests.
DEMO_MEANS = (71.0, 48.0, 36.0, 77.0, 37.0)

#: Worked grading example: one A, one B, two Cs, one D over five items,
#: and the rank distribution of the item whose grade flips with the
#: threshold (15.63% rank 1, 76.8% rank 2, 7.57% ranks 3-4, 0% rank 5).
GRADE_LABELS = ("A", "B", "C", "D")
GRADE_COUNTS = (1, 1, 2, 1)
FLIP_ITEM_PROBS = (0.1563, 0.768, 0.0757, 0.0, 0.0)


@pytest.fixture
def demo_population() -> TargetPopulation:
    return TargetPopulation(means=np.array(DEMO_MEANS), sigma=5.0)


@pytest.fixture
def grading_scheme() -> GradingScheme:
    return GradingScheme(labels=GRADE_LABELS, counts=GRADE_COUNTS, threshold=0.9)


@pytest.fixture
def flip_item_distribution() -> RankDistribution:
    probs = np.array(FLIP_ITEM_PROBS)
    return RankDistribution(
        item=3,
        probs=probs,
        expected_rank=float(np.arange(1, 6) @ probs),
        method="exact",
    )


@pytest.fixture
def service(tmp_path) -> SessionService:
    svc = SessionService(Store(tmp_path / "sessions.db"))
    yield svc
    svc.close()


def run_scripted_session(svc: SessionService, n_items: int = 5, judgements: int = 50):
    """Create a session and judge `judgements` pairs with a fixed rule:
    the lower item id always wins. Returns the session id."""
    items = [{"id": i, "label": f"essay {i}"} for i in range(1, n_items + 1)]
    session = svc.create_session(items, "entropy", k_multiplier=10)
    for _ in range(judgements):
        pair = svc.next_pair(session.id)
        left, right = pair["left"]["id"], pair["right"]["id"]
        svc.submit_judgement(session.id, left, right, winner=min(left, right))
    return session.id
