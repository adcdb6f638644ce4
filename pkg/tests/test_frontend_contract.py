"""Cross-language contract: a session produced by the web runner's state
machine (driven synthetically under node) must pass this package's
validator with zero violations and yield finite metrics for every target.
Requires the frontend build (frontend/dist); skipped otherwise.
"""

import shutil
import subprocess
from pathlib import Path

import math
import pytest

from ksikit import events as ev
from ksikit.experiment import encode_plan, extract_metrics, make_plan, run_trial

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"
TOOL = FRONTEND / "dist" / "tools" / "make_session.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not TOOL.exists(),
    reason="needs node and a built frontend (cd frontend && tsc -p tsconfig.json)",
)


@pytest.fixture(scope="module")
def web_session():
    plan = make_plan("mouse", seed=31, blocks=1)
    plan_text = "\n".join(encode_plan(plan)) + "\n"
    proc = subprocess.run(
        ["node", str(TOOL)],
        input=plan_text.encode(),
        capture_output=True,
        timeout=60,
    )
    assert proc.returncode == 0, proc.stderr.decode()
    log = ev.decode_session(proc.stdout.decode().splitlines())
    return plan, log


def test_runner_session_validates_cleanly(web_session):
    _, log = web_session
    assert ev.validate_session(log) == []
    assert log.meta.device == "mouse"
    assert len(log.surveys) == 2


def test_runner_session_replays_against_plan(web_session):
    plan, log = web_session
    run = run_trial(plan, log.events)
    assert run.complete
    assert len(run.outcomes) == 33


def test_runner_session_metrics_finite(web_session):
    _, log = web_session
    metrics = extract_metrics(log)
    assert len(metrics) == 33
    for m in metrics:
        assert m.gap is None
        assert m.homing_t is not None and math.isfinite(m.homing_t) and m.homing_t >= 0
        assert m.movement_t is not None and math.isfinite(m.movement_t) and m.movement_t > 0
        if m.target_index < 10:
            assert m.return_t is not None and m.return_t > 0
        else:
            assert m.return_t is None
    assert sum(m.errors for m in metrics) == 0
