import asyncio
import time

import pytest

from conic_surfaces.acceptance import NODE_STATE_CANCELLED
from conic_surfaces.acceptance import NODE_STATE_ERROR
from conic_surfaces.acceptance import NODE_STATE_SUCCESS
from conic_surfaces.acceptance import AcceptanceSuite
from conic_surfaces.acceptance import CheckNode
from conic_surfaces.acceptance import Criterion
from conic_surfaces.acceptance import ParallelNode
from conic_surfaces.acceptance import TimeoutNode
from conic_surfaces.acceptance import check_cusp_modes
from conic_surfaces.acceptance import check_football_spectrum
from conic_surfaces.acceptance import check_football_uniformization
from conic_surfaces.acceptance import check_generic_uniformization
from conic_surfaces.acceptance import check_indicial_closed_forms
from conic_surfaces.acceptance import check_intertwining
from conic_surfaces.acceptance import check_negative_controls
from conic_surfaces.acceptance import check_transition_sweep
from conic_surfaces.acceptance import check_troyanov
from conic_surfaces.acceptance import check_xy_isomorphism
from conic_surfaces.acceptance import default_criteria
from conic_surfaces.exceptions import AcceptanceFailure

SHORT_SLEEP_TIME = 0.05


def passing(seed):
    return {"seed": seed}


def failing(seed):
    raise AcceptanceFailure("criterion does not hold")


def sleeping(seed):
    time.sleep(10 * SHORT_SLEEP_TIME)
    return {"seed": seed}


class Recorder:
    def __init__(self):
        self.states = []

    async def notify(self, node):
        self.states.append(node.state)


def fake_criteria():
    return [
        Criterion(number=1, title="passes", budget_seconds=5, check=passing),
        Criterion(number=2, title="fails", budget_seconds=5, check=failing),
        Criterion(number=3, title="too slow", budget_seconds=SHORT_SLEEP_TIME, check=sleeping),
    ]


@pytest.mark.asyncio
async def test_check_node_keeps_evidence():
    node = CheckNode(lambda: {"value": 1}, label="check")
    recorder = Recorder()
    node.subscribe(recorder)
    await node.execute()
    assert node.state == NODE_STATE_SUCCESS
    assert recorder.states == ["running", NODE_STATE_SUCCESS]
    assert node.wall_time is not None and node.wall_time >= 0.0
    obj = node.dump_object()
    assert obj["type"] == "CheckNode"
    assert obj["label"] == "check"
    assert obj["evidence"] == {"value": 1}


@pytest.mark.asyncio
async def test_check_node_error():
    node = CheckNode(lambda: failing(0), label="check")
    await node.execute()
    assert node.state == NODE_STATE_ERROR
    assert node.last_error == "criterion does not hold"
    assert "evidence" not in node.dump_object()


@pytest.mark.asyncio
async def test_executed_node_is_not_run_again():
    calls = []
    node = CheckNode(lambda: calls.append(1) or {}, label="once")
    await node.execute()
    await node.execute()
    assert calls == [1]


@pytest.mark.asyncio
async def test_timeout_node():
    node = TimeoutNode(SHORT_SLEEP_TIME, CheckNode(lambda: sleeping(0)), label="slow")
    await node.execute()
    assert node.state == NODE_STATE_ERROR
    assert "timeout" in node.last_error
    assert node.wrapped.state == NODE_STATE_CANCELLED


@pytest.mark.asyncio
async def test_timeout_node_passes_through_errors():
    node = TimeoutNode(5, CheckNode(lambda: failing(0)), label="fails")
    await node.execute()
    assert node.state == NODE_STATE_ERROR
    assert node.last_error == "criterion does not hold"
    obj = node.dump_object()
    assert obj["timeout_seconds"] == 5
    assert obj["wrapped"]["state"] == NODE_STATE_ERROR


@pytest.mark.asyncio
async def test_parallel_node_cancelled():
    root = ParallelNode(max_concurrency=1, label="root")
    root.add_node(CheckNode(lambda: sleeping(0), label="slow"))
    task = asyncio.create_task(root.execute())
    await asyncio.sleep(SHORT_SLEEP_TIME)
    task.cancel()
    await task
    assert root.state in (NODE_STATE_CANCELLED, NODE_STATE_ERROR)
    assert root.nodes[0].state == NODE_STATE_CANCELLED


@pytest.mark.asyncio
async def test_suite_reports_every_criterion():
    suite = AcceptanceSuite(criteria=fake_criteria(), seed=7, max_concurrency=3)
    report = await suite.run()
    assert not report.passed
    states = {c["label"]: c["state"] for c in report.criteria}
    assert states == {
        "criterion 1: passes": NODE_STATE_SUCCESS,
        "criterion 2: fails": NODE_STATE_ERROR,
        "criterion 3: too slow": NODE_STATE_ERROR,
    }
    assert report.criteria[0]["wrapped"]["evidence"] == {"seed": 7}
    nodes = []
    suite.root.collect_nodes(nodes)
    assert len(nodes) == 7


@pytest.mark.asyncio
async def test_suite_selection_and_budget_scale():
    suite = AcceptanceSuite(criteria=fake_criteria(), select=[1], budget_scale=2.0)
    report = await suite.run()
    assert report.passed
    assert len(report.criteria) == 1
    assert report.criteria[0]["timeout_seconds"] == 10
    assert report.wall_time is not None


def test_suite_rejects_unknown_selection():
    with pytest.raises(ValueError):
        AcceptanceSuite(criteria=fake_criteria(), select=[4])


def test_run_sync():
    report = AcceptanceSuite(criteria=fake_criteria(), select=[1, 2]).run_sync()
    assert not report.passed


def test_default_criteria_are_numbered():
    criteria = default_criteria()
    assert [c.number for c in criteria] == list(range(1, 11))
    assert [c.budget_seconds for c in criteria] == [1, 1, 10, 300, 30, 60, 120, 600, 900, 60]
    assert [c.number for c in criteria if c.case_budget_seconds is not None] == [8]
    assert criteria[7].case_budget_seconds == 300


def recording(seed, case_budget_seconds):
    return {"case_budget_seconds": case_budget_seconds}


def test_case_budget_follows_budget_scale():
    criterion = Criterion(
        number=1, title="cases", budget_seconds=5, check=recording, case_budget_seconds=2
    )
    report = AcceptanceSuite(criteria=[criterion], budget_scale=3.0).run_sync()
    assert report.passed
    assert report.criteria[0]["wrapped"]["evidence"] == {"case_budget_seconds": 6.0}


def test_check_indicial_closed_forms():
    evidence = check_indicial_closed_forms()
    assert evidence["tables"] == 12
    assert evidence["max_section_residual"] <= 1e-12


def test_check_intertwining():
    assert check_intertwining(seed=3)["max_identity_residual"] <= 1e-12


def test_check_xy_isomorphism():
    evidence = check_xy_isomorphism(seed=1)
    assert evidence["samples"] == 1000
    assert evidence["min_abs_det"] > 0.0


def test_check_troyanov():
    evidence = check_troyanov(seed=2, fuzz=1000)
    assert evidence["fuzzed"] == 1000
    assert evidence["projection_samples"] == 1000
    assert evidence["draws"] > evidence["projection_samples"]


def test_check_cusp_modes():
    evidence = check_cusp_modes()
    assert sorted(evidence["constants"]) == [1, 2, 3, 4, 5]


def test_check_negative_controls():
    assert check_negative_controls()["exit_codes"] == [2, 2]


@pytest.mark.slow
def test_check_football_spectrum():
    evidence = check_football_spectrum()
    assert evidence["bessel_matches"] == 18
    assert evidence["min_margin"] > 0.0


@pytest.mark.slow
def test_check_football_uniformization():
    evidence = check_football_uniformization()
    assert len(evidence["errors"]) == 3
    assert min(evidence["orders"]) >= 1.7


@pytest.mark.slow
def test_check_generic_uniformization():
    evidence = check_generic_uniformization(case_budget_seconds=300)
    assert sorted(evidence) == ["sphere", "torus"]
    assert evidence["torus"]["K_target"] < 0.0 < evidence["sphere"]["K_target"]


@pytest.mark.slow
def test_check_transition_sweep():
    evidence = check_transition_sweep()
    assert evidence["k_zero"] == pytest.approx(0.5, abs=1e-3)
    assert evidence["mean_curvature_zero"] == pytest.approx(0.5, abs=1e-3)
