# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
acceptance

Acceptance suite. Every criterion is a blocking check function wrapped in a small tree of nodes:
a CheckNode runs it in a worker thread, a TimeoutNode bounds its wall time and a ParallelNode runs
the criteria with bounded concurrency. Nodes report state changes to their observers and can be
dumped to plain dicts for the result envelope.

Check functions take a seed, return a dict of evidence and raise AcceptanceFailure when the
criterion does not hold.
"""

import asyncio
import functools
import math
import time
from datetime import datetime
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

import numpy as np
from async_timeout import timeout
from pydantic import BaseModel
from pydantic import ConfigDict

from .datatypes import ConeAngleVector
from .datatypes import ConicSurfaceSpec
from .datatypes import GeometryTag
from .datatypes import SolverOptions
from .exceptions import AcceptanceFailure
from .exceptions import NotUniformizable
from .geometry import classify
from .geometry import sph_to_euc_projection
from .indicial import OperatorName
from .indicial import closed_form_roots
from .indicial import intertwining_identity_residual
from .indicial import mode_matrix
from .indicial import roots_oneform
from .indicial import roots_scalar
from .indicial import roots_symmetric2
from .indicial import section_residual
from .indicial import xbeta_ybeta_map
from .logger import setup_logger

logger = setup_logger(name="acceptance")

# Node states
NODE_STATE_RUNNING = "running"
NODE_STATE_CANCELLED = "cancelled"
NODE_STATE_ERROR = "error"
NODE_STATE_SUCCESS = "success"


class AcceptanceNode:
    """
    Superclass for suite nodes. Subclasses reimplement _execute() and, when they hold extra state
    or children, dump_object() and collect_nodes().

    Observers implement `async notify(node)`; they are notified when a node starts and when it
    finishes.
    """

    def __init__(self, label=None, state="", last_error="", start_ts=None):
        self._observers = []
        self.state = state
        self.label = label
        self.last_error = last_error
        self.start_ts = start_ts
        self.end_ts = None

    def subscribe(self, observer):
        self._observers.append(observer)

    def unsubscribe(self, observer):
        self._observers.remove(observer)

    async def notify_observers(self):
        for obs in self._observers:
            await obs.notify(self)

    def already_executed(self):
        return self.state and self.state != NODE_STATE_RUNNING

    async def _execute(self):
        pass

    async def execute(self):
        if self.already_executed():
            logger.debug(f"Called execute on an already executed node; ignoring {self.label}")
            return
        if not self.start_ts:
            self.start_ts = datetime.now().timestamp()
        self.state = NODE_STATE_RUNNING
        await self.notify_observers()
        try:
            await self._execute()
        except asyncio.CancelledError:
            self.state = NODE_STATE_CANCELLED
            self.last_error = "cancelled"
            self.end_ts = datetime.now().timestamp()
            await self.notify_observers()
            return
        except Exception as e:
            self.state = NODE_STATE_ERROR
            self.last_error = str(e) or e.__class__.__name__
        if self.state == NODE_STATE_RUNNING:
            self.state = NODE_STATE_SUCCESS
        self.end_ts = datetime.now().timestamp()
        await self.notify_observers()

    @property
    def wall_time(self) -> Optional[float]:
        if self.start_ts is None or self.end_ts is None:
            return None
        return self.end_ts - self.start_ts

    def dump_object(self):
        obj = {
            "type": self.__class__.__name__,
            "state": self.state,
        }
        if self.label:
            obj["label"] = self.label
        if self.last_error:
            obj["last_error"] = self.last_error
        if self.wall_time is not None:
            obj["wall_time"] = self.wall_time
        return obj

    def collect_nodes(self, nodes_list: List):
        nodes_list.append(self)


class CheckNode(AcceptanceNode):
    """
    Runs a blocking check in a worker thread and keeps the evidence it returns. A timeout only
    stops waiting: the thread runs to completion and its result is dropped.
    """

    def __init__(self, check: Callable[[], Dict], **kwargs):
        super().__init__(**kwargs)
        self.check = check
        self.evidence: Optional[Dict] = None

    async def _execute(self):
        self.evidence = await asyncio.to_thread(self.check)

    def dump_object(self):
        obj = super().dump_object()
        if self.evidence is not None:
            obj["evidence"] = self.evidence
        return obj


class TimeoutNode(AcceptanceNode):
    """
    Wraps a node with a wall time budget; the node fails when the budget runs out.
    """

    def __init__(self, timeout_seconds: float, wrapped: AcceptanceNode, **kwargs):
        super().__init__(**kwargs)
        self.timeout_seconds = timeout_seconds
        self.wrapped = wrapped

    async def _execute(self):
        loop = asyncio.get_running_loop()
        deadline = loop.time() + self.timeout_seconds
        async with timeout(self.timeout_seconds) as cm:
            await self.wrapped.execute()
        # the wrapped node absorbs the cancellation, so an expiry may leave cm.expired unset
        expired = cm.expired or loop.time() >= deadline
        if expired and self.wrapped.state != NODE_STATE_SUCCESS:
            raise asyncio.TimeoutError(f"timeout after waiting {self.timeout_seconds} seconds")
        if self.wrapped.state == NODE_STATE_ERROR:
            raise AcceptanceFailure(self.wrapped.last_error)
        if self.wrapped.state == NODE_STATE_CANCELLED:
            raise asyncio.CancelledError()

    def collect_nodes(self, nodes_list: List):
        super().collect_nodes(nodes_list)
        self.wrapped.collect_nodes(nodes_list)

    def dump_object(self):
        obj = super().dump_object()
        obj["wrapped"] = self.wrapped.dump_object()
        obj["timeout_seconds"] = self.timeout_seconds
        return obj


class ParallelNode(AcceptanceNode):
    """
    Executes its children concurrently, at most `max_concurrency` at a time. Fails if any child
    fails; children keep running when a sibling fails.
    """

    def __init__(self, max_concurrency: int = 2, **kwargs):
        super().__init__(**kwargs)
        self.nodes: List[AcceptanceNode] = []
        self.max_concurrency = max_concurrency

    def add_node(self, node: AcceptanceNode):
        self.nodes.append(node)

    async def _execute(self):
        semaphore = asyncio.Semaphore(self.max_concurrency)

        async def run(node):
            async with semaphore:
                await node.execute()

        await asyncio.gather(*(run(node) for node in self.nodes))
        failed = [node for node in self.nodes if node.state != NODE_STATE_SUCCESS]
        if failed:
            self.state = NODE_STATE_ERROR
            self.last_error = "; ".join(f"{n.label}: {n.last_error}" for n in failed)

    def dump_object(self):
        obj = super().dump_object()
        obj["children"] = [n.dump_object() for n in self.nodes]
        return obj

    def collect_nodes(self, nodes_list: List):
        super().collect_nodes(nodes_list)
        for node in self.nodes:
            node.collect_nodes(nodes_list)


class ProgressLogger:
    """
    Observer that logs every finished criterion.
    """

    async def notify(self, node: AcceptanceNode):
        if node.state in (NODE_STATE_SUCCESS, NODE_STATE_ERROR, NODE_STATE_CANCELLED):
            logger.info(f"{node.label}: {node.state} {node.last_error}".rstrip())


# --------------------------------------------------------------------------------------------
# Criteria

QUARTER_BETAS = (-0.25, -0.5, -2.0 / 3.0, -0.75)


def _require(condition: bool, message: str):
    if not condition:
        raise AcceptanceFailure(message)


def check_indicial_closed_forms(seed: int = 0) -> Dict:
    window = (-6.0, 6.0)
    worst = 0.0
    tables = 0
    for beta in QUARTER_BETAS:
        c = 1.0 + beta
        for builder, operator in (
            (roots_scalar, OperatorName.SCALAR),
            (roots_oneform, OperatorName.P),
            (roots_symmetric2, OperatorName.L),
        ):
            table = builder(beta, window)
            tables += 1
            for root in table.roots:
                matrix = mode_matrix(operator, beta, root.mode)
                for section in root.eigensections:
                    residual = section_residual(matrix, root.value, section)
                    worst = max(worst, residual / max(1.0, root.value**2))
            for value in table.values():
                nearest = min(
                    abs(value - r)
                    for k in range(-int(8 * c) - 1, int(8 * c) + 2)
                    for r in closed_form_roots(operator, beta, k)
                )
                _require(nearest <= 1e-12, f"{operator.value} root {value} has no closed form")
        scalar = roots_scalar(beta, window)
        _require(
            scalar.log_multiplicity(0.0) == 1,
            f"scalar root 0 has log multiplicity {scalar.log_multiplicity(0.0)} at beta={beta}",
        )
    _require(worst <= 1e-12, f"eigensection residual {worst:.3e}")
    return {"tables": tables, "max_section_residual": worst}


def check_intertwining(seed: int = 0) -> Dict:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        beta = float(rng.uniform(-0.95, -0.05))
        mode = int(rng.integers(-6, 7))
        for direction in ("bianchi", "killing"):
            worst = max(worst, intertwining_identity_residual(beta, mode, direction))
        bianchi = mode_matrix(OperatorName.BIANCHI, beta, mode)
        for zeta in rng.uniform(-5.0, 5.0, size=3):
            image = bianchi.at(complex(zeta)) @ np.array([1.0, 0.0, 0.0])
            _require(np.all(image == 0.0), "B does not annihilate pure trace")
    _require(worst <= 1e-12, f"intertwining identity residual {worst:.3e}")
    return {"samples": 100, "max_identity_residual": worst}


def check_xy_isomorphism(seed: int = 0) -> Dict:
    rng = np.random.default_rng(seed)
    betas = rng.uniform(-0.999, -0.001, size=1000)
    worst_oracle = 0.0
    signs = set()
    smallest = math.inf
    for beta in betas:
        result = xbeta_ybeta_map(float(beta))
        c = 1.0 + beta
        oracle = 4.0 * beta * beta / (c * c)
        worst_oracle = max(worst_oracle, abs(result.determinant - oracle) / max(1.0, oracle))
        signs.add(result.determinant > 0)
        smallest = min(smallest, abs(result.determinant))
    _require(worst_oracle <= 1e-12, f"determinant differs from 4 beta^2/c^2 by {worst_oracle}")
    _require(signs == {True}, "determinant crosses zero")
    return {"samples": len(betas), "max_oracle_error": worst_oracle, "min_abs_det": smallest}


def check_troyanov(seed: int = 0, fuzz: int = 100_000, samples: int = 1000) -> Dict:
    rng = np.random.default_rng(seed)
    failures = 0
    tested = 0
    drawn = 0
    while tested < samples:
        k = int(rng.integers(3, 7))
        euclidean = -2.0 * rng.dirichlet(np.ones(k))
        drawn += 1
        # a weight of 1/2 or more is not a cone angle
        if np.any(euclidean <= -1.0):
            continue
        tested += 1
        lam = float(rng.uniform(0.05, 0.95))
        angles = ConeAngleVector(betas=tuple(lam * euclidean))
        spec = ConicSurfaceSpec(genus=0, angles=angles)
        if classify(spec).tag != GeometryTag.SPHERICAL:
            failures += 1
            continue
        back_lam, back = sph_to_euc_projection(angles)
        if abs(back_lam - lam) > 1e-9 or np.max(np.abs(np.array(back.betas) - euclidean)) > 1e-9:
            failures += 1
    _require(failures == 0, f"{failures} cone-over-Euclidean samples failed")
    for _ in range(fuzz):
        k = int(rng.integers(0, 7))
        genus = int(rng.integers(0, 4))
        betas = tuple(rng.uniform(-0.999999, -1e-6, size=k))
        classify(ConicSurfaceSpec(genus=genus, angles=ConeAngleVector(betas=betas)))
    return {"projection_samples": tested, "draws": drawn, "fuzzed": fuzz}


def check_football_spectrum(seed: int = 0) -> Dict:
    from .mode_spectral import cone_problem
    from .mode_spectral import solve_spectrum
    from .mode_spectral import verify_eigenvalue_bound
    from .oracles import bessel_zeros

    margins = []
    for beta in (-0.25, -0.5, -0.75):
        for K in (1.0, 4.0):
            report = verify_eigenvalue_bound(beta, K, modes=range(0, 4))
            mode0 = report.modes[0]
            _require(
                abs(mode0.lambda1 - 2.0 * K) <= max(10.0 * mode0.error_bar, 1e-6 * K),
                f"mode 0 lambda_1={mode0.lambda1} for beta={beta}, K={K}",
            )
            margins.append(report.min_nonzero_mode_margin)
            _require(report.min_nonzero_mode_margin > 0, f"no margin at beta={beta}, K={K}")
    matched = 0
    for beta in (-0.25, -0.5, -0.75):
        for mode in (0, 1, 2):
            result = solve_spectrum(cone_problem(beta, mode, n=256), count=2)
            zeros = bessel_zeros(abs(mode) / (1.0 + beta), 2)
            for entry, zero in zip(result.entries, zeros):
                exact = zero * zero
                tolerance = max(entry.error_bar, 1e-8 * exact)
                _require(
                    abs(entry.value - exact) <= tolerance,
                    f"cone beta={beta} mode={mode} n={entry.index}: {entry.value} vs {exact}",
                )
                matched += 1
    return {"min_margin": min(margins), "bessel_matches": matched}


def check_cusp_modes(seed: int = 0) -> Dict:
    from .mode_spectral import cusp_mode_decay_check
    from .mode_spectral import cusp_zero_mode_roots

    roots = cusp_zero_mode_roots()
    _require(np.allclose(roots, (1.0, -2.0), atol=1e-12), f"cusp zero-mode exponents {roots}")
    c, a = 0.5, 1.0
    constants = {}
    for j in range(1, 6):
        report = cusp_mode_decay_check(j, c, a)
        _require(report.holds, f"barrier bound fails for j={j}")
        _require(report.bound_constant <= report.uniform_constant, f"A_{j} above a/(1-c^2)")
        constants[j] = report.bound_constant
    ratio = constants[5] / constants[4]
    _require(1.0 / 1.2 <= ratio <= 1.2, f"A_5/A_4 = {ratio}")
    return {"roots": list(roots), "constants": constants}


def _football_spec(beta: float) -> ConicSurfaceSpec:
    return ConicSurfaceSpec(
        genus=0, betas=[beta, beta], positions=[(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    )


def check_football_uniformization(seed: int = 0, levels: Sequence[int] = (3, 4, 5)) -> Dict:
    from .liouville import football_error
    from .liouville import uniformize

    errors = []
    for level in levels:
        solution = uniformize(_football_spec(-0.5), SolverOptions(mesh_level=level))
        errors.append(football_error(solution))
    orders = [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
    _require(min(orders) >= 1.7, f"football convergence orders {orders}")
    _require(errors[-1] < 5e-3, f"football error {errors[-1]} at level {levels[-1]}")
    return {"errors": errors, "orders": orders}


def equilateral_spec(beta: float = -0.5) -> ConicSurfaceSpec:
    positions = [
        (math.cos(2.0 * math.pi * i / 3.0), math.sin(2.0 * math.pi * i / 3.0), 0.0)
        for i in range(3)
    ]
    return ConicSurfaceSpec(genus=0, betas=[beta] * 3, positions=positions)


def torus_two_cone_spec(beta: float = -0.5) -> ConicSurfaceSpec:
    return ConicSurfaceSpec(genus=1, betas=[beta, beta], positions=[(0.25, 0.25), (0.75, 0.75)])


def check_generic_uniformization(
    seed: int = 0, level: int = 4, case_budget_seconds: Optional[float] = None
) -> Dict:
    from .liouville import uniformize

    evidence = {}
    for name, spec in (("sphere", equilateral_spec()), ("torus", torus_two_cone_spec())):
        started = time.perf_counter()
        solution = uniformize(spec, SolverOptions(mesh_level=level))
        elapsed = time.perf_counter() - started
        if case_budget_seconds is not None:
            _require(elapsed <= case_budget_seconds, f"{name}: solve took {elapsed:.1f} s")
        diagnostics = solution.diagnostics
        _require(diagnostics.gb_residual < 1e-3, f"{name}: gb_residual {diagnostics.gb_residual}")
        _require(diagnostics.exponent_fits, f"{name}: no exponent fits")
        for fit in diagnostics.exponent_fits:
            _require(
                fit.relative_error <= 0.1,
                f"{name}: cone {fit.cone_index + 1} slope {fit.slope} vs {fit.predicted}",
            )
        evidence[name] = {
            "K_target": solution.K_target,
            "gb_residual": diagnostics.gb_residual,
            "slopes": [fit.slope for fit in diagnostics.exponent_fits],
            "seconds": elapsed,
        }
    return evidence


def tetrahedral_positions() -> List[tuple]:
    s = 1.0 / math.sqrt(3.0)
    return [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]


def check_transition_sweep(seed: int = 0, level: int = 3) -> Dict:
    from .liouville import family_sweep

    spec = ConicSurfaceSpec(genus=0, betas=[-0.4] * 4, positions=tetrahedral_positions())
    sweep = family_sweep(
        spec,
        lambda t: [-t] * 4,
        np.linspace(0.4, 0.6, 5),
        SolverOptions(mesh_level=level),
    )
    _require(sweep.rejected_index is None, f"sweep rejected at {sweep.rejected_index}")
    _require(
        sweep.k_zero is not None and abs(sweep.k_zero - 0.5) <= 1e-3,
        f"K crosses zero at {sweep.k_zero}",
    )
    _require(
        sweep.mean_curvature_zero is not None and abs(sweep.mean_curvature_zero - 0.5) <= 1e-3,
        f"mean curvature crosses zero at {sweep.mean_curvature_zero}",
    )
    return {"k_zero": sweep.k_zero, "mean_curvature_zero": sweep.mean_curvature_zero}


NEGATIVE_CONTROLS = (
    ConicSurfaceSpec(
        genus=0,
        betas=["-4/5", "-1/10", "-1/10"],
        positions=[(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)],
    ),
    ConicSurfaceSpec(genus=0, betas=[-0.3, -0.6], positions=[(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]),
)


def check_negative_controls(seed: int = 0) -> Dict:
    from .cli import main
    from .liouville import build_background

    codes = []
    for spec in NEGATIVE_CONTROLS:
        try:
            build_background(spec)
        except NotUniformizable:
            pass
        else:
            raise AcceptanceFailure(f"{list(spec.betas)} passed the gate")
        codes.append(main(["uniformize", "--spec-json", spec.model_dump_json(), "--quiet"]))
    _require(codes == [2, 2], f"exit codes {codes}")
    return {"exit_codes": codes}


class Criterion(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    number: int
    title: str
    budget_seconds: float
    check: Callable[..., Dict]
    # limit on each case inside the check, passed on as `case_budget_seconds`
    case_budget_seconds: Optional[float] = None


def default_criteria() -> List[Criterion]:
    table = [
        (1, "indicial closed forms", 1, check_indicial_closed_forms),
        (2, "intertwining", 1, check_intertwining),
        (3, "X to Y isomorphism", 10, check_xy_isomorphism),
        (4, "Troyanov geometry", 300, check_troyanov),
        (5, "football spectrum", 30, check_football_spectrum),
        (6, "cusp modes", 60, check_cusp_modes),
        (7, "football uniformization", 120, check_football_uniformization),
        (8, "generic uniformization", 600, check_generic_uniformization),
        (9, "transition sweep", 900, check_transition_sweep),
        (10, "negative controls", 60, check_negative_controls),
    ]
    criteria = [
        Criterion(number=number, title=title, budget_seconds=budget, check=check)
        for number, title, budget, check in table
    ]
    criteria[7].case_budget_seconds = 300
    return criteria


class SuiteReport(BaseModel):
    passed: bool
    wall_time: Optional[float] = None
    criteria: List[Dict]


class AcceptanceSuite:
    """
    Builds the node tree for the selected criteria and runs it.
    """

    def __init__(
        self,
        criteria: Optional[Sequence[Criterion]] = None,
        select: Optional[Sequence[int]] = None,
        seed: int = 0,
        max_concurrency: int = 2,
        budget_scale: float = 1.0,
    ):
        criteria = list(criteria) if criteria is not None else default_criteria()
        if select:
            unknown = set(select) - {c.number for c in criteria}
            if unknown:
                raise ValueError(f"unknown criteria {sorted(unknown)}")
            criteria = [c for c in criteria if c.number in set(select)]
        self.root = ParallelNode(max_concurrency=max_concurrency, label="acceptance")
        progress = ProgressLogger()
        for criterion in criteria:
            label = f"criterion {criterion.number}: {criterion.title}"
            kwargs = {}
            if criterion.case_budget_seconds is not None:
                kwargs["case_budget_seconds"] = criterion.case_budget_seconds * budget_scale
            check = CheckNode(functools.partial(criterion.check, seed, **kwargs), label=label)
            node = TimeoutNode(criterion.budget_seconds * budget_scale, check, label=label)
            node.subscribe(progress)
            self.root.add_node(node)

    async def run(self) -> SuiteReport:
        await self.root.execute()
        return SuiteReport(
            passed=self.root.state == NODE_STATE_SUCCESS,
            wall_time=self.root.wall_time,
            criteria=[node.dump_object() for node in self.root.nodes],
        )

    def run_sync(self) -> SuiteReport:
        return asyncio.run(self.run())
