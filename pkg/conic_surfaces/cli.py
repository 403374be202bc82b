# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
cli

Command line entry point. Every command produces a ResultEnvelope (JSON, sorted keys) and an
optional CSV table. Exit codes: 0 on success, 2 when the gate rejects the cone data (no metric
exists), 1 on any other failure.
"""

import argparse
import asyncio
import csv
import io
import json
import os
import sys
import tempfile
import time
from enum import Enum
from pathlib import Path
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field

from . import __version__
from .acceptance import AcceptanceSuite
from .config import OPERATOR_ALIASES
from .config import Command
from .config import RunConfig
from .config import SpectrumKind
from .config import load_run_config
from .config import parse_json
from .config import parse_run_config
from .datatypes import ConeAngleVector
from .exceptions import ConfigError
from .exceptions import GateRejection
from .geometry import classify
from .geometry import dimension_report
from .indicial import OperatorName
from .indicial import geometric_labels
from .indicial import regularization_plan
from .indicial import roots_oneform
from .indicial import roots_scalar
from .indicial import roots_symmetric2
from .indicial import xbeta_ybeta_map
from .liouville import ConformalSolution
from .liouville import family_sweep
from .liouville import linear_path
from .liouville import uniformize
from .logger import set_log_level
from .logger import setup_logger
from .mode_spectral import InnerBoundary
from .mode_spectral import OuterBoundary
from .mode_spectral import cone_problem
from .mode_spectral import cusp_problem
from .mode_spectral import football_problem
from .mode_spectral import solve_spectra_sync
from .mode_spectral import verify_eigenvalue_bound
from .model_metrics import Chart
from .model_metrics import ModelMetric
from .model_metrics import evaluate_model
from .model_metrics import football_area
from .model_metrics import football_geodesic_diameter

logger = setup_logger(name="cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REJECTED = 2

ROOT_BUILDERS = {
    OperatorName.SCALAR: roots_scalar,
    OperatorName.P: roots_oneform,
    OperatorName.L: roots_symmetric2,
}


class Provenance(Enum):
    THEOREM = "theorem"
    TRIVIAL = "trivial"
    DERIVED = "derived"


class RunStatus(Enum):
    OK = "ok"
    REJECTED = "rejected"
    FAILED = "failed"
    ERROR = "error"


class ResultEnvelope(BaseModel):
    """
    Result of one run. Apart from `wall_time`, identical configs give identical envelopes.
    """

    tool_version: str = __version__
    command: str
    config: Dict[str, Any]
    status: RunStatus
    exit_code: int
    error: Optional[str] = None
    wall_time: float = 0.0
    payload: Dict[str, Any] = Field(default_factory=dict)
    provenance: Dict[str, Provenance] = Field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


class CommandResult(BaseModel):
    payload: Dict[str, Any]
    provenance: Dict[str, Provenance]
    table: Optional[List[List[Any]]] = None
    solution: Optional[ConformalSolution] = None

    model_config = ConfigDict(arbitrary_types_allowed=True)


# --------------------------------------------------------------------------------------------
# Output


def atomic_write_text(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent or "."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, str(path))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _format_cell(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def format_csv(rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    return buffer.getvalue()


def field_rows(solution: ConformalSolution) -> List[List[Any]]:
    positions = solution.mesh.positions3()
    rows: List[List[Any]] = [["vertex_id", "x", "y", "z", "phi"]]
    for i, (p, phi) in enumerate(zip(positions, solution.phi)):
        rows.append([i, float(p[0]), float(p[1]), float(p[2]), float(phi)])
    return rows


def serialize_field(solution: ConformalSolution, path: Union[str, Path]) -> None:
    """
    Writes the vertex field of a solution as CSV (vertex_id,x,y,z,phi), 17 significant digits.
    """
    atomic_write_text(path, format_csv(field_rows(solution)))
    logger.info(f"Wrote {solution.mesh.n_vertices} vertices to {path}")


# --------------------------------------------------------------------------------------------
# Commands


def _classify(config: RunConfig) -> CommandResult:
    spec = config.resolved_spec()
    verdict = classify(spec)
    return CommandResult(
        payload={
            "genus": spec.genus,
            "betas": list(spec.betas),
            "classification": verdict.model_dump(mode="json"),
            "dimensions": dimension_report(spec).model_dump(mode="json"),
        },
        provenance={
            "classification": Provenance.THEOREM,
            "dimensions": Provenance.THEOREM,
            "betas": Provenance.TRIVIAL,
        },
    )


def _model(config: RunConfig) -> CommandResult:
    options = config.model
    metric = ModelMetric(beta=options.beta, curvature=options.curvature, chart=options.chart)
    samples = [evaluate_model(metric, r) for r in options.radii]
    payload = {
        "metric": metric.model_dump(mode="json"),
        "samples": [s.model_dump() | {"curvature": s.curvature} for s in samples],
    }
    provenance = {"samples": Provenance.TRIVIAL}
    if metric.curvature > 0 and metric.chart in (Chart.POLAR, Chart.SUSPENSION):
        payload["football_area"] = football_area(metric.beta, metric.curvature)
        payload["football_diameter"] = football_geodesic_diameter(metric.beta, metric.curvature)
        provenance["football_area"] = Provenance.THEOREM
        provenance["football_diameter"] = Provenance.TRIVIAL
    table = [["r", "f", "fp", "fpp", "curvature"]] + [
        [s.r, s.f, s.fp, s.fpp, s.curvature] for s in samples
    ]
    return CommandResult(payload=payload, provenance=provenance, table=table)


def _indicial(config: RunConfig) -> CommandResult:
    options = config.indicial
    builder = ROOT_BUILDERS.get(options.operator)
    if builder is None:
        names = ", ".join(op.value for op in ROOT_BUILDERS)
        raise ConfigError(f"indicial.operator: root tables exist for {names} only")
    table = builder(options.beta, options.window)
    xy = xbeta_ybeta_map(options.beta)
    payload = {
        "table": table.model_dump(mode="json"),
        "labels": [label.model_dump(mode="json") for label in geometric_labels(options.beta)],
        "xy_map": xy.model_dump(mode="json"),
    }
    provenance = {
        "table": Provenance.THEOREM,
        "labels": Provenance.THEOREM,
        "xy_map": Provenance.DERIVED,
    }
    if options.nu is not None:
        if config.spec is not None or config.spec_path is not None:
            betas = config.resolved_spec().angles
        else:
            betas = ConeAngleVector(betas=(options.beta,))
        plan = regularization_plan(betas, options.nu)
        payload["regularization"] = [entry.model_dump(mode="json") for entry in plan]
        provenance["regularization"] = Provenance.THEOREM
    rows = [["value", "mode", "family", "multiplicity", "log_multiplicity"]] + [
        [r.value, r.mode, r.family.value, r.multiplicity, r.log_multiplicity] for r in table.roots
    ]
    return CommandResult(payload=payload, provenance=provenance, table=rows)


def _spectrum(config: RunConfig) -> CommandResult:
    options = config.spectrum
    if options.verify_bound and options.kind != SpectrumKind.FOOTBALL:
        raise ConfigError("spectrum.verify_bound applies to footballs only")
    if options.kind == SpectrumKind.CONE:
        problems = [
            cone_problem(options.beta, m, options.n, inner_bc=options.inner_bc)
            for m in options.modes
        ]
    elif options.kind == SpectrumKind.FOOTBALL:
        problems = [
            football_problem(options.beta, options.curvature, m, options.n) for m in options.modes
        ]
    else:
        # truncated cusp, Dirichlet at both ends
        problems = [
            cusp_problem(m, n=options.n).model_copy(update={"outer_bc": OuterBoundary.DIRICHLET})
            for m in options.modes
        ]
    results = solve_spectra_sync(problems, options.count, options.max_concurrency)
    entries = [entry for result in results for entry in result.entries]
    payload: Dict[str, Any] = {
        "kind": options.kind.value,
        "beta": options.beta,
        "entries": [entry.model_dump() for entry in entries],
    }
    provenance = {"entries": Provenance.DERIVED}
    if options.verify_bound:
        report = verify_eigenvalue_bound(
            options.beta, options.curvature, modes=options.modes, n=options.n
        )
        payload["bound"] = report.model_dump(mode="json") | {"rigid": report.rigid}
        provenance["bound"] = Provenance.THEOREM
    rows = [["mode", "index", "value", "error_bar", "coarse", "fine"]] + [
        [e.mode, e.index, e.value, e.error_bar, e.coarse, e.fine] for e in entries
    ]
    return CommandResult(payload=payload, provenance=provenance, table=rows)


def _uniformize(config: RunConfig) -> CommandResult:
    solution = uniformize(config.resolved_spec(), config.solver)
    return CommandResult(
        payload=solution.payload(),
        provenance={
            "K_target": Provenance.TRIVIAL,
            "diagnostics": Provenance.DERIVED,
            "newton_history": Provenance.DERIVED,
        },
        table=field_rows(solution),
        solution=solution,
    )


def _sweep(config: RunConfig) -> CommandResult:
    spec = config.resolved_spec()
    options = config.sweep
    if len(options.end_betas) != spec.k:
        raise ConfigError(f"sweep.end_betas: {len(options.end_betas)} values for {spec.k} cones")
    result = family_sweep(
        spec, linear_path(spec.betas, options.end_betas), options.t_values, config.solver
    )
    rows = [["index", "t", "tag", "K_target", "mean_curvature", "gb_residual"]] + [
        [p.index, p.t, p.tag.value, p.K_target, p.mean_curvature, p.gb_residual]
        for p in result.points
    ]
    return CommandResult(
        payload=result.payload(),
        provenance={
            "points": Provenance.DERIVED,
            "k_zero": Provenance.THEOREM,
            "mean_curvature_zero": Provenance.DERIVED,
        },
        table=rows,
    )


def _accept(config: RunConfig) -> CommandResult:
    options = config.accept
    suite = AcceptanceSuite(
        select=options.select or None,
        seed=config.seed,
        max_concurrency=options.max_concurrency,
        budget_scale=options.budget_scale,
    )
    report = asyncio.run(suite.run())
    return CommandResult(
        payload=report.model_dump(mode="json"),
        provenance={"criteria": Provenance.DERIVED},
    )


COMMANDS = {
    Command.CLASSIFY: _classify,
    Command.MODEL: _model,
    Command.INDICIAL: _indicial,
    Command.SPECTRUM: _spectrum,
    Command.UNIFORMIZE: _uniformize,
    Command.SWEEP: _sweep,
    Command.ACCEPT: _accept,
}


def _execute(config: RunConfig) -> Tuple[ResultEnvelope, Optional[CommandResult]]:
    start = time.monotonic()
    echo = config.model_dump(mode="json", exclude_none=True)
    result = None
    try:
        result = COMMANDS[config.command](config)
    except GateRejection as e:
        logger.warning(f"{config.command.value}: rejected: {e}")
        status, code, error = RunStatus.REJECTED, EXIT_REJECTED, str(e)
    except Exception as e:
        logger.error(f"{config.command.value}: {e.__class__.__name__}: {e}")
        status, code, error = RunStatus.ERROR, EXIT_ERROR, f"{e.__class__.__name__}: {e}"
    else:
        status, code, error = RunStatus.OK, EXIT_OK, None
        if config.command == Command.ACCEPT and not result.payload.get("passed"):
            status, code = RunStatus.FAILED, EXIT_ERROR
    envelope = ResultEnvelope(
        command=config.command.value,
        config=echo,
        status=status,
        exit_code=code,
        error=error,
        wall_time=time.monotonic() - start,
        payload=result.payload if result else {},
        provenance=result.provenance if result else {},
    )
    return envelope, result


def run(config: RunConfig) -> ResultEnvelope:
    """
    Dispatches the configured command. Failures are reported in the envelope (status and exit
    code), never raised.
    """
    envelope, _ = _execute(config)
    return envelope


# --------------------------------------------------------------------------------------------
# Argument parsing


def _common_arguments() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="Run config JSON; flags below are ignored")
    parent.add_argument("--spec", type=Path, dest="spec_path", help="Surface spec JSON file")
    parent.add_argument("--spec-json", help="Surface spec as an inline JSON string")
    parent.add_argument("--output", type=Path, help="Write the result envelope to this file")
    parent.add_argument("--csv", type=Path, help="Write the command's table to this file")
    parent.add_argument("--seed", type=int, default=0)
    parent.add_argument("--log-level", default="INFO")
    parent.add_argument("--quiet", action="store_true", help="Do not print the envelope")
    return parent


def _solver_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--level", "--mesh-level", type=int, dest="mesh_level")
    parser.add_argument("--grading-rings", type=int)
    parser.add_argument("--tol-res", type=float)
    parser.add_argument("--tol-step", type=float)
    parser.add_argument("--max-iterations", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conic-surfaces", description="Constant curvature conic metrics on surfaces"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_arguments()

    sub.add_parser("classify", parents=[common], help="Classify cone data")

    model = sub.add_parser("model", parents=[common], help="Evaluate a model metric")
    model.add_argument("--beta", type=float)
    model.add_argument("--curvature", type=float)
    model.add_argument("--chart", choices=[c.value for c in Chart])
    model.add_argument("--radii", type=float, nargs="+")

    indicial = sub.add_parser("indicial", parents=[common], help="Indicial root tables")
    indicial.add_argument("--beta", type=float)
    indicial.add_argument(
        "--operator", choices=[op.value for op in ROOT_BUILDERS] + list(OPERATOR_ALIASES)
    )
    indicial.add_argument(
        "--window", nargs="+", metavar="LO,HI", help="Either LO,HI or two numbers LO HI"
    )
    indicial.add_argument("--nu", type=float)

    spectrum = sub.add_parser("spectrum", parents=[common], help="Mode spectra")
    spectrum.add_argument(
        "--geometry", "--kind", dest="kind", choices=[k.value for k in SpectrumKind]
    )
    spectrum.add_argument("--beta", type=float)
    spectrum.add_argument("--K", "--curvature", dest="curvature", type=float)
    spectrum.add_argument("--modes", nargs="+", help="Mode numbers or ranges such as 0..3")
    spectrum.add_argument("--count", type=int)
    spectrum.add_argument("--grid", "--n", dest="n", type=int)
    spectrum.add_argument("--inner-bc", choices=[b.value for b in InnerBoundary])
    spectrum.add_argument("--verify-bound", action="store_true", default=None)

    uniformize_parser = sub.add_parser("uniformize", parents=[common], help="Solve Liouville")
    _solver_arguments(uniformize_parser)

    sweep = sub.add_parser("sweep", parents=[common], help="Continuation along a family")
    _solver_arguments(sweep)
    sweep.add_argument("--end-betas", type=float, nargs="+")
    sweep.add_argument("--t-values", type=float, nargs="+")

    accept = sub.add_parser("accept", parents=[common], help="Run the acceptance suite")
    accept.add_argument("--select", type=int, nargs="+")
    accept.add_argument("--max-concurrency", type=int)
    accept.add_argument("--budget-scale", type=float)
    return parser


def _block(args: argparse.Namespace, mapping: Dict[str, str]) -> Optional[Dict[str, Any]]:
    block = {key: getattr(args, attr) for key, attr in mapping.items()}
    block = {key: value for key, value in block.items() if value is not None}
    return block or None


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config is not None:
        config = load_run_config(args.config)
        if config.command.value != args.command:
            raise ConfigError(
                f"{args.config}: command '{config.command.value}' does not match '{args.command}'"
            )
        return config
    data: Dict[str, Any] = {"command": args.command, "seed": args.seed}
    if args.spec_path is not None:
        data["spec_path"] = str(args.spec_path)
    if args.spec_json is not None:
        data["spec"] = parse_json(args.spec_json, "--spec-json")
    blocks = {
        "model": {"beta": "beta", "curvature": "curvature", "chart": "chart", "radii": "radii"},
        "indicial": {"beta": "beta", "operator": "operator", "window": "window", "nu": "nu"},
        "spectrum": {
            "kind": "kind",
            "beta": "beta",
            "curvature": "curvature",
            "modes": "modes",
            "count": "count",
            "n": "n",
            "inner_bc": "inner_bc",
            "verify_bound": "verify_bound",
        },
        "sweep": {"end_betas": "end_betas", "t_values": "t_values"},
        "accept": {
            "select": "select",
            "max_concurrency": "max_concurrency",
            "budget_scale": "budget_scale",
        },
    }
    if args.command in blocks:
        block = _block(args, blocks[args.command])
        if block is not None:
            data[args.command] = block
    if args.command in ("uniformize", "sweep"):
        solver = _block(
            args,
            {
                "mesh_level": "mesh_level",
                "grading_rings": "grading_rings",
                "tol_res": "tol_res",
                "tol_step": "tol_step",
                "max_iterations": "max_iterations",
            },
        )
        if solver is not None:
            data["solver"] = solver
    return parse_run_config(data, "command line")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_log_level(args.log_level)
    try:
        config = config_from_args(args)
    except ConfigError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    envelope, result = _execute(config)
    text = envelope.to_json()
    try:
        if args.output is not None:
            atomic_write_text(args.output, text)
        elif not args.quiet:
            sys.stdout.write(text)
        if args.csv is not None and result is not None and result.table is not None:
            atomic_write_text(args.csv, format_csv(result.table))
    except OSError as e:
        logger.error(f"Cannot write output: {e}")
        return EXIT_ERROR
    return envelope.exit_code


if __name__ == "__main__":
    sys.exit(main())
