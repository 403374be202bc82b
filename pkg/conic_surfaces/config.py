# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
config

Run configuration for the command line. Every block forbids unknown keys, so a misspelled option
fails before any computation starts.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError
from pydantic import field_validator
from pydantic import model_validator

from .datatypes import ConicSurfaceSpec
from .datatypes import SolverOptions
from .exceptions import ConfigError
from .indicial import OperatorName
from .logger import setup_logger
from .mode_spectral import InnerBoundary
from .model_metrics import Chart

logger = setup_logger(name="config")


class Command(Enum):
    CLASSIFY = "classify"
    MODEL = "model"
    INDICIAL = "indicial"
    SPECTRUM = "spectrum"
    UNIFORMIZE = "uniformize"
    SWEEP = "sweep"
    ACCEPT = "accept"


class SpectrumKind(Enum):
    CONE = "cone"
    FOOTBALL = "football"
    CUSP = "cusp"


class ModelOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: float = Field(gt=-1.0, le=0.0)
    curvature: float = 0.0
    chart: Chart = Chart.POLAR
    radii: List[float] = Field(min_length=1)


# Short operator names accepted next to the enum values
OPERATOR_ALIASES = {"scalar": OperatorName.SCALAR, "p": OperatorName.P, "l": OperatorName.L}


def parse_window(value: Any) -> Any:
    """
    "LO,HI" (alone or as the only list entry) -> [LO, HI]; anything else is left to field
    validation.
    """
    if isinstance(value, list) and len(value) == 1:
        value = value[0]
    if isinstance(value, str):
        return [part.strip() for part in value.split(",")]
    return value


def parse_modes(value: Any) -> Any:
    """
    Expands "a..b" entries (inclusive) in a mode list; a bare string is a one-entry list.
    """
    if isinstance(value, (str, int)):
        value = [value]
    if not isinstance(value, list):
        return value
    modes: List[Any] = []
    for item in value:
        if isinstance(item, str) and ".." in item:
            first, _, last = item.partition("..")
            try:
                modes.extend(range(int(first), int(last) + 1))
            except ValueError:
                raise ValueError(f"mode range '{item}' is not of the form a..b") from None
        elif isinstance(item, str) and "," in item:
            modes.extend(part.strip() for part in item.split(","))
        else:
            modes.append(item)
    return modes


class IndicialOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    beta: float = Field(gt=-1.0, lt=0.0)
    operator: OperatorName = OperatorName.SCALAR
    window: Tuple[float, float] = (-4.0, 4.0)
    nu: Optional[float] = None

    @field_validator("operator", mode="before")
    @classmethod
    def resolve_operator_alias(cls, value):
        if isinstance(value, str):
            return OPERATOR_ALIASES.get(value.lower(), value)
        return value

    @field_validator("window", mode="before")
    @classmethod
    def split_window(cls, value):
        return parse_window(value)


class SpectrumOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: SpectrumKind = SpectrumKind.FOOTBALL
    beta: float = Field(default=-0.5, gt=-1.0, le=0.0)
    curvature: float = Field(default=1.0, gt=0.0)
    modes: List[int] = Field(default_factory=lambda: [0, 1, 2, 3])
    count: int = Field(default=3, ge=1)
    n: int = Field(default=256, ge=64)
    inner_bc: InnerBoundary = InnerBoundary.FRIEDRICHS
    verify_bound: bool = False
    max_concurrency: int = Field(default=4, ge=1)

    @field_validator("modes", mode="before")
    @classmethod
    def expand_mode_ranges(cls, value):
        return parse_modes(value)


class SweepOptions(BaseModel):
    """
    Straight path from the spec's betas to `end_betas`, sampled at `t_values` in [0, 1].
    """

    model_config = ConfigDict(extra="forbid")

    end_betas: List[float]
    t_values: List[float] = Field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])


class AcceptOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    select: List[int] = Field(default_factory=list)
    max_concurrency: int = Field(default=2, ge=1)
    budget_scale: float = Field(default=1.0, gt=0.0)


class RunConfig(BaseModel):
    """
    One command line run. The surface spec is given inline (`spec`) or as a JSON file
    (`spec_path`), never both. `seed` only affects the randomized acceptance checks.
    """

    model_config = ConfigDict(extra="forbid")

    command: Command
    spec_path: Optional[Path] = None
    spec: Optional[ConicSurfaceSpec] = None
    seed: int = 0
    solver: SolverOptions = Field(default_factory=SolverOptions)
    model: Optional[ModelOptions] = None
    indicial: Optional[IndicialOptions] = None
    spectrum: SpectrumOptions = Field(default_factory=SpectrumOptions)
    sweep: Optional[SweepOptions] = None
    accept: AcceptOptions = Field(default_factory=AcceptOptions)

    @model_validator(mode="after")
    def check_command_inputs(self):
        if self.spec is not None and self.spec_path is not None:
            raise ValueError("give either 'spec' or 'spec_path', not both")
        needs_spec = (Command.CLASSIFY, Command.UNIFORMIZE, Command.SWEEP)
        if self.command in needs_spec and self.spec is None and self.spec_path is None:
            raise ValueError(f"command '{self.command.value}' needs a spec")
        if self.command == Command.MODEL and self.model is None:
            raise ValueError("command 'model' needs a 'model' block")
        if self.command == Command.INDICIAL and self.indicial is None:
            raise ValueError("command 'indicial' needs an 'indicial' block")
        if self.command == Command.SWEEP and self.sweep is None:
            raise ValueError("command 'sweep' needs a 'sweep' block")
        return self

    def resolved_spec(self) -> ConicSurfaceSpec:
        if self.spec is not None:
            return self.spec
        if self.spec_path is None:
            raise ConfigError(f"command '{self.command.value}' needs a spec")
        return load_spec(self.spec_path)


def _format_validation_error(source: str, error: ValidationError) -> str:
    problems = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        problems.append(f"{location}: {item['msg']}")
    return f"{source}: " + "; ".join(problems)


def _read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read ({e.strerror})") from e
    return parse_json(text, str(path))


def parse_json(text: str, source: str = "<input>") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e


def parse_spec(data: Any, source: str = "<input>") -> ConicSurfaceSpec:
    try:
        return ConicSurfaceSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(source, e)) from e


def parse_run_config(data: Any, source: str = "<input>") -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(source, e)) from e


def load_spec(path: Union[str, Path]) -> ConicSurfaceSpec:
    spec = parse_spec(_read_json(path), str(path))
    logger.debug(f"Loaded spec from {path}: genus {spec.genus}, {spec.k} cones")
    return spec


def load_run_config(path: Union[str, Path]) -> RunConfig:
    config = parse_run_config(_read_json(path), str(path))
    logger.debug(f"Loaded run config from {path}: command {config.command.value}")
    return config
