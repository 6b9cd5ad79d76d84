"""Run configuration: JSON schema, validation, lossless round-trip.

A run file is one JSON object with blocks materials, cell, scenario
(required) and numerics, output (optional).  Every field is re-validated
through the underlying domain types, diagnostics carry the dotted field
path, and unknown keys anywhere are rejected.  Serialization uses the
shortest round-tripping decimal form of each float (at most 17
significant digits), so load -> dump -> load is the identity.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np

from .coefficients import Backend, CubicSpec, MaterialParams
from .dynamics import SettlingScenario
from .errors import ValidationError

#: Default sample count over [0, t_f].
DEFAULT_SAMPLES = 2000
#: Default relative tolerance demanded of the step-integrator check.
DEFAULT_ORACLE_TOLERANCE = 1e-9
#: Default relative discriminant band treated as critically damped.
DEFAULT_CRITICAL_BAND = 1e-9

BACKENDS: tuple[Backend, ...] = ("paper", "first-principles")


def format_float(value: float) -> str:
    """Shortest decimal string that parses back to the same float."""
    return repr(float(value))


@dataclass(frozen=True)
class NumericsConfig:
    oracle_tolerance: float = DEFAULT_ORACLE_TOLERANCE
    samples: int = DEFAULT_SAMPLES
    backend: Backend = "paper"
    critical_band: float = DEFAULT_CRITICAL_BAND

    def __post_init__(self) -> None:
        if not (self.oracle_tolerance > 0.0 and math.isfinite(self.oracle_tolerance)):
            raise ValidationError(
                f"oracle_tolerance must be positive and finite, got {self.oracle_tolerance}",
                field="numerics.oracle_tolerance",
            )
        if self.samples < 3:
            raise ValidationError(
                f"samples must be at least 3, got {self.samples}", field="numerics.samples"
            )
        if self.backend not in BACKENDS:
            raise ValidationError(
                f"backend must be one of {BACKENDS}, got {self.backend!r}",
                field="numerics.backend",
            )
        if not (self.critical_band >= 0.0 and math.isfinite(self.critical_band)):
            raise ValidationError(
                f"critical_band must be non-negative and finite, got {self.critical_band}",
                field="numerics.critical_band",
            )


@dataclass(frozen=True)
class OutputConfig:
    directory: str | None = None
    plots: bool = True


@dataclass(frozen=True)
class RunConfig:
    materials: MaterialParams
    cell: CubicSpec
    scenario: SettlingScenario
    numerics: NumericsConfig = NumericsConfig()
    output: OutputConfig = OutputConfig()


_MISSING = object()


class _Block:
    """One JSON object with path-aware typed field extraction."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise ValidationError(f"expected an object, got {type(data).__name__}", field=path)
        self._data = dict(data)
        self._path = path

    def _at(self, key: str) -> str:
        return f"{self._path}.{key}" if self._path else key

    def _take(self, key: str, required: bool) -> Any:
        if key not in self._data:
            if required:
                raise ValidationError("missing required field", field=self._at(key))
            return _MISSING
        return self._data.pop(key)

    def number(self, key: str, required: bool = True, default: float | None = None) -> float | None:
        raw = self._take(key, required)
        if raw is _MISSING:
            return default
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ValidationError(f"expected a number, got {raw!r}", field=self._at(key))
        return float(raw)

    def integer(self, key: str, required: bool = True, default: int | None = None) -> int | None:
        raw = self._take(key, required)
        if raw is _MISSING:
            return default
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ValidationError(f"expected an integer, got {raw!r}", field=self._at(key))
        return raw

    def string(self, key: str, required: bool = True, default: str | None = None) -> str | None:
        raw = self._take(key, required)
        if raw is _MISSING:
            return default
        if not isinstance(raw, str):
            raise ValidationError(f"expected a string, got {raw!r}", field=self._at(key))
        return raw

    def boolean(self, key: str, required: bool = True, default: bool | None = None) -> bool | None:
        raw = self._take(key, required)
        if raw is _MISSING:
            return default
        if not isinstance(raw, bool):
            raise ValidationError(f"expected a boolean, got {raw!r}", field=self._at(key))
        return raw

    def nullable_string(self, key: str) -> str | None:
        raw = self._take(key, required=False)
        if raw is _MISSING or raw is None:
            return None
        if not isinstance(raw, str):
            raise ValidationError(f"expected a string or null, got {raw!r}", field=self._at(key))
        return raw

    def sub(self, key: str) -> "_Block":
        return _Block(self._take(key, True), self._at(key))

    def has(self, key: str) -> bool:
        return key in self._data

    def finish(self) -> None:
        if self._data:
            raise ValidationError("unknown field", field=self._at(sorted(self._data)[0]))


def _rewrap(exc: ValidationError, path: str) -> ValidationError:
    # domain-type errors know the offending field at best; prefix the block
    return ValidationError(exc.message, field=f"{path}.{exc.field}" if exc.field else path)


def parse_config(data: Any) -> RunConfig:
    """Validate one decoded JSON object into a RunConfig."""
    root = _Block(data, "")
    mats_block = root.sub("materials")
    mats_kwargs = {
        key: mats_block.number(key)
        for key in ("rho_s", "rho_f", "lambda_s", "mu_s", "mu_tilde_s", "mu_tilde_f")
    }
    mats_block.finish()
    try:
        materials = MaterialParams(**mats_kwargs)
    except ValidationError as exc:
        raise _rewrap(exc, "materials") from None

    cell_block = root.sub("cell")
    cell_kwargs = {key: cell_block.number(key) for key in ("l0", "g", "h")}
    cell_block.finish()
    try:
        cell = CubicSpec(**cell_kwargs)
    except ValidationError as exc:
        raise _rewrap(exc, "cell") from None

    scen_block = root.sub("scenario")
    eta = scen_block.number("eta")
    t0 = scen_block.number("t0")
    t_f = scen_block.number("t_f")
    extents = tuple(scen_block.number(key) for key in ("L1", "L2", "L3"))
    scen_block.finish()
    try:
        scenario = SettlingScenario(eta=eta, t0=t0, t_f=t_f, extents=extents)
    except ValidationError as exc:
        raise _rewrap(exc, "scenario") from None

    if root.has("numerics"):
        num_block = root.sub("numerics")
        numerics = NumericsConfig(
            oracle_tolerance=num_block.number(
                "oracle_tolerance", required=False, default=DEFAULT_ORACLE_TOLERANCE
            ),
            samples=num_block.integer("samples", required=False, default=DEFAULT_SAMPLES),
            backend=num_block.string("backend", required=False, default="paper"),
            critical_band=num_block.number(
                "critical_band", required=False, default=DEFAULT_CRITICAL_BAND
            ),
        )
        num_block.finish()
    else:
        numerics = NumericsConfig()

    if root.has("output"):
        out_block = root.sub("output")
        output = OutputConfig(
            directory=out_block.nullable_string("directory"),
            plots=out_block.boolean("plots", required=False, default=True),
        )
        out_block.finish()
    else:
        output = OutputConfig()

    root.finish()
    return RunConfig(
        materials=materials, cell=cell, scenario=scenario, numerics=numerics, output=output
    )


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a JSON run file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}") from None
    return parse_config(data)


def config_to_dict(config: RunConfig) -> dict:
    m = config.materials
    return {
        "materials": {
            "rho_s": m.rho_s,
            "rho_f": m.rho_f,
            "lambda_s": m.lambda_s,
            "mu_s": m.mu_s,
            "mu_tilde_s": m.mu_tilde_s,
            "mu_tilde_f": m.mu_tilde_f,
        },
        "cell": {"l0": config.cell.l0, "g": config.cell.g, "h": config.cell.h},
        "scenario": {
            "eta": config.scenario.eta,
            "t0": config.scenario.t0,
            "t_f": config.scenario.t_f,
            "L1": config.scenario.extents[0],
            "L2": config.scenario.extents[1],
            "L3": config.scenario.extents[2],
        },
        "numerics": {
            "oracle_tolerance": config.numerics.oracle_tolerance,
            "samples": config.numerics.samples,
            "backend": config.numerics.backend,
            "critical_band": config.numerics.critical_band,
        },
        "output": {"directory": config.output.directory, "plots": config.output.plots},
    }


def dumps_config(config: RunConfig) -> str:
    # json emits the shortest round-tripping decimal per float
    return json.dumps(config_to_dict(config), indent=2) + "\n"


def save_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(dumps_config(config))


SWEEPABLE: tuple[str, ...] = (
    "l0", "g", "h", "rho_s", "rho_f", "lambda_s", "mu_s", "mu_tilde_s", "mu_tilde_f"
)
_CELL_PARAMS = ("l0", "g", "h")

SweepScale = Literal["linear", "log"]


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter grid over a cell or material constant."""

    param: str
    lo: float
    hi: float
    count: int
    scale: SweepScale = "linear"

    def __post_init__(self) -> None:
        if self.param not in SWEEPABLE:
            raise ValidationError(
                f"unknown sweep parameter {self.param!r}; choose one of {', '.join(SWEEPABLE)}",
                field="sweep.param",
            )
        if self.count < 2:
            raise ValidationError(
                f"count must be at least 2, got {self.count}", field="sweep.count"
            )
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError(
                f"grid bounds must be finite, got [{self.lo}, {self.hi}]", field="sweep"
            )
        if not self.lo < self.hi:
            raise ValidationError(
                f"min must be below max, got [{self.lo}, {self.hi}]", field="sweep"
            )
        if self.scale not in ("linear", "log"):
            raise ValidationError(
                f"scale must be linear or log, got {self.scale!r}", field="sweep.scale"
            )
        if self.scale == "log" and self.lo <= 0.0:
            raise ValidationError(
                f"log grids need a positive min, got {self.lo}", field="sweep"
            )

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.count)
        return np.linspace(self.lo, self.hi, self.count)

    def apply(self, config: RunConfig, value: float) -> RunConfig:
        """Config with the swept parameter replaced; revalidates pointwise."""
        if self.param in _CELL_PARAMS:
            cell = dataclasses.replace(config.cell, **{self.param: value})
            return dataclasses.replace(config, cell=cell)
        materials = dataclasses.replace(config.materials, **{self.param: value})
        return dataclasses.replace(config, materials=materials)
