"""JSON run configuration: loading, validation, defaults and round-tripping."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from vspm.actuation import StrokeProfile
from vspm.errors import ConfigError
from vspm.experiments import SweepGrid
from vspm.hydrodynamics import FluidEnvironment, PaddleGeometry
from vspm.kinematics import FORMULAS, ChainGeometry
from vspm.thermal import HeaterSpec, JointStiffness, ThermalJointState, calibrate_thermal
from vspm.vehicle import BodyModel, SimulationConfig, config_digest

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ThermalConfig:
    """Heater, lumped joint and trace settings.

    Leaving ``heat_capacity_JpK`` and ``loss_coeff_WpK`` null calibrates them
    so heating from ``initial_C`` reaches ``target_C`` at ``target_time_s``
    with a steady state of ``steady_C``.
    """

    current_A: float = 1.0
    resistance_ohm: float = 10.0
    duty: float = 1.0
    initial_C: float = 10.0
    ambient_C: float = 10.0
    melt_C: float = 30.0
    heat_capacity_JpK: Optional[float] = None
    loss_coeff_WpK: Optional[float] = None
    steady_C: float = 50.0
    target_C: float = 40.0
    target_time_s: float = 200.0
    latent_heat_J: float = 0.0
    k_rigid_NmmPdeg: float = 500.0
    k_soft_NmmPdeg: float = 50.0
    duration_s: float = 300.0
    dt_s: float = 0.1

    def __post_init__(self):
        self.heater()
        self.stiffness()
        if (self.heat_capacity_JpK is None) != (self.loss_coeff_WpK is None):
            raise ConfigError("set both heat_capacity_JpK and loss_coeff_WpK, or neither")
        if not self.duration_s > 0 or not self.dt_s > 0:
            raise ConfigError("thermal duration_s and dt_s must be > 0")

    def heater(self):
        return HeaterSpec(self.current_A, self.resistance_ohm, self.duty)

    def stiffness(self):
        return JointStiffness(self.k_rigid_NmmPdeg, self.k_soft_NmmPdeg)

    def lumped_parameters(self):
        """``(heat_capacity, loss_coeff)``, calibrating against full heater power if unset."""
        if self.heat_capacity_JpK is not None:
            return self.heat_capacity_JpK, self.loss_coeff_WpK
        # calibrate at duty 1 so a duty=0 run still has a well-defined model
        fit = calibrate_thermal(
            replace(self.heater(), duty=1.0),
            start_C=self.initial_C,
            target_C=self.target_C,
            target_time_s=self.target_time_s,
            steady_C=self.steady_C,
            ambient_C=self.ambient_C,
        )
        return fit.heat_capacity_JpK, fit.loss_coeff_WpK

    def initial_state(self):
        cap, loss = self.lumped_parameters()
        return ThermalJointState(
            temp_C=self.initial_C,
            heat_capacity_JpK=cap,
            loss_coeff_WpK=loss,
            ambient_C=self.ambient_C,
            melt_C=self.melt_C,
            latent_heat_J=self.latent_heat_J,
        )


@dataclass(frozen=True)
class SweepConfig:
    amplitudes_deg: tuple = SweepGrid().amplitudes_deg
    frequencies_hz: tuple = SweepGrid().frequencies_hz
    offsets_deg: tuple = SweepGrid().offsets_deg
    accel_modes: tuple = SweepGrid().accel_modes
    repeats: int = 1
    duration_s: float = 10.0
    dt_s: float = 1e-3

    def __post_init__(self):
        for name in ("amplitudes_deg", "frequencies_hz", "offsets_deg", "accel_modes"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.grid()
        if not self.duration_s > 0 or not 0 < self.dt_s <= 0.01:
            raise ConfigError("sweep duration_s must be > 0 and dt_s in (0, 0.01]")

    def grid(self):
        return SweepGrid(self.amplitudes_deg, self.frequencies_hz, self.offsets_deg, self.accel_modes, self.repeats)


SECTIONS = {
    "geometry": ChainGeometry,
    "paddle": PaddleGeometry,
    "environment": FluidEnvironment,
    "body": BodyModel,
    "profile": StrokeProfile,
    "thermal": ThermalConfig,
    "sweep": SweepConfig,
}


@dataclass(frozen=True)
class RunConfig:
    geometry: ChainGeometry = field(default_factory=ChainGeometry)
    paddle: PaddleGeometry = field(default_factory=PaddleGeometry)
    environment: FluidEnvironment = field(default_factory=FluidEnvironment)
    body: BodyModel = field(default_factory=BodyModel)
    profile: StrokeProfile = field(default_factory=StrokeProfile)
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    formula: str = "exact"
    schema_version: int = SCHEMA_VERSION

    def simulation(self) -> SimulationConfig:
        return SimulationConfig(self.geometry, self.paddle, self.environment, self.body, self.profile, self.formula)

    def with_simulation(self, sim: SimulationConfig) -> "RunConfig":
        return replace(
            self,
            geometry=sim.geometry,
            paddle=sim.paddle,
            environment=sim.environment,
            body=sim.body,
            profile=sim.profile,
            formula=sim.formula,
        )

    def to_dict(self):
        out = {"schema_version": self.schema_version, "formula": self.formula}
        for name in SECTIONS:
            section = asdict(getattr(self, name))
            out[name] = {k: list(v) if isinstance(v, tuple) else v for k, v in section.items()}
        return out

    def digest(self):
        return config_digest(self.to_dict())


def _build_section(name, cls, data):
    if not isinstance(data, dict):
        raise ConfigError(f"{name}: expected an object, got {type(data).__name__}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"{name}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def config_from_dict(data) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    allowed = set(SECTIONS) | {"schema_version", "formula"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level key(s) {', '.join(unknown)}")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION or isinstance(version, bool):
        raise ConfigError(f"schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION})")
    formula = data.get("formula", "exact")
    if formula not in FORMULAS:
        raise ConfigError(f"formula: expected one of {FORMULAS}, got {formula!r}")
    sections = {name: _build_section(name, cls, data.get(name, {})) for name, cls in SECTIONS.items()}
    return RunConfig(**sections, formula=formula, schema_version=version)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def dump_config(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n"
