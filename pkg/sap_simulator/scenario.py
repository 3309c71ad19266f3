"""
시나리오 설정 (YAML) + preset + --set 덮어쓰기 + 정적 검증

사용법:
    scenario = load_scenario("my.yaml", overrides=["physics.E_g=1.25"])
    scenario = load_scenario(preset="fig6a")
"""
import hashlib
import json
import logging
import os
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from .busch_model import resolve_interaction
from .config import NumericsConfig, RateTableConfig, SpectralConfig
from .errors import ConfigError, SapError
from .models import Grid2D, InteractionPoint, RampShape, TrajectoryParams

logger = logging.getLogger(__name__)

PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")


class RunMode(str, Enum):
    TRAJECTORY = "trajectory"
    SWEEP_FIDELITY = "sweep-fidelity"
    SPECTRUM = "spectrum"
    HUBBARD_RUN = "hubbard-run"
    TRANSITIONS = "transitions"
    RATES = "rates"


class ModelChoice(str, Enum):
    EXACT = "exact"
    BOSE = "bose"
    FERMI = "fermi"
    THREE_MODE = "three-mode"


# ============================================================
# 시나리오 스키마
# ============================================================
class TrajectorySpec(BaseModel):
    d_max: float = 9.0
    d_min: float = 3.0
    delay_fraction: float = Field(0.1, gt=0, lt=0.5)    # delay = fraction × T
    ramp: RampShape = RampShape.RAISED_COSINE

    @model_validator(mode="after")
    def _check(self) -> "TrajectorySpec":
        if not (0 < self.d_min < self.d_max):
            raise ValueError(f"require 0 < d_min < d_max (got d_min={self.d_min}, d_max={self.d_max})")
        return self


class SweepSpec(BaseModel):
    """np.linspace(start, stop, num)"""
    start: float
    stop: float
    num: int = Field(..., ge=1)

    def values(self) -> List[float]:
        return [float(v) for v in np.linspace(self.start, self.stop, self.num)]


class PhysicsSpec(BaseModel):
    E_g: Optional[float] = None
    g: Optional[float] = None
    E_g_values: Optional[List[float]] = None
    E_g_sweep: Optional[SweepSpec] = None
    T: float = Field(4000.0, gt=0)
    T_values: Optional[List[float]] = None
    trajectory: TrajectorySpec = Field(default_factory=TrajectorySpec)

    @model_validator(mode="after")
    def _check(self) -> "PhysicsSpec":
        if self.E_g is not None and self.g is not None:
            raise ValueError("give exactly one of E_g / g")
        if self.E_g_values is not None and self.E_g_sweep is not None:
            raise ValueError("give either E_g_values or E_g_sweep, not both")
        for E in self.energies():
            if not (1.0 <= E < 2.0):
                raise ValueError(f"E_g must lie in [1, 2), got {E}")
        if self.g is not None and self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")
        if any(T <= 0 for T in self.T_values or []):
            raise ValueError("T_values must be positive")
        return self

    def energies(self) -> List[float]:
        """스윕 대상 E_g 목록 (단일 점이면 한 개)"""
        if self.E_g_values is not None:
            return [float(v) for v in self.E_g_values]
        if self.E_g_sweep is not None:
            return self.E_g_sweep.values()
        if self.E_g is not None:
            return [float(self.E_g)]
        return []

    def durations(self) -> List[float]:
        return sorted(float(T) for T in self.T_values) if self.T_values else [float(self.T)]

    def trajectory_params(self, T: Optional[float] = None) -> TrajectoryParams:
        T = float(self.T if T is None else T)
        tr = self.trajectory
        return TrajectoryParams(T=T, d_max=tr.d_max, d_min=tr.d_min, delay=tr.delay_fraction * T, ramp=tr.ramp)


class NumericsSpec(BaseModel):
    grid: Grid2D = Field(default_factory=Grid2D)
    dt: float = Field(0.02, gt=0)                 # 정확한 전파 step
    k: int = Field(12, ge=1)                      # 고유쌍 수
    n_slices: int = Field(41, ge=2)               # 스펙트럼 시각 수
    hubbard_dt: float = Field(0.1, gt=0)
    n_records: int = Field(1001, ge=2)            # Hubbard 점유 기록 수
    trajectory_samples: int = Field(401, ge=2)
    checkpoint_every: Optional[float] = Field(None, gt=0)
    tolerances: NumericsConfig = Field(default_factory=NumericsConfig)
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)
    rates: RateTableConfig = Field(default_factory=RateTableConfig)


class FlagsSpec(BaseModel):
    cotunneling: bool = True
    model: ModelChoice = ModelChoice.EXACT


class OutputSpec(BaseModel):
    directory: Optional[str] = None
    formats: List[str] = Field(default_factory=lambda: ["csv", "json"])


class Scenario(BaseModel):
    name: str = "scenario"
    description: str = ""
    mode: RunMode
    physics: PhysicsSpec = Field(default_factory=PhysicsSpec)
    numerics: NumericsSpec = Field(default_factory=NumericsSpec)
    flags: FlagsSpec = Field(default_factory=FlagsSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    @model_validator(mode="after")
    def _check_mode(self) -> "Scenario":
        p = self.physics
        single = self.mode in (RunMode.SPECTRUM, RunMode.HUBBARD_RUN, RunMode.RATES)
        if single and (p.E_g is None) == (p.g is None):
            raise ValueError(f"mode '{self.mode.value}' needs exactly one of physics.E_g / physics.g")
        if self.mode in (RunMode.SWEEP_FIDELITY, RunMode.TRANSITIONS) and not (p.energies() or p.g is not None):
            raise ValueError(f"mode '{self.mode.value}' needs E_g, g, E_g_values or E_g_sweep")
        if self.mode == RunMode.HUBBARD_RUN and self.flags.model == ModelChoice.EXACT:
            raise ValueError("hubbard-run needs flags.model in {bose, fermi, three-mode}")
        if self.mode == RunMode.TRANSITIONS and self.flags.model == ModelChoice.THREE_MODE:
            raise ValueError("transitions are defined for exact, bose and fermi models")
        for fmt in self.output.formats:
            if fmt not in ("csv", "json"):
                raise ValueError(f"unknown output format: {fmt}")
        return self

    def interaction(self) -> Dict[str, float]:
        """단일 점 (E_g, g) 해석"""
        E_g, g = resolve_interaction(E_g=self.physics.E_g, g=self.physics.g)
        return InteractionPoint(E_g=E_g, g=g).model_dump()

    def energies(self) -> List[float]:
        values = self.physics.energies()
        if not values and self.physics.g is not None:
            values = [self.interaction()["E_g"]]
        return values

    def scenario_hash(self) -> str:
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ============================================================
# 로드 / 덮어쓰기
# ============================================================
def list_presets() -> List[str]:
    if not os.path.isdir(PRESET_DIR):
        return []
    return sorted(f[:-5] for f in os.listdir(PRESET_DIR) if f.endswith(".yaml"))


def preset_path(name: str) -> str:
    path = os.path.join(PRESET_DIR, f"{name}.yaml")
    if not os.path.exists(path):
        raise ConfigError(f"unknown preset '{name}'", details={"available": list_presets()})
    return path


def _read_yaml(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}", details={"path": path})
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}", details={"path": path})
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping: {path}", details={"path": path})
    return data


def _merge(base: Dict[str, Any], extra: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def apply_override(data: Dict[str, Any], assignment: str) -> Dict[str, Any]:
    """
    "a.b.c=value" 를 트리에 적용 (value 는 YAML scalar 규칙으로 해석)

    Returns:
        수정된 새 dict
    """
    if "=" not in assignment:
        raise ConfigError(f"override must look like key=value, got '{assignment}'")
    key, raw = assignment.split("=", 1)
    parts = [p for p in key.strip().split(".") if p]
    if not parts:
        raise ConfigError(f"empty override key in '{assignment}'")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse override value '{raw}': {e}")
    patch: Dict[str, Any] = {parts[-1]: value}
    for part in reversed(parts[:-1]):
        patch = {part: patch}
    return _merge(data, patch)


def load_scenario(path: Optional[str] = None, preset: Optional[str] = None,
                  overrides: Sequence[str] = (), mode: Optional[str] = None) -> Scenario:
    """
    preset → 파일 → --set 순서로 병합해 Scenario 생성

    Args:
        path: YAML 파일
        preset: presets/ 안의 이름
        overrides: "a.b=value" 목록
        mode: CLI 에서 지정한 mode (파일 값보다 우선)

    Returns:
        검증된 Scenario
    """
    data: Dict[str, Any] = {}
    if preset:
        data = _merge(data, _read_yaml(preset_path(preset)))
    if path:
        data = _merge(data, _read_yaml(path))
    for assignment in overrides:
        data = apply_override(data, assignment)
    if mode is not None:
        if data.get("mode") not in (None, mode):
            logger.info(f"[Config] mode '{data['mode']}' overridden by command line '{mode}'")
        data["mode"] = mode
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ConfigError("scenario failed validation",
                          details={"errors": [{"loc": ".".join(str(x) for x in err["loc"]), "msg": err["msg"]}
                                              for err in e.errors()]})


# ============================================================
# 정적 검증 (+ 선택적 probe)
# ============================================================
def validate_scenario(scenario: Scenario, probe: bool = False) -> Dict[str, Any]:
    """
    범위/해상도/격자 포함 여부 검사. probe=True 면 rate table 한 점과 고유 slice 하나를 계산.

    Returns:
        {"ok": bool, "errors": [...], "warnings": [...], "resolved": {...}, "probes": {...}}
    """
    from .exact_dynamics import check_grid, lowest_eigenpairs, protocol_extent
    from .hubbard import cotunneling_rate, single_particle_rate
    from .models import ExactControls

    errors: List[str] = []
    warnings: List[str] = []
    resolved: Dict[str, Any] = {"mode": scenario.mode.value, "model": scenario.flags.model.value}
    probes: Dict[str, Any] = {}
    p, nm = scenario.physics, scenario.numerics

    try:
        points = [dict(zip(("E_g", "g"), resolve_interaction(E_g=E))) for E in p.energies()]
        if not points and p.g is not None:
            points = [scenario.interaction()]
        resolved["interaction"] = points
    except SapError as e:
        errors.append(f"interaction: {e}")
        points = []

    traj = None
    try:
        traj = p.trajectory_params()
        resolved["trajectory"] = traj.model_dump(mode="json")
        resolved["T_values"] = p.durations()
    except (ValueError, ValidationError) as e:
        errors.append(f"trajectory: {e}")

    uses_grid = scenario.flags.model == ModelChoice.EXACT and scenario.mode in (
        RunMode.SWEEP_FIDELITY, RunMode.SPECTRUM, RunMode.TRANSITIONS)
    if traj is not None and uses_grid:
        try:
            check_grid(nm.grid, protocol_extent(traj), nm.tolerances)
            resolved["grid"] = {**nm.grid.model_dump(), "h": nm.grid.h}
        except SapError as e:
            errors.append(f"grid: {e} {e.details}")

    if traj is not None and scenario.flags.model != ModelChoice.EXACT and \
            (traj.d_min < nm.rates.d_lo or traj.d_max > nm.rates.d_hi):
        warnings.append("trajectory extends the default rate-table range, the table will be widened")

    if probe and not errors and traj is not None:
        try:
            g0 = points[0]["g"] if points else 0.0
            probes["omega_d_min"] = single_particle_rate(traj.d_min)
            probes["omega_co_d_min"] = cotunneling_rate(traj.d_min, g0)
            if uses_grid:
                controls = ExactControls(g=g0, traj=traj, grid=nm.grid)
                eig = lowest_eigenpairs(0.0, min(nm.k, 4), controls, nm.tolerances, retain_states=False)
                probes["eigenvalues_t0"] = [float(e) for e in eig.energies]
                probes["max_residual"] = float(np.max(eig.residuals))
        except SapError as e:
            errors.append(f"probe: {e}")

    report = {"ok": not errors, "errors": errors, "warnings": warnings,
              "resolved": resolved, "probes": probes, "scenario_hash": scenario.scenario_hash()}
    level = logging.INFO if report["ok"] else logging.ERROR
    logger.log(level, f"[Validate] {scenario.name}: {'ok' if report['ok'] else f'{len(errors)} error(s)'}")
    return report
