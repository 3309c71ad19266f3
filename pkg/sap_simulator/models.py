"""
SAP 시뮬레이터 도메인 모델 (pydantic)

단위: ℏ = m = ω = 1 (무차원). 위치는 조화진동자 길이 단위.
"""
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator


# --- Trap geometry ---
class RampShape(str, Enum):
    RAISED_COSINE = "raised_cosine"   # sin² 펄스 (기본값)
    SMOOTHERSTEP = "smootherstep"     # 5차 smoothstep, 양 끝/최근접에서 1·2차 미분 0


class TrapLayout(BaseModel):
    d_L: float
    d_M: float
    d_R: float

    @property
    def separations(self) -> Tuple[float, float]:
        """(d_M - d_L, d_R - d_M)"""
        return self.d_M - self.d_L, self.d_R - self.d_M


class TrajectoryParams(BaseModel):
    T: float = Field(..., gt=0)                 # 전체 시간 (1/ω)
    d_max: float = 9.0                          # 초기/최종 간격
    d_min: float = 3.0                          # 최소 간격
    delay: Optional[float] = None               # 두 접근 사이 지연 (기본 T/10)
    ramp: RampShape = RampShape.RAISED_COSINE

    @model_validator(mode="after")
    def _check(self) -> "TrajectoryParams":
        if self.delay is None:
            self.delay = self.T / 10.0
        if not (0 < self.d_min < self.d_max):
            raise ValueError(f"require 0 < d_min < d_max (got d_min={self.d_min}, d_max={self.d_max})")
        if not (0 < self.delay < self.T / 2):
            raise ValueError(f"require 0 < delay < T/2 (got delay={self.delay}, T={self.T})")
        return self

    def rescaled(self, T: float) -> "TrajectoryParams":
        """같은 모양, 다른 전체 시간 (delay 비율 유지)"""
        return TrajectoryParams(
            T=T, d_max=self.d_max, d_min=self.d_min,
            delay=self.delay * T / self.T, ramp=self.ramp,
        )


# --- Busch relation ---
class InteractionPoint(BaseModel):
    g: float = Field(..., ge=0)    # 1D contact 세기
    E_g: float                     # 단일 우물 두 입자 바닥 에너지


# --- Grid ---
class Grid2D(BaseModel):
    """(x₁, x₂) 정사각 격자. 양 축이 같은 점을 공유한다 (교환 = 전치)."""
    x_min: float = -14.5
    x_max: float = 14.5
    n: int = Field(256, ge=8)

    @model_validator(mode="after")
    def _check(self) -> "Grid2D":
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        return self

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    def covers(self, layout: TrapLayout, margin: float) -> bool:
        return self.x_min <= layout.d_L - margin and self.x_max >= layout.d_R + margin


class ExactControls(BaseModel):
    """정확한 두 입자 계산의 물리/수치 제어값"""
    g: float = Field(..., ge=0)
    traj: TrajectoryParams
    grid: Grid2D = Field(default_factory=Grid2D)
    dt: float = Field(0.02, gt=0)
    frozen_at: Optional[float] = None     # 설정 시 이 시각의 트랩 배치로 고정


# --- Hubbard ---
class RateSet(BaseModel):
    """한 시각의 Hubbard 파라미터"""
    omega_LM: float
    omega_MR: float
    omega1_LM: float = 0.0
    omega1_MR: float = 0.0
    omega_co_LM: float = 0.0
    omega_co_MR: float = 0.0
    U: float
    eps0: float = 0.5
    eps1: float = 1.5


# --- Spectral analysis ---
class CrossingEvent(BaseModel):
    t_c: float                      # gap 최소 시각
    gap: float = Field(..., ge=0)
    track_a: int                    # 보통 dark track
    track_b: int                    # 상대 track
    window: Tuple[float, float]     # 분석 구간 [t_a, t_b]


class TransitionEstimate(BaseModel):
    p: float
    numerator: float
    denominator: float
    window: Tuple[float, float]
    T: float
    clamped: bool = False


class TransitionMapCell(BaseModel):
    E_g: float
    T: float
    crossing_index: int
    estimate: Optional[TransitionEstimate] = None
    error: Optional[str] = None


# --- Fidelity sweep ---
class FidelityRecord(BaseModel):
    E_g: float
    g: float
    T: float
    F: float
    norm_drift: float
    symmetry_violation: float = 0.0
    runtime_seconds: float


class DarkStateTrack(BaseModel):
    """Hubbard 모델 dark-state 연속 추적 결과"""
    times: List[float]
    energies: List[float]
    coefficients: List[List[float]]     # [time][basis]
    reaches_target: bool
    final_target_population: float
    degeneracy_warnings: List[float] = []   # 모호한 연속이 발생한 시각
