"""
Piecewise-harmonic triple well 과 SAP 트랩 이동 스케줄

- 가운데 트랩은 x = 0 에 고정
- 오른쪽 트랩이 먼저 접근 (counterintuitive ordering, Ω_MR ≫ Ω_LM 에서 시작)
- 왼쪽 트랩 스케줄 = 오른쪽 스케줄을 delay 만큼 늦춘 것
"""
import logging
from typing import List, Tuple, Union

import numpy as np

from .errors import DomainError
from .models import RampShape, TrajectoryParams, TrapLayout

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# 부동소수 경계 허용치 (t = T 근처 반올림)
_T_EPS = 1e-9


def pulse(u: ArrayLike, ramp: RampShape = RampShape.RAISED_COSINE) -> ArrayLike:
    """
    접근-후퇴 펄스 모양 f(u), u ∈ [0, 1]

    f(0) = f(1) = 0, f(1/2) = 1, 세 점 모두 기울기 0.
    구간 밖은 0.
    """
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    uc = np.clip(u, 0.0, 1.0)
    if ramp == RampShape.RAISED_COSINE:
        f = np.sin(np.pi * uc) ** 2
    elif ramp == RampShape.SMOOTHERSTEP:
        # 반쪽마다 quintic smoothstep: 0 → 1 → 0
        s = 1.0 - np.abs(2.0 * uc - 1.0)
        f = s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)
    else:
        raise DomainError(f"unknown ramp: {ramp}")
    f = np.where(inside, f, 0.0)
    return float(f) if f.ndim == 0 else f


def separations_at(t: ArrayLike, p: TrajectoryParams) -> Tuple[ArrayLike, ArrayLike]:
    """(d_M - d_L, d_R - d_M) 를 시각 t 에서 반환 (벡터화)"""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < -_T_EPS * p.T) or np.any(t_arr > p.T * (1 + _T_EPS)):
        raise DomainError(f"t outside [0, T={p.T}]", details={"t": np.atleast_1d(t_arr).tolist()[:5]})
    span = p.T - p.delay
    depth = p.d_max - p.d_min
    s_right = p.d_max - depth * pulse(t_arr / span, p.ramp)
    s_left = p.d_max - depth * pulse((t_arr - p.delay) / span, p.ramp)
    return s_left, s_right


def positions_at(t: float, p: TrajectoryParams) -> TrapLayout:
    """시각 t 의 세 우물 최소점 위치"""
    s_left, s_right = separations_at(t, p)
    return TrapLayout(d_L=-float(s_left), d_M=0.0, d_R=float(s_right))


def potential(x: ArrayLike, layout: TrapLayout) -> ArrayLike:
    """V(x) = min_j ½(x - d_j)² (모든 진동수 1)"""
    x = np.asarray(x, dtype=float)
    v = np.minimum(
        np.minimum(0.5 * (x - layout.d_L) ** 2, 0.5 * (x - layout.d_M) ** 2),
        0.5 * (x - layout.d_R) ** 2,
    )
    return float(v) if v.ndim == 0 else v


def closest_approach_times(p: TrajectoryParams) -> Tuple[float, float]:
    """(오른쪽 최근접 시각, 왼쪽 최근접 시각)"""
    t_right = 0.5 * (p.T - p.delay)
    return t_right, t_right + p.delay


def trajectory_table(p: TrajectoryParams, n_samples: int = 401) -> List[List[float]]:
    """CSV 덤프용 [t, d_L, d_M, d_R] 행 목록"""
    times = np.linspace(0.0, p.T, n_samples)
    s_left, s_right = separations_at(times, p)
    logger.debug(f"[Trajectory] {n_samples} samples, ramp={p.ramp.value}, T={p.T}")
    return [[float(t), -float(sl), 0.0, float(sr)] for t, sl, sr in zip(times, s_left, s_right)]
