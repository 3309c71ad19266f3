"""
Hubbard 모델의 시간 전개와 dark-state 추적
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import eigh

from ..config import DEFAULT_NUMERICS, DEFAULT_SPECTRAL, NumericsConfig, SpectralConfig
from ..errors import DomainError, StepSizeError
from ..models import DarkStateTrack, TrajectoryParams
from ..progress import ProgressTracker
from .base import BaseHubbardModel
from .factory import ModelKind, get_hubbard_model
from .rates import RateTable

logger = logging.getLogger(__name__)

_CHUNK = 4096


# ============================================================
# 행렬 (연산 단위 진입점)
# ============================================================
def build_bose_matrix(t: float, traj: TrajectoryParams, E_g: float, cotunneling: bool = True,
                      rates: Optional[RateTable] = None) -> np.ndarray:
    """6×6 H_B(t)"""
    return get_hubbard_model(ModelKind.BOSE, E_g, traj, cotunneling, rates).matrix(t)


def build_fermi_matrix(t: float, traj: TrajectoryParams, E_g: float, cotunneling: bool = True,
                       rates: Optional[RateTable] = None) -> np.ndarray:
    """9×9 H_F(t)"""
    return get_hubbard_model(ModelKind.FERMI, E_g, traj, cotunneling, rates).matrix(t)


# ============================================================
# 시간 전개
# ============================================================
@dataclass
class HubbardEvolution:
    times: np.ndarray
    populations: np.ndarray         # (len(times), dim), 열 순서 = model.basis
    final_state: np.ndarray
    norm_drift: float
    labels: List[str]


def evolve_hubbard(model: BaseHubbardModel, psi0: np.ndarray, dt: float = 0.1,
                   n_records: int = 1001,
                   numerics: NumericsConfig = DEFAULT_NUMERICS,
                   tracker: Optional[ProgressTracker] = None) -> HubbardEvolution:
    """
    ψ(0) → ψ(T), step 마다 중간 시각 H 의 정확한 지수 exp(-i H dt) (고유분해)

    Args:
        model: Hubbard 모델 (궤적 포함)
        psi0: 정규화된 Fock 벡터
        dt: 최대 step
        n_records: 기록할 시각 수 (양 끝 포함)

    Returns:
        HubbardEvolution (Fock 상태별 점유 확률 시계열)
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    if psi.shape != (model.dimension,):
        raise DomainError(f"state must have dimension {model.dimension}, got {psi.shape}")
    norm0 = float(np.vdot(psi, psi).real)
    if abs(norm0 - 1.0) > 1e-10:
        raise DomainError(f"initial state is not normalized (‖ψ‖² = {norm0})")

    T = model.traj.T
    n_steps = max(1, math.ceil(T / dt - 1e-9))
    dt = T / n_steps
    record_every = max(1, n_steps // max(1, n_records - 1))

    times = [0.0]
    pops = [np.abs(psi) ** 2]
    logger.info(f"[Hubbard] evolve {model!r} steps={n_steps} dt={dt:.4f}")
    for start in range(0, n_steps, _CHUNK):
        stop = min(start + _CHUNK, n_steps)
        t_mid = (np.arange(start, stop) + 0.5) * dt
        w, v = np.linalg.eigh(model.matrix_stack(t_mid))
        phases = np.exp(-1j * dt * w)
        for k in range(stop - start):
            vk = v[k]
            psi = vk @ (phases[k] * (vk.T @ psi))
            step = start + k + 1
            if step % record_every == 0 or step == n_steps:
                times.append(step * dt)
                pops.append(np.abs(psi) ** 2)
        if tracker:
            tracker.update(stop / n_steps, "hubbard", f"t={stop * dt:.1f}/{T:g}")

    drift = abs(float(np.vdot(psi, psi).real) - norm0)
    if drift > numerics.norm_drift_tol:
        raise StepSizeError("norm drift exceeds tolerance, reduce dt",
                            details={"drift": drift, "dt": dt})
    return HubbardEvolution(times=np.array(times), populations=np.array(pops),
                            final_state=psi, norm_drift=drift, labels=model.labels)


def fock_vector(model: BaseHubbardModel, index: int) -> np.ndarray:
    e = np.zeros(model.dimension)
    e[index] = 1.0
    return e


# ============================================================
# Dark state 추적
# ============================================================
def degenerate_clusters(energies: np.ndarray, tol: float) -> List[np.ndarray]:
    """오름차순 에너지를 간격 < tol 인 연속 묶음으로 나눈 인덱스 목록"""
    groups, current = [], [0]
    for i in range(1, len(energies)):
        if energies[i] - energies[i - 1] < tol:
            current.append(i)
        else:
            groups.append(np.array(current))
            current = [i]
    groups.append(np.array(current))
    return groups


def continue_eigenvector(H: np.ndarray, previous: np.ndarray,
                         spectral: SpectralConfig = DEFAULT_SPECTRAL) -> Tuple[np.ndarray, float, float, bool]:
    """
    이전 벡터와 가장 많이 겹치는 고유공간으로 연속

    수치적으로 축퇴된 묶음 (|ΔE| < degeneracy_tol) 에서는 이전 벡터를 그 고유공간에 사영한다.

    Returns:
        (새 벡터, 에너지, 겹침 크기, 모호 여부)
    """
    w, v = eigh(H)
    groups = degenerate_clusters(w, spectral.degeneracy_tol)
    weights = np.array([np.linalg.norm(v[:, g].T @ previous) for g in groups])
    order = np.argsort(weights)[::-1]
    best = groups[order[0]]
    ambiguous = len(groups) > 1 and weights[order[0]] - weights[order[1]] < spectral.ambiguity_tol
    sub = v[:, best]
    vec = sub @ (sub.T @ previous)
    vec = vec / np.linalg.norm(vec)
    return vec, float(np.mean(w[best])), float(weights[order[0]]), bool(ambiguous)


def dark_state_of(model: BaseHubbardModel, n_slices: int = 2001,
                  spectral: SpectralConfig = DEFAULT_SPECTRAL) -> DarkStateTrack:
    """
    t=0 의 |L⟩ 에서 시작해 연속된 고유상태를 따라가고 t=T 에서 |R⟩ 에 도달하는지 판정

    모호한 연속은 경고로 기록 (치명적이지 않음).
    """
    times = np.linspace(0.0, model.traj.T, n_slices)
    prev = fock_vector(model, model.left_state)
    energies, coefficients, warnings = [], [], []
    for t in times:
        vec, energy, weight, ambiguous = continue_eigenvector(model.matrix(t), prev, spectral)
        if ambiguous:
            warnings.append(float(t))
            logger.warning(f"[DarkState] ambiguous continuation at t={t:.2f} ({model.MODEL_TYPE})")
        elif weight < spectral.overlap_warn:
            logger.warning(f"[DarkState] weak continuation overlap {weight:.3f} at t={t:.2f}")
        if vec @ prev < 0:
            vec = -vec
        energies.append(energy)
        coefficients.append(vec.tolist())
        prev = vec
    final_pop = float(prev[model.right_state] ** 2)
    reaches = final_pop > spectral.target_population
    logger.info(f"[DarkState] {model!r}: final |R⟩ population {final_pop:.4f} → "
                f"{'track reaches |R⟩' if reaches else 'no |L⟩→|R⟩ track'}")
    return DarkStateTrack(times=times.tolist(), energies=energies, coefficients=coefficients,
                          reaches_target=reaches, final_target_population=final_pop,
                          degeneracy_warnings=warnings)
