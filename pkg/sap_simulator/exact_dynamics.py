"""
정확한 두 입자 문제 (격자)

- H = -½∂²₁ - ½∂²₂ + V(x₁,t) + V(x₂,t) + g δ(x₁-x₂)
- 운동에너지: 주기 3-point 차분. 시간 전파는 같은 연산자의 Fourier 분산 (1-cos kh)/h² 를 쓰는
  Strang split-step (포텐셜은 step 중간 시각에서 평가)
- 고유값: 대칭 sector 희소 행렬 + shift-invert Lanczos
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np
from scipy import fft as sp_fft
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import __version__
from .busch_model import pair_ground_state, resolve_interaction
from .config import DEFAULT_NUMERICS, NumericsConfig
from .errors import ContractError, ConvergenceError, DomainError, GeometryError, ResolutionError, StepSizeError
from .lattice import (
    from_symmetric, inner, kinetic_dispersion, norm2, restrict_symmetric, to_symmetric, two_body_matrix,
)
from .models import ExactControls, FidelityRecord, Grid2D, TrajectoryParams, TrapLayout
from .progress import ProgressTracker
from .store import load_checkpoint, save_checkpoint
from .trap_geometry import positions_at, potential

logger = logging.getLogger(__name__)

SCHEME = "strang-split-step/fd-dispersion"


# ============================================================
# 상태 / 결과 타입
# ============================================================
@dataclass
class WaveFunction2:
    """(x₁, x₂) 격자 위 복소 진폭과 현재 시각"""
    amplitudes: np.ndarray
    t: float
    grid: Grid2D
    norm_drift: float = 0.0             # 마지막 전파 동안의 |‖ψ‖² 변화|
    symmetry_violation: float = 0.0     # 재대칭화 직전 max|ψ - ψᵀ|

    def norm(self) -> float:
        return norm2(self.amplitudes, self.grid.h)

    def overlap(self, other: np.ndarray) -> complex:
        """⟨self|other⟩"""
        return inner(self.amplitudes, other, self.grid.h)


@dataclass
class EigenSlice:
    """
    한 시각의 최저 k 고유쌍

    states 의 열은 직교정규 벡터 (정확한 문제는 대칭 기저 계수, Hubbard 는 Fock 계수).
    """
    t: float
    energies: np.ndarray
    states: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = None

    def grid_state(self, i: int, grid: Grid2D) -> np.ndarray:
        """대칭 기저 고유벡터 → L² 정규화 격자 진폭"""
        if self.states is None:
            raise ContractError("eigenvectors were not retained", details={"t": self.t})
        return from_symmetric(self.states[:, i], grid.n) / grid.h


@dataclass
class CheckpointPolicy:
    stem: str
    every: float                         # 시간 간격
    metadata: Optional[Dict[str, Any]] = None


# ============================================================
# Hamiltonian
# ============================================================
class ExactHamiltonian:
    """한 시각의 트랩 배치에서 ψ ↦ Hψ"""

    def __init__(self, layout: TrapLayout, g: float, grid: Grid2D):
        self.layout = layout
        self.g = g
        self.grid = grid
        self.h = grid.h
        self.v1 = potential(grid.x, layout)
        self.contact = g / self.h

    def apply(self, psi: np.ndarray) -> np.ndarray:
        h2 = self.h * self.h
        lap = (4.0 * psi
               - np.roll(psi, 1, axis=0) - np.roll(psi, -1, axis=0)
               - np.roll(psi, 1, axis=1) - np.roll(psi, -1, axis=1))
        out = lap / (2.0 * h2) + (self.v1[:, None] + self.v1[None, :]) * psi
        idx = np.arange(self.grid.n)
        out[idx, idx] += self.contact * psi[idx, idx]
        return out

    def matrix(self):
        return two_body_matrix(self.v1, self.g, self.h, periodic=True)

    def symmetric_matrix(self):
        return restrict_symmetric(self.matrix(), self.grid.n)

    def expectation(self, psi: np.ndarray) -> float:
        return float(inner(psi, self.apply(psi), self.h).real)


def protocol_extent(traj: TrajectoryParams) -> TrapLayout:
    """프로토콜 전체에서 가장 넓은 배치 (t=0 과 t=T 에서 양쪽 간격이 d_max)"""
    return TrapLayout(d_L=-traj.d_max, d_M=0.0, d_R=traj.d_max)


def check_grid(grid: Grid2D, layout: TrapLayout, numerics: NumericsConfig = DEFAULT_NUMERICS) -> None:
    if not grid.covers(layout, numerics.grid_margin):
        raise GeometryError(
            "grid does not cover the traps with the required margin",
            details={"layout": layout.model_dump(), "margin": numerics.grid_margin,
                     "x_min": grid.x_min, "x_max": grid.x_max},
        )
    if 1.0 / grid.h < numerics.min_points_per_length:
        raise ResolutionError(
            "grid below the resolution floor",
            details={"h": grid.h, "points_per_length": 1.0 / grid.h, "floor": numerics.min_points_per_length},
        )


def _layout(t: float, controls: ExactControls) -> TrapLayout:
    return positions_at(controls.frozen_at if controls.frozen_at is not None else t, controls.traj)


def build_hamiltonian(t: float, g: float, traj: TrajectoryParams, grid: Grid2D,
                      numerics: NumericsConfig = DEFAULT_NUMERICS) -> ExactHamiltonian:
    layout = positions_at(t, traj)
    check_grid(grid, layout, numerics)
    return ExactHamiltonian(layout, g, grid)


def energy_expectation(psi: WaveFunction2, controls: ExactControls) -> float:
    """⟨ψ|H(ψ.t)|ψ⟩"""
    return ExactHamiltonian(_layout(psi.t, controls), controls.g, controls.grid).expectation(psi.amplitudes)


# ============================================================
# 시간 전파
# ============================================================
def propagate(psi: WaveFunction2, t0: float, t1: float, controls: ExactControls,
              numerics: NumericsConfig = DEFAULT_NUMERICS,
              tracker: Optional[ProgressTracker] = None,
              checkpoint: Optional[CheckpointPolicy] = None) -> WaveFunction2:
    """
    ψ(t0) → ψ(t1), 2차 Strang splitting

    Args:
        psi: 정규화된 대칭 초기 상태
        t0, t1: 시작/끝 시각 (t1 > t0)
        controls: g, trajectory, grid, dt (frozen_at 설정 시 정지 트랩)
        numerics: 허용치와 재대칭화 주기
        tracker: 진행률 콜백
        checkpoint: 주기적 저장 정책

    Returns:
        t1 에서의 WaveFunction2 (norm_drift, symmetry_violation 진단 포함)
    """
    if not t1 > t0:
        raise DomainError(f"require t1 > t0 (got {t0}, {t1})")
    grid = controls.grid
    h, n = grid.h, grid.n
    norm0 = psi.norm()
    if abs(norm0 - 1.0) > 1e-6:
        raise DomainError(f"initial state is not normalized (‖ψ‖² = {norm0:.12f})")
    check_grid(grid, protocol_extent(controls.traj) if controls.frozen_at is None
               else _layout(t0, controls), numerics)

    n_steps = max(1, math.ceil((t1 - t0) / controls.dt - 1e-9))
    dt = (t1 - t0) / n_steps
    kin = kinetic_dispersion(n, h)
    kin_phase = np.exp(-1j * dt * (kin[:, None] + kin[None, :]))
    contact_half = np.exp(-0.5j * dt * controls.g / h)
    diag = np.arange(n)
    x = grid.x

    frozen_half = None
    if controls.frozen_at is not None:
        frozen_half = np.exp(-0.5j * dt * potential(x, _layout(t0, controls)))

    a = np.array(psi.amplitudes, dtype=complex, copy=True)
    last_norm = norm0
    max_asym = 0.0
    next_ckpt = t0 + checkpoint.every if checkpoint else math.inf
    logger.info(f"[Propagate] t={t0:.3f}→{t1:.3f} steps={n_steps} dt={dt:.5f} n={n} h={h:.5f} g={controls.g:.6g}")

    for step in range(n_steps):
        t_mid = t0 + (step + 0.5) * dt
        e1 = frozen_half if frozen_half is not None else np.exp(-0.5j * dt * potential(x, _layout(t_mid, controls)))
        a *= e1[:, None]
        a *= e1[None, :]
        a[diag, diag] *= contact_half
        a = sp_fft.ifft2(sp_fft.fft2(a) * kin_phase)
        a *= e1[:, None]
        a *= e1[None, :]
        a[diag, diag] *= contact_half

        done = step + 1
        if done % numerics.symmetrize_every == 0 or done == n_steps:
            max_asym = max(max_asym, float(np.max(np.abs(a - a.T))))
            a = 0.5 * (a + a.T)
            nrm = norm2(a, h)
            if abs(nrm - last_norm) > numerics.step_drift_tol:
                raise StepSizeError(
                    "norm drift exceeds tolerance, reduce dt",
                    details={"t": t0 + done * dt, "dt": dt, "drift": abs(nrm - last_norm),
                             "steps": numerics.symmetrize_every},
                )
            last_norm = nrm
            if tracker:
                tracker.update(done / n_steps, "propagate", f"t={t0 + done * dt:.2f}/{t1:.2f}",
                               details={"norm": nrm})

        t_now = t0 + done * dt
        if checkpoint and t_now >= next_ckpt and done < n_steps:
            save_checkpoint(checkpoint.stem, 0.5 * (a + a.T), t_now, _checkpoint_meta(controls, dt, checkpoint))
            next_ckpt += checkpoint.every

    drift = abs(last_norm - norm0)
    if drift > numerics.norm_drift_tol:
        raise ContractError("norm drift over the run exceeds tolerance",
                            details={"drift": drift, "tolerance": numerics.norm_drift_tol})
    if max_asym > numerics.symmetry_tol:
        raise ContractError("exchange symmetry violated during propagation",
                            details={"violation": max_asym, "tolerance": numerics.symmetry_tol})
    logger.debug(f"[Propagate] done drift={drift:.3e} asym={max_asym:.3e}")
    return WaveFunction2(amplitudes=a, t=t1, grid=grid, norm_drift=drift, symmetry_violation=max_asym)


def _checkpoint_meta(controls: ExactControls, dt: float, policy: CheckpointPolicy) -> Dict[str, Any]:
    meta = {
        "scheme": SCHEME,
        "dt": dt,
        "h": controls.grid.h,
        "g": controls.g,
        "grid": controls.grid.model_dump(),
        "trajectory": controls.traj.model_dump(mode="json"),
        "code_version": __version__,
    }
    meta.update(policy.metadata or {})
    return meta


# ============================================================
# 순간 고유값
# ============================================================
def lowest_eigenpairs(t: float, k: int, controls: ExactControls,
                      numerics: NumericsConfig = DEFAULT_NUMERICS,
                      retain_states: bool = True) -> EigenSlice:
    """대칭 sector 최저 k 고유쌍 (오름차순)"""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    layout = _layout(t, controls)
    check_grid(controls.grid, layout, numerics)
    Hs = ExactHamiltonian(layout, controls.g, controls.grid).symmetric_matrix()
    dim = Hs.shape[0]
    if k >= dim:
        raise DomainError(f"k={k} exceeds symmetric sector dimension {dim}")

    v0 = np.random.default_rng(numerics.eig_seed).standard_normal(dim)
    start = time.perf_counter()
    try:
        w, v = eigsh(Hs, k=k, sigma=numerics.eig_sigma, which="LM", v0=v0)
    except ArpackNoConvergence as e:
        raise ConvergenceError(
            "eigensolver did not converge",
            details={"t": t, "k": k, "converged": len(e.eigenvalues), "dim": dim},
        )
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    residuals = np.linalg.norm(Hs @ v - v * w[None, :], axis=0)
    if np.max(residuals) > numerics.eig_residual_tol:
        raise ConvergenceError(
            "eigenpair residual above tolerance",
            details={"t": t, "k": k, "max_residual": float(np.max(residuals))},
        )
    logger.debug(f"[Spectrum] t={t:.2f} k={k} E0={w[0]:.6f} ({time.perf_counter() - start:.2f}s)")
    return EigenSlice(t=t, energies=w, states=v if retain_states else None, residuals=residuals)


def project_populations(psi: WaveFunction2, eigen: EigenSlice) -> np.ndarray:
    """|⟨v_i|ψ⟩|² for each retained eigenvector"""
    if eigen.states is None:
        raise ContractError("eigenvectors were not retained", details={"t": eigen.t})
    c = to_symmetric(psi.amplitudes) * psi.grid.h
    return np.abs(eigen.states.T @ c) ** 2


# ============================================================
# SAP 한 번
# ============================================================
def run_sap(E_g: float, T: float, grid: Optional[Grid2D] = None, dt: float = 0.02,
            traj: Optional[TrajectoryParams] = None,
            numerics: NumericsConfig = DEFAULT_NUMERICS,
            tracker: Optional[ProgressTracker] = None,
            checkpoint: Optional[CheckpointPolicy] = None) -> FidelityRecord:
    """
    |L⟩ (왼쪽 우물 pair state) 에서 시작해 전체 궤적을 전파하고 F = |⟨R|ψ(T)⟩|² 반환

    checkpoint 정책이 있고 같은 설정의 저장본이 있으면 이어서 전파한다.
    """
    E_g, g = resolve_interaction(E_g=E_g)
    traj = traj.rescaled(T) if traj is not None else TrajectoryParams(T=T)
    grid = grid or Grid2D()
    controls = ExactControls(g=g, traj=traj, grid=grid, dt=dt)
    started = time.perf_counter()

    left = pair_ground_state(g, positions_at(0.0, traj).d_L, grid, numerics).embed()
    right = pair_ground_state(g, positions_at(T, traj).d_R, grid, numerics).embed()
    psi = WaveFunction2(amplitudes=left, t=0.0, grid=grid)

    if checkpoint is not None:
        resumed = load_checkpoint(checkpoint.stem)
        if resumed is not None:
            amps, t_saved, meta = resumed
            if (meta.get("g") == g and meta.get("grid") == grid.model_dump()
                    and meta.get("trajectory") == traj.model_dump(mode="json") and 0.0 < t_saved < T):
                psi = WaveFunction2(amplitudes=amps, t=t_saved, grid=grid)
                logger.info(f"[Checkpoint] resuming from t={t_saved:.3f}")
            else:
                logger.warning(f"[Checkpoint] {checkpoint.stem} does not match this run, starting over")

    final = propagate(psi, psi.t, T, controls, numerics, tracker, checkpoint)
    F = abs(final.overlap(right)) ** 2
    runtime = time.perf_counter() - started
    logger.info(f"[SAP] E_g={E_g:.4f} g={g:.4f} T={T:g} F={F:.6f} ({runtime:.1f}s)")
    return FidelityRecord(E_g=E_g, g=g, T=T, F=F, norm_drift=final.norm_drift,
                          symmetry_violation=final.symmetry_violation, runtime_seconds=runtime)
