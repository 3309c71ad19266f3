"""
Busch 관계식과 단일 조화 우물 두 보존 바닥 상태

    g = -2√2 Γ(1 - E_g/2) / Γ((1 - E_g)/2)

E_g 는 두 입자 전체 에너지 (질량중심 ½ 포함). g = 0 ↔ E_g = 1, g → ∞ ↔ E_g → 2 (TG).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq
from scipy.sparse.linalg import eigsh
from scipy.special import gamma, rgamma

from .config import DEFAULT_NUMERICS, DEFAULT_RATES, NumericsConfig
from .errors import ConvergenceError, DomainError, GeometryError, ResolutionError
from .lattice import from_symmetric, norm2, restrict_symmetric, to_symmetric, two_body_matrix
from .models import Grid2D

logger = logging.getLogger(__name__)

# TG 극한 바로 아래 (E_g = 2 는 발산)
_E_TOP = 2.0 - 1e-15


# ============================================================
# Busch 관계식
# ============================================================
def g_from_energy(E_g: float) -> float:
    """
    E_g ∈ [1, 2) → g ≥ 0

    1/Γ 를 rgamma 로 계산하므로 E_g = 1 (Γ(0) 발산) 에서 정확히 0 이 나온다.
    """
    if not (1.0 <= E_g < 2.0):
        raise DomainError(f"E_g must lie in [1, 2), got {E_g}", details={"E_g": E_g})
    return float(-2.0 * np.sqrt(2.0) * gamma(1.0 - E_g / 2.0) * rgamma((1.0 - E_g) / 2.0))


def energy_from_g(g: float) -> float:
    """g ≥ 0 → E_g. brentq 로 Busch 관계식을 [1, 2) 에서 푼다."""
    if g < 0 or not np.isfinite(g):
        raise DomainError(f"g must be finite and non-negative, got {g}", details={"g": g})
    if g == 0.0:
        return 1.0
    g_top = g_from_energy(_E_TOP)
    if g >= g_top:
        raise ConvergenceError(
            "g beyond representable bracket below the TG limit",
            details={"g": g, "bracket": [1.0, _E_TOP], "g_at_top": g_top},
        )
    try:
        root, info = brentq(
            lambda e: g_from_energy(e) - g, 1.0, _E_TOP,
            xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500, full_output=True,
        )
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError(f"Busch inversion failed: {e}", details={"g": g, "bracket": [1.0, _E_TOP]})
    if not info.converged:
        raise ConvergenceError(
            "Busch inversion did not converge",
            details={"g": g, "bracket": [1.0, _E_TOP], "iterations": info.iterations},
        )
    return float(root)


def resolve_interaction(E_g: Optional[float] = None, g: Optional[float] = None) -> Tuple[float, float]:
    """E_g 또는 g 중 정확히 하나 → (E_g, g)"""
    if (E_g is None) == (g is None):
        raise DomainError("exactly one of E_g / g must be given")
    if E_g is not None:
        return float(E_g), g_from_energy(E_g)
    return energy_from_g(g), float(g)


# ============================================================
# 상대좌표 바닥 상태 (rate table 용)
# ============================================================
@dataclass
class RelativeState:
    """
    상대좌표 r = x₁ - x₂ 의 바닥 상태
    H_rel = -∂²_r + r²/4 + g δ(r)  (환산질량 ½)
    """
    g: float
    r: np.ndarray
    density: np.ndarray     # |φ_rel(r)|², ∫ density dr = 1
    energy: float           # 전체 에너지 = E_rel + ½


@lru_cache(maxsize=64)
def relative_ground_state(g: float, half_width: float = DEFAULT_RATES.rel_half_width,
                          step: float = DEFAULT_RATES.rel_step) -> RelativeState:
    """1D 3-point 차분 + 원점 g/h 항, 삼중대각 고유값 문제"""
    n_half = int(round(half_width / step))
    r = step * np.arange(-n_half, n_half + 1)
    diag = 2.0 / step ** 2 + r ** 2 / 4.0
    diag[n_half] += g / step
    off = -np.ones(len(r) - 1) / step ** 2
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    phi = v[:, 0]
    density = phi ** 2 / step
    return RelativeState(g=g, r=r, density=density, energy=float(w[0]) + 0.5)


# ============================================================
# 격자 위 pair state
# ============================================================
@dataclass
class PairState:
    """
    우물 하나의 두 보존 바닥 상태 (실수, x₁↔x₂ 대칭, 단위 L² norm)

    patch 는 주 격자와 같은 간격으로 정렬되어 있고 격자 밖으로 나갈 수 있다.
    amplitudes[a, b] 는 주 격자 인덱스 (offset + a, offset + b) 의 값.
    """
    center: float
    g: float
    grid: Grid2D
    offset: int
    amplitudes: np.ndarray
    energy: float            # 측정된 ⟨H_well⟩ (patch 위)
    busch_energy: float

    def embed(self) -> np.ndarray:
        """주 격자 (n×n) 복소 배열로 잘라 넣고 재정규화"""
        n = self.grid.n
        m = self.amplitudes.shape[0]
        lo = max(self.offset, 0)
        hi = min(self.offset + m, n)
        full = np.zeros((n, n), dtype=complex)
        if hi <= lo:
            raise GeometryError("pair state lies outside the grid", details={"center": self.center})
        a, b = lo - self.offset, hi - self.offset
        full[lo:hi, lo:hi] = self.amplitudes[a:b, a:b]
        full /= np.sqrt(norm2(full, self.grid.h))
        return full


def pair_ground_state(g: float, center: float, grid: Grid2D,
                      numerics: NumericsConfig = DEFAULT_NUMERICS) -> PairState:
    """
    단위 진동수 우물 하나에 갇힌 두 보존의 바닥 상태

    center ± patch_half_width patch 의 대칭 sector 희소 행렬을 shift-invert Lanczos 로 대각화.
    측정 에너지가 Busch 에너지와 max(floor, C·h²) 이상 다르면 ResolutionError.
    """
    if not (grid.x_min <= center <= grid.x_max):
        raise GeometryError("well center outside grid", details={"center": center})
    h = grid.h
    i_c = (center - grid.x_min) / h
    k = int(np.ceil(numerics.patch_half_width / h))
    i_lo = int(np.floor(i_c)) - k
    i_hi = int(np.ceil(i_c)) + k
    xp = grid.x_min + h * np.arange(i_lo, i_hi + 1)
    m = len(xp)

    H = two_body_matrix(0.5 * (xp - center) ** 2, g, h, periodic=False)
    Hs = restrict_symmetric(H, m)
    E_busch = energy_from_g(g)

    # 초기 벡터: 분리형 근사 (질량중심 가우시안 × 상대좌표 가우시안)
    X = 0.5 * (xp[:, None] + xp[None, :]) - center
    r = xp[:, None] - xp[None, :]
    v0 = to_symmetric(np.exp(-X ** 2 - r ** 2 / 4.0))
    try:
        w, v = eigsh(Hs, k=1, sigma=max(E_busch - 0.25, 0.0), which="LM", v0=v0)
    except Exception as e:
        raise ConvergenceError(f"pair ground state eigensolve failed: {e}", details={"g": g, "center": center})
    c = v[:, 0]
    if c.sum() < 0:
        c = -c
    energy = float(c @ (Hs @ c))
    psi = from_symmetric(c, m) / h

    tol = max(numerics.energy_tol_floor, numerics.energy_tol_coeff * h ** 2)
    logger.debug(f"[PairState] g={g:.6g} center={center:.3f} E={energy:.6f} busch={E_busch:.6f} h={h:.4f}")
    if abs(energy - E_busch) > tol:
        raise ResolutionError(
            "pair state energy does not match the Busch relation",
            details={"g": g, "energy": energy, "busch": E_busch, "tolerance": tol, "h": h},
        )
    return PairState(center=center, g=g, grid=grid, offset=i_lo, amplitudes=psi,
                     energy=energy, busch_energy=E_busch)


def diagonal_cusp(state: PairState) -> float:
    """
    x₁=x₂ 에서 상대좌표 방향 기울기 점프 / ψ(0). 연속 극한에서 g 로 수렴 (오차 O(h)).

    (c+1, c) 은 r = +h 이고 대칭이므로 양쪽 기울기 합 = 2 (ψ(h) - ψ(0)) / h.
    """
    psi = state.amplitudes
    h = state.grid.h
    c = int(round((state.center - state.grid.x_min) / h)) - state.offset
    return float(2.0 * (psi[c + 1, c] - psi[c, c]) / h / psi[c, c])
