"""
SAP Simulator Configuration
하드코딩 제거를 위한 설정 파일
"""
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel

load_dotenv()


class NumericsConfig(BaseModel):
    """수치 계산 기본값"""
    grid_margin: float = 4.0               # 격자 끝과 바깥 우물 사이 최소 여유 (진동자 길이)
    min_points_per_length: float = 2.0     # 해상도 하한
    patch_half_width: float = 6.5          # pair state patch 반폭
    energy_tol_floor: float = 1e-4         # pair state 에너지 self-consistency: max(floor, C·h²)
    energy_tol_coeff: float = 2.0
    norm_drift_tol: float = 1e-8
    step_drift_tol: float = 1e-6           # 1000 step 당 허용 norm drift
    symmetry_tol: float = 1e-10
    eig_residual_tol: float = 1e-6
    eig_sigma: float = 0.0                 # shift-invert 기준. H ≥ 0 이므로 0 은 항상 스펙트럼 아래
    eig_seed: int = 20150601
    symmetrize_every: int = 1000           # 교환 대칭 재투영 주기 (step)


class RateTableConfig(BaseModel):
    """Hubbard rate table (d 격자 + cubic spline)"""
    d_lo: float = 3.0
    d_hi: float = 9.0
    d_step: float = 0.05
    rel_half_width: float = 12.0           # 상대좌표 격자 반폭
    rel_step: float = 0.01


class SpectralConfig(BaseModel):
    """스펙트럼 추적/교차 분석"""
    overlap_warn: float = 0.5
    degeneracy_tol: float = 1e-7            # d_max 에서의 rate (~1e-8) 보다 크게
    ambiguity_tol: float = 1e-3
    crossing_gap_threshold: float = 0.02
    crossing_prominence: float = 2.0        # 양쪽 이웃 최대 gap ≥ 이 배수 × 최소 gap
    endpoint_decay: float = 1e-3
    refine_tol: float = 1e-3
    max_refinements: int = 4
    window_slices: int = 201               # 교차 구간 재계산 slice 수 (정제 시 2 배씩)
    max_window_widenings: int = 3
    fine_mesh: int = 4001                  # 전이 확률 적분 mesh (수렴까지 2 배씩)
    quadrature_tol: float = 1e-6
    singular_gap: float = 1e-12
    target_population: float = 0.9         # dark track 도달 판정


DEFAULT_NUMERICS = NumericsConfig()
DEFAULT_RATES = RateTableConfig()
DEFAULT_SPECTRAL = SpectralConfig()


# ---- Environment -------------------------------------------------
def get_output_dir() -> str:
    return os.getenv("SAP_OUTPUT_DIR", "./output")


def get_workers() -> int:
    try:
        return max(1, int(os.getenv("SAP_WORKERS", "1")))
    except ValueError:
        return 1


def get_log_level() -> str:
    return os.getenv("SAP_LOG_LEVEL", "INFO").upper()


def get_rate_cache_dir() -> Optional[str]:
    value = os.getenv("SAP_RATE_TABLE_CACHE", "").strip()
    return value or None
