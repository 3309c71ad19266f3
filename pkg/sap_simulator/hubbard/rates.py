"""
Hubbard 터널링 rate (Gram-Schmidt)

두 우물 (±d/2) 에 놓인 국소 상태 φ_L, φ_R 을 왼쪽 먼저 정규직교화:
    |l⟩ = φ_L,  |r⟩ = (φ_R - S φ_L) / √(1 - S²)
    Ω = ⟨l|H|r⟩ = (A_LR - S·A_LL) / √(1 - S²)

A_LR = ⟨φ_L|w_R|φ_R⟩, A_LL = ⟨φ_L|w_L|φ_L⟩ 이고 w 는 두 우물 포텐셜과 단일 포물선의 차이:
    w_R(x) = x·d  (x < 0),   w_L(x) = -x·d  (x > 0)
부호는 행렬 원소 그대로 (d 가 유한하면 음수).
"""
import logging
import os
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad, simpson
from scipy.interpolate import CubicSpline
from scipy.special import erf

from ..busch_model import relative_ground_state
from ..config import DEFAULT_RATES, RateTableConfig, get_rate_cache_dir
from ..errors import DomainError, GeometryError
from ..store import read_csv, write_csv

logger = logging.getLogger(__name__)

MAX_OVERLAP = 0.999

_QUAD = dict(epsabs=0.0, epsrel=1e-11, limit=200)


def _ground(x):
    return np.pi ** -0.25 * np.exp(-0.5 * x * x)


def _first_excited(x):
    return np.pi ** -0.25 * np.sqrt(2.0) * x * np.exp(-0.5 * x * x)


def _gram_schmidt_rate(phi: Callable[[float], float], d: float) -> float:
    if d <= 0:
        raise DomainError(f"separation must be positive, got {d}")
    c = 0.5 * d
    S = quad(lambda x: phi(x + c) * phi(x - c), -np.inf, np.inf, **_QUAD)[0]
    if abs(S) > MAX_OVERLAP:
        raise GeometryError("wells too close, local states are not independent",
                            details={"d": d, "overlap": S})
    A_LR = quad(lambda x: phi(x + c) * phi(x - c) * x * d, -np.inf, 0.0, **_QUAD)[0]
    A_LL = quad(lambda x: phi(x + c) ** 2 * (-x * d), 0.0, np.inf, **_QUAD)[0]
    return float((A_LR - S * A_LL) / np.sqrt(1.0 - S * S))


def single_particle_rate(d: float) -> float:
    """바닥 상태 단일 입자 터널링 Ω(d)"""
    return _gram_schmidt_rate(_ground, d)


def excited_band_rate(d: float) -> float:
    """첫 번째 들뜬 상태 터널링 Ω⁽¹⁾(d)"""
    return _gram_schmidt_rate(_first_excited, d)


def cotunneling_rate(d: float, g: float) -> float:
    """
    pair co-tunneling Ω⁽co⁾(d, g) = ⟨L|H|R⟩ (정규직교화된 pair state 사이)

    pair state: P(x₁,x₂) = φ_cm(X ± d/2) φ_rel(r), X = (x₁+x₂)/2, r = x₁-x₂,
    φ_cm(X) = (2/π)^¼ e^{-X²}. dx₁dx₂ = dX dr, S = e^{-d²/2}.
    w 는 두 입자에 각각 걸리고 x₁↔x₂ 대칭이므로 한 입자 기여의 2 배.
    X 적분은 닫힌 형태 (erf), r 적분은 Simpson.
    """
    if d <= 0:
        raise DomainError(f"separation must be positive, got {d}")
    if g < 0:
        raise DomainError(f"g must be non-negative, got {g}")
    S = float(np.exp(-0.5 * d * d))
    if S > MAX_OVERLAP:
        raise GeometryError("wells too close, pair states are not independent",
                            details={"d": d, "overlap": S})
    rel = relative_ground_state(float(g))
    r, rho = rel.r, rel.density
    root = np.sqrt(np.pi / 8.0)

    # ∫_{-∞}^{a} (X - a) e^{-2X²} dX,  a = -r/2  (x₁ = X + r/2 < 0)
    a = -0.5 * r
    J = -0.25 * np.exp(-2.0 * a * a) - a * root * (1.0 + erf(np.sqrt(2.0) * a))
    # ∫_{b}^{∞} (Y - b) e^{-2Y²} dY,  b = (d - r)/2  (Y = X + d/2, x₁ > 0)
    b = 0.5 * (d - r)
    K = 0.25 * np.exp(-2.0 * b * b) - b * root * (1.0 - erf(np.sqrt(2.0) * b))

    pref = 2.0 * np.sqrt(2.0 / np.pi) * d
    A_LR = pref * S * simpson(rho * J, x=r)
    A_LL = -pref * simpson(rho * K, x=r)
    return float((A_LR - S * A_LL) / np.sqrt(1.0 - S * S))


# ============================================================
# Rate table (d 격자 + cubic spline)
# ============================================================
@dataclass
class RateTable:
    """한 g 값에 대한 Ω⁰(d), Ω¹(d), Ω⁽co⁾(d) 표와 spline"""
    g: float
    d: np.ndarray
    omega0: np.ndarray
    omega1: np.ndarray
    omega_co: np.ndarray

    def __post_init__(self):
        self._splines = {
            "omega0": CubicSpline(self.d, self.omega0),
            "omega1": CubicSpline(self.d, self.omega1),
            "omega_co": CubicSpline(self.d, self.omega_co),
        }

    @property
    def bounds(self) -> Tuple[float, float]:
        return float(self.d[0]), float(self.d[-1])

    def evaluate(self, separation, column: str):
        lo, hi = self.bounds
        s = np.asarray(separation, dtype=float)
        tol = 1e-9 * (hi - lo)
        if np.any(s < lo - tol) or np.any(s > hi + tol):
            raise DomainError(f"separation outside rate table [{lo}, {hi}]",
                              details={"min": float(np.min(s)), "max": float(np.max(s))})
        value = self._splines[column](np.clip(s, lo, hi))
        return float(value) if np.ndim(value) == 0 else value

    def rows(self):
        for row in zip(self.d, self.omega0, self.omega1, self.omega_co):
            yield [float(v) for v in row]

    @classmethod
    def compute(cls, g: float, d_lo: float = DEFAULT_RATES.d_lo, d_hi: float = DEFAULT_RATES.d_hi,
                d_step: float = DEFAULT_RATES.d_step) -> "RateTable":
        n = int(round((d_hi - d_lo) / d_step)) + 1
        d = np.linspace(d_lo, d_hi, n)
        logger.info(f"[Rates] computing table g={g:.6g} d∈[{d_lo}, {d_hi}] ({n} points)")
        omega0 = np.array([single_particle_rate(x) for x in d])
        omega1 = np.array([excited_band_rate(x) for x in d])
        omega_co = np.array([cotunneling_rate(x, g) for x in d])
        return cls(g=g, d=d, omega0=omega0, omega1=omega1, omega_co=omega_co)


RATE_COLUMNS = ["d", "omega0", "omega1", "omega_co"]


def _cache_path(cache_dir: str, g: float, d_lo: float, d_hi: float, d_step: float) -> str:
    return os.path.join(cache_dir, f"rates_g{g:.12g}_d{d_lo:g}-{d_hi:g}_s{d_step:g}.csv")


def load_rate_table(g: float, d_lo: float = DEFAULT_RATES.d_lo, d_hi: float = DEFAULT_RATES.d_hi,
                    config: RateTableConfig = DEFAULT_RATES,
                    cache_dir: Optional[str] = None) -> RateTable:
    """
    캐시 (SAP_RATE_TABLE_CACHE) 에 있으면 읽고, 없으면 계산 후 저장

    d 범위는 기본 [3, 9] 와 요청 범위의 합집합.
    """
    d_lo = min(d_lo, config.d_lo)
    d_hi = max(d_hi, config.d_hi)
    cache_dir = cache_dir or get_rate_cache_dir()
    path = _cache_path(cache_dir, g, d_lo, d_hi, config.d_step) if cache_dir else None
    if path and os.path.exists(path):
        header, rows = read_csv(path)
        if header == RATE_COLUMNS:
            data = np.array(rows, dtype=float)
            logger.debug(f"[Rates] cache hit {path}")
            return RateTable(g=g, d=data[:, 0], omega0=data[:, 1], omega1=data[:, 2], omega_co=data[:, 3])
        logger.warning(f"[Rates] ignoring malformed cache file {path}")
    table = RateTable.compute(g, d_lo, d_hi, config.d_step)
    if path:
        write_csv(path, RATE_COLUMNS, table.rows())
    return table
