"""
유한 크기 Hubbard 모델 공통 기반

- Fock 상태: 모드별 점유수 tuple
- 연산자 곱: [(mode, dagger), ...] 를 오른쪽부터 적용
- 보존/페르미온 통계는 서브클래스가 STATISTICS 로 지정 (페르미온 부호는 모드 순서의 Jordan-Wigner)
"""
import logging
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh

from ..models import RateSet, TrajectoryParams
from ..trap_geometry import separations_at
from .rates import RateTable

logger = logging.getLogger(__name__)

FockState = Tuple[int, ...]
Operator = Sequence[Tuple[int, bool]]   # (mode, is_creation)


# ============================================================
# 2차 양자화 연산자 적용
# ============================================================
def apply_operators(state: FockState, ops: Operator, statistics: str) -> Tuple[float, Optional[FockState]]:
    """
    연산자 곱을 Fock 상태에 적용

    Returns:
        (진폭, 결과 상태). 소멸되면 (0.0, None)
    """
    occ = list(state)
    amp = 1.0
    for mode, creation in reversed(list(ops)):
        n = occ[mode]
        if statistics == "bose":
            if creation:
                amp *= np.sqrt(n + 1)
                occ[mode] = n + 1
            else:
                if n == 0:
                    return 0.0, None
                amp *= np.sqrt(n)
                occ[mode] = n - 1
        else:
            if (creation and n == 1) or (not creation and n == 0):
                return 0.0, None
            if sum(occ[:mode]) % 2:
                amp = -amp
            occ[mode] = 1 if creation else 0
    return amp, tuple(occ)


def hopping(src: int, dst: int) -> Operator:
    """a†_dst a_src"""
    return [(dst, True), (src, False)]


def adjoint(ops: Operator) -> Operator:
    return [(mode, not creation) for mode, creation in reversed(list(ops))]


# ============================================================
# 기본 모델 추상 클래스
# ============================================================
class BaseHubbardModel(ABC):
    """
    궤적 위 시각 t 의 Hubbard 행렬을 만드는 모델

    서브클래스는 basis, 대각 에너지, 결합 항을 정의한다.
    결합 항은 (RateSet 필드 이름, 배율, 연산자) 이고 행렬은 그 선형 결합이다.
    """

    MODEL_TYPE = "base"
    STATISTICS = "bose"

    def __init__(self, E_g: float, traj: TrajectoryParams, rates: RateTable, cotunneling: bool = True):
        self.E_g = E_g
        self.traj = traj
        self.rates = rates
        self.cotunneling = cotunneling
        self._index: Dict[FockState, int] = {s: i for i, s in enumerate(self.basis)}
        self._patterns: Optional[List[Tuple[str, np.ndarray]]] = None

    # ---- 서브클래스 정의 --------------------------------------
    @property
    @abstractmethod
    def basis(self) -> List[FockState]:
        """정준 순서의 Fock 기저"""

    @property
    @abstractmethod
    def labels(self) -> List[str]:
        """CSV 컬럼용 상태 이름 (basis 순서)"""

    @property
    @abstractmethod
    def onsite_interaction(self) -> float:
        """U"""

    @abstractmethod
    def diagonal(self, state: FockState, rates: RateSet) -> float:
        """Fock 상태의 onsite 에너지"""

    @abstractmethod
    def coupling_terms(self) -> List[Tuple[str, float, Operator]]:
        """(rate 필드, 배율, 연산자) 목록. 에르미트 켤레는 자동으로 더한다."""

    @property
    @abstractmethod
    def left_state(self) -> int:
        """|L⟩ 인덱스"""

    @property
    @abstractmethod
    def right_state(self) -> int:
        """|R⟩ 인덱스"""

    # ---- 공통 ---------------------------------------------------
    @property
    def dimension(self) -> int:
        return len(self.basis)

    def rate_arrays(self, times) -> Dict[str, np.ndarray]:
        """시각 배열 → rate 필드별 배열 (co-tunneling 꺼짐이면 0)"""
        s_left, s_right = separations_at(np.atleast_1d(np.asarray(times, dtype=float)), self.traj)
        out = {
            "omega_LM": self.rates.evaluate(s_left, "omega0"),
            "omega_MR": self.rates.evaluate(s_right, "omega0"),
            "omega1_LM": self.rates.evaluate(s_left, "omega1"),
            "omega1_MR": self.rates.evaluate(s_right, "omega1"),
            "omega_co_LM": self.rates.evaluate(s_left, "omega_co"),
            "omega_co_MR": self.rates.evaluate(s_right, "omega_co"),
        }
        if not self.cotunneling:
            out["omega_co_LM"] = np.zeros_like(out["omega_co_LM"])
            out["omega_co_MR"] = np.zeros_like(out["omega_co_MR"])
        return {k: np.atleast_1d(v) for k, v in out.items()}

    def rate_set(self, t: float) -> RateSet:
        arrays = self.rate_arrays(t)
        return RateSet(U=self.onsite_interaction, **{k: float(v[0]) for k, v in arrays.items()})

    def _coupling_patterns(self) -> List[Tuple[str, np.ndarray]]:
        """결합 항마다 (필드, 배율 포함 단위 계수 행렬). 한 번만 만든다."""
        if self._patterns is None:
            dim = self.dimension
            patterns = []
            for field, scale, ops in self.coupling_terms():
                P = np.zeros((dim, dim))
                for term in (ops, adjoint(ops)):
                    for j, state in enumerate(self.basis):
                        amp, out = apply_operators(state, term, self.STATISTICS)
                        if out is None:
                            continue
                        i = self._index.get(out)
                        if i is not None:
                            P[i, j] += scale * amp
                patterns.append((field, P))
            self._patterns = patterns
        return self._patterns

    def _diagonal_matrix(self, rates: RateSet) -> np.ndarray:
        return np.diag([self.diagonal(state, rates) for state in self.basis])

    def matrix_from_rates(self, rates: RateSet) -> np.ndarray:
        H = self._diagonal_matrix(rates)
        for field, P in self._coupling_patterns():
            H = H + getattr(rates, field) * P
        return H

    def matrix(self, t: float) -> np.ndarray:
        return self.matrix_from_rates(self.rate_set(t))

    def matrix_stack(self, times) -> np.ndarray:
        """(len(times), dim, dim) 행렬 묶음"""
        arrays = self.rate_arrays(times)
        D = self._diagonal_matrix(RateSet(omega_LM=0.0, omega_MR=0.0, U=self.onsite_interaction))
        H = np.broadcast_to(D, (len(arrays["omega_LM"]),) + D.shape).copy()
        for field, P in self._coupling_patterns():
            H += arrays[field][:, None, None] * P[None, :, :]
        return H

    def eigensystem(self, t: float) -> Tuple[np.ndarray, np.ndarray]:
        """(오름차순 고유값, 열 고유벡터)"""
        return eigh(self.matrix(t))

    def __repr__(self):
        return (f"{self.__class__.__name__}(E_g={self.E_g}, T={self.traj.T}, "
                f"cotunneling={self.cotunneling})")
