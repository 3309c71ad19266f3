"""
두 보존 Bose-Hubbard 모델 (세 우물, 바닥 band)

    H_B = Σ_j [U/2 n_j(n_j - 1) + ε₀ n_j]
        + Ω_LM (b†_L b_M + h.c.) + Ω_MR (b†_M b_R + h.c.)
        + Ω⁽co⁾_LM (b†²_L b²_M + h.c.)/2 + Ω⁽co⁾_MR (b†²_M b²_R + h.c.)/2

co-tunneling rate 는 pair 상태 사이 행렬 원소 자체이므로 b†²b² 의 인자 2 를 상쇄한다:
⟨2,0,0|H_B|0,2,0⟩ = Ω⁽co⁾_LM.
"""
from typing import List, Tuple

from ..models import RateSet
from .base import BaseHubbardModel, FockState, Operator, hopping

L, M, R = 0, 1, 2


class BoseHubbardModel(BaseHubbardModel):
    """기저: (2,0,0), (0,2,0), (0,0,2), (1,1,0), (0,1,1), (1,0,1)"""

    MODEL_TYPE = "bose"
    STATISTICS = "bose"
    EPS0 = 0.5

    @property
    def basis(self) -> List[FockState]:
        return [(2, 0, 0), (0, 2, 0), (0, 0, 2), (1, 1, 0), (0, 1, 1), (1, 0, 1)]

    @property
    def labels(self) -> List[str]:
        return ["2,0,0", "0,2,0", "0,0,2", "1,1,0", "0,1,1", "1,0,1"]

    @property
    def onsite_interaction(self) -> float:
        return self.E_g - 1.0

    @property
    def left_state(self) -> int:
        return 0

    @property
    def right_state(self) -> int:
        return 2

    def diagonal(self, state: FockState, rates: RateSet) -> float:
        return sum(0.5 * rates.U * n * (n - 1) + rates.eps0 * n for n in state)

    def coupling_terms(self) -> List[Tuple[str, float, Operator]]:
        return [
            ("omega_LM", 1.0, hopping(M, L)),
            ("omega_MR", 1.0, hopping(R, M)),
            ("omega_co_LM", 0.5, [(L, True), (L, True), (M, False), (M, False)]),
            ("omega_co_MR", 0.5, [(M, True), (M, True), (R, False), (R, False)]),
        ]
