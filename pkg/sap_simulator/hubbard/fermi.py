"""
두 band Fermi-Hubbard 모델 (페르미온화된 pair, band 0 과 1 에 한 입자씩)

    H_F = Σ_{j,i} ε_i n_ji + U Σ_j n_j0 n_j1
        + Σ_i [Ω⁽ⁱ⁾_LM a†_Li a_Mi + Ω⁽ⁱ⁾_MR a†_Mi a_Ri + h.c.]
        + Ω⁽co⁾_LM a†_L0 a†_L1 a_M0 a_M1 + Ω⁽co⁾_MR a†_M0 a†_M1 a_R0 a_R1 + h.c.

모드 순서 (L0, M0, R0, L1, M1, R1). 이 순서의 Jordan-Wigner 부호를 쓴다.
U = E_g - 2 ≤ 0, ε₀ = 1/2, ε₁ = 3/2.
"""
from typing import List, Tuple

from ..models import RateSet
from .base import BaseHubbardModel, FockState, Operator, hopping

WELLS = "LMR"
# (band-0 입자 우물, band-1 입자 우물)
PAIRS = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)]


def _mode(well: int, band: int) -> int:
    return well + 3 * band


def _state(w0: int, w1: int) -> FockState:
    occ = [0] * 6
    occ[_mode(w0, 0)] = 1
    occ[_mode(w1, 1)] = 1
    return tuple(occ)


class FermiHubbardModel(BaseHubbardModel):
    """기저: LL, MM, RR, LM, ML, MR, RM, LR, RL (첫 글자 = band 0 입자)"""

    MODEL_TYPE = "fermi"
    STATISTICS = "fermi"

    @property
    def basis(self) -> List[FockState]:
        return [_state(w0, w1) for w0, w1 in PAIRS]

    @property
    def labels(self) -> List[str]:
        return [f"{WELLS[w0]}0{WELLS[w1]}1" for w0, w1 in PAIRS]

    @property
    def onsite_interaction(self) -> float:
        return self.E_g - 2.0

    @property
    def left_state(self) -> int:
        return 0

    @property
    def right_state(self) -> int:
        return 2

    def diagonal(self, state: FockState, rates: RateSet) -> float:
        energy = rates.eps0 * sum(state[0:3]) + rates.eps1 * sum(state[3:6])
        energy += rates.U * sum(state[j] * state[j + 3] for j in range(3))
        return energy

    def coupling_terms(self) -> List[Tuple[str, float, Operator]]:
        L0, M0, R0 = _mode(0, 0), _mode(1, 0), _mode(2, 0)
        L1, M1, R1 = _mode(0, 1), _mode(1, 1), _mode(2, 1)
        return [
            ("omega_LM", 1.0, hopping(M0, L0)),
            ("omega_MR", 1.0, hopping(R0, M0)),
            ("omega1_LM", 1.0, hopping(M1, L1)),
            ("omega1_MR", 1.0, hopping(R1, M1)),
            ("omega_co_LM", 1.0, [(L0, True), (L1, True), (M0, False), (M1, False)]),
            ("omega_co_MR", 1.0, [(M0, True), (M1, True), (R0, False), (R1, False)]),
        ]
