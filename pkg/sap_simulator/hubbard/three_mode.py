"""
단일 입자 세 모드 모델

    H_0 = Ω_LM |l⟩⟨m| + Ω_MR |m⟩⟨r| + h.c.

dark state cos θ|l⟩ - sin θ|r⟩, tan θ = Ω_LM / Ω_MR.
"""
from typing import List, Tuple

import numpy as np

from ..models import RateSet
from .base import BaseHubbardModel, FockState, Operator, hopping


class ThreeModeModel(BaseHubbardModel):
    """기저: |l⟩, |m⟩, |r⟩"""

    MODEL_TYPE = "three-mode"
    STATISTICS = "bose"

    @property
    def basis(self) -> List[FockState]:
        return [(1, 0, 0), (0, 1, 0), (0, 0, 1)]

    @property
    def labels(self) -> List[str]:
        return ["l", "m", "r"]

    @property
    def onsite_interaction(self) -> float:
        return 0.0

    @property
    def left_state(self) -> int:
        return 0

    @property
    def right_state(self) -> int:
        return 2

    def diagonal(self, state: FockState, rates: RateSet) -> float:
        return 0.0

    def coupling_terms(self) -> List[Tuple[str, float, Operator]]:
        return [("omega_LM", 1.0, hopping(1, 0)), ("omega_MR", 1.0, hopping(2, 1))]

    def mixing_angle(self, t: float) -> float:
        rates = self.rate_set(t)
        return float(np.arctan(rates.omega_LM / rates.omega_MR))

    def dark_vector(self, t: float) -> np.ndarray:
        theta = self.mixing_angle(t)
        return np.array([np.cos(theta), 0.0, -np.sin(theta)])
