"""
Hubbard 모델 팩토리 - 모델 종류에 맞는 인스턴스 생성

사용법:
    from sap_simulator.hubbard import get_hubbard_model

    model = get_hubbard_model("bose", E_g=1.25, traj=TrajectoryParams(T=4000))
    H = model.matrix(t)
"""
from enum import Enum
from typing import Optional, Union

from ..busch_model import g_from_energy
from ..config import DEFAULT_RATES, RateTableConfig
from ..models import TrajectoryParams
from .base import BaseHubbardModel
from .bose import BoseHubbardModel
from .fermi import FermiHubbardModel
from .rates import RateTable, load_rate_table
from .three_mode import ThreeModeModel


class ModelKind(str, Enum):
    BOSE = "bose"
    FERMI = "fermi"
    THREE_MODE = "three-mode"


class HubbardModelFactory:
    """모델 종류 → 모델 클래스"""

    _REGISTRY = {
        ModelKind.BOSE: BoseHubbardModel,
        ModelKind.FERMI: FermiHubbardModel,
        ModelKind.THREE_MODE: ThreeModeModel,
    }

    @staticmethod
    def create(kind: Union[ModelKind, str], E_g: float, traj: TrajectoryParams,
               cotunneling: bool = True, rates: Optional[RateTable] = None,
               rate_config: RateTableConfig = DEFAULT_RATES) -> BaseHubbardModel:
        """
        Args:
            kind: bose / fermi / three-mode
            E_g: 단일 우물 pair 에너지 (co-tunneling rate 의 g 결정)
            traj: 트랩 궤적
            cotunneling: Ω⁽co⁾ 항 포함 여부
            rates: 미리 계산된 rate table (없으면 캐시/계산)
            rate_config: rate table 격자 (rates 가 없을 때)

        Returns:
            BaseHubbardModel 인스턴스
        """
        kind = ModelKind(kind)
        if rates is None:
            rates = load_rate_table(g_from_energy(E_g), d_lo=traj.d_min, d_hi=traj.d_max, config=rate_config)
        return HubbardModelFactory._REGISTRY[kind](E_g, traj, rates, cotunneling=cotunneling)


def get_hubbard_model(kind: Union[ModelKind, str], E_g: float, traj: TrajectoryParams,
                      cotunneling: bool = True, rates: Optional[RateTable] = None,
                      rate_config: RateTableConfig = DEFAULT_RATES) -> BaseHubbardModel:
    """HubbardModelFactory.create() 단축 버전"""
    return HubbardModelFactory.create(kind, E_g, traj, cotunneling, rates, rate_config)
