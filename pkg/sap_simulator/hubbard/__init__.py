"""
Hubbard 축약 모델 (세 모드 단일 입자 / Bose / 두 band Fermi)
"""
from .base import BaseHubbardModel
from .bose import BoseHubbardModel
from .dynamics import (
    HubbardEvolution,
    build_bose_matrix,
    build_fermi_matrix,
    continue_eigenvector,
    degenerate_clusters,
    dark_state_of,
    evolve_hubbard,
    fock_vector,
)
from .factory import HubbardModelFactory, ModelKind, get_hubbard_model
from .fermi import FermiHubbardModel
from .rates import (
    RateTable,
    cotunneling_rate,
    excited_band_rate,
    load_rate_table,
    single_particle_rate,
)
from .three_mode import ThreeModeModel

__all__ = [
    'BaseHubbardModel',
    'BoseHubbardModel',
    'FermiHubbardModel',
    'ThreeModeModel',
    'HubbardEvolution',
    'HubbardModelFactory',
    'ModelKind',
    'RateTable',
    'build_bose_matrix',
    'build_fermi_matrix',
    'continue_eigenvector',
    'degenerate_clusters',
    'cotunneling_rate',
    'dark_state_of',
    'evolve_hubbard',
    'excited_band_rate',
    'fock_vector',
    'get_hubbard_model',
    'load_rate_table',
    'single_particle_rate',
]
