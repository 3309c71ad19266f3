__version__ = "0.1.0"

from .busch_model import energy_from_g, g_from_energy, pair_ground_state
from .errors import (
    ConfigError,
    DomainError,
    NumericalError,
    ResourceError,
    SapError,
)
from .models import Grid2D, TrajectoryParams

__all__ = [
    '__version__',
    'energy_from_g',
    'g_from_energy',
    'pair_ground_state',
    'ConfigError',
    'DomainError',
    'NumericalError',
    'ResourceError',
    'SapError',
    'Grid2D',
    'TrajectoryParams',
]
