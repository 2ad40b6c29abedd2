"""Active reconfigurable-intelligent-surface (RIS) link optimization and simulation."""

from activeris.errors import (
    ConfigError,
    ConvergenceError,
    DegenerateChannelError,
    InfeasibleError,
    RisError,
    SingularityError,
    ValidationError,
)
from activeris.params import (
    Geometry,
    PowerModel,
    SystemParams,
    db_to_linear,
    dbm_to_watts,
    linear_to_db,
    watts_to_dbm,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DegenerateChannelError",
    "Geometry",
    "InfeasibleError",
    "PowerModel",
    "RisError",
    "SingularityError",
    "SystemParams",
    "ValidationError",
    "db_to_linear",
    "dbm_to_watts",
    "linear_to_db",
    "watts_to_dbm",
]

__version__ = "0.1.0"
