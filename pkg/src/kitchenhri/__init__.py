"""Interruptible, age-adaptive kitchen service robot: simulator and bench."""

__version__ = "0.1.0"

from .config import RunConfig
from .session import Session

__all__ = ["RunConfig", "Session", "__version__"]
