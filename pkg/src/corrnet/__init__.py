"""Predicting whole-network correlation structure from short windows of a
few nodes' time series."""
from ._accel import backend
from .errors import CorrnetError

__version__ = "0.1.0"

__all__ = ["backend", "CorrnetError", "__version__"]
