"""Model Bergman kernel on the punctured disk for the Cheng-Yau weight."""

from .errors import ConvergenceError, DomainError
from .logdomain import LogReal
from .phgseries import PhgSeries, PhgTerm
from .weight import BAlphaInput, ModelWeight

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DomainError",
    "LogReal",
    "PhgSeries",
    "PhgTerm",
    "ModelWeight",
    "BAlphaInput",
]
