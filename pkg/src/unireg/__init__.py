"""Unimodal least squares regression and numerical checks of its risk theory."""

__version__ = "0.1.0"

from .errors import ConvergenceError, InfeasibleError
from .isotonic import (Direction, IsotonicFit, PavaBlockStack, pava, prefix_isotonic_sse,
                       suffix_antitonic_sse)
from .unimodal import (UnimodalFit, mode_cone_projection, project_onto_mode_cone,
                       unimodal_lse)

__all__ = [
    "ConvergenceError", "InfeasibleError", "Direction", "IsotonicFit", "PavaBlockStack",
    "pava", "prefix_isotonic_sse", "suffix_antitonic_sse", "UnimodalFit",
    "mode_cone_projection", "project_onto_mode_cone", "unimodal_lse",
]
