"""Nonlocal Cahn-Hilliard relaxation and limit problems on a box."""

from .domain import Domain
from .kernel import KernelData, build_kernel, convolve
from .potential import PotentialSpec, verify_hypotheses
from .dynamics import Params, State, step_relaxation, step_limit, lift, run, run_difference

__all__ = [
    "Domain",
    "KernelData",
    "build_kernel",
    "convolve",
    "PotentialSpec",
    "verify_hypotheses",
    "Params",
    "State",
    "step_relaxation",
    "step_limit",
    "lift",
    "run",
    "run_difference",
]
__version__ = "0.1.0"
