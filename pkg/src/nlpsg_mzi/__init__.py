"""Simulator for a Mach-Zehnder test of a heralded nonlinear sign gate."""

__version__ = "0.1.0"

from .fock import FockState, fock, vacuum  # noqa: E402,F401
from .linear_optics import ModeUnitary, apply_unitary, bs2  # noqa: E402,F401
from .nlpsg import Family, Branch, optimize_beta, smatrix  # noqa: E402,F401
from .mzi import ExperimentConfig, InputSpec, sweep  # noqa: E402,F401
