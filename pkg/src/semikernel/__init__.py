"""Short-time parametrix toolkit for 1-d Schrodinger propagators.

Classical orbits, action integrals, wave packet transforms, the
oscillatory-integral kernel approximation, a split-step reference
propagator, and a rate-experiment harness.
"""

from . import classical, harness, parametrix, potentials, propagator, wavepacket
from .classical import Orbit, BvpSolution, solve_bvp, flow_from_terminal
from .harness import ExperimentConfig, RateReport
from .parametrix import OrbitTable, QuadratureSpec, amplitude_a0, e0
from .potentials import PotentialModel, from_name, safe_horizon
from .propagator import GridSpec, KernelMatrix, exact_kernel, split_step
from .wavepacket import ComplexGaussian, evolved_window, wp_adjoint, wp_transform

__version__ = "0.1.0"

__all__ = [
    "classical",
    "harness",
    "parametrix",
    "potentials",
    "propagator",
    "wavepacket",
    "Orbit",
    "BvpSolution",
    "solve_bvp",
    "flow_from_terminal",
    "ExperimentConfig",
    "RateReport",
    "OrbitTable",
    "QuadratureSpec",
    "amplitude_a0",
    "e0",
    "PotentialModel",
    "from_name",
    "safe_horizon",
    "GridSpec",
    "KernelMatrix",
    "exact_kernel",
    "split_step",
    "ComplexGaussian",
    "evolved_window",
    "wp_adjoint",
    "wp_transform",
    "__version__",
]
