"""svdflow: structure-preserving simulation of nonautonomous linear ODEs by
evolving the SVD factors of the propagator under unitary updates, with a
classical reference integrator and a shot-based statevector emulator."""

from . import errors, matcore, models, odeflow, qsim, svdeom
from .config import RunConfig, build_generator, load_config
from .runner import compute_reference, run_qsvd

__all__ = [
    "RunConfig",
    "build_generator",
    "compute_reference",
    "errors",
    "load_config",
    "matcore",
    "models",
    "odeflow",
    "qsim",
    "run_qsvd",
    "svdeom",
]

__version__ = "0.1.0"
