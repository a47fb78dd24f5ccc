"""Direct (non-iterative) ptychographic phase retrieval.

Pipeline: lift the squared-modulus windowed Fourier data to a banded
Hermitian matrix by a restricted linear solve, then recover phases by
angular synchronization.
"""
from .core import (
    LiftedSolution,
    MeasurementSet,
    ReconstructionResult,
    ShiftSet,
    make_shift_set,
    measurement_index,
    measurement_index_2d,
)
from .bench import SweepConfig, align_global_phase, mse_metrics, phantom, sweep
from .forward import simulate_1d, simulate_2d
from .io import read_grid, read_measurements, write_grid, write_measurements
from .solver1d import build_gram, reconstruct_1d, solve_pattern, solve_tight, tight_band
from .solver2d import build_gram_2d, reconstruct_2d, solve_pattern_2d, solve_tight_2d, tight_band_2d
from .sync import synchronize
from .windows import (
    Window,
    Window2D,
    custom_window,
    exponential_window,
    frame_matrix,
    frame_vector,
    gaussian_window,
)

__all__ = [
    "LiftedSolution", "MeasurementSet", "SweepConfig", "ReconstructionResult", "ShiftSet", "Window", "Window2D",
    "align_global_phase", "build_gram", "build_gram_2d", "custom_window", "exponential_window", "frame_matrix",
    "frame_vector", "gaussian_window", "make_shift_set", "measurement_index",
    "measurement_index_2d", "mse_metrics", "phantom", "read_grid", "read_measurements",
    "reconstruct_1d", "reconstruct_2d", "simulate_1d", "simulate_2d",
    "solve_pattern", "solve_pattern_2d", "solve_tight", "solve_tight_2d", "sweep", "synchronize",
    "tight_band", "tight_band_2d", "write_grid", "write_measurements",
]
__version__ = "0.1.0"
