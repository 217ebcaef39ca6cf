"""Fourier phase retrieval with an untrained decoder prior and TV regularization."""

from .forward import add_noise, measure, plan_from_ratio, sigma_for_snr, simulate
from .grid import MeasurementPlan, crop, dft2, idft2, pad
from .solvers import (
    SolverConfig,
    SolverTrace,
    ablation_solve,
    accelerated_trad,
    solve,
    vanilla_trad,
)

__all__ = [
    "MeasurementPlan", "SolverConfig", "SolverTrace", "ablation_solve",
    "accelerated_trad", "add_noise", "crop", "dft2", "idft2", "measure", "pad",
    "plan_from_ratio", "sigma_for_snr", "simulate", "solve", "vanilla_trad",
]
