"""Balanced-truncation model reduction for the nonlinear cable-mass system.

A 1D damped wave equation with second-order oscillator dynamic boundary
conditions is discretized by finite differences, reduced by square-root
balanced truncation, and simulated with a stiff Rosenbrock integrator.
The right-boundary cubic spring survives the reduction exactly through
an O(r) evaluation of the projected nonlinearity.
"""

from .analysis import (EnergyReport, ErrorMetrics, compute_energy,
                       energy_decay, output_error, stability_margin)
from .balance import (BalanceResult, ReducedSystem, error_bound, gramians,
                      hankel_values, reduce, square_root_transform,
                      suggest_r, transfer_function)
from .cli import (PRESETS, ExperimentConfig, Preset, get_preset, load_config,
                  run_experiment)
from .model import (Grid, PhysicalParams, QuadraticForms, StateSpaceSystem,
                    build_system, eval_nonlinearity, fom_jacobian, fom_rhs,
                    quadratic_forms, sample_initial_data)
from .ode import Trajectory, integrate, sample
from .rom import (OutputSeries, rom_jacobian, rom_nonlinear, rom_rhs,
                  simulate_fom, simulate_rom)
from .signals import InputSpec, eval_input, input2_frequencies, input_preset

__version__ = "0.1.0"

__all__ = [
    "BalanceResult", "EnergyReport", "ErrorMetrics", "ExperimentConfig",
    "Grid", "InputSpec", "OutputSeries", "PRESETS", "PhysicalParams",
    "Preset", "QuadraticForms", "ReducedSystem", "StateSpaceSystem",
    "Trajectory", "build_system", "compute_energy", "energy_decay",
    "error_bound", "eval_input", "eval_nonlinearity", "fom_jacobian",
    "fom_rhs", "get_preset", "gramians", "hankel_values",
    "input2_frequencies", "input_preset", "integrate", "load_config",
    "output_error", "quadratic_forms", "reduce", "rom_jacobian",
    "rom_nonlinear", "rom_rhs", "run_experiment", "sample",
    "sample_initial_data", "simulate_fom", "simulate_rom",
    "square_root_transform", "stability_margin", "suggest_r",
    "transfer_function",
]
