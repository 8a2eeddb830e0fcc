"""Cavity two-mode squeezing simulator (Python bindings)."""

import json as _json

from ._cavsq import (
    ArgumentError,
    NumericalError,
    StabilityError,
    adiabatic_error,
    crossover_temperature,
    default_grid,
    evolve_fock,
    evolve_gaussian,
    occupations_closed_form,
    photons_at_t_pi,
    rb_preset,
    squeezing_parameter,
    squeezing_spectrum,
    stability_check,
    t_pi_from_theta,
    thermal_occupation,
    thermal_suppression,
    tmss_amplitudes,
    zeta12_closed_form,
)
from ._cavsq import run as _run


def run(command, config):
    """Run a CLI command with a config dict; returns the exit code."""
    return _run(command, _json.dumps(config))


__all__ = [
    "ArgumentError",
    "NumericalError",
    "StabilityError",
    "adiabatic_error",
    "crossover_temperature",
    "default_grid",
    "evolve_fock",
    "evolve_gaussian",
    "occupations_closed_form",
    "photons_at_t_pi",
    "rb_preset",
    "run",
    "squeezing_parameter",
    "squeezing_spectrum",
    "stability_check",
    "t_pi_from_theta",
    "thermal_occupation",
    "thermal_suppression",
    "tmss_amplitudes",
    "zeta12_closed_form",
]
