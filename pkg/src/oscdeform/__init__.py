"""Nonlinear oscillator families generated by phase-space deformations.

The package builds second-order ODEs of generalized Lienard type by
composing a harmonic oscillator with coordinate/velocity deformations,
derives their first integrals and closed-form solutions, and provides the
numerical routines used to verify every derivation.
"""

from . import apps, catalog, errors, verify
from .deform import (
    DeformedOscillator,
    OdeForm,
    energy,
    energy_rate,
    explicit_acceleration,
    first_integral_velocity,
    fit_alpha,
    generate_ode,
    generate_ode_time_varying,
    integrate_first_integral,
    phase_function,
)
from .exprdsl import Expr, differentiate, evaluate, parse

__all__ = [
    "apps",
    "catalog",
    "errors",
    "verify",
    "DeformedOscillator",
    "OdeForm",
    "generate_ode",
    "generate_ode_time_varying",
    "integrate_first_integral",
    "explicit_acceleration",
    "first_integral_velocity",
    "fit_alpha",
    "phase_function",
    "energy",
    "energy_rate",
    "Expr",
    "parse",
    "evaluate",
    "differentiate",
]

__version__ = "0.1.0"
