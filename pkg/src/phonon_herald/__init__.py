"""Heralded single-phonon Fock states from photon subtraction in a linearized optomechanical cavity."""

__version__ = "0.1.0"

from .analysis import (
    PolynomialGaussianWigner,
    Scenario,
    fidelity_single_phonon,
    fidelity_time_sweep,
    phonon_distribution,
    temperature_sweep,
    wigner_grid,
)
from .dynamics import (
    drift_matrix,
    diffusion_matrix,
    evolve_covariance,
    evolve_series,
    initial_covariance,
    stability_check,
    steady_state_covariance,
)
from .fock import fock_oracle_conditional, fock_wigner
from .gaussian import CovarianceMatrix, effective_phonon, logarithmic_negativity, physicality_check
from .params import DerivedParams, PhysicalParams, derive_params, reference_params, thermal_occupancy, validate
from .subtraction import (
    ConditionalWigner,
    conditional_characteristic,
    conditional_wigner,
    conditioning_convention,
    heralding_weight,
)
