"""Simulation and analysis toolkit for the forced inviscid dyadic model of
turbulence."""

from .core import (DEFAULT_LAMBDA, ConfigurationError, ModelParams, box_energy,
                   distance, energy, energy_flux, jacobian, rhs, sobolev_norm)
from .equilibrium import (FixedPoint, ForcingSpec, InfeasibleFixedPoint,
                          fixed_point_general, fixed_point_single, residual,
                          uniqueness_orbit)
from .spectral import (CfConfig, EigenResult, alpha, cf_tail, characteristic_X,
                       eigenvector, find_eigenvalues, linearized_rhs)
from .simulator import (BlowupSurrogate, DiagnosticsConfig, IntegrationError,
                        SolverOptions, Trajectory, detect_crossing,
                        galerkin_study, integrate)
from .analysis import (DecayReport, FitResult, blowup_bound, decay_check,
                       energy_balance_audit, kolmogorov_constants, spectrum_fit)

__version__ = "0.1.0"
