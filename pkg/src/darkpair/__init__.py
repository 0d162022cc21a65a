"""Two-mode squeezing of atomic spin waves generated by dark-state-polariton pair creation.

Three layers that check each other:

* :mod:`darkpair.params` -- physical inputs, derived rates, closed-form predictions
* :mod:`darkpair.ideal` -- lossless two-mode squeezed vacuum
* :mod:`darkpair.gaussian` -- covariance-matrix engine with loss, gain and noise
* :mod:`darkpair.fock` -- truncated Fock-space master-equation oracle
"""

from .errors import ConfigError, NumericalGuardError, OracleGuardError, StepSizeError
from .gaussian import (
    GaussianState,
    LinearModel,
    build_model,
    diffusion_matrix,
    evolve,
    excitations,
    minimal_variance,
    variances,
)
from .ideal import ideal_excitations, ideal_variances, state_coefficients
from .params import (
    DerivedRates,
    PhysicalParams,
    RegimeReport,
    derive_rates,
    predict_optimal_detuning,
    predict_optimal_squeezing,
    predict_optimal_time,
    predict_variance,
    regime_check,
)

__version__ = "0.1.0"
