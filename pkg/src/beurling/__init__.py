"""Weighted p-Beurling algebras of kernels, twisted convolution and admissible weights."""

from .algebra import (
    FiniteMetricSpace, Kernel, apply, convolve, growth_constants, identity_kernel, involution,
    random_decaying_kernel, schur_pnorm, toeplitz_from_symbol, unweighted_pnorm,
)
from .errors import (
    BeurlingError, ConfigError, ConstructionError, ConvergenceError, DomainError, NumericalError,
    SingularKernelError, UsageError,
)
from .spectral import (
    barnes_bound, decay_profile, hermitian_spectrum, invert, norm_root_sequence, operator_norm_l2,
    power_function, spectral_radius_algebra,
)
from .twisted import (
    TwistedSequence, materialize_twisted_operator, neumann_inverse, twisted_convolve, twisted_inverse,
    twisted_involution, weighted_lp_norm,
)
from .weights import (
    RadialProfile, Weight, aux_weight, check_admissible, check_weak_growth, eps_weight, pair_weight,
    radial_weight, weight_from_spec,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
