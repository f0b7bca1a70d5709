"""Open-system dynamics of N two-level atoms in a common quantum field.

Natural units hbar = c = k_B = 1 throughout; frequencies, lengths, times and
temperatures are quoted relative to a reference transition frequency.
"""

from .kernels import (
    AtomArray,
    FieldSpec,
    damping_kernel_freq,
    damping_kernel_time,
    noise_kernel_freq,
)
from .coefficients import (
    build_coefficient_set,
    coeff,
    coeff_fulltime,
    coeff_imag,
    coeff_real,
    renormalization_counterterm,
)
from .liouvillian import (
    build_liouvillian,
    evolve,
    spectrum_numeric,
    spectrum_perturbative,
    steady_state,
)
from .asymptotic import (
    asymptotic_from_nullspace,
    boltzmann_state,
    second_order_correction,
)
from .entanglement import (
    concurrence,
    concurrence_trajectory,
    log_negativity,
    unmaximized_concurrence,
)
from .darkstates import (
    improper_dark_basis_T0,
    proper_dark_basis,
)

__version__ = "0.1.0"

__all__ = [
    "AtomArray",
    "FieldSpec",
    "damping_kernel_freq",
    "damping_kernel_time",
    "noise_kernel_freq",
    "build_coefficient_set",
    "coeff",
    "coeff_fulltime",
    "coeff_imag",
    "coeff_real",
    "renormalization_counterterm",
    "build_liouvillian",
    "evolve",
    "spectrum_numeric",
    "spectrum_perturbative",
    "steady_state",
    "asymptotic_from_nullspace",
    "boltzmann_state",
    "second_order_correction",
    "concurrence",
    "concurrence_trajectory",
    "log_negativity",
    "unmaximized_concurrence",
    "improper_dark_basis_T0",
    "proper_dark_basis",
    "__version__",
]
