"""Second-order asymptotic (reduced thermal) state at high temperature and T = 0.

The zeroth-order asymptotic state is the product Boltzmann state.  The
second-order correction in the energy basis is

    <i| drho |j> = sum_{nmk} (R_ijk^{nm} / Z0) <i|sx_m|k> <k|sx_n|j>,

with the off-diagonal R built from differences of coefficients A_nm at level
splittings and, at T = 0, the diagonal/resonant entries from coefficient
derivatives (only terms with a vanishing Boltzmann exponent survive the
beta -> infinity limit).  The expansion is secular in beta: at finite T it is
trusted only while gamma/Omega stays small against the smallest Boltzmann
weight, otherwise the validity flag is lowered (the numbers are still
computed).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coefficients import coeff, coeff_imag, coeff_imag_derivative
from .hilbert import build_pauli, level_energies
from .kernels import validate_cutoff
from .liouvillian import gamma_single, steady_state

__all__ = [
    "boltzmann_state",
    "high_t_condition",
    "second_order_correction",
    "asymptotic_from_nullspace",
    "AsymptoticState",
    "BRANCH_HIGH_T",
    "BRANCH_ZERO_T",
    "BRANCH_NULLSPACE",
]

BRANCH_HIGH_T = "HighT"
BRANCH_ZERO_T = "ZeroT"
BRANCH_NULLSPACE = "NullSpace"

HIGH_T_MARGIN = 0.1          # gamma/Omega must be below margin * min weight
DEGENERACY_RTOL = 1e-9       # relative tolerance for level-energy equality


@dataclass(frozen=True)
class AsymptoticState:
    """Zeroth-order state, second-order correction, and provenance."""

    rho_zeroth: np.ndarray
    delta: np.ndarray
    branch: str
    valid: bool

    @property
    def rho(self):
        return self.rho_zeroth + self.delta


def boltzmann_state(atoms, temperature):
    """Product Gibbs state prod_n (1 - tanh(Omega_n / 2T) sz_n) / 2.

    At T = 0 this is the ground-state projector (the ground level of
    H = sum Omega_n s+_n s-_n is nondegenerate since all Omega_n > 0).
    """
    if temperature < 0.0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0.0 and np.any(atoms.omegas <= 0.0):
        raise ValueError("ground level degenerate: T = 0 state undefined")
    rho = np.array([[1.0]], dtype=complex)
    for n in range(atoms.n_atoms):
        if temperature == 0.0:
            th = 1.0
        else:
            th = np.tanh(atoms.omegas[n] / (2.0 * temperature))
        single = np.array([[(1.0 + th) / 2.0, 0.0], [0.0, (1.0 - th) / 2.0]])
        rho = np.kron(rho, single)
    return rho.astype(complex)


def high_t_condition(fieldspec, atoms):
    """True when gamma/Omega is small against every pair Boltzmann weight.

    gamma here is the zero-temperature damping measure gamma0 * Omega (the
    coupling strength), not the thermally enhanced rate.
    """
    T = fieldspec.temperature
    if T <= 0.0:
        return False
    ratios = []
    for n in range(atoms.n_atoms):
        for m in range(atoms.n_atoms):
            if n == m:
                continue
            weight = np.exp(-(atoms.omegas[n] + atoms.omegas[m]) / T)
            ratios.append(fieldspec.gamma0 / weight)
    return bool(max(ratios) < HIGH_T_MARGIN)


def _coefficient_cache(fieldspec, atoms, magnetostatics):
    cache = {}

    def a_of(n, m, w):
        key = (n, m, round(float(w), 14))
        if key not in cache:
            value = coeff(fieldspec, atoms, n, m, w)
            if n != m and not magnetostatics:
                value -= 1j * coeff_imag(fieldspec, atoms, n, m, 0.0)
            cache[key] = value
        return cache[key]

    return a_of


def _imag_derivative_cache(fieldspec, atoms, magnetostatics):
    # magnetostatics subtracts an omega-independent constant: no effect here,
    # kept for symmetry of the call signature
    del magnetostatics
    cache = {}

    def d_of(n, m, w):
        key = (n, m, round(float(w), 14))
        if key not in cache:
            cache[key] = coeff_imag_derivative(fieldspec, atoms, n, m, w)
        return cache[key]

    return d_of


def second_order_correction(fieldspec, atoms, magnetostatics=True):
    """Second-order correction to the asymptotic state in the energy basis.

    Finite T: the off-diagonal (non-resonant) R entries; all entries between
    equal energies vanish identically.  T = 0: the beta -> infinity limit,
    with resonant/diagonal entries from the coefficient derivative.  The
    magnetostatics flag drops the static 1/r part of all cross coefficients.
    """
    validate_cutoff(fieldspec, atoms)
    T = fieldspec.temperature
    n_atoms = atoms.n_atoms
    dim = 2**n_atoms
    energies = level_energies(atoms)
    scale = float(np.max(atoms.omegas))
    sx = [build_pauli(n, "x", n_atoms).real for n in range(n_atoms)]
    a_of = _coefficient_cache(fieldspec, atoms, magnetostatics)
    d_of = _imag_derivative_cache(fieldspec, atoms, magnetostatics)

    def same(ei, ej):
        return abs(ei - ej) <= DEGENERACY_RTOL * scale

    if T > 0.0:
        beta = 1.0 / T
        z0 = float(np.sum(np.exp(-beta * energies)))
        boltz = np.exp(-beta * energies)
    else:
        z0 = 1.0
        boltz = (np.abs(energies) <= DEGENERACY_RTOL * scale).astype(float)

    delta = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            total = 0.0
            for n in range(n_atoms):
                for m in range(n_atoms):
                    xm = sx[m]
                    xn = sx[n]
                    for k in range(dim):
                        el = xm[i, k] * xn[k, j]
                        if el == 0.0:
                            continue
                        if same(energies[i], energies[j]):
                            if T > 0.0:
                                continue
                            r_val = 0.0
                            if boltz[k]:
                                r_val += d_of(n, m, energies[i] - energies[k])
                            if boltz[i]:
                                r_val -= d_of(m, n, energies[k] - energies[i])
                        else:
                            wik = energies[i] - energies[k]
                            wjk = energies[j] - energies[k]
                            wki = -wik
                            wkj = -wjk
                            dij = energies[i] - energies[j]
                            first = boltz[k] * (a_of(n, m, wik) - a_of(n, m, wjk))
                            second = boltz[i] * a_of(m, n, wki) - boltz[j] * a_of(
                                m, n, wkj
                            )
                            r_val = ((first + second) / dij).imag
                        total += r_val * el
            delta[i, j] = total / z0

    rho0 = boltzmann_state(atoms, T)
    branch = BRANCH_ZERO_T if T == 0.0 else BRANCH_HIGH_T
    valid = True if T == 0.0 else high_t_condition(fieldspec, atoms)
    if T > 0.0 and not valid:
        warnings.warn(
            "high-temperature validity condition violated: the secular "
            "expansion of the thermal corrections is not trustworthy here",
            RuntimeWarning,
        )
    return AsymptoticState(rho0, delta, branch, valid)


def asymptotic_from_nullspace(superop):
    """Trace-normalized right null eigen-operator of L (cross-check oracle).

    With a degenerate steady-state sector the full family is returned via the
    warning path of steady_state; the first member fills the state slot.
    """
    states, multiple = steady_state(superop)
    rho = states[0]
    dim = rho.shape[0]
    n_atoms = int(round(np.log2(dim)))
    del n_atoms
    return AsymptoticState(rho, np.zeros_like(rho), BRANCH_NULLSPACE, not multiple)
