"""Damping and noise kernels of the scalar and electromagnetic environments.

Natural units hbar = c = k_B = 1 throughout.  Dipole magnitudes are absorbed
into the base damping strength gamma0; self-correlations are regularized by
substituting the cutoff length r0 for the vanishing self-separation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .specfun import fs0, fs1, nbar, sinc

__all__ = [
    "SCALAR",
    "ELECTROMAGNETIC",
    "AtomArray",
    "FieldSpec",
    "UnsupportedFieldError",
    "damping_kernel_freq",
    "noise_kernel_freq",
    "damping_kernel_time",
    "validate_cutoff",
]

SCALAR = "scalar"
ELECTROMAGNETIC = "electromagnetic"


class UnsupportedFieldError(ValueError):
    """Requested operation is not available for this field kind."""


@dataclass(frozen=True)
class AtomArray:
    """Positions, transition frequencies and dipole orientations of N qubits.

    omegas : (N,) transition frequencies, all > 0
    positions : (N, 3) positions
    dipole_dirs : (N, 3) unit vectors (default: all along z)
    """

    omegas: np.ndarray
    positions: np.ndarray
    dipole_dirs: np.ndarray = field(default=None)

    def __post_init__(self):
        omegas = np.atleast_1d(np.asarray(self.omegas, dtype=float))
        positions = np.asarray(self.positions, dtype=float).reshape(len(omegas), 3)
        if self.dipole_dirs is None:
            dirs = np.tile([0.0, 0.0, 1.0], (len(omegas), 1))
        else:
            dirs = np.asarray(self.dipole_dirs, dtype=float).reshape(len(omegas), 3)
        if len(omegas) < 1:
            raise ValueError("need at least one atom")
        if np.any(omegas <= 0.0):
            raise ValueError("all transition frequencies must be > 0")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("dipole directions must be unit vectors (to 1e-12)")
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "dipole_dirs", dirs)

    @property
    def n_atoms(self):
        return len(self.omegas)

    def separation(self, n, m):
        """Distance |r_n - r_m|."""
        return float(np.linalg.norm(self.positions[n] - self.positions[m]))

    def min_separation(self):
        """Smallest nonzero pairwise distance (inf for a single atom)."""
        best = np.inf
        for n in range(self.n_atoms):
            for m in range(n + 1, self.n_atoms):
                d = self.separation(n, m)
                if d > 0.0:
                    best = min(best, d)
        return best

    @staticmethod
    def on_line(omegas, spacing, dipole_dirs=None):
        """Atoms on the x axis with uniform spacing between neighbours."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        n = len(omegas)
        positions = np.zeros((n, 3))
        positions[:, 0] = spacing * np.arange(n)
        return AtomArray(omegas, positions, dipole_dirs)

    @staticmethod
    def pair(omega1, omega2, separation, dipole_dirs=None):
        """Two atoms on the x axis at the given separation."""
        return AtomArray.on_line([omega1, omega2], separation, dipole_dirs)


@dataclass(frozen=True)
class FieldSpec:
    """Field environment: kind, temperature, base damping strength, cutoff.

    cutoff_length is the regularization length r0 = 1/Lambda substituted for
    the vanishing self-separation; it must stay below the smallest interatomic
    distance (checked where atoms are available, see validate_cutoff).
    """

    kind: str = SCALAR
    temperature: float = 0.0
    gamma0: float = 1e-3
    cutoff_length: float = 1e-4

    def __post_init__(self):
        if self.kind not in (SCALAR, ELECTROMAGNETIC):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.temperature < 0.0:
            raise ValueError("temperature must be >= 0")
        if self.gamma0 <= 0.0:
            raise ValueError("gamma0 must be > 0")
        if self.cutoff_length <= 0.0:
            raise ValueError("cutoff_length must be > 0")


def validate_cutoff(fieldspec, atoms):
    """Enforce r0 strictly below the minimum nonzero interatomic separation."""
    rmin = atoms.min_separation()
    if fieldspec.cutoff_length >= rmin:
        raise ValueError(
            f"cutoff length {fieldspec.cutoff_length} must be below the "
            f"minimum interatomic separation {rmin}"
        )


def _effective_separation(fieldspec, atoms, n, m):
    # Self-terms use the cutoff length in place of the vanishing distance.
    if n == m:
        return fieldspec.cutoff_length
    r = atoms.separation(n, m)
    return r if r > 0.0 else fieldspec.cutoff_length


def damping_kernel_freq(fieldspec, atoms, n, m, omega):
    """Frequency-domain damping kernel gamma_nm(omega); symmetric in (n, m).

    Scalar field: gamma0 * sinc(r omega).  Electromagnetic field:
    gamma0 * d_n . {fs1(r omega) 1 + fs0(r omega) rr^T} . d_m, with the
    self-term reduced to gamma0 * fs1(r0 omega) (fs0 carries no weight at
    coincidence since the direction is undefined and fs0(0) = 0).
    """
    r = _effective_separation(fieldspec, atoms, n, m)
    z = r * omega
    if fieldspec.kind == SCALAR:
        return fieldspec.gamma0 * sinc(z)
    dn = atoms.dipole_dirs[n]
    dm = atoms.dipole_dirs[m]
    if n == m:
        return fieldspec.gamma0 * fs1(z)
    rvec = atoms.positions[n] - atoms.positions[m]
    rhat = rvec / np.linalg.norm(rvec)
    proj = float(dn @ rhat) * float(dm @ rhat)
    return fieldspec.gamma0 * (fs1(z) * float(dn @ dm) + fs0(z) * proj)


def noise_kernel_freq(fieldspec, atoms, n, m, omega):
    """Frequency-domain noise kernel via the fluctuation-dissipation relation.

    alpha_nm(omega) = 2 gamma_nm(omega) |omega| [nbar(|omega|, T) + theta(-omega)];
    equals 2 T gamma_nm(0) at omega = 0 and 2 gamma |omega| theta(-omega) at T = 0.
    """
    g = damping_kernel_freq(fieldspec, atoms, n, m, omega)
    T = fieldspec.temperature
    if omega == 0.0:
        return 2.0 * T * g
    occ = nbar(abs(omega), T)
    if omega < 0.0:
        occ += 1.0
    return 2.0 * g * abs(omega) * occ


def damping_kernel_time(fieldspec, atoms, n, m, t):
    """Time-domain damping kernel (scalar field only): light-cone rectangle.

    gamma_nm(t) = (gamma0/2) theta(r - |t|) / (2 r), with r the effective
    separation.  The boundary |t| = r is assigned the half value.
    """
    if fieldspec.kind != SCALAR:
        raise UnsupportedFieldError(
            "time-domain damping kernel is only available for the scalar field"
        )
    r = _effective_separation(fieldspec, atoms, n, m)
    at = abs(t)
    if at > r:
        return 0.0
    box = 0.5 if at == r else 1.0
    return fieldspec.gamma0 / 2.0 * box / (2.0 * r)
