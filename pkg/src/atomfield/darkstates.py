"""Proper and improper dark states: construction, counting, numeric null spaces.

Proper dark states are annihilated by the collective coupling Sigma_x inside a
fixed-excitation sector (the j = 0, m = 0 states); they are decoherence free
at any temperature.  Improper dark states at T = 0 are the lowest-weight
(m = -j) states of each collective-spin sector: they have no downward matrix
elements, so they are stationary at second order but acquire a different,
temperature-dependent form at T > 0.

Liouvillian-based checks run in the coincident-atom (collective) limit, where
all pair kernels are regulated at the same cutoff length and the collective
structure of the coupling is exact.  At any finite separation the self and
cross coefficient regulators differ logarithmically, which assigns the
cross-excitation dark coherences small but nonzero rates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb, factorial

import numpy as np
import scipy.linalg as sla

from .hilbert import collective_spin, sector_indices
from .kernels import AtomArray, FieldSpec
from .liouvillian import build_liouvillian, gamma_single, spectrum_numeric, vec

__all__ = [
    "proper_dark_count_formula",
    "improper_dark_count_formula",
    "proper_dark_basis",
    "improper_dark_basis_T0",
    "numeric_null_count",
    "NullSpaceInfo",
    "DarkStateReport",
    "build_report",
    "subspace_overlap",
]

NULL_TOL_STRICT = 1e-6   # in units of gamma: exactly stationary modes
NULL_TOL_WEAK = 1e-2     # in units of gamma: includes O(gamma^2)-rate modes
RANK_TOL = 1e-10


def proper_dark_count_formula(n_atoms):
    """N! / [(N/2+1)! (N/2)!] for even N, zero for odd N."""
    if n_atoms % 2:
        return 0
    half = n_atoms // 2
    return factorial(n_atoms) // (factorial(half + 1) * factorial(half))


def improper_dark_count_formula(n_atoms, j):
    """N! (2j+1) / [(N/2+j+1)! (N/2-j)!] lowest-weight states of sector j."""
    two_j = int(round(2 * j))
    if (n_atoms + two_j) % 2 or two_j < 0 or two_j > n_atoms:
        raise ValueError(f"sector j={j} not present for N={n_atoms}")
    num = factorial(n_atoms) * (two_j + 1)
    den = factorial((n_atoms + two_j) // 2 + 1) * factorial((n_atoms - two_j) // 2)
    return num // den


def allowed_j(n_atoms):
    """Collective-spin sectors j = N/2, N/2-1, ..., down to 0 or 1/2."""
    return [ (n_atoms - 2 * k) / 2.0 for k in range(n_atoms // 2 + 1) ]


def _restricted_null_basis(op, columns, tol=RANK_TOL):
    # Orthonormal basis of {v supported on `columns` : op v = 0}.
    sub = op[:, columns]
    _, svals, vh = np.linalg.svd(sub, full_matrices=True)
    dim = len(columns)
    rank = int((svals > tol * max(svals[0], 1.0)).sum()) if len(svals) else 0
    null_small = vh.conj().T[:, rank:dim]
    full = np.zeros((op.shape[0], null_small.shape[1]), dtype=complex)
    full[columns, :] = null_small
    return full


def proper_dark_basis(n_atoms):
    """Orthonormal basis of states with Sigma_x |psi> = 0 in a Sigma_z sector.

    Nonempty only for even N (the j = 0, m = 0 sector); returns a
    (2^N, count) array, empty for odd N.
    """
    ops = collective_spin(n_atoms)
    blocks = []
    for s in range(n_atoms + 1):
        cols = sector_indices(n_atoms, s)
        basis = _restricted_null_basis(ops["x"].real, cols)
        if basis.shape[1]:
            blocks.append(basis)
    if not blocks:
        return np.zeros((2**n_atoms, 0), dtype=complex)
    return np.hstack(blocks)


def improper_dark_basis_T0(n_atoms):
    """Per-sector bases of the T = 0 improper dark states (m = -j states).

    Returns a dict {j: (2^N, count) array}.  Within each fixed-excitation
    sector these are the null vectors of the collective lowering operator,
    i.e. the lowest-weight vectors of every spin-j irreducible block.
    """
    ops = collective_spin(n_atoms)
    out = {}
    for s in range(n_atoms + 1):
        j = n_atoms / 2.0 - s
        if j < 0:
            continue
        cols = sector_indices(n_atoms, s)
        basis = _restricted_null_basis(ops["-"].real, cols)
        if basis.shape[1]:
            out[j] = basis
    return out


@dataclass(frozen=True)
class NullSpaceInfo:
    """Numeric non-decaying mode counts of a Liouvillian spectrum."""

    strict_count: int          # |f| < tol (exactly stationary)
    nondecaying_count: int     # |Re f| < tol (includes oscillating coherences)
    basis: np.ndarray          # vec'd right operators of the nondecaying modes
    tol: float


def numeric_null_count(spectrum, gamma, tol_factor=NULL_TOL_STRICT):
    """Count spectrum modes with |Re f| below tol_factor * gamma.

    The strictly stationary subset (|f| below tolerance) is reported
    separately; a nonzero rate within a factor 3 of the tolerance triggers an
    ambiguity warning.
    """
    tol = tol_factor * gamma
    rates = np.abs(spectrum.frequencies.real)
    mask = rates < tol
    nonzero = rates[~mask]
    if nonzero.size and nonzero.min() < 3.0 * tol:
        warnings.warn(
            f"smallest excluded rate {nonzero.min():.3e} is within a factor 3 "
            f"of the null tolerance {tol:.3e}",
            RuntimeWarning,
        )
    strict = int((np.abs(spectrum.frequencies) < tol).sum())
    basis = spectrum.right[:, mask]
    return NullSpaceInfo(strict, int(mask.sum()), basis, tol)


def subspace_overlap(basis_a, basis_b):
    """Smallest principal-angle cosine between the spans of two vec'd bases.

    1.0 when span(a) is contained in span(b); < 1 when some direction of a
    leaves b.  Bases are orthonormalized internally.
    """
    qa, _ = np.linalg.qr(basis_a)
    qb, _ = np.linalg.qr(basis_b)
    svals = np.linalg.svd(qa.conj().T @ qb, compute_uv=False)
    k = min(basis_a.shape[1], basis_b.shape[1])
    return float(svals[:k].min())


@dataclass(frozen=True)
class DarkStateReport:
    n_atoms: int
    temperature: float
    proper_count: int
    proper_count_formula: int
    improper_counts: dict          # j -> constructed dimension
    improper_counts_formula: dict  # j -> counting-formula value
    strict_null_count: int
    strict_null_expected: int      # sum_j mult_j^2 (constants of motion)
    nondecaying_count: int
    overlap_with_T0: float         # min principal cosine vs the T=0 null family
    gamma: float

    def lines(self):
        rows = [
            f"atoms:                 {self.n_atoms}",
            f"temperature:           {self.temperature:g}",
            f"proper dark states:    {self.proper_count} "
            f"(formula {self.proper_count_formula})",
        ]
        for j in sorted(self.improper_counts, reverse=True):
            rows.append(
                f"improper (j={j:g}):      {self.improper_counts[j]} "
                f"(formula {self.improper_counts_formula[j]})"
            )
        rows += [
            f"numeric strict nulls:  {self.strict_null_count} "
            f"(expected {self.strict_null_expected})",
            f"numeric non-decaying:  {self.nondecaying_count}",
            f"overlap vs T=0 family: {self.overlap_with_T0:.6f}",
        ]
        return rows


def _coincident_liouvillian(n_atoms, temperature, gamma0, cutoff):
    atoms = AtomArray([1.0] * n_atoms, np.zeros((n_atoms, 3)))
    fieldspec = FieldSpec("scalar", temperature, gamma0, cutoff)
    lsup = build_liouvillian(fieldspec, atoms, magnetostatics=False)
    return atoms, fieldspec, lsup


def build_report(n_atoms, temperature=0.0, gamma0=1e-4, cutoff=1e-4,
                 tol_factor=NULL_TOL_STRICT):
    """Assemble the dark-state report for N resonant atoms.

    The Liouvillian runs in the coincident (collective) limit with the
    induced static interactions excluded; the analytic bases are geometry
    independent.
    """
    proper = proper_dark_basis(n_atoms)
    improper = improper_dark_basis_T0(n_atoms)
    counts = {j: b.shape[1] for j, b in improper.items()}
    counts_formula = {j: improper_dark_count_formula(n_atoms, j) for j in counts}
    strict_expected = sum(c * c for c in counts.values())

    atoms, fieldspec, lsup = _coincident_liouvillian(
        n_atoms, temperature, gamma0, cutoff
    )
    gamma = gamma_single(fieldspec, atoms)
    spectrum = spectrum_numeric(lsup)
    info_strict = numeric_null_count(spectrum, gamma, tol_factor)
    info_weak = numeric_null_count(spectrum, gamma, NULL_TOL_WEAK)

    if temperature > 0.0:
        _, _, l0 = _coincident_liouvillian(n_atoms, 0.0, gamma0, cutoff)
        info0 = numeric_null_count(spectrum_numeric(l0), gamma, tol_factor)
        overlap = subspace_overlap(info_strict.basis, info0.basis)
    else:
        overlap = 1.0

    return DarkStateReport(
        n_atoms=n_atoms,
        temperature=temperature,
        proper_count=proper.shape[1],
        proper_count_formula=proper_dark_count_formula(n_atoms),
        improper_counts=counts,
        improper_counts_formula=counts_formula,
        strict_null_count=info_strict.nondecaying_count,
        strict_null_expected=strict_expected,
        nondecaying_count=info_weak.nondecaying_count,
        overlap_with_T0=overlap,
        gamma=gamma,
    )
