"""Liouvillian construction, spectra (dense and perturbative), and evolution.

Vectorization is column-stacking: vec(rho) stacks columns, so
vec(A rho B) = (B^T kron A) vec(rho).  The second-order generator is

    L2 rho = sum_nm [sx_n, rho C_nm^dag - C_nm rho],
    C_nm   = A_nm(+Omega_m) s+_m + A_nm(-Omega_m) s-_m,

acting on top of the free commutator L0 rho = -i [H, rho].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .coefficients import build_coefficient_set
from .hilbert import build_pauli, free_hamiltonian, level_energies

__all__ = [
    "Superoperator",
    "LiouvilleSpectrum",
    "vec",
    "unvec",
    "spre",
    "spost",
    "build_liouvillian",
    "induced_unitary",
    "spectrum_numeric",
    "spectrum_perturbative",
    "pauli_sector_generator",
    "max_decay_rate_vs_N",
    "evolve",
    "steady_state",
    "gamma_single",
    "MAX_ATOMS_DENSE",
    "EIG_CONDITION_LIMIT",
]

MAX_ATOMS_DENSE = 6         # hard dimension guard for the dense builder
MAX_ATOMS_EIG = 5           # dense eigensolve guard
EIG_CONDITION_LIMIT = 1e10  # eigenbasis condition number triggering fallback
DEGENERACY_KAPPA = 10.0     # cluster radius in units of gamma


def vec(rho):
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v):
    """Inverse of vec."""
    v = np.asarray(v)
    dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def spre(a):
    """Superoperator of left multiplication: vec(A rho)."""
    dim = a.shape[0]
    return np.kron(np.eye(dim), a)


def spost(b):
    """Superoperator of right multiplication: vec(rho B)."""
    dim = b.shape[0]
    return np.kron(b.T, np.eye(dim))


@dataclass(frozen=True)
class Superoperator:
    """Dense 4^N x 4^N generator with its build flags."""

    matrix: np.ndarray
    n_atoms: int
    renormalized: bool = True
    magnetostatics: bool = True

    @property
    def dim(self):
        return 2**self.n_atoms

    def apply(self, rho):
        return unvec(self.matrix @ vec(rho))


@dataclass(frozen=True)
class LiouvilleSpectrum:
    """Eigen-frequencies with right/left eigen-operators (damping basis).

    Right operators are unvec'd columns of `right`; `left` rows are the
    biorthogonal duals, so Tr[left_k^dag rho] weights mode k: after
    normalization <left_k, right_j> = delta_kj.
    """

    frequencies: np.ndarray           # complex eigenvalues f
    right: np.ndarray                 # (4^N, n_modes), columns vec(o_k)
    left: np.ndarray                  # (n_modes, 4^N), rows dual supervectors
    provenance: str                   # 'NumericDense' or 'Perturbative'
    n_atoms: int
    condition: float = np.nan
    ill_conditioned: bool = False

    def right_operator(self, k):
        return unvec(self.right[:, k])

    def mode_weights(self, rho0):
        return self.left @ vec(rho0)


def _coupling_ops(atoms):
    n_atoms = atoms.n_atoms
    sx = [build_pauli(n, "x", n_atoms) for n in range(n_atoms)]
    sp = [build_pauli(n, "+", n_atoms) for n in range(n_atoms)]
    sm = [build_pauli(n, "-", n_atoms) for n in range(n_atoms)]
    return sx, sp, sm


def _c_operators(atoms, coeffs, renormalize, magnetostatics):
    # C_nm = A_nm(+Omega_m) s+_m + A_nm(-Omega_m) s-_m with flag-adjusted A.
    n_atoms = atoms.n_atoms
    _, sp, sm = _coupling_ops(atoms)
    c_ops = {}
    for n in range(n_atoms):
        for m in range(n_atoms):
            ap = coeffs.effective(n, m, +1, renormalize, magnetostatics)
            am = coeffs.effective(n, m, -1, renormalize, magnetostatics)
            c_ops[(n, m)] = ap * sp[m] + am * sm[m]
    return c_ops


def build_liouvillian(fieldspec, atoms, coeffs=None, renormalize=True,
                      magnetostatics=True):
    """Assemble L = L0 + L2 as a dense superoperator."""
    if atoms.n_atoms > MAX_ATOMS_DENSE:
        raise ValueError(
            f"dense Liouvillian limited to {MAX_ATOMS_DENSE} atoms "
            f"(got {atoms.n_atoms})"
        )
    if coeffs is None:
        coeffs = build_coefficient_set(fieldspec, atoms)
    n_atoms = atoms.n_atoms
    h = free_hamiltonian(atoms)
    lmat = -1j * (spre(h) - spost(h))
    sx, _, _ = _coupling_ops(atoms)
    c_ops = _c_operators(atoms, coeffs, renormalize, magnetostatics)
    for n in range(n_atoms):
        for m in range(n_atoms):
            c = c_ops[(n, m)]
            cd = c.conj().T
            inner = spost(cd) - spre(c)          # rho C^dag - C rho
            lmat += (spre(sx[n]) - spost(sx[n])) @ inner
    return Superoperator(lmat, n_atoms, renormalize, magnetostatics)


def induced_unitary(atoms, coeffs, renormalize=True, magnetostatics=True):
    """Environment-induced Hamiltonian U = (1/2i) sum_nm [sx_n C_nm - C_nm^dag sx_n].

    With renormalize=True the identity-proportional self-energy (the
    counterterm) has been removed; with magnetostatics=False the static 1/r
    cross potential is removed as well.
    """
    n_atoms = atoms.n_atoms
    sx, _, _ = _coupling_ops(atoms)
    c_ops = _c_operators(atoms, coeffs, renormalize, magnetostatics)
    u = np.zeros((2**n_atoms, 2**n_atoms), dtype=complex)
    for n in range(n_atoms):
        for m in range(n_atoms):
            c = c_ops[(n, m)]
            u += (sx[n] @ c - c.conj().T @ sx[n]) / 2.0j
    return u


def gamma_single(fieldspec, atoms, n=0):
    """Single-atom coherence decay rate: Re A_nn(-Omega_n) + Re A_nn(+Omega_n).

    At T = 0 this is gamma0 Omega_n sinc(r0 Omega_n); the population decay
    rate is twice this value.
    """
    from .coefficients import coeff_real

    w = atoms.omegas[n]
    return coeff_real(fieldspec, atoms, n, n, -w) + coeff_real(
        fieldspec, atoms, n, n, +w
    )


def spectrum_numeric(superop):
    """Dense non-Hermitian eigendecomposition with biorthogonal left duals.

    Eigenvalues are sorted by |Im f| then Re f.  Left duals are the rows of
    the inverse of the right eigenvector matrix; a condition number above
    EIG_CONDITION_LIMIT is flagged (and evolve() falls back to an ODE solver).
    """
    if superop.n_atoms > MAX_ATOMS_EIG:
        raise ValueError(
            f"dense eigensolve limited to {MAX_ATOMS_EIG} atoms "
            f"(got {superop.n_atoms})"
        )
    freqs, right = sla.eig(superop.matrix)
    order = np.lexsort((freqs.real, np.abs(freqs.imag)))
    freqs = freqs[order]
    right = right[:, order]
    cond = np.linalg.cond(right)
    ill = bool(cond > EIG_CONDITION_LIMIT)
    if ill:
        warnings.warn(
            f"eigenbasis condition number {cond:.2e} exceeds "
            f"{EIG_CONDITION_LIMIT:.0e}; spectral reconstruction unreliable",
            RuntimeWarning,
        )
    left = sla.inv(right)
    return LiouvilleSpectrum(
        frequencies=freqs,
        right=right,
        left=left,
        provenance="NumericDense",
        n_atoms=superop.n_atoms,
        condition=float(cond),
        ill_conditioned=ill,
    )


def _l2_block(atoms, coeffs, pairs, renormalize=True, magnetostatics=True):
    # Matrix elements <i| L2{ |k><l| } |j> for (i,j), (k,l) in the pair list.
    n_atoms = atoms.n_atoms
    sx, _, _ = _coupling_ops(atoms)
    c_ops = _c_operators(atoms, coeffs, renormalize, magnetostatics)
    idx_i = np.array([p[0] for p in pairs])
    idx_j = np.array([p[1] for p in pairs])
    n_p = len(pairs)
    block = np.zeros((n_p, n_p), dtype=complex)
    eye_ik = (idx_i[:, None] == idx_i[None, :]).astype(complex)
    eye_lj = (idx_j[:, None] == idx_j[None, :]).astype(complex)
    for n in range(n_atoms):
        x = sx[n].real  # sigma_x embeddings are real
        for m in range(n_atoms):
            c = c_ops[(n, m)]
            xc = x @ c
            cdx = c.conj().T @ x
            # row index: (i, j); column index: (k, l)
            block += x[np.ix_(idx_i, idx_i)] * c[np.ix_(idx_j, idx_j)].conj()
            block -= xc[np.ix_(idx_i, idx_i)] * eye_lj
            block -= eye_ik * cdx[np.ix_(idx_j, idx_j)].T
            block += c[np.ix_(idx_i, idx_i)] * x[np.ix_(idx_j, idx_j)].T
    return block


def _cluster_pairs(energies, gamma_scale, kappa):
    # Group dyad frequencies omega_ij into clusters of radius kappa * gamma.
    dim = len(energies)
    pairs = [(i, j) for i in range(dim) for j in range(dim)]
    omega_ij = np.array([energies[i] - energies[j] for (i, j) in pairs])
    order = np.argsort(omega_ij)
    clusters = []
    current = [order[0]]
    gaps = []
    for a, b in zip(order[:-1], order[1:]):
        gap = omega_ij[b] - omega_ij[a]
        gaps.append(gap)
        if gap <= kappa * gamma_scale:
            current.append(b)
        else:
            clusters.append(current)
            current = [b]
    clusters.append(current)
    threshold = kappa * gamma_scale
    for gap in gaps:
        if gap > 0 and abs(gap - threshold) < 0.1 * threshold:
            warnings.warn(
                f"cluster gap {gap:.3e} within 10% of the clustering "
                f"threshold {threshold:.3e}; results may depend on kappa",
                RuntimeWarning,
            )
    return pairs, clusters


def spectrum_perturbative(fieldspec, atoms, coeffs=None, renormalize=True,
                          magnetostatics=True, kappa=DEGENERACY_KAPPA):
    """Canonical perturbation theory for the Liouvillian spectrum.

    Zeroth-order frequencies -i omega_ij are clustered with radius
    kappa * gamma; each cluster's projected L2 block is diagonalized
    (non-degenerate clusters reduce to the single matrix element
    <i| L2{|i><j|} |j>).  Valid for gamma well below the level spacings.
    """
    if coeffs is None:
        coeffs = build_coefficient_set(fieldspec, atoms)
    energies = level_energies(atoms)
    gamma_scale = max(gamma_single(fieldspec, atoms, n) for n in range(atoms.n_atoms))
    pairs, clusters = _cluster_pairs(energies, gamma_scale, kappa)
    dim = 2**atoms.n_atoms
    freqs = np.zeros(dim * dim, dtype=complex)
    right = np.zeros((dim * dim, dim * dim), dtype=complex)
    k_out = 0
    for cluster in clusters:
        cpairs = [pairs[c] for c in cluster]
        block = _l2_block(atoms, coeffs, cpairs, renormalize, magnetostatics)
        for row, (i, j) in enumerate(cpairs):
            block[row, row] += -1j * (energies[i] - energies[j])
        vals, vecs = sla.eig(block)
        for col in range(len(cpairs)):
            freqs[k_out] = vals[col]
            op = np.zeros((dim, dim), dtype=complex)
            for row, (i, j) in enumerate(cpairs):
                op[i, j] = vecs[row, col]
            right[:, k_out] = vec(op)
            k_out += 1
    order = np.lexsort((freqs.real, np.abs(freqs.imag)))
    freqs = freqs[order]
    right = right[:, order]
    left = sla.inv(right)
    return LiouvilleSpectrum(
        frequencies=freqs,
        right=right,
        left=left,
        provenance="Perturbative",
        n_atoms=atoms.n_atoms,
        condition=float(np.linalg.cond(right)),
    )


def pauli_sector_generator(fieldspec, atoms, coeffs=None, renormalize=True,
                           magnetostatics=True, kappa=DEGENERACY_KAPPA):
    """Projected generator of the omega_ij = 0 (stationary) cluster.

    Returns (pairs, block): the dyad index pairs spanning the cluster that
    contains the diagonal, and the corresponding L2 block including the
    -i omega_ij detunings.  For resonant atoms this covers the Pauli sector
    plus all degenerate coherences.
    """
    if coeffs is None:
        coeffs = build_coefficient_set(fieldspec, atoms)
    energies = level_energies(atoms)
    gamma_scale = max(gamma_single(fieldspec, atoms, n) for n in range(atoms.n_atoms))
    pairs, clusters = _cluster_pairs(energies, gamma_scale, kappa)
    for cluster in clusters:
        cpairs = [pairs[c] for c in cluster]
        if any(i == j for (i, j) in cpairs):
            block = _l2_block(atoms, coeffs, cpairs, renormalize, magnetostatics)
            for row, (i, j) in enumerate(cpairs):
                block[row, row] += -1j * (energies[i] - energies[j])
            return cpairs, block
    raise RuntimeError("no cluster contains the diagonal sector")


def max_decay_rate_vs_N(fieldspec_factory, omega, n_list, spacing):
    """Maximal |Re f| of the stationary-sector modes for each atom number.

    fieldspec_factory(n) must return the FieldSpec to use for n atoms; atoms
    are resonant on a line with the given nearest-neighbour spacing.
    """
    from .kernels import AtomArray

    rows = []
    for n in n_list:
        atoms = AtomArray.on_line([omega] * n, spacing)
        fieldspec = fieldspec_factory(n)
        _, block = pauli_sector_generator(fieldspec, atoms)
        vals = sla.eigvals(block)
        rows.append((n, float(np.abs(vals.real).max())))
    return rows


def evolve(superop, rho0, times, spectrum=None):
    """Evolve rho0 through the listed times.

    Uses the eigen-reconstruction when the eigenbasis is well conditioned,
    otherwise an adaptive explicit integrator with the step bounded by the
    generator norm.
    """
    times = np.asarray(times, dtype=float)
    if spectrum is None:
        spectrum = spectrum_numeric(superop)
    if not spectrum.ill_conditioned:
        weights = spectrum.left @ vec(rho0)
        out = []
        for t in times:
            v = spectrum.right @ (np.exp(spectrum.frequencies * t) * weights)
            out.append(unvec(v))
        return out
    norm = np.linalg.norm(superop.matrix, 2)
    sol = solve_ivp(
        lambda _, y: superop.matrix @ y,
        (0.0, float(times.max())),
        vec(rho0).astype(complex),
        t_eval=times,
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
        max_step=max(0.1 / norm, 1e-12),
    )
    if not sol.success:
        raise RuntimeError(f"ODE fallback failed: {sol.message}")
    return [unvec(sol.y[:, k]) for k in range(sol.y.shape[1])]


def steady_state(superop, tol=1e-8):
    """Trace-normalized right null eigen-operator(s) of L.

    Returns (states, multiple): the list of stationary density operators and
    a flag marking a degenerate steady-state sector.
    """
    spec = spectrum_numeric(superop)
    idx = np.where(np.abs(spec.frequencies) < tol)[0]
    if len(idx) == 0:
        raise RuntimeError("no stationary mode found below tolerance")
    states = []
    for k in idx:
        op = spec.right_operator(k)
        op = (op + op.conj().T) / 2.0
        tr = np.trace(op)
        if abs(tr) > 1e-12:
            states.append(op / tr)
    multiple = len(idx) > 1
    if multiple:
        warnings.warn(
            f"{len(idx)} null modes found; steady state is an affine family",
            RuntimeWarning,
        )
    return states, multiple
