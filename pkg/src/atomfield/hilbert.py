"""Operators and states for N qubits: Pauli embeddings, collective spin, states.

Basis ordering: atom 0 is the most significant qubit, so the computational
basis index of |s_0, s_1, ..., s_{N-1}> is sum_n s_n 2^{N-1-n}, with s = 1 the
excited level.  sigma_z = diag(-1, +1) in the (ground, excited) ordering, so
the free Hamiltonian is sum_n Omega_n (1 + sigma_z_n)/2.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "pauli",
    "build_pauli",
    "collective_spin",
    "sector_indices",
    "excitation_number",
    "level_energies",
    "free_hamiltonian",
    "partial_trace_pair",
    "ground_state",
    "excited_all_state",
    "bell_minus",
    "bell_plus",
    "ket_to_dm",
    "parse_state_spec",
    "validate_density_matrix",
    "min_eigenvalue",
]

_SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, 1.0j], [-1.0j, 0.0]], dtype=complex),
    "z": np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex),
    "+": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
    "-": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
}


def pauli(which):
    """Single-qubit Pauli / ladder matrix in the (ground, excited) basis."""
    return _SIGMA[which].copy()


def build_pauli(n, which, n_atoms):
    """Embed a single-qubit operator on atom n into the N-atom space."""
    if not 0 <= n < n_atoms:
        raise IndexError(f"atom index {n} out of range for {n_atoms} atoms")
    op = np.array([[1.0 + 0.0j]])
    for k in range(n_atoms):
        op = np.kron(op, _SIGMA[which] if k == n else np.eye(2, dtype=complex))
    return op


def collective_spin(n_atoms):
    """Collective operators: sums of single-atom Paulis plus Sigma^2.

    Returned as a dict with keys 'x', 'y', 'z', '+', '-', '2'.  Note these are
    Pauli sums, twice the spin operators, so Sigma^2 has eigenvalues
    4 j (j + 1) and Sigma_z has eigenvalues 2 m.
    """
    ops = {}
    for which in ("x", "y", "z", "+", "-"):
        total = np.zeros((2**n_atoms, 2**n_atoms), dtype=complex)
        for n in range(n_atoms):
            total += build_pauli(n, which, n_atoms)
        ops[which] = total
    ops["2"] = ops["x"] @ ops["x"] + ops["y"] @ ops["y"] + ops["z"] @ ops["z"]
    return ops


def excitation_number(index, n_atoms):
    """Number of excited atoms in a computational basis state."""
    return bin(index).count("1")


def sector_indices(n_atoms, n_excitations):
    """Basis indices of the fixed-excitation (Sigma_z eigenvalue) sector."""
    return [
        i for i in range(2**n_atoms) if excitation_number(i, n_atoms) == n_excitations
    ]


def level_energies(atoms):
    """Energies of the 2^N computational basis states (ground energy zero)."""
    n_atoms = atoms.n_atoms
    energies = np.zeros(2**n_atoms)
    for i in range(2**n_atoms):
        for n in range(n_atoms):
            if (i >> (n_atoms - 1 - n)) & 1:
                energies[i] += atoms.omegas[n]
    return energies


def free_hamiltonian(atoms):
    """H = sum_n Omega_n sigma+_n sigma-_n as a diagonal matrix."""
    return np.diag(level_energies(atoms)).astype(complex)


def partial_trace_pair(rho, n, m, n_atoms):
    """Trace out all atoms except n and m, returning their 4x4 state.

    Atom n becomes the first (most significant) qubit of the result.
    """
    if n == m:
        raise ValueError("partial_trace_pair requires two distinct atoms")
    dim = 2**n_atoms
    rho = np.asarray(rho, dtype=complex).reshape([2] * (2 * n_atoms))
    keep = (n, m)
    others = [k for k in range(n_atoms) if k not in keep]
    # axes: 0..N-1 are ket indices, N..2N-1 bra indices
    for k in sorted(others, reverse=True):
        rho = np.trace(rho, axis1=k, axis2=rho.ndim // 2 + k)
    # remaining axes are in the original atom order; put n before m
    if n > m:
        rho = rho.transpose(1, 0, 3, 2)
    del dim
    return rho.reshape(4, 4)


def ground_state(n_atoms):
    """|0...0><0...0|."""
    rho = np.zeros((2**n_atoms, 2**n_atoms), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def excited_all_state(n_atoms):
    """|1...1><1...1|."""
    rho = np.zeros((2**n_atoms, 2**n_atoms), dtype=complex)
    rho[-1, -1] = 1.0
    return rho


def _bell(sign):
    ket = np.zeros(4, dtype=complex)
    ket[1] = 1.0 / np.sqrt(2.0)       # |0,1>
    ket[2] = sign / np.sqrt(2.0)      # |1,0>
    return ket


def bell_minus():
    """(|1,0> - |0,1>)/sqrt(2) as a ket."""
    return -_bell(-1.0)


def bell_plus():
    """(|1,0> + |0,1>)/sqrt(2) as a ket."""
    return _bell(1.0)


def ket_to_dm(ket):
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def parse_state_spec(spec, n_atoms):
    """Parse the CLI state mini-language into a density matrix.

    Named states: 'ground', 'excited_all', 'bell_minus', 'bell_plus' (the Bell
    states require N = 2).  Amplitude lists 'amp:c0,c1,...' give a ket over the
    computational basis, normalized on input.
    """
    spec = spec.strip()
    if spec == "ground":
        return ground_state(n_atoms)
    if spec == "excited_all":
        return excited_all_state(n_atoms)
    if spec in ("bell_minus", "bell_plus"):
        if n_atoms != 2:
            raise ValueError(f"state {spec!r} requires exactly 2 atoms")
        return ket_to_dm(bell_minus() if spec == "bell_minus" else bell_plus())
    if spec.startswith("amp:"):
        parts = spec[4:].split(",")
        amps = np.array([complex(p.strip()) for p in parts])
        if len(amps) != 2**n_atoms:
            raise ValueError(
                f"amplitude list has {len(amps)} entries, expected {2**n_atoms}"
            )
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise ValueError("amplitude list must not be all zero")
        return ket_to_dm(amps / norm)
    raise ValueError(f"unrecognized state spec {spec!r}")


def validate_density_matrix(rho, tol_pos=1e-12, tol_herm=1e-12, tol_trace=1e-12):
    """Check Hermiticity, unit trace and tolerance-qualified positivity."""
    rho = np.asarray(rho)
    herm = np.abs(rho - rho.conj().T).max()
    if herm > tol_herm:
        raise ValueError(f"density matrix not Hermitian (residual {herm:.2e})")
    tr = abs(np.trace(rho) - 1.0)
    if tr > tol_trace:
        raise ValueError(f"density matrix trace deviates from 1 by {tr:.2e}")
    lo = min_eigenvalue(rho)
    if lo < -tol_pos:
        raise ValueError(f"density matrix has eigenvalue {lo:.2e} < -{tol_pos:.2e}")


def min_eigenvalue(rho):
    """Smallest eigenvalue of the Hermitian part of rho."""
    return float(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0).min())
