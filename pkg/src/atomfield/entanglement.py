"""Concurrence, log negativity, and entanglement dynamics for atom pairs.

The unmaximized concurrence uC = sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)
(eigenvalues of rho rho~ in decreasing order) is kept signed: negative values
place the state strictly inside the separable set, which is what decides
sudden death.  Every second-order trajectory carries an intrinsic +-gamma/Omega
uncertainty band around uC = 0; the band is reported alongside the raw values,
never applied to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotic import second_order_correction
from .hilbert import partial_trace_pair
from .kernels import AtomArray, FieldSpec
from .liouvillian import (
    build_liouvillian,
    evolve,
    gamma_single,
    spectrum_numeric,
    steady_state,
    unvec,
    vec,
)

__all__ = [
    "unmaximized_concurrence",
    "concurrence",
    "log_negativity",
    "ConcurrenceTrace",
    "concurrence_trajectory",
    "asymptotic_entanglement_map",
    "NumericalStateError",
]

EIG_CLAMP = 1e-12        # clamp threshold for tiny negative proxy eigenvalues
EIG_ERROR = 1e-8         # default positivity error threshold

_SY_SY = np.array(
    [
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
    ]
)


class NumericalStateError(ValueError):
    """State positivity violated beyond the allowed tolerance."""


def _project_psd(rho, pos_tol):
    # Nearest PSD state: clamp negative eigenvalues, renormalize the trace.
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    if vals.min() < -pos_tol:
        raise NumericalStateError(
            f"density matrix eigenvalue {vals.min():.3e} below -{pos_tol:.1e}"
        )
    vals = np.clip(vals, 0.0, None)
    out = (vecs * vals) @ vecs.conj().T
    return out / np.trace(out).real, vals


def unmaximized_concurrence(rho, pos_tol=EIG_ERROR):
    """Signed concurrence of a two-qubit state.

    The state is first projected onto the PSD cone (tolerating negativity
    down to -pos_tol, an O(state error) perturbation); the eigenvalues of
    rho rho~ are then computed through the Hermitian proxy
    sqrt(rho) rho~ sqrt(rho), which shares its spectrum and is numerically
    stable.  Projecting first is essential: feeding a slightly non-positive
    rho to the proxy amplifies the violation from O(eps) to O(sqrt(eps)).
    Proxy eigenvalues within -EIG_CLAMP of zero are clamped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("unmaximized_concurrence expects a 4x4 density matrix")
    rho, _ = _project_psd(rho, pos_tol)
    rho_tilde = _SY_SY @ rho.conj() @ _SY_SY
    vals, vecs = np.linalg.eigh((rho + rho.conj().T) / 2.0)
    sqrt_rho = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    proxy = sqrt_rho @ rho_tilde @ sqrt_rho
    vals = np.linalg.eigvalsh((proxy + proxy.conj().T) / 2.0)
    if vals.min() < -EIG_ERROR:
        raise NumericalStateError(
            f"rho rho~ eigenvalue {vals.min():.3e} below -{EIG_ERROR:.1e}"
        )
    vals = np.clip(vals, 0.0, None)
    roots = np.sqrt(np.sort(vals)[::-1])
    return float(roots[0] - roots[1] - roots[2] - roots[3])


def concurrence(rho, pos_tol=EIG_ERROR):
    """Wootters concurrence max{0, uC}."""
    return max(0.0, unmaximized_concurrence(rho, pos_tol))


def log_negativity(rho, pos_tol=EIG_ERROR):
    """log2 of the trace norm of the partial transpose (second qubit)."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError("log_negativity expects a 4x4 density matrix")
    rho, _ = _project_psd(rho, pos_tol)
    pt = rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    mu = np.linalg.eigvalsh((pt + pt.conj().T) / 2.0)
    return float(np.log2(np.abs(mu).sum()))


@dataclass
class ConcurrenceTrace:
    """Time series of signed concurrence with death/revival bookkeeping."""

    times: np.ndarray
    uc: np.ndarray
    band: float                       # +-gamma/Omega uncertainty half-width
    uc_infinity: float
    deaths: list = field(default_factory=list)    # + -> - crossing times
    revivals: list = field(default_factory=list)  # - -> + crossing times

    @property
    def c(self):
        return np.maximum(0.0, self.uc)


def _bisect_crossing(f, t_lo, t_hi, resolution):
    f_lo = f(t_lo)
    for _ in range(200):
        if t_hi - t_lo <= resolution:
            break
        mid = 0.5 * (t_lo + t_hi)
        f_mid = f(mid)
        if (f_lo <= 0.0) == (f_mid <= 0.0):
            t_lo, f_lo = mid, f_mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)


def concurrence_trajectory(superop, rho0, times, pair=(0, 1), spectrum=None,
                           pos_tol=EIG_ERROR, band=0.0):
    """Signed concurrence of the reduced pair state along a trajectory.

    Death/revival events are located by bisection between samples to a
    resolution of 1e-3 of the sample spacing scale.  pos_tol should admit the
    second-order transient negativity of perturbative trajectories; band is
    the gamma/Omega half-width attached to the trace (see trajectory_band).
    """
    times = np.asarray(times, dtype=float)
    if spectrum is None:
        spectrum = spectrum_numeric(superop)
    n_atoms = superop.n_atoms
    tol = pos_tol
    weights = spectrum.left @ vec(rho0)

    def uc_at(t):
        v = spectrum.right @ (np.exp(spectrum.frequencies * t) * weights)
        reduced = partial_trace_pair(unvec(v), pair[0], pair[1], n_atoms)
        reduced = (reduced + reduced.conj().T) / 2.0
        return unmaximized_concurrence(reduced, tol)

    uc = np.array([uc_at(t) for t in times])

    # Steady-state value (exact null mode, trace normalized).  The null
    # operator of the second-order generator is positive only to O(gamma) on
    # its diagonal, so the tolerance here must admit band-scale negativity.
    states, _ = steady_state(superop)
    rho_inf = partial_trace_pair(states[0], pair[0], pair[1], n_atoms)
    uc_inf = unmaximized_concurrence(
        (rho_inf + rho_inf.conj().T) / 2.0, max(tol, 20.0 * band)
    )

    trace = ConcurrenceTrace(times, uc, band=band, uc_infinity=uc_inf)
    resolution = 1e-3 * (times[-1] - times[0]) / max(len(times) - 1, 1)
    for a, b in zip(range(len(times) - 1), range(1, len(times))):
        ua, ub = uc[a], uc[b]
        if ua > 0.0 >= ub:
            trace.deaths.append(_bisect_crossing(uc_at, times[a], times[b],
                                                 resolution))
        elif ua <= 0.0 < ub:
            trace.revivals.append(_bisect_crossing(uc_at, times[a], times[b],
                                                   resolution))
    return trace


def trajectory_band(fieldspec, atoms):
    """Half-width gamma/Omega of the unresolvable neighbourhood of uC = 0."""
    g = max(gamma_single(fieldspec, atoms, n) for n in range(atoms.n_atoms))
    return g / float(np.min(atoms.omegas))


def secular_average(times, values, period):
    """Centered moving average over one fast period on a uniform time grid.

    The signed concurrence of non-RWA trajectories carries a genuine fast
    modulation at twice the transition frequency whose amplitude is itself
    O(gamma/Omega); averaging over one such period exposes the secular
    envelope that slow-time statements (death, revival height) refer to.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]
    width = max(1, int(round(period / dt)))
    kernel = np.ones(width) / width
    padded = np.concatenate([
        np.full(width // 2, values[0]),
        values,
        np.full(width - 1 - width // 2, values[-1]),
    ])
    return np.convolve(padded, kernel, mode="valid")


def asymptotic_entanglement_map(omega_mean, gamma0, cutoff, r_values,
                                detuning_values, temperature=0.0,
                                magnetostatics=True):
    """uC of the second-order asymptotic state over a (r, detuning) grid.

    Returns rows (r, detuning, uC, magnetostatics, valid).  Detunings are
    symmetric: Omega_{1,2} = omega_mean -+ detuning/2.
    """
    rows = []
    for r in r_values:
        for d in detuning_values:
            atoms = AtomArray.pair(omega_mean - d / 2.0, omega_mean + d / 2.0, r)
            fieldspec = FieldSpec("scalar", temperature, gamma0, cutoff)
            state = second_order_correction(fieldspec, atoms,
                                            magnetostatics=magnetostatics)
            rho = state.rho
            rho = (rho + rho.conj().T) / 2.0
            uc = unmaximized_concurrence(rho, pos_tol=1e-2)
            rows.append((float(r), float(d), uc, magnetostatics, state.valid))
    return rows
