"""Second-order master-equation coefficients A_nm(omega), asymptotic and full-time.

The real part is half the noise kernel (exact by construction).  The imaginary
part is the principal-value Hilbert transform of the noise kernel and is
evaluated from closed forms: a trigonometric-integral expression at T = 0 and
an exact Lerch-sum expression at T > 0, plus a low-temperature expansion kept
as an independent validation path.  All closed forms apply to the scalar-field
kernel; the electromagnetic tensor kernel has no closed-form transform here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import specfun as sf
from .kernels import SCALAR, UnsupportedFieldError, noise_kernel_freq, validate_cutoff

__all__ = [
    "coeff_real",
    "coeff_imag_zeroT",
    "coeff_imag_finiteT",
    "coeff_imag_lowT_expansion",
    "coeff_imag",
    "coeff",
    "coeff_imag_derivative",
    "coeff_fulltime",
    "coeff_fulltime_series",
    "SpectralCoefficientSet",
    "build_coefficient_set",
    "Counterterm",
    "renormalization_counterterm",
    "ExpansionDivergenceError",
    "BRANCH_ZERO_T",
    "BRANCH_FINITE_T",
    "BRANCH_LOW_T",
]

BRANCH_ZERO_T = "ZeroT"
BRANCH_FINITE_T = "FiniteT-Lerch"
BRANCH_LOW_T = "LowT-Expansion"

# The low-temperature expansion misbehaves for energies that are small against
# the temperature; reject below this ratio.
LOWT_MIN_OMEGA_OVER_T = 5.0

FULLTIME_CUTOFF_FACTOR = 50.0   # frequency cutoff = factor / cutoff_length
FULLTIME_MIN_POINTS = 8192
FULLTIME_POINTS_PER_HALFPERIOD = 8
FULLTIME_MAX_POINTS = 2**23


class ExpansionDivergenceError(RuntimeError):
    """Low-temperature expansion partial sums grew instead of converging."""


def _require_scalar(fieldspec):
    if fieldspec.kind != SCALAR:
        raise UnsupportedFieldError(
            "coefficient closed forms are only available for the scalar field"
        )


def _pair_separation(fieldspec, atoms, n, m):
    if n == m:
        return fieldspec.cutoff_length
    r = atoms.separation(n, m)
    return r if r > 0.0 else fieldspec.cutoff_length


def coeff_real(fieldspec, atoms, n, m, omega):
    """Re A_nm(omega) = alpha_nm(omega) / 2, exact at any temperature."""
    return 0.5 * noise_kernel_freq(fieldspec, atoms, n, m, omega)


def coeff_imag_zeroT(fieldspec, atoms, n, m, omega):
    """Im A_nm(omega) at T = 0 from the trigonometric-integral closed form.

    -(gamma0 / (r pi)) [sin(r w) ci(|r w|) - cos(r w) si(r w)],
    with the exact value -gamma0/(2 r) at w = 0.
    """
    _require_scalar(fieldspec)
    r = _pair_separation(fieldspec, atoms, n, m)
    g0 = fieldspec.gamma0
    if omega == 0.0:
        return -g0 / (2.0 * r)
    z = r * omega
    return -(g0 / (r * np.pi)) * (np.sin(z) * sf.ci(abs(z)) - np.cos(z) * sf.si(z))


def coeff_imag_finiteT(fieldspec, atoms, n, m, omega, temperature=None):
    """Im A_nm(omega) at T > 0 from the exact Lerch-sum closed form.

    (gamma0/r) { (1/pi) Im Phi_1(i w / 2 pi T; 2 pi T r)
                 - T/w + (1/2)[coth(w/2T) - 1] cos(r w) },
    rewritten internally so the w -> 0 cancellation is explicit.
    """
    _require_scalar(fieldspec)
    T = fieldspec.temperature if temperature is None else temperature
    if T <= 0.0:
        raise ValueError("coeff_imag_finiteT requires T > 0 (use the zero-T form)")
    r = _pair_separation(fieldspec, atoms, n, m)
    g0 = fieldspec.gamma0
    if omega == 0.0:
        return -g0 / (2.0 * r)
    lam = 2.0 * np.pi * T * r
    phi = sf.lerch_phi1(1j * omega / (2.0 * np.pi * T), lam)
    # T/w - (1/2)[coth(w/2T)-1] cos(r w), with the 1/w pieces cancelled:
    #   (T/w)(1 - cos) - (1/2)(coth(x)-1/x) cos + cos/2,  x = w/2T.
    x = omega / (2.0 * T)
    cos_rw = np.cos(r * omega)
    half_angle = np.sin(r * omega / 2.0)
    second = (
        (T / omega) * 2.0 * half_angle * half_angle
        - 0.5 * sf.coth_minus_inv(x) * cos_rw
        + 0.5 * cos_rw
    )
    return (g0 / r) * (phi.imag / np.pi - second)


def coeff_imag_lowT_expansion(fieldspec, atoms, n, m, omega, temperature=None,
                              k_max=200):
    """Im A_nm(omega) from the low-temperature expansion (validation path).

    Zero-temperature closed form plus (sign(w)/pi) sum_k Im S_k, where
    S_k = -e^{-a} E1(-a) - e^{-b} E1(-b) + i pi e^{-a}, a = (k beta + i r)|w|,
    b = (-k beta + i r)|w|, built from scaled exponential integrals so large
    k beta |w| cannot overflow.  Expanding the Bose factor of the noise kernel
    in thermal images and transforming each image analytically yields exactly
    this combination; only its imaginary part survives in the transform.
    Valid for |omega| >= LOWT_MIN_OMEGA_OVER_T * T.
    """
    _require_scalar(fieldspec)
    T = fieldspec.temperature if temperature is None else temperature
    if T <= 0.0:
        raise ValueError("coeff_imag_lowT_expansion requires T > 0")
    if abs(omega) < LOWT_MIN_OMEGA_OVER_T * T:
        raise ValueError(
            f"low-T expansion needs |omega| >= {LOWT_MIN_OMEGA_OVER_T} T "
            f"(got |omega|/T = {abs(omega) / T:.3g})"
        )
    r = _pair_separation(fieldspec, atoms, n, m)
    g0 = fieldspec.gamma0
    base = coeff_imag_zeroT(fieldspec, atoms, n, m, omega)
    beta = 1.0 / T
    aw = abs(omega)
    # The summand falls off only as 1/k^2; its leading part
    # Im[1/a_k + 1/b_k] = -2 r / ((k^2 beta^2 + r^2) |w|) is summed in closed
    # form, leaving a remainder that decays as 1/k^4.
    lead_total = -(np.pi / (beta * aw)) * sf.coth_minus_inv(np.pi * r / beta)
    total = 0.0
    prev = (np.inf, np.inf, np.inf)
    for k in range(1, k_max + 1):
        a = (k * beta + 1j * r) * aw
        b = (-k * beta + 1j * r) * aw
        s_k = -sf.e1_scaled(-a) - sf.e1_scaled(-b)
        if a.real < 700.0:
            s_k += 1j * np.pi * np.exp(-a)
        lead = -2.0 * r / ((k * beta) ** 2 + r * r) / aw
        term = s_k.imag - lead
        total += term
        mags = (abs(term), prev[0], prev[1])
        if mags[0] > mags[1] > mags[2] and mags[0] > 1e-12 * max(abs(total), 1e-300):
            raise ExpansionDivergenceError(
                f"summand grew over three consecutive k near k={k}"
            )
        if abs(term) < 1e-15 * max(abs(total + lead_total), abs(base), 1e-300):
            break
        prev = mags
    return base + (g0 / r) * np.sign(omega) / np.pi * (total + lead_total)


def coeff_imag(fieldspec, atoms, n, m, omega):
    """Dispatch: zero-T closed form at T = 0, Lerch form at T > 0."""
    if fieldspec.temperature == 0.0:
        return coeff_imag_zeroT(fieldspec, atoms, n, m, omega)
    return coeff_imag_finiteT(fieldspec, atoms, n, m, omega)


def coeff(fieldspec, atoms, n, m, omega):
    """Full complex coefficient A_nm(omega)."""
    return complex(
        coeff_real(fieldspec, atoms, n, m, omega),
        coeff_imag(fieldspec, atoms, n, m, omega),
    )


def coeff_imag_derivative(fieldspec, atoms, n, m, omega, step=None):
    """d Im A_nm / d omega by Richardson-refined central differences."""
    if step is None:
        step = 1e-5 * float(np.mean(atoms.omegas))

    def central(h):
        up = coeff_imag(fieldspec, atoms, n, m, omega + h)
        dn = coeff_imag(fieldspec, atoms, n, m, omega - h)
        return (up - dn) / (2.0 * h)

    d1 = central(step)
    d2 = central(step / 2.0)
    return (4.0 * d2 - d1) / 3.0


def _fulltime_grid(fieldspec, atoms, n, m, t_max):
    _require_scalar(fieldspec)
    e_max = FULLTIME_CUTOFF_FACTOR / fieldspec.cutoff_length
    n_half = int(np.ceil(e_max * max(t_max, 0.0) / np.pi))
    pts = max(FULLTIME_MIN_POINTS, FULLTIME_POINTS_PER_HALFPERIOD * n_half)
    pts = min(pts, FULLTIME_MAX_POINTS)
    eps = np.linspace(-e_max, e_max, pts)
    alpha = np.array(
        [noise_kernel_freq(fieldspec, atoms, n, m, float(e)) for e in eps]
    )
    return eps, alpha


def _fulltime_eval(eps, alpha, omega, t):
    # A(omega; t) = (1/2pi) int d_eps alpha(eps) K(eps - omega; t) with the
    # entire kernel K(x; t) = sin(x t)/x + i (1 - cos(x t))/x; the tau
    # integral of the inverse transform has been done analytically.
    x = eps - omega
    xt = x * t
    small = np.abs(xt) < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        re = np.where(small, t * (1.0 - xt * xt / 6.0), np.sin(xt) / x)
        im = np.where(small, t * xt / 2.0, (1.0 - np.cos(xt)) / x)
    integrand = alpha * (re + 1j * im)
    full = np.trapezoid(integrand, eps)
    half = np.trapezoid(integrand[::2], eps[::2])
    # one Richardson step on the trapezoid (O(h^2) error)
    return (4.0 * full - half) / 3.0 / (2.0 * np.pi)


def coeff_fulltime_series(fieldspec, atoms, n, m, omega, times):
    """A_nm(omega; t) on an array of times t >= 0."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0.0):
        raise ValueError("full-time coefficients require t >= 0")
    eps, alpha = _fulltime_grid(fieldspec, atoms, n, m, float(times.max()))
    if not np.all(np.isfinite(alpha)):
        raise RuntimeError(
            "noise kernel evaluation failed on the full-time frequency grid"
        )
    return np.array([_fulltime_eval(eps, alpha, omega, t) for t in times])


def coeff_fulltime(fieldspec, atoms, n, m, omega, t):
    """Full-time coefficient A_nm(omega; t) = int_0^t e^{-i w tau} alpha(tau) d tau."""
    return complex(coeff_fulltime_series(fieldspec, atoms, n, m, omega, [t])[0])


@dataclass(frozen=True)
class SpectralCoefficientSet:
    """A_nm(+/- Omega_m) for all ordered pairs, plus the static Im values.

    a_plus[n, m]  = A_nm(+Omega_m)
    a_minus[n, m] = A_nm(-Omega_m)
    im_zero[n, m] = Im A_nm(0)   (counterterm / static-interaction bookkeeping)
    """

    a_plus: np.ndarray
    a_minus: np.ndarray
    im_zero: np.ndarray
    branch: str

    @property
    def n_atoms(self):
        return self.a_plus.shape[0]

    def effective(self, n, m, sign, renormalize=True, magnetostatics=True):
        """Coefficient entering the Liouvillian after the flagged subtractions.

        renormalize=True removes Im A_nn(0) from the self terms (an identity
        shift of the induced unitary); magnetostatics=False removes the static
        cross value Im A_nm(0), i.e. the 1/r induced potential.
        """
        value = self.a_plus[n, m] if sign > 0 else self.a_minus[n, m]
        shift = 0.0
        if n == m and renormalize:
            shift = self.im_zero[n, m]
        elif n != m and not magnetostatics:
            shift = self.im_zero[n, m]
        return value - 1j * shift


def build_coefficient_set(fieldspec, atoms):
    """Evaluate A_nm at +/- Omega_m and Im A_nm(0) for all ordered pairs."""
    validate_cutoff(fieldspec, atoms)
    n_atoms = atoms.n_atoms
    a_plus = np.zeros((n_atoms, n_atoms), dtype=complex)
    a_minus = np.zeros((n_atoms, n_atoms), dtype=complex)
    im_zero = np.zeros((n_atoms, n_atoms))
    for n in range(n_atoms):
        for m in range(n_atoms):
            w = atoms.omegas[m]
            a_plus[n, m] = coeff(fieldspec, atoms, n, m, +w)
            a_minus[n, m] = coeff(fieldspec, atoms, n, m, -w)
            im_zero[n, m] = coeff_imag(fieldspec, atoms, n, m, 0.0)
    branch = BRANCH_ZERO_T if fieldspec.temperature == 0.0 else BRANCH_FINITE_T
    return SpectralCoefficientSet(a_plus, a_minus, im_zero, branch)


@dataclass(frozen=True)
class Counterterm:
    """Self-energy counterterm: U_ren = sum_n Im A_nn(0) sigma_x_n^2.

    Since sigma_x^2 = 1 the counterterm is the identity times the sum of the
    per-atom static values; subtracting it shifts the absolute energy levels
    (removing the -gamma0/(2 r0) divergence) without altering the dynamics.
    """

    values: np.ndarray  # Im A_nn(0) per atom

    @property
    def identity_coefficient(self):
        return float(self.values.sum())

    def as_operator(self):
        dim = 2 ** len(self.values)
        return self.identity_coefficient * np.eye(dim)


def renormalization_counterterm(fieldspec, atoms):
    """Static self values Im A_nn(0) = -gamma0/(2 r0) packaged as a counterterm."""
    vals = np.array(
        [coeff_imag(fieldspec, atoms, n, n, 0.0) for n in range(atoms.n_atoms)]
    )
    return Counterterm(vals)
