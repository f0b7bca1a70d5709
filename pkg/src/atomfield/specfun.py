"""Scalar special functions used by the master-equation coefficient closed forms.

All routines are pure, operate on IEEE doubles (or complex doubles) and return
finite values on their documented domains.  Near-zero Taylor branches use the
switchover thresholds collected below; each threshold was chosen so that the
series and the direct formula agree to better than 1e-13 at the boundary.
"""

from __future__ import annotations

import numpy as np
from scipy import special as _sp

__all__ = [
    "sinc",
    "fs1",
    "fs0",
    "si",
    "ci",
    "ei",
    "e1_complex",
    "e1_scaled",
    "lerch_phi1",
    "nbar",
    "coth_minus_inv",
    "LerchConvergenceError",
]

# Series switchover thresholds (module-wide; documented here only).
SINC_SERIES_CUTOFF = 1e-4    # |x| below which sin(x)/x is summed as a series
FS_SERIES_CUTOFF = 1e-2      # |z| below which FS1/FS0 use their series
COTH_SERIES_CUTOFF = 1e-4    # |x| below which coth(x)-1/x uses its series
E1_SERIES_RADIUS = 4.0       # |w| below which E1 uses the power series
LERCH_SMALL_LAMBDA = 1e-3    # lambda below which the tail is Euler-Maclaurin
LERCH_MAX_TERMS = 2_000_000  # iteration cap for the direct Lerch sum


class LerchConvergenceError(RuntimeError):
    """Raised when the lerch_phi1 sum fails to converge within the term cap."""

    def __init__(self, z, lam, n_terms):
        super().__init__(
            f"lerch_phi1 did not converge after {n_terms} terms "
            f"(z={z!r}, lambda={lam!r})"
        )
        self.z = z
        self.lam = lam
        self.n_terms = n_terms


def sinc(x):
    """sin(x)/x with a series branch near the removable singularity at 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SINC_SERIES_CUTOFF
    out = np.empty_like(x)
    xs = x[small]
    x2 = xs * xs
    out[small] = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    xl = x[~small]
    out[~small] = np.sin(xl) / xl
    if out.ndim == 0:
        return float(out)
    return out


def fs1(z):
    """Transverse part of the dipole-field correlation: entire, fs1(0) = 1.

    fs1(z) = (3/2) [(z^2 - 1) sin z + z cos z] / z^3
    """
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < FS_SERIES_CUTOFF
    out = np.empty_like(z)
    zs = z[small]
    z2 = zs * zs
    out[small] = 1.0 - z2 / 5.0 + 3.0 * z2 * z2 / 280.0 - z2 * z2 * z2 / 3780.0
    zl = z[~small]
    out[~small] = 1.5 * ((zl * zl - 1.0) * np.sin(zl) + zl * np.cos(zl)) / zl**3
    if out.ndim == 0:
        return float(out)
    return out


def fs0(z):
    """Longitudinal part of the dipole-field correlation: entire, fs0(0) = 0.

    fs0(z) = -(3/2) [(z^2 - 3) sin z + 3 z cos z] / z^3
    """
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < FS_SERIES_CUTOFF
    out = np.empty_like(z)
    zs = z[small]
    z2 = zs * zs
    out[small] = z2 / 10.0 - z2 * z2 / 140.0 + z2 * z2 * z2 / 5040.0
    zl = z[~small]
    out[~small] = -1.5 * ((zl * zl - 3.0) * np.sin(zl) + 3.0 * zl * np.cos(zl)) / zl**3
    if out.ndim == 0:
        return float(out)
    return out


def si(z):
    """Shifted sine integral si(z) = Si(z) - pi/2 = -integral_z^inf sin(t)/t dt."""
    s, _ = _sp.sici(z)
    return s - np.pi / 2.0


def ci(z):
    """Cosine integral ci(z) = -integral_z^inf cos(t)/t dt, requires z > 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("ci(z) requires z > 0")
    _, c = _sp.sici(z)
    if c.ndim == 0:
        return float(c)
    return c


def ei(z):
    """Principal-value exponential integral Ei(z) for real z != 0."""
    z = float(z)
    if z == 0.0:
        raise ValueError("ei(z) is undefined at z = 0")
    return float(_sp.expi(z))


def _e1_series(w):
    # E1(w) = -gamma - log(w) + sum_{k>=1} (-1)^{k+1} w^k / (k k!)
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j
    for k in range(1, 60):
        term *= -w / k
        contrib = -term / k
        total += contrib
        if abs(contrib) < 1e-18 * max(1.0, abs(total)):
            break
    return -np.euler_gamma - np.log(w) + total


def _e1_cf_scaled(w, max_iter=300):
    # Modified Lentz evaluation of the continued fraction for e^w E1(w):
    #   e^w E1(w) = 1/(w + 1 - 1/(w + 3 - 4/(w + 5 - 9/(w + 7 - ...))))
    tiny = 1e-300
    b = w + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for k in range(1, max_iter):
        a = -(k * k)
        b = b + 2.0
        d = b + a * d
        if d == 0:
            d = tiny
        c = b + a / c
        if c == 0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def e1_complex(w):
    """Principal branch of the exponential integral E1(w) for complex w.

    Power series for |w| < E1_SERIES_RADIUS, continued fraction otherwise.
    The branch cut lies on the negative real axis, where the value is
    undefined (an error), matching the principal convention.
    """
    w = complex(w)
    if w == 0:
        raise ValueError("e1_complex is singular at w = 0")
    if w.imag == 0.0 and w.real < 0.0:
        raise ValueError("e1_complex is not defined on the negative real axis")
    if abs(w) < E1_SERIES_RADIUS:
        return _e1_series(w)
    return _e1_cf_scaled(w) * np.exp(-w)


def e1_scaled(w):
    """exp(w) * E1(w) without overflow for large |Re w| (same domain as e1_complex)."""
    w = complex(w)
    if w == 0:
        raise ValueError("e1_scaled is singular at w = 0")
    if w.imag == 0.0 and w.real < 0.0:
        raise ValueError("e1_scaled is not defined on the negative real axis")
    if abs(w) < E1_SERIES_RADIUS:
        return np.exp(w) * _e1_series(w)
    return _e1_cf_scaled(w)


def _lerch_direct(z, lam):
    # Vectorized summation in chunks; terminates when the running term is
    # negligible against the partial sum.
    total = 0.0 + 0.0j
    chunk = 4096
    k0 = 1
    while k0 <= LERCH_MAX_TERMS:
        k = np.arange(k0, min(k0 + chunk, LERCH_MAX_TERMS + 1), dtype=float)
        terms = np.exp(-k * lam) / (k + z)
        total += terms.sum()
        if abs(terms[-1]) < 1e-16 * max(abs(total), 1e-300):
            return total
        k0 += chunk
    raise LerchConvergenceError(z, lam, LERCH_MAX_TERMS)


def _lerch_em_tail(z, lam, k_last):
    # Euler-Maclaurin tail sum_{k > k_last} e^{-k lam}/(k + z); accurate for
    # small lam where the direct sum would need ~1/lam terms.
    a = float(k_last + 1)
    g = 1.0 / (a + z)
    ea = np.exp(-a * lam)
    # integral_a^inf e^{-k lam}/(k+z) dk = e^{lam z} E1(lam (a+z))
    integral = np.exp(lam * z) * e1_complex(lam * (a + z))
    f_a = ea * g
    fp_a = ea * (-lam * g - g * g)
    fppp_a = -ea * (lam**3 * g + 3.0 * lam**2 * g**2 + 6.0 * lam * g**3 + 6.0 * g**4)
    return integral + f_a / 2.0 - fp_a / 12.0 + fppp_a / 720.0


def lerch_phi1(z, lam):
    """Phi_1(z; lambda) = sum_{k=1}^inf e^{-k lambda} / (k + z) for lambda > 0.

    Direct summation until the term magnitude drops below 1e-16 of the
    partial sum; for lambda < LERCH_SMALL_LAMBDA the slowly-converging tail
    is evaluated by Euler-Maclaurin instead (the acceleration fallback).
    """
    if lam <= 0.0:
        raise ValueError("lerch_phi1 requires lambda > 0")
    z = complex(z)
    if z.imag == 0.0 and z.real <= -1.0 and z.real == int(z.real):
        raise ValueError("lerch_phi1 has poles at negative integer z")
    if lam >= LERCH_SMALL_LAMBDA:
        return _lerch_direct(z, lam)
    k_direct = 2000
    k = np.arange(1, k_direct + 1, dtype=float)
    head = (np.exp(-k * lam) / (k + z)).sum()
    return head + _lerch_em_tail(z, lam, k_direct)


def nbar(omega, temperature):
    """Thermal average photon number 1/(e^{omega/T} - 1); zero at T = 0."""
    if omega <= 0.0:
        raise ValueError("nbar requires omega > 0")
    if temperature < 0.0:
        raise ValueError("nbar requires T >= 0")
    if temperature == 0.0:
        return 0.0
    x = omega / temperature
    if x > 700.0:
        return 0.0
    return 1.0 / np.expm1(x)


def coth_minus_inv(x):
    """coth(x) - 1/x, stable near x = 0 (odd, vanishes linearly)."""
    x = float(x)
    if abs(x) < COTH_SERIES_CUTOFF:
        return x / 3.0 - x**3 / 45.0
    return 1.0 / np.tanh(x) - 1.0 / x
