"""Independent numerical oracles used by the tests.

These deliberately avoid the code paths they check: principal-value integrals
are done by adaptive quadrature with symmetric exclusion and Richardson
extrapolation in the exclusion radius, oscillatory tails by half-period
panel summation with repeated averaging, and special-function references by
mpmath at extended precision.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from atomfield.kernels import noise_kernel_freq


def pv_hilbert_imag(fieldspec, atoms, n, m, omega, u_max_factor=60.0,
                    n_tail=40, delta=1e-3):
    """Im A_nm(omega) = -(1/2pi) PV int alpha(eps) / (omega - eps) d eps."""
    if n == m:
        r = fieldspec.cutoff_length
    else:
        r = atoms.separation(n, m)
        if r == 0.0:
            r = fieldspec.cutoff_length
    temperature = fieldspec.temperature

    def f(eps):
        return noise_kernel_freq(fieldspec, atoms, n, m, eps)

    u0 = max(u_max_factor / r, 8.0 * abs(omega) + 10.0, 80.0 * temperature, 60.0)
    u0 = np.pi / r * np.ceil(u0 * r / np.pi)

    def segment(a, b):
        val, _ = quad(lambda e: f(e) / (omega - e), a, b,
                      limit=2000, epsabs=1e-13, epsrel=1e-11)
        return val

    def core(dlt):
        if -u0 < omega < u0:
            return segment(-u0, omega - dlt) + segment(omega + dlt, u0)
        return segment(-u0, u0)

    # symmetric exclusion, Richardson in the radius (error c1 d + c3 d^3)
    i1, i2, i3 = core(delta), core(delta / 2.0), core(delta / 4.0)
    a21 = 2.0 * i2 - i1
    a32 = 2.0 * i3 - i2
    core_val = (8.0 * a32 - a21) / 7.0

    def tail(side):
        # alternating half-period panels, collapsed by repeated averaging
        panels = []
        for k in range(n_tail):
            a = u0 + k * np.pi / r
            b = a + np.pi / r
            if side < 0:
                val, _ = quad(lambda u: f(-u) / (omega + u), a, b,
                              limit=200, epsabs=1e-14)
            else:
                val, _ = quad(lambda u: f(u) / (omega - u), a, b,
                              limit=200, epsabs=1e-14)
            panels.append(val)
        sums = np.cumsum(panels)
        while len(sums) > 1:
            sums = 0.5 * (sums[1:] + sums[:-1])
        return float(sums[0])

    return -(core_val + tail(-1) + tail(+1)) / (2.0 * np.pi)


def pv_exponential_integral(z, delta=1e-4):
    """Ei(z) = -PV int_{-z}^inf e^{-t}/t dt by symmetric-exclusion quadrature."""
    if z <= 0:
        raise ValueError("oracle implemented for z > 0")

    def seg(a, b):
        val, _ = quad(lambda t: np.exp(-t) / t, a, b, limit=800,
                      epsabs=1e-14, epsrel=1e-12)
        return val

    upper = 700.0

    def core(dlt):
        return seg(-z, -dlt) + seg(dlt, upper)

    i1, i2, i3 = core(delta), core(delta / 2.0), core(delta / 4.0)
    a21 = 2.0 * i2 - i1
    a32 = 2.0 * i3 - i2
    return -(8.0 * a32 - a21) / 7.0


def si_quadrature(z):
    """si(z) = -int_z^inf sin(t)/t dt via half-period panels."""
    first_zero = np.pi * np.ceil(max(z, 0.0) / np.pi + 1.0)
    head, _ = quad(lambda t: np.sin(t) / t, z, first_zero, limit=400,
                   epsabs=1e-14)
    panels = []
    for k in range(60):
        a = first_zero + k * np.pi
        val, _ = quad(lambda t: np.sin(t) / t, a, a + np.pi, limit=100,
                      epsabs=1e-14)
        panels.append(val)
    sums = np.cumsum(panels)
    while len(sums) > 1:
        sums = 0.5 * (sums[1:] + sums[:-1])
    return -(head + float(sums[0]))


def taylor_sinc(x, terms=50):
    """Explicit truncated Taylor series of sin(x)/x."""
    total = 0.0
    term = 1.0
    for k in range(terms):
        if k > 0:
            term *= -x * x / ((2 * k) * (2 * k + 1))
        total += term
    return total


def lerch_direct(z, lam, terms=200):
    """Plain partial sum of the Lerch Phi_1 series."""
    k = np.arange(1, terms + 1, dtype=float)
    return complex((np.exp(-k * lam) / (k + z)).sum())


def mp_fs(z):
    """fs1, fs0 from mpmath at 50 digits."""
    import mpmath as mp

    mp.mp.dps = 50
    zm = mp.mpf(z)
    s, c = mp.sin(zm), mp.cos(zm)
    fs1 = mp.mpf(3) / 2 * ((zm**2 - 1) * s + zm * c) / zm**3
    fs0 = -mp.mpf(3) / 2 * ((zm**2 - 3) * s + 3 * zm * c) / zm**3
    return float(fs1), float(fs0)


def mp_e1(w):
    """Principal E1(w) from mpmath."""
    import mpmath as mp

    mp.mp.dps = 30
    return complex(mp.e1(mp.mpc(w)))


def mp_lerch_phi1(z, lam):
    """Phi_1(z; lam) = e^{-lam} Phi(e^{-lam}, 1, 1 + z) from mpmath."""
    import mpmath as mp

    mp.mp.dps = 30
    val = mp.exp(-lam) * mp.lerchphi(mp.exp(-lam), 1, 1 + mp.mpc(z))
    return complex(val)


def fourier_of_time_kernel(kernel_fn, r, omega, n_points=200001):
    """Trapezoidal Fourier transform of a time kernel supported on [-r, r]."""
    t = np.linspace(-r, r, n_points)
    vals = np.array([kernel_fn(x) for x in t])
    return float(np.trapezoid(vals * np.cos(omega * t), t))
