"""Independent reference computations used by the tests.

Nothing here calls into the library's numerical paths: Hermite functions
come from the classical (unnormalized) recurrence evaluated in mpmath, and
derivatives come from central differences at extended precision.
"""

import mpmath as mp
import numpy as np

DPS = 40


def hermite_classical(n_max, x):
    """H_0..H_n_max at x via H_{n+1} = 2x H_n - 2n H_{n-1} (mpmath)."""
    h = [mp.mpf(1), 2 * x]
    for n in range(1, n_max):
        h.append(2 * x * h[n] - 2 * n * h[n - 1])
    return h[: n_max + 1]


def fock_psi_mp(coeffs, x, length=1.0):
    """sum_n c_n <x|n> at extended precision; ``length`` = sqrt(hbar/(m w))."""
    with mp.workdps(DPS):
        L = mp.mpf(length)
        xs = mp.mpf(x) / L
        H = hermite_classical(len(coeffs) - 1, xs)
        gauss = mp.exp(-xs**2 / 2) / mp.sqrt(L * mp.sqrt(mp.pi))
        total = mp.mpc(0)
        for n, c in enumerate(coeffs):
            norm = 1 / mp.sqrt(mp.mpf(2) ** n * mp.factorial(n))
            total += mp.mpc(c.real, c.imag) * norm * H[n]
        return total * gauss


def fd_polar(psi_fn, x, h=1e-4, hbar=1.0):
    """(R''/R, S') at x from central differences of |psi| and arg(psi)."""
    with mp.workdps(DPS):
        x = mp.mpf(x)
        h = mp.mpf(h)
        pm, p0, pp = psi_fn(x - h), psi_fn(x), psi_fn(x + h)
        r_m, r_0, r_p = abs(pm), abs(p0), abs(pp)
        rpp = (r_p - 2 * r_0 + r_m) / h**2 / r_0
        sprime = hbar * mp.arg(pp / pm) / (2 * h)
        return float(rpp), float(sprime)


def fd_derivative(fn, x, h=1e-4):
    """Central first and second differences of a scalar function (mpmath)."""
    with mp.workdps(DPS):
        x, h = mp.mpf(x), mp.mpf(h)
        fm, f0, fp = fn(x - h), fn(x), fn(x + h)
        return (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2


def packet_R_mp(packet):
    """R(x) of an AnalyticPacket, evaluated straight from its definition in mpmath."""
    amp = [mp.mpf(c) for c in packet.amp_poly]

    def R(x):
        xs = (x - mp.mpf(packet.x0)) / mp.mpf(packet.delta)
        poly = 1 + sum(c * xs**k for k, c in enumerate(amp))
        g = mp.exp(-xs**2 / 2) / mp.sqrt(mp.sqrt(mp.pi) * mp.mpf(packet.delta))
        return mp.mpf(packet.norm_const) * g * poly
    return R


def packet_S_mp(packet, hbar):
    ph = [mp.mpf(c) for c in packet.phase_poly]

    def S(x):
        xs = (x - mp.mpf(packet.x0)) / mp.mpf(packet.delta)
        return mp.mpf(packet.p0) * x + mp.mpf(hbar) * sum(c * xs**k for k, c in enumerate(ph))
    return S


def momentum_density(psi, ps, hbar=1.0):
    """|psi_hat(p)|^2 by direct summation of the continuous Fourier integral."""
    x = psi.x
    phase = np.exp(-1j * np.outer(ps, x) / hbar)
    amp = phase @ psi.psi * psi.dx / np.sqrt(2 * np.pi * hbar)
    return np.abs(amp) ** 2


def bilinear(field_values, xs, ps, xq, pq):
    """Bilinear interpolation on a regular grid; zero outside."""
    from scipy.interpolate import RegularGridInterpolator

    f = RegularGridInterpolator((xs, ps), field_values, method="linear",
                                bounds_error=False, fill_value=0.0)
    return f(np.column_stack([np.ravel(xq), np.ravel(pq)])).reshape(np.shape(xq))
