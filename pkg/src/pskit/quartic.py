"""Quartic (Kerr) oscillator H = hbar w a^dag a + hbar^2 lam (a^dag)^2 a^2 in a truncated Fock basis.

Ladder operators follow the standard convention [a, a^dag] = 1, so a state
centred at scaled phase-space point (xs0, ps0) has alpha = (xs0 + i ps0)/sqrt(2).
Scaled variables are xs = sqrt(m w / hbar) x and ps = p / sqrt(hbar m w).
Position-space derivatives use Hermite-function identities only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

from .packets import NODE_THRESHOLD, PhysConfig, PolarData, SampledWavefunction

TAIL_TOL = 1e-12


def default_n_max(alpha: complex) -> int:
    mean = abs(alpha) ** 2
    return int(np.ceil(mean + 10 * np.sqrt(mean) + 20))


def alpha_from_center(xs0: float, ps0: float) -> complex:
    return complex(xs0, ps0) / np.sqrt(2)


def poisson_tail(alpha: complex, n_max: int) -> float:
    """Probability weight beyond index n_max for the coherent state |alpha>."""
    return float(poisson.sf(n_max, abs(alpha) ** 2))


@dataclass(frozen=True)
class QuarticParams:
    cfg: PhysConfig = PhysConfig()
    lambda_hbar: float | None = None  # hbar*lambda, frequency units; default 0.01*omega
    alpha: complex = 3 / np.sqrt(2)
    n_max: int | None = None

    def __post_init__(self):
        if self.lambda_hbar is None:
            object.__setattr__(self, "lambda_hbar", 0.01 * self.cfg.omega)
        if not np.isfinite(self.lambda_hbar):
            raise ValueError("lambda_hbar must be finite")
        object.__setattr__(self, "alpha", complex(self.alpha))
        if self.n_max is None:
            object.__setattr__(self, "n_max", default_n_max(self.alpha))
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")
        tail = poisson_tail(self.alpha, self.n_max)
        if tail >= TAIL_TOL:
            raise ValueError(f"n_max={self.n_max} leaves {tail:.3g} of the norm outside the basis; "
                             f"use n_max >= {default_n_max(self.alpha)}")

    @property
    def length_scale(self) -> float:
        """sqrt(hbar / m w): physical length of one scaled unit."""
        c = self.cfg
        return float(np.sqrt(c.hbar / (c.mass * c.omega)))

    @property
    def momentum_scale(self) -> float:
        c = self.cfg
        return float(np.sqrt(c.hbar * c.mass * c.omega))

    @property
    def period(self) -> float:
        return 2 * np.pi / self.cfg.omega


@dataclass(frozen=True)
class FockState:
    coeffs: np.ndarray
    norm_tol: float = field(default=1e-10, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d vector")
        if abs(np.sum(np.abs(c) ** 2) - 1) > self.norm_tol:
            raise ValueError("Fock coefficients are not normalized")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return self.coeffs.size - 1

    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))


def coherent_coefficients(alpha: complex, n_max: int) -> FockState:
    tail = poisson_tail(alpha, n_max)
    if tail >= TAIL_TOL:
        raise ValueError(f"n_max={n_max} truncates {tail:.3g} of |alpha={alpha}>; "
                         f"use n_max >= {default_n_max(alpha)}")
    c = np.empty(n_max + 1, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(n_max):
        c[n + 1] = c[n] * alpha / np.sqrt(n + 1)
    return FockState(c)


def initial_state(params: QuarticParams) -> FockState:
    return coherent_coefficients(params.alpha, params.n_max)


def eigenenergy(n, params: QuarticParams):
    n = np.asarray(n)
    if np.any(n < 0):
        raise ValueError("Fock index must be non-negative")
    hbar = params.cfg.hbar
    return hbar * params.cfg.omega * n + hbar * params.lambda_hbar * n * (n - 1)


def evolve(state: FockState, params: QuarticParams, t: float) -> FockState:
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    n = np.arange(state.coeffs.size)
    # phase per level: omega*n*t + lambda_hbar*n(n-1)*t, reduced mod 2pi term by term
    harmonic = np.mod(params.cfg.omega * t * n, 2 * np.pi)
    kerr = np.mod(params.lambda_hbar * t * (n * (n - 1)), 2 * np.pi)
    return FockState(state.coeffs * np.exp(-1j * (harmonic + kerr)))


def mean_energy(state: FockState, params: QuarticParams) -> float:
    n = np.arange(state.coeffs.size)
    return float(np.sum(np.abs(state.coeffs) ** 2 * eigenenergy(n, params)))


def overlap(a: FockState, b: FockState) -> complex:
    return complex(np.vdot(a.coeffs, b.coeffs))


def _hermite_table(n_max: int, xs):
    xs = np.asarray(xs, dtype=float)
    phi = np.empty((n_max + 1,) + xs.shape)
    phi[0] = np.pi**-0.25 * np.exp(-0.5 * xs**2)
    if n_max >= 1:
        phi[1] = np.sqrt(2.0) * xs * phi[0]
    for n in range(1, n_max):
        phi[n + 1] = np.sqrt(2.0 / (n + 1)) * xs * phi[n] - np.sqrt(n / (n + 1)) * phi[n - 1]
    dphi = np.empty_like(phi)
    dphi[0] = -xs * phi[0]
    for n in range(1, n_max + 1):
        dphi[n] = np.sqrt(2.0 * n) * phi[n - 1] - xs * phi[n]
    return phi, dphi


def hermite_phi(n_max: int, xs):
    """Normalized Hermite functions phi_0..phi_n_max at scaled positions ``xs``.

    Returns ``(phi, dphi)`` with shape ``(n_max + 1,) + xs.shape``, where
    ``dphi`` is d/dxs. Uses the three-term recurrence for normalized
    functions, so nothing overflows for large n.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    return _hermite_table(n_max, xs)


def _second_derivative(phi, dphi, xs):
    d2 = np.empty_like(phi)
    d2[0] = -phi[0] - xs * dphi[0]
    for n in range(1, phi.shape[0]):
        d2[n] = np.sqrt(2.0 * n) * dphi[n - 1] - phi[n] - xs * dphi[n]
    return d2


def evaluate(state: FockState, params: QuarticParams, x):
    """psi, dpsi/dx, d2psi/dx2 at physical positions ``x`` (any shape)."""
    x = np.asarray(x, dtype=float)
    L = params.length_scale
    xs = x / L
    phi, dphi = _hermite_table(state.n_max, xs)
    d2phi = _second_derivative(phi, dphi, xs)
    c = state.coeffs
    amp = L**-0.5
    psi = amp * np.tensordot(c, phi, axes=1)
    dpsi = amp / L * np.tensordot(c, dphi, axes=1)
    d2psi = amp / L**2 * np.tensordot(c, d2phi, axes=1)
    return psi, dpsi, d2psi


def effective_size(state: FockState, tol: float = TAIL_TOL) -> int:
    """Smallest index holding all but ``tol`` of the norm."""
    w = np.abs(state.coeffs) ** 2
    tail = np.cumsum(w[::-1])[::-1]  # tail[n] = sum_{k>=n} w_k
    above = np.nonzero(tail >= tol)[0]
    return int(above[-1]) if above.size else 0


def max_grid_step(state: FockState, params: QuarticParams) -> float:
    n_eff = max(effective_size(state), 1)
    return np.pi * params.length_scale / np.sqrt(2 * n_eff)


def fock_to_position(state: FockState, params: QuarticParams, x_min: float, dx: float,
                     n: int) -> SampledWavefunction:
    limit = max_grid_step(state, params)
    if not dx < limit:
        raise ValueError(f"grid step dx={dx:.6g} does not resolve the state; need dx < {limit:.6g}")
    x = x_min + dx * np.arange(n)
    psi, dpsi, d2psi = evaluate(state, params, x)
    return SampledWavefunction(x_min=float(x_min), dx=float(dx), psi=psi, dpsi=dpsi, d2psi=d2psi)


def polar_from_complex(psi, dpsi, d2psi, hbar: float = 1.0, r_max: float | None = None) -> PolarData:
    """Amplitude/phase derivatives from psi and its first two derivatives.

    R''/R = [|psi'|^2 + Re(psi* psi'')] / |psi|^2 - Re(psi* psi')^2 / |psi|^4
    S'    = hbar Im(psi* psi') / |psi|^2
    """
    psi, dpsi, d2psi = (np.asarray(a, dtype=complex) for a in (psi, dpsi, d2psi))
    rho = psi.real**2 + psi.imag**2
    R = np.sqrt(rho)
    if r_max is None:
        r_max = float(np.max(R)) if R.size else 0.0
    valid = R >= NODE_THRESHOLD * r_max
    if r_max == 0:
        valid = np.zeros_like(R, dtype=bool)
    safe = np.where(valid, rho, 1.0)

    cross = psi.real * dpsi.real + psi.imag * dpsi.imag
    curv = dpsi.real**2 + dpsi.imag**2 + psi.real * d2psi.real + psi.imag * d2psi.imag
    ratio = curv / safe - (cross / safe) ** 2
    dS = hbar * (psi.real * dpsi.imag - dpsi.real * psi.imag) / safe
    dR = cross / np.where(valid, R, 1.0)

    nan = np.nan
    return PolarData(
        R=R,
        dR=np.where(valid, dR, nan),
        d2R=np.where(valid, ratio * R, nan),
        dS=np.where(valid, dS, nan),
        valid=valid,
        rpp_over_r=np.where(valid, ratio, nan),
    )


def polar_evaluator(state: FockState, params: QuarticParams):
    """Callable x -> PolarData; the node threshold uses max R over a wide reference grid."""
    L = params.length_scale
    reach = np.sqrt(2) * abs(params.alpha) + np.sqrt(2 * state.n_max + 1) + 10
    ref = np.linspace(-reach, reach, 8001) * L
    r_max = float(np.max(np.abs(evaluate(state, params, ref)[0])))

    def evaluate_polar(x):
        psi, dpsi, d2psi = evaluate(state, params, x)
        return polar_from_complex(psi, dpsi, d2psi, hbar=params.cfg.hbar, r_max=r_max)

    return evaluate_polar
