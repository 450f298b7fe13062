"""Analytic wave packets R(x) exp(iS(x)/hbar) and their polar data.

A packet is a normalized Gaussian envelope times a polynomial amplitude
factor ``1 + P(xs)`` times a polynomial phase ``theta(xs)``, where
``xs = (x - x0) / delta`` is the scaled position. All derivatives are
exact (product rule on polynomial x Gaussian), never finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad

MAX_POLY_DEGREE = 16
NODE_THRESHOLD = 1e-12
NORM_LEAK_TOL = 1e-8


@dataclass(frozen=True)
class PhysConfig:
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "mass", "omega"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class PolarData:
    """Amplitude/phase data of psi = R exp(iS/hbar) at a set of positions.

    ``rpp_over_r`` is R''/R evaluated without forming the quotient of two
    tiny numbers; it is NaN where ``valid`` is False.
    """

    R: np.ndarray
    dR: np.ndarray
    d2R: np.ndarray
    dS: np.ndarray
    valid: np.ndarray
    rpp_over_r: np.ndarray


@dataclass(frozen=True)
class SampledWavefunction:
    x_min: float
    dx: float
    psi: np.ndarray
    dpsi: np.ndarray | None = None
    d2psi: np.ndarray | None = None
    truncated: bool = False

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        if self.psi.ndim != 1 or self.psi.size < 2:
            raise ValueError("psi must be a 1-d array with at least 2 samples")
        for name in ("dpsi", "d2psi"):
            channel = getattr(self, name)
            if channel is not None and channel.shape != self.psi.shape:
                raise ValueError(f"{name} shape {channel.shape} does not match psi {self.psi.shape}")

    @property
    def n(self) -> int:
        return self.psi.size

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)


def overlap(a: SampledWavefunction, b: SampledWavefunction) -> complex:
    """<a|b> by Riemann sum; both states must share one grid."""
    if a.n != b.n or not np.isclose(a.dx, b.dx) or not np.isclose(a.x_min, b.x_min):
        raise ValueError("states live on different grids")
    return complex(np.vdot(a.psi, b.psi) * a.dx)


def fidelity(a: SampledWavefunction, b: SampledWavefunction) -> float:
    """|<a|b>| for normalized states on a common grid."""
    return abs(overlap(a, b)) / np.sqrt(a.norm() * b.norm())


def _as_poly(coeffs, what: str) -> Polynomial:
    coeffs = np.asarray(coeffs, dtype=float) if len(coeffs) else np.zeros(1)
    if coeffs.ndim != 1 or not np.all(np.isfinite(coeffs)):
        raise ValueError(f"{what} coefficients must be a finite 1-d sequence")
    if coeffs.size - 1 > MAX_POLY_DEGREE:
        raise ValueError(f"{what} degree {coeffs.size - 1} exceeds the cap of {MAX_POLY_DEGREE}")
    return Polynomial(coeffs)


@dataclass(frozen=True)
class AnalyticPacket:
    """Gaussian x (1 + P(xs)) x exp(i p0 x / hbar + i theta(xs)).

    Polynomial coefficients are in ascending order of the scaled position
    ``xs = (x - x0) / delta``. An empty sequence means P = 0 (resp. theta = 0).
    """

    x0: float
    p0: float
    delta: float
    amp_poly: tuple[float, ...] = ()
    phase_poly: tuple[float, ...] = ()
    norm_const: float = field(init=False, repr=False)
    r_max: float = field(init=False, repr=False)

    def __post_init__(self):
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise ValueError(f"delta must be positive, got {self.delta!r}")
        if not (np.isfinite(self.x0) and np.isfinite(self.p0)):
            raise ValueError("x0 and p0 must be finite")
        object.__setattr__(self, "amp_poly", tuple(float(c) for c in self.amp_poly))
        object.__setattr__(self, "phase_poly", tuple(float(c) for c in self.phase_poly))
        amp = self.amplitude_factor
        _as_poly(self.phase_poly, "phase")

        probe = np.linspace(-50.0, 50.0, 20001)
        if np.any(amp(probe) < 0):
            raise ValueError("1 + P(xs) must be non-negative for all real xs")

        if self.amp_poly:
            lo, hi = self.x0 - 12 * self.delta, self.x0 + 12 * self.delta
            mass, _ = quad(lambda x: _gauss(x, self.x0, self.delta) ** 2 * amp((x - self.x0) / self.delta) ** 2,
                           lo, hi, epsabs=0.0, epsrel=1e-12, limit=400,
                           points=[self.x0])
            c = 1.0 / np.sqrt(mass)
        else:
            c = 1.0
        object.__setattr__(self, "norm_const", c)

        xs = np.linspace(-12.0, 12.0, 24001)
        r = c * _gauss(self.x0 + self.delta * xs, self.x0, self.delta) * amp(xs)
        object.__setattr__(self, "r_max", float(np.max(r)))

    @property
    def amplitude_factor(self) -> Polynomial:
        return 1 + _as_poly(self.amp_poly, "amplitude")

    @property
    def phase(self) -> Polynomial:
        return _as_poly(self.phase_poly, "phase")

    def scaled(self, x):
        return (np.asarray(x, dtype=float) - self.x0) / self.delta


def _gauss(x, x0, delta):
    return np.exp(-0.5 * ((x - x0) / delta) ** 2) / np.sqrt(np.sqrt(np.pi) * delta)


def make_gaussian(x0: float, p0: float, delta: float) -> AnalyticPacket:
    return AnalyticPacket(x0=x0, p0=p0, delta=delta)


def eval_polar(packet: AnalyticPacket, cfg: PhysConfig, x) -> PolarData:
    xs = packet.scaled(x)
    d = packet.delta
    amp = packet.amplitude_factor
    a0, a1, a2 = amp(xs), amp.deriv(1)(xs), amp.deriv(2)(xs)

    g = packet.norm_const * _gauss(packet.x0 + d * xs, packet.x0, d)
    g1 = -xs / d
    g2 = (xs**2 - 1) / d**2

    R = g * a0
    dR = g * (g1 * a0 + a1 / d)
    d2R = g * (g2 * a0 + 2 * g1 * a1 / d + a2 / d**2)
    dS = packet.p0 + cfg.hbar / d * packet.phase.deriv(1)(xs)

    valid = R >= NODE_THRESHOLD * packet.r_max
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = g2 + (2 * g1 * a1 / d + a2 / d**2) / a0
    ratio = np.where(valid, ratio, np.nan)
    return PolarData(R=R, dR=dR, d2R=d2R, dS=np.broadcast_to(dS, R.shape).astype(float),
                     valid=valid, rpp_over_r=ratio)


def phase_of(packet: AnalyticPacket, cfg: PhysConfig, x) -> np.ndarray:
    """S(x)/hbar."""
    x = np.asarray(x, dtype=float)
    return packet.p0 * x / cfg.hbar + packet.phase(packet.scaled(x))


def polar_evaluator(packet: AnalyticPacket, cfg: PhysConfig):
    """Callable x -> PolarData for the fermi module."""
    def evaluate(x):
        return eval_polar(packet, cfg, x)
    return evaluate


def sample(packet: AnalyticPacket, cfg: PhysConfig, x_min: float, dx: float, n: int,
           with_derivatives: bool = False) -> SampledWavefunction:
    if n < 2:
        raise ValueError("need at least 2 samples")
    if not dx > 0:
        raise ValueError("dx must be positive")
    x = x_min + dx * np.arange(n)
    pol = eval_polar(packet, cfg, x)
    carrier = np.exp(1j * phase_of(packet, cfg, x))
    psi = pol.R * carrier

    grid_norm = float(np.sum(np.abs(psi) ** 2) * dx)
    truncated = bool(1.0 - grid_norm > NORM_LEAK_TOL)
    scale = 1.0 / np.sqrt(grid_norm)

    dpsi = d2psi = None
    if with_derivatives:
        hbar = cfg.hbar
        ds = pol.dS
        d2s = hbar / packet.delta**2 * packet.phase.deriv(2)(packet.scaled(x))
        dpsi = (pol.dR + 1j * pol.R * ds / hbar) * carrier * scale
        d2psi = (pol.d2R + 2j * pol.dR * ds / hbar + 1j * pol.R * d2s / hbar
                 - pol.R * ds**2 / hbar**2) * carrier * scale
    return SampledWavefunction(x_min=float(x_min), dx=float(dx), psi=psi * scale,
                               dpsi=dpsi, d2psi=d2psi, truncated=truncated)
