"""Wigner functions on a rectangular phase-space grid.

The numerical transform works column by column: for each grid position x
it builds the autocorrelation kernel psi(x + u) psi*(x - u) on the native
sampling step u_k = k*dx and sums it against exp(-2 i p u_k / hbar) for
every requested momentum (exact DTFT, no binning). Columns that do not
fall on a sampling node get psi resampled by a band-limited Fourier shift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .packets import AnalyticPacket, PhysConfig, SampledWavefunction, eval_polar

# kernel columns whose magnitude never exceeds this fraction of the peak are dropped
KERNEL_CUTOFF = 1e-30


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_min: float
    x_max: float
    p_min: float
    p_max: float
    nx: int
    n_p: int

    def __post_init__(self):
        if not self.x_max > self.x_min or not self.p_max > self.p_min:
            raise ValueError("grid ranges must be increasing")
        if self.nx < 2 or self.n_p < 2:
            raise ValueError("grid needs at least 2 points per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def ps(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def cell(self) -> float:
        return max(self.dx, self.dp)

    def mesh(self):
        return np.meshgrid(self.xs, self.ps, indexing="ij")


@dataclass(frozen=True)
class ScalarField:
    """Real values on ``grid``, indexed ``values[ix, ip]``.

    NaN marks masked samples (used by Fermi fields at wave-function nodes).
    """

    grid: PhaseSpaceGrid
    values: np.ndarray
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.values.shape != (self.grid.nx, self.grid.n_p):
            raise ValueError(f"values shape {self.values.shape} does not match grid "
                             f"({self.grid.nx}, {self.grid.n_p})")


def max_momentum(psi: SampledWavefunction, cfg: PhysConfig) -> float:
    """Largest |p| the kernel sampling (u step = dx) can represent."""
    return np.pi * cfg.hbar / (2 * psi.dx)


def _shifted_samples(psi: SampledWavefunction, shifts: np.ndarray) -> np.ndarray:
    """psi evaluated at x_min + s + j*dx for every shift s (rows)."""
    spectrum = np.fft.fft(psi.psi)
    q = 2 * np.pi * np.fft.fftfreq(psi.n, d=psi.dx)
    if psi.n % 2 == 0:
        # split the Nyquist bin symmetrically so real inputs stay real
        nyq = psi.n // 2
        phase = np.exp(1j * np.outer(shifts, q))
        phase[:, nyq] = np.cos(shifts * q[nyq])
    else:
        phase = np.exp(1j * np.outer(shifts, q))
    return np.fft.ifft(spectrum[None, :] * phase, axis=1)


def wigner_transform(psi: SampledWavefunction, grid: PhaseSpaceGrid,
                     cfg: PhysConfig = PhysConfig()) -> ScalarField:
    hbar = cfg.hbar
    p_lim = max_momentum(psi, cfg)
    if max(abs(grid.p_min), abs(grid.p_max)) > p_lim:
        raise ValueError(f"momentum window exceeds the representable range |p| <= {p_lim:.6g} "
                         f"for sampling step dx={psi.dx:.6g}")

    n = psi.n
    xs = grid.xs
    frac = (xs - psi.x_min) / psi.dx
    j0 = np.rint(frac).astype(int)
    offsets = (frac - j0) * psi.dx
    inside = (j0 >= 0) & (j0 <= n - 1)

    on_node = np.abs(offsets) <= 1e-9 * psi.dx
    samples = np.broadcast_to(psi.psi, (grid.nx, n)).copy()
    needs_shift = inside & ~on_node
    if np.any(needs_shift):
        samples[needs_shift] = _shifted_samples(psi, offsets[needs_shift])

    k = np.arange(-(n - 1), n)
    plus = j0[:, None] + k[None, :]
    minus = j0[:, None] - k[None, :]
    ok = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n) & inside[:, None]
    rows = np.arange(grid.nx)[:, None]
    kernel = np.zeros((grid.nx, k.size), dtype=complex)
    kernel[ok] = (samples[rows, np.clip(plus, 0, n - 1)]
                  * np.conj(samples[rows, np.clip(minus, 0, n - 1)]))[ok]

    colmax = np.max(np.abs(kernel), axis=0)
    keep = colmax > KERNEL_CUTOFF * max(colmax.max(), np.finfo(float).tiny)
    kernel, k = kernel[:, keep], k[keep]

    u = k * psi.dx
    phases = np.exp(-2j * np.outer(u, grid.ps) / hbar)
    raw = (psi.dx / (np.pi * hbar)) * (kernel @ phases)

    values = raw.real.copy()
    diagnostics = {
        "max_imag": float(np.max(np.abs(raw.imag))) if raw.size else 0.0,
        "max_momentum": p_lim,
        "bound_excess": float(max(0.0, np.max(np.abs(values)) - 1 / (np.pi * hbar))),
    }
    return ScalarField(grid=grid, values=values, diagnostics=diagnostics)


def wigner_gaussian_closed(x0: float, p0: float, delta: float, cfg: PhysConfig,
                           grid: PhaseSpaceGrid) -> ScalarField:
    if not delta > 0:
        raise ValueError("delta must be positive")
    X, P = grid.mesh()
    hbar = cfg.hbar
    values = np.exp(-((X - x0) / delta) ** 2 - (delta * (P - p0) / hbar) ** 2) / (np.pi * hbar)
    return ScalarField(grid=grid, values=values)


def wigner_shift_approx(packet: AnalyticPacket, cfg: PhysConfig, grid: PhaseSpaceGrid) -> ScalarField:
    """Gaussian Wigner function sheared along p by the local phase gradient S'(x)."""
    if any(c != 0 for c in packet.amp_poly):
        raise ValueError("shift approximation requires a pure Gaussian amplitude (P = 0)")
    dS = eval_polar(packet, cfg, grid.xs).dS
    X, P = grid.mesh()
    hbar, d = cfg.hbar, packet.delta
    values = np.exp(-((X - packet.x0) / d) ** 2 - (d * (P - dS[:, None]) / hbar) ** 2) / (np.pi * hbar)
    return ScalarField(grid=grid, values=values)


def marginal_position(field: ScalarField) -> np.ndarray:
    return trapezoid(field.values, field.grid.ps, axis=1)


def marginal_momentum(field: ScalarField) -> np.ndarray:
    return trapezoid(field.values, field.grid.xs, axis=0)


def total_integral(field: ScalarField) -> float:
    return float(trapezoid(marginal_position(field), field.grid.xs))
