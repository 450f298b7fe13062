"""Fermi function g_F(x, p) = (p - S')^2 + hbar^2 R''/R and its zero curve.

A polar evaluator is any callable mapping an array of positions to
:class:`~pskit.packets.PolarData`; :func:`pskit.packets.polar_evaluator`
and :func:`pskit.quartic.polar_evaluator` build them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import cumulative_simpson

from .contour import Polyline
from .packets import PhysConfig, PolarData, SampledWavefunction
from .wigner import PhaseSpaceGrid, ScalarField

PolarEvaluator = Callable[[np.ndarray], PolarData]

MASKED = np.nan


@dataclass(frozen=True)
class FermiCurve:
    """Branch momenta p_plus/p_minus per position, complex where R'' > 0.

    ``valid`` is False at nodes, where both branches are NaN.
    """

    x: np.ndarray
    p_plus: np.ndarray
    p_minus: np.ndarray
    real_branch: np.ndarray
    valid: np.ndarray
    hbar: float = 1.0

    @property
    def gap_sq(self) -> np.ndarray:
        """((p_plus - p_minus) / 2)^2, real: >= 0 on real branches, < 0 on complex ones."""
        return (((self.p_plus - self.p_minus) / 2) ** 2).real


class PolarReconstruction(NamedTuple):
    sprime: np.ndarray
    rpp_over_r: np.ndarray
    max_imag: float


def fermi_field(evaluator: PolarEvaluator, grid: PhaseSpaceGrid, cfg: PhysConfig) -> ScalarField:
    pol = evaluator(grid.xs)
    P = grid.ps[None, :]
    values = (P - pol.dS[:, None]) ** 2 + cfg.hbar**2 * pol.rpp_over_r[:, None]
    values = np.where(pol.valid[:, None], values, MASKED)
    return ScalarField(grid=grid, values=values,
                       diagnostics={"masked_columns": int(np.count_nonzero(~pol.valid))})


def fermi_branches(evaluator: PolarEvaluator, x, cfg: PhysConfig) -> FermiCurve:
    x = np.asarray(x, dtype=float)
    pol = evaluator(x)
    q = -cfg.hbar**2 * np.where(pol.valid, pol.rpp_over_r, 0.0)
    real = pol.valid & (q >= 0)
    root = np.where(real, np.sqrt(np.abs(q)) + 0j, 1j * np.sqrt(np.abs(q)))
    s = pol.dS.astype(complex)
    p_plus = np.where(pol.valid, s + root, complex(MASKED, MASKED))
    p_minus = np.where(pol.valid, s - root, complex(MASKED, MASKED))
    return FermiCurve(x=x, p_plus=p_plus, p_minus=p_minus, real_branch=real,
                      valid=pol.valid.copy(), hbar=cfg.hbar)


def real_segments(curve: FermiCurve, min_samples: int = 1) -> list[tuple[int, int]]:
    """Inclusive index ranges of consecutive real-branch samples."""
    flags = np.r_[0, curve.real_branch.astype(int), 0]
    edges = np.diff(flags)
    starts, stops = np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]
    return [(int(a), int(b) - 1) for a, b in zip(starts, stops) if b - a >= min_samples]


def _branch_point(curve: FermiCurve, inside: int, outside: int):
    """Linear root of gap_sq between a real sample and its complex neighbour."""
    if not curve.valid[outside]:
        return None
    q_in, q_out = curve.gap_sq[inside], curve.gap_sq[outside]
    if not q_out < 0 <= q_in:
        return None
    t = q_in / (q_in - q_out)
    x = curve.x[inside] + t * (curve.x[outside] - curve.x[inside])
    s_in = 0.5 * (curve.p_plus[inside] + curve.p_minus[inside]).real
    s_out = 0.5 * (curve.p_plus[outside] + curve.p_minus[outside]).real
    return x, s_in + t * (s_out - s_in)


def branch_closure(curve: FermiCurve, min_samples: int = 3) -> list[Polyline]:
    """One closed polyline per run of real-branch samples.

    Each run is walked left to right along p_plus and back along p_minus.
    Where the run borders a complex sample the two branches are joined at
    the interpolated branch point (gap_sq = 0) instead of a vertical edge.
    """
    n = curve.x.size
    out = []
    for a, b in real_segments(curve, min_samples):
        upper = np.column_stack([curve.x[a:b + 1], curve.p_plus[a:b + 1].real])
        lower = np.column_stack([curve.x[a:b + 1], curve.p_minus[a:b + 1].real])[::-1]
        pieces = []
        left = _branch_point(curve, a, a - 1) if a > 0 else None
        right = _branch_point(curve, b, b + 1) if b < n - 1 else None
        if left is not None:
            pieces.append([left])
        pieces.append(upper)
        if right is not None:
            pieces.append([right])
        pieces.append(lower)
        pts = np.vstack([np.asarray(piece, dtype=float).reshape(-1, 2) for piece in pieces])
        try:
            out.append(Polyline.from_points(pts, closed=True))
        except ValueError:
            continue
    return out


def reconstruct_polar(curve: FermiCurve) -> PolarReconstruction:
    """Invert the branch formulas: S' = (p+ + p-)/2, hbar^2 R''/R = -((p+ - p-)/2)^2."""
    s = 0.5 * (curve.p_plus + curve.p_minus)
    half_gap = 0.5 * (curve.p_plus - curve.p_minus)
    rpp = -(half_gap**2) / curve.hbar**2
    valid = curve.valid
    max_imag = float(np.max(np.abs(s.imag[valid]), initial=0.0))
    return PolarReconstruction(
        sprime=np.where(valid, s.real, MASKED),
        rpp_over_r=np.where(valid, rpp.real, MASKED),
        max_imag=max_imag,
    )


def _masked_interval(x, bad) -> str:
    idx = np.nonzero(bad)[0]
    return f"[{x[idx[0]]:.6g}, {x[idx[-1]]:.6g}]"


def _numerov(potential: np.ndarray, h: float, stop: int) -> np.ndarray:
    """March y'' = V y from y[0] = 0 towards index ``stop`` (inclusive)."""
    y = np.zeros(stop + 1)
    if stop == 0:
        return y
    y[1] = 1e-30
    w = 1 - h * h * potential / 12
    for j in range(1, stop):
        y[j + 1] = (2 * y[j] * (1 + 5 * h * h * potential[j] / 12) - y[j - 1] * w[j - 1]) / w[j + 1]
        if abs(y[j + 1]) > 1e200:
            y[: j + 2] *= 1e-200
    return y


def _shoot(x, rpp, ia):
    """Envelope decaying at both ends, equal to 1 at index ``ia``.

    Also returns the central-difference slopes at ``ia`` of the left and
    right solutions (empty when ``ia`` sits on the boundary).
    """
    h = x[1] - x[0]
    n = x.size
    left = np.full(n, np.nan)
    stop = min(ia + 1, n - 1)
    left[: stop + 1] = _numerov(rpp, h, stop)
    right = np.full(n, np.nan)
    stop = min(n - ia, n - 1)
    right[n - 1 - stop:] = _numerov(rpp[::-1], h, stop)[::-1]
    left /= left[ia]
    right /= right[ia]
    env = np.where(np.arange(n) <= ia, left, right)

    slopes = []
    if 0 < ia < n - 1:
        slopes = [(left[ia + 1] - left[ia - 1]) / (2 * h), (right[ia + 1] - right[ia - 1]) / (2 * h)]
    return env, slopes


@dataclass(frozen=True)
class Reconstruction:
    wavefunction: SampledWavefunction
    anchor: tuple[float, float, float]
    slope_at_anchor: float
    slope_mismatch: float


def reconstruct_wavefunction(x, sprime, rpp_over_r, anchor=None, hbar: float = 1.0) -> Reconstruction:
    """Rebuild psi = R exp(iS/hbar) from S'(x) and R''/R on a uniform node-free grid.

    S follows from cumulative integration of S'. R solves R'' = (R''/R) R;
    it is integrated (Numerov) inwards from both interval ends, where the
    decaying solution dominates, and the two halves are matched at the
    anchor. The anchor's R value only sets the scale before normalization;
    its S value fixes the global phase. Without an anchor the maximum of
    the envelope is used, with S = 0 there.
    """
    x = np.asarray(x, dtype=float)
    sprime = np.asarray(sprime, dtype=float)
    rpp = np.asarray(rpp_over_r, dtype=float)
    if x.ndim != 1 or x.size < 3 or sprime.shape != x.shape or rpp.shape != x.shape:
        raise ValueError("x, sprime and rpp_over_r must be 1-d arrays of equal length >= 3")
    h = x[1] - x[0]
    if not h > 0 or not np.allclose(np.diff(x), h, rtol=1e-9, atol=0):
        raise ValueError("reconstruction needs a uniform increasing grid")
    bad = ~(np.isfinite(sprime) & np.isfinite(rpp))
    if np.any(bad):
        raise ValueError(f"masked samples (wave-function node) in interval {_masked_interval(x, bad)}; "
                         "reconstruction is only defined on node-free intervals")

    if anchor is None:
        env, _ = _shoot(x, rpp, x.size // 2)
        ia = int(np.argmax(np.abs(env)))
        x_a, r_a, s_a = float(x[ia]), 1.0, 0.0
    else:
        x_a, r_a, s_a = (float(v) for v in anchor)
        if not x[0] <= x_a <= x[-1]:
            raise ValueError(f"anchor x={x_a} lies outside [{x[0]}, {x[-1]}]")
        ia = int(np.argmin(np.abs(x - x_a)))

    env, slopes = _shoot(x, rpp, ia)
    if np.any(env < 0):
        raise ValueError(f"reconstructed envelope changes sign in {_masked_interval(x, env < 0)}")
    R = r_a * env

    S = cumulative_simpson(sprime, x=x, initial=0.0)
    S = S - np.interp(x_a, x, S) + s_a

    psi = R * np.exp(1j * S / hbar)
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * h)
    slope = float(np.mean(slopes)) * r_a if slopes else float("nan")
    mismatch = float(abs(slopes[0] - slopes[1])) if slopes else float("nan")
    return Reconstruction(
        wavefunction=SampledWavefunction(x_min=float(x[0]), dx=float(h), psi=psi),
        anchor=(x_a, r_a, s_a),
        slope_at_anchor=slope,
        slope_mismatch=mismatch,
    )
