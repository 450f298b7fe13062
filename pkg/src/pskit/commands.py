"""Figure-data pipelines behind the ``pskit`` subcommands.

Every command writes plain-text files into ``RunConfig.out_dir`` and
returns the metrics dictionary it also stores as ``metrics.json``. Fields
and polylines are written in scaled coordinates (the axes of the figures);
branch-curve files keep physical units so they can be fed back into
``reconstruct``.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import contour, fermi, formats, packets, quartic, wigner
from .contour import Polyline
from .packets import AnalyticPacket, PhysConfig
from .wigner import PhaseSpaceGrid, ScalarField

FIG1_PHASES = {
    1: (0.0, 0.0, 1.0),
    2: (0.0, 0.0, 0.0, 1.0),
    3: (0.0, 0.0, 1.0, -1.0 / 3.0),
    4: (0.0, 0.0, 0.0, 0.0, -0.5),
}
DEFAULT_WINDOWS = {
    "fig1": (-6.0, 6.0, -6.0, 6.0),
    "fig2": (-4.0, 4.0, -4.0, 4.0),
    "fig3": (-10.0, 10.0, -10.0, 10.0),
    "compare": (-6.0, 6.0, -6.0, 6.0),
}
FIG3_TIMES = (0.0, 0.4, 0.8, 1.2)
COMMANDS = ("fig1", "fig2", "fig3", "compare", "reconstruct")


@dataclass(frozen=True)
class RunConfig:
    command: str
    out_dir: Path
    grid: tuple[int, int] = (256, 256)
    window: tuple[float, float, float, float] | None = None
    fmt: str = "matrix"
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    x0: float = 0.0
    p0: float = 0.0
    delta: float = 1.0
    amp_poly: tuple[float, ...] = ()
    phase_poly: tuple[float, ...] = ()
    row: int | None = None
    a: float | None = None
    times: tuple[float, ...] = FIG3_TIMES
    lambda_hbar: float | None = None
    center: tuple[float, float] = (3.0, 0.0)
    level_frac: float = math.exp(-1.0)
    psi_samples: int = 4096
    branch_samples: int = 1024
    curve: Path | None = None
    reference: dict | None = field(default=None)

    def validate(self) -> "RunConfig":
        """Raise ValueError for any parameter a module would reject; fill defaults."""
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.fmt not in ("matrix", "long"):
            raise ValueError("format must be 'matrix' or 'long'")
        nx, n_p = self.grid
        if nx < 2 or n_p < 2:
            raise ValueError("grid needs at least 2 points per axis")
        PhysConfig(self.hbar, self.mass, self.omega)
        if self.psi_samples < 16 or self.branch_samples < 3:
            raise ValueError("psi-samples must be >= 16 and branch-samples >= 3")
        if self.command == "fig1" and self.row not in FIG1_PHASES:
            raise ValueError("fig1 needs --row in 1..4")
        if self.command == "fig2" and not (self.a is not None and self.a > 0):
            raise ValueError("fig2 needs --a > 0 (the amplitude factor 1 + a xs^2 must stay positive)")
        if self.command == "fig3":
            if not self.times or not all(np.isfinite(t) for t in self.times):
                raise ValueError("fig3 needs a nonempty list of finite times")
            self.quartic_params()
        if self.command == "compare":
            self.packet()
        if self.command == "reconstruct" and self.curve is None:
            raise ValueError("reconstruct needs --curve FILE")
        if not 0 < self.level_frac < 1:
            raise ValueError("level-frac must lie in (0, 1)")
        window = self.window
        if window is None and self.command in DEFAULT_WINDOWS:
            window = DEFAULT_WINDOWS[self.command]
        if window is not None and not (window[1] > window[0] and window[3] > window[2]):
            raise ValueError("window must satisfy XMIN < XMAX and PMIN < PMAX")
        return replace(self, window=window)

    @property
    def phys(self) -> PhysConfig:
        return PhysConfig(self.hbar, self.mass, self.omega)

    def packet(self) -> AnalyticPacket:
        if self.command == "fig1":
            return AnalyticPacket(self.x0, self.p0, self.delta, (), FIG1_PHASES[self.row])
        if self.command == "fig2":
            return AnalyticPacket(self.x0, self.p0, self.delta, (0.0, 0.0, self.a), ())
        return AnalyticPacket(self.x0, self.p0, self.delta, self.amp_poly, self.phase_poly)

    def quartic_params(self) -> quartic.QuarticParams:
        alpha = quartic.alpha_from_center(*self.center)
        return quartic.QuarticParams(cfg=self.phys, lambda_hbar=self.lambda_hbar, alpha=alpha)


def ensure_writable(out_dir: Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not os.access(out_dir, os.W_OK | os.X_OK):
        raise PermissionError(f"output directory {out_dir} is not writable")
    return out_dir


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass(frozen=True)
class Scaling:
    """Affine map between physical (x, p) and the scaled figure axes."""

    x_shift: float
    x_unit: float
    p_shift: float
    p_unit: float

    def to_physical_grid(self, window, shape) -> PhaseSpaceGrid:
        x_lo, x_hi, p_lo, p_hi = window
        return PhaseSpaceGrid(self.x_shift + self.x_unit * x_lo, self.x_shift + self.x_unit * x_hi,
                              self.p_shift + self.p_unit * p_lo, self.p_shift + self.p_unit * p_hi,
                              shape[0], shape[1])

    def field(self, f: ScalarField, window) -> ScalarField:
        g = f.grid
        return ScalarField(PhaseSpaceGrid(*window, g.nx, g.n_p), f.values, f.diagnostics)

    def polylines(self, polys) -> list[Polyline]:
        out = []
        for poly in polys:
            pts = np.column_stack([(poly.points[:, 0] - self.x_shift) / self.x_unit,
                                   (poly.points[:, 1] - self.p_shift) / self.p_unit])
            out.append(Polyline.from_points(pts, poly.closed))
        return out


def _areas(polys) -> list:
    return [contour.enclosed_area(p) if p.closed and len(p) >= 3 else None for p in polys]


def _compare_curves(evaluator, psi, cfg: PhysConfig, scaling: Scaling, window, shape,
                    level_frac: float, branch_samples: int, area_unit: float):
    """Wigner field, Fermi field, their contours and agreement metrics."""
    grid = scaling.to_physical_grid(window, shape)
    W = wigner.wigner_transform(psi, grid, cfg)
    F = fermi.fermi_field(evaluator, grid, cfg)
    xb = np.linspace(grid.x_min, grid.x_max, branch_samples)
    curve = fermi.fermi_branches(evaluator, xb, cfg)

    Ws, Fs = scaling.field(W, window), scaling.field(F, window)
    w_max = float(np.max(W.values))
    level = level_frac * w_max
    w_contours = contour.extract_level_set(Ws, level)
    closures = scaling.polylines(fermi.branch_closure(curve))
    cell = Ws.grid.cell
    if closures and w_contours:
        dist = contour.hausdorff_distance(closures, w_contours, step=cell / 2)
    else:
        dist = None
    metrics = {
        "grid": list(shape),
        "window": list(window),
        "cell": cell,
        "w_max": w_max,
        "w_min": float(np.min(W.values)),
        "level": level,
        "level_frac": level_frac,
        "wigner_max_imag": W.diagnostics["max_imag"],
        "wigner_total": wigner.total_integral(W),
        "hausdorff": dist,
        "hausdorff_cells": None if dist is None else dist / cell,
        "fermi_curves": len(closures),
        "fermi_segments": len(fermi.real_segments(curve, 3)),
        "fermi_areas": _areas(closures),
        "fermi_areas_over_pi_hbar": [None if a is None else a * area_unit / (np.pi * cfg.hbar)
                                     for a in _areas(closures)],
        "wigner_contours": len(w_contours),
        "wigner_contour_areas": _areas(w_contours),
    }
    return {"W": Ws, "F": Fs, "curve": curve, "closures": closures,
            "w_contours": w_contours, "level": level, "metrics": metrics}


def _write_artifacts(out: Path, res, fmt: str) -> None:
    formats.write_field(out / "wigner.dat", res["W"], fmt, name="wigner")
    formats.write_field(out / "fermi.dat", res["F"], fmt, name="fermi")
    formats.write_polylines(out / "fermi_zero.txt", res["closures"], 0.0)
    formats.write_polylines(out / "wigner_contour.txt", res["w_contours"], res["level"])
    formats.write_curve(out / "branches.txt", res["curve"])


def _packet_scaling(packet: AnalyticPacket, cfg: PhysConfig) -> Scaling:
    return Scaling(packet.x0, packet.delta, packet.p0, cfg.hbar / packet.delta)


def _sample_packet(packet: AnalyticPacket, cfg: PhysConfig, window, n: int):
    half = max(16.0, abs(window[0]) + 10, abs(window[1]) + 10) * packet.delta
    dx = 2 * half / (n - 1)
    return packets.sample(packet, cfg, packet.x0 - half, dx, n)


def _analyze_packet(rc: RunConfig, packet: AnalyticPacket):
    cfg = rc.phys
    scaling = _packet_scaling(packet, cfg)
    psi = _sample_packet(packet, cfg, rc.window, rc.psi_samples)
    res = _compare_curves(packets.polar_evaluator(packet, cfg), psi, cfg, scaling, rc.window,
                          rc.grid, rc.level_frac, rc.branch_samples,
                          area_unit=cfg.hbar)
    res["metrics"].update({
        "x0": packet.x0, "p0": packet.p0, "delta": packet.delta,
        "amp_poly": list(packet.amp_poly), "phase_poly": list(packet.phase_poly),
        "psi_truncated": psi.truncated,
    })
    return res


def cmd_fig1(rc: RunConfig) -> dict:
    rc = replace(rc, command="fig1").validate()
    out = ensure_writable(rc.out_dir)
    res = _analyze_packet(rc, rc.packet())
    res["metrics"]["row"] = rc.row
    _write_artifacts(out, res, rc.fmt)
    _write_json(out / "metrics.json", res["metrics"])
    return _plain(res["metrics"])


def wavefunction_maxima(packet: AnalyticPacket, cfg: PhysConfig, lo: float, hi: float,
                        n: int = 20001) -> list[float]:
    """Scaled positions of local maxima of R inside [lo, hi] (scaled units)."""
    xs = np.linspace(lo, hi, n)
    x = packet.x0 + packet.delta * xs
    R = packets.eval_polar(packet, cfg, x).R
    peaks = np.nonzero((R[1:-1] > R[:-2]) & (R[1:-1] >= R[2:]))[0] + 1
    out = []
    for k in peaks:
        def slope(t):
            return float(packets.eval_polar(packet, cfg, packet.x0 + packet.delta * t).dR)
        a, b = xs[k - 1], xs[k + 1]
        if slope(a) > 0 > slope(b):
            out.append(brentq(slope, a, b, xtol=1e-14))
        else:
            out.append(float(xs[k]))
    return out


def cmd_fig2(rc: RunConfig) -> dict:
    rc = replace(rc, command="fig2").validate()
    out = ensure_writable(rc.out_dir)
    packet = rc.packet()
    res = _analyze_packet(rc, packet)
    maxima = wavefunction_maxima(packet, rc.phys, rc.window[0], rc.window[1])
    m = res["metrics"]
    m["a"] = rc.a
    m["wavefunction_maxima"] = maxima
    if rc.a > 0.5:
        m["predicted_maxima"] = [-math.sqrt(2 - 1 / rc.a), math.sqrt(2 - 1 / rc.a)]
    else:
        m["predicted_maxima"] = [0.0]
    Wf = res["W"]
    xs, ps = Wf.grid.xs, Wf.grid.ps
    marg = wigner.marginal_position(Wf)
    inner = np.abs(xs) <= 0.5 * max(abs(v) for v in maxima)
    if np.any(inner) and len(maxima) > 1:
        k = int(np.argmin(np.where(inner, marg, np.inf)))
        m["marginal_min_position"] = float(xs[k])
        m["marginal_min_is_local"] = bool(0 < k < xs.size - 1 and marg[k] <= marg[k - 1]
                                          and marg[k] <= marg[k + 1])
    else:
        m["marginal_min_position"] = None
        m["marginal_min_is_local"] = False
    j0 = int(np.argmin(np.abs(ps)))
    m["p0_slice_argmax"] = float(xs[int(np.argmax(Wf.values[:, j0]))])
    _write_artifacts(out, res, rc.fmt)
    _write_json(out / "metrics.json", m)
    return _plain(m)


def _time_dir(t: float) -> str:
    return f"t{t:.4f}"


def cmd_fig3(rc: RunConfig) -> dict:
    rc = replace(rc, command="fig3").validate()
    out = ensure_writable(rc.out_dir)
    params = rc.quartic_params()
    cfg = params.cfg
    L, P = params.length_scale, params.momentum_scale
    scaling = Scaling(0.0, L, 0.0, P)
    state0 = quartic.initial_state(params)

    half = max(20.0, abs(rc.window[0]) + 10, abs(rc.window[1]) + 10)
    n = max(rc.psi_samples // 2, 16)
    dx = 2 * half * L / (n - 1)

    summary = {"alpha": [params.alpha.real, params.alpha.imag], "lambda_hbar": params.lambda_hbar,
               "n_max": params.n_max, "times": list(rc.times), "snapshots": {}}
    norms, energies = [], []
    for tT in rc.times:
        state = quartic.evolve(state0, params, tT * params.period)
        norms.append(state.norm())
        energies.append(quartic.mean_energy(state, params))
        psi = quartic.fock_to_position(state, params, -half * L, dx, n)
        res = _compare_curves(quartic.polar_evaluator(state, params), psi, cfg, scaling,
                              rc.window, rc.grid, rc.level_frac, rc.branch_samples,
                              area_unit=L * P)
        sub = out / _time_dir(tT)
        sub.mkdir(exist_ok=True)
        _write_artifacts(sub, res, rc.fmt)
        m = res["metrics"]
        m.update({"t_over_T": tT, "norm": norms[-1], "energy": energies[-1]})
        _write_json(sub / "metrics.json", m)
        summary["snapshots"][_time_dir(tT)] = {
            "fermi_segments": m["fermi_segments"],
            "hausdorff": m["hausdorff"],
            "w_min": m["w_min"],
            "fermi_areas_over_pi_hbar": m["fermi_areas_over_pi_hbar"],
        }
    summary["norms"] = norms
    summary["energies"] = energies
    summary["norm_drift"] = float(np.max(np.abs(np.array(norms) - norms[0])))
    summary["energy_drift"] = float(np.max(np.abs(np.array(energies) - energies[0])))
    _write_json(out / "metrics.json", summary)
    return _plain(summary)


def cmd_compare(rc: RunConfig) -> dict:
    rc = replace(rc, command="compare").validate()
    out = ensure_writable(rc.out_dir)
    res = _analyze_packet(rc, rc.packet())
    _write_artifacts(out, res, rc.fmt)
    _write_json(out / "metrics.json", res["metrics"])
    return _plain(res["metrics"])


def cmd_reconstruct(rc: RunConfig) -> dict:
    rc = replace(rc, command="reconstruct").validate()
    out = ensure_writable(rc.out_dir)
    curve = formats.read_curve(rc.curve)
    polar = fermi.reconstruct_polar(curve)
    rec = fermi.reconstruct_wavefunction(curve.x, polar.sprime, polar.rpp_over_r, hbar=curve.hbar)
    wf = rec.wavefunction
    metrics = {
        "curve": str(rc.curve),
        "samples": int(wf.n),
        "anchor": list(rec.anchor),
        "slope_at_anchor": rec.slope_at_anchor,
        "slope_mismatch": rec.slope_mismatch,
        "sprime_max_imag": polar.max_imag,
        "fidelity": None,
    }
    if rc.reference is not None:
        ref = AnalyticPacket(**rc.reference)
        cfg = PhysConfig(curve.hbar, rc.mass, rc.omega)
        ref_psi = packets.sample(ref, cfg, wf.x_min, wf.dx, wf.n)
        metrics["fidelity"] = packets.fidelity(wf, ref_psi)
        metrics["reference"] = {k: (list(v) if isinstance(v, tuple) else v)
                                for k, v in rc.reference.items()}
    lines = ["# reconstructed wave function (physical units)", "# x re_psi im_psi abs_psi"]
    for x, v in zip(wf.x, wf.psi):
        lines.append(f"{x:.17g} {v.real:.17g} {v.imag:.17g} {abs(v):.17g}")
    (out / "reconstructed.dat").write_text("\n".join(lines) + "\n")
    _write_json(out / "metrics.json", metrics)
    return _plain(metrics)


COMMAND_FUNCS = {
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "fig3": cmd_fig3,
    "compare": cmd_compare,
    "reconstruct": cmd_reconstruct,
}
