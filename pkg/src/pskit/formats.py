"""Plain-text serialization of fields, polylines and Fermi branch curves.

Field files ("matrix"): ``#``-prefixed header with nx, np and both ranges,
then np rows (one per momentum, ascending) of nx values. "long" files hold
``x p value`` triples, x varying slowest. Masked samples are written as
``nan``.

Polyline files: a ``# level`` header, then one block per polyline headed
by ``# polyline <i> closed=<0|1> points=<n>`` with one ``x<TAB>p`` pair per
line and a blank line between blocks. Closed polylines do not repeat their
first point.

Curve files: ``# fermi-branches hbar=<value>`` header, then rows of
``x re(p+) im(p+) re(p-) im(p-) real`` in physical units.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .contour import Polyline
from .fermi import FermiCurve
from .wigner import PhaseSpaceGrid, ScalarField


class FormatError(ValueError):
    """Malformed input file; the message carries the offending line number."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.lineno = lineno


def _num(v: float, spec: str = ".12e") -> str:
    return "nan" if not np.isfinite(v) else format(float(v), spec)


def write_field(path, field: ScalarField, fmt: str = "matrix", name: str = "field") -> None:
    g = field.grid
    lines = [
        f"# pskit {name}",
        f"#nx {g.nx}",
        f"#np {g.n_p}",
        f"#x_range {_num(g.x_min)} {_num(g.x_max)}",
        f"#p_range {_num(g.p_min)} {_num(g.p_max)}",
    ]
    if fmt == "matrix":
        for j in range(g.n_p):
            lines.append(" ".join(_num(v) for v in field.values[:, j]))
    elif fmt == "long":
        lines.append("# x p value")
        for i, x in enumerate(g.xs):
            for j, p in enumerate(g.ps):
                lines.append(f"{_num(x)} {_num(p)} {_num(field.values[i, j])}")
    else:
        raise ValueError(f"unknown field format {fmt!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> ScalarField:
    header = {}
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            m = re.match(r"#(nx|np|x_range|p_range)\s+(.*)", s)
            if m:
                header[m.group(1)] = m.group(2).split()
            continue
        try:
            vals = [float(t) for t in s.split()]
        except ValueError:
            raise FormatError(path, lineno, "non-numeric value") from None
        rows.append((lineno, vals))
    try:
        nx, n_p = int(header["nx"][0]), int(header["np"][0])
        xr = [float(v) for v in header["x_range"]]
        pr = [float(v) for v in header["p_range"]]
    except (KeyError, IndexError, ValueError):
        raise FormatError(path, 1, "missing or malformed field header") from None
    grid = PhaseSpaceGrid(xr[0], xr[1], pr[0], pr[1], nx, n_p)
    data = rows
    if len(data) == n_p and all(len(v) == nx for _, v in data):
        values = np.array([v for _, v in data]).T
    elif len(data) == nx * n_p and all(len(v) == 3 for _, v in data):
        values = np.array([v[2] for _, v in data]).reshape(nx, n_p)
    else:
        lineno = next((ln for ln, v in data if len(v) not in (3, nx)), data[-1][0] if data else 1)
        raise FormatError(path, lineno, "row count or width does not match the header")
    return ScalarField(grid=grid, values=values)


def write_polylines(path, polylines, level: float) -> None:
    lines = [f"# level {_num(level, '.17g')}", f"# count {len(polylines)}"]
    for i, poly in enumerate(polylines):
        if i:
            lines.append("")
        lines.append(f"# polyline {i} closed={int(poly.closed)} points={len(poly)}")
        lines.extend(f"{_num(x)}\t{_num(p)}" for x, p in poly.points)
    Path(path).write_text("\n".join(lines) + "\n")


def read_polylines(path):
    """Return ``(level, polylines)``."""
    level = None
    blocks = []
    current = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            m = re.match(r"#\s*level\s+(\S+)", s)
            if m:
                level = float(m.group(1))
            m = re.match(r"#\s*polyline\s+\d+\s+closed=([01])", s)
            if m:
                current = (m.group(1) == "1", [])
                blocks.append(current)
            continue
        if current is None:
            raise FormatError(path, lineno, "point outside a polyline block")
        parts = s.split()
        try:
            if len(parts) != 2:
                raise ValueError
            current[1].append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise FormatError(path, lineno, "expected 'x<TAB>p'") from None
    return level, [Polyline(np.array(pts), closed) for closed, pts in blocks]


def write_curve(path, curve: FermiCurve) -> None:
    lines = [f"# fermi-branches hbar={_num(curve.hbar, '.17g')}",
             "# x re_p_plus im_p_plus re_p_minus im_p_minus real"]
    for x, pp, pm, real in zip(curve.x, curve.p_plus, curve.p_minus, curve.real_branch):
        vals = [x, pp.real, pp.imag, pm.real, pm.imag]
        lines.append(" ".join(_num(v, ".17g") for v in vals) + f" {int(real)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve(path) -> FermiCurve:
    hbar = None
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            m = re.search(r"hbar=(\S+)", s)
            if m:
                try:
                    hbar = float(m.group(1))
                except ValueError:
                    raise FormatError(path, lineno, "bad hbar value") from None
            continue
        parts = s.split()
        if len(parts) != 6:
            raise FormatError(path, lineno, f"expected 6 columns, found {len(parts)}")
        try:
            vals = [float(t) for t in parts[:5]]
            real = int(parts[5])
        except ValueError:
            raise FormatError(path, lineno, "non-numeric value") from None
        if not np.isfinite(vals[0]) or real not in (0, 1):
            raise FormatError(path, lineno, "position must be finite and the real flag 0 or 1")
        rows.append(vals + [real])
    if hbar is None:
        raise FormatError(path, 1, "missing '# fermi-branches hbar=...' header")
    if len(rows) < 3:
        raise FormatError(path, max(1, len(rows)), "need at least 3 samples")
    a = np.array(rows)
    p_plus = a[:, 1] + 1j * a[:, 2]
    p_minus = a[:, 3] + 1j * a[:, 4]
    valid = np.isfinite(p_plus) & np.isfinite(p_minus)
    return FermiCurve(x=a[:, 0], p_plus=p_plus, p_minus=p_minus,
                      real_branch=a[:, 5].astype(bool) & valid, valid=valid, hbar=hbar)
