"""``pskit`` command-line entry point.

Exit status: 0 on success, 2 on usage errors, 1 when a computation or
file operation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from .commands import COMMAND_FUNCS, FIG3_TIMES, RunConfig
from .formats import FormatError


def _floats(n: int | None = None):
    def parse(text: str) -> tuple[float, ...]:
        try:
            vals = tuple(float(t) for t in text.split(",") if t.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
        if n is not None and len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return vals
    return parse


def _ints(n: int):
    def parse(text: str) -> tuple[int, ...]:
        try:
            vals = tuple(int(t) for t in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated integers, got {text!r}") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated integers, got {text!r}")
        return vals
    return parse


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--grid", type=_ints(2), default=(256, 256), metavar="NX,NP")
    parser.add_argument("--window", type=_floats(4), default=None, metavar="XMIN,XMAX,PMIN,PMAX",
                        help="phase-space window in scaled units")
    parser.add_argument("--format", dest="fmt", choices=("matrix", "long"), default="matrix")
    parser.add_argument("--out", type=Path, default=Path("pskit-out"), metavar="DIR")
    parser.add_argument("--config", type=Path, default=None, metavar="FILE",
                        help="key=value file; command-line flags take precedence")
    parser.add_argument("--hbar", type=float, default=1.0)
    parser.add_argument("--mass", type=float, default=1.0)
    parser.add_argument("--omega", type=float, default=1.0)
    parser.add_argument("--psi-samples", type=int, default=4096)
    parser.add_argument("--branch-samples", type=int, default=1024)
    parser.add_argument("--level-frac", type=float, default=0.36787944117144233,
                        help="Wigner contour level as a fraction of W_max (default 1/e)")


def _packet_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--x0", type=float, default=0.0)
    parser.add_argument("--p0", type=float, default=0.0)
    parser.add_argument("--delta", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pskit", description=(
        "Wigner functions and Fermi g_F = 0 curves for one-dimensional wave packets."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig1", help="Gaussian envelope with polynomial phase (rows 1-4)")
    p.add_argument("--row", type=int, required=True, choices=range(1, 5))
    _packet_flags(p)
    _common(p)

    p = sub.add_parser("fig2", help="amplitude factor 1 + a xs^2, zero phase")
    p.add_argument("--a", type=float, required=True)
    _packet_flags(p)
    _common(p)

    p = sub.add_parser("fig3", help="quartic oscillator snapshots")
    p.add_argument("--times", type=_floats(), default=FIG3_TIMES, metavar="T1,T2,...",
                   help="snapshot times in units of the harmonic period")
    p.add_argument("--lambda-hbar", type=float, default=None,
                   help="nonlinearity hbar*lambda (default 0.01*omega)")
    p.add_argument("--center", type=_floats(2), default=(3.0, 0.0), metavar="XS,PS",
                   help="initial coherent-state centre in scaled units")
    _common(p)

    p = sub.add_parser("compare", help="g_F = 0 versus a Wigner contour for any analytic packet")
    _packet_flags(p)
    p.add_argument("--amp-poly", type=_floats(), default=(), metavar="C0,C1,...")
    p.add_argument("--phase-poly", type=_floats(), default=(), metavar="C0,C1,...")
    _common(p)

    p = sub.add_parser("reconstruct", help="rebuild psi from a Fermi branch file")
    p.add_argument("--curve", type=Path, required=True, metavar="FILE")
    p.add_argument("--ref-x0", type=float, default=None)
    p.add_argument("--ref-p0", type=float, default=None)
    p.add_argument("--ref-delta", type=float, default=None)
    p.add_argument("--ref-amp-poly", type=_floats(), default=None)
    p.add_argument("--ref-phase-poly", type=_floats(), default=None)
    _common(p)
    return parser


def read_config(path: Path) -> dict[str, str]:
    """Parse a key=value file (``#`` comments, blank lines ignored)."""
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise FormatError(path, lineno, "expected key=value")
        key, value = (t.strip() for t in s.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, _ = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if known.config is not None and command is not None:
        subparser = choices[command]
        try:
            entries = read_config(known.config)
        except (OSError, FormatError) as exc:
            parser.error(f"config: {exc}")
        entries.pop("config", None)
        actions = {}
        for action in subparser._actions:
            for opt in action.option_strings:
                actions[opt.lstrip("-").replace("-", "_")] = action
        unknown = sorted(k for k in entries if k not in actions)
        if unknown:
            parser.error(f"config: unknown keys {', '.join(unknown)}")
        # string defaults pass through each option's type converter; flags still win
        for key in entries:
            actions[key].required = False
        subparser.set_defaults(**{actions[k].dest: v for k, v in entries.items()})
    return parser.parse_args(argv)


def to_run_config(args: argparse.Namespace) -> RunConfig:
    kwargs = {f.name: getattr(args, f.name) for f in fields(RunConfig)
              if hasattr(args, f.name) and f.name not in ("out_dir", "reference")}
    kwargs["out_dir"] = args.out
    if args.command == "reconstruct":
        ref = {"x0": args.ref_x0, "p0": args.ref_p0, "delta": args.ref_delta,
               "amp_poly": args.ref_amp_poly, "phase_poly": args.ref_phase_poly}
        if any(v is not None for v in ref.values()):
            defaults = {"x0": 0.0, "p0": 0.0, "delta": 1.0, "amp_poly": (), "phase_poly": ()}
            kwargs["reference"] = {k: (defaults[k] if v is None else v) for k, v in ref.items()}
    for key in ("grid", "window", "times", "center", "amp_poly", "phase_poly"):
        if kwargs.get(key) is not None:
            kwargs[key] = tuple(kwargs[key])
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    args = parse_args(argv)
    rc = to_run_config(args)
    try:
        rc = rc.validate()
    except ValueError as exc:
        print(f"pskit {args.command}: error: {exc}", file=sys.stderr)
        return 2
    try:
        metrics = COMMAND_FUNCS[args.command](rc)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"pskit {args.command}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
