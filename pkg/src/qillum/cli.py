"""Command-line front end.

Subcommands: ``nrf``, ``epsilon``, ``snr``, ``perr`` (sweeps writing CSV +
JSON manifest) and ``validate`` (invariant battery).  Flags override
values from ``--config``; both override the built-in defaults.

Exit codes: 0 success, 1 invalid input, 2 validation failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from ._version import __version__
from .errors import QillumError
from .harness import SWEEPS, SweepSpec
from .validate import DEFAULT_SEED, run_validate


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 for bad command lines."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_sweep_arguments(parser: argparse.ArgumentParser) -> None:
    # Defaults stay None so that only user-set flags override the config.
    parser.add_argument("--config", metavar="FILE",
                        help="JSON file with SweepSpec fields")
    parser.add_argument("--source", choices=("twb", "thermal", "both"))
    parser.add_argument("--mu", type=float, help="mean photons per mode")
    parser.add_argument("--modes", type=int, help="modes per pixel")
    parser.add_argument("--eta1", type=float, help="ancilla-arm efficiency")
    parser.add_argument("--eta2", type=float,
                        help="probe-arm efficiency incl. target reflectivity")
    parser.add_argument("--nb-min", type=float, dest="nb_min")
    parser.add_argument("--nb-max", type=float, dest="nb_max")
    parser.add_argument("--nb-points", type=int, dest="nb_points")
    parser.add_argument("--mb", type=int, help="background mode count")
    parser.add_argument("--npix", type=int, help="pixel pairs per frame")
    parser.add_argument("--nimg", type=int, help="images per decision")
    parser.add_argument("--frames", type=int, help="frames per grid point")
    parser.add_argument("--trials", type=int, help="decision trials per point")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument("--out", help="output CSV path (stdout if omitted)")
    parser.add_argument("--threads", type=int, help="worker threads")


def build_parser() -> _Parser:
    parser = _Parser(prog="qillum",
                     description="Photon-counting quantum illumination "
                                 "simulator")
    parser.add_argument("--version", action="version",
                        version=f"qillum {__version__}")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    for name, blurb in (("nrf", "noise reduction factor vs background"),
                        ("epsilon", "Cauchy-Schwarz parameter vs background"),
                        ("snr", "covariance-contrast SNR vs background"),
                        ("perr", "error probability vs background")):
        p = sub.add_parser(name, help=blurb)
        _add_sweep_arguments(p)
    v = sub.add_parser("validate", help="run the cross-validation battery")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--quick", action="store_true",
                   help="skip the Monte Carlo cross-checks")
    return parser


def _spec_from_args(args: argparse.Namespace) -> SweepSpec:
    mapping: dict = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise QillumError(f"config {args.config} must hold a JSON object")
        mapping.update(config)
    for name in SweepSpec.__dataclass_fields__:
        value = getattr(args, name, None)
        if value is not None:
            mapping[name] = value
    return SweepSpec.from_mapping(mapping)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            report = run_validate(seed=args.seed, deep=not args.quick)
            for line in report.lines():
                print(line)
            return 0 if report.ok else 2
        spec = _spec_from_args(args)
        result = SWEEPS[args.command](spec)
        if spec.out:
            result.write(spec.out)
            print(f"wrote {spec.out} and {spec.out}.manifest.json "
                  f"({len(result.rows)} rows, {result.wall_time_s:.1f} s)")
        else:
            sys.stdout.write(result.to_csv_text())
        return 0
    except (QillumError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
