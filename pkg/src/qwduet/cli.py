"""Command-line entry point ``qwduet``.

    qwduet simulate  --steps T --tau LIST [--observables LIST] --out PATH --format csv|json
    qwduet momentum  --steps T --tau LIST [--quadrature N] [--cutoff X] [--transfer-report PATH]
    qwduet classical --steps T --swap-prob LIST

Any command also takes ``--config FILE``: one ``key = value`` per line,
``#`` starts a comment, list values are comma separated.  Keys mirror the
long flag names with dashes or underscores (``steps``, ``tau``,
``observables``, ``out``, ``format``, ``quadrature``, ``cutoff``, ``jobs``,
``backend``, ``swap-prob``, ``transfer-report``, ``samples``).  Flags given
on the command line win over the file.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .correlations import NumericalError
from .experiment import (
    ASYMPTOTICS_COLUMNS,
    CLASSICAL_COLUMNS,
    DEFAULT_OBSERVABLES,
    MOMENTUM_COLUMNS,
    OBSERVABLES,
    ConfigError,
    ExperimentConfig,
    asymptotics_row,
    classical_rows,
    dumps_json,
    momentum_rows,
    run_experiment,
    write_result,
    write_table,
    _side_path,
    _write_text,
)
from .kernels import available_backends
from .lattice import StepBudgetExceeded
from .momentum import DEFAULT_CUTOFF, compare_transfer_matrices, minimum_grid


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"qwduet: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in str(text).replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("list must not be empty")
    return values


def _observable_list(text: str) -> list[str]:
    names = [v.strip() for v in str(text).split(",") if v.strip()]
    unknown = [n for n in names if n not in OBSERVABLES]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown observable(s) {', '.join(unknown)}; choose from {', '.join(OBSERVABLES)}"
        )
    return names


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


_CONFIG_TYPES = {
    "steps": _positive_int,
    "tau": _float_list,
    "swap_prob": _float_list,
    "observables": _observable_list,
    "out": str,
    "format": str,
    "quadrature": _positive_int,
    "cutoff": float,
    "jobs": _positive_int,
    "backend": str,
    "transfer_report": str,
    "samples": _positive_int,
}


def read_config(path: str | Path) -> dict:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _CONFIG_TYPES:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value' with a known key, got {raw.strip()!r}")
        try:
            values[key] = _CONFIG_TYPES[key](value.strip())
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def _merged(args: argparse.Namespace) -> dict:
    merged = read_config(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in _CONFIG_TYPES and value is not None:
            merged[key] = value
    return merged


def _require(opts: dict, key: str):
    if key not in opts:
        raise ConfigError(f"missing required setting --{key.replace('_', '-')}")
    return opts[key]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value settings file; flags take precedence")
    p.add_argument("--steps", type=_positive_int, help="maximum number of steps t")
    p.add_argument("--out", help="output path ('-' for stdout, the default)")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwduet", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"qwduet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="position-space sweep over (t, tau)")
    _common(sim)
    sim.add_argument("--tau", type=_float_list, help="comma-separated SWAP powers in [0, 1]")
    sim.add_argument(
        "--observables",
        type=_observable_list,
        help=f"comma-separated subset of {','.join(OBSERVABLES)} (default {','.join(DEFAULT_OBSERVABLES)})",
    )
    sim.add_argument("--quadrature", type=_positive_int, help="momentum grid size per axis")
    sim.add_argument("--cutoff", type=float, help=f"eigenfilter cutoff (default {DEFAULT_CUTOFF!r})")
    sim.add_argument("--jobs", type=_positive_int, help="worker processes across the tau grid")
    sim.add_argument("--backend", choices=available_backends(), help="step kernel")

    mom = sub.add_parser("momentum", help="momentum-space moments and long-time asymptotics")
    _common(mom)
    mom.add_argument("--tau", type=_float_list, help="comma-separated SWAP powers in [0, 1]")
    mom.add_argument("--quadrature", type=_positive_int, help="momentum grid size per axis")
    mom.add_argument("--cutoff", type=float, help=f"eigenfilter cutoff (default {DEFAULT_CUTOFF!r})")
    mom.add_argument("--transfer-report", help="also write the tabulated-vs-constructed transfer matrix report (JSON)")
    mom.add_argument("--samples", type=_positive_int, help="random (k, j, tau) samples for the report (default 100)")

    cls = sub.add_parser("classical", help="classical random-walk baseline")
    _common(cls)
    cls.add_argument("--swap-prob", type=_float_list, help="comma-separated coin-swap probabilities")
    return parser


def _simulate(opts: dict):
    cfg = ExperimentConfig(
        steps=_require(opts, "steps"),
        tau_grid=tuple(_require(opts, "tau")),
        observables=tuple(opts.get("observables", DEFAULT_OBSERVABLES)),
        out=opts.get("out", "-"),
        format=opts.get("format", "csv"),
        quadrature=opts.get("quadrature"),
        cutoff=opts.get("cutoff", DEFAULT_CUTOFF),
        jobs=opts.get("jobs", 1),
        backend=opts.get("backend"),
    )
    write_result(run_experiment(cfg))


def _momentum(opts: dict):
    steps = _require(opts, "steps")
    taus = ExperimentConfig(steps=steps, tau_grid=tuple(_require(opts, "tau"))).tau_grid
    quad = opts.get("quadrature")
    if quad is not None and quad < minimum_grid(steps):
        raise ConfigError(f"quadrature {quad} too small for steps={steps}; need at least {minimum_grid(steps)}")
    cutoff = opts.get("cutoff", DEFAULT_CUTOFF)
    if not 0.0 < cutoff < 1.0:
        raise ConfigError(f"cutoff must lie in (0, 1), got {cutoff!r}")
    fmt, out = opts.get("format", "csv"), opts.get("out", "-")

    rows = [row for tau in taus for row in momentum_rows(tau, steps, quad)]
    rows.sort(key=lambda r: (r["t"], taus.index(r["tau"])))
    asym = [asymptotics_row(tau, quad, cutoff) for tau in taus]
    meta = {"artifact": "qwduet", "command": "momentum", "config": {
        "steps": steps, "tau_grid": list(taus), "quadrature": quad, "cutoff": cutoff}}
    if fmt == "csv":
        side = _side_path(out, "asymptotics")
        write_table(out, fmt, MOMENTUM_COLUMNS, rows, meta)
        write_table(side, fmt, ASYMPTOTICS_COLUMNS, asym, meta)
    else:
        write_table(out, fmt, MOMENTUM_COLUMNS, rows, meta, extra={"asymptotics": asym})

    if opts.get("transfer_report"):
        report = compare_transfer_matrices(samples=opts.get("samples", 100))
        _write_text(opts["transfer_report"], dumps_json(report.to_dict()))
        print(f"qwduet: {report.summary()}", file=sys.stderr)


def _classical(opts: dict):
    steps = _require(opts, "steps")
    probs = _require(opts, "swap_prob")
    for p in probs:
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"swap probability must lie in [0, 1], got {p!r}")
    fmt = opts.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    meta = {"artifact": "qwduet", "command": "classical", "config": {"steps": steps, "swap_prob": list(probs)}}
    write_table(opts.get("out", "-"), fmt, CLASSICAL_COLUMNS, classical_rows(steps, probs), meta)


_COMMANDS = {"simulate": _simulate, "momentum": _momentum, "classical": _classical}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _merged(args)
        _COMMANDS[args.command](opts)
    except (ConfigError, ValueError, StepBudgetExceeded) as exc:
        print(f"qwduet: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, NumericalError) as exc:
        print(f"qwduet: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
