"""``pa-sim`` command line: one subcommand per experiment, CSV out."""

from __future__ import annotations

import argparse
import configparser
import sys

from . import __version__
from .config import ConfigError, build_config, read_config_text
from .runner import run_experiment, write_atomic

# subcommand flag -> config key inside the experiment's section
_EXPERIMENT_FLAGS = {
    "speed-table": {"freqs": "comma list of carrier frequencies (Hz)",
                    "delays": "comma list of processing delays (s)"},
    "fig2": {"speeds": "km/h, start:stop:step or comma list",
             "snr_db": "average SNR (dB)",
             "schemes": "comma list of schemes"},
    "bf-cdf": {"n": "comma list of BS antenna counts",
               "schemes": "comma list: mrt,dft,zf,nocsit",
               "mismatch_wl": "comma list of mismatches in wavelengths",
               "prediction": "none | ideal"},
    "train": {"m": "comma list of RAs per wagon",
              "shadowing": "comma list of shadowing presets",
              "block": "comma list of blockage cases, e.g. none,9",
              "speeds": "km/h, start:stop:step or comma list",
              "snr_db": "average SNR (dB)"},
}


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", default=d,
                   help="INI config, or a CSV produced by pa-sim (its header is reused)")
    p.add_argument("--seed", metavar="U64", default=d, help="master seed")
    p.add_argument("--workers", metavar="N", default=d, help="worker processes")
    p.add_argument("--trials", metavar="N", default=d, help="Monte Carlo trials per point")
    p.add_argument("--out", metavar="PATH", default=d, help="output CSV (default: stdout)")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=d,
                   help="override any dotted config key, e.g. fig2.codeword_slots=2")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pa-sim", parents=[_global_flags(False)],
        description="Predictor-antenna link simulations; writes self-describing CSV.",
    )
    parser.add_argument("--version", action="version", version=f"pa-sim {__version__}")
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT", required=True)
    helps = {
        "speed-table": "maximum supported speed per carrier and delay",
        "fig2": "urban E2E throughput versus speed",
        "bf-cdf": "received-power CDF of BS beamformers under mismatch",
        "train": "last-wagon throughput of a satellite-served train",
    }
    for name, flags in _EXPERIMENT_FLAGS.items():
        sp = sub.add_parser(name, parents=[_global_flags(True)], help=helps[name])
        for key, text in flags.items():
            sp.add_argument("--" + key.replace("_", "-"), dest="x_" + key, metavar="VALUE", help=text)
    return parser


def _overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    for key in ("seed", "workers", "trials"):
        if getattr(args, key) is not None:
            out[f"run.{key}"] = getattr(args, key)
    for key in _EXPERIMENT_FLAGS[args.experiment]:
        value = getattr(args, "x_" + key)
        if value is not None:
            out[f"{args.experiment}.{key}"] = value
    return out


def _named_experiment(text: str):
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error:
        return None  # build_config reports the parse error
    return parser.get("run", "experiment", fallback=None)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = read_config_text(args.config) if args.config else None
        named = _named_experiment(text) if text else None
        if named is not None and named != args.experiment:
            raise ConfigError(f"config is for experiment '{named}', not '{args.experiment}'")
        cfg = build_config(text, _overrides(args), experiment=args.experiment)
        csv = run_experiment(cfg)
        if args.out:
            write_atomic(args.out, csv)
        else:
            sys.stdout.write(csv)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"pa-sim: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
