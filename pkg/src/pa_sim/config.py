"""Experiment configuration: dataclasses, parsing, canonical serialization.

Config files are INI text.  ``[run]`` holds the experiment id, seed, trial
count and worker hint; one section per experiment holds its parameters.  The
canonical form of a parameter is its dotted name, e.g. ``fig2.snr_db``, which
is also what ``--set`` accepts on the command line.  The same INI text,
commented out, heads every CSV the runner writes, so any output file can be
fed back as ``--config``.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

EXPERIMENTS = ("speed-table", "fig2", "bf-cdf", "train")


class ConfigError(ValueError):
    pass


# --- value codecs -----------------------------------------------------------


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip())


def _parse_strs(text: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in text.split(",") if t.strip())


def parse_range(text: str) -> tuple[float, ...]:
    """``start:stop:step`` (inclusive stop) or a comma list."""
    text = text.strip()
    if ":" not in text:
        return _parse_floats(text)
    parts = [float(p) for p in text.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise ValueError(f"bad range {text!r}, expected start:stop:step")
    start, stop, step = parts
    n = int(round((stop - start) / step))
    if start + n * step > stop + 1e-9 * max(1.0, abs(stop)):
        n -= 1
    return tuple(round(start + i * step, 10) for i in range(n + 1))


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_spread(text: str):
    t = text.strip().lower()
    return None if t in ("isotropic", "none") else float(t)


def _fmt_spread(v) -> str:
    return "isotropic" if v is None else _fmt_float(v)


def _join(fmt):
    return lambda xs: ",".join(fmt(x) for x in xs)


FLOAT = (float, _fmt_float)
INT = (int, str)
STR = (str.strip, str)
BOOL = (_parse_bool, lambda b: "true" if b else "false")
FLOATS = (_parse_floats, _join(_fmt_float))
INTS = (_parse_ints, _join(str))
STRS = (_parse_strs, _join(str))
RANGE = (parse_range, _join(_fmt_float))
SPREAD = (_parse_spread, _fmt_spread)


def opt(default, codec, doc: str = "", echo: bool = True):
    return field(default=default, metadata={"codec": codec, "doc": doc, "echo": echo})


# --- parameter sets ---------------------------------------------------------


@dataclass(frozen=True)
class RunParams:
    experiment: str = opt("fig2", STR)
    seed: int = opt(1, INT, "master seed (64-bit)")
    trials: int = opt(20000, INT, "Monte Carlo trials per sweep point")
    # a scheduling hint only; left out of CSV headers so output bytes do not
    # depend on it
    workers: int = opt(1, INT, "worker processes", echo=False)


@dataclass(frozen=True)
class SpeedTableParams:
    freqs: tuple = opt((1e9, 2.68e9, 4e9, 6e9), FLOATS)
    delays: tuple = opt((1e-3, 3e-3, 5e-3, 8e-3), FLOATS)
    ref_freq: float = opt(2.68e9, FLOAT)
    ref_delay: float = opt(5e-3, FLOAT)
    speed_of_light: float = opt(2.998e8, FLOAT)


@dataclass(frozen=True)
class Fig2Params:
    speeds: tuple = opt(parse_range("0:300:5"), RANGE, "km/h")
    schemes: tuple = opt(("siso", "simo-mrc", "freq-diversity", "pa-adaptive", "pa-nonadaptive"), STRS)
    snr_db: float = opt(21.0, FLOAT)
    carrier_hz: float = opt(2.68e9, FLOAT)
    antenna_separation_wl: float = opt(1.5, FLOAT)
    min_delay_s: float = opt(5e-3, FLOAT)
    slot_s: float = opt(1e-3, FLOAT)
    symbols_per_slot: int = opt(14, INT)
    codeword_uses: float = opt(1e4, FLOAT)
    codeword_slots: int = opt(1, INT)
    simo_correlated: bool = opt(False, BOOL)
    freq_div_power_split: bool = opt(True, BOOL)
    rate_points: int = opt(2000, INT)
    rate_table_size: int = opt(256, INT)


@dataclass(frozen=True)
class BfCdfParams:
    n: tuple = opt((32, 128), INTS)
    schemes: tuple = opt(("mrt", "dft", "nocsit"), STRS)
    mismatch_wl: tuple = opt((0.0, 0.16, 1.62), FLOATS)
    prediction: str = opt("none", STR, "none | ideal")
    num_paths: int = opt(1000, INT)
    spacing_wl: float = opt(0.5, FLOAT)
    angular_spread_deg: object = opt(None, SPREAD, "isotropic | degrees")


@dataclass(frozen=True)
class TrainParams:
    m: tuple = opt((4, 10), INTS)
    shadowing: tuple = opt(("average", "infrequent-light"), STRS)
    block: tuple = opt(("none", "9"), STRS, "none | wagon[+wagon...] per case")
    speeds: tuple = opt(parse_range("0:500:10"), RANGE, "km/h")
    snr_db: float = opt(26.0, FLOAT)
    carrier_hz: float = opt(2.68e9, FLOAT)
    min_delay_s: float = opt(10e-3, FLOAT)
    num_wagons: int = opt(10, INT)
    target_wagon: int = opt(10, INT)
    span_wl: float = opt(10.0, FLOAT)
    gap_m: float = opt(0.2, FLOAT)
    slot_s: float = opt(1e-3, FLOAT)
    codeword_uses: float = opt(1e4, FLOAT)
    codeword_slots: int = opt(1, INT)
    rate_points: int = opt(2000, INT)
    design_samples: int = opt(100_000, INT)
    presets_file: str = opt("", STR, "INI file of shadowing presets; empty = bundled")


SECTIONS = {
    "run": RunParams,
    "speed-table": SpeedTableParams,
    "fig2": Fig2Params,
    "bf-cdf": BfCdfParams,
    "train": TrainParams,
}


@dataclass(frozen=True)
class ExperimentConfig:
    run: RunParams
    params: object

    @property
    def experiment(self) -> str:
        return self.run.experiment

    def to_ini(self, echo_only: bool = False) -> str:
        lines = []
        for name, obj in (("run", self.run), (self.experiment, self.params)):
            lines.append(f"[{name}]")
            for f in dataclasses.fields(obj):
                if echo_only and not f.metadata["echo"]:
                    continue
                lines.append(f"{f.name} = {f.metadata['codec'][1](getattr(obj, f.name))}")
        return "\n".join(lines) + "\n"


def _build(cls, values: dict[str, str], section: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, text in values.items():
        if key not in known:
            raise ConfigError(f"unknown key '{section}.{key}'")
        try:
            kwargs[key] = known[key].metadata["codec"][0](text)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid value for '{section}.{key}': {text!r} ({exc})") from None
    return cls(**kwargs)


def strip_csv_header(text: str) -> str:
    """Recover the INI block from the commented header of a result CSV."""
    out = []
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        body = line[1:].strip()
        if body.startswith("[") or "=" in body:
            out.append(body)
    return "\n".join(out)


def read_config_text(path: str) -> str:
    with open(path) as fh:
        text = fh.read()
    return strip_csv_header(text) if text.lstrip().startswith("#") else text


def build_config(file_text: str | None = None, overrides: dict[str, str] | None = None,
                 experiment: str | None = None) -> ExperimentConfig:
    """Merge file values and dotted-key overrides into a validated config."""
    values: dict[str, dict[str, str]] = {s: {} for s in SECTIONS}
    if file_text:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        try:
            parser.read_string(file_text)
        except configparser.Error as exc:
            raise ConfigError(f"unreadable config: {exc}") from None
        for sec in parser.sections():
            if sec not in SECTIONS:
                raise ConfigError(f"unknown section '[{sec}]'")
            values[sec].update(parser.items(sec))
    for dotted, text in (overrides or {}).items():
        sec, _, key = dotted.rpartition(".")
        if sec not in SECTIONS or not key:
            raise ConfigError(f"unknown key '{dotted}'")
        values[sec][key] = text
    if experiment is not None:
        values["run"]["experiment"] = experiment
    run = _build(RunParams, values["run"], "run")
    if run.experiment not in EXPERIMENTS:
        raise ConfigError(f"invalid value for 'run.experiment': {run.experiment!r}")
    if run.trials < 1:
        raise ConfigError("invalid value for 'run.trials': must be >= 1")
    if run.workers < 1:
        raise ConfigError("invalid value for 'run.workers': must be >= 1")
    if not 0 <= run.seed < 2**64:
        raise ConfigError("invalid value for 'run.seed': must fit in 64 bits")
    for sec in SECTIONS:
        if sec not in ("run", run.experiment) and values[sec]:
            raise ConfigError(
                f"section '[{sec}]' does not apply to experiment '{run.experiment}'"
            )
    params = _build(SECTIONS[run.experiment], values[run.experiment], run.experiment)
    return ExperimentConfig(run=run, params=params)
