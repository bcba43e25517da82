"""Experiment dispatch: sweep points, worker pool, CSV emission.

Each experiment is split into independent sweep points.  A point's result
depends only on the config and the master seed, never on which worker ran it
or in which order, so the CSV is byte-identical for any worker count.
"""

from __future__ import annotations

import io
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import __version__, beamforming, channel, kinematics, link, train
from .config import ConfigError, ExperimentConfig
from .stats import CDF_PERCENTS, empirical_cdf

COLUMNS = {
    "speed-table": ("freq_hz", "delay_s", "predictor", "v_max_kmh"),
    "fig2": ("scheme", "speed_kmh", "throughput_bps", "ci95_low", "ci95_high"),
    "bf-cdf": ("scheme", "n", "mismatch_wl", "quantile", "power_db"),
    "train": ("m", "shadowing", "blocked", "speed_kmh", "scheme", "throughput_bps", "ci95"),
}


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.6g}"


# --- speed-table -------------------------------------------------------------


def _speed_table_rows(cfg: ExperimentConfig):
    p = cfg.params
    return kinematics.speed_table(p.freqs, p.delays, p.ref_freq, p.ref_delay, p.speed_of_light)


# --- fig2 --------------------------------------------------------------------


def urban_scenario(p) -> link.UrbanScenario:
    return link.UrbanScenario(
        carrier=kinematics.CarrierConfig(p.carrier_hz),
        snr_db=p.snr_db,
        antenna_separation_wl=p.antenna_separation_wl,
        min_processing_delay_s=p.min_delay_s,
        frame=link.FramePlan(p.slot_s, p.symbols_per_slot, p.codeword_uses, p.codeword_slots),
        search=link.RateSearch(p.rate_points),
        simo_correlated=p.simo_correlated,
        freq_div_power_split=p.freq_div_power_split,
        rate_table_size=p.rate_table_size,
    )


def _fig2_point(cfg: ExperimentConfig, speed_kmh: float):
    scenario = urban_scenario(cfg.params)
    v = kinematics.km_h_to_m_s(speed_kmh)
    rows = []
    for name in cfg.params.schemes:
        s = link.simulate_scheme(link.SchemeKind(name), v, scenario, cfg.run.trials, cfg.run.seed)
        rows.append((name, speed_kmh, s.mean, s.low, s.high))
    return rows


# --- bf-cdf ------------------------------------------------------------------


def _bf_point(cfg: ExperimentConfig, n: int):
    p = cfg.params
    field = channel.MultipathFieldParams(n, p.num_paths, p.spacing_wl, p.angular_spread_deg)
    samples = beamforming.power_samples(
        n, p.schemes, p.mismatch_wl, cfg.run.trials, cfg.run.seed, field, p.prediction
    )
    rows = []
    for name in p.schemes:
        kind = beamforming.BeamformerKind(name)
        for m in p.mismatch_wl:
            cdf = empirical_cdf(samples[(kind, float(m))], CDF_PERCENTS)
            with np.errstate(divide="ignore"):
                rows.extend((name, n, m, q, 10.0 * np.log10(v)) for q, v in cdf.items())
    return rows


# --- train -------------------------------------------------------------------


def parse_block(text: str) -> tuple[int, ...]:
    t = text.strip().lower()
    return () if t in ("none", "") else tuple(int(w) for w in t.split("+"))


def rural_scenario(p) -> train.RuralScenario:
    return train.RuralScenario(
        carrier=kinematics.CarrierConfig(p.carrier_hz),
        snr_db=p.snr_db,
        min_processing_delay_s=p.min_delay_s,
        target_wagon=p.target_wagon,
        frame=link.FramePlan(p.slot_s, 14, p.codeword_uses, p.codeword_slots),
        search=link.RateSearch(p.rate_points),
        rate_design_samples=p.design_samples,
    )


def _presets(p):
    return channel.load_shadowing_presets(p.presets_file or None)


def _train_cases(p):
    return [(m, sh, blk, v) for m in p.m for sh in p.shadowing for blk in p.block for v in p.speeds]


def _train_point(cfg: ExperimentConfig, case):
    p = cfg.params
    m, sh, blk, v_kmh = case
    scenario = rural_scenario(p)
    layout = train.build_layout(m, scenario.carrier, parse_block(blk), p.num_wagons, p.span_wl, p.gap_m)
    preset = _presets(p)[sh]
    v = kinematics.km_h_to_m_s(v_kmh)
    rows = []
    for scheme in ("pa-best", "simo-mrc"):
        s = train.simulate_train(layout, v, preset, scenario, cfg.run.trials, cfg.run.seed, scheme)
        rows.append((m, sh, blk, v_kmh, scheme, s.mean, s.half_width))
    return rows


def _validate_train(p):
    presets = _presets(p)
    for sh in p.shadowing:
        if sh not in presets:
            raise ConfigError(f"invalid value for 'train.shadowing': unknown preset {sh!r}")
    for blk in p.block:
        try:
            blocked = parse_block(blk)
        except ValueError:
            raise ConfigError(f"invalid value for 'train.block': {blk!r}") from None
        if any(not 1 <= w <= p.num_wagons for w in blocked):
            raise ConfigError(f"invalid value for 'train.block': wagon out of range in {blk!r}")
    for m in p.m:
        if m < 1:
            raise ConfigError("invalid value for 'train.m': M must be >= 1")
    if not 1 <= p.target_wagon <= p.num_wagons:
        raise ConfigError("invalid value for 'train.target_wagon'")
    if any(v < 0 for v in p.speeds):
        raise ConfigError("invalid value for 'train.speeds': negative speed")


def _validate(cfg: ExperimentConfig):
    p = cfg.params
    if cfg.experiment == "fig2":
        for s in p.schemes:
            if s not in {k.value for k in link.SchemeKind}:
                raise ConfigError(f"invalid value for 'fig2.schemes': unknown scheme {s!r}")
        if not p.speeds:
            raise ConfigError("invalid value for 'fig2.speeds': empty grid")
        if any(v < 0 for v in p.speeds):
            raise ConfigError("invalid value for 'fig2.speeds': negative speed")
        urban_scenario(p)
    elif cfg.experiment == "bf-cdf":
        for s in p.schemes:
            if s not in {k.value for k in beamforming.BeamformerKind}:
                raise ConfigError(f"invalid value for 'bf-cdf.schemes': unknown scheme {s!r}")
        if p.prediction not in ("none", "ideal"):
            raise ConfigError(f"invalid value for 'bf-cdf.prediction': {p.prediction!r}")
        if any(n < 1 for n in p.n):
            raise ConfigError("invalid value for 'bf-cdf.n': N must be >= 1")
        if "zf" in p.schemes and any(n < 2 for n in p.n):
            raise ConfigError("invalid value for 'bf-cdf.n': zf needs N >= 2")
    elif cfg.experiment == "train":
        _validate_train(p)
    elif cfg.experiment == "speed-table":
        if any(f <= 0 for f in p.freqs) or any(d <= 0 for d in p.delays):
            raise ConfigError("invalid value for 'speed-table.freqs/delays': must be positive")


def _plan(cfg: ExperimentConfig):
    """(point function, list of sweep points) for the configured experiment."""
    p = cfg.params
    if cfg.experiment == "fig2":
        return partial(_fig2_point, cfg), list(p.speeds)
    if cfg.experiment == "bf-cdf":
        return partial(_bf_point, cfg), list(p.n)
    if cfg.experiment == "train":
        return partial(_train_point, cfg), _train_cases(p)
    raise ValueError(cfg.experiment)


def _notes(cfg: ExperimentConfig) -> list[str]:
    notes = []
    if cfg.experiment == "train":
        presets = _presets(cfg.params)
        for name in cfg.params.shadowing:
            sr = presets[name]
            notes.append(f"shadowing {name}: b0 {sr.b0!r}, m {sr.m!r}, omega {sr.omega!r}")
        notes.append("ci95 is the half-width of the normal-approximation interval")
    elif cfg.experiment == "bf-cdf":
        notes.append("power_db is 10log10 of |w^H h|^2 with unit transmit power "
                     "and unit average per-antenna gain")
    elif cfg.experiment == "fig2":
        notes.append("throughput is delivered bits over slot plus processing delay")
    return notes


def header(cfg: ExperimentConfig) -> str:
    lines = [f"pa-sim version {__version__}"]
    lines += cfg.to_ini(echo_only=True).splitlines()
    lines += [f"note: {n}" for n in _notes(cfg)]
    return "".join(f"# {line}\n" for line in lines)


def compute_rows(cfg: ExperimentConfig) -> list[tuple]:
    _validate(cfg)
    if cfg.experiment == "speed-table":
        return _speed_table_rows(cfg)
    fn, points = _plan(cfg)
    if cfg.run.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.run.workers, len(points))) as pool:
            chunks = list(pool.map(fn, points))
    else:
        chunks = [fn(pt) for pt in points]
    return [row for chunk in chunks for row in chunk]


def run_experiment(cfg: ExperimentConfig) -> str:
    """Run the experiment and return the whole CSV document."""
    rows = compute_rows(cfg)
    buf = io.StringIO()
    buf.write(header(cfg))
    buf.write(",".join(COLUMNS[cfg.experiment]) + "\n")
    for row in rows:
        buf.write(",".join(fmt(x) for x in row) + "\n")
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file so a failed run never leaves a partial CSV."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pa-sim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Split a runner CSV into its column names and rows (header comments dropped)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    cols = lines[0].split(",")
    return cols, [ln.split(",") for ln in lines[1:]]
