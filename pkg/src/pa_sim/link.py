"""Rate adaptation and end-to-end throughput of the urban PA / non-PA schemes.

Decoding succeeds when the chosen rate does not exceed the instantaneous
Shannon rate; the codeword length only enters the bit accounting.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, stats

from . import channel, kinematics
from .marcum import marcum_q1
from .stats import SummaryStat, derive_stream, ratio_of_means, trial_blocks

# Absolute slack (bits/channel use) in the decoding test, so that a rate chosen
# from the exact channel is never rejected by floating-point rounding.
RATE_TOL = 1e-12
# Upper tail probability used to bound the rate search of analytic gains.
_TAIL = 1e-9


class SchemeKind(enum.Enum):
    SISO_NO_CSIT = "siso"
    SIMO_MRC_NO_CSIT = "simo-mrc"
    FREQ_DIVERSITY_NO_CSIT = "freq-diversity"
    PA_ADAPTIVE = "pa-adaptive"
    PA_NONADAPTIVE = "pa-nonadaptive"


@dataclass(frozen=True)
class RateSearch:
    points: int = 2000
    refine: bool = True

    def __post_init__(self):
        if self.points < 2:
            raise kinematics.InvalidConfigError("rate search grid needs at least 2 points")


@dataclass(frozen=True)
class FramePlan:
    slot_duration_s: float = 1e-3
    symbols_per_slot: int = 14
    codeword_channel_uses: float = 1e4
    # Slots occupied by one codeword; the E2E delay is this transmission time
    # plus the processing delay.
    codeword_slots: int = 1

    @property
    def transmission_delay_s(self) -> float:
        return self.codeword_slots * self.slot_duration_s

    def e2e_delay(self, processing_delay_s: float = 0.0) -> float:
        return self.transmission_delay_s + processing_delay_s


@dataclass(frozen=True)
class SchemeResult:
    delivered_bits: np.ndarray
    e2e_delay_s: np.ndarray
    rate_used: np.ndarray
    success: np.ndarray


@dataclass(frozen=True)
class FixedRate:
    rate: float
    throughput_per_use: float
    success_probability: float


@dataclass(frozen=True)
class UrbanScenario:
    """Parameters of the terrestrial single-antenna BS link."""

    carrier: kinematics.CarrierConfig = field(
        default_factory=lambda: kinematics.CarrierConfig(2.68e9)
    )
    snr_db: float = 21.0
    antenna_separation_wl: float = 1.5
    min_processing_delay_s: float = 5e-3
    frame: FramePlan = field(default_factory=FramePlan)
    search: RateSearch = field(default_factory=RateSearch)
    # SIMO antennas fade independently unless this is set (then Jakes at the
    # antenna separation).
    simo_correlated: bool = False
    # Frequency diversity: total power split over the two resources (True) or
    # duplicated on each (False).
    freq_div_power_split: bool = True
    # Size of the per-speed memo table used for conditional rates.
    rate_table_size: int = 256

    @property
    def snr(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def antenna_separation_m(self) -> float:
        return self.antenna_separation_wl * self.carrier.wavelength_m


def shannon_rate(snr_linear, gain):
    return np.log2(1.0 + np.asarray(snr_linear) * np.asarray(gain))[()]


def _gain_threshold(rate, snr):
    return np.expm1(np.asarray(rate) * np.log(2.0)) / snr


def decodes(rate, snr, gain):
    return np.asarray(rate) <= shannon_rate(snr, gain) + RATE_TOL


# --- outage-optimal fixed rate --------------------------------------------


def _success_fn(gain):
    """Return (P[G >= x] callable, upper gain bound) for a gain description.

    ``gain`` may be a number (deterministic gain), a frozen scipy
    distribution (closed-form tail), or an array of Monte Carlo samples.
    """
    if np.isscalar(gain):
        g = float(gain)
        return (lambda x: (np.asarray(x) <= g * (1 + 1e-12)).astype(float)), g
    if hasattr(gain, "sf"):
        return gain.sf, float(gain.isf(_TAIL))
    s = np.sort(np.asarray(gain, dtype=float).ravel())
    if s.size == 0:
        raise ValueError("empty gain sample")
    n = s.size

    def sf(x):
        return 1.0 - np.searchsorted(s, x * (1 - 1e-12), side="left") / n

    return sf, float(s[-1])


def _maximize_on_grid(objective, r_max: float, search: RateSearch):
    grid = np.linspace(0.0, r_max, search.points)
    vals = objective(grid)
    i = int(np.argmax(vals))
    best_r, best_v = float(grid[i]), float(vals[i])
    if search.refine and r_max > 0:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
        res = optimize.minimize_scalar(
            lambda r: -float(objective(np.array([r]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        if -res.fun > best_v:
            best_r, best_v = float(res.x), float(-res.fun)
    return best_r, best_v


def outage_optimal_fixed_rate(gain, snr: float, search: RateSearch = RateSearch()) -> FixedRate:
    """Rate maximizing R * P[log2(1 + snr G) >= R] for a gain distribution."""
    sf, g_max = _success_fn(gain)
    r_max = float(shannon_rate(snr, g_max))

    def objective(r):
        return r * sf(_gain_threshold(r, snr))

    rate, thr = _maximize_on_grid(objective, r_max, search)
    p = float(sf(_gain_threshold(rate, snr))) if rate > 0 else 1.0
    return FixedRate(rate=rate, throughput_per_use=thr, success_probability=p)


# --- conditional (imperfect CSIT) rate ------------------------------------


def conditional_success(rate, mean_gain, diffuse_var, snr):
    """P[log2(1 + snr |h|^2) >= rate] for h ~ CN(mu, diffuse_var), |mu|^2 = mean_gain."""
    x = _gain_threshold(rate, snr)
    a = np.sqrt(2.0 * np.asarray(mean_gain) / diffuse_var)
    b = np.sqrt(2.0 * np.maximum(x, 0.0) / diffuse_var)
    return marcum_q1(a, b)


def _conditional_gain_bound(mean_gain, diffuse_var):
    return (np.sqrt(mean_gain) + np.sqrt(-diffuse_var * np.log(_TAIL))) ** 2


def optimal_conditional_rates(mean_gain, diffuse_var: float, snr: float, search: RateSearch = RateSearch()):
    """Vectorized argmax_R R * P[success | mean_gain] over an array of mean gains.

    Grid search on ``search.points`` points followed by golden-section
    refinement inside the bracketing grid cell, run in lockstep for all gains.
    """
    mu = np.atleast_1d(np.asarray(mean_gain, dtype=float))
    r_max = shannon_rate(snr, _conditional_gain_bound(mu, diffuse_var))
    t = np.linspace(0.0, 1.0, search.points)
    grid = r_max[:, None] * t[None, :]
    vals = grid * conditional_success(grid, mu[:, None], diffuse_var, snr)
    i = np.argmax(vals, axis=1)
    rows = np.arange(mu.size)
    best_r, best_v = grid[rows, i], vals[rows, i]
    if search.refine:
        lo = grid[rows, np.maximum(i - 1, 0)]
        hi = grid[rows, np.minimum(i + 1, t.size - 1)]

        def f(r):
            return r * conditional_success(r, mu, diffuse_var, snr)

        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        c = hi - invphi * (hi - lo)
        d = lo + invphi * (hi - lo)
        fc, fd = f(c), f(d)
        for _ in range(60):
            left = fc > fd
            hi = np.where(left, d, hi)
            lo = np.where(left, lo, c)
            new = np.where(left, hi - invphi * (hi - lo), lo + invphi * (hi - lo))
            fnew = f(new)
            c, d, fc, fd = (
                np.where(left, new, d),
                np.where(left, c, new),
                np.where(left, fnew, fd),
                np.where(left, fc, fnew),
            )
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        better = fmid > best_v
        best_r = np.where(better, mid, best_r)
    return best_r


def conditional_rate(h_pa_gain: float, rho: float, snr: float, search: RateSearch = RateSearch(),
                     mean_power: float = 1.0) -> float:
    """Throughput-optimal rate for the RA given the PA channel gain |h_pa|^2."""
    if not abs(rho) <= 1.0:
        raise channel.ChannelDomainError(f"|rho| must be <= 1, got {rho}")
    if abs(rho) == 1.0:
        return float(shannon_rate(snr, h_pa_gain))
    diffuse = (1.0 - rho * rho) * mean_power
    return float(optimal_conditional_rates(rho * rho * h_pa_gain, diffuse, snr, search)[0])


# Mean-gain span covered by the memo table; trials outside it are optimized
# individually.
_TABLE_RANGE = (1e-9, 50.0)


@functools.lru_cache(maxsize=256)
def _rate_table(diffuse_var: float, snr: float, search: RateSearch, size: int):
    knots = np.geomspace(*_TABLE_RANGE, size)
    return np.log(knots), optimal_conditional_rates(knots, diffuse_var, snr, search)


def memo_conditional_rates(mean_gain, diffuse_var: float, snr: float, search: RateSearch,
                           table_size: int = 256):
    """Conditional rates for many trials from a cached table over log mean gain.

    The optimal rate is smooth and increasing in the mean gain; exact
    optimizations at ``table_size`` log-spaced knots plus linear
    interpolation replace one search per trial.
    """
    mu = np.asarray(mean_gain, dtype=float)
    log_knots, rates = _rate_table(float(diffuse_var), float(snr), search, table_size)
    lo, hi = _TABLE_RANGE
    inside = (mu >= lo) & (mu <= hi)
    out = np.empty_like(mu)
    out[inside] = np.interp(np.log(mu[inside]), log_knots, rates)
    if (~inside).any():
        out[~inside] = optimal_conditional_rates(mu[~inside], diffuse_var, snr, search)
    return out


# --- scheme simulation ----------------------------------------------------


@functools.lru_cache(maxsize=64)
def _no_csit_rate(kind: SchemeKind, scenario: UrbanScenario, design_seed: int) -> FixedRate:
    snr = scenario.snr
    if kind is SchemeKind.SISO_NO_CSIT:
        return outage_optimal_fixed_rate(stats.expon(), snr, scenario.search)
    if kind is SchemeKind.SIMO_MRC_NO_CSIT:
        if not scenario.simo_correlated:
            return outage_optimal_fixed_rate(stats.gamma(2.0), snr, scenario.search)
        rho = float(channel.jakes_correlation(scenario.antenna_separation_wl, 1.0))
        rng = derive_stream(design_seed, 0, 0xD351)
        pair = channel.draw_pair_rayleigh(channel.JakesParams(), rho, rng, 100_000)
        samples = np.abs(pair.h_pa) ** 2 + np.abs(pair.h_ra) ** 2
        return outage_optimal_fixed_rate(samples, snr, scenario.search)
    if kind is SchemeKind.FREQ_DIVERSITY_NO_CSIT:
        return outage_optimal_fixed_rate(stats.gamma(2.0), _freq_div_snr(scenario), scenario.search)
    raise ValueError(f"{kind} has CSIT")


def _freq_div_snr(scenario: UrbanScenario) -> float:
    return scenario.snr / 2.0 if scenario.freq_div_power_split else scenario.snr


def _pa_link(kind: SchemeKind, speed_m_s: float, scenario: UrbanScenario):
    """(rho, processing delay) seen by a PA scheme at this speed."""
    mob = kinematics.MobilityConfig(
        speed_m_s=speed_m_s,
        antenna_separation_m=scenario.antenna_separation_m,
        processing_delay_s=scenario.min_processing_delay_s,
        min_processing_delay_s=scenario.min_processing_delay_s,
    )
    if kind is SchemeKind.PA_ADAPTIVE:
        ad = kinematics.adaptive_delay(mob)
        if ad.feasible:
            return 1.0, ad.delay_s
    d = kinematics.mismatch_distance(mob)
    rho = float(channel.jakes_correlation(d, scenario.carrier.wavelength_m))
    return rho, scenario.min_processing_delay_s


def scheme_block(kind: SchemeKind, speed_m_s: float, scenario: UrbanScenario,
                 rng: np.random.Generator, n: int, design_seed: int = 0) -> SchemeResult:
    """Simulate ``n`` independent codewords of one scheme from one stream.

    Every scheme draws the same (h_pa, h_ra) pair layout from the stream, so
    schemes evaluated on identical streams share their fading realisations.
    """
    snr = scenario.snr
    n_cw = scenario.frame.codeword_channel_uses
    jp = channel.JakesParams()

    if kind in (SchemeKind.PA_ADAPTIVE, SchemeKind.PA_NONADAPTIVE):
        rho, proc = _pa_link(kind, speed_m_s, scenario)
        pair = channel.draw_pair_rayleigh(jp, rho, rng, n)
        g_pa, g_ra = np.abs(pair.h_pa) ** 2, np.abs(pair.h_ra) ** 2
        if abs(rho) == 1.0:
            rate = shannon_rate(snr, g_pa)
        else:
            rate = memo_conditional_rates(rho * rho * g_pa, 1.0 - rho * rho, snr,
                                          scenario.search, scenario.rate_table_size)
        ok = decodes(rate, snr, g_ra)
        bits = np.where(ok, rate * n_cw, 0.0)
        delay = np.full(n, scenario.frame.e2e_delay(proc))
        return SchemeResult(bits, delay, rate, ok)

    fixed = _no_csit_rate(kind, scenario, design_seed)
    rate = np.full(n, fixed.rate)
    delay = np.full(n, scenario.frame.e2e_delay(0.0))
    if kind is SchemeKind.SISO_NO_CSIT:
        pair = channel.draw_pair_rayleigh(jp, 0.0, rng, n)
        ok = decodes(rate, snr, np.abs(pair.h_pa) ** 2)
        bits = np.where(ok, rate * n_cw, 0.0)
    elif kind is SchemeKind.SIMO_MRC_NO_CSIT:
        rho = (float(channel.jakes_correlation(scenario.antenna_separation_wl, 1.0))
               if scenario.simo_correlated else 0.0)
        pair = channel.draw_pair_rayleigh(jp, rho, rng, n)
        ok = decodes(rate, snr, np.abs(pair.h_pa) ** 2 + np.abs(pair.h_ra) ** 2)
        bits = np.where(ok, rate * n_cw, 0.0)
    elif kind is SchemeKind.FREQ_DIVERSITY_NO_CSIT:
        pair = channel.draw_pair_rayleigh(jp, 0.0, rng, n)
        g = np.abs(pair.h_pa) ** 2 + np.abs(pair.h_ra) ** 2
        ok = decodes(rate, _freq_div_snr(scenario), g)
        # one codeword occupies both spectrum resources
        bits = np.where(ok, rate * n_cw / 2.0, 0.0)
    else:  # pragma: no cover
        raise ValueError(kind)
    return SchemeResult(bits, delay, rate, ok)


def simulate_scheme(kind: SchemeKind, speed_m_s: float, scenario: UrbanScenario,
                    trials: int, seed: int) -> SummaryStat:
    """E2E throughput (bits/s) as total delivered bits over total E2E delay."""
    bits, delay = [], []
    for b, n in trial_blocks(trials):
        res = scheme_block(kind, speed_m_s, scenario, derive_stream(seed, b), n, seed)
        bits.append(res.delivered_bits)
        delay.append(res.e2e_delay_s)
    return ratio_of_means(np.concatenate(bits), np.concatenate(delay))


def genie_throughput(scenario: UrbanScenario, trials: int, seed: int) -> SummaryStat:
    """Perfect CSIT at zero processing delay, on the same fading stream."""
    bits, delay = [], []
    n_cw = scenario.frame.codeword_channel_uses
    for b, n in trial_blocks(trials):
        pair = channel.draw_pair_rayleigh(channel.JakesParams(), 1.0, derive_stream(seed, b), n)
        bits.append(shannon_rate(scenario.snr, np.abs(pair.h_pa) ** 2) * n_cw)
        delay.append(np.full(n, scenario.frame.e2e_delay(0.0)))
    return ratio_of_means(np.concatenate(bits), np.concatenate(delay))
