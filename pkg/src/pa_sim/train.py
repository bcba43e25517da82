"""Multi-wagon train on a satellite backhaul: layout, PA-RA pairing, throughput.

Positions are along-track coordinates in metres measured backwards from the
head of the train, so an antenna with a larger coordinate is further behind
and reaches a given point later.  Wagons are numbered 1..num_wagons from the
front.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import channel, kinematics, link
from .stats import SummaryStat, derive_stream, ratio_of_means, trial_blocks


class NoPairError(RuntimeError):
    """Every candidate PA is blocked."""


@dataclass(frozen=True)
class TrainLayout:
    num_wagons: int
    ras_per_wagon: int
    wagon_span_m: float
    inter_wagon_gap_m: float
    blocked_wagons: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.ras_per_wagon < 1 or self.num_wagons < 1:
            raise kinematics.InvalidConfigError("need at least one wagon and one RA per wagon")
        if not (self.wagon_span_m > 0 and self.inter_wagon_gap_m > 0):
            raise kinematics.InvalidConfigError("wagon span and gap must be positive")
        bad = [w for w in self.blocked_wagons if not 1 <= w <= self.num_wagons]
        if bad:
            raise kinematics.InvalidConfigError(f"blocked wagon indices out of range: {bad}")

    @property
    def wagon_pitch_m(self) -> float:
        return self.wagon_span_m + self.inter_wagon_gap_m

    @property
    def ra_offsets_m(self) -> np.ndarray:
        """RA offsets behind the wagon's own PA, RA m at m * span / M."""
        m = np.arange(1, self.ras_per_wagon + 1)
        return m * self.wagon_span_m / self.ras_per_wagon

    def pa_position(self, wagon: int) -> float:
        return (wagon - 1) * self.wagon_pitch_m

    def ra_position(self, wagon: int, ra_index: int) -> float:
        return self.pa_position(wagon) + self.ra_offsets_m[ra_index - 1]


def build_layout(
    ras_per_wagon: int,
    carrier: kinematics.CarrierConfig,
    blocked=(),
    num_wagons: int = 10,
    span_wavelengths: float = 10.0,
    gap_m: float = 0.2,
) -> TrainLayout:
    if ras_per_wagon < 1:
        raise kinematics.InvalidConfigError("ras_per_wagon must be >= 1")
    return TrainLayout(
        num_wagons=num_wagons,
        ras_per_wagon=ras_per_wagon,
        wagon_span_m=span_wavelengths * carrier.wavelength_m,
        inter_wagon_gap_m=gap_m,
        blocked_wagons=frozenset(int(w) for w in blocked),
    )


@dataclass(frozen=True)
class PairCandidate:
    pa_wagon: int
    ra_index: int
    distance_m: float


@dataclass(frozen=True)
class PairingDecision:
    pa_wagon: int
    pa_index: int
    ra_index: int
    pair_distance_m: float
    delay_s: float
    rho_effective: float
    feasible: bool


def enumerate_pairs(layout: TrainLayout, target_wagon: int) -> list[PairCandidate]:
    """Unblocked PAs at or ahead of the target wagon paired with each of its RAs."""
    if not 1 <= target_wagon <= layout.num_wagons:
        raise ValueError(f"target_wagon must be in [1, {layout.num_wagons}]")
    pairs = []
    for w in range(1, target_wagon + 1):
        if w in layout.blocked_wagons:
            continue
        for m in range(1, layout.ras_per_wagon + 1):
            d = layout.ra_position(target_wagon, m) - layout.pa_position(w)
            pairs.append(PairCandidate(w, m, d))
    return pairs


def best_combination(
    layout: TrainLayout,
    target_wagon: int,
    speed_m_s: float,
    min_delay_s: float,
    carrier: kinematics.CarrierConfig,
) -> PairingDecision:
    """Pick the PA-RA pair for the target wagon.

    Pairs the train can traverse within at least the minimum processing delay
    give zero mismatch; among them the shortest delay wins.  If no pair is
    traversable, the delay is pinned to the minimum and the pair with the
    largest |Jakes correlation| at the resulting mismatch is used.  Remaining
    ties go to the lowest (pa_wagon, ra_index).
    """
    if speed_m_s < 0:
        raise ValueError("speed must be non-negative")
    pairs = enumerate_pairs(layout, target_wagon)
    if not pairs:
        raise NoPairError(f"no unblocked PA can serve wagon {target_wagon}")
    dist = np.array([p.distance_m for p in pairs])
    lam = carrier.wavelength_m

    if speed_m_s == 0.0:
        # stationary: every pair is reachable only after an infinite wait
        i = int(np.argmin(dist))
        return _decision(pairs[i], math.inf, 1.0, True)

    feasible = np.array([kinematics.traversal_feasible(d, speed_m_s, min_delay_s) for d in dist])
    if feasible.any():
        with np.errstate(over="ignore"):  # creeping speeds
            delays = np.where(feasible, np.maximum(dist / speed_m_s, min_delay_s), np.inf)
        i = int(np.argmin(delays))  # first minimum == lowest (wagon, ra) order
        return _decision(pairs[i], float(delays[i]), 1.0, True)

    mismatch = np.abs(dist - speed_m_s * min_delay_s)
    rho = channel.jakes_correlation(mismatch, lam)
    i = int(np.argmax(np.abs(rho)))
    return _decision(pairs[i], min_delay_s, float(rho[i]), False)


def _decision(p: PairCandidate, delay: float, rho: float, feasible: bool) -> PairingDecision:
    return PairingDecision(
        pa_wagon=p.pa_wagon,
        pa_index=p.pa_wagon,
        ra_index=p.ra_index,
        pair_distance_m=p.distance_m,
        delay_s=delay,
        rho_effective=rho,
        feasible=feasible,
    )


@dataclass(frozen=True)
class RuralScenario:
    carrier: kinematics.CarrierConfig = field(
        default_factory=lambda: kinematics.CarrierConfig(2.68e9)
    )
    snr_db: float = 26.0
    min_processing_delay_s: float = 10e-3
    target_wagon: int = 10
    frame: link.FramePlan = field(default_factory=link.FramePlan)
    search: link.RateSearch = field(default_factory=link.RateSearch)
    rate_design_samples: int = 100_000

    @property
    def snr(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


def _pa_block(decision, shadowing, scenario, rng, n, target_blocked):
    snr = scenario.snr
    n_cw = scenario.frame.codeword_channel_uses
    pair = channel.draw_pair_shadowed_rice(shadowing, decision.rho_effective, rng, n)
    g_pa, g_ra = np.abs(pair.h_pa) ** 2, np.abs(pair.h_ra) ** 2
    delay = np.full(n, scenario.frame.e2e_delay(decision.delay_s))
    if target_blocked:
        return np.zeros(n), delay
    rho = decision.rho_effective
    if abs(rho) == 1.0:
        rate = link.shannon_rate(snr, g_pa)
    else:
        # the LoS term is common to both positions; only the scatter ages
        mean = np.abs(pair.los + rho * (pair.h_pa - pair.los)) ** 2
        diffuse = (1.0 - rho * rho) * 2.0 * shadowing.b0
        rate = link.memo_conditional_rates(mean, diffuse, snr, scenario.search)
    ok = link.decodes(rate, snr, g_ra)
    return np.where(ok, rate * n_cw, 0.0), delay


def _simo_rate(shadowing: channel.ShadowedRiceParams, scenario: RuralScenario, seed: int) -> float:
    rng = derive_stream(seed, 0, 0xD351)
    n = scenario.rate_design_samples
    g = (np.abs(channel.draw_shadowed_rice(shadowing, rng, n)) ** 2
         + np.abs(channel.draw_shadowed_rice(shadowing, rng, n)) ** 2)
    return link.outage_optimal_fixed_rate(g, scenario.snr, scenario.search).rate


def _simo_block(rate, shadowing, scenario, rng, n, target_blocked):
    # independent stream layout from the PA pair draw: (LoS, scatter) x 2 antennas
    g = (np.abs(channel.draw_shadowed_rice(shadowing, rng, n)) ** 2
         + np.abs(channel.draw_shadowed_rice(shadowing, rng, n)) ** 2)
    ok = link.decodes(rate, scenario.snr, g) & (not target_blocked)
    bits = np.where(ok, rate * scenario.frame.codeword_channel_uses, 0.0)
    return bits, np.full(n, scenario.frame.e2e_delay(0.0))


def simulate_train(
    layout: TrainLayout,
    speed_m_s: float,
    shadowing: channel.ShadowedRiceParams,
    scenario: RuralScenario,
    trials: int,
    seed: int,
    scheme: str = "pa-best",
) -> SummaryStat:
    """E2E throughput (bits/s) of the target wagon for ``pa-best`` or ``simo-mrc``."""
    target_blocked = scenario.target_wagon in layout.blocked_wagons
    if scheme == "pa-best":
        decision = best_combination(
            layout, scenario.target_wagon, speed_m_s, scenario.min_processing_delay_s, scenario.carrier
        )
    elif scheme == "simo-mrc":
        rate = _simo_rate(shadowing, scenario, seed)
    else:
        raise ValueError(f"unknown train scheme {scheme!r}")
    bits, delay = [], []
    for b, n in trial_blocks(trials):
        rng = derive_stream(seed, b, 0x7A1)
        if scheme == "pa-best":
            y, d = _pa_block(decision, shadowing, scenario, rng, n, target_blocked)
        else:
            y, d = _simo_block(rate, shadowing, scenario, rng, n, target_blocked)
        bits.append(y)
        delay.append(d)
    return ratio_of_means(np.concatenate(bits), np.concatenate(delay))


def genie_train_throughput(shadowing, scenario: RuralScenario, trials: int, seed: int) -> SummaryStat:
    """Perfect CSIT with the minimum processing delay, same fading stream."""
    bits, delay = [], []
    for b, n in trial_blocks(trials):
        pair = channel.draw_pair_shadowed_rice(shadowing, 1.0, derive_stream(seed, b, 0x7A1), n)
        bits.append(link.shannon_rate(scenario.snr, np.abs(pair.h_pa) ** 2)
                    * scenario.frame.codeword_channel_uses)
        delay.append(np.full(n, scenario.frame.e2e_delay(scenario.min_processing_delay_s)))
    return ratio_of_means(np.concatenate(bits), np.concatenate(delay))
