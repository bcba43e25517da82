"""Geometry of the predictor-antenna / receive-antenna displacement problem.

All lengths are in metres, times in seconds, speeds in m/s unless the name
says otherwise (``*_km_h``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT_M_S = 2.998e8

# Prediction horizons in carrier wavelengths.
PA_HORIZON_WAVELENGTHS = 1.5
KALMAN_HORIZON_WAVELENGTHS = 0.3

# Relative slack for "exact traversal" comparisons (d/v == L up to rounding).
_FEASIBILITY_RTOL = 1e-9


class InvalidConfigError(ValueError):
    """Raised for physically meaningless configuration values."""


@dataclass(frozen=True)
class CarrierConfig:
    carrier_frequency_hz: float
    speed_of_light_m_s: float = SPEED_OF_LIGHT_M_S

    def __post_init__(self):
        if not self.carrier_frequency_hz > 0:
            raise InvalidConfigError(
                f"carrier_frequency_hz must be positive, got {self.carrier_frequency_hz}"
            )

    @property
    def wavelength_m(self) -> float:
        return self.speed_of_light_m_s / self.carrier_frequency_hz


@dataclass(frozen=True)
class MobilityConfig:
    speed_m_s: float
    antenna_separation_m: float
    processing_delay_s: float
    min_processing_delay_s: float

    def __post_init__(self):
        if self.speed_m_s < 0:
            raise InvalidConfigError(f"speed_m_s must be >= 0, got {self.speed_m_s}")
        if not self.antenna_separation_m > 0:
            raise InvalidConfigError("antenna_separation_m must be positive")
        if not self.min_processing_delay_s > 0:
            raise InvalidConfigError("min_processing_delay_s must be positive")
        if self.processing_delay_s < self.min_processing_delay_s:
            raise InvalidConfigError(
                "processing_delay_s must not be below min_processing_delay_s"
            )


@dataclass(frozen=True)
class HorizonConstant:
    horizon_wavelengths: float

    def __post_init__(self):
        if not self.horizon_wavelengths > 0:
            raise InvalidConfigError("horizon_wavelengths must be positive")


PA_HORIZON = HorizonConstant(PA_HORIZON_WAVELENGTHS)
KALMAN_HORIZON = HorizonConstant(KALMAN_HORIZON_WAVELENGTHS)


@dataclass(frozen=True)
class AdaptiveDelay:
    delay_s: float
    feasible: bool


def wavelength(cfg: CarrierConfig) -> float:
    return cfg.wavelength_m


def km_h_to_m_s(speed_km_h: float) -> float:
    return speed_km_h / 3.6


def m_s_to_km_h(speed_m_s: float) -> float:
    return speed_m_s * 3.6


def max_supported_speed(cfg: CarrierConfig, delay_s: float, horizon: HorizonConstant) -> float:
    """Highest speed (km/h) at which the horizon is covered within ``delay_s``."""
    if not delay_s > 0:
        raise InvalidConfigError(f"delay_s must be positive, got {delay_s}")
    return 3.6 * horizon.horizon_wavelengths * cfg.wavelength_m / delay_s


def mismatch_distance(mob: MobilityConfig) -> float:
    """Distance between where the PA sounded the channel and where the RA receives."""
    return abs(mob.antenna_separation_m - mob.speed_m_s * mob.processing_delay_s)


def traversal_feasible(distance_m: float, speed_m_s: float, min_delay_s: float) -> bool:
    """True when ``distance/speed`` is at least the minimum processing delay."""
    # a creeping speed whose traversal time overflows never arrives, like standstill
    if speed_m_s <= 0 or not math.isfinite(float(distance_m) / float(speed_m_s)):
        return False
    return distance_m >= speed_m_s * min_delay_s * (1.0 - _FEASIBILITY_RTOL)


def adaptive_delay(mob: MobilityConfig) -> AdaptiveDelay:
    """Delay that puts the RA exactly where the PA sent its pilot.

    Beyond the speed limit set by the minimum processing delay (or at
    standstill) this falls back to the minimum delay and reports
    ``feasible=False``; callers then treat the link as nonadaptive.
    """
    v = mob.speed_m_s
    d = mob.antenna_separation_m
    if traversal_feasible(d, v, mob.min_processing_delay_s):
        return AdaptiveDelay(delay_s=max(d / v, mob.min_processing_delay_s), feasible=True)
    return AdaptiveDelay(delay_s=mob.min_processing_delay_s, feasible=False)


def with_delay(mob: MobilityConfig, delay_s: float) -> MobilityConfig:
    return MobilityConfig(
        speed_m_s=mob.speed_m_s,
        antenna_separation_m=mob.antenna_separation_m,
        processing_delay_s=delay_s,
        min_processing_delay_s=mob.min_processing_delay_s,
    )


def speed_table(
    freqs_hz,
    delays_s,
    ref_freq_hz: float = 2.68e9,
    ref_delay_s: float = 5e-3,
    speed_of_light_m_s: float = SPEED_OF_LIGHT_M_S,
):
    """Rows ``(freq_hz, delay_s, predictor, v_max_kmh)`` in the two-block layout
    of the classic table: every frequency at the reference delay, then every
    delay at the reference frequency."""
    combos = [(f, ref_delay_s) for f in freqs_hz] + [(ref_freq_hz, d) for d in delays_s]
    rows = []
    for f, d in combos:
        cfg = CarrierConfig(f, speed_of_light_m_s)
        for name, horizon in (("pa", PA_HORIZON), ("kalman", KALMAN_HORIZON)):
            rows.append((f, d, name, max_supported_speed(cfg, d, horizon)))
    return rows
