"""Random channel generation.

Three fading families are supported:

* spatially correlated Rayleigh scalar channels (Jakes / uniform angular
  spectrum around the vehicle),
* shadowed-Rice land-mobile-satellite channels (Nakagami-m line of sight
  plus Rayleigh scatter),
* geometric multipath vector channels seen by an N-element ULA, where the
  receiving point on the vehicle is displaced along the direction of travel.

Every draw function takes an explicit ``numpy.random.Generator`` and always
consumes the same number of variates for a given ``size``, so callers can
share streams between schemes (common random numbers).
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import special


class ChannelDomainError(ValueError):
    """Raised for correlation coefficients outside [-1, 1]."""


@dataclass(frozen=True)
class JakesParams:
    mean_power: float = 1.0

    def __post_init__(self):
        if not self.mean_power > 0:
            raise ValueError("mean_power must be positive")


@dataclass(frozen=True)
class ShadowedRiceParams:
    b0: float
    m: float
    omega: float

    def __post_init__(self):
        if not (self.b0 > 0 and self.m > 0):
            raise ValueError("b0 and m must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")

    @property
    def mean_power(self) -> float:
        return 2.0 * self.b0 + self.omega


@dataclass(frozen=True)
class MultipathFieldParams:
    """Geometric multipath field between an N-antenna ULA and the vehicle.

    ``bs_angular_spread_deg=None`` selects isotropic scattering around the
    array: path direction cosines are uniform on [-1, 1], which makes the
    half-wavelength-spaced elements uncorrelated.  A finite spread draws one
    cluster per realisation whose centre is uniform on the circle.
    """

    bs_antennas: int
    num_paths: int = 1000
    array_spacing_wavelengths: float = 0.5
    bs_angular_spread_deg: float | None = None

    def __post_init__(self):
        if self.bs_antennas < 1 or self.num_paths < 1:
            raise ValueError("bs_antennas and num_paths must be >= 1")
        if not self.array_spacing_wavelengths > 0:
            raise ValueError("array_spacing_wavelengths must be positive")
        if self.bs_angular_spread_deg is not None and not self.bs_angular_spread_deg > 0:
            raise ValueError("bs_angular_spread_deg must be positive or None")


@dataclass(frozen=True)
class ChannelDraw:
    h_pa: np.ndarray | complex
    h_ra: np.ndarray | complex
    correlation_used: float
    # Line-of-sight term shared by both positions (shadowed Rice only).
    los: np.ndarray | complex | None = None


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not abs(rho) <= 1.0:
        raise ChannelDomainError(f"|rho| must be <= 1, got {rho}")
    return rho


def complex_normal(rng: np.random.Generator, size=None, power: float = 1.0):
    """Circularly-symmetric complex Gaussian samples with E|x|^2 = power."""
    scale = np.sqrt(power / 2.0)
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return scale * z


def jakes_correlation(d_m, wavelength: float):
    """Spatial correlation J0(2*pi*d/lambda) of a uniform-angular-spectrum field."""
    return special.j0(2.0 * np.pi * np.asarray(d_m, dtype=float) / wavelength)[()]


def _evolve(h0, innovation, rho: float):
    return rho * h0 + np.sqrt(max(0.0, 1.0 - rho * rho)) * innovation


def draw_pair_rayleigh(params: JakesParams, rho: float, rng: np.random.Generator, size=None) -> ChannelDraw:
    """Rayleigh channel at the PA and, conditionally, at the RA position."""
    rho = _check_rho(rho)
    h_pa = complex_normal(rng, size, params.mean_power)
    q = complex_normal(rng, size, params.mean_power)
    return ChannelDraw(h_pa=h_pa, h_ra=_evolve(h_pa, q, rho), correlation_used=rho)


def _draw_los(params: ShadowedRiceParams, rng: np.random.Generator, size):
    # Nakagami-m amplitude via Z^2 ~ Gamma(m, omega/m)
    z2 = rng.gamma(params.m, params.omega / params.m, size)
    theta = rng.uniform(0.0, 2.0 * np.pi, size)
    return np.sqrt(z2) * np.exp(1j * theta)


def draw_shadowed_rice(params: ShadowedRiceParams, rng: np.random.Generator, size=None):
    los = _draw_los(params, rng, size)
    return los + complex_normal(rng, size, 2.0 * params.b0)


def draw_pair_shadowed_rice(
    params: ShadowedRiceParams, rho: float, rng: np.random.Generator, size=None
) -> ChannelDraw:
    """Shadowed-Rice pair; the LoS term is common, only the scatter decorrelates."""
    rho = _check_rho(rho)
    los = _draw_los(params, rng, size)
    diffuse = complex_normal(rng, size, 2.0 * params.b0)
    q = complex_normal(rng, size, 2.0 * params.b0)
    return ChannelDraw(
        h_pa=los + diffuse,
        h_ra=los + _evolve(diffuse, q, rho),
        correlation_used=rho,
        los=los,
    )


def load_shadowing_presets(path: str | Path | None = None) -> dict[str, ShadowedRiceParams]:
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("pa_sim").joinpath("data/shadowing.ini").read_text()
        parser.read_string(text)
    else:
        with open(path) as fh:
            parser.read_file(fh)
    return {
        name: ShadowedRiceParams(
            b0=sec.getfloat("b0"), m=sec.getfloat("m"), omega=sec.getfloat("omega")
        )
        for name, sec in parser.items()
        if name != parser.default_section
    }


def shadowing_preset(name: str) -> ShadowedRiceParams:
    presets = load_shadowing_presets()
    try:
        return presets[name]
    except KeyError:
        raise KeyError(f"unknown shadowing preset {name!r}; known: {sorted(presets)}") from None


# --- geometric multipath -------------------------------------------------


def ula_steering(direction_cosine, n_antennas: int, spacing_wavelengths: float = 0.5):
    """ULA response exp(j 2 pi s n u), n = 0..N-1, stacked along the last axis."""
    n = np.arange(n_antennas)
    u = np.asarray(direction_cosine, dtype=float)[..., None]
    return np.exp(2j * np.pi * spacing_wavelengths * n * u)


def _bs_direction_cosines(params: MultipathFieldParams, rng, trials: int):
    shape = (trials, params.num_paths)
    if params.bs_angular_spread_deg is None:
        return rng.uniform(-1.0, 1.0, shape)
    half = np.deg2rad(params.bs_angular_spread_deg) / 2.0
    centre = rng.uniform(-np.pi, np.pi, (trials, 1))
    return np.sin(centre + rng.uniform(-half, half, shape))


def _array_sum(coeffs: np.ndarray, u: np.ndarray, params: MultipathFieldParams, chunk: int = 64):
    """sum_p coeffs[..., t, p] * a(u[t, p]) / sqrt(P) -> (..., t, N)."""
    n_ant = params.bs_antennas
    lead = coeffs.shape[:-2]
    trials, paths = u.shape
    out = np.empty(lead + (trials, n_ant), dtype=complex)
    z = np.exp(2j * np.pi * params.array_spacing_wavelengths * u)
    for start in range(0, trials, chunk):
        sl = slice(start, start + chunk)
        steer = np.empty(z[sl].shape + (n_ant,), dtype=complex)
        steer[..., 0] = 1.0
        if n_ant > 1:
            steer[..., 1:] = z[sl][..., None]
            np.cumprod(steer, axis=-1, out=steer)
        # (..., t, 1, P) @ (t, P, N) -> (..., t, 1, N)
        out[..., sl, :] = (coeffs[..., sl, None, :] @ steer)[..., 0, :]
    return out / np.sqrt(paths)


def draw_multipath(
    params: MultipathFieldParams,
    displacements_wl,
    rng: np.random.Generator,
    trials: int,
) -> np.ndarray:
    """Channel vectors at several displacements along the direction of travel.

    Returns shape ``(len(displacements_wl), trials, N)``; all displacements see
    the same paths, so index 0 with displacement 0 is the PA-position channel.
    """
    disp = np.atleast_1d(np.asarray(displacements_wl, dtype=float))
    shape = (trials, params.num_paths)
    alpha = complex_normal(rng, shape)
    u = _bs_direction_cosines(params, rng, trials)
    phi = rng.uniform(0.0, 2.0 * np.pi, shape)
    rot = np.exp(2j * np.pi * disp[:, None, None] * np.cos(phi)[None])
    rot[disp == 0.0] = 1.0
    return _array_sum(alpha[None] * rot, u, params)


def draw_multipath_pair(
    params: MultipathFieldParams,
    d_m: float,
    wavelength: float,
    rng: np.random.Generator,
    trials: int = 1,
) -> ChannelDraw:
    if d_m < 0:
        raise ValueError("d_m must be non-negative")
    h = draw_multipath(params, [0.0, d_m / wavelength], rng, trials)
    return ChannelDraw(
        h_pa=h[0], h_ra=h[1], correlation_used=float(jakes_correlation(d_m, wavelength))
    )
