"""Transmit beamforming at an N-antenna BS and received power under mismatch.

Conventions: channel vectors ``h`` have shape ``(..., N)``; a beamformer
``w`` produces the received amplitude ``w^H h``.  All weight vectors have
unit norm, i.e. total transmit power 1 for every scheme and every N.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import channel
from .stats import derive_stream, trial_blocks


class DegenerateChannelError(ValueError):
    pass


class SingularChannelError(np.linalg.LinAlgError):
    pass


class BeamformerKind(enum.Enum):
    MRT = "mrt"
    DFT = "dft"
    ZF = "zf"
    NO_CSIT = "nocsit"


@dataclass(frozen=True)
class Beamformer:
    kind: BeamformerKind
    # (..., N) for one stream or (..., N, K) for K streams (ZF)
    weights: np.ndarray

    @property
    def streams(self) -> int:
        return 1 if self.kind is not BeamformerKind.ZF else self.weights.shape[-1]


def _normalize(v, axis=-1):
    return v / np.linalg.norm(v, axis=axis, keepdims=True)


def mrt_weights(h_hat) -> Beamformer:
    h_hat = np.asarray(h_hat, dtype=complex)
    norm = np.linalg.norm(h_hat, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise DegenerateChannelError("MRT needs a non-zero channel estimate")
    return Beamformer(BeamformerKind.MRT, h_hat / norm)


def dft_codebook(n: int) -> np.ndarray:
    """Unitary N x N matrix; column n has entries exp(-j 2 pi k n / N) / sqrt(N)."""
    if n < 1:
        raise ValueError("N must be >= 1")
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)


def dft_select(h_hat, codebook: np.ndarray) -> Beamformer:
    """Codebook column with the largest |b^H h_hat|^2 (lowest index on ties)."""
    h_hat = np.asarray(h_hat, dtype=complex)
    if h_hat.shape[-1] != codebook.shape[0]:
        raise ValueError("channel and codebook dimensions differ")
    gains = np.abs(h_hat @ codebook.conj()) ** 2
    idx = np.argmax(gains, axis=-1)
    return Beamformer(BeamformerKind.DFT, np.moveaxis(codebook[:, idx], 0, -1))


def zf_weights(h_users) -> Beamformer:
    """Zero-forcing for K users; ``h_users`` has shape (..., N, K).

    W = H (H^H H)^-1 with every column scaled to unit norm.
    """
    H = np.asarray(h_users, dtype=complex)
    n, k = H.shape[-2:]
    if k > n:
        raise SingularChannelError(f"ZF needs K <= N, got K={k}, N={n}")
    # ZF combines as w^H h, so precode with the conjugate-free pseudo-inverse
    gram = np.conj(np.swapaxes(H, -1, -2)) @ H
    if np.any(np.linalg.matrix_rank(gram) < k):
        raise SingularChannelError("user channels are linearly dependent")
    W = H @ np.linalg.inv(gram)
    return Beamformer(BeamformerKind.ZF, _normalize(W, axis=-2))


def no_csit_weights(n: int) -> Beamformer:
    if n < 1:
        raise ValueError("N must be >= 1")
    return Beamformer(BeamformerKind.NO_CSIT, np.full(n, 1.0 / np.sqrt(n), dtype=complex))


def received_power(bf: Beamformer, h_true, stream: int = 0):
    """|w^H h|^2; for ZF the power of ``stream`` at the channel ``h_true``."""
    w = bf.weights[..., stream] if bf.kind is BeamformerKind.ZF else bf.weights
    h = np.asarray(h_true, dtype=complex)
    return np.abs(np.sum(np.conj(w) * h, axis=-1)) ** 2


def beamform(kind: BeamformerKind, h_hat, interferer_hat=None) -> Beamformer:
    n = np.asarray(h_hat).shape[-1]
    if kind is BeamformerKind.MRT:
        return mrt_weights(h_hat)
    if kind is BeamformerKind.DFT:
        return dft_select(h_hat, dft_codebook(n))
    if kind is BeamformerKind.NO_CSIT:
        return no_csit_weights(n)
    if kind is BeamformerKind.ZF:
        if interferer_hat is None:
            raise ValueError("ZF needs the co-scheduled user's channel")
        return zf_weights(np.stack([h_hat, interferer_hat], axis=-1))
    raise ValueError(kind)


@dataclass(frozen=True)
class PowerCdf:
    samples: np.ndarray  # linear received powers, ascending

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=float))
        if s.size == 0 or s[0] < 0:
            raise ValueError("PowerCdf needs non-negative samples")
        object.__setattr__(self, "samples", s)

    def quantile(self, q: float) -> float:
        n = self.samples.size
        k = max(1, int(np.ceil(q * n - 1e-9)))
        return float(self.samples[min(k, n) - 1])

    @property
    def median(self) -> float:
        return float(np.median(self.samples))


def power_samples(
    n_antennas: int,
    kinds,
    mismatches_wl,
    trials: int,
    seed: int,
    field_params: channel.MultipathFieldParams | None = None,
    prediction: str = "none",
) -> dict[tuple[BeamformerKind, float], np.ndarray]:
    """Received-power samples for every (scheme, mismatch) on shared realisations.

    ``prediction="none"`` forms the beamformer from the PA-position channel
    and evaluates it at the displaced RA channel; ``"ideal"`` forms it from
    the RA channel itself.  ZF serves the intended user plus one independent
    co-scheduled user that sees no displacement.
    """
    if prediction not in ("none", "ideal"):
        raise ValueError("prediction must be 'none' or 'ideal'")
    params = field_params or channel.MultipathFieldParams(bs_antennas=n_antennas)
    if params.bs_antennas != n_antennas:
        raise ValueError("field_params.bs_antennas disagrees with n_antennas")
    kinds = [BeamformerKind(k) for k in kinds]
    mism = [float(m) for m in mismatches_wl]
    disp = [0.0] + mism
    out = {(k, m): [] for k in kinds for m in mism}
    need_zf = BeamformerKind.ZF in kinds
    for b, n in trial_blocks(trials, block=500):
        rng = derive_stream(seed, b, n_antennas)
        h = channel.draw_multipath(params, disp, rng, n)
        other = channel.draw_multipath(params, [0.0], rng, n)[0] if need_zf else None
        h_pa = h[0]
        for j, m in enumerate(mism):
            h_ra = h[j + 1]
            h_hat = h_ra if prediction == "ideal" else h_pa
            for k in kinds:
                bf = beamform(k, h_hat, other)
                out[(k, m)].append(received_power(bf, h_ra))
    return {key: np.concatenate(v) for key, v in out.items()}


def power_cdf_experiment(
    n_antennas: int,
    bf_kind,
    mismatch_wavelengths: float,
    trials: int,
    seed: int,
    prediction: str = "none",
    field_params: channel.MultipathFieldParams | None = None,
) -> PowerCdf:
    kind = BeamformerKind(bf_kind)
    samples = power_samples(
        n_antennas, [kind], [mismatch_wavelengths], trials, seed, field_params, prediction
    )
    return PowerCdf(samples[(kind, float(mismatch_wavelengths))])
