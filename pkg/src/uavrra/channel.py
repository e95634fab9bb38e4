"""Path loss, SNR statistics and multipath channel realizations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamgeom import BeamCodebook, beamwidth
from .scenario import ScenarioConfig

_ANGLE_LIM = math.pi / 2 - 1e-6


@dataclass(frozen=True)
class ChannelRealization:
    path_gains: np.ndarray  # complex beta_p
    path_powers: np.ndarray  # sigma_p^2, sums to 1
    aoa_rad: np.ndarray  # at the UAV
    aod_rad: np.ndarray  # at the CAV
    matrix: np.ndarray  # (n_uav, n_cav)


def path_loss_db(d, cfg: ScenarioConfig):
    """Deterministic part of the log-distance path loss (shadowing excluded)."""
    return cfg.pl_offset_db + cfg.pl_exponent * 10.0 * np.log10(d)


def array_gain_db(cfg: ScenarioConfig) -> float:
    return 10.0 * math.log10(cfg.n_uav * cfg.n_cav)


def mean_snr_db(d, cfg: ScenarioConfig):
    """Mean SNR (dB) at distance ``d`` under ideal, unit-gain beam alignment."""
    return cfg.p_tx_dbm + array_gain_db(cfg) - path_loss_db(d, cfg) - cfg.noise_dbm


def snr_sigma_db(cfg: ScenarioConfig) -> float:
    """Standard deviation (dB) of the per-beam SNR.

    Shadowing variance plus the noise power taken in linear units (mW),
    which is negligible for realistic noise floors, plus the optional
    sensitivity term ``sigma_extra_db2``.
    """
    noise_lin = max(0.0, 10.0 ** (cfg.noise_dbm / 10.0))
    return math.sqrt(cfg.sigma_s_sq_db2 + noise_lin + cfg.sigma_extra_db2)


def sample_shadowing(rng: np.random.Generator, cfg: ScenarioConfig, size=None):
    """Zero-mean Gaussian shadowing in dB with variance ``sigma_s_sq_db2``."""
    return rng.normal(0.0, math.sqrt(cfg.sigma_s_sq_db2), size=size)


def steering_vector(angle_rad, n: int) -> np.ndarray:
    """Unit-norm half-wavelength ULA response.

    A scalar angle gives shape ``(n,)``; an array of angles gives
    ``(*angle.shape, n)``.
    """
    angle = np.asarray(angle_rad, dtype=float)
    m = np.arange(n)
    return np.exp(1j * np.pi * np.sin(angle)[..., None] * m) / math.sqrt(n)


def path_powers(cfg: ScenarioConfig) -> np.ndarray:
    w = cfg.path_decay ** np.arange(cfg.n_paths, dtype=float)
    return w / w.sum()


def sample_paths(rng: np.random.Generator, aoa_center, cfg: ScenarioConfig):
    """Batched multipath parameters, one channel per LoS angle in ``aoa_center``.

    Returns ``(gains, aoa, aod)``, each of shape ``(V, P)``. Path 0 is the
    LoS path; the CAV-side departure angle mirrors the UAV-side arrival
    angle. Scattered paths are spread uniformly within one beamwidth.
    """
    aoa_center = np.atleast_1d(np.asarray(aoa_center, dtype=float))
    v, p = aoa_center.size, cfg.n_paths
    powers = path_powers(cfg)

    aoa = np.repeat(aoa_center[:, None], p, axis=1)
    aod = -aoa.copy()
    if p > 1:
        centre = np.clip(aoa_center, -_ANGLE_LIM, _ANGLE_LIM)
        bw_uav = np.reshape(beamwidth(centre, cfg.n_uav), (-1, 1))
        bw_cav = np.reshape(beamwidth(centre, cfg.n_cav), (-1, 1))
        aoa[:, 1:] += rng.uniform(-1.0, 1.0, size=(v, p - 1)) * bw_uav
        aod[:, 1:] += rng.uniform(-1.0, 1.0, size=(v, p - 1)) * bw_cav
        np.clip(aoa, -_ANGLE_LIM, _ANGLE_LIM, out=aoa)
        np.clip(aod, -_ANGLE_LIM, _ANGLE_LIM, out=aod)

    scale = np.sqrt(powers / 2.0)
    gains = (rng.standard_normal((v, p)) + 1j * rng.standard_normal((v, p))) * scale
    return gains, aoa, aod


def channel_matrix(gains: np.ndarray, aoa: np.ndarray, aod: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """Sum of rank-one path contributions, shape ``(..., n_uav, n_cav)``."""
    a_uav = steering_vector(aoa, cfg.n_uav)
    a_cav = steering_vector(aod, cfg.n_cav)
    return np.einsum("...p,...pi,...pj->...ij", gains, a_uav, a_cav.conj())


def sample_channels(rng: np.random.Generator, aoa_center, cfg: ScenarioConfig):
    """Like :func:`sample_paths` but also returns the ``(V, n_uav, n_cav)`` matrices."""
    gains, aoa, aod = sample_paths(rng, aoa_center, cfg)
    return gains, aoa, aod, channel_matrix(gains, aoa, aod, cfg)


def sample_channel(rng: np.random.Generator, aoa_center_rad: float, cfg: ScenarioConfig) -> ChannelRealization:
    gains, aoa, aod, h = sample_channels(rng, [aoa_center_rad], cfg)
    return ChannelRealization(
        path_gains=gains[0],
        path_powers=path_powers(cfg),
        aoa_rad=aoa[0],
        aod_rad=aod[0],
        matrix=h[0],
    )


def cav_beam(aoa_center_rad, cfg: ScenarioConfig) -> np.ndarray:
    """CAV beamformer ideally steered along the LoS departure direction."""
    return steering_vector(-np.asarray(aoa_center_rad, dtype=float), cfg.n_cav)


def codebook_matrix(codebook: BeamCodebook) -> np.ndarray:
    """UAV beam vectors as columns, shape ``(n_uav, n_beam)``."""
    return steering_vector(codebook.pointing, codebook.n_uav).T


def effective_gain(h: np.ndarray, w: np.ndarray, f: np.ndarray) -> float:
    return float(abs(np.conj(w) @ h @ f))


def instantaneous_snr_db(
    h: ChannelRealization | np.ndarray, w: np.ndarray, f: np.ndarray, d: float, shadow_db: float, cfg: ScenarioConfig
) -> float:
    """Received SNR (dB) for beam pair (w, f); ``-inf`` on a perfect null."""
    mat = h.matrix if isinstance(h, ChannelRealization) else h
    g = effective_gain(mat, w, f)
    if g == 0.0:
        return -math.inf
    return float(mean_snr_db(d, cfg) - shadow_db + 20.0 * math.log10(g))


def best_beam(h: ChannelRealization | np.ndarray, codebook: BeamCodebook, f: np.ndarray) -> int:
    """Codebook index maximizing ``|w^H H f|``; ties go to the lowest index."""
    mat = h.matrix if isinstance(h, ChannelRealization) else h
    gains = np.abs(codebook_matrix(codebook).conj().T @ (mat @ f))
    return int(np.argmax(gains))
