"""Monte Carlo estimation of access probability and connected/served counts.

Each trial is a static snapshot: vehicles dropped on spatial slots, SNRs
drawn, valid requests counted per beam and checked against the beam's
resource budget. Trial ``t`` of a run seeded with ``seed`` draws from its
own generator ``default_rng([seed, t])``, so results do not depend on how
trials are spread over workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import norm

from . import channel
from .analytic import occupation_prob
from .beamgeom import BeamCodebook
from .rra import ResourceAllocation
from .scenario import CIMethod, Fidelity, ScenarioConfig

CONFIDENCE = 0.95


@dataclass(frozen=True)
class Occupancy:
    lane: np.ndarray
    slot: np.ndarray
    x: np.ndarray

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class TrialOutcome:
    occupied: Occupancy
    vehicle_beam: np.ndarray
    per_vehicle_snr_db: np.ndarray
    per_beam_valid: np.ndarray
    per_beam_served: np.ndarray
    per_beam_access: np.ndarray

    @property
    def connected(self) -> int:
        return int(self.per_beam_valid.sum())

    @property
    def served(self) -> int:
        return int(self.per_beam_served.sum())


@dataclass(frozen=True)
class AccessReport:
    trials: int
    seed: int
    avg_access_hat: float
    avg_access_half_width: float
    ci_low: float
    ci_high: float
    per_beam_access_hat: np.ndarray
    per_beam_half_width: np.ndarray
    connected_mean: float
    connected_half_width: float
    served_mean: float
    served_half_width: float


def slots_per_lane(codebook: BeamCodebook, cfg: ScenarioConfig) -> int:
    return math.floor(codebook.segment_length_m / cfg.l_vehicle + 1e-9)


def drop_vehicles(rng: np.random.Generator, codebook: BeamCodebook, cfg: ScenarioConfig) -> Occupancy:
    """Occupy each of the ``lanes * slots_per_lane`` slots independently.

    Slots are centred on the segment; a vehicle sits at its slot centre.
    """
    n_slots = slots_per_lane(codebook, cfg)
    p_o = occupation_prob(cfg.lam, cfg.l_vehicle)
    occupied = rng.random((cfg.lanes, n_slots)) < p_o
    lane, slot = np.nonzero(occupied)
    x = (slot + 0.5 - n_slots / 2.0) * cfg.l_vehicle
    return Occupancy(lane=lane, slot=slot, x=x)


def _model_matched_snr(rng, codebook, cfg, x):
    beam = codebook.beam_of(x)
    mu = channel.mean_snr_db(codebook.barycenter_dists, cfg)
    snr = mu[beam] + channel.snr_sigma_db(cfg) * rng.standard_normal(len(x))
    return beam, snr


def _full_channel_snr(rng, codebook, cfg, x):
    h = cfg.h_uav
    d = np.hypot(h, x)
    aoa = np.arctan2(x, h)
    gains, path_aoa, path_aod = channel.sample_paths(rng, aoa, cfg)
    # w^H H f factorizes per path: beta_p (w^H a_uav(aoa_p)) (a_cav(aod_p)^H f)
    f = channel.cav_beam(aoa, cfg)  # (V, n_cav)
    cav_term = np.einsum("vpj,vj->vp", channel.steering_vector(path_aod, cfg.n_cav).conj(), f)
    uav_term = channel.steering_vector(path_aoa, cfg.n_uav) @ channel.codebook_matrix(codebook).conj()  # (V, P, B)
    eff = np.abs(np.einsum("vp,vpb->vb", gains * cav_term, uav_term))
    beam = np.argmax(eff, axis=1)
    g = eff[np.arange(len(x)), beam]
    shadow = channel.sample_shadowing(rng, cfg, size=len(x))
    with np.errstate(divide="ignore"):
        snr = channel.mean_snr_db(d, cfg) - shadow + 20.0 * np.log10(g)
    return beam, snr


def run_trial(
    rng: np.random.Generator, codebook: BeamCodebook, alloc: ResourceAllocation, cfg: ScenarioConfig
) -> TrialOutcome:
    if len(alloc) != codebook.n_beam:
        raise ValueError("allocation is not aligned with the codebook")
    occ = drop_vehicles(rng, codebook, cfg)
    if len(occ) == 0:
        beam, snr = np.zeros(0, dtype=np.int64), np.zeros(0)
    elif cfg.sim_fidelity is Fidelity.FULL_CHANNEL:
        beam, snr = _full_channel_snr(rng, codebook, cfg, occ.x)
    else:
        beam, snr = _model_matched_snr(rng, codebook, cfg, occ.x)
    valid = np.bincount(beam[snr >= cfg.gamma_th_db], minlength=codebook.n_beam)
    return TrialOutcome(
        occupied=occ,
        vehicle_beam=beam,
        per_vehicle_snr_db=snr,
        per_beam_valid=valid,
        per_beam_served=np.minimum(valid, alloc.per_beam),
        per_beam_access=valid <= alloc.per_beam,
    )


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _run_chunk(seed, trials, codebook, alloc, cfg):
    n = len(trials)
    access = np.empty((n, codebook.n_beam), dtype=bool)
    connected = np.empty(n)
    served = np.empty(n)
    for i, t in enumerate(trials):
        out = run_trial(trial_rng(seed, t), codebook, alloc, cfg)
        access[i] = out.per_beam_access
        connected[i] = out.connected
        served[i] = out.served
    return access, connected, served


def _mean_ci(samples: np.ndarray, bounded: bool, method: CIMethod, z: float) -> tuple[float, float, float]:
    """(mean, lower, upper) of a sample mean at the configured confidence.

    Normal approximation by default. For [0, 1]-valued samples a
    zero-variance sample falls back to the Wilson interval so the
    interval never collapses to a point.
    """
    n = samples.size
    mean = float(samples.mean())
    if n < 2:
        if bounded:
            return mean, 0.0, 1.0
        return mean, -math.inf, math.inf
    if bounded and (method is CIMethod.WILSON or samples.var() == 0.0):
        denom = 1.0 + z * z / n
        center = (mean + z * z / (2 * n)) / denom
        half = z / denom * math.sqrt(mean * (1 - mean) / n + z * z / (4 * n * n))
        return mean, min(mean, max(0.0, center - half)), max(mean, min(1.0, center + half))
    half = z * float(samples.std(ddof=1)) / math.sqrt(n)
    lo, hi = mean - half, mean + half
    if bounded:
        lo, hi = max(0.0, lo), min(1.0, hi)
    return mean, min(lo, mean), max(hi, mean)


def _half_width(samples, bounded, method, z):
    mean, lo, hi = _mean_ci(samples, bounded, method, z)
    return 0.5 * (hi - lo)


def run_experiment(
    seed: int,
    trials: int,
    codebook: BeamCodebook,
    alloc: ResourceAllocation,
    cfg: ScenarioConfig,
    workers: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> AccessReport:
    """Run ``trials`` independent snapshots and aggregate them in trial order."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    workers = max(1, int(workers))
    n_chunks = min(trials, max(workers * 4, 1))
    bounds = np.linspace(0, trials, n_chunks + 1).astype(int)
    chunks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    if workers == 1:
        parts = []
        for i, c in enumerate(chunks):
            parts.append(_run_chunk(seed, c, codebook, alloc, cfg))
            if progress:
                progress(c.stop, trials)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _run_chunk(seed, c, codebook, alloc, cfg), chunks))
        if progress:
            progress(trials, trials)

    access = np.concatenate([p[0] for p in parts]).astype(float)
    connected = np.concatenate([p[1] for p in parts])
    served = np.concatenate([p[2] for p in parts])

    method = cfg.ci_method
    z = float(norm.ppf(0.5 + CONFIDENCE / 2))
    avg, lo, hi = _mean_ci(access.mean(axis=1), True, method, z)
    return AccessReport(
        trials=trials,
        seed=seed,
        avg_access_hat=avg,
        avg_access_half_width=0.5 * (hi - lo),
        ci_low=lo,
        ci_high=hi,
        per_beam_access_hat=access.mean(axis=0),
        per_beam_half_width=np.array([_half_width(col, True, method, z) for col in access.T]),
        connected_mean=float(connected.mean()),
        connected_half_width=_half_width(connected, False, method, z),
        served_mean=float(served.mean()),
        served_half_width=_half_width(served, False, method, z),
    )
