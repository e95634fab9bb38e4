"""Closed-form average access probability and the altitude planner."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaln

from .beamgeom import BeamCodebook, make_codebook, segment_length
from .channel import mean_snr_db, snr_sigma_db
from .rra import ResourceAllocation, allocate
from .scenario import EmptyBeamMode, ScenarioConfig, validate


class NoFeasibleAltitude(RuntimeError):
    pass


@dataclass(frozen=True)
class AnalyticReport:
    per_beam_mu_db: np.ndarray
    per_beam_p_vr: np.ndarray
    per_beam_p_acc: np.ndarray
    p_occupation: float
    avg_access: float


@dataclass(frozen=True)
class AltitudePlan:
    h_best: float
    segment_length_m: float
    drones_per_km: float
    avg_access: float


def q_function(x):
    """Gaussian tail probability Q(x) = P(Z > x)."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


def occupation_prob(lam: float, l_vehicle: float) -> float:
    """Probability that a spatial slot of length ``l_vehicle`` holds a vehicle."""
    a = lam * l_vehicle
    return a * math.exp(-a)


def valid_request_prob(mu_db, sigma_db, gamma_th_db):
    """P(SNR >= threshold) for SNR ~ N(mu, sigma^2) in dB.

    ``sigma_db == 0`` degenerates to the indicator ``mu >= gamma_th``.
    """
    mu = np.asarray(mu_db, dtype=float)
    if sigma_db == 0:
        out = (mu >= gamma_th_db).astype(float)
    else:
        out = q_function((gamma_th_db - mu) / sigma_db)
    return float(out) if np.ndim(out) == 0 else out


_STIRL = (1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188)
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _stirlerr(n: np.ndarray) -> np.ndarray:
    """log(n!) - log(sqrt(2 pi n) (n/e)^n), accurate for large n."""
    n = np.asarray(n, dtype=float)
    small = n <= 15
    ns = np.where(small, n, 1.0)
    direct = gammaln(ns + 1) - (ns + 0.5) * np.log(ns) + ns - _HALF_LOG_2PI
    nl = np.where(small, 16.0, n)
    n2 = nl * nl
    s0, s1, s2, s3, s4 = _STIRL
    series = (s0 - (s1 - (s2 - (s3 - s4 / n2) / n2) / n2) / n2) / nl
    return np.where(small, direct, series)


def _bd0(x: np.ndarray, mean: float) -> np.ndarray:
    """Deviance term x log(x / mean) + mean - x without cancellation."""
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        out = x * np.log(x / mean) + mean - x
    near = np.abs(x - mean) < 0.1 * (x + mean)
    if near.any():
        xn = x[near]
        v = (xn - mean) / (xn + mean)
        acc = (xn - mean) * v
        ej = 2 * xn * v
        for j in range(1, 40):
            ej = ej * v * v
            acc = acc + ej / (2 * j + 1)
        out[near] = acc
    return out


def _log_binom_pmf(m: np.ndarray, n: int, p: float) -> np.ndarray:
    """log Binomial(n, p) pmf at interior points 0 < m < n (saddle-point form)."""
    q = 1.0 - p
    lc = _stirlerr(n) - _stirlerr(m) - _stirlerr(n - m) - _bd0(m, n * p) - _bd0(n - m, n * q)
    return lc - 0.5 * np.log(2 * math.pi * m * (n - m) / n)


def _binom_pmf(m: np.ndarray, n: int, p: float) -> np.ndarray:
    out = np.empty(m.shape)
    inner = (m > 0) & (m < n)
    out[inner] = np.exp(_log_binom_pmf(m[inner], n, p))
    out[m == 0] = math.exp(n * math.log1p(-p))
    out[m == n] = math.exp(n * math.log(p))
    return out


def beam_access_prob(m_max: int, n_res: int, p: float, mode=EmptyBeamMode.INCLUDE_ZERO) -> float:
    """Probability that a beam's valid-request count fits its resources.

    The count is Binomial(m_max, p). ``INCLUDE_ZERO`` returns the full CDF
    at ``n_res``; ``PAPER_EXACT`` drops the empty-beam (m = 0) term.
    """
    mode = EmptyBeamMode(mode)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p!r}")
    if m_max < 0 or n_res < 0:
        raise ValueError("m_max and n_res must be non-negative")
    include_zero = mode is EmptyBeamMode.INCLUDE_ZERO
    if include_zero and m_max <= n_res:
        return 1.0

    lo = 0 if include_zero else 1
    hi = min(n_res, m_max)
    if hi < lo:
        return 0.0
    # degenerate p: all mass on m = 0 or m = m_max
    if p == 0.0:
        return 1.0 if lo == 0 else 0.0
    if p == 1.0:
        return 1.0 if lo <= m_max <= hi else 0.0

    terms = _binom_pmf(np.arange(lo, hi + 1, dtype=float), m_max, p)
    return min(1.0, math.fsum(terms))


def average_access_prob(cfg: ScenarioConfig, codebook: BeamCodebook, alloc: ResourceAllocation) -> AnalyticReport:
    """Per-beam and beam-averaged access probabilities."""
    if len(alloc) != codebook.n_beam:
        raise ValueError("allocation is not aligned with the codebook")
    mu = mean_snr_db(codebook.barycenter_dists, cfg)
    p_vr = np.atleast_1d(valid_request_prob(mu, snr_sigma_db(cfg), cfg.gamma_th_db))
    p_o = occupation_prob(cfg.lam, cfg.l_vehicle)
    p_acc = np.array(
        [
            beam_access_prob(int(m), int(n), p_o * float(v), cfg.empty_beam_mode)
            for m, n, v in zip(codebook.capacities, alloc.per_beam, p_vr)
        ]
    )
    return AnalyticReport(
        per_beam_mu_db=np.atleast_1d(mu),
        per_beam_p_vr=p_vr,
        per_beam_p_acc=p_acc,
        p_occupation=p_o,
        avg_access=float(p_acc.mean()),
    )


def evaluate(cfg: ScenarioConfig) -> AnalyticReport:
    """Codebook, allocation and access report for a single scenario."""
    codebook = make_codebook(cfg)
    return average_access_prob(cfg, codebook, allocate(cfg, codebook))


def grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid ``start + i * step`` (index-based, no drift)."""
    if step <= 0 or stop < start:
        raise ValueError("need step > 0 and start <= stop")
    n = math.floor((stop - start) / step + 1e-9) + 1
    return start + step * np.arange(n)


def plan_altitude(
    cfg: ScenarioConfig, target: float, h_range: tuple[float, float] = (50.0, 500.0), step: float = 10.0
) -> AltitudePlan:
    """Highest altitude on the grid whose average access meets ``target``.

    The objective need not be monotone in altitude, so the whole grid is
    scanned. Raises :class:`NoFeasibleAltitude` if no grid point qualifies.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target must lie in (0, 1)")
    best = None
    for h in grid(h_range[0], h_range[1], step):
        p = evaluate(validate(cfg.replace(h_uav=float(h)))).avg_access
        if p >= target:
            best = (float(h), p)
    if best is None:
        raise NoFeasibleAltitude(
            f"no altitude in [{h_range[0]:g}, {h_range[1]:g}] m reaches average access {target:g}"
        )
    l_f = segment_length(best[0], cfg.psi_fov, cfg.footprint_mode)
    return AltitudePlan(h_best=best[0], segment_length_m=l_f, drones_per_km=1000.0 / l_f, avg_access=best[1])
