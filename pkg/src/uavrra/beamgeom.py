"""DFT beam codebook and beam footprints on a 1-D road axis.

The UAV array axis is aligned with the road; angles are measured from
nadir (array broadside), positive towards +x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scenario import FootprintMode, ScenarioConfig

_ENDFIRE_EPS = 1e-12
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class Beam:
    index: int
    pointing_rad: float
    beamwidth_rad: float
    theta_left_rad: float
    theta_right_rad: float
    x_left: float
    x_right: float
    capacity: int
    barycenter_dist_m: float

    @property
    def length_m(self) -> float:
        return self.x_right - self.x_left

    @property
    def center_m(self) -> float:
        return 0.5 * (self.x_left + self.x_right)


@dataclass(frozen=True)
class BeamCodebook:
    beams: tuple[Beam, ...]
    segment_length_m: float
    segment_capacity: int
    h_uav: float
    n_uav: int

    def __len__(self) -> int:
        return len(self.beams)

    @property
    def n_beam(self) -> int:
        return len(self.beams)

    @property
    def boundaries(self) -> np.ndarray:
        return np.array([self.beams[0].x_left] + [b.x_right for b in self.beams])

    @property
    def lengths(self) -> np.ndarray:
        return np.array([b.length_m for b in self.beams])

    @property
    def capacities(self) -> np.ndarray:
        return np.array([b.capacity for b in self.beams], dtype=np.int64)

    @property
    def pointing(self) -> np.ndarray:
        return np.array([b.pointing_rad for b in self.beams])

    @property
    def barycenter_dists(self) -> np.ndarray:
        return np.array([b.barycenter_dist_m for b in self.beams])

    def beam_of(self, x) -> np.ndarray:
        """Index of the footprint containing each road coordinate.

        Points on an interior boundary belong to the right-hand beam;
        points outside the segment are clamped to the edge beams.
        """
        inner = self.boundaries[1:-1]
        return np.searchsorted(inner, np.asarray(x, dtype=float), side="right")


def segment_length(h_uav: float, psi_fov: float, mode: FootprintMode = FootprintMode.PAPER_COS) -> float:
    """Road length covered by the UAV field of view (meters).

    ``PAPER_COS`` keeps the cosine form used by the reference model;
    ``GEOMETRIC_TAN`` is the plane-geometry projection of the cone.
    """
    half = math.radians(psi_fov) / 2.0
    if FootprintMode(mode) is FootprintMode.PAPER_COS:
        return 2.0 * h_uav * math.cos(half)
    return 2.0 * h_uav * math.tan(half)


def beamwidth(pointing_rad, n_uav: int):
    """Beamwidth of a ULA beam steered to ``pointing_rad`` (radians)."""
    c = np.cos(pointing_rad)
    if np.any(c <= _ENDFIRE_EPS):
        raise ValueError("beamwidth undefined at endfire (|pointing| >= pi/2)")
    out = 2.0 / (n_uav * c)
    return float(out) if np.ndim(out) == 0 else out


def dft_angles(n_uav: int) -> np.ndarray:
    """Pointing angles of the N-point DFT grid, uniform in sine space."""
    k = np.arange(1, n_uav + 1)
    return np.arcsin(-1.0 + (2.0 * k - 1.0) / n_uav)


def _road_x(h: float, theta: np.ndarray) -> np.ndarray:
    lim = math.pi / 2
    with np.errstate(over="ignore"):
        x = h * np.tan(np.clip(theta, -lim, lim))
    x = np.where(theta >= lim, np.inf, x)
    return np.where(theta <= -lim, -np.inf, x)


def _partition(xl: np.ndarray, xr: np.ndarray, half: float) -> np.ndarray:
    b = np.empty(len(xl) + 1)
    b[0], b[-1] = -half, half
    b[1:-1] = 0.5 * (xr[:-1] + xl[1:])
    b[1:-1] = np.clip(b[1:-1], -half, half)
    return np.maximum.accumulate(b)


def make_codebook(cfg: ScenarioConfig) -> BeamCodebook:
    """Build the codebook of DFT beams that illuminate the covered segment.

    Raw footprints come from the beam edge angles projected onto the road.
    Beams whose footprint misses the segment are dropped; the remaining
    boundaries are snapped (midpoint of facing edges, outer edges clipped)
    so the footprints tile the segment exactly.
    """
    h = cfg.h_uav
    l_f = segment_length(h, cfg.psi_fov, cfg.footprint_mode)
    half = l_f / 2.0

    phi = dft_angles(cfg.n_uav)
    width = beamwidth(phi, cfg.n_uav) * np.ones_like(phi)
    th_l, th_r = phi - width / 2.0, phi + width / 2.0
    xl, xr = _road_x(h, th_l), _road_x(h, th_r)

    keep = np.flatnonzero((xr > -half) & (xl < half))
    assert keep.size > 0, "no beam intersects the covered segment"

    # Snapping can squeeze a barely-intersecting edge beam to zero length.
    while True:
        b = _partition(xl[keep], xr[keep], half)
        lengths = np.diff(b)
        ok = lengths > _FLOOR_EPS * max(l_f, 1.0)
        if ok.all() or keep.size == 1:
            break
        keep = keep[ok]

    beams = []
    for i, k in enumerate(keep):
        x_left, x_right = float(b[i]), float(b[i + 1])
        center = 0.5 * (x_left + x_right)
        beams.append(
            Beam(
                index=i,
                pointing_rad=float(phi[k]),
                beamwidth_rad=float(width[k]),
                theta_left_rad=float(th_l[k]),
                theta_right_rad=float(th_r[k]),
                x_left=x_left,
                x_right=x_right,
                capacity=math.floor(cfg.lanes * (x_right - x_left) / cfg.l_vehicle + _FLOOR_EPS),
                barycenter_dist_m=math.hypot(h, center),
            )
        )
    return BeamCodebook(
        beams=tuple(beams),
        segment_length_m=l_f,
        segment_capacity=math.floor(cfg.lanes * l_f / cfg.l_vehicle + _FLOOR_EPS),
        h_uav=h,
        n_uav=cfg.n_uav,
    )
