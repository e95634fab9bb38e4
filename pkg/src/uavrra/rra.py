"""Per-beam radio resource budgets: Fair and Beam-Based assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamgeom import BeamCodebook
from .scenario import RRAKind, ScenarioConfig, resource_budget

_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class ResourceAllocation:
    strategy: RRAKind
    per_beam: np.ndarray
    total_budget: int

    def __post_init__(self):
        per_beam = np.asarray(self.per_beam, dtype=np.int64)
        per_beam.setflags(write=False)
        object.__setattr__(self, "per_beam", per_beam)

    def __len__(self) -> int:
        return len(self.per_beam)


def fair_alloc(total_budget: int, n_beam: int) -> ResourceAllocation:
    """Equal split of the budget; the remainder is left unused."""
    if n_beam < 1:
        raise ValueError("n_beam must be >= 1")
    return ResourceAllocation(RRAKind.FAIR, np.full(n_beam, total_budget // n_beam), total_budget)


def beam_based_alloc(
    total_budget: int, lengths: BeamCodebook | np.ndarray, redistribute_remainder: bool = False
) -> ResourceAllocation:
    """Split the budget in proportion to each beam's footprint length.

    ``lengths`` is a codebook or the raw footprint lengths. With
    ``redistribute_remainder`` the units lost to flooring go to the beams
    with the largest fractional parts (lowest index first on ties).
    """
    if isinstance(lengths, BeamCodebook):
        lengths = lengths.lengths
    lengths = np.asarray(lengths, dtype=float)
    share = total_budget * lengths / lengths.sum()
    per_beam = np.floor(share + _FLOOR_EPS).astype(np.int64)
    if redistribute_remainder:
        left = total_budget - int(per_beam.sum())
        order = np.argsort(-(share - per_beam), kind="stable")
        per_beam[order[:left]] += 1
    return ResourceAllocation(RRAKind.BEAM_BASED, per_beam, total_budget)


def _fair_redistributed(total_budget: int, n_beam: int) -> ResourceAllocation:
    per_beam = np.full(n_beam, total_budget // n_beam)
    per_beam[: total_budget % n_beam] += 1
    return ResourceAllocation(RRAKind.FAIR, per_beam, total_budget)


def allocate(cfg: ScenarioConfig, codebook: BeamCodebook, kind: RRAKind | None = None) -> ResourceAllocation:
    """Allocation for ``codebook`` under ``kind`` (default: ``cfg.rra_kind``)."""
    kind = RRAKind(kind or cfg.rra_kind)
    _, total = resource_budget(cfg)
    if kind is RRAKind.FAIR:
        if cfg.redistribute_remainder:
            return _fair_redistributed(total, codebook.n_beam)
        return fair_alloc(total, codebook.n_beam)
    return beam_based_alloc(total, codebook, cfg.redistribute_remainder)
