"""Scenario configuration: physical/system parameters and model switches."""

from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Any, Mapping


class RRAKind(str, Enum):
    FAIR = "fair"
    BEAM_BASED = "bb"


class FootprintMode(str, Enum):
    PAPER_COS = "paper"
    GEOMETRIC_TAN = "geometric"


class EmptyBeamMode(str, Enum):
    PAPER_EXACT = "paper"
    INCLUDE_ZERO = "include-zero"


class Fidelity(str, Enum):
    MODEL_MATCHED = "model"
    FULL_CHANNEL = "full"


class CIMethod(str, Enum):
    NORMAL = "normal"
    WILSON = "wilson"


class ValidationError(ValueError):
    """Raised when a configuration field violates its invariant."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


class OccupancySaturationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """All scenario parameters. Defaults reproduce the reference scenario.

    Units: meters, degrees, dBm/dB, seconds, Hz. ``lam`` is the vehicle
    density in vehicles per meter (stored under the key ``lambda`` in
    config files).
    """

    h_uav: float = 250.0
    psi_fov: float = 120.0
    n_uav: int = 8
    n_cav: int = 4
    n_rf: int = 4
    p_tx_dbm: float = 23.0
    noise_dbm: float = -101.0
    pl_offset_db: float = 84.64
    pl_exponent: float = 1.55
    sigma_s_sq_db2: float = 4.0
    lanes: int = 5
    l_vehicle: float = 5.0
    lam: float = 0.04
    gamma_th_db: float = 10.0
    carrier_hz: float = 28e9
    n_ch: int = 2
    t_slot_s: float = 125e-6
    tau_e2e_s: float = 10e-3
    rra_kind: RRAKind = RRAKind.FAIR
    footprint_mode: FootprintMode = FootprintMode.PAPER_COS
    empty_beam_mode: EmptyBeamMode = EmptyBeamMode.INCLUDE_ZERO
    n_paths: int = 3
    path_decay: float = 0.1
    sim_fidelity: Fidelity = Fidelity.MODEL_MATCHED
    # sensitivity knobs
    sigma_extra_db2: float = 0.0
    redistribute_remainder: bool = False
    ci_method: CIMethod = CIMethod.NORMAL

    def replace(self, **changes: Any) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def density_per_km(self) -> float:
        return self.lam * 1000.0

    def to_dict(self) -> dict[str, Any]:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[_FILE_KEYS.get(f.name, f.name)] = value.value if isinstance(value, Enum) else value
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ScenarioConfig":
        """Build a config from file-style keys; unknown keys are rejected."""
        by_key = {_FILE_KEYS.get(f.name, f.name): f for f in fields(cls)}
        kwargs = {}
        for key, value in data.items():
            if key not in by_key:
                raise ValidationError(key, "unknown configuration key")
            f = by_key[key]
            kwargs[f.name] = _coerce(f.name, _FIELD_TYPES[f.name], value)
        return cls(**kwargs)


_FILE_KEYS = {"lam": "lambda"}

_ENUMS = {
    "rra_kind": RRAKind,
    "footprint_mode": FootprintMode,
    "empty_beam_mode": EmptyBeamMode,
    "sim_fidelity": Fidelity,
    "ci_method": CIMethod,
}
_COUNTS = ("n_uav", "n_cav", "n_rf", "lanes", "n_ch", "n_paths")
_FIELD_TYPES = {
    f.name: _ENUMS.get(f.name, int if f.name in _COUNTS else bool if f.name == "redistribute_remainder" else float)
    for f in fields(ScenarioConfig)
}


def _coerce(name: str, kind: type, value: Any) -> Any:
    if isinstance(kind, type) and issubclass(kind, Enum):
        try:
            return kind(value)
        except ValueError:
            allowed = ", ".join(m.value for m in kind)
            raise ValidationError(name, f"expected one of {allowed}, got {value!r}") from None
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(name, f"expected a boolean, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, f"expected a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ValidationError(name, f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return ``cfg`` unchanged if every invariant holds.

    Raises :class:`ValidationError` naming the first violated field.
    Emits :class:`OccupancySaturationWarning` when ``lam * l_vehicle > 1``.
    """
    for name in _COUNTS:
        value = getattr(cfg, name)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ValidationError(name, f"must be an integer >= 1, got {value!r}")
    for name, kind in _ENUMS.items():
        if not isinstance(getattr(cfg, name), kind):
            raise ValidationError(name, f"must be a {kind.__name__}")

    positive = ("h_uav", "l_vehicle", "lam", "carrier_hz", "t_slot_s", "tau_e2e_s", "pl_exponent", "path_decay")
    for name in positive:
        value = getattr(cfg, name)
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(name, f"must be finite and > 0, got {value!r}")
    for name in ("sigma_s_sq_db2", "sigma_extra_db2"):
        value = getattr(cfg, name)
        if not math.isfinite(value) or value < 0:
            raise ValidationError(name, f"must be finite and >= 0, got {value!r}")
    for name in ("p_tx_dbm", "noise_dbm", "pl_offset_db", "gamma_th_db"):
        if not math.isfinite(getattr(cfg, name)):
            raise ValidationError(name, "must be finite")
    if not 0.0 < cfg.psi_fov < 180.0:
        raise ValidationError("psi_fov", f"must lie in (0, 180) degrees, got {cfg.psi_fov!r}")
    if cfg.tau_e2e_s < 2.0 * cfg.t_slot_s * (1 - 1e-12):
        raise ValidationError("tau_e2e_s", "must cover at least one uplink+downlink slot pair (>= 2 * t_slot_s)")

    if cfg.lam * cfg.l_vehicle > 1.0:
        warnings.warn(
            f"lambda * l_vehicle = {cfg.lam * cfg.l_vehicle:.3g} > 1: slot occupation probability is past its peak",
            OccupancySaturationWarning,
            stacklevel=2,
        )
    return cfg


def resource_budget(cfg: ScenarioConfig) -> tuple[int, int]:
    """Usable temporal slots and total time-frequency-spatial resources.

    Half of the latency budget is reserved for forwarding to the receiver.
    """
    n_slot = math.floor(0.5 * cfg.tau_e2e_s / cfg.t_slot_s + 1e-9)
    return n_slot, n_slot * cfg.n_ch * cfg.n_rf


def load_config(path: str | Path) -> ScenarioConfig:
    """Read a JSON config file. Missing keys take their defaults.

    ``OSError`` propagates for unreadable files; malformed content raises
    :class:`ValidationError`.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError("<file>", f"malformed JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ValidationError("<file>", "top level must be an object")
    return validate(ScenarioConfig.from_dict(data))


def dump_config(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")
