"""Command-line experiments: sweeps, simulation, validation, planning."""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import logging
import os
import sys
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from . import analytic, mcsim
from .beamgeom import make_codebook
from .rra import allocate
from .scenario import (
    EmptyBeamMode,
    Fidelity,
    FootprintMode,
    OccupancySaturationWarning,
    RRAKind,
    ScenarioConfig,
    ValidationError,
    load_config,
    validate,
)

log = logging.getLogger("uavrra")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VALIDATION, EXIT_INFEASIBLE = 0, 1, 2, 3, 4
CONFIG_ENV = "UAV_RRA_CONFIG"

SWEEP_VARS = {"altitude_m": "h_uav", "density_per_km": "lam", "gamma_db": "gamma_th_db"}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.variable not in SWEEP_VARS:
            raise ValidationError("sweep", f"unknown variable {self.variable!r}; use one of {', '.join(SWEEP_VARS)}")
        if self.step <= 0 or self.start > self.stop:
            raise ValidationError("sweep", "need start <= stop and step > 0")

    def values(self) -> np.ndarray:
        return analytic.grid(self.start, self.stop, self.step)

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        parts = text.split(":")
        if len(parts) != 4:
            raise ValidationError("sweep", "expected var:start:stop:step")
        try:
            start, stop, step = map(float, parts[1:])
        except ValueError:
            raise ValidationError("sweep", f"non-numeric bounds in {text!r}") from None
        return cls(parts[0], start, stop, step)


@dataclass(frozen=True)
class Preset:
    sweep: SweepSpec
    fixed: dict = field(default_factory=dict)
    gammas: tuple = (5.0, 10.0)
    rras: tuple = (RRAKind.FAIR, RRAKind.BEAM_BASED)


PRESETS = {
    "fig3a": Preset(SweepSpec("altitude_m", 50, 500, 10), {"lam": 0.04}),
    "fig3b": Preset(SweepSpec("density_per_km", 10, 120, 5), {"h_uav": 250.0}),
    "fig4a": Preset(
        SweepSpec("altitude_m", 50, 500, 25),
        {"lam": 0.04, "sim_fidelity": Fidelity.FULL_CHANNEL},
        gammas=(10.0,),
    ),
    "fig4b": Preset(
        SweepSpec("altitude_m", 50, 500, 25),
        {"lam": 0.08, "sim_fidelity": Fidelity.FULL_CHANNEL},
        gammas=(10.0,),
    ),
}

RESULT_FIELDS = (
    "h_uav_m",
    "density_per_km",
    "gamma_db",
    "rra_kind",
    "footprint_mode",
    "empty_beam_mode",
    "p_acc_analytic",
    "p_acc_sim",
    "ci_low",
    "ci_high",
    "connected_mean",
    "served_mean",
    "n_beam",
    "l_f_m",
    "seed",
)


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".10g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def write_csv(stream, header: Sequence[str], rows: Iterable[dict]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(k)) for k in header])


def _set_sweep_value(cfg: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    value = float(value)
    if variable == "density_per_km":
        value /= 1000.0
    return cfg.replace(**{SWEEP_VARS[variable]: value})


def sweep_configs(args, base: ScenarioConfig) -> list[ScenarioConfig]:
    """Expand --preset / --sweep into concrete configs, in output order."""
    if args.preset:
        preset = PRESETS[args.preset]
        explicit = {"h_uav": args.altitude_m, "lam": args.density_per_km and args.density_per_km / 1000.0}
        fixed = {k: v for k, v in preset.fixed.items() if explicit.get(k) is None}
        base = base.replace(**fixed)
        sweep = SweepSpec.parse(args.sweep) if args.sweep else preset.sweep
        gammas = (args.gamma_db,) if args.gamma_db is not None else preset.gammas
        rras = (RRAKind(args.rra),) if args.rra else preset.rras
    else:
        sweep = SweepSpec.parse(args.sweep) if args.sweep else None
        gammas = (base.gamma_th_db,)
        rras = (base.rra_kind,)
    if args.fidelity:
        base = base.replace(sim_fidelity=Fidelity(args.fidelity))

    out = []
    for gamma, rra in itertools.product(gammas, rras):
        cfg = base.replace(gamma_th_db=float(gamma), rra_kind=rra)
        values = sweep.values() if sweep else [None]
        for v in values:
            out.append(validate(_set_sweep_value(cfg, sweep.variable, v) if sweep else cfg))
    return out


def _base_row(cfg: ScenarioConfig, seed=None) -> dict:
    codebook = make_codebook(cfg)
    report = analytic.average_access_prob(cfg, codebook, allocate(cfg, codebook))
    row = {
        "h_uav_m": cfg.h_uav,
        "density_per_km": cfg.density_per_km,
        "gamma_db": cfg.gamma_th_db,
        "rra_kind": cfg.rra_kind,
        "footprint_mode": cfg.footprint_mode,
        "empty_beam_mode": cfg.empty_beam_mode,
        "p_acc_analytic": report.avg_access,
        "n_beam": codebook.n_beam,
        "l_f_m": codebook.segment_length_m,
        "seed": seed,
    }
    return row


def simulate_row(cfg: ScenarioConfig, trials: int, seed: int, workers: int = 1) -> tuple[dict, mcsim.AccessReport]:
    row = _base_row(cfg, seed)
    codebook = make_codebook(cfg)
    rep = mcsim.run_experiment(seed, trials, codebook, allocate(cfg, codebook), cfg, workers=workers)
    row.update(
        p_acc_sim=rep.avg_access_hat,
        ci_low=rep.ci_low,
        ci_high=rep.ci_high,
        connected_mean=rep.connected_mean,
        served_mean=rep.served_mean,
    )
    return row, rep


def _base_config(args) -> ScenarioConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = load_config(path) if path else ScenarioConfig()
    overrides = {}
    if args.rra:
        overrides["rra_kind"] = RRAKind(args.rra)
    if args.footprint_mode:
        overrides["footprint_mode"] = FootprintMode(args.footprint_mode)
    if args.empty_beam:
        overrides["empty_beam_mode"] = EmptyBeamMode(args.empty_beam)
    if args.fidelity:
        overrides["sim_fidelity"] = Fidelity(args.fidelity)
    if getattr(args, "altitude_m", None) is not None:
        overrides["h_uav"] = args.altitude_m
    if getattr(args, "density_per_km", None) is not None:
        overrides["lam"] = args.density_per_km / 1000.0
    if getattr(args, "gamma_db", None) is not None:
        overrides["gamma_th_db"] = args.gamma_db
    return validate(cfg.replace(**overrides))


def _emit(args, header, rows) -> None:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    if args.out in (None, "-"):
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def cmd_analytic(args) -> int:
    rows = [_base_row(cfg) for cfg in sweep_configs(args, _base_config(args))]
    _emit(args, RESULT_FIELDS, rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    configs = sweep_configs(args, _base_config(args))
    rows = []
    for i, cfg in enumerate(configs, 1):
        row, _ = simulate_row(cfg, args.trials, args.seed, args.workers)
        rows.append(row)
        log.info("point %d/%d done (h=%g m, lambda=%g /km)", i, len(configs), cfg.h_uav, cfg.density_per_km)
    _emit(args, RESULT_FIELDS, rows)
    return EXIT_OK


DEFAULT_GRID = "h=150,250,350;lambda=40,80;gamma=5,10;rra=fair,bb"
_GRID_KEYS = {"h": "h_uav", "lambda": "lam", "gamma": "gamma_th_db", "rra": "rra_kind"}


def parse_grid(text: str) -> dict[str, list]:
    grid: dict[str, list] = {}
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, _, values = part.partition("=")
        key = key.strip()
        if key not in _GRID_KEYS or not values:
            raise ValidationError("grid", f"bad grid entry {part!r}; keys are {', '.join(_GRID_KEYS)}")
        items = [v.strip() for v in values.split(",") if v.strip()]
        try:
            if key == "rra":
                grid[key] = [RRAKind(v) for v in items]
            elif key == "lambda":
                grid[key] = [float(v) / 1000.0 for v in items]
            else:
                grid[key] = [float(v) for v in items]
        except ValueError:
            raise ValidationError("grid", f"bad value in {part!r}") from None
    return grid


def validation_tolerance(half_width: float) -> float:
    return max(0.02, 3.0 * half_width)


def cmd_validate(args) -> int:
    base = _base_config(args).replace(sim_fidelity=Fidelity.MODEL_MATCHED)
    grid = parse_grid(args.grid)
    keys = list(grid)
    header = RESULT_FIELDS + ("abs_error", "tolerance", "pass")
    rows, failures = [], []
    for combo in itertools.product(*(grid[k] for k in keys)):
        cfg = validate(base.replace(**{_GRID_KEYS[k]: v for k, v in zip(keys, combo)}))
        row, rep = simulate_row(cfg, args.trials, args.seed, args.workers)
        err = abs(row["p_acc_sim"] - row["p_acc_analytic"])
        tol = validation_tolerance(rep.avg_access_half_width)
        row.update(abs_error=err, tolerance=tol, **{"pass": int(err <= tol)})
        rows.append(row)
        if err > tol:
            failures.append(row)
    _emit(args, header, rows)
    for row in failures:
        print(
            f"FAIL h={row['h_uav_m']:g} m lambda={row['density_per_km']:g}/km gamma={row['gamma_db']:g} dB "
            f"rra={row['rra_kind'].value}: |sim-analytic|={row['abs_error']:.4f} > {row['tolerance']:.4f}",
            file=sys.stderr,
        )
    return EXIT_VALIDATION if failures else EXIT_OK


def cmd_plan(args) -> int:
    cfg = _base_config(args)
    try:
        lo, hi = (float(v) for v in args.h_range.split(":"))
    except ValueError:
        raise ValidationError("h-range", "expected lo:hi") from None
    plan = analytic.plan_altitude(cfg, args.target, (lo, hi), args.step)
    _emit(args, ("h_best_m", "l_f_m", "drones_per_km"), [
        {"h_best_m": plan.h_best, "l_f_m": plan.segment_length_m, "drones_per_km": plan.drones_per_km}
    ])
    return EXIT_OK


def cmd_codebook(args) -> int:
    cb = make_codebook(_base_config(args))
    header = ("beam_index", "pointing_deg", "beamwidth_deg", "x_left_m", "x_right_m", "length_m", "capacity",
              "barycenter_dist_m")
    rows = [
        {
            "beam_index": b.index,
            "pointing_deg": float(np.degrees(b.pointing_rad)),
            "beamwidth_deg": float(np.degrees(b.beamwidth_rad)),
            "x_left_m": b.x_left,
            "x_right_m": b.x_right,
            "length_m": b.length_m,
            "capacity": b.capacity,
            "barycenter_dist_m": b.barycenter_dist_m,
        }
        for b in cb.beams
    ]
    _emit(args, header, rows)
    return EXIT_OK


def cmd_alloc(args) -> int:
    cfg = _base_config(args)
    cb = make_codebook(cfg)
    kinds = [RRAKind(args.rra)] if args.rra else list(RRAKind)
    rows = []
    for kind in kinds:
        alloc = allocate(cfg, cb, kind)
        rows += [{"beam_index": i, "strategy": kind, "n_resources": int(n)} for i, n in enumerate(alloc.per_beam)]
    _emit(args, ("beam_index", "strategy", "n_resources"), rows)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help=f"JSON config file (fallback: ${CONFIG_ENV}; default: reference scenario)")
    common.add_argument("--out", help="output CSV path (default: stdout)")
    common.add_argument("--rra", choices=[k.value for k in RRAKind])
    common.add_argument("--footprint-mode", choices=[k.value for k in FootprintMode])
    common.add_argument("--empty-beam", choices=[k.value for k in EmptyBeamMode])
    common.add_argument("--fidelity", choices=[k.value for k in Fidelity])
    common.add_argument("--altitude-m", type=float, help="override UAV altitude")
    common.add_argument("--density-per-km", type=float, help="override vehicle density")
    common.add_argument("--gamma-db", type=float, help="override SNR threshold")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")

    sweeping = argparse.ArgumentParser(add_help=False)
    sweeping.add_argument("--sweep", help="var:start:stop:step, var in " + ", ".join(SWEEP_VARS))
    sweeping.add_argument("--preset", choices=sorted(PRESETS))

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--trials", type=int, default=10_000)
    sim.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on this)")

    parser = _Parser(prog="uavrra", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("analytic", parents=[common, sweeping], help="closed-form access probability").set_defaults(
        func=cmd_analytic
    )
    sub.add_parser("simulate", parents=[common, sweeping, sim], help="analytic + Monte Carlo").set_defaults(
        func=cmd_simulate
    )
    p = sub.add_parser("validate", parents=[common, sim], help="check simulation against the analytic model")
    p.add_argument("--grid", default=DEFAULT_GRID, help=f"grid spec (default: {DEFAULT_GRID!r})")
    p.set_defaults(func=cmd_validate)
    p = sub.add_parser("plan", parents=[common], help="highest altitude meeting an access target")
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--h-range", default="50:500")
    p.add_argument("--step", type=float, default=10.0)
    p.set_defaults(func=cmd_plan)
    sub.add_parser("codebook", parents=[common], help="dump the beam codebook").set_defaults(func=cmd_codebook)
    sub.add_parser("alloc", parents=[common], help="dump per-beam resource budgets").set_defaults(func=cmd_alloc)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command in ("simulate", "validate") and args.trials < 1:
        parser.error("--trials must be >= 1")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", OccupancySaturationWarning)
            return args.func(args)
    except ValidationError as exc:
        print(f"uavrra: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except analytic.NoFeasibleAltitude as exc:
        print(f"uavrra: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"uavrra: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
