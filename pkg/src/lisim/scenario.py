"""Scenario configs, single runs, parameter sweeps and the two built-in recipes.

All lengths in a scenario are expressed in wavelengths (the default
wavelength is 1), so configs transcribe directly from the usual
array-geometry conventions.
"""

from __future__ import annotations

import dataclasses
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import dipole, network, precoding
from .errors import ConfigError
from .network import Constraints

# the 4x4-wavelength-at-2-wavelengths reference geometry: the array subtends
# one sixth of the full sphere seen from the user
APERTURE_FRACTION = 1.0 / 6.0


@dataclass(frozen=True)
class LinearArraySpec:
    length: float
    count: int


@dataclass(frozen=True)
class PlanarArraySpec:
    len_y: float
    len_z: float
    count_y: int
    count_z: int


@dataclass(frozen=True)
class UELineSpec:
    distance_x: float
    length: float
    count: int


@dataclass(frozen=True)
class UEPositionsSpec:
    positions: tuple  # of (x, y, z)


@dataclass(frozen=True)
class PrecoderSpec:
    method: str = "mf-dual"  # "mf-dual" | "wmmse"
    max_iter: int = 1000
    tol: float = 1e-8

    def __post_init__(self):
        if self.method not in ("mf-dual", "wmmse"):
            raise ConfigError(f"unknown precoder method {self.method!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    array: LinearArraySpec | PlanarArraySpec
    ue: UELineSpec | UEPositionsSpec
    efficiency: float
    constraints: Constraints
    wavelength: float = 1.0
    ue_coupling: bool = True
    scattering: bool = True
    precoder: PrecoderSpec = field(default_factory=PrecoderSpec)

    def __post_init__(self):
        if not (0.0 < self.efficiency <= 1.0):
            raise ConfigError(f"efficiency must be in (0, 1], got {self.efficiency}")
        if self.wavelength <= 0:
            raise ConfigError(f"wavelength must be positive, got {self.wavelength}")


def _require_keys(d: dict, allowed: set, context: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")


def _parse_array(d: dict) -> LinearArraySpec | PlanarArraySpec:
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("array spec must be an object with a 'type' key")
    if d["type"] == "linear":
        _require_keys(d, {"type", "length", "count"}, "array")
        return LinearArraySpec(length=float(d["length"]), count=int(d["count"]))
    if d["type"] == "planar":
        _require_keys(d, {"type", "len_y", "len_z", "count_y", "count_z"}, "array")
        return PlanarArraySpec(
            len_y=float(d["len_y"]),
            len_z=float(d["len_z"]),
            count_y=int(d["count_y"]),
            count_z=int(d["count_z"]),
        )
    raise ConfigError(f"unknown array type {d['type']!r}")


def _parse_ue(d: dict) -> UELineSpec | UEPositionsSpec:
    if not isinstance(d, dict):
        raise ConfigError("ue spec must be an object")
    if "positions" in d:
        _require_keys(d, {"positions"}, "ue")
        pos = tuple(tuple(float(c) for c in p) for p in d["positions"])
        if any(len(p) != 3 for p in pos):
            raise ConfigError("ue positions must be [x, y, z] triples")
        return UEPositionsSpec(positions=pos)
    _require_keys(d, {"type", "distance_x", "length", "count"}, "ue")
    if d.get("type", "line") != "line":
        raise ConfigError(f"unknown ue type {d.get('type')!r}")
    return UELineSpec(
        distance_x=float(d["distance_x"]), length=float(d.get("length", 0.0)), count=int(d["count"])
    )


def config_from_dict(d: dict) -> ScenarioConfig:
    _require_keys(
        d,
        {"wavelength", "array", "ue", "efficiency", "constraints", "toggles", "precoder"},
        "scenario",
    )
    for key in ("array", "ue", "efficiency", "constraints"):
        if key not in d:
            raise ConfigError(f"missing required scenario key {key!r}")
    cons = d["constraints"]
    _require_keys(cons, {"P_R", "P_L", "sigma2"}, "constraints")
    try:
        constraints = Constraints(
            P_R=float(cons["P_R"]), P_L=float(cons["P_L"]), sigma2=float(cons["sigma2"])
        )
    except KeyError as exc:
        raise ConfigError(f"missing constraint key {exc}") from None
    toggles = d.get("toggles", {})
    _require_keys(toggles, {"ue_coupling", "scattering"}, "toggles")
    prec = dict(d.get("precoder", {}))
    _require_keys(prec, {"method", "max_iter", "tol"}, "precoder")
    return ScenarioConfig(
        wavelength=float(d.get("wavelength", 1.0)),
        array=_parse_array(d["array"]),
        ue=_parse_ue(d["ue"]),
        efficiency=float(d["efficiency"]),
        constraints=constraints,
        ue_coupling=bool(toggles.get("ue_coupling", True)),
        scattering=bool(toggles.get("scattering", True)),
        precoder=PrecoderSpec(**prec),
    )


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(raw)


def config_to_dict(config: ScenarioConfig) -> dict:
    """Canonical JSON-ready form, used for hashing and the meta sidecar."""
    arr = dataclasses.asdict(config.array)
    arr["type"] = "linear" if isinstance(config.array, LinearArraySpec) else "planar"
    if isinstance(config.ue, UELineSpec):
        ue = {"type": "line", **dataclasses.asdict(config.ue)}
    else:
        ue = {"positions": [list(p) for p in config.ue.positions]}
    return {
        "wavelength": config.wavelength,
        "array": arr,
        "ue": ue,
        "efficiency": config.efficiency,
        "constraints": dataclasses.asdict(config.constraints),
        "toggles": {"ue_coupling": config.ue_coupling, "scattering": config.scattering},
        "precoder": dataclasses.asdict(config.precoder),
    }


def build_geometry(config: ScenarioConfig) -> dipole.Geometry:
    lam = config.wavelength
    a = config.array
    if isinstance(a, LinearArraySpec):
        lis = dipole.linear_array(a.length * lam, a.count)
    else:
        lis = dipole.planar_array(a.len_y * lam, a.len_z * lam, a.count_y, a.count_z)
    u = config.ue
    if isinstance(u, UELineSpec):
        ue = dipole.ue_line(u.distance_x * lam, u.length * lam, u.count)
    else:
        ue = np.asarray(u.positions, dtype=float) * lam
    return dipole.Geometry(lis_positions=lis, ue_positions=ue)


@dataclass(frozen=True)
class ResultRow:
    """One sweep point: swept parameter values plus the standard metric columns."""

    params: dict
    n_lis: int = 0
    n_ue: int = 0
    sum_capacity: float = math.nan
    min_sinr: float = math.nan
    max_sinr: float = math.nan
    P_t: float = math.nan
    P_l: float = math.nan
    received_power: float = math.nan
    reference_aperture_power: float = math.nan
    error: str = ""
    wall_time: float = 0.0  # reported in the meta sidecar, not the CSV


def run(config: ScenarioConfig, params: dict | None = None) -> ResultRow:
    """Assemble the scenario, solve the configured precoder and summarize."""
    t0 = time.perf_counter()
    phys = dipole.PhysicalConfig(wavelength=config.wavelength)
    geom = build_geometry(config)
    r_l = network.loss_resistance_from_efficiency(config.efficiency)
    sys = network.assemble(geom, phys, r_l=r_l)
    if not config.ue_coupling:
        sys = sys.without_ue_coupling()
    chan = network.build_channel(sys, scattering=config.scattering)

    cons = config.constraints
    if config.precoder.method == "wmmse":
        sol, _ = precoding.wmmse(
            chan.H,
            chan.R_P,
            r_l,
            cons,
            max_iter=config.precoder.max_iter,
            tol=config.precoder.tol,
        )
    else:
        sol = precoding.mf_dual(chan.H, chan.R_P, r_l, cons.P_R, cons.P_L)

    rep = precoding.metrics(chan.H, sol.B, chan.R_P, r_l, cons.sigma2, z0=sys.z0)
    return ResultRow(
        params=dict(params or {}),
        n_lis=geom.n_lis,
        n_ue=geom.n_ue,
        sum_capacity=rep.sum_capacity,
        min_sinr=float(np.min(rep.sinr)),
        max_sinr=float(np.max(rep.sinr)),
        P_t=rep.P_t,
        P_l=rep.P_l,
        received_power=float(np.sum(rep.per_ue_rx_power)),
        reference_aperture_power=cons.P_R * APERTURE_FRACTION,
        wall_time=time.perf_counter() - t0,
    )


SWEEP_PARAMETERS = ("users", "elements_per_axis", "efficiency", "spacing")


def apply_parameter(config: ScenarioConfig, name: str, value) -> ScenarioConfig:
    """Return a copy of ``config`` with one sweepable parameter replaced."""
    if name == "users":
        if not isinstance(config.ue, UELineSpec):
            raise ConfigError("'users' sweep requires a ue line spec")
        return replace(config, ue=replace(config.ue, count=int(value)))
    if name == "elements_per_axis":
        v = int(value)
        if isinstance(config.array, LinearArraySpec):
            return replace(config, array=replace(config.array, count=v))
        return replace(config, array=replace(config.array, count_y=v, count_z=v))
    if name == "efficiency":
        return replace(config, efficiency=float(value))
    if name == "spacing":
        d = float(value)
        if d <= 0:
            raise ConfigError(f"spacing must be positive, got {d}")
        if isinstance(config.array, LinearArraySpec):
            return replace(config, array=replace(config.array, count=round(config.array.length / d) + 1))
        a = config.array
        return replace(
            config,
            array=replace(a, count_y=round(a.len_y / d) + 1, count_z=round(a.len_z / d) + 1),
        )
    raise ConfigError(f"unknown sweep parameter {name!r}; choose from {SWEEP_PARAMETERS}")


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    base: ScenarioConfig

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ConfigError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ConfigError("sweep value list is empty")


def _run_point(config: ScenarioConfig, params: dict) -> ResultRow:
    t0 = time.perf_counter()
    try:
        return run(config, params=params)
    except Exception as exc:  # failed points become error rows, the sweep continues
        return ResultRow(params=dict(params), error=str(exc), wall_time=time.perf_counter() - t0)


def run_points(points: list[tuple[ScenarioConfig, dict]], threads: int = 1) -> list[ResultRow]:
    """Run (config, params) pairs, optionally in parallel, preserving order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda p: _run_point(*p), points))
    return [_run_point(cfg, params) for cfg, params in points]


def sweep(spec: SweepSpec, threads: int = 1) -> list[ResultRow]:
    points = []
    for v in spec.values:
        params = {spec.parameter: v}
        try:
            points.append((apply_parameter(spec.base, spec.parameter, v), params))
        except ConfigError:
            raise
    return run_points(points, threads=threads)


def fig2_points() -> list[tuple[ScenarioConfig, dict]]:
    """WMMSE sum-capacity sweep: users 1..33 for four (spacing, efficiency)
    combinations, each with UE coupling on and off."""
    base = ScenarioConfig(
        array=LinearArraySpec(length=4.0, count=9),
        ue=UELineSpec(distance_x=20.0, length=10.0, count=1),
        efficiency=1.0,
        constraints=Constraints(P_R=1.0, P_L=1.0, sigma2=1e-4),
        precoder=PrecoderSpec(method="wmmse", max_iter=1000, tol=1e-8),
    )
    points = []
    for spacing, e_r in ((0.5, 1.0), (0.1, 1.0), (0.1, 0.8), (0.5, 0.8)):
        count = round(4.0 / spacing) + 1
        for coupling in (True, False):
            for m in range(1, 34):
                cfg = replace(
                    base,
                    array=replace(base.array, count=count),
                    efficiency=e_r,
                    ue_coupling=coupling,
                    ue=replace(base.ue, count=m),
                )
                points.append(
                    (cfg, {"spacing": spacing, "efficiency": e_r, "ue_coupling": coupling, "users": m})
                )
    return points


FIG3_GRID_COUNTS = tuple(range(3, 42, 2))
FIG3_EFFICIENCIES = (0.8, 0.99, 1.0)


def fig3_points() -> list[tuple[ScenarioConfig, dict]]:
    """MF received-power sweep over grid density for three efficiencies, plus
    the lossless no-scattering curve that breaks energy conservation."""
    base = ScenarioConfig(
        array=PlanarArraySpec(len_y=4.0, len_z=4.0, count_y=3, count_z=3),
        ue=UELineSpec(distance_x=2.0, length=0.0, count=1),
        efficiency=1.0,
        constraints=Constraints(P_R=1.0, P_L=1.0, sigma2=1e-4),
        precoder=PrecoderSpec(method="mf-dual"),
    )
    curves = [(e_r, True) for e_r in FIG3_EFFICIENCIES] + [(1.0, False)]
    points = []
    for e_r, scattering in curves:
        for c in FIG3_GRID_COUNTS:
            cfg = replace(
                base,
                array=replace(base.array, count_y=c, count_z=c),
                efficiency=e_r,
                scattering=scattering,
            )
            points.append(
                (cfg, {"efficiency": e_r, "scattering": scattering, "elements_per_axis": c})
            )
    return points
