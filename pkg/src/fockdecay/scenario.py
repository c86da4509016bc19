"""Declarative scenario configs (JSON, schema_version 1) and batch runs.

A scenario names the modes, an optional mixing block (the mixing angle may
be a list, producing one output set per angle), an initial state, a time
grid, the computation routes to run, and the observables to record.  Runs
emit one CSV per (route, observable) plus a line-oriented key=value
manifest recording the config echo and the cross-route deviations.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .channel import build_decay_model, evolve_state, expectation
from .flavour import MixingParams, build_flavour_observables, build_mixed_model
from .fock import (
    DensityOperator,
    FockSpace,
    ModeSpec,
    Statistics,
    TruncationError,
    coherent_state,
    number_state,
    poisson_mixture,
)
from .heisenberg import evolve_quadratic
from .master import build_generator, default_step, integrate

ROUTES = ("kraus", "ode", "heisenberg")
OBSERVABLES = ("N", "S", "Qplus", "Qminus", "occupations")
WEIGHT_SUM_TOL = 1e-12
SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Config rejection with a machine-readable code and a JSON-path."""

    def __init__(self, code: str, message: str, category: str = "invariant", path: str = "$"):
        super().__init__(f"{code} at {path}: {message}")
        self.code = code
        self.category = category  # "json" | "schema" | "invariant"
        self.path = path


@dataclass(frozen=True)
class TimeGrid:
    start: float
    stop: float
    count: int

    def times(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class InitialStateSpec:
    kind: str
    occupations: tuple[int, ...] | None = None
    mode: int | None = None
    alpha: complex | None = None
    nbar: float | None = None
    components: tuple[tuple[float, tuple[int, ...]], ...] | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    modes: tuple[ModeSpec, ...]
    mixing: tuple[MixingParams, ...] | None
    initial_state: InitialStateSpec
    time_grid: TimeGrid
    routes: tuple[str, ...]
    observables: tuple[str, ...]
    output_path: str
    ode_step: float | None = None


@dataclass
class RunResult:
    exit_code: int
    csv_paths: list[Path]
    manifest_path: Path
    max_deviation: float


# ---------------------------------------------------------------------------
# parsing

def _require(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError("CONFIG_FIELD_MISSING", f"missing field '{key}'", "schema", path)
    return obj[key]


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("CONFIG_FIELD_TYPE", f"expected a number, got {value!r}", "schema", path)
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("CONFIG_FIELD_TYPE", f"expected an integer, got {value!r}", "schema", path)
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError("CONFIG_FIELD_TYPE", f"expected a string, got {value!r}", "schema", path)
    return value


def _as_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError("CONFIG_FIELD_TYPE", f"expected an object, got {value!r}", "schema", path)
    return value


def _as_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ConfigError("CONFIG_FIELD_TYPE", f"expected an array, got {value!r}", "schema", path)
    return value


def _parse_mode(entry, path: str) -> ModeSpec:
    entry = _as_dict(entry, path)
    stat = _as_str(_require(entry, "statistics", path), f"{path}.statistics")
    try:
        statistics = Statistics(stat)
    except ValueError:
        raise ConfigError(
            "CONFIG_STATISTICS_UNKNOWN", f"unknown statistics {stat!r}", "invariant",
            f"{path}.statistics",
        ) from None
    mass = _as_number(_require(entry, "mass", path), f"{path}.mass")
    width = _as_number(_require(entry, "width", path), f"{path}.width")
    if width < 0:
        raise ConfigError("CONFIG_WIDTH_NEGATIVE", f"width {width} < 0", "invariant", f"{path}.width")
    cutoff = _as_int(_require(entry, "cutoff", path), f"{path}.cutoff")
    if cutoff < 0:
        raise ConfigError("CONFIG_CUTOFF_NEGATIVE", f"cutoff {cutoff} < 0", "invariant", f"{path}.cutoff")
    return ModeSpec(statistics=statistics, mass=mass, width=width, cutoff=cutoff)


def _parse_occupations(value, n_modes: int, modes, path: str) -> tuple[int, ...]:
    occ = tuple(_as_int(v, f"{path}[{i}]") for i, v in enumerate(_as_list(value, path)))
    if len(occ) != n_modes:
        raise ConfigError(
            "CONFIG_INITIAL_STATE", f"expected {n_modes} occupations, got {len(occ)}",
            "invariant", path,
        )
    for i, (n, m) in enumerate(zip(occ, modes)):
        if n < 0 or n > m.cutoff:
            raise ConfigError(
                "CONFIG_OCCUPATION_EXCEEDS_CUTOFF",
                f"occupation {n} outside 0..{m.cutoff}", "invariant", f"{path}[{i}]",
            )
    return occ


def _parse_initial_state(entry, modes, path: str) -> InitialStateSpec:
    entry = _as_dict(entry, path)
    kind = _as_str(_require(entry, "type", path), f"{path}.type")
    n_modes = len(modes)
    if kind == "number":
        occ = _parse_occupations(_require(entry, "occupations", path), n_modes, modes, f"{path}.occupations")
        return InitialStateSpec(kind="number", occupations=occ)
    if kind in ("coherent", "poisson"):
        mode = _as_int(_require(entry, "mode", path), f"{path}.mode")
        if not 1 <= mode <= n_modes:
            raise ConfigError("CONFIG_INITIAL_STATE", f"mode {mode} out of range 1..{n_modes}",
                              "invariant", f"{path}.mode")
        if modes[mode - 1].is_fermion:
            raise ConfigError("CONFIG_INITIAL_STATE", f"mode {mode} is fermionic",
                              "invariant", f"{path}.mode")
        if kind == "coherent":
            raw = _require(entry, "alpha", path)
            if isinstance(raw, list):
                if len(raw) != 2:
                    raise ConfigError("CONFIG_FIELD_TYPE", "alpha array must be [re, im]",
                                      "schema", f"{path}.alpha")
                alpha = complex(_as_number(raw[0], f"{path}.alpha[0]"),
                                _as_number(raw[1], f"{path}.alpha[1]"))
            else:
                alpha = complex(_as_number(raw, f"{path}.alpha"), 0.0)
            return InitialStateSpec(kind="coherent", mode=mode, alpha=alpha)
        nbar = _as_number(_require(entry, "nbar", path), f"{path}.nbar")
        if nbar < 0:
            raise ConfigError("CONFIG_INITIAL_STATE", f"nbar {nbar} < 0", "invariant", f"{path}.nbar")
        return InitialStateSpec(kind="poisson", mode=mode, nbar=nbar)
    if kind == "mixture":
        comps = []
        raw = _as_list(_require(entry, "components", path), f"{path}.components")
        if not raw:
            raise ConfigError("CONFIG_INITIAL_STATE", "mixture needs at least one component",
                              "invariant", f"{path}.components")
        for i, item in enumerate(raw):
            item = _as_dict(item, f"{path}.components[{i}]")
            w = _as_number(_require(item, "weight", f"{path}.components[{i}]"),
                           f"{path}.components[{i}].weight")
            occ = _parse_occupations(_require(item, "occupations", f"{path}.components[{i}]"),
                                     n_modes, modes, f"{path}.components[{i}].occupations")
            comps.append((w, occ))
        if any(w < 0 for w, _ in comps):
            raise ConfigError("CONFIG_MIXTURE_WEIGHTS", "weights must be >= 0",
                              "invariant", f"{path}.components")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ConfigError("CONFIG_MIXTURE_WEIGHTS", f"weights sum to {total!r}, not 1",
                              "invariant", f"{path}.components")
        return InitialStateSpec(kind="mixture", components=tuple(comps))
    raise ConfigError("CONFIG_INITIAL_STATE", f"unknown state type {kind!r}", "invariant", f"{path}.type")


def _parse_mixing(entry, modes, path: str) -> tuple[MixingParams, ...]:
    entry = _as_dict(entry, path)
    if len(modes) != 2:
        raise ConfigError("CONFIG_MIXING_MODES", f"mixing needs exactly 2 modes, got {len(modes)}",
                          "invariant", path)
    if modes[0].statistics is not modes[1].statistics:
        raise ConfigError("CONFIG_MIXING_MODES", "mixing needs both modes to share one statistics",
                          "invariant", path)
    if modes[0].cutoff != modes[1].cutoff:
        raise ConfigError("CONFIG_MIXING_MODES",
                          f"mixing needs equal cutoffs, got {modes[0].cutoff} and {modes[1].cutoff}",
                          "invariant", path)
    raw_theta = _require(entry, "theta", path)
    if isinstance(raw_theta, list):
        if not raw_theta:
            raise ConfigError("CONFIG_MIXING_MODES", "theta sweep must not be empty", "invariant",
                              f"{path}.theta")
        thetas = [_as_number(v, f"{path}.theta[{i}]") for i, v in enumerate(raw_theta)]
    else:
        thetas = [_as_number(raw_theta, f"{path}.theta")]
    phi = _as_number(entry.get("phi", 0.0), f"{path}.phi")
    psi = _as_number(entry.get("psi", 0.0), f"{path}.psi")
    chi = _as_number(entry.get("chi", 0.0), f"{path}.chi")
    return tuple(MixingParams(theta=t, phi=phi, psi=psi, chi=chi) for t in thetas)


def parse_config(text: str, default_name: str = "scenario") -> ScenarioConfig:
    """Parse and validate a JSON scenario document."""
    try:
        root = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("CONFIG_JSON_MALFORMED", str(exc), "json") from None
    root = _as_dict(root, "$")
    version = _require(root, "schema_version", "$")
    if version != SCHEMA_VERSION:
        raise ConfigError("CONFIG_SCHEMA_VERSION", f"unsupported schema_version {version!r}",
                          "schema", "$.schema_version")

    modes_raw = _as_list(_require(root, "modes", "$"), "$.modes")
    if not modes_raw:
        raise ConfigError("CONFIG_FIELD_TYPE", "modes must not be empty", "schema", "$.modes")
    modes = tuple(_parse_mode(m, f"$.modes[{i}]") for i, m in enumerate(modes_raw))

    mixing = None
    if root.get("mixing") is not None:
        mixing = _parse_mixing(root["mixing"], modes, "$.mixing")

    initial = _parse_initial_state(_require(root, "initial_state", "$"), modes, "$.initial_state")

    grid_raw = _as_dict(_require(root, "time_grid", "$"), "$.time_grid")
    start = _as_number(_require(grid_raw, "start", "$.time_grid"), "$.time_grid.start")
    stop = _as_number(_require(grid_raw, "stop", "$.time_grid"), "$.time_grid.stop")
    count = _as_int(_require(grid_raw, "count", "$.time_grid"), "$.time_grid.count")
    if start < 0 or stop < start or count < 1:
        raise ConfigError("CONFIG_TIME_GRID_INVALID",
                          f"need 0 <= start <= stop and count >= 1, got ({start}, {stop}, {count})",
                          "invariant", "$.time_grid")
    grid = TimeGrid(start=start, stop=stop, count=count)

    routes_raw = _as_list(_require(root, "routes", "$"), "$.routes")
    if not routes_raw:
        raise ConfigError("CONFIG_ROUTES_EMPTY", "at least one route is required", "invariant", "$.routes")
    routes = tuple(_as_str(r, f"$.routes[{i}]") for i, r in enumerate(routes_raw))
    for i, r in enumerate(routes):
        if r not in ROUTES:
            raise ConfigError("CONFIG_ROUTE_UNKNOWN", f"unknown route {r!r}", "invariant", f"$.routes[{i}]")

    obs_raw = _as_list(_require(root, "observables", "$"), "$.observables")
    if not obs_raw:
        raise ConfigError("CONFIG_OBSERVABLES_EMPTY", "at least one observable is required",
                          "invariant", "$.observables")
    observables = tuple(_as_str(o, f"$.observables[{i}]") for i, o in enumerate(obs_raw))
    for i, o in enumerate(observables):
        if o not in OBSERVABLES:
            raise ConfigError("CONFIG_OBSERVABLE_UNKNOWN", f"unknown observable {o!r}",
                              "invariant", f"$.observables[{i}]")
        if o in ("S", "Qplus", "Qminus") and len(modes) != 2:
            raise ConfigError("CONFIG_OBSERVABLE_MODES",
                              f"observable {o} needs exactly 2 modes, got {len(modes)}",
                              "invariant", f"$.observables[{i}]")
    if "occupations" in observables and not ({"kraus", "ode"} & set(routes)):
        raise ConfigError("CONFIG_OBSERVABLE_ROUTE",
                          "occupations need the kraus or ode route", "invariant", "$.observables")

    if mixing is not None and initial.occupations is not None:
        common = modes[0].cutoff
        if sum(initial.occupations) > common:
            raise ConfigError("CONFIG_SUPPORT_EXCEEDS_CUTOFF",
                              f"total occupation {sum(initial.occupations)} exceeds the mixing-exact "
                              f"bound {common}", "invariant", "$.initial_state.occupations")
    if mixing is not None and initial.components is not None:
        common = modes[0].cutoff
        for i, (_, occ) in enumerate(initial.components):
            if sum(occ) > common:
                raise ConfigError("CONFIG_SUPPORT_EXCEEDS_CUTOFF",
                                  f"total occupation {sum(occ)} exceeds the mixing-exact bound {common}",
                                  "invariant", f"$.initial_state.components[{i}]")

    ode_step = None
    if root.get("ode_step") is not None:
        ode_step = _as_number(root["ode_step"], "$.ode_step")
        if ode_step <= 0:
            raise ConfigError("CONFIG_ODE_STEP_INVALID", f"ode_step {ode_step} <= 0",
                              "invariant", "$.ode_step")

    name = _as_str(root.get("name", default_name), "$.name")
    output_path = _as_str(_require(root, "output_path", "$"), "$.output_path")
    return ScenarioConfig(
        name=name,
        modes=modes,
        mixing=mixing,
        initial_state=initial,
        time_grid=grid,
        routes=routes,
        observables=observables,
        output_path=output_path,
        ode_step=ode_step,
    )


def load_config(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    return parse_config(p.read_text(encoding="utf-8"), default_name=p.stem)


def config_to_json(cfg: ScenarioConfig) -> str:
    """Canonical (sorted, compact) JSON form; parse_config round-trips it."""
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "name": cfg.name,
        "modes": [
            {"statistics": m.statistics.value, "mass": m.mass, "width": m.width, "cutoff": m.cutoff}
            for m in cfg.modes
        ],
        "initial_state": _state_to_json(cfg.initial_state),
        "time_grid": {"start": cfg.time_grid.start, "stop": cfg.time_grid.stop,
                      "count": cfg.time_grid.count},
        "routes": list(cfg.routes),
        "observables": list(cfg.observables),
        "output_path": cfg.output_path,
    }
    if cfg.mixing is not None:
        first = cfg.mixing[0]
        thetas = [m.theta for m in cfg.mixing]
        doc["mixing"] = {
            "theta": thetas if len(thetas) > 1 else thetas[0],
            "phi": first.phi, "psi": first.psi, "chi": first.chi,
        }
    else:
        doc["mixing"] = None
    if cfg.ode_step is not None:
        doc["ode_step"] = cfg.ode_step
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _state_to_json(state: InitialStateSpec) -> dict:
    if state.kind == "number":
        return {"type": "number", "occupations": list(state.occupations)}
    if state.kind == "coherent":
        return {"type": "coherent", "mode": state.mode,
                "alpha": [state.alpha.real, state.alpha.imag]}
    if state.kind == "poisson":
        return {"type": "poisson", "mode": state.mode, "nbar": state.nbar}
    return {"type": "mixture",
            "components": [{"weight": w, "occupations": list(occ)} for w, occ in state.components]}


# ---------------------------------------------------------------------------
# run machinery

def build_space(cfg: ScenarioConfig) -> FockSpace:
    return FockSpace(cfg.modes)


def build_initial_state(cfg: ScenarioConfig, space: FockSpace) -> DensityOperator:
    state = cfg.initial_state
    try:
        if state.kind == "number":
            return number_state(space, state.occupations)
        if state.kind == "coherent":
            return coherent_state(space, state.mode, state.alpha)
        if state.kind == "poisson":
            return poisson_mixture(space, state.mode, state.nbar)
        mat = np.zeros((space.dimension, space.dimension), dtype=complex)
        for w, occ in state.components:
            mat[space.index_of(occ), space.index_of(occ)] += w
        return DensityOperator(space, mat)
    except TruncationError as exc:
        raise ConfigError("CONFIG_STATE_TAIL", str(exc), "invariant", "$.initial_state") from exc


def validate_config(cfg: ScenarioConfig) -> None:
    """Beyond parsing: actually construct the space and the initial state."""
    build_initial_state(cfg, build_space(cfg))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _quadratic_omegas(cfg: ScenarioConfig, phi: float) -> dict[str, np.ndarray]:
    r = len(cfg.modes)
    out = {"N": np.eye(r, dtype=complex)}
    if r == 2:
        out["S"] = np.diag([1.0, -1.0]).astype(complex)
        cross = np.zeros((2, 2), dtype=complex)
        cross[0, 1] = np.exp(1j * phi)
        out["Qplus"] = cross + cross.conj().T
        out["Qminus"] = 1j * (cross - cross.conj().T)
    return out


def run_scenario(
    cfg: ScenarioConfig,
    out_dir: str | Path | None = None,
    routes: Sequence[str] | None = None,
    seed: int | None = None,
) -> RunResult:
    """Run every requested route and write CSV series plus a manifest.

    ``seed`` is accepted for interface stability; all shipped routes are
    deterministic and ignore it.
    """
    if routes is not None:
        routes = tuple(routes)
        for r in routes:
            if r not in ROUTES:
                raise ConfigError("CONFIG_ROUTE_UNKNOWN", f"unknown route {r!r}", "invariant", "--routes")
    else:
        routes = cfg.routes

    out = Path(out_dir) if out_dir is not None else Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)

    space = build_space(cfg)
    rho0 = build_initial_state(cfg, space)
    times = cfg.time_grid.times()
    mixed = cfg.mixing is not None
    gamma_bar = sum(m.width for m in cfg.modes) / len(cfg.modes) if mixed else None
    t_scaled = times * gamma_bar if mixed else times
    phi = cfg.mixing[0].phi if mixed else 0.0

    scalar_obs = [o for o in cfg.observables if o != "occupations"]
    want_occupations = "occupations" in cfg.observables
    obs_matrices = {}
    if scalar_obs:
        if space.n_modes == 2:
            flav = build_flavour_observables(space, phi)
            obs_matrices = {k: flav[k] for k in scalar_obs}
        else:
            from .fock import build_total_number

            obs_matrices = {"N": build_total_number(space)}
    omegas = _quadratic_omegas(cfg, phi)

    sweep: list[MixingParams | None] = list(cfg.mixing) if mixed else [None]
    csv_paths: list[Path] = []
    skipped: list[str] = []
    deviation_lines: list[str] = []
    max_dev = 0.0

    for ti, mix in enumerate(sweep):
        tag = f"__theta{ti}" if mixed and len(sweep) > 1 else ""
        if mix is None:
            model = build_decay_model(space)
        else:
            model = build_mixed_model(
                space, mix,
                masses=(cfg.modes[0].mass, cfg.modes[1].mass),
                widths=(cfg.modes[0].width, cfg.modes[1].width),
            )

        scalar_series: dict[tuple[str, str], np.ndarray] = {}
        occ_series: dict[str, np.ndarray] = {}
        for route in routes:
            if route in ("kraus", "ode"):
                if route == "kraus":
                    states = evolve_state(model, rho0, times)
                else:
                    step = cfg.ode_step if cfg.ode_step is not None else _grid_step(model, times)
                    try:
                        states = integrate(build_generator(model), rho0, times, step)
                    except ValueError as exc:
                        raise ConfigError("CONFIG_TIME_GRID_STEP", str(exc), "invariant",
                                          "$.time_grid") from exc
                for name in scalar_obs:
                    scalar_series[(route, name)] = np.array(
                        [expectation(s, obs_matrices[name]) for s in states]
                    )
                if want_occupations:
                    occ_series[route] = np.array([s.diagonal() for s in states])
            else:  # heisenberg: observable-side closed forms
                for name in scalar_obs:
                    evolved = [evolve_quadratic(model, omegas[name], float(t)) for t in times]
                    scalar_series[(route, name)] = np.array(
                        [expectation(rho0, om) for om in evolved]
                    )
                if want_occupations:
                    skipped.append(f"{route}:occupations=unsupported")

        for name in scalar_obs:
            for route in routes:
                if (route, name) not in scalar_series:
                    continue
                path = out / f"{cfg.name}{tag}__{route}__{name}.csv"
                _write_csv(
                    path,
                    ["t", name, "t_raw", "route"],
                    [
                        (t_s, v, t_r, route)
                        for t_s, v, t_r in zip(t_scaled, scalar_series[(route, name)], times)
                    ],
                )
                csv_paths.append(path)
        if want_occupations:
            labels = ["p_" + "_".join(str(n) for n in occ) for occ in space.occupations]
            for route, table in occ_series.items():
                path = out / f"{cfg.name}{tag}__{route}__occupations.csv"
                rows = [
                    (t_s, *row, t_r, route)
                    for t_s, row, t_r in zip(t_scaled, table, times)
                ]
                _write_csv(path, ["t", *labels, "t_raw", "route"], rows)
                csv_paths.append(path)

        theta_key = f"theta={ti}" if mixed and len(sweep) > 1 else "theta=-"
        for name in scalar_obs:
            for i, ra in enumerate(routes):
                for rb in routes[i + 1:]:
                    if (ra, name) in scalar_series and (rb, name) in scalar_series:
                        dev = float(np.max(np.abs(
                            scalar_series[(ra, name)] - scalar_series[(rb, name)]
                        )))
                        max_dev = max(max_dev, dev)
                        deviation_lines.append(
                            f"cross_route_max_deviation[{name}][{ra}|{rb}][{theta_key}]={_fmt(dev)}"
                        )
        if want_occupations:
            occ_routes = sorted(occ_series)
            for i, ra in enumerate(occ_routes):
                for rb in occ_routes[i + 1:]:
                    dev = float(np.max(np.abs(occ_series[ra] - occ_series[rb])))
                    max_dev = max(max_dev, dev)
                    deviation_lines.append(
                        f"cross_route_max_deviation[occupations][{ra}|{rb}][{theta_key}]={_fmt(dev)}"
                    )

    manifest_path = out / f"{cfg.name}__manifest.txt"
    lines = [
        f"schema_version={SCHEMA_VERSION}",
        "library=fockdecay",
        f"library_version={__version__}",
        f"scenario={cfg.name}",
        f"timestamp={datetime.now(timezone.utc).isoformat()}",
        f"seed={'none' if seed is None else seed}",
        f"time_unit={'inverse_mean_width' if mixed else 'raw'}",
        f"mean_width={'none' if gamma_bar is None else _fmt(gamma_bar)}",
        f"theta_count={len(sweep) if mixed else 0}",
        f"routes={','.join(routes)}",
        f"observables={','.join(cfg.observables)}",
        f"config={config_to_json(cfg)}",
    ]
    lines.extend(f"file={p.name}" for p in sorted(csv_paths))
    lines.extend(f"skipped={s}" for s in sorted(set(skipped)))
    lines.extend(deviation_lines)
    lines.append(f"max_cross_route_deviation={_fmt(max_dev)}")
    lines.append("status=ok")
    manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    return RunResult(
        exit_code=0,
        csv_paths=sorted(csv_paths),
        manifest_path=manifest_path,
        max_deviation=max_dev,
    )


def _grid_step(model, times: np.ndarray) -> float:
    """Largest step <= the default that divides the grid spacing evenly."""
    base = default_step(model)
    if len(times) < 2:
        return base
    spacing = float(times[1] - times[0])
    if spacing <= 0:
        return base
    return spacing / math.ceil(spacing / base)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else _fmt(c) for c in row) + "\n")
