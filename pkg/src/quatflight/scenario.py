"""Configuration-driven scenario running: load, validate, propagate, report.

A scenario is one YAML file holding the central-body constants, atmosphere,
aerodynamic and vehicle parameters, an initial state in any supported form,
piecewise-linear control profiles, integrator settings, and stop
conditions.  Running it propagates the same physical initial condition in
each selected parameterization, writes one CSV per parameterization, and
(optionally) a comparison report built by converting every sample to
observation-frame coordinates on a shared time grid.

All physical quantities are SI; angles are radians.
"""

from __future__ import annotations

import csv
import importlib.resources
import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .controls import BANK_MODES, ControlProfile, PiecewiseLinear
from .dynamics import PARAMETERIZATIONS, sample_diagnostics
from .environment import AeroModel, Atmosphere, CentralBody, Environment, Vehicle
from .errors import ConfigError, PropagationError, SingularityError
from .propagation import IntegratorConfig, StopEvent, Trajectory, propagate
from .quat import UnitQuaternion, renormalize
from .states import (
    CartesianState,
    RvhState,
    RvState,
    SphericalState,
    rv_to_cartesian,
    rvh_to_cartesian,
    spherical_to_cartesian,
)

OUTPUT_DIR_ENV_VAR = "QUATFLIGHT_OUTPUT_DIR"

CSV_COLUMNS = [
    "t",
    "r",
    "v",
    "eps_a1",
    "eps_a2",
    "eps_a3",
    "eta_a",
    "eps_b1",
    "eps_b2",
    "eps_b3",
    "eta_b",
    "x",
    "y",
    "z",
    "vx",
    "vy",
    "vz",
    "alpha",
    "sigma",
    "beta",
    "h_mag",
    "energy",
    "norm_qa",
    "norm_qb",
]


@dataclass
class StopConditions:
    t_final: float
    radius: Optional[float] = None
    expected_guards: tuple = ()


@dataclass
class InitialState:
    """Initial condition in its native form plus the name of that form."""

    kind: str
    values: dict


@dataclass
class ScenarioConfig:
    name: str
    body: CentralBody
    atmosphere: Atmosphere
    aero: AeroModel
    vehicle: Vehicle
    initial_state: InitialState
    controls: ControlProfile
    integrator: IntegratorConfig
    stop: StopConditions
    parameterizations: tuple
    t0: float = 0.0
    compare_points: int = 101
    csv_stride: int = 1

    @property
    def environment(self) -> Environment:
        return Environment(
            body=self.body,
            atmosphere=self.atmosphere,
            aero=self.aero,
            vehicle=self.vehicle,
        )


@dataclass(eq=False)
class RunResult:
    """Outcome of one parameterization's propagation."""

    name: str
    trajectory: Optional[Trajectory]
    event: StopEvent
    csv_path: Optional[str] = None

    @property
    def guard_tripped(self) -> bool:
        return self.event.kind == "singularity_guard"


class _Validator:
    """Collects field-level error messages while walking the config tree."""

    def __init__(self):
        self.errors = []

    def fail(self, path, message):
        self.errors.append(f"{path}: {message}")

    def section(self, data, path, required=True):
        value = data.get(path.split(".")[-1]) if isinstance(data, dict) else None
        if value is None:
            if required:
                self.fail(path, "missing section")
            return {}
        if not isinstance(value, dict):
            self.fail(path, "must be a mapping")
            return {}
        return value

    def number(self, data, key, path, default=None, minimum=None, exclusive=False):
        if key not in data:
            if default is None:
                self.fail(f"{path}.{key}", "missing required value")
                return 0.0
            return default
        raw = data[key]
        if not isinstance(raw, (int, float)) or isinstance(raw, bool):
            self.fail(f"{path}.{key}", f"must be a number, got {raw!r}")
            return 0.0
        value = float(raw)
        if minimum is not None:
            if exclusive and value <= minimum:
                self.fail(f"{path}.{key}", f"must be > {minimum}, got {value}")
            elif not exclusive and value < minimum:
                self.fail(f"{path}.{key}", f"must be >= {minimum}, got {value}")
        return value

    def vector(self, data, key, path, length):
        raw = data.get(key)
        if raw is None:
            self.fail(f"{path}.{key}", "missing required value")
            return [0.0] * length
        if not isinstance(raw, (list, tuple)) or len(raw) != length:
            self.fail(f"{path}.{key}", f"must be a {length}-vector")
            return [0.0] * length
        try:
            return [float(x) for x in raw]
        except (TypeError, ValueError):
            self.fail(f"{path}.{key}", "entries must be numbers")
            return [0.0] * length


def _parse_profile(validator, data, key, path, default=0.0):
    raw = data.get(key)
    if raw is None:
        return PiecewiseLinear.constant(default)
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return PiecewiseLinear.constant(float(raw))
    if not isinstance(raw, dict) or "times" not in raw or "values" not in raw:
        validator.fail(f"{path}.{key}", "must be a number or {times, values} mapping")
        return PiecewiseLinear.constant(default)
    try:
        return PiecewiseLinear(raw["times"], raw["values"])
    except (TypeError, ValueError) as exc:
        validator.fail(f"{path}.{key}", str(exc))
        return PiecewiseLinear.constant(default)


def parse_config(data: dict, name_hint: str = "scenario") -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a raw mapping.

    Raises
    ------
    ConfigError
        With one message per offending field.
    """
    if not isinstance(data, dict):
        raise ConfigError(["top level: must be a mapping"])
    v = _Validator()

    name = data.get("name", name_hint)
    if not isinstance(name, str) or not name:
        v.fail("name", "must be a non-empty string")
        name = name_hint

    sec = v.section(data, "body")
    body = None
    mu = v.number(sec, "mu", "body", minimum=0.0, exclusive=True)
    radius = v.number(sec, "radius", "body", minimum=0.0, exclusive=True)
    spin = v.number(sec, "spin_rate", "body", default=0.0, minimum=0.0)
    if not v.errors:
        body = CentralBody(mu=mu, radius=radius, spin_rate=spin)

    sec = v.section(data, "atmosphere")
    rho0 = v.number(sec, "rho0", "atmosphere", default=0.0, minimum=0.0)
    hs = v.number(sec, "scale_height", "atmosphere", default=8500.0, minimum=0.0, exclusive=True)
    atmosphere = Atmosphere(rho0=rho0, scale_height=hs) if not v.errors else None

    sec = v.section(data, "aero")
    s_ref = v.number(sec, "S", "aero", minimum=0.0, exclusive=True)
    cl_alpha = v.number(sec, "CL_alpha", "aero", default=0.0)
    cd0 = v.number(sec, "CD0", "aero", default=0.0, minimum=0.0)
    k = v.number(sec, "K", "aero", default=0.0, minimum=0.0)
    aero = AeroModel(s=s_ref, cl_alpha=cl_alpha, cd0=cd0, k=k) if not v.errors else None

    sec = v.section(data, "vehicle")
    mass = v.number(sec, "mass", "vehicle", minimum=0.0, exclusive=True)
    thrust = v.number(sec, "thrust", "vehicle", default=0.0, minimum=0.0)
    delta = v.number(sec, "thrust_offset", "vehicle", default=0.0)
    vehicle = Vehicle(mass=mass, thrust=thrust, thrust_offset=delta) if not v.errors else None

    init = _parse_initial_state(v, data)
    controls = _parse_controls(v, data)
    integrator = _parse_integrator(v, data)
    stop = _parse_stop(v, data)
    params = _parse_parameterizations(v, data)

    t0 = v.number(data, "t0", "", default=0.0)
    compare_points = int(v.number(data, "compare_points", "", default=101.0, minimum=2.0))
    csv_stride = int(v.number(data, "csv_stride", "", default=1.0, minimum=1.0))

    if v.errors:
        raise ConfigError(v.errors)
    config = ScenarioConfig(
        name=name,
        body=body,
        atmosphere=atmosphere,
        aero=aero,
        vehicle=vehicle,
        initial_state=init,
        controls=controls,
        integrator=integrator,
        stop=stop,
        parameterizations=params,
        t0=t0,
        compare_points=compare_points,
        csv_stride=csv_stride,
    )
    # constructing the native state surfaces unit-norm and degeneracy errors
    try:
        build_native_state(config)
    except (ValueError, SingularityError) as exc:
        raise ConfigError([f"initial_state: {exc}"]) from exc
    return config


def _parse_initial_state(v, data):
    sec = v.section(data, "initial_state")
    kind = sec.get("kind")
    if kind not in ("rv", "rvh", "spherical", "cartesian"):
        v.fail("initial_state.kind", f"must be rv, rvh, spherical, or cartesian, got {kind!r}")
        return InitialState(kind="cartesian", values={})
    values = {}
    if kind == "rv":
        values["r"] = v.number(sec, "r", "initial_state", minimum=0.0, exclusive=True)
        values["v"] = v.number(sec, "v", "initial_state", minimum=0.0, exclusive=True)
        values["eps_a"] = v.vector(sec, "eps_a", "initial_state", 3)
        values["eta_a"] = v.number(sec, "eta_a", "initial_state")
        values["eps_b"] = v.vector(sec, "eps_b", "initial_state", 3)
        values["eta_b"] = v.number(sec, "eta_b", "initial_state")
    elif kind == "rvh":
        values["r"] = v.number(sec, "r", "initial_state", minimum=0.0, exclusive=True)
        values["v"] = v.number(sec, "v", "initial_state", minimum=0.0, exclusive=True)
        values["eps_a"] = v.vector(sec, "eps_a", "initial_state", 3)
        values["eta_a"] = v.number(sec, "eta_a", "initial_state")
        values["eps_b3"] = v.number(sec, "eps_b3", "initial_state")
        values["eta_b"] = v.number(sec, "eta_b", "initial_state")
    elif kind == "spherical":
        for key in ("r", "lon", "lat", "v", "gamma", "psi"):
            minimum = 0.0 if key in ("r", "v") else None
            values[key] = v.number(
                sec, key, "initial_state", minimum=minimum, exclusive=True
            ) if minimum is not None else v.number(sec, key, "initial_state", default=0.0)
    else:
        values["position"] = v.vector(sec, "position", "initial_state", 3)
        values["velocity"] = v.vector(sec, "velocity", "initial_state", 3)
    return InitialState(kind=kind, values=values)


def _parse_controls(v, data):
    sec = v.section(data, "controls", required=False)
    bank_mode = sec.get("bank_mode", "sigma")
    if bank_mode not in BANK_MODES:
        v.fail("controls.bank_mode", f"must be one of {BANK_MODES}, got {bank_mode!r}")
        bank_mode = "sigma"
    return ControlProfile(
        alpha=_parse_profile(v, sec, "alpha", "controls"),
        bank=_parse_profile(v, sec, "bank", "controls"),
        wb1=_parse_profile(v, sec, "wb1", "controls"),
        thrust=_parse_profile(v, sec, "thrust", "controls"),
        bank_mode=bank_mode,
    )


def _parse_integrator(v, data):
    sec = v.section(data, "integrator", required=False)
    method = sec.get("method", "rk45-adaptive")
    if method not in ("rk4-fixed", "rk45-adaptive"):
        v.fail("integrator.method", f"unknown method {method!r}")
        method = "rk45-adaptive"
    step = v.number(sec, "step", "integrator", default=0.1, minimum=0.0, exclusive=True)
    rel = v.number(sec, "rel_tol", "integrator", default=1e-10, minimum=0.0, exclusive=True)
    abs_ = v.number(sec, "abs_tol", "integrator", default=1e-12, minimum=0.0, exclusive=True)
    renorm = sec.get("renormalize", True)
    if not isinstance(renorm, bool):
        v.fail("integrator.renormalize", "must be a boolean")
        renorm = True
    max_steps = int(v.number(sec, "max_steps", "integrator", default=2e6, minimum=1.0))
    return IntegratorConfig(
        method=method,
        step=step,
        rel_tol=rel,
        abs_tol=abs_,
        renormalize_every_step=renorm,
        max_steps=max_steps,
    )


def _parse_stop(v, data):
    sec = v.section(data, "stop")
    t_final = v.number(sec, "t_final", "stop", minimum=0.0, exclusive=True)
    radius = None
    if "radius" in sec:
        radius = v.number(sec, "radius", "stop", minimum=0.0, exclusive=True)
    guards = sec.get("expected_guards", [])
    if not isinstance(guards, list) or any(g not in PARAMETERIZATIONS for g in guards):
        v.fail("stop.expected_guards", "must be a list of parameterization names")
        guards = []
    return StopConditions(t_final=t_final, radius=radius, expected_guards=tuple(guards))


def _parse_parameterizations(v, data):
    raw = data.get("parameterizations", list(PARAMETERIZATIONS))
    if not isinstance(raw, list) or not raw:
        v.fail("parameterizations", "must be a non-empty list")
        return tuple(PARAMETERIZATIONS)
    bad = [p for p in raw if p not in PARAMETERIZATIONS]
    if bad:
        v.fail("parameterizations", f"unknown entries {bad}")
        return tuple(PARAMETERIZATIONS)
    return tuple(raw)


def load_scenario(path) -> ScenarioConfig:
    """Load and validate a scenario YAML file."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError([f"{path}: {exc}"]) from exc
    return parse_config(data, name_hint=path.stem)


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a scenario shipped with the package."""
    resource = importlib.resources.files("quatflight") / "scenarios" / f"{name}.yaml"
    return Path(str(resource))


def build_native_state(config: ScenarioConfig):
    """The initial state in its native form, unmodified from the file values."""
    kind = config.initial_state.kind
    vals = config.initial_state.values
    if kind == "rv":
        qa = _quat_from_values(vals["eps_a"], vals["eta_a"])
        qb = _quat_from_values(vals["eps_b"], vals["eta_b"])
        return RvState(r=vals["r"], qa=qa, v=vals["v"], qb=qb)
    if kind == "rvh":
        qa = _quat_from_values(vals["eps_a"], vals["eta_a"])
        return RvhState(
            r=vals["r"], qa=qa, v=vals["v"], eps_b3=vals["eps_b3"], eta_b=vals["eta_b"]
        )
    if kind == "spherical":
        return SphericalState(**vals)
    return CartesianState(np.array(vals["position"]), np.array(vals["velocity"]))


def _quat_from_values(eps, eta):
    q = np.array([eps[0], eps[1], eps[2], eta], dtype=float)
    n = float(np.linalg.norm(q))
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"quaternion norm {n!r} violates unit constraint")
    if abs(n - 1.0) <= 1e-12:
        # exact enough: keep the file values bit-for-bit
        return UnitQuaternion(float(q[0]), float(q[1]), float(q[2]), float(q[3]))
    return renormalize(q)


def native_to_cartesian(state) -> CartesianState:
    if isinstance(state, CartesianState):
        return state
    if isinstance(state, RvState):
        return rv_to_cartesian(state)
    if isinstance(state, RvhState):
        return rvh_to_cartesian(state)
    return spherical_to_cartesian(state)


def initial_array_for(name: str, config: ScenarioConfig):
    """Initial flat state for one parameterization.

    The native form keeps its file values bit-exactly; every other form is
    derived from the physical (Cartesian) initial condition with that
    form's gauge rule.  The lift-aligned form derived from a native rv
    state reuses the rv gauge twisted onto the initial bank command.
    """
    native = build_native_state(config)
    kind = config.initial_state.kind
    if name == kind:
        return native.to_array()
    cart = native_to_cartesian(native)
    if name == "rvl" and kind == "rv":
        from .quat import dcm_from_quat
        from .states import RvlState, twist_about_b1

        if config.controls.bank_mode == "sigma":
            twist = config.controls.bank(config.t0)
        else:
            c_ba = dcm_from_quat(native.qb)
            chi = math.atan2(c_ba[2, 0], c_ba[1, 0])
            twist = chi + config.controls.bank(config.t0)
        qb = twist_about_b1(native.qb, twist) if twist != 0.0 else native.qb
        return RvlState(r=native.r, qa=native.qa, v=native.v, qb=qb).to_array()
    spec = PARAMETERIZATIONS[name]
    return spec.from_cartesian(cart, config.controls, config.environment)


def resolve_output_dir(outdir=None) -> Path:
    """CLI flag, then the environment variable, then the working directory."""
    if outdir:
        path = Path(outdir)
    else:
        path = Path(os.environ.get(OUTPUT_DIR_ENV_VAR, "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_parameterization(name: str, config: ScenarioConfig, compare_times=()) -> RunResult:
    """Propagate one parameterization of the scenario."""
    spec = PARAMETERIZATIONS[name]
    env = config.environment
    try:
        y0 = initial_array_for(name, config)
    except SingularityError as exc:
        return RunResult(
            name=name,
            trajectory=None,
            event=StopEvent(kind="singularity_guard", t_event=config.t0, message=str(exc)),
        )
    rhs = spec.make_rhs(config.controls, env)
    breaks = set(config.controls.knot_times())
    breaks.update(compare_times)
    try:
        trajectory, event = propagate(
            rhs,
            config.t0,
            y0,
            config.stop.t_final,
            config.integrator,
            quat_spans=spec.quat_spans,
            radius_fn=spec.radius if config.stop.radius is not None else None,
            radius_target=config.stop.radius,
            t_breaks=sorted(breaks),
            scales=spec.scales,
        )
    except PropagationError as exc:
        return RunResult(
            name=name,
            trajectory=None,
            event=StopEvent(kind="step_failure", t_event=exc.t or config.t0, message=str(exc)),
        )
    return RunResult(name=name, trajectory=trajectory, event=event)


def write_trajectory_csv(path, name, trajectory, config: ScenarioConfig) -> str:
    """One row per retained sample, fixed column schema, 17 significant digits."""
    env = config.environment
    stride = config.csv_stride
    idx = list(range(0, len(trajectory), stride))
    if idx[-1] != len(trajectory) - 1:
        idx.append(len(trajectory) - 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for i in idx:
            t = float(trajectory.t[i])
            diag = sample_diagnostics(name, t, trajectory.y[i], config.controls, env)
            row = [_fmt(t)]
            for col in CSV_COLUMNS[1:]:
                row.append(_fmt(diag.get(col, float("nan"))))
            writer.writerow(row)
    return str(path)


def _fmt(x) -> str:
    if x != x:  # NaN marks a column that does not apply
        return ""
    return format(float(x), ".17g")


def read_trajectory_csv(path) -> dict:
    """Columns of a trajectory CSV as float arrays (NaN for blanks)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols = {h: [] for h in header}
        for row in reader:
            for h, cell in zip(header, row):
                cols[h].append(float(cell) if cell != "" else float("nan"))
    return {h: np.array(vals) for h, vals in cols.items()}


@dataclass(eq=False)
class ComparisonReport:
    """Cross-parameterization agreement on a shared time grid."""

    scenario: str
    times: dict
    pair_errors: dict
    final_states: dict
    norm_drift: dict
    timing: dict

    def to_json(self) -> str:
        payload = {
            "scenario": self.scenario,
            "pairs": {
                key: {"t": list(map(float, self.times[key])), "e_r": list(map(float, er[0])), "e_v": list(map(float, er[1]))}
                for key, er in self.pair_errors.items()
            },
            "final_states": self.final_states,
            "norm_drift": self.norm_drift,
            "timing": self.timing,
        }
        return json.dumps(payload, indent=2)


def build_comparison(config: ScenarioConfig, results, compare_times) -> ComparisonReport:
    """Pairwise position/speed differences at shared exact sample times."""
    env = config.environment
    samples = {}
    norm_drift = {}
    timing = {}
    final_states = {}
    for res in results:
        if res.trajectory is None or len(res.trajectory) == 0:
            continue
        spec = PARAMETERIZATIONS[res.name]
        traj = res.trajectory
        by_time = {}
        for grid_t in compare_times:
            try:
                i = traj.index_of_time(grid_t)
            except KeyError:
                continue
            by_time[grid_t] = spec.to_cartesian(traj.y[i])
        samples[res.name] = by_time
        timing[res.name] = {
            "wall_time_s": traj.wall_time,
            "derivative_evaluations": traj.n_evals,
            "accepted_steps": traj.n_steps,
            "rejected_steps": traj.n_rejected,
        }
        drift = []
        for lo, hi in spec.quat_spans:
            norms = np.linalg.norm(traj.y[:, lo:hi], axis=1)
            drift.append(float(np.max(np.abs(norms - 1.0))))
        norm_drift[res.name] = drift
        cart_final = spec.to_cartesian(traj.final_state)
        final_states[res.name] = {
            "t": float(traj.t[-1]),
            "position": [float(x) for x in cart_final.position],
            "velocity": [float(x) for x in cart_final.velocity],
            "r": cart_final.r,
            "v": cart_final.v,
            "stop": res.event.kind,
        }

    pair_errors = {}
    times = {}
    names = list(samples)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            shared = sorted(set(samples[a]) & set(samples[b]))
            if not shared:
                continue
            e_r = []
            e_v = []
            for t in shared:
                ca, cb = samples[a][t], samples[b][t]
                e_r.append(float(np.linalg.norm(ca.position - cb.position)))
                e_v.append(abs(ca.v - cb.v))
            key = f"{a}|{b}"
            times[key] = shared
            pair_errors[key] = (e_r, e_v)
    return ComparisonReport(
        scenario=config.name,
        times=times,
        pair_errors=pair_errors,
        final_states=final_states,
        norm_drift=norm_drift,
        timing=timing,
    )


def run_scenario(
    config: ScenarioConfig,
    params=None,
    outdir=None,
    compare: bool = False,
):
    """Run every selected parameterization; write CSVs and an optional report.

    Returns
    -------
    (results, report, exit_code)
        ``results`` is a list of :class:`RunResult`; ``report`` is the
        :class:`ComparisonReport` or None; ``exit_code`` follows the CLI
        contract (0 ok, 3 unexpected singularity guard, 4 integration
        failure).
    """
    chosen = tuple(params) if params else config.parameterizations
    bad = [p for p in chosen if p not in PARAMETERIZATIONS]
    if bad:
        raise ConfigError([f"parameterizations: unknown entries {bad}"])
    out_path = resolve_output_dir(outdir)
    compare_times = ()
    if compare:
        compare_times = tuple(
            np.linspace(config.t0, config.stop.t_final, config.compare_points)
        )
    results = []
    for name in chosen:
        res = run_parameterization(name, config, compare_times=compare_times)
        if res.trajectory is not None and len(res.trajectory):
            csv_path = out_path / f"{config.name}_{name}.csv"
            res.csv_path = write_trajectory_csv(csv_path, name, res.trajectory, config)
        results.append(res)

    report = None
    if compare:
        report = build_comparison(config, results, compare_times)
        report_path = out_path / f"{config.name}_comparison.json"
        report_path.write_text(report.to_json())

    exit_code = 0
    for res in results:
        if res.event.kind == "step_failure":
            exit_code = 4
    for res in results:
        if res.guard_tripped and res.name not in config.stop.expected_guards:
            exit_code = 3
    return results, report, exit_code
