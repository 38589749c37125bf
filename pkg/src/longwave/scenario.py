"""Benchmark scenarios: configuration, built-ins, and the time-loop driver.

The three built-ins reproduce the standard laboratory set-ups (solitary wave
scattering by a vertical cylinder, shoaling against a vertical wall, periodic
waves over a submerged bar with wavemaker and sponge layers).  Configs are
plain dataclasses, also expressible as TOML files (see README for the schema).

The tracked mass-drift series is the conservation defect
|m(t) - m(0) + W(t) + S(t)|, where m integrates eta, W the wavemaker volume
source and S the sponge sink; W and S are accumulated inside the RK stages so
the defect measures pure numerical (boundary) leakage.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .fem import (
    Bathymetry,
    FieldState,
    FunctionSpace,
    assemble_mass_operator,
    assemble_momentum_operator,
    constrained_dofs,
    flat_bathymetry,
    integrate_field,
)
from .fem.assembly import default_quadrature
from .fem.quadrature import triangle_rule
from .mesh import build_rectangle_mesh, build_rectangle_mesh_with_hole, import_mesh
from .models import SpongeRegion, SpongeSpec, WavemakerSpec, make_model
from .snapshots import read_vtk_snapshot, write_vtk_snapshot
from .solitary import (
    SolitaryWaveProblem,
    petviashvili_bbm,
    petviashvili_peregrine,
    recover_fields,
)
from .timestep import Integrator

__all__ = [
    "MeshSpec",
    "BathymetrySpec",
    "InitialSpec",
    "ScenarioConfig",
    "GaugeRecord",
    "ScenarioResult",
    "builtin_scenario",
    "BUILTIN_NAMES",
    "build_bathymetry",
    "build_mesh",
    "run_scenario",
    "write_gauge_csv",
    "load_config",
]

BUILTIN_NAMES = ("cylinder", "shoaling", "submerged_bar")


@dataclass(frozen=True)
class MeshSpec:
    kind: str = "rectangle"  # rectangle | rectangle_with_hole | file
    bounds: tuple = (0.0, 1.0, 0.0, 1.0)
    nx: int = 10
    ny: int = 10
    diagonal: str = "right"
    hole_center: Optional[tuple] = None
    hole_radius: float = 0.0
    hole_refine_h: Optional[float] = None  # local cell size near the hole
    path: Optional[str] = None


@dataclass(frozen=True)
class BathymetrySpec:
    kind: str = "flat"  # flat | shoaling | submerged_bar
    depth: float = 1.0
    slope: float = 1.0 / 50.0
    slope_start: float = 0.0


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "rest"  # rest | solitary | file
    amplitude: float = 0.0
    position: float = 0.0
    depth: Optional[float] = None  # flat generation depth; default D at the crest
    direction: tuple = (1.0, 0.0)
    path: Optional[str] = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    mesh: MeshSpec
    bathymetry: BathymetrySpec
    initial: InitialSpec
    model: str = "bbm"
    theta: Optional[float] = None
    gravity: float = 9.81
    degree_eta: int = 1
    degree_u: int = 2
    nitsche_constant: float = 50.0
    final_time: float = 1.0
    dt: float = 1e-3
    gauge_cadence: Optional[float] = None  # defaults to dt
    snapshot_count: int = 10
    gauges: dict = field(default_factory=dict)
    sponge_regions: tuple = ()  # ((start, end), ...) ramps toward `end`
    sponge_strength: float = 10.0
    wavemaker: Optional[WavemakerSpec] = None
    solver_tol: float = 1e-10

    def __post_init__(self):
        if self.dt <= 0 or self.final_time < self.dt:
            raise ConfigError("need dt > 0 and final_time >= dt")
        cadence = self.gauge_cadence or self.dt
        stride = cadence / self.dt
        if abs(stride - round(stride)) > 1e-9 or round(stride) < 1:
            raise ConfigError("gauge_cadence must be a positive multiple of dt")


@dataclass(frozen=True)
class GaugeRecord:
    names: tuple
    times: np.ndarray
    samples: np.ndarray  # (n_times, n_gauges)

    def trace(self, name):
        return self.samples[:, self.names.index(name)]


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    gauges: GaugeRecord
    mass_drift: np.ndarray
    snapshot_paths: list
    final_state: FieldState
    gauge_csv: Optional[str] = None


# -- bathymetries -----------------------------------------------------------------


def _shoaling_bathymetry(depth, slope, slope_start):
    def D(x, y):
        x = np.asarray(x, dtype=float)
        return np.where(x < slope_start, depth, depth - slope * (x - slope_start))

    def grad(x, y):
        x = np.asarray(x, dtype=float)
        g = np.zeros(np.shape(x) + (2,))
        g[..., 0] = np.where(x < slope_start, 0.0, -slope)
        return g

    return Bathymetry(depth=D, depth_gradient=grad)


def _submerged_bar_bathymetry():
    def D(x, y):
        x = np.asarray(x, dtype=float)
        out = np.full(np.shape(x), 0.4)
        out = np.where((x >= 6.0) & (x < 12.0), -0.05 * x + 0.7, out)
        out = np.where((x >= 12.0) & (x < 14.0), 0.1, out)
        out = np.where((x >= 14.0) & (x <= 17.0), 0.1 * x - 1.3, out)
        return out

    def grad(x, y):
        x = np.asarray(x, dtype=float)
        g = np.zeros(np.shape(x) + (2,))
        gx = np.zeros(np.shape(x))
        gx = np.where((x >= 6.0) & (x < 12.0), -0.05, gx)
        gx = np.where((x >= 14.0) & (x <= 17.0), 0.1, gx)
        g[..., 0] = gx
        return g

    return Bathymetry(depth=D, depth_gradient=grad)


def build_bathymetry(spec):
    if spec.kind == "flat":
        return flat_bathymetry(spec.depth)
    if spec.kind == "shoaling":
        return _shoaling_bathymetry(spec.depth, spec.slope, spec.slope_start)
    if spec.kind == "submerged_bar":
        return _submerged_bar_bathymetry()
    raise ConfigError(f"unknown bathymetry kind {spec.kind!r}")


def build_mesh(spec):
    if spec.kind == "rectangle":
        return build_rectangle_mesh(spec.bounds, spec.nx, spec.ny, diagonal=spec.diagonal)
    if spec.kind == "rectangle_with_hole":
        if spec.hole_center is None or spec.hole_radius <= 0:
            raise ConfigError("rectangle_with_hole needs hole_center and hole_radius")
        x_lines = y_lines = None
        if spec.hole_refine_h:
            from .mesh import graded_lines

            cx, cy = spec.hole_center
            pad = 4.0 * spec.hole_radius
            xmin, xmax, ymin, ymax = spec.bounds
            hx = (xmax - xmin) / spec.nx
            hy = (ymax - ymin) / spec.ny
            x_lines = graded_lines(
                xmin, xmax, max(xmin, cx - pad), min(xmax, cx + pad),
                spec.hole_refine_h, hx,
            )
            y_lines = graded_lines(
                ymin, ymax, max(ymin, cy - pad), min(ymax, cy + pad),
                spec.hole_refine_h, hy,
            )
        return build_rectangle_mesh_with_hole(
            spec.bounds, spec.nx, spec.ny, spec.hole_center, spec.hole_radius,
            diagonal=spec.diagonal, x_lines=x_lines, y_lines=y_lines,
        )
    if spec.kind == "file":
        if not spec.path:
            raise ConfigError("mesh kind 'file' needs a path")
        return import_mesh(spec.path)
    raise ConfigError(f"unknown mesh kind {spec.kind!r}")


# -- built-in scenarios -------------------------------------------------------------


def builtin_scenario(name):
    """The three benchmark set-ups with the published parameters as defaults."""
    if name == "cylinder":
        return ScenarioConfig(
            name="cylinder",
            mesh=MeshSpec(
                kind="rectangle_with_hole",
                bounds=(-4.0, 20.0, 0.0, 0.55),
                nx=440,
                ny=10,
                diagonal="crossed",
                hole_center=(4.5, 0.275),
                hole_radius=0.08,
            ),
            bathymetry=BathymetrySpec(kind="flat", depth=0.2),
            initial=InitialSpec(kind="solitary", amplitude=0.0375, position=2.085),
            model="bbm",
            final_time=10.0,
            dt=1e-3,
            gauge_cadence=1e-2,
            nitsche_constant=500.0,
            gauges={
                "wg1": (4.4, 0.275),
                "wg2": (4.5, 0.170),
                "wg3": (4.5, 0.045),
                "wg4": (4.6, 0.275),
                "wg5": (4.975, 0.275),
                "wg6": (5.375, 0.275),
            },
        )
    if name == "shoaling":
        return ScenarioConfig(
            name="shoaling",
            mesh=MeshSpec(kind="rectangle", bounds=(-50.0, 20.0, 0.0, 1.0), nx=350, ny=5,
                          diagonal="crossed"),
            bathymetry=BathymetrySpec(kind="shoaling", depth=0.7, slope=1.0 / 50.0),
            initial=InitialSpec(kind="solitary", amplitude=0.07, position=-30.0),
            model="bbm",
            final_time=30.0,
            dt=1e-3,
            gauge_cadence=1e-2,
            nitsche_constant=500.0,
            gauges={"wg1": (0.0, 0.5), "wg2": (16.25, 0.5), "wg3": (17.75, 0.5)},
        )
    if name == "submerged_bar":
        return ScenarioConfig(
            name="submerged_bar",
            mesh=MeshSpec(kind="rectangle", bounds=(-15.0, 35.0, 0.0, 1.0), nx=250, ny=5),
            bathymetry=BathymetrySpec(kind="submerged_bar"),
            initial=InitialSpec(kind="rest"),
            model="bbm",
            final_time=40.0,
            dt=0.1,
            gauge_cadence=0.1,
            nitsche_constant=500.0,
            gauges={
                "wg1": (10.5, 0.5),
                "wg2": (12.5, 0.5),
                "wg3": (13.5, 0.5),
                "wg4": (14.5, 0.5),
                "wg5": (15.7, 0.5),
                "wg6": (17.3, 0.5),
            },
            sponge_regions=((0.0, -15.0), (25.0, 35.0)),
            wavemaker=WavemakerSpec(amplitude=0.0095, center=2.01, period=2.02),
        )
    raise InvalidArgumentError(f"unknown scenario {name!r}; choose from {BUILTIN_NAMES}")


# -- initial data --------------------------------------------------------------------


def _solitary_initial(config, model, bathy, eta_space, u_space):
    init = config.initial
    x0 = init.position
    ymid = 0.5 * (config.mesh.bounds[2] + config.mesh.bounds[3])
    depth = init.depth
    if depth is None:
        depth = float(bathy(np.array([x0]), np.array([ymid]))[0])
    problem = SolitaryWaveProblem(
        amplitude=init.amplitude,
        depth=depth,
        gravity=config.gravity,
        direction=init.direction,
        offset=x0,
    )
    if model.kind == "bbm":
        state = petviashvili_bbm(problem, eta_space, u_space, model=model)
    else:
        state = petviashvili_peregrine(problem, u_space, model=make_model(
            "classical", gravity=config.gravity))
    return recover_fields(problem, state, eta_space, u_space)


def build_initial(config, model, bathy, eta_space, u_space):
    kind = config.initial.kind
    if kind == "rest":
        return FieldState.zero(eta_space, u_space)
    if kind == "solitary":
        return _solitary_initial(config, model, bathy, eta_space, u_space)
    if kind == "file":
        if not config.initial.path:
            raise ConfigError("initial kind 'file' needs a path")
        return read_vtk_snapshot(config.initial.path, eta_space, u_space)
    raise ConfigError(f"unknown initial kind {kind!r}")


# -- the run loop ----------------------------------------------------------------------


def _quadrature_functionals(config, bathy, eta_space, wavemaker, sponge):
    """Stage functionals for the mass budget: (zeta_t, 1) and (mu eta_h, 1)."""
    rule = triangle_rule(default_quadrature(eta_space))
    _, _, X, W = eta_space.tabulate(rule)
    x, y = X[..., 0], X[..., 1]
    out = {}
    if wavemaker is not None:
        out["wavemaker"] = lambda st: float(np.sum(W * wavemaker.zeta_t(x, y, st.time)))
    if sponge is not None:
        mu = sponge.mu(x, y)
        from .fem.assembly import scalar_values

        def sink(st):
            vals, _ = scalar_values(eta_space, st.eta, rule)
            return float(np.sum(W * mu * vals))

        out["sponge"] = sink
    return out


def run_scenario(config, out_dir=None, progress=False):
    """Run one configured scenario; returns gauges, mass drift and snapshots.

    If `out_dir` is given, writes `gauges.csv` and VTK snapshots there.
    """
    mesh = build_mesh(config.mesh)
    bathy = build_bathymetry(config.bathymetry)
    model = make_model(config.model, theta=config.theta, gravity=config.gravity)
    eta_space = FunctionSpace(mesh, config.degree_eta)
    u_space = FunctionSpace(mesh, config.degree_u, components=2)

    names = tuple(config.gauges)
    pts = np.asarray([config.gauges[k] for k in names], dtype=float).reshape(-1, 2)
    try:
        gauge_cells = eta_space.locate(pts) if names else np.zeros(0, dtype=np.int64)
    except Exception as err:
        raise ConfigError(f"gauge outside the mesh: {err}") from err

    sponge = None
    if config.sponge_regions:
        regions = tuple(SpongeRegion(a, b) for a, b in config.sponge_regions)
        sponge = SpongeSpec(regions=regions, strength=config.sponge_strength)
    wavemaker = config.wavemaker

    state = build_initial(config, model, bathy, eta_space, u_space)
    qd = default_quadrature(u_space)
    mass_op = assemble_mass_operator(eta_space, bathy, model, qd)
    mom_op = assemble_momentum_operator(u_space, bathy, model, config.nitsche_constant, qd)
    integ = Integrator(
        dt=config.dt,
        mass_operator=mass_op,
        momentum_operator=mom_op,
        tol=config.solver_tol,
        constrained_dofs=constrained_dofs(u_space, model),
    )
    functionals = _quadrature_functionals(config, bathy, eta_space, wavemaker, sponge)

    nsteps = round(config.final_time / config.dt)
    cadence = config.gauge_cadence or config.dt
    stride = round(cadence / config.dt)
    n_samples = math.floor(config.final_time / cadence) + 1

    snap_steps = {}
    paths = []
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        count = max(2, config.snapshot_count)
        for j, t in enumerate(np.linspace(0.0, nsteps * config.dt, count)):
            snap_steps[int(round(t / config.dt))] = j

    def sample(st):
        if names.__len__() == 0:
            return np.zeros(0)
        return eta_space.eval_cells(st.eta, gauge_cells, pts)

    def snap(step, st):
        if step in snap_steps:
            import os

            p = os.path.join(out_dir, f"{config.name}_{snap_steps[step]:04d}.vtk")
            write_vtk_snapshot(p, st)
            paths.append(p)

    times = np.empty(n_samples)
    samples = np.empty((n_samples, len(names)))
    drifts = np.empty(n_samples)
    m0 = integrate_field(eta_space, state.eta, qd)
    budget = 0.0  # accumulated W(t) + S(t)
    times[0] = 0.0
    samples[0] = sample(state)
    drifts[0] = 0.0
    snap(0, state)

    row = 1
    for k in range(nsteps):
        state, tracked = integ.step(
            model, bathy, state, sponge, wavemaker, functionals=functionals
        )
        budget += tracked.get("wavemaker", 0.0) + tracked.get("sponge", 0.0)
        if (k + 1) % stride == 0 and row < n_samples:
            times[row] = state.time
            samples[row] = sample(state)
            drifts[row] = abs(integrate_field(eta_space, state.eta, qd) - m0 + budget)
            row += 1
        snap(k + 1, state)
        if progress and (k + 1) % max(1, nsteps // 20) == 0:
            print(f"  [{config.name}] t = {state.time:.3f} / {config.final_time}", file=sys.stderr)

    record = GaugeRecord(names=names, times=times[:row], samples=samples[:row])
    result = ScenarioResult(
        config=config,
        gauges=record,
        mass_drift=drifts[:row],
        snapshot_paths=paths,
        final_state=state,
    )
    if out_dir is not None:
        import os

        csv_path = os.path.join(out_dir, f"{config.name}_gauges.csv")
        write_gauge_csv(csv_path, record)
        result.gauge_csv = csv_path
    return result


def write_gauge_csv(path, record):
    """CSV with header `t,<gauge names...>`, 17 significant digits."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("t," + ",".join(record.names) + "\n")
        for t, row in zip(record.times, record.samples):
            fh.write(",".join(f"{v:.17g}" for v in (t, *row)) + "\n")


# -- TOML configuration ---------------------------------------------------------------


def load_config(path):
    """Read a scenario configuration from a TOML file (schema in the README)."""
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        raw = tomllib.load(fh)

    sc = raw.get("scenario", {})
    if "builtin" in sc:
        base = builtin_scenario(sc["builtin"])
        return _apply_overrides(base, raw)

    mesh = _mesh_from_table(raw.get("mesh", {}))
    bathy = _bathy_from_table(raw.get("bathymetry", {}))
    init = _initial_from_table(raw.get("initial", {}))
    wavemaker = None
    if "wavemaker" in raw:
        w = raw["wavemaker"]
        wavemaker = WavemakerSpec(
            amplitude=w["amplitude"], center=w["center"], period=w["period"]
        )
    sponges = tuple((s["start"], s["end"]) for s in raw.get("sponge", []))
    strength = max((s.get("strength", 10.0) for s in raw.get("sponge", [])), default=10.0)
    gauges = {k: tuple(v) for k, v in raw.get("gauges", {}).items()}
    kwargs = dict(
        name=sc.get("name", "scenario"),
        mesh=mesh,
        bathymetry=bathy,
        initial=init,
        gauges=gauges,
        wavemaker=wavemaker,
        sponge_regions=sponges,
        sponge_strength=strength,
    )
    for key, conf_key in _SCALAR_KEYS.items():
        if key in sc:
            kwargs[conf_key] = sc[key]
    return ScenarioConfig(**kwargs)


_SCALAR_KEYS = {
    "model": "model",
    "theta": "theta",
    "gravity": "gravity",
    "degree_eta": "degree_eta",
    "degree_u": "degree_u",
    "nitsche_constant": "nitsche_constant",
    "T": "final_time",
    "dt": "dt",
    "gauge_cadence": "gauge_cadence",
    "snapshot_count": "snapshot_count",
    "solver_tol": "solver_tol",
}


def _mesh_from_table(t):
    return MeshSpec(
        kind=t.get("kind", "rectangle"),
        bounds=tuple(t.get("bounds", (0.0, 1.0, 0.0, 1.0))),
        nx=t.get("nx", 10),
        ny=t.get("ny", 10),
        diagonal=t.get("diagonal", "right"),
        hole_center=tuple(t["hole_center"]) if "hole_center" in t else None,
        hole_radius=t.get("hole_radius", 0.0),
        path=t.get("path"),
    )


def _bathy_from_table(t):
    return BathymetrySpec(
        kind=t.get("kind", "flat"),
        depth=t.get("depth", 1.0),
        slope=t.get("slope", 1.0 / 50.0),
        slope_start=t.get("slope_start", 0.0),
    )


def _initial_from_table(t):
    return InitialSpec(
        kind=t.get("kind", "rest"),
        amplitude=t.get("amplitude", 0.0),
        position=t.get("position", 0.0),
        depth=t.get("depth"),
        direction=tuple(t.get("direction", (1.0, 0.0))),
        path=t.get("path"),
    )


def _apply_overrides(base, raw):
    sc = raw.get("scenario", {})
    changes = {}
    for key, conf_key in _SCALAR_KEYS.items():
        if key in sc:
            changes[conf_key] = sc[key]
    if "mesh" in raw:
        changes["mesh"] = _mesh_from_table({**_mesh_table(base.mesh), **raw["mesh"]})
    if "initial" in raw:
        changes["initial"] = _initial_from_table(
            {**_initial_table(base.initial), **raw["initial"]}
        )
    if "gauges" in raw:
        changes["gauges"] = {k: tuple(v) for k, v in raw["gauges"].items()}
    return replace(base, **changes)


def _mesh_table(m):
    out = dict(kind=m.kind, bounds=list(m.bounds), nx=m.nx, ny=m.ny, diagonal=m.diagonal,
               hole_radius=m.hole_radius)
    if m.hole_center is not None:
        out["hole_center"] = list(m.hole_center)
    if m.path:
        out["path"] = m.path
    return out


def _initial_table(i):
    out = dict(kind=i.kind, amplitude=i.amplitude, position=i.position,
               direction=list(i.direction))
    if i.depth is not None:
        out["depth"] = i.depth
    if i.path:
        out["path"] = i.path
    return out
