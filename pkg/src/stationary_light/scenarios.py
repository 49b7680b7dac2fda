"""Configuration-driven experiment runner and its TOML schema.

A scenario file declares physical parameters, a grid, a control profile, an
initial condition, run controls, and the analyses whose analytic overlays
should be emitted next to the simulated observables.  Outputs are plain CSV
files plus a JSON manifest; re-running the same configuration reproduces the
CSV files byte for byte.

Units banner: all canned scenarios use g_p = 1, c = 1, so time is measured
in 1/g_p and length in c/g_p; l_abs = gamma in these units.
"""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from . import comb as comb_mod
from . import mbe
from .fokker_planck import fit_focal_scale
from .normal_modes import diffusive_decay, exact_width_series
from .params import Grid, PhysicalParams
from .profiles import (
    CombProfile,
    CombTone,
    ControlProfile,
    FocusPath,
    GaussianFoci,
    HomogeneousProfile,
    TanhRamp,
    TanhSchedule,
    control_field_at,
    phi_field_at,
)
from .susceptibility import SCAN_METHODS, spectrum_scan

__all__ = [
    "ScenarioConfig",
    "ChiScanConfig",
    "ConfigError",
    "load_config",
    "loads_config",
    "run_scenario",
    "canned_scenario_path",
    "list_canned_scenarios",
    "UNITS_BANNER",
]

UNITS_BANNER = "simulation units: g_p = g*sqrt(N) = 1, c = 1; time in 1/g_p, length in c/g_p"
RK4_RATE_LIMIT = 2.6
SNAPSHOT_HEADER = "z,reE+,imE+,reE-,imE-,reSbc,imSbc"
OBSERVABLES_HEADER = "t,width_sq,first_moment,n_tot,peak,ratio_re,ratio_im"


class ConfigError(ValueError):
    """A scenario file is malformed or fails the physics checks."""


@dataclass(frozen=True)
class ChiScanConfig:
    omega_plus: complex
    omega_minus: complex
    half_window: float  # in units of Omega_0^2/gamma
    n_samples: int = 400
    methods: tuple[str, ...] = SCAN_METHODS
    truncations: tuple[int, ...] = (5,)

    @property
    def omega_sq_total(self) -> float:
        return abs(self.omega_plus) ** 2 + abs(self.omega_minus) ** 2


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    description: str
    params: PhysicalParams
    grid: Grid
    profile: ControlProfile
    initial_kind: str = "stored_gaussian"
    initial_width: float = 10.0
    initial_center: float = 0.0
    initial_amplitude: float = 1.0
    initial_dress: bool = True
    duration: float = 0.0
    snapshot_every: float = 5.0
    solver: str = "full"
    analyses: tuple[str, ...] = ()
    moment_center: float = 0.0
    chi_scan: ChiScanConfig | None = None

    def build_initial_state(self) -> mbe.SystemState:
        if self.initial_kind == "stored_gaussian":
            return mbe.stored_gaussian_state(
                self.grid, self.initial_width, self.initial_center, self.initial_amplitude
            )
        if self.initial_kind == "probe_gaussian":
            return mbe.probe_gaussian_state(
                self.grid,
                self.initial_width,
                self.initial_center,
                self.initial_amplitude,
                profile=self.profile if self.initial_dress else None,
                params=self.params if self.initial_dress else None,
            )
        if self.initial_kind == "none":
            return mbe.zero_state(self.grid)
        raise ConfigError(f"unknown initial condition kind {self.initial_kind!r}")


_PROFILE_KINDS = ("homogeneous", "tanh_schedule", "gaussian_foci", "comb")
_ANALYSES = ("moments", "matching", "width_overlay", "ntot_overlay",
             "cavity_overlay", "compression_series", "comb_total")


def _ramp_from(table: dict, prefix: str = "ramp") -> TanhRamp | None:
    center = table.get(f"{prefix}_center")
    if center is None:
        return None
    return TanhRamp(center=float(center), rate=float(table.get(f"{prefix}_rate", 0.1)))


def _build_profile(table: dict, params: PhysicalParams) -> ControlProfile:
    kind = table.get("kind")
    if kind not in _PROFILE_KINDS:
        raise ConfigError(f"profile.kind must be one of {_PROFILE_KINDS}, got {kind!r}")
    if kind == "homogeneous":
        return HomogeneousProfile(
            omega_plus=float(table["omega_plus"]),
            omega_minus=float(table["omega_minus"]),
            ramp=_ramp_from(table),
        )
    if kind == "tanh_schedule":
        return TanhSchedule(
            switch_off=float(table.get("switch_off", 65.0)),
            switch_on=float(table.get("switch_on", 300.0)),
            rate=float(table.get("rate", 0.1)),
            storage_level=float(table.get("storage_level", 1.0)),
            retrieve_level=float(table.get("retrieve_level", 1.0 / 3.0)),
            omega_max=float(table.get("omega_max", 1e3)),
        )
    if kind == "gaussian_foci":
        def path(sub: dict) -> FocusPath:
            return FocusPath(
                start=float(sub["start"]),
                shift=float(sub.get("shift", 0.0)),
                rate=float(sub.get("rate", 0.0125)),
                center=float(sub.get("center", 0.0)),
            )

        return GaussianFoci(
            amplitude=float(table.get("amplitude", 1.0)),
            focus_plus=path(table["focus_plus"]),
            focus_minus=path(table["focus_minus"]),
            rayleigh_range=float(table.get("rayleigh_range", 10.0)),
            beam_law=str(table.get("beam_law", "paraxial")),
            ramp=_ramp_from(table),
        )
    tones = []
    for tone in table["tones"]:
        amp = float(tone["amplitude"])
        phase = float(tone.get("phase", 0.0))
        value = amp * complex(math.cos(phase), math.sin(phase))
        tones.append(CombTone(detuning=float(tone["detuning"]), omega_plus=value, omega_minus=value))
    return CombProfile(tones=tuple(tones), ramp=_ramp_from(table), gamma_ref=params.gamma)


def _physics_checks(config: ScenarioConfig) -> None:
    grid, params = config.grid, config.params
    try:
        grid.validate_cfl(params.light_speed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if config.duration > 0.0:
        if abs(params.light_speed * grid.dt - grid.dz) > 1e-9 * grid.dz:
            raise ConfigError(
                "time evolution requires c*dt == dz (exact one-cell advection); "
                f"got c*dt={params.light_speed * grid.dt:.6g}, dz={grid.dz:.6g}"
            )
        t_probe = np.linspace(0.0, config.duration, 25)
        if isinstance(config.profile, CombProfile):
            rate = params.gamma + params.coupling
            for tone in config.profile.tones:
                rate = max(rate, abs(tone.omega_plus) + params.coupling + params.gamma)
        else:
            rate = mbe.local_rate_bound(config.profile, params, grid, t_probe)
        if config.solver == "full" and rate * grid.dt > RK4_RATE_LIMIT:
            raise ConfigError(
                f"explicit stepping unstable: max local rate {rate:.3g} times "
                f"dt={grid.dt:.3g} exceeds {RK4_RATE_LIMIT}; refine the grid or "
                "cap the control amplitude (profile omega_max)"
            )
        if config.solver == "adiabatic":
            damping = params.coupling**2 / params.gamma * grid.dt
            if damping > RK4_RATE_LIMIT:
                raise ConfigError(
                    f"adiabatic solver unstable: (g_p^2/gamma)*dt = {damping:.3g} "
                    f"exceeds {RK4_RATE_LIMIT}; refine the grid"
                )
        length = grid.z_max - grid.z_min
        if params.optical_depth(length) < 10.0:
            import warnings

            warnings.warn(
                f"domain optical depth {params.optical_depth(length):.3g} < 10; "
                "the diffusion picture is marginal",
                UserWarning,
                stacklevel=2,
            )


def loads_config(text: str, name_hint: str = "<string>") -> ScenarioConfig:
    """Parse and validate a scenario from TOML text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{name_hint}: TOML syntax error: {exc}") from exc
    return _config_from_dict(raw, name_hint)


def load_config(path: str | Path) -> ScenarioConfig:
    """Load a scenario file; canned names resolve through the packaged set."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    return loads_config(path.read_text(encoding="utf-8"), name_hint=str(path))


def _config_from_dict(raw: dict, name_hint: str) -> ScenarioConfig:
    def need(table: dict, key: str, where: str):
        if key not in table:
            raise ConfigError(f"{name_hint}: missing field {where}.{key}")
        return table[key]

    try:
        params = PhysicalParams(**raw.get("params", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name_hint}: [params] invalid: {exc}") from exc

    grid_table = raw.get("grid", {})
    try:
        grid = Grid(
            z_min=float(need(grid_table, "z_min", "grid")),
            z_max=float(need(grid_table, "z_max", "grid")),
            n_points=int(need(grid_table, "n_points", "grid")),
            dt=grid_table.get("dt"),
        )
    except ValueError as exc:
        raise ConfigError(f"{name_hint}: [grid] invalid: {exc}") from exc

    try:
        profile = _build_profile(
            raw.get("profile", {"kind": "homogeneous", "omega_plus": 0.0, "omega_minus": 0.0}),
            params,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{name_hint}: [profile] invalid: {exc}") from exc

    initial = raw.get("initial", {})
    run = raw.get("run", {})
    analyses = tuple(run.get("analyses", ()))
    for analysis in analyses:
        if analysis not in _ANALYSES:
            raise ConfigError(
                f"{name_hint}: unknown analysis {analysis!r}; options: {_ANALYSES}"
            )
    solver = run.get("solver", "full")
    if solver not in ("full", "adiabatic"):
        raise ConfigError(f"{name_hint}: run.solver must be 'full' or 'adiabatic'")

    chi_scan = None
    if "chi_scan" in raw:
        cs = raw["chi_scan"]
        methods = tuple(cs.get("methods", SCAN_METHODS))
        for m in methods:
            if m not in SCAN_METHODS:
                raise ConfigError(f"{name_hint}: chi_scan method {m!r} unknown")
        chi_scan = ChiScanConfig(
            omega_plus=complex(float(need(cs, "omega_plus", "chi_scan"))),
            omega_minus=complex(float(need(cs, "omega_minus", "chi_scan"))),
            half_window=float(cs.get("half_window", 2.0)),
            n_samples=int(cs.get("n_samples", 400)),
            methods=methods,
            truncations=tuple(int(n) for n in cs.get("truncations", (5,))),
        )

    config = ScenarioConfig(
        name=str(raw.get("name", Path(name_hint).stem)),
        description=str(raw.get("description", "")),
        params=params,
        grid=grid,
        profile=profile,
        initial_kind=str(initial.get("kind", "stored_gaussian")),
        initial_width=float(initial.get("width", 10.0)),
        initial_center=float(initial.get("center", 0.0)),
        initial_amplitude=float(initial.get("amplitude", 1.0)),
        initial_dress=bool(initial.get("dress", True)),
        duration=float(run.get("duration", 0.0)),
        snapshot_every=float(run.get("snapshot_every", 5.0)),
        solver=solver,
        analyses=analyses,
        moment_center=float(run.get("moment_center", 0.0)),
        chi_scan=chi_scan,
    )
    if config.initial_kind not in ("stored_gaussian", "probe_gaussian", "none"):
        raise ConfigError(f"{name_hint}: unknown initial.kind {config.initial_kind!r}")
    _physics_checks(config)
    return config


def _scenario_dir() -> Path:
    return Path(__file__).parent / "scenario_files"


def list_canned_scenarios() -> list[tuple[str, str]]:
    """(name, description) pairs of the packaged scenario files."""
    out = []
    for path in sorted(_scenario_dir().glob("*.toml")):
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
        out.append((path.stem, str(raw.get("description", ""))))
    return out


def canned_scenario_path(name: str) -> Path:
    path = _scenario_dir() / f"{name}.toml"
    if not path.exists():
        known = ", ".join(n for n, _ in list_canned_scenarios())
        raise ConfigError(f"no canned scenario {name!r}; available: {known}")
    return path


# ----------------------------------------------------------------------
# output writers
# ----------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_snapshot(path: Path, z: np.ndarray, state: mbe.SystemState) -> None:
    rows = zip(
        z,
        state.e_plus.real, state.e_plus.imag,
        state.e_minus.real, state.e_minus.imag,
        state.sigma_bc.real, state.sigma_bc.imag,
    )
    _write_csv(path, SNAPSHOT_HEADER, rows)


def _write_observables(path: Path, observables: list[mbe.Observables]) -> None:
    rows = []
    for o in observables:
        ratio = o.ratio
        rows.append((
            o.t, o.width_sq, o.first_moment_sum, o.total_excitation, o.peak_density,
            ratio.real if ratio == ratio else float("nan"),
            ratio.imag if ratio == ratio else float("nan"),
        ))
    _write_csv(path, OBSERVABLES_HEADER, rows)


def _group_velocity_of_t(config: ScenarioConfig):
    params = config.params
    z_mid = np.array([config.moment_center])

    def v_gr(t: float) -> float:
        a_plus, a_minus = control_field_at(config.profile, z_mid, t, params)
        w = float(abs(a_plus[0]) ** 2 + abs(a_minus[0]) ** 2)
        return params.light_speed * w / (params.coupling**2 + w)

    return v_gr


def _switch_on_time(config: ScenarioConfig) -> float:
    profile = config.profile
    if isinstance(profile, TanhSchedule):
        return profile.switch_on
    ramp = getattr(profile, "ramp", None)
    return ramp.center if ramp is not None else 0.0


def _width_overlay(config: ScenarioConfig, result: mbe.SimulationResult) -> list[tuple]:
    params = config.params
    t0 = _switch_on_time(config)
    v_of_t = _group_velocity_of_t(config)
    d0 = config.initial_width**2
    times = result.times
    analytic = np.full(len(times), d0)
    after = times >= t0
    if np.any(after):
        shifted = times[after] - t0
        grid_t = np.concatenate([[0.0], shifted]) if shifted[0] > 0.0 else shifted
        series = exact_width_series(
            d0, 0.0, params.absorption_length, params.light_speed,
            lambda tt: v_of_t(tt + t0), grid_t,
        )
        analytic[after] = series[-len(shifted):]
    rows = []
    for t, obs, ana in zip(times, result.observables, analytic):
        rows.append((t, obs.width_sq, ana))
    return rows


def _ntot_overlay(config: ScenarioConfig, result: mbe.SimulationResult) -> list[tuple]:
    params = config.params
    t0 = _switch_on_time(config)
    ramp_rate = 0.1
    profile = config.profile
    if isinstance(profile, TanhSchedule):
        ramp_rate = profile.rate
    elif getattr(profile, "ramp", None) is not None:
        ramp_rate = profile.ramp.rate
    t_ref = t0 + 4.0 / ramp_rate
    times = result.times
    i_ref = int(np.searchsorted(times, t_ref))
    i_ref = min(i_ref, len(times) - 1)
    n_ref = result.observables[i_ref].total_excitation
    d_ref = result.observables[i_ref].width_sq
    v_late = _group_velocity_of_t(config)(times[-1])
    diff = v_late * params.absorption_length
    rows = []
    for t, obs in zip(times, result.observables):
        if t < times[i_ref] or not math.isfinite(d_ref):
            ana = float("nan")
        else:
            ana = diffusive_decay(n_ref, math.sqrt(d_ref), diff, t - times[i_ref])
        rows.append((t, obs.total_excitation, ana))
    return rows


def _cavity_overlay(config: ScenarioConfig, result: mbe.SimulationResult) -> list[tuple]:
    params = config.params
    t0 = _switch_on_time(config)
    l_fit = fit_focal_scale(config.profile, params, t=t0 + 1e4)
    v_late = _group_velocity_of_t(config)(t0 + 1e4)
    rate = v_late / l_fit
    times = result.times
    i_ref = min(int(np.searchsorted(times, t0 + 40.0)), len(times) - 1)
    n_ref = result.observables[i_ref].total_excitation
    rows = []
    for t, obs in zip(times, result.observables):
        ana = n_ref * math.exp(-rate * (t - times[i_ref])) if t >= times[i_ref] else float("nan")
        rows.append((t, obs.total_excitation, ana))
    return rows


def _compression_series(config: ScenarioConfig, result: mbe.SimulationResult) -> list[tuple]:
    # peak density and total excitation normalized at the snapshot nearest t=200
    times = result.times
    i_ref = int(np.argmin(np.abs(times - 200.0)))
    peak_ref = result.observables[i_ref].peak_density or 1.0
    n_ref = result.observables[i_ref].total_excitation or 1.0
    rows = []
    for t, obs in zip(times, result.observables):
        rows.append((t, obs.peak_density / peak_ref, obs.total_excitation / n_ref))
    return rows


class _ComplexEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, complex):
            return {"re": obj.real, "im": obj.imag}
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.floating, np.integer)):
            return obj.item()
        return super().default(obj)


def _config_echo(config: ScenarioConfig) -> dict:
    echo = asdict(config)
    echo["profile"] = {"type": type(config.profile).__name__, **asdict(config.profile)}
    echo["grid"]["dz"] = config.grid.dz
    return echo


def _run_comb_scenario(
    config: ScenarioConfig,
) -> tuple[mbe.SimulationResult, list[comb_mod.CombState]]:
    grid, params, profile = config.grid, config.params, config.profile
    initial = config.build_initial_state()
    state = comb_mod.comb_state_from_spin(profile, grid, initial.sigma_bc)
    dt = grid.dt
    n_steps = int(round(config.duration / dt))
    every = max(1, int(round(config.snapshot_every / dt)))

    def as_system_state(cs: comb_mod.CombState) -> mbe.SystemState:
        res = next(c for c in cs.components if c.detuning == 0.0)
        return mbe.SystemState(
            cs.t, res.e_plus, res.e_minus, res.sigma_ba_plus, res.sigma_ba_minus, cs.sigma_bc
        )

    times: list[float] = []
    states: list[mbe.SystemState] = []
    obs: list[mbe.Observables] = []
    comb_states: list[comb_mod.CombState] = []

    def record(cs: comb_mod.CombState):
        st = as_system_state(cs)
        phi = phi_field_at(profile, grid.z, st.t, params)
        times.append(st.t)
        states.append(st)
        comb_states.append(cs)
        obs.append(mbe.observables(st, phi, grid, center=config.moment_center))

    record(state)
    for k in range(n_steps):
        state = comb_mod.comb_evolve(state, profile, params, grid, dt)
        if (k + 1) % every == 0 or k == n_steps - 1:
            record(state)
    return mbe.SimulationResult(np.asarray(times), states, obs), comb_states


def run_scenario(config: ScenarioConfig, out_dir: str | Path) -> dict:
    """Run a scenario and write snapshots, observables, overlays and manifest.

    Returns the manifest dictionary.  On a numerical failure the partial
    outputs are kept and the manifest records the failure; the caller decides
    the exit code.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    snap_dir = out / "snapshots"
    started = _time.perf_counter()

    manifest: dict = {
        "name": config.name,
        "description": config.description,
        "units": UNITS_BANNER,
        "package": "stationary-light",
        "version": _package_version(),
        "config": _config_echo(config),
        "files": {},
        "status": "success",
        "failure": None,
    }

    failure_exc: Exception | None = None
    result = None
    comb_states = None
    try:
        if config.duration > 0.0:
            if isinstance(config.profile, CombProfile):
                result, comb_states = _run_comb_scenario(config)
            else:
                result = mbe.run(config)
        else:
            state = config.build_initial_state()
            phi = phi_field_at(config.profile, config.grid.z, 0.0, config.params)
            result = mbe.SimulationResult(
                np.array([0.0]),
                [state],
                [mbe.observables(state, phi, config.grid, center=config.moment_center)],
            )
    except mbe.NumericalBlowupError as exc:
        failure_exc = exc
        manifest["status"] = "failed"
        manifest["failure"] = {
            "error": "numerical",
            "field": exc.field,
            "z": exc.z,
            "t": exc.t,
            "message": str(exc),
        }

    if result is not None:
        snap_dir.mkdir(exist_ok=True)
        z = config.grid.z
        snap_files = []
        for i, state in enumerate(result.states):
            path = snap_dir / f"snap_{i:05d}.csv"
            _write_snapshot(path, z, state)
            snap_files.append(str(path.relative_to(out)))
        _write_observables(out / "observables.csv", result.observables)
        manifest["times"] = [float(t) for t in result.times]
        manifest["files"]["snapshots"] = snap_files
        manifest["files"]["observables"] = "observables.csv"

        overlay_builders = {
            "width_overlay": (_width_overlay, "t,simulated,analytic"),
            "ntot_overlay": (_ntot_overlay, "t,simulated,analytic"),
            "cavity_overlay": (_cavity_overlay, "t,simulated,analytic"),
            "compression_series": (_compression_series, "t,peak_norm,ntot_norm"),
        }
        for analysis in config.analyses:
            if analysis in overlay_builders:
                builder, header = overlay_builders[analysis]
                rows = builder(config, result)
                fname = f"{analysis}.csv"
                _write_csv(out / fname, header, rows)
                manifest["files"][analysis] = fname
            elif analysis == "comb_total" and comb_states is not None:
                final = comb_states[-1]
                total = comb_mod.total_field(final, config.params, z)
                matched = comb_mod.matched_field(
                    final.sigma_bc, config.profile, config.params, z, final.t
                )
                rows = zip(z, total.real, total.imag, matched.real, matched.imag)
                _write_csv(out / "comb_total.csv",
                           "z,re_total,im_total,re_matched,im_matched", rows)
                manifest["files"]["comb_total"] = "comb_total.csv"

    if config.chi_scan is not None:
        scan = config.chi_scan
        window = scan.half_window * scan.omega_sq_total / config.params.gamma
        chi_files = []
        for method in scan.methods:
            truncs = scan.truncations if method == "truncated" else (None,)
            for trunc in truncs:
                res = spectrum_scan(
                    method, -window, window, scan.n_samples,
                    scan.omega_plus, scan.omega_minus, config.params,
                    truncation=trunc if trunc is not None else 5,
                )
                tag = method if trunc is None else f"{method}_n{trunc}"
                fname = f"chi_{tag}.csv"
                res.to_csv(out / fname)
                chi_files.append(fname)
        manifest["files"]["chi"] = chi_files

    manifest["runtime_seconds"] = _time.perf_counter() - started
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, cls=_ComplexEncoder, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    if failure_exc is not None:
        raise failure_exc
    return manifest


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("stationary-light")
    except Exception:  # pragma: no cover
        return "unknown"
