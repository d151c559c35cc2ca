import logging
from pathlib import Path

from tcsl import config
from tcsl.core import (ControlProfile, ControlSchedule, Grid, MediumParams, ProbePulse, Scenario,
                       builtin_scenario, builtin_scenarios)
from tcsl.errors import ParameterError, ScenarioError

logger = logging.getLogger(__name__)

# Keys written by the CLI next to the scenario; skipped on load
IGNORED_PREFIXES = ("run.", "provenance.")

KNOWN_KEYS = (
    "name", "release_mode",
    "medium.gamma3", "medium.gamma2", "medium.detuning", "medium.delta_plus", "medium.delta_minus",
    "medium.ng2", "medium.c", "medium.k_o", "medium.length", "medium.g",
    "schedule.omega_plus", "schedule.omega_minus", "schedule.phi_plus", "schedule.phi_minus",
    "schedule.ramp_time",
    "probe.amplitude", "probe.duration", "probe.center_z", "probe.phase",
    "grid.nz", "grid.dt", "grid.t_start", "grid.t_end", "grid.nk", "grid.k_max",
    "times.t_o", "times.t_1",
    "output.snapshots",
)


def _fmt(value):
    # Shortest text that reloads to the same float
    return repr(float(value))


class ScenarioFile:
    """Flat key=value text: one pair per line, '#' comments and blank lines ignored."""

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self.data = {}
        if self.path is not None:
            if not self.path.exists():
                raise ScenarioError(f"scenario file not found: {self.path}")
            self._read()

    def _read(self):
        with open(self.path, "r") as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ScenarioError(f"{self.path}:{lineno}: expected key=value, got '{line}'")
                key, value = line.split("=", 1)
                self.data[key.strip()] = value.strip()

    def get(self, key, default=None):
        return self.data.get(key, default)

    def set(self, key, value):
        self.data[key] = str(value)

    def update(self, pairs):
        for key, value in pairs.items():
            self.set(key, value)

    def save(self, path=None, header=None):
        path = Path(path) if path else self.path
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            if header:
                f.write(header)
            for key, value in self.data.items():
                f.write(f"{key}={value}\n")
        return path


def scenario_to_pairs(s: Scenario):
    m, sch, p, g = s.medium, s.schedule, s.probe, s.grid
    pairs = {
        "name": s.name,
        "release_mode": s.release_mode,
        "medium.gamma3": _fmt(m.gamma3),
        "medium.gamma2": _fmt(m.gamma2),
        "medium.detuning": m.detuning_mode,
        "medium.delta_plus": _fmt(m.delta_plus),
        "medium.delta_minus": _fmt(m.delta_minus),
        "medium.ng2": _fmt(m.ng2),
        "medium.c": _fmt(m.c),
        "medium.k_o": _fmt(m.k_o),
        "medium.length": _fmt(m.length_L),
        "medium.g": _fmt(m.coupling_g),
        "schedule.omega_plus": sch.omega_plus.to_text(),
        "schedule.omega_minus": sch.omega_minus.to_text(),
        "schedule.phi_plus": _fmt(sch.phi_plus),
        "schedule.phi_minus": _fmt(sch.phi_minus),
        "schedule.ramp_time": _fmt(sch.ramp_time),
        "probe.amplitude": _fmt(p.amplitude_in),
        "probe.duration": _fmt(p.duration),
        "probe.center_z": _fmt(p.center_z),
        "probe.phase": _fmt(p.phase),
        "grid.nz": str(g.nz),
        "grid.dt": _fmt(g.dt),
        "grid.t_start": _fmt(g.t_start),
        "grid.t_end": _fmt(g.t_end),
        "grid.nk": str(g.nk),
        "grid.k_max": _fmt(g.k_max),
        "times.t_o": _fmt(s.t_o),
        "times.t_1": _fmt(s.t_1),
        "output.snapshots": ",".join(_fmt(t) for t in s.snapshots),
    }
    return pairs


def _number(data, key, cast=float, default=None):
    raw = data.get(key)
    if raw is None or raw == "":
        if default is None:
            raise ScenarioError(f"missing required key '{key}'")
        return default
    try:
        return cast(raw)
    except ValueError:
        raise ScenarioError(f"key '{key}' has non-numeric value '{raw}'")


def parse_times(text):
    """Comma-separated list of times, as used by --snapshots and output.snapshots."""
    if text is None or not str(text).strip():
        return ()
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise ScenarioError(f"cannot parse time list '{text}'")


def scenario_from_pairs(data) -> Scenario:
    data = {k: v for k, v in data.items() if not k.startswith(IGNORED_PREFIXES)}
    unknown = sorted(set(data) - set(KNOWN_KEYS))
    if unknown:
        raise ScenarioError(f"unknown scenario keys: {', '.join(unknown)}")
    try:
        mode = data.get("medium.detuning", "explicit")
        delta_minus = data.get("medium.delta_minus")
        medium = MediumParams.with_detuning(
            _number(data, "medium.delta_plus"),
            mode,
            delta_minus=_number(data, "medium.delta_minus") if delta_minus not in (None, "") else None,
            gamma3=_number(data, "medium.gamma3"),
            gamma2=_number(data, "medium.gamma2", default=0.0),
            ng2=_number(data, "medium.ng2"),
            c=_number(data, "medium.c"),
            k_o=_number(data, "medium.k_o", default=0.0),
            length_L=_number(data, "medium.length"),
            coupling_g=_number(data, "medium.g", default=1.0),
        )
        schedule = ControlSchedule(
            ControlProfile.from_text(data.get("schedule.omega_plus", "")),
            ControlProfile.from_text(data.get("schedule.omega_minus", "0")),
            phi_plus=_number(data, "schedule.phi_plus", default=0.0),
            phi_minus=_number(data, "schedule.phi_minus", default=0.0),
            ramp_time=_number(data, "schedule.ramp_time", default=0.25),
        )
        probe = ProbePulse(
            amplitude_in=_number(data, "probe.amplitude"),
            duration=_number(data, "probe.duration"),
            center_z=_number(data, "probe.center_z"),
            phase=_number(data, "probe.phase", default=0.0),
        )
        grid = Grid(
            nz=_number(data, "grid.nz", int),
            dt=_number(data, "grid.dt"),
            t_start=_number(data, "grid.t_start"),
            t_end=_number(data, "grid.t_end"),
            nk=_number(data, "grid.nk", int),
            k_max=_number(data, "grid.k_max"),
        )
    except ParameterError as e:
        raise ScenarioError(f"invalid scenario parameter: {e}")
    return Scenario(
        medium, schedule, probe, grid,
        t_o=_number(data, "times.t_o"),
        t_1=_number(data, "times.t_1"),
        release_mode=data.get("release_mode", "forward"),
        snapshots=parse_times(data.get("output.snapshots")),
        name=data.get("name", "custom"),
    )


def load_scenario(path) -> Scenario:
    scenario = scenario_from_pairs(ScenarioFile(path).data)
    logger.debug("Loaded scenario '%s' from %s", scenario.name, path)
    return scenario


def save_scenario(s: Scenario, path, extra=None, header=None):
    """Write the scenario keys, followed by any `extra` pairs (run.*, provenance.*)."""
    sf = ScenarioFile()
    sf.update(scenario_to_pairs(s))
    if extra:
        sf.update(extra)
    return sf.save(path, header)


def resolve_scenario(ref) -> Scenario:
    """A builtin name, a path, or a file name under the configured scenario directory."""
    if ref is None:
        return builtin_scenario("default")
    builtin = builtin_scenario(ref)
    if builtin is not None:
        return builtin
    path = Path(ref)
    if path.exists():
        return load_scenario(path)
    candidate = config.SCENARIO_DIR / ref
    if candidate.exists():
        return load_scenario(candidate)
    raise ScenarioError(
        f"'{ref}' is neither a scenario file nor a builtin ({', '.join(builtin_scenarios())})")
