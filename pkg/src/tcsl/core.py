"""
Domain types shared by every solver: medium constants, control schedules,
probe pulse, grids, field/atomic/spectral snapshots and the scenario that
ties them together.

All quantities are in nondimensional simulation units anchored on the entry
group velocity v_o = 1.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from tcsl.errors import GridError, ParameterError, ScenarioError

logger = logging.getLogger(__name__)

RELEASE_MODES = ("forward", "backward")
DETUNING_MODES = ("symmetric", "equal", "explicit")

# Margin a physics-regime condition must reach to count as satisfied
PASS_MARGIN = 10.0


def _require_finite(name, value):
    if not np.all(np.isfinite(value)):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class MediumParams:
    """Atomic and medium constants."""

    gamma3: float
    gamma2: float
    delta_plus: float
    delta_minus: float
    ng2: float
    c: float
    k_o: float
    length_L: float
    coupling_g: float = 1.0
    detuning_mode: str = "explicit"

    def __post_init__(self):
        for name in ("gamma3", "gamma2", "delta_plus", "delta_minus", "ng2", "c", "k_o",
                     "length_L", "coupling_g"):
            _require_finite(name, getattr(self, name))
        if self.gamma3 <= 0:
            raise ParameterError("gamma3 must be positive")
        if self.gamma2 < 0:
            raise ParameterError("gamma2 must be nonnegative")
        if self.c <= 0 or self.ng2 <= 0 or self.length_L <= 0 or self.coupling_g <= 0:
            raise ParameterError("c, ng2, length_L and coupling_g must be positive")
        if self.k_o < 0:
            raise ParameterError("k_o must be nonnegative")
        if self.detuning_mode not in DETUNING_MODES:
            raise ParameterError(f"unknown detuning mode '{self.detuning_mode}'")

    @classmethod
    def with_detuning(cls, delta_plus, mode="symmetric", delta_minus=None, **kwargs):
        """Build a medium whose Δ− follows Δ+ according to `mode`."""
        if mode == "symmetric":
            delta_minus = -delta_plus
        elif mode == "equal":
            delta_minus = delta_plus
        elif mode == "explicit":
            if delta_minus is None:
                raise ParameterError("explicit detuning mode needs delta_minus")
        else:
            raise ParameterError(f"unknown detuning mode '{mode}'")
        return cls(delta_plus=delta_plus, delta_minus=delta_minus, detuning_mode=mode, **kwargs)

    @property
    def xi(self):
        return self.ng2 / (self.c * self.gamma3)

    @property
    def gamma_plus(self):
        return complex(self.gamma3, -self.delta_plus)

    @property
    def gamma_minus(self):
        return complex(self.gamma3, -self.delta_minus)

    @property
    def number_density(self):
        return self.ng2 / self.coupling_g ** 2

    @property
    def sqrt_ng2(self):
        return math.sqrt(self.ng2)


@dataclass(frozen=True)
class DerivedParams:
    xi: float
    gamma_plus: complex
    gamma_minus: complex
    v_o: float
    l_cor: float


def derive_parameters(medium: MediumParams, omega: float) -> DerivedParams:
    """ξ, γ±, slow-light velocity for Rabi amplitude `omega`, and the correlation length."""
    _require_finite("omega", omega)
    if omega < 0:
        raise ParameterError("Rabi amplitude must be nonnegative")
    xi = medium.xi
    v_o = medium.c * omega ** 2 / medium.ng2
    l_cor = math.sqrt((medium.delta_minus ** 2 + medium.gamma3 ** 2) / medium.gamma3 ** 2) / xi
    return DerivedParams(xi, medium.gamma_plus, medium.gamma_minus, v_o, l_cor)


@dataclass(frozen=True)
class ControlProfile:
    """
    Piecewise-constant Rabi amplitude with cosine ramps.

    `switches` is a sequence of (time, level); the ramp to each new level
    starts at its switch time and lasts `ramp_time`.
    """

    initial: float
    switches: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        levels = [self.initial] + [level for _, level in self.switches]
        if any(level < 0 or not math.isfinite(level) for level in levels):
            raise ParameterError("control amplitudes must be finite and nonnegative")
        times = [t for t, _ in self.switches]
        if times != sorted(times):
            raise ParameterError("control switch times must be increasing")

    def value(self, t, ramp_time):
        t_arr = np.asarray(t, dtype=float)
        out = np.full(t_arr.shape, float(self.initial))
        level = self.initial
        for t_switch, new_level in self.switches:
            s = np.clip((t_arr - t_switch) / ramp_time, 0.0, 1.0)
            out = out + (new_level - level) * 0.5 * (1.0 - np.cos(np.pi * s))
            level = new_level
        return float(out) if np.ndim(t) == 0 else out

    def level_after(self, t):
        """Plateau level reached once every switch at or before `t` has finished ramping."""
        level = self.initial
        for t_switch, new_level in self.switches:
            if t_switch <= t:
                level = new_level
        return level

    def edges(self, ramp_time):
        out = []
        for t_switch, _ in self.switches:
            out.extend((t_switch, t_switch + ramp_time))
        return out

    def to_text(self):
        parts = [f"{self.initial:.9g}"]
        parts += [f"{level:.9g}@{t:.9g}" for t, level in self.switches]
        return "; ".join(parts)

    @classmethod
    def from_text(cls, text):
        pieces = [p.strip() for p in str(text).split(";") if p.strip()]
        if not pieces:
            raise ScenarioError("empty control profile")
        try:
            initial = float(pieces[0])
            switches = []
            for piece in pieces[1:]:
                level, t_switch = piece.split("@")
                switches.append((float(t_switch), float(level)))
        except ValueError as e:
            raise ScenarioError(f"cannot parse control profile '{text}': {e}")
        return cls(initial, tuple(switches))


@dataclass(frozen=True)
class ControlSchedule:
    omega_plus: ControlProfile
    omega_minus: ControlProfile
    phi_plus: float = 0.0
    phi_minus: float = 0.0
    ramp_time: float = 0.25

    def __post_init__(self):
        if not (self.ramp_time > 0):
            raise ParameterError("ramp_time must be positive")

    def amplitudes(self, t):
        """Real amplitudes (Ω+,0(t), Ω−,0(t))."""
        return (self.omega_plus.value(t, self.ramp_time),
                self.omega_minus.value(t, self.ramp_time))

    def rabi(self, t):
        """Complex Rabi frequencies Ω±(t) = Ω±,0(t)·e^{iφ±}."""
        op, om = self.amplitudes(t)
        return op * np.exp(1j * self.phi_plus), om * np.exp(1j * self.phi_minus)

    def breakpoints(self, a, b):
        edges = self.omega_plus.edges(self.ramp_time) + self.omega_minus.edges(self.ramp_time)
        return sorted({t for t in edges if a < t < b})


@dataclass(frozen=True)
class ProbePulse:
    """Gaussian probe: peak magnitude `amplitude_in`, carrier phase `phase`."""

    amplitude_in: float
    duration: float
    center_z: float
    phase: float = 0.0

    def __post_init__(self):
        _require_finite("amplitude_in", self.amplitude_in)
        if self.amplitude_in < 0:
            raise ParameterError("probe amplitude must be nonnegative; its phase goes in `phase`")
        if not (self.duration > 0):
            raise ParameterError("probe duration must be positive")

    def spatial_size(self, v_o):
        return v_o * self.duration


@dataclass(frozen=True)
class Grid:
    nz: int
    dt: float
    t_start: float
    t_end: float
    nk: int
    k_max: float

    def dz(self, length_L):
        return length_L / self.nz

    def z(self, length_L):
        """Cell-centred spatial nodes on [0, L]."""
        dz = self.dz(length_L)
        return (np.arange(self.nz) + 0.5) * dz

    @property
    def dk(self):
        return 2.0 * self.k_max / self.nk

    def k(self):
        """Symmetric wavenumber grid; contains k=0."""
        return (np.arange(self.nk) - self.nk // 2) * self.dk


def _frozen_array(values, dtype=complex):
    arr = np.array(values, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FieldState:
    a_plus: np.ndarray
    a_minus: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a_plus", _frozen_array(self.a_plus))
        object.__setattr__(self, "a_minus", _frozen_array(self.a_minus))
        if self.a_plus.shape != self.a_minus.shape:
            raise GridError("a_plus and a_minus must have equal length")

    def branch(self, sigma):
        return self.a_plus if sigma == "+" else self.a_minus


@dataclass(frozen=True)
class AtomicState:
    p_plus: np.ndarray
    p_minus: np.ndarray
    p12: np.ndarray

    def __post_init__(self):
        for name in ("p_plus", "p_minus", "p12"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))

    @property
    def p12_max(self):
        return float(np.max(np.abs(self.p12))) if self.p12.size else 0.0


@dataclass(frozen=True)
class SpectralState:
    k: np.ndarray
    psi_plus_k: np.ndarray
    psi_minus_k: np.ndarray
    k_o: float
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k", _frozen_array(self.k, dtype=float))
        object.__setattr__(self, "psi_plus_k", _frozen_array(self.psi_plus_k))
        object.__setattr__(self, "psi_minus_k", _frozen_array(self.psi_minus_k))

    @property
    def dk(self):
        return float(self.k[1] - self.k[0])

    def norm(self, sigma="+"):
        psi = self.psi_plus_k if sigma == "+" else self.psi_minus_k
        return float(np.sum(np.abs(psi) ** 2) * self.dk)


@dataclass(frozen=True)
class Scenario:
    medium: MediumParams
    schedule: ControlSchedule
    probe: ProbePulse
    grid: Grid
    t_o: float
    t_1: float
    release_mode: str = "forward"
    snapshots: Tuple[float, ...] = ()
    name: str = "custom"

    @property
    def v_o(self):
        """Entry group velocity c·Ω+²/Ng² with Ω+ taken at t_o."""
        omega = self.schedule.omega_plus.value(self.t_o, self.schedule.ramp_time)
        return self.medium.c * omega ** 2 / self.medium.ng2

    @property
    def l_o(self):
        return self.probe.spatial_size(self.v_o)

    @property
    def entry_time(self):
        """Time at which the probe centroid crosses z=0."""
        return self.t_o - self.probe.center_z / self.v_o

    @property
    def output_times(self):
        if self.snapshots:
            return tuple(sorted(self.snapshots))
        return (self.t_o, self.t_1, self.t_end)

    @property
    def t_end(self):
        return self.grid.t_end

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class Condition:
    name: str
    margin: float
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    scenario: str
    conditions: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.conditions)

    def add(self, name, margin, detail=""):
        passed = bool(margin >= PASS_MARGIN)
        self.conditions.append(Condition(name, float(margin), passed, detail))
        if not passed:
            logger.warning("Regime condition '%s' has margin %.4g < %g", name, margin, PASS_MARGIN)

    def render(self):
        lines = [f"scenario={self.scenario}"]
        for c in self.conditions:
            flag = "pass" if c.passed else "warn"
            lines.append(f"{c.name}={c.margin:.9g} {flag}" + (f" # {c.detail}" if c.detail else ""))
        lines.append(f"overall={'pass' if self.passed else 'warn'}")
        return "\n".join(lines) + "\n"


def _check_structure(s: Scenario):
    g = s.grid
    medium = s.medium
    if not (g.t_start < s.t_o < s.t_1 < g.t_end):
        raise ScenarioError(
            f"time ordering violated: need t_start < t_o < t_1 < t_end, got "
            f"{g.t_start}, {s.t_o}, {s.t_1}, {g.t_end}")
    if g.nz < 2 or g.nk < 2:
        raise GridError("nz and nk must be at least 2")
    cfl = g.dz(medium.length_L) / medium.c
    if g.dt > cfl * (1 + 1e-12):
        raise GridError(f"dt={g.dt:.6g} exceeds the advection bound dz/c={cfl:.6g}")
    if g.nk < g.nz:
        raise GridError(f"nk={g.nk} must be at least nz={g.nz}")
    if s.release_mode not in RELEASE_MODES:
        raise ScenarioError(f"release_mode must be one of {RELEASE_MODES}")
    if s.v_o <= 0:
        raise ScenarioError("Ω+ must be on at t_o")
    l_o = s.l_o
    if g.k_max * l_o < 8:
        raise GridError(f"k grid does not resolve the pulse: k_max·l_o={g.k_max * l_o:.3g} < 8")
    if s.probe.center_z - 3 * l_o < 0 or s.probe.center_z + 3 * l_o > medium.length_L:
        raise ScenarioError("probe is not fully inside the medium at t_o")
    if s.entry_time - 3 * s.probe.duration < g.t_start:
        raise ScenarioError("probe injection starts before t_start; move t_start earlier")


def validate_scenario(s: Scenario) -> ValidationReport:
    """
    Structural problems raise; physics-regime conditions are reported with
    their margins and only warn.
    """
    from tcsl.dispersion import beta_s

    _check_structure(s)
    medium = s.medium
    gp, gm = medium.gamma_plus, medium.gamma_minus
    dt_o = s.probe.duration
    report = ValidationReport(s.name)

    report.add("adiabatic_optical", min(abs(gp), abs(gm)) * dt_o, "|γ±|·δt_o ≫ 1")

    # β_s/(γ+γ−) on the trap plateau, after the switch-on ramp has finished
    plateau = np.linspace(min(s.t_o + s.schedule.ramp_time, s.t_1), s.t_1, 64)
    rates = np.abs(beta_s(plateau, medium, s.schedule) / (gp * gm))
    report.add("adiabatic_switching", float(np.min(rates)) * dt_o, "δt_o·|β_s/(γ+γ−)| ≫ 1")

    if medium.k_o > 0:
        splitting = 2.0 / (medium.xi * s.l_o ** 2 * medium.k_o)
    else:
        splitting = math.inf
    report.add("weak_splitting", splitting, "ω21 ≪ 2c/(ξ·l_o²)")

    report.add("two_color_separation", abs(medium.delta_plus - medium.delta_minus) * dt_o,
               "|Δ+ − Δ−|·δt_o ≫ 1")
    report.add("slow_light", medium.c / s.v_o, "v_o ≪ c")
    omega_t0 = s.schedule.omega_plus.value(s.t_o, s.schedule.ramp_time)
    amp = s.probe.amplitude_in * medium.coupling_g
    report.add("weak_field", omega_t0 / amp if amp > 0 else math.inf, "g·|A_in|/Ω ≪ 1")
    return report


def _switched_schedule(omega, t_o, t_1, release_mode, ramp_time):
    if release_mode == "forward":
        plus = ControlProfile(omega)
        minus = ControlProfile(0.0, ((t_o, omega), (t_1, 0.0)))
    else:
        plus = ControlProfile(omega, ((t_1, 0.0),))
        minus = ControlProfile(0.0, ((t_o, omega),))
    return ControlSchedule(plus, minus, ramp_time=ramp_time)


def default_scenario(release_mode="forward", gamma2=0.0, name="default", light_speed=1000.0,
                     k_o=0.01, t_end=12.0) -> Scenario:
    """
    Desk-scale trap: ξL=100, ξl_o=10, v_o=1, δt_o=1, Ω±=100, t_o=5, t_1=10.

    γ3 is raised to 1000 so that v_o·ξ = Ω²/γ3 holds with Ω=100. Ng² scales
    with `light_speed`, so ξ and v_o do not depend on it. The probe sits in
    the middle of the medium at t_o.
    """
    medium = MediumParams.with_detuning(
        50.0, "symmetric",
        gamma3=1000.0, gamma2=gamma2, ng2=1.0e4 * light_speed, c=light_speed, k_o=k_o,
        length_L=10.0)
    t_o, t_1 = 5.0, 10.0
    nz = 400
    grid = Grid(nz=nz, dt=medium.length_L / nz / medium.c, t_start=-5.0, t_end=t_end,
                nk=4 * nz, k_max=10.0)
    schedule = _switched_schedule(100.0, t_o, t_1, release_mode, ramp_time=0.25)
    probe = ProbePulse(amplitude_in=1.0, duration=1.0, center_z=0.5 * medium.length_L)
    snapshots = tuple(float(t) for t in np.arange(t_o, grid.t_end + 1e-9, 0.5))
    return Scenario(medium, schedule, probe, grid, t_o, t_1, release_mode, snapshots, name)


# c=100 keeps an explicit time-domain run of a builtin under a minute
DESK_LIGHT_SPEED = 100.0

BUILTIN_ALIASES = {
    "forward-release": "fig2ab",
    "backward-release": "fig2cd",
    "storage": "fig3",
    "storage-decay": "fig3-decay",
}


def builtin_scenarios():
    c = DESK_LIGHT_SPEED
    return {
        "default": default_scenario(light_speed=c),
        "fig2ab": default_scenario("forward", name="fig2ab", light_speed=c, t_end=11.0),
        "fig2cd": default_scenario("backward", name="fig2cd", light_speed=c, t_end=16.0),
        "fig3": default_scenario("forward", name="fig3", light_speed=c, k_o=0.0, t_end=15.0),
        "fig3-decay": default_scenario("forward", gamma2=0.01, name="fig3-decay", light_speed=c,
                                       t_end=15.0),
    }


def builtin_scenario(name) -> Optional[Scenario]:
    """Builtin by name or by its descriptive alias."""
    return builtin_scenarios().get(BUILTIN_ALIASES.get(name, name))
