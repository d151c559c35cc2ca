"""
Method-of-lines integrator for the mean-field light-matter equations.

    ∂t P± = −γ±P± + igA± + iΩ±e^{∓ik_o z}P12
    ∂t P12 = −γ2P12 + i(Ω+* e^{ik_o z}P+ + Ω−* e^{−ik_o z}P−)
    (∂t ± c∂z)A± = igN·P±

Advection is first-order upwind on cell-centred nodes, time stepping is
classical RK4. The probe enters through the z=0 boundary of A+; nothing
enters A− at z=L and both fields leave freely.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from tcsl.core import AtomicState, ControlProfile, ControlSchedule, FieldState, MediumParams, Scenario
from tcsl.core import validate_scenario
from tcsl.dispersion import beta_s
from tcsl.errors import DivergenceError, GridError, ScenarioError

logger = logging.getLogger(__name__)

MODES = ("full", "adiabatic")

# |p12| above this leaves the weak-field regime
WEAK_FIELD_LIMIT = 0.1

DIVERGENCE_LIMIT = 1e12

_A_PLUS, _A_MINUS, _P_PLUS, _P_MINUS, _P12 = range(5)


@dataclass(frozen=True)
class SimulationState:
    t: float
    fields: FieldState
    atoms: AtomicState
    dz: float

    @property
    def nz(self):
        return self.fields.a_plus.size

    @property
    def z(self):
        return (np.arange(self.nz) + 0.5) * self.dz

    @property
    def p12(self):
        return self.atoms.p12

    @classmethod
    def zeros(cls, nz, dz, t=0.0):
        zero = np.zeros(nz, dtype=complex)
        return cls(t, FieldState(zero, zero), AtomicState(zero, zero, zero), dz)

    def _pack(self):
        return np.array([self.fields.a_plus, self.fields.a_minus,
                         self.atoms.p_plus, self.atoms.p_minus, self.atoms.p12], dtype=complex)

    @classmethod
    def _unpack(cls, t, y, dz):
        return cls(float(t), FieldState(y[_A_PLUS], y[_A_MINUS]),
                   AtomicState(y[_P_PLUS], y[_P_MINUS], y[_P12]), dz)


@dataclass
class Diagnostics:
    """Per-step record of field norms, |p12|max and the CFL margin dz/(c·dt)."""

    every: int = 1
    times: list = field(default_factory=list)
    norm_plus: list = field(default_factory=list)
    norm_minus: list = field(default_factory=list)
    p12_max: list = field(default_factory=list)
    cfl_margin: list = field(default_factory=list)
    _count: int = 0

    def record(self, t, y, dz, cfl_margin):
        self._count += 1
        if self._count % self.every:
            return
        self.times.append(float(t))
        self.norm_plus.append(float(np.sum(np.abs(y[_A_PLUS]) ** 2) * dz))
        self.norm_minus.append(float(np.sum(np.abs(y[_A_MINUS]) ** 2) * dz))
        self.p12_max.append(float(np.max(np.abs(y[_P12]))))
        self.cfl_margin.append(float(cfl_margin))

    def rows(self):
        return list(zip(self.times, self.norm_plus, self.norm_minus, self.p12_max,
                        self.cfl_margin))


class _Equations:
    """Right-hand side with the per-run constants precomputed."""

    def __init__(self, medium: MediumParams, schedule: ControlSchedule, nz, dz, mode="full",
                 inflow: Optional[Callable] = None):
        if mode not in MODES:
            raise ScenarioError(f"mode must be one of {MODES}")
        self.medium = medium
        self.schedule = schedule
        self.dz = dz
        self.mode = mode
        self.inflow = inflow
        z = (np.arange(nz) + 0.5) * dz
        self.carrier_plus = np.exp(-1j * medium.k_o * z)
        self.carrier_minus = np.exp(1j * medium.k_o * z)
        self.gamma_plus = medium.gamma_plus
        self.gamma_minus = medium.gamma_minus
        self.g = medium.coupling_g
        self.gn = medium.number_density * medium.coupling_g

    def adiabatic_polarizations(self, t, y):
        """P± = iγ±⁻¹(gA± + Ω±e^{∓ik_o z}P12)."""
        rabi_plus, rabi_minus = self.schedule.rabi(t)
        p_plus = 1j / self.gamma_plus * (self.g * y[_A_PLUS]
                                         + rabi_plus * self.carrier_plus * y[_P12])
        p_minus = 1j / self.gamma_minus * (self.g * y[_A_MINUS]
                                           + rabi_minus * self.carrier_minus * y[_P12])
        return p_plus, p_minus

    def _advection(self, t, y):
        c, dz = self.medium.c, self.dz
        inflow = self.inflow(t) if self.inflow is not None else 0.0
        left = np.concatenate(([inflow], y[_A_PLUS, :-1]))
        right = np.concatenate((y[_A_MINUS, 1:], [0.0]))
        return -c * (y[_A_PLUS] - left) / dz, -c * (y[_A_MINUS] - right) / dz

    def __call__(self, t, y):
        rabi_plus, rabi_minus = self.schedule.rabi(t)
        dy = np.empty_like(y)
        adv_plus, adv_minus = self._advection(t, y)
        if self.mode == "full":
            p_plus, p_minus = y[_P_PLUS], y[_P_MINUS]
            dy[_P_PLUS] = (-self.gamma_plus * p_plus + 1j * self.g * y[_A_PLUS]
                           + 1j * rabi_plus * self.carrier_plus * y[_P12])
            dy[_P_MINUS] = (-self.gamma_minus * p_minus + 1j * self.g * y[_A_MINUS]
                            + 1j * rabi_minus * self.carrier_minus * y[_P12])
            dy[_P12] = (-self.medium.gamma2 * y[_P12]
                        + 1j * (np.conj(rabi_plus) * self.carrier_minus * p_plus
                                + np.conj(rabi_minus) * self.carrier_plus * p_minus))
        else:
            p_plus, p_minus = self.adiabatic_polarizations(t, y)
            rate = beta_s(t, self.medium, self.schedule) / (self.gamma_plus * self.gamma_minus)
            drive = (np.conj(rabi_plus) * self.carrier_minus * self.g * y[_A_PLUS] / self.gamma_plus
                     + np.conj(rabi_minus) * self.carrier_plus * self.g * y[_A_MINUS]
                     / self.gamma_minus)
            dy[_P_PLUS] = 0.0
            dy[_P_MINUS] = 0.0
            dy[_P12] = -rate * y[_P12] - drive
        dy[_A_PLUS] = adv_plus + 1j * self.gn * p_plus
        dy[_A_MINUS] = adv_minus + 1j * self.gn * p_minus
        return dy

    def finalize(self, t, y):
        """Refresh the slaved polarizations after a step in adiabatic mode."""
        if self.mode == "adiabatic":
            y[_P_PLUS], y[_P_MINUS] = self.adiabatic_polarizations(t, y)
        return y


def _rk4(eq, t, y, h):
    k1 = eq(t, y)
    k2 = eq(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = eq(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = eq(t + h, y + h * k3)
    return eq.finalize(t + h, y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


class _WeakFieldMonitor:
    def __init__(self):
        self.warned = False
        self.peak = 0.0

    def check(self, t, y):
        peak = float(np.max(np.abs(y[_P12])))
        self.peak = max(self.peak, peak)
        if peak > WEAK_FIELD_LIMIT and not self.warned:
            logger.warning("|p12| reaches %.3g at t=%.6g: outside the weak-field regime", peak, t)
            self.warned = True


def _advance(eq, y, t, t_target, dt, diagnostics=None, monitor=None):
    """Step from t to exactly t_target with equal substeps no longer than dt."""
    span = t_target - t
    if span < 0:
        raise ScenarioError(f"cannot integrate backwards from t={t} to t={t_target}")
    if span == 0:
        return y, t
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    h = span / n_steps
    cfl_margin = eq.dz / (eq.medium.c * h)
    for i in range(n_steps):
        t_next = t_target if i == n_steps - 1 else t + h
        y_next = _rk4(eq, t, y, h)
        if not np.all(np.isfinite(y_next)) or np.max(np.abs(y_next)) > DIVERGENCE_LIMIT:
            raise DivergenceError("time-domain state diverged", last_good_time=t)
        y, t = y_next, t_next
        if diagnostics is not None:
            diagnostics.record(t, y, eq.dz, cfl_margin)
        if monitor is not None:
            monitor.check(t, y)
    return y, t


def rhs(state: SimulationState, medium, schedule, mode="full", inflow=None) -> SimulationState:
    """Time derivative of every field and coherence, packed as a SimulationState."""
    eq = _Equations(medium, schedule, state.nz, state.dz, mode, inflow)
    return SimulationState._unpack(state.t, eq(state.t, state._pack()), state.dz)


def step(state: SimulationState, dt, medium, schedule, mode="full", inflow=None) -> SimulationState:
    if dt > state.dz / medium.c * (1 + 1e-12):
        raise GridError(f"dt={dt:.6g} exceeds the advection bound dz/c={state.dz / medium.c:.6g}")
    eq = _Equations(medium, schedule, state.nz, state.dz, mode, inflow)
    y = _rk4(eq, state.t, state._pack(), dt)
    if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > DIVERGENCE_LIMIT:
        raise DivergenceError("time-domain state diverged", last_good_time=state.t)
    return SimulationState._unpack(state.t + dt, y, state.dz)


def integrate(state: SimulationState, t_end, dt, medium, schedule, mode="full", inflow=None,
              diagnostics=None) -> SimulationState:
    """Initial-value integration from state.t to t_end."""
    eq = _Equations(medium, schedule, state.nz, state.dz, mode, inflow)
    y = eq.finalize(state.t, state._pack())
    y, t = _advance(eq, y, state.t, t_end, dt, diagnostics)
    return SimulationState._unpack(t, y, state.dz)


def boundary_inflow(s: Scenario):
    """A+(t, z=0): Gaussian in time that places the probe centroid at center_z at t_o."""
    probe = s.probe
    t_entry = s.entry_time
    amplitude = probe.amplitude_in * np.exp(1j * probe.phase)

    def inflow(t):
        return amplitude * math.exp(-0.5 * ((t - t_entry) / probe.duration) ** 2)

    return inflow


def run(s: Scenario, mode="full", times=None, diagnostics=None):
    """Inject the probe from t_start and return SimulationStates at the output times."""
    validate_scenario(s)
    grid, medium = s.grid, s.medium
    times = sorted(times) if times else list(s.output_times)
    if times and times[0] < grid.t_start:
        raise ScenarioError(f"output time {times[0]} precedes t_start={grid.t_start}")
    dz = grid.dz(medium.length_L)
    eq = _Equations(medium, s.schedule, grid.nz, dz, mode, boundary_inflow(s))
    monitor = _WeakFieldMonitor()
    y = np.zeros((5, grid.nz), dtype=complex)
    t = grid.t_start
    states = []
    logger.info("Time-domain run '%s' (%s mode): nz=%d dt=%.3g over [%g, %g]",
                s.name, mode, grid.nz, grid.dt, t, times[-1] if times else t)
    for t_out in times:
        y, t = _advance(eq, y, t, t_out, grid.dt, diagnostics, monitor)
        states.append(SimulationState._unpack(t, y.copy(), dz))
        logger.debug("Snapshot at t=%.6g, |p12|max=%.3g", t, states[-1].atoms.p12_max)
    return states


# Direction symmetry: swapping the ± roles and reflecting z → L − z

def mirror_medium(medium: MediumParams) -> MediumParams:
    return replace(medium, delta_plus=medium.delta_minus, delta_minus=medium.delta_plus,
                   detuning_mode="explicit")


def mirror_schedule(schedule: ControlSchedule) -> ControlSchedule:
    return ControlSchedule(schedule.omega_minus, schedule.omega_plus,
                           schedule.phi_minus, schedule.phi_plus, schedule.ramp_time)


def mirror_state(state: SimulationState) -> SimulationState:
    y = state._pack()[[_A_MINUS, _A_PLUS, _P_MINUS, _P_PLUS, _P12], ::-1]
    return SimulationState._unpack(state.t, y, state.dz)


def constant_schedule(omega_plus, omega_minus=0.0, ramp_time=0.25) -> ControlSchedule:
    return ControlSchedule(ControlProfile(omega_plus), ControlProfile(omega_minus),
                           ramp_time=ramp_time)
