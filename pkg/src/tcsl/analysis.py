"""
Closed-form predictions for trapped two-color pulses and the observables
measured from simulated fields.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.integrate import quad, quad_vec, trapezoid

from tcsl.core import FieldState, Scenario
from tcsl.dispersion import alpha_tilde, beta_s, group_velocity, omega_full
from tcsl.errors import ComparisonError, ContainmentError

logger = logging.getLogger(__name__)

# A pulse whose edge samples exceed this fraction of its peak is clipped
CONTAINMENT_TOL = 1e-3


# Envelope predictions

def separation_D(medium):
    """Distance between the forward and backward centroids, (γ+ + γ−)/(γ3ξ)."""
    return (medium.gamma_plus + medium.gamma_minus) / (medium.gamma3 * medium.xi)


def centroid_offset(t, s: Scenario, branch="+"):
    """Complex offset z_σ(t) of a branch relative to the transported centre."""
    medium = s.medium
    _, am = alpha_tilde(t, medium, s.schedule)
    gp, gm = medium.gamma_plus, medium.gamma_minus
    z_plus = gp * am * (gp + gm) / (medium.gamma3 ** 2 * medium.xi)
    return z_plus if branch == "+" else z_plus - separation_D(medium)


def transport_distance(t, s: Scenario):
    """∫_{t_o}^{t} v(t') dt'."""
    if t == s.t_o:
        return 0.0
    a, b = sorted((s.t_o, t))
    points = s.schedule.breakpoints(a, b) or None
    value, _ = quad(lambda tp: group_velocity(tp, s.medium, s.schedule), a, b,
                    points=points, limit=200)
    return value if t > s.t_o else -value


def centroid_z(t, s: Scenario, branch="+"):
    """Complex centroid; the real part is the position, the imaginary part a phase modulation."""
    return s.probe.center_z + transport_distance(t, s) + centroid_offset(t, s, branch)


def _spread_integrand(t, s: Scenario):
    """β_s·M/γ3² with M = 1 + (α̃+ − α̃−)E."""
    medium = s.medium
    g3 = medium.gamma3
    gp, gm = medium.gamma_plus, medium.gamma_minus
    ap, am = alpha_tilde(t, medium, s.schedule)
    e = am * (gp / g3) ** 2 - ap * (gm / g3) ** 2
    value = beta_s(t, medium, s.schedule) * (1.0 + (ap - am) * e) / g3 ** 2
    return np.array([value.real, value.imag])


def complex_width_squared(t, s: Scenario):
    """l²(t) = l_o² + 2χ(t)/ξ², χ = γ3⁻²∫β_s·M dt'."""
    l_o = s.l_o
    if t <= s.t_o:
        return complex(l_o ** 2)
    points = s.schedule.breakpoints(s.t_o, t) or None
    res, _ = quad_vec(lambda tp: _spread_integrand(tp, s), s.t_o, t, epsrel=1e-10, points=points)
    chi = complex(res[0], res[1])
    return l_o ** 2 + 2.0 * chi / s.medium.xi ** 2


def broadened_width(l_o, rate, elapsed, xi):
    """√(l_o² + 4·rate·elapsed/ξ), the stationary symmetric broadening law."""
    return math.sqrt(l_o ** 2 + 4.0 * rate * elapsed / xi)


def width_l(t, s: Scenario, closed_form=False):
    """
    Envelope width |l(t)|.

    closed_form=True uses the symmetric stationary law with the entry
    velocity; otherwise the general quadrature is used and the modulus of
    the complex l is returned.
    """
    if closed_form:
        return broadened_width(s.l_o, s.v_o, max(t - s.t_o, 0.0), s.medium.xi)
    return math.sqrt(abs(complex_width_squared(t, s)))


def measured_width(t, s: Scenario):
    """Width an |A|² profile shows, 1/√Re(1/l²)."""
    return 1.0 / math.sqrt((1.0 / complex_width_squared(t, s)).real)


def gaussian_envelope(t, z, s: Scenario, branch="+"):
    """A_σ = A+,o·(Ω_σ(t)/Ω+(t_o))·(l_o/l)·exp{iϑ − ½(z − z_σ(t))²/l²}."""
    z = np.asarray(z, dtype=float)
    rabi = s.schedule.rabi(t)[0 if branch == "+" else 1]
    rabi_o = s.schedule.rabi(s.t_o)[0]
    l2 = complex_width_squared(t, s)
    centre = centroid_z(t, s, branch)
    amplitude = s.probe.amplitude_in * (rabi / rabi_o) * np.sqrt(s.l_o ** 2 / l2)
    return amplitude * np.exp(1j * s.probe.phase - 0.5 * (z - centre) ** 2 / l2)


# Pulse areas

def _check_contained(values, what):
    mag = np.abs(values)
    peak = np.max(mag) if mag.size else 0.0
    if peak > 0 and max(mag[0], mag[-1]) > CONTAINMENT_TOL * peak:
        raise ContainmentError(f"{what} is clipped by the integration window")


def pulse_area(values, z, v):
    """θ = v⁻¹ ∫ A dz from a spatial snapshot."""
    values = np.asarray(values, dtype=complex)
    if not np.any(values):
        return 0.0 + 0.0j
    if v == 0:
        raise ContainmentError("pulse area from a snapshot needs a nonzero velocity")
    _check_contained(values, "pulse")
    return trapezoid(values, z) / abs(v)


def pulse_area_at_plane(series, times):
    """θ = ∫ A(t, z_plane) dt from a time series at a fixed plane."""
    series = np.asarray(series, dtype=complex)
    if not np.any(series):
        return 0.0 + 0.0j
    _check_contained(series, "time series")
    return trapezoid(series, times)


def trap_plateau(s: Scenario):
    """Control amplitudes held during the trap window."""
    sch = s.schedule
    return sch.omega_plus.level_after(s.t_o), sch.omega_minus.level_after(s.t_o)


def trap_phase_closed_form(s: Scenario, branch="+"):
    """
    ε± accumulated by the k=±k_o mode over [t_o, t_1] with constant
    plateau controls and no ground decay.
    """
    medium = s.medium
    omega_plus, omega_minus = trap_plateau(s)
    g3, xi, k_o = medium.gamma3, medium.xi, medium.k_o
    gp, gm = medium.gamma_plus, medium.gamma_minus
    beta = gm * omega_plus ** 2 + gp * omega_minus ** 2
    ap, am = g3 * omega_plus ** 2 / beta, g3 * omega_minus ** 2 / beta
    if branch == "+":
        rate = -2.0 * k_o * omega_minus ** 2 / (g3 * xi) / (1.0 - 2j * k_o * (gm / g3) ** 2 * ap / xi)
    else:
        rate = -2.0 * k_o * omega_plus ** 2 / (g3 * xi) / (1.0 - 2j * k_o * (gp / g3) ** 2 * am / xi)
    return rate * (s.t_1 - s.t_o)


def trap_phase_quadrature(s: Scenario, branch="+"):
    """∫_{t_o}^{t_1} ω(±k_o, t) dt for the scenario's schedule with γ2 removed."""
    medium = replace(s.medium, gamma2=0.0)
    k = medium.k_o if branch == "+" else -medium.k_o
    points = s.schedule.breakpoints(s.t_o, s.t_1) or None

    def integrand(t):
        w = complex(omega_full(k, t, medium, s.schedule))
        return np.array([w.real, w.imag])

    res, _ = quad_vec(integrand, s.t_o, s.t_1, epsrel=1e-10, points=points)
    return complex(res[0], res[1])


def area_ratio_prediction(t, s: Scenario, branch="+"):
    """θσ(t)/θ+(t_o) = e^{−γ2(t−t_o)}·exp(−iεσ); no decay before t_o."""
    decay = math.exp(-s.medium.gamma2 * max(t - s.t_o, 0.0))
    return decay * np.exp(-1j * trap_phase_closed_form(s, branch))


# Conversion and correlations

def conversion_probability(t_1, t_o, s: Scenario, rate="v_o"):
    """
    P = l_o/l(t_1) for a trap held over [t_o, t_1].

    rate="gamma2" substitutes the ground decay rate for the broadening rate.
    """
    if s.medium.gamma2 * (t_1 - t_o) > 0.1:
        logger.warning("γ2·(t_1 − t_o) = %.3g is not small; decay dominates the conversion",
                       s.medium.gamma2 * (t_1 - t_o))
    if rate == "v_o":
        return s.l_o / width_l(s.t_o + (t_1 - t_o), s, closed_form=True)
    if rate == "gamma2":
        return s.l_o / broadened_width(s.l_o, s.medium.gamma2, t_1 - t_o, s.medium.xi)
    raise ValueError(f"unknown broadening rate '{rate}'")


def first_order_correlation(a, a_prime):
    """⟨A⁺(t',z')A(t,z)⟩ = A*(t',z')·A(t,z) in the mean-field limit."""
    return np.conj(a_prime) * a


# Measured observables

def energy(values, dz):
    return float(np.sum(np.abs(values) ** 2) * dz)


def atomic_norm(p12, dz):
    """∫|P12|²dz, the share of the excitation held by the ground coherence."""
    return float(np.sum(np.abs(p12) ** 2) * dz)


def intensity_moments(intensity, z):
    """Centroid and √2·rms of an intensity profile."""
    intensity = np.asarray(intensity, dtype=float)
    total = np.sum(intensity)
    if total <= 0:
        return math.nan, math.nan
    centroid = float(np.sum(z * intensity) / total)
    rms = math.sqrt(float(np.sum((z - centroid) ** 2 * intensity) / total))
    return centroid, math.sqrt(2.0) * rms


@dataclass(frozen=True)
class PulseMetrics:
    t: float
    area_plus: complex
    area_minus: complex
    energy_plus: float
    energy_minus: float
    centroid: float
    width: float
    conversion: float
    atomic_norm: float = math.nan


def measure_pulse(t, fields, z, v_ref, strict=False, p12=None) -> PulseMetrics:
    """
    Areas (per reference velocity), energies, joint centroid and width,
    and the share of field energy carried by the backward branch.

    Clipped pulses yield NaN areas unless `strict` is set. The atomic norm
    is NaN when no P12 profile is given.
    """
    z = np.asarray(z, dtype=float)
    dz = z[1] - z[0]
    areas = []
    for values in (fields.a_plus, fields.a_minus):
        try:
            areas.append(pulse_area(values, z, v_ref))
        except ContainmentError:
            if strict:
                raise
            areas.append(complex(math.nan, math.nan))
    e_plus, e_minus = energy(fields.a_plus, dz), energy(fields.a_minus, dz)
    centroid, width = intensity_moments(np.abs(fields.a_plus) ** 2 + np.abs(fields.a_minus) ** 2, z)
    total = e_plus + e_minus
    conversion = e_minus / total if total > 0 else 0.0
    held = atomic_norm(p12, dz) if p12 is not None else math.nan
    return PulseMetrics(float(t), areas[0], areas[1], e_plus, e_minus, centroid, width, conversion,
                        held)


def velocity_from_centroids(times, centroids):
    """Least-squares slope of centroid against time."""
    slope, _ = np.polyfit(np.asarray(times, dtype=float), np.asarray(centroids, dtype=float), 1)
    return float(slope)


# Solver comparison

@dataclass
class SpaceTimeData:
    times: np.ndarray
    z: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    p12: Optional[np.ndarray] = None
    label: str = ""

    @classmethod
    def from_snapshots(cls, snapshots, z, label=""):
        """Stack solver snapshots (objects with t, fields and p12)."""
        return cls(np.array([s.t for s in snapshots]), np.asarray(z, dtype=float),
                   np.array([s.fields.a_plus for s in snapshots]),
                   np.array([s.fields.a_minus for s in snapshots]),
                   np.array([s.p12 for s in snapshots]), label)

    def branch(self, sigma):
        return self.a_plus if sigma == "+" else self.a_minus


def relative_l2(a, b):
    """‖|a| − |b|‖/‖b‖; falls back to the absolute norm when b vanishes."""
    diff = np.linalg.norm(np.abs(a) - np.abs(b))
    ref = np.linalg.norm(np.abs(b))
    return float(diff / ref) if ref > 0 else float(diff)


@dataclass
class ComparisonReport:
    label_a: str
    label_b: str
    errors: list = field(default_factory=list)
    overall: dict = field(default_factory=dict)
    trajectories: dict = field(default_factory=dict)

    @property
    def max_error(self):
        return max(self.overall.values()) if self.overall else 0.0

    def render(self, fmt="{:.9g}"):
        lines = [f"run_a={self.label_a}", f"run_b={self.label_b}"]
        for sigma, value in self.overall.items():
            lines.append(f"rel_l2{sigma}={fmt.format(value)}")
        lines.append(f"max_rel_l2={fmt.format(self.max_error)}")
        for t, sigma, value in self.errors:
            lines.append(f"rel_l2{sigma}@{fmt.format(t)}={fmt.format(value)}")
        for label, rows in self.trajectories.items():
            for m in rows:
                lines.append(f"{label}@{fmt.format(m.t)}=centroid:{fmt.format(m.centroid)} "
                             f"width:{fmt.format(m.width)} energy:{fmt.format(m.energy_plus + m.energy_minus)} "
                             f"area:{fmt.format(abs(m.area_plus))} atomic:{fmt.format(m.atomic_norm)}")
        return "\n".join(lines) + "\n"


def compare_runs(a: SpaceTimeData, b: SpaceTimeData, v_ref=1.0) -> ComparisonReport:
    """Relative L2 of a against the reference b, per branch and output time."""
    if a.a_plus.shape != b.a_plus.shape or a.a_minus.shape != b.a_minus.shape:
        raise ComparisonError(f"grid shapes differ: {a.a_plus.shape} vs {b.a_plus.shape}")
    if not (np.allclose(a.times, b.times, rtol=0, atol=1e-9)
            and np.allclose(a.z, b.z, rtol=0, atol=1e-9)):
        raise ComparisonError("runs use different output times or z grids")
    report = ComparisonReport(a.label or "a", b.label or "b")
    for sigma in ("+", "-"):
        for i, t in enumerate(a.times):
            report.errors.append((float(t), sigma, relative_l2(a.branch(sigma)[i], b.branch(sigma)[i])))
        report.overall[sigma] = relative_l2(a.branch(sigma), b.branch(sigma))
    label_b = report.label_b if report.label_b != report.label_a else report.label_b + "_b"
    for data, label in ((a, report.label_a), (b, label_b)):
        report.trajectories[label] = [
            measure_pulse(t, FieldState(data.a_plus[i], data.a_minus[i]), data.z, v_ref,
                          p12=None if data.p12 is None else data.p12[i])
            for i, t in enumerate(data.times)]
    return report
