"""
Exact Fourier-space solver.

The internal state is always the polariton spectrum ψ±,k; physical fields
are derived views. Each mode evolves independently,

    ψσ,k(t) = χσ(k) · B(k; t, t_o) · ψ+,k(t_o),

so the backward spectrum is locked to the forward one by χ−(k) at every t.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from tcsl.core import FieldState, Grid, MediumParams, ControlSchedule, Scenario, SpectralState
from tcsl.dispersion import beta_s, chi, chi_minus, phase_integral, prefactor
from tcsl.errors import GridError, ScenarioError, SingularityError

logger = logging.getLogger(__name__)

# Smallest k_max·l_o that still resolves the probe bandwidth
MIN_BANDWIDTH_PRODUCT = 8.0

# |prefactor| above this on modes carrying spectral power is reported
PREFACTOR_WARN = 1.1


def gaussian_spectrum(k, l_o, center_z=0.0, phase=0.0):
    """Unit-norm Gaussian spectrum (l_o/√π)^{1/2}·exp(−½k²l_o² − ik·z_o + i·phase)."""
    k = np.asarray(k, dtype=float)
    norm = math.sqrt(l_o / math.sqrt(math.pi))
    return norm * np.exp(-0.5 * (k * l_o) ** 2 - 1j * k * center_z + 1j * phase)


def to_real_space(psi_k, k, z):
    """Ψ(z) = Σ_k ψ_k e^{ikz} dk."""
    k = np.asarray(k, dtype=float)
    dk = k[1] - k[0]
    return np.exp(1j * np.outer(z, k)) @ np.asarray(psi_k, dtype=complex) * dk


def to_spectrum(psi_z, z, k):
    """ψ_k = (dz/2π) Σ_z Ψ(z) e^{−ikz}."""
    z = np.asarray(z, dtype=float)
    dz = z[1] - z[0]
    return np.exp(-1j * np.outer(k, z)) @ np.asarray(psi_z, dtype=complex) * dz / (2.0 * math.pi)


def initial_spectrum(probe, grid: Grid, medium: MediumParams, schedule: ControlSchedule,
                     t_o: float) -> SpectralState:
    """
    Forward polariton spectrum at t_o; backward spectrum is zero.

    The polariton carries e^{ik_o z}, so the unit-norm Gaussian is centred
    on k_o and scaled so that the reconstructed A+ peaks at the probe
    amplitude.
    """
    omega_t0 = schedule.omega_plus.value(t_o, schedule.ramp_time)
    if omega_t0 <= 0:
        raise ScenarioError("Ω+ must be on at t_o to load the probe")
    v_o = medium.c * omega_t0 ** 2 / medium.ng2
    l_o = probe.spatial_size(v_o)
    if grid.k_max * l_o < MIN_BANDWIDTH_PRODUCT:
        raise GridError(f"k_max·l_o={grid.k_max * l_o:.3g} does not resolve the probe spectrum")
    k = grid.k()
    unit = gaussian_spectrum(k - medium.k_o, l_o, probe.center_z, probe.phase - schedule.phi_plus)
    scale = (probe.amplitude_in * medium.sqrt_ng2 / omega_t0
             * l_o / (math.sqrt(2.0 * math.pi) * math.sqrt(l_o / math.sqrt(math.pi))))
    psi_plus = scale * unit
    return SpectralState(k, psi_plus, np.zeros_like(psi_plus), medium.k_o, t_o)


@dataclass(frozen=True)
class SpectralRun:
    initial: SpectralState
    medium: MediumParams
    schedule: ControlSchedule
    grid: Grid
    output_times: Tuple[float, ...]
    t_o: float

    def __post_init__(self):
        if np.any(self.initial.psi_minus_k != 0):
            raise ScenarioError("initial backward spectrum must vanish")


@dataclass(frozen=True)
class SpectralSnapshot:
    """One output time of the spectral solver, in both representations."""

    t: float
    spectrum: SpectralState
    fields: FieldState
    p12: np.ndarray = field(repr=False)


def seed_from_fields(fields: FieldState, z, s: Scenario) -> SpectralState:
    """
    Forward polariton spectrum of fields observed at t_o, such as a
    time-domain state after the pulse has entered the medium.
    """
    rabi_plus, _ = s.schedule.rabi(s.t_o)
    if rabi_plus == 0:
        raise ScenarioError("Ω+ must be on at t_o to seed the spectral run")
    k = s.grid.k()
    psi_plus, _ = polariton_from_fields(fields, z, s.t_o, s.schedule, s.medium, k)
    return SpectralState(k, psi_plus, np.zeros_like(psi_plus), s.medium.k_o, s.t_o)


def spectral_run_from_scenario(s: Scenario, times=None, initial=None) -> SpectralRun:
    """`initial` overrides the ideal Gaussian spectrum at t_o."""
    if initial is None:
        initial = initial_spectrum(s.probe, s.grid, s.medium, s.schedule, s.t_o)
    elif initial.t != s.t_o:
        raise ScenarioError(f"initial spectrum is taken at t={initial.t}, not at t_o={s.t_o}")
    times = tuple(sorted(times)) if times else s.output_times
    return SpectralRun(initial, s.medium, s.schedule, s.grid, times, s.t_o)


def _accumulated_phases(k, times, t_o, medium, schedule):
    """∫_{t_o}^{t} ω dt' for every requested t, integrating between neighbouring times."""
    phases = {}
    after = sorted(t for t in times if t >= t_o)
    before = sorted((t for t in times if t < t_o), reverse=True)
    total, t_prev = np.zeros(k.shape, dtype=complex), t_o
    for t in after:
        total = total + phase_integral(k, t_prev, t, medium, schedule)
        phases[t], t_prev = total, t
    total, t_prev = np.zeros(k.shape, dtype=complex), t_o
    for t in before:
        total = total - phase_integral(k, t, t_prev, medium, schedule)
        phases[t], t_prev = total, t
    return phases


def _check_prefactor(pre, weight, t):
    significant = weight > 1e-3 * np.max(weight) if np.max(weight) > 0 else weight > 0
    if np.any(significant):
        worst = float(np.max(np.abs(pre[significant])))
        if worst > PREFACTOR_WARN:
            logger.warning("Propagator prefactor reaches |%.4g| at t=%.6g", worst, t)


def evolve(run: SpectralRun):
    """Spectral states at every output time."""
    k = run.initial.k
    psi0 = run.initial.psi_plus_k
    chi_m = chi_minus(k, run.medium)
    weight = np.abs(psi0) ** 2
    phases = _accumulated_phases(k, run.output_times, run.t_o, run.medium, run.schedule)
    states = []
    for t in run.output_times:
        pre = prefactor(k, t, run.t_o, run.medium, run.schedule)
        _check_prefactor(pre, weight, t)
        psi_plus = pre * np.exp(-1j * phases[t]) * psi0
        states.append(SpectralState(k, psi_plus, chi_m * psi_plus, run.medium.k_o, t))
        logger.debug("Spectral state at t=%.6g: norm+ %.6g", t, states[-1].norm("+"))
    return states


def reconstruct(spec: SpectralState, t, schedule: ControlSchedule, medium: MediumParams,
                z) -> FieldState:
    """A_σ(z) = Ω_σ(t)/√(Ng²) · e^{∓ik_o z} · Ψσ(z)."""
    z = np.asarray(z, dtype=float)
    rabi_plus, rabi_minus = schedule.rabi(t)
    a_plus = (rabi_plus / medium.sqrt_ng2 * np.exp(-1j * medium.k_o * z)
              * to_real_space(spec.psi_plus_k, spec.k, z)) if rabi_plus != 0 else np.zeros(z.shape)
    a_minus = (rabi_minus / medium.sqrt_ng2 * np.exp(1j * medium.k_o * z)
               * to_real_space(spec.psi_minus_k, spec.k, z)) if rabi_minus != 0 else np.zeros(z.shape)
    return FieldState(a_plus, a_minus)


def polariton_from_fields(fields: FieldState, z, t, schedule, medium, k):
    """
    Polariton spectra (ψ+,k, ψ−,k) of physical fields at time t.

    A branch whose control is off carries no field; its polariton is
    recovered from the other branch through χ−(k).
    """
    z = np.asarray(z, dtype=float)
    rabi_plus, rabi_minus = schedule.rabi(t)
    if rabi_plus == 0 and rabi_minus == 0:
        raise SingularityError(f"both controls are off at t={t}; the polariton is not observable")
    chi_m = chi_minus(k, medium)
    if rabi_plus != 0:
        psi_plus = to_spectrum(np.exp(1j * medium.k_o * z) * medium.sqrt_ng2 * fields.a_plus
                               / rabi_plus, z, k)
    if rabi_minus != 0:
        psi_minus = to_spectrum(np.exp(-1j * medium.k_o * z) * medium.sqrt_ng2 * fields.a_minus
                                / rabi_minus, z, k)
    if rabi_plus == 0:
        psi_plus = psi_minus / chi_m
    if rabi_minus == 0:
        psi_minus = chi_m * psi_plus
    return psi_plus, psi_minus


def transform(fields: FieldState, z, t, schedule, medium, k) -> SpectralState:
    psi_plus, psi_minus = polariton_from_fields(fields, z, t, schedule, medium, k)
    return SpectralState(k, psi_plus, psi_minus, medium.k_o, t)


def dark_state_coherence(fields: FieldState, z, t, medium, schedule):
    """Quasi-steady ground coherence P12 = −(γ+γ−/β_s)(F+ + F−)."""
    z = np.asarray(z, dtype=float)
    gp, gm, g = medium.gamma_plus, medium.gamma_minus, medium.coupling_g
    rabi_plus, rabi_minus = schedule.rabi(t)
    drive = (np.conj(rabi_plus) * np.exp(1j * medium.k_o * z) * g * fields.a_plus / gp
             + np.conj(rabi_minus) * np.exp(-1j * medium.k_o * z) * g * fields.a_minus / gm)
    return -(gp * gm / beta_s(t, medium, schedule)) * drive


def run(s: Scenario, times=None, initial=None):
    """Evolve the scenario's probe, or `initial`, and reconstruct fields on the cell-centred z grid."""
    spectral_run = spectral_run_from_scenario(s, times, initial)
    z = s.grid.z(s.medium.length_L)
    snapshots = []
    for spec in evolve(spectral_run):
        fields = reconstruct(spec, spec.t, s.schedule, s.medium, z)
        p12 = dark_state_coherence(fields, z, spec.t, s.medium, s.schedule)
        snapshots.append(SpectralSnapshot(spec.t, spec, fields, p12))
    logger.info("Spectral solver produced %d snapshots for '%s'", len(snapshots), s.name)
    return snapshots


# Nonlocal coupling between the two polariton branches

def kernel_constants(medium: MediumParams):
    """(delta weight, amplitude κ, complex decay rate λ) of the coupling kernel."""
    xi, g3 = medium.xi, medium.gamma3
    gp, gm = medium.gamma_plus, medium.gamma_minus
    delta_weight = -gp / gm
    kappa = xi * g3 * (gp + gm) / gm ** 2 - 2j * medium.k_o * gp / gm
    lam = xi * g3 / gm - 1j * medium.k_o
    return delta_weight, kappa, lam


def coupling_kernel(dz, medium: MediumParams):
    """
    Coupling kernel at separation dz = z' − z.

    Returns (smooth part, delta weight). The smooth part is κ·e^{−λ·dz} for
    dz > 0 and vanishes behind the observation point.
    """
    dz = np.asarray(dz, dtype=float)
    delta_weight, kappa, lam = kernel_constants(medium)
    smooth = np.where(dz > 0, kappa * np.exp(-lam * np.clip(dz, 0.0, None)), 0.0 + 0.0j)
    return smooth, delta_weight


def _exponential_moments(lam, h, order=3):
    """m_n = ∫_0^h u^n e^{−λu} du for n = 0..order."""
    x = lam * h
    if abs(x) < 0.1:
        terms = np.arange(25)
        fact = np.cumprod(np.concatenate([[1.0], terms[1:]]))
        return np.array([np.sum((-lam) ** terms * h ** (n + terms + 1) / (fact * (n + terms + 1)))
                         for n in range(order + 1)])
    decay = np.exp(-x)
    moments = [(1.0 - decay) / lam]
    for n in range(1, order + 1):
        moments.append((n * moments[-1] - h ** n * decay) / lam)
    return np.array(moments)


def apply_nonlocal_coupling(psi_plus_field, z, medium: MediumParams):
    """
    Real-space route Ψ−(z) = w·Ψ+(z) + κ∫_z^∞ e^{−λ(z'−z)} Ψ+(z') dz'.

    Ψ+ is interpolated with cubic splines and integrated exactly against
    the exponential, interval by interval from the far end. The field is
    taken to vanish beyond the grid.
    """
    psi = np.asarray(psi_plus_field, dtype=complex)
    z = np.asarray(z, dtype=float)
    delta_weight, kappa, lam = kernel_constants(medium)
    if psi.size < 2 or not np.any(psi):
        return delta_weight * psi
    h = z[1] - z[0]
    # PPoly coefficients are highest power first
    coeffs = (CubicSpline(z, psi.real, bc_type="natural").c
              + 1j * CubicSpline(z, psi.imag, bc_type="natural").c)[::-1]
    moments = _exponential_moments(lam, h)
    local = moments @ coeffs
    decay = np.exp(-lam * h)
    tail = np.zeros(psi.size, dtype=complex)
    for i in range(psi.size - 2, -1, -1):
        tail[i] = local[i] + decay * tail[i + 1]
    return delta_weight * psi + kappa * tail


def apply_nonlocal_coupling_spectral(psi_plus_field, z, medium: MediumParams):
    """Fourier route: multiply by χ−(k) on the periodic grid."""
    psi = np.asarray(psi_plus_field, dtype=complex)
    dz = z[1] - z[0]
    k = 2.0 * np.pi * np.fft.fftfreq(psi.size, d=dz)
    return np.fft.ifft(chi_minus(k, medium) * np.fft.fft(psi))


# Green-function route

def green_function(dz, t, t_o, medium, schedule, k, branch="forward", phase=None):
    """
    G_σ(dz; t) = (1/2π) Σ_k e^{ik·dz} χσ(k) B(k) dk, with dz = z − z'.

    `k` is the wavenumber grid of the quadrature, normally `Grid.k()`.
    """
    sigma = "+" if branch == "forward" else "-"
    k = np.asarray(k, dtype=float)
    if k.ndim != 1 or k.size < 2:
        raise GridError("green_function needs a wavenumber grid of at least two samples")
    dk = k[1] - k[0]
    if phase is None:
        phase = phase_integral(k, t_o, t, medium, schedule)
    b = prefactor(k, t, t_o, medium, schedule) * np.exp(-1j * phase)
    weights = chi(k, medium, sigma) * b * dk / (2.0 * math.pi)
    return np.exp(1j * np.outer(np.atleast_1d(dz), k)) @ weights


def convolve_green(psi_plus_field, z, t, t_o, medium, schedule, k, branch="forward"):
    """Ψσ(z_i, t) = Σ_j G(z_i − z_j)·Ψ+(z_j, t_o)·dz."""
    psi = np.asarray(psi_plus_field, dtype=complex)
    z = np.asarray(z, dtype=float)
    n = psi.size
    h = z[1] - z[0]
    separations = (np.arange(2 * n - 1) - (n - 1)) * h
    g = green_function(separations, t, t_o, medium, schedule, k, branch)
    return np.convolve(g, psi)[n - 1:2 * n - 1] * h
