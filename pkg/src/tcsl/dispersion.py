"""
Frequency-domain objects of the coupled polariton equations.

With δk± = (k ± k_o)/ξ the mode ratio is

    χ−(k) = (1 + i(γ+/γ3)δk−) / (1 − i(γ−/γ3)δk+),  χ+ ≡ 1

and the nonstationary dispersion relation is

    ω(k,t) = −iγ2(1 + iμ)/J + β_s[α̃+δk− − α̃−δk+ − iδk+δk−]/(γ3²J)

with μ = (γ+/γ3)δk− − (γ−/γ3)δk+ and
J = 1 − γ2γ+γ−/β_s + i[(γ+/γ3)²δk−α̃− − (γ−/γ3)²δk+α̃+].
"""
import logging

import numpy as np
from scipy.integrate import quad_vec

from tcsl.errors import DegenerateInputError, QuadratureError, SingularityError

logger = logging.getLogger(__name__)

QUAD_RTOL = 1e-9
QUAD_ATOL = 1e-13
_POLE_TOL = 1e-12


def beta_s(t, medium, schedule):
    op, om = schedule.amplitudes(t)
    gp, gm = medium.gamma_plus, medium.gamma_minus
    return medium.gamma2 * gp * gm + gm * np.square(op) + gp * np.square(om)


def alpha_tilde(t, medium, schedule):
    """(α̃+, α̃−) = γ3·Ω±,0²/β_s."""
    beta = beta_s(t, medium, schedule)
    if np.any(beta == 0):
        raise SingularityError("β_s vanishes: both controls off with γ2=0")
    op, om = schedule.amplitudes(t)
    return medium.gamma3 * np.square(op) / beta, medium.gamma3 * np.square(om) / beta


def delta_k(k, medium):
    k = np.asarray(k, dtype=float)
    return (k + medium.k_o) / medium.xi, (k - medium.k_o) / medium.xi


def mu(k, medium):
    dkp, dkm = delta_k(k, medium)
    g3 = medium.gamma3
    return (medium.gamma_plus / g3) * dkm - (medium.gamma_minus / g3) * dkp


def J(k, t, medium, schedule):
    dkp, dkm = delta_k(k, medium)
    g3 = medium.gamma3
    gp, gm = medium.gamma_plus, medium.gamma_minus
    beta = beta_s(t, medium, schedule)
    ap, am = alpha_tilde(t, medium, schedule)
    return (1.0 - medium.gamma2 * gp * gm / beta
            + 1j * ((gp / g3) ** 2 * dkm * am - (gm / g3) ** 2 * dkp * ap))


def omega_full(k, t, medium, schedule, check=False):
    """Full dispersion relation ω_{k,k_o}(t)."""
    dkp, dkm = delta_k(k, medium)
    beta = beta_s(t, medium, schedule)
    ap, am = alpha_tilde(t, medium, schedule)
    jj = J(k, t, medium, schedule)
    if np.any(np.abs(jj) < _POLE_TOL):
        raise SingularityError(f"resonant pole J=0 at t={t}")
    g3 = medium.gamma3
    omega = (-1j * medium.gamma2 * (1.0 + 1j * mu(k, medium)) / jj
             + beta * (ap * dkm - am * dkp - 1j * dkp * dkm) / (g3 ** 2 * jj))
    if check:
        check_absorption(omega, t)
    return omega


def check_absorption(omega, t, tol=1e-6):
    """Report spurious gain (Im ω > 0); returns the largest imaginary part."""
    worst = float(np.max(np.imag(omega)))
    if worst > tol * max(1.0, float(np.max(np.abs(omega)))):
        logger.warning("Im ω reaches %.3e > 0 at t=%.6g: gain inside the band", worst, t)
    return worst


def omega_single_control(k, t, medium, schedule, which="forward"):
    """Slow-light limit with only one control on: −iγ2 ± cΩ²(k ∓ k_o)/Ng²."""
    op, om = schedule.amplitudes(t)
    selected, other = (op, om) if which == "forward" else (om, op)
    sign = 1.0 if which == "forward" else -1.0
    if np.any(np.asarray(selected) == 0):
        raise DegenerateInputError(f"selected {which} control is zero at t={t}")
    if np.any(np.asarray(other) != 0):
        raise DegenerateInputError(f"the control opposite to {which} must be off at t={t}")
    k = np.asarray(k, dtype=float)
    return (-1j * medium.gamma2
            + sign * medium.c * np.square(selected) / medium.ng2 * (k - sign * medium.k_o))


def omega_simplified(k, t, medium, schedule):
    """Optically dense limit J≈1, μ≪1."""
    op, om = schedule.amplitudes(t)
    k = np.asarray(k, dtype=float)
    scale = medium.c / medium.ng2
    return (-1j * medium.gamma2
            + scale * (np.square(op) - np.square(om)) * k
            - scale * (np.square(op) + np.square(om)) * medium.k_o)


def omega_small_splitting(k, t, medium, schedule):
    """Limit k_o ≪ 1/l_o, ξ; keeps the −ik²/ξ term responsible for envelope broadening."""
    k = np.asarray(k, dtype=float)
    xi, g3 = medium.xi, medium.gamma3
    gp, gm = medium.gamma_plus, medium.gamma_minus
    beta = beta_s(t, medium, schedule)
    ap, am = alpha_tilde(t, medium, schedule)
    den = xi + 1j * (am * (gp / g3) ** 2 - ap * (gm / g3) ** 2) * k
    if np.any(np.abs(den) < _POLE_TOL * xi):
        raise SingularityError(f"small-splitting denominator vanishes at t={t}")
    return beta * ((ap - am) * k - 1j * k ** 2 / xi) / (g3 ** 2 * den)


def chi_minus(k, medium):
    dkp, dkm = delta_k(k, medium)
    g3 = medium.gamma3
    den = 1.0 - 1j * (medium.gamma_minus / g3) * dkp
    if np.any(np.abs(den) < _POLE_TOL):
        raise SingularityError("χ− denominator vanishes")
    return (1.0 + 1j * (medium.gamma_plus / g3) * dkm) / den


def chi_plus(k, medium=None):
    return np.ones_like(np.asarray(k, dtype=float), dtype=complex)


def chi(k, medium, sigma):
    return chi_plus(k) if sigma == "+" else chi_minus(k, medium)


def group_velocity(t, medium, schedule):
    op, om = schedule.amplitudes(t)
    return medium.c * (np.square(op) - np.square(om)) / medium.ng2


def phase_integral(k, t_a, t_b, medium, schedule, rtol=QUAD_RTOL):
    """∫_{t_a}^{t_b} ω(k,t') dt' by adaptive vector quadrature, split at ramp edges."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if t_b < t_a:
        raise ValueError("phase integral needs t_b >= t_a")
    if t_b == t_a:
        return np.zeros(k.shape, dtype=complex)
    n = k.size

    def integrand(t):
        w = omega_full(k, t, medium, schedule)
        return np.concatenate([w.real, w.imag])

    points = schedule.breakpoints(t_a, t_b) or None
    res, err, info = quad_vec(integrand, t_a, t_b, epsabs=QUAD_ATOL, epsrel=rtol, points=points,
                              full_output=True)
    if not info.success:
        raise QuadratureError(
            f"phase integral over [{t_a}, {t_b}] did not converge: {info.message} "
            f"(error estimate {err:.3e}, {info.neval} evaluations)")
    return res[:n] + 1j * res[n:]


def prefactor(k, t, t_o, medium, schedule):
    """γ−α̃+(t_o)/[γ−α̃+(t) + γ+α̃−(t)χ−(k)]."""
    gp, gm = medium.gamma_plus, medium.gamma_minus
    ap0, _ = alpha_tilde(t_o, medium, schedule)
    ap, am = alpha_tilde(t, medium, schedule)
    den = gm * ap + gp * am * chi_minus(k, medium)
    if np.any(np.abs(den) < _POLE_TOL):
        raise SingularityError(f"propagator prefactor diverges at t={t}")
    return gm * ap0 / den


def propagator_B(k, t, t_o, medium, schedule, phase=None):
    """
    Spectral transfer amplitude B(k, k_o; t, t_o).

    `phase` may carry a precomputed ∫ω dt' so callers can integrate
    incrementally across output times.
    """
    if t < t_o:
        raise ValueError("propagator needs t >= t_o")
    if phase is None:
        phase = phase_integral(k, t_o, t, medium, schedule)
    return prefactor(k, t, t_o, medium, schedule) * np.exp(-1j * phase)


def dispersion_table(k, t, medium, schedule):
    """Rows (k, Re ω, Im ω, Re χ−, Im χ−) for one time."""
    k = np.asarray(k, dtype=float)
    omega = omega_full(k, t, medium, schedule, check=True)
    chi_m = chi_minus(k, medium)
    return np.column_stack([k, omega.real, omega.imag, chi_m.real, chi_m.imag])
