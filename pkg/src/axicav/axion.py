"""Two-state photon-axion mixing and the coupling-to-splitting calibration.

Everything is expressed in eV-based natural units: the coupling enters in
GeV^-1 (the unit sensitivities are quoted in) and is converted to eV^-1
internally, magnetic fields are converted through 195 eV^2 per tesla, and
the three mixing-matrix entries carry eV^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FINE_STRUCTURE = 1.0 / 137.036
CRITICAL_FIELD_T = 4.41e9
TESLA_TO_EV2 = 195.0
GEV_INV_TO_EV_INV = 1e-9


class DegenerateMixingError(ValueError):
    """Mixing angle requested where both matrix entries vanish."""


@dataclass(frozen=True)
class MixingParameters:
    """Photon energy, coupling, field, and axion mass for one mixing point."""

    omega_ev: float = 1.0
    g_a_gev: float = 0.0  # axion-photon coupling, GeV^-1
    b_field_t: float = 1.0
    mass_ev: float = 0.0

    def __post_init__(self):
        if self.omega_ev <= 0:
            raise ValueError("photon energy must be > 0")
        if self.g_a_gev < 0 or self.b_field_t < 0 or self.mass_ev < 0:
            raise ValueError("coupling, field and mass must be >= 0")

    @property
    def g_a_ev(self) -> float:
        return self.g_a_gev * GEV_INV_TO_EV_INV


def q_m(p: MixingParameters) -> float:
    """Off-diagonal coupling entry omega * g * B, in eV^2."""
    return p.omega_ev * p.g_a_ev * p.b_field_t * TESLA_TO_EV2


def q_gamma(p: MixingParameters) -> float:
    """Photon diagonal entry from vacuum birefringence,
    omega^2 * (7 alpha / 45 pi) * (B / B_crit)^2, in eV^2."""
    return (
        p.omega_ev**2
        * (7.0 * FINE_STRUCTURE / (45.0 * math.pi))
        * (p.b_field_t / CRITICAL_FIELD_T) ** 2
    )


def q_a(mass_ev: float) -> float:
    """Axion diagonal entry, -mass^2 in eV^2."""
    if mass_ev < 0:
        raise ValueError("mass must be >= 0")
    return -(mass_ev**2)


def mixing_angle_from_q(qm: float, qgamma: float, qa: float) -> float:
    """Half the rotation diagonalizing the 2x2 mixing matrix:
    phi = atan2(2 Qm, Qgamma - Qa) / 2.  Equal diagonal entries with any
    coupling give exactly pi/4 (maximal mixing)."""
    diag = qgamma - qa
    if qm == 0.0 and diag == 0.0:
        raise DegenerateMixingError("mixing angle undefined: all Q entries equal")
    return 0.5 * math.atan2(2.0 * qm, diag)


def mixing_angle(p: MixingParameters) -> float:
    return mixing_angle_from_q(q_m(p), q_gamma(p), q_a(p.mass_ev))


def suppression_factor(p: MixingParameters) -> float:
    """Signal reduction for a massive axion relative to maximal mixing:
    sin^2(2 phi), equal to 1 when phi = pi/4 and falling toward 0 as the
    mass term dominates."""
    return math.sin(2.0 * mixing_angle(p)) ** 2


@dataclass(frozen=True)
class SplitCalibration:
    """Anchor point tying the splitting angle to coupling, field gradient
    and field length; the dependence is linear in each."""

    theta_ref_rad: float = 4e-10
    g_ref_gev: float = 1e-6
    grad_b_ref_t_per_m: float = 200.0
    field_len_ref_m: float = 10.0

    def __post_init__(self):
        for v in (self.theta_ref_rad, self.g_ref_gev, self.grad_b_ref_t_per_m, self.field_len_ref_m):
            if v <= 0:
                raise ValueError("calibration anchor values must be > 0")


DEFAULT_CALIBRATION = SplitCalibration()


def theta_split_from_coupling(
    g_a_gev: float,
    grad_b_t_per_m: float,
    field_len_m: float,
    cal: SplitCalibration = DEFAULT_CALIBRATION,
) -> float:
    """Per-passage splitting angle for a coupling, gradient and field
    length, scaled linearly from the calibration anchor."""
    if g_a_gev < 0 or grad_b_t_per_m < 0 or field_len_m < 0:
        raise ValueError("arguments must be >= 0")
    return (
        cal.theta_ref_rad
        * (g_a_gev / cal.g_ref_gev)
        * (grad_b_t_per_m / cal.grad_b_ref_t_per_m)
        * (field_len_m / cal.field_len_ref_m)
    )


def max_measurable_mass(p: MixingParameters, threshold: float = 0.5) -> float:
    """Largest axion mass whose suppression factor still reaches the
    threshold, found by bisection on the monotone large-mass tail."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if q_m(p) == 0.0:
        raise ValueError("no coupling: suppression vanishes for every mass")

    def supp(m):
        return suppression_factor(MixingParameters(p.omega_ev, p.g_a_gev, p.b_field_t, m))

    if supp(0.0) < threshold:
        raise ValueError("suppression below threshold already at zero mass")
    hi = math.sqrt(q_m(p))
    for _ in range(200):
        if supp(hi) < threshold:
            break
        hi *= 2.0
    else:
        raise ValueError("no threshold crossing found in bracket")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if supp(mid) >= threshold:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
