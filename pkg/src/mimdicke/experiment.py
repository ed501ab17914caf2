"""Laboratory feasibility estimates and cat-state sensitivity analysis.

Dimensional inputs (SI, angular frequencies in rad/s) are mapped onto the
dimensionless steady-state formulas to produce signal-to-noise ratios,
intracavity occupations, loss powers, WKB tunnel splittings, and the pump
power imbalance that collapses a membrane-position superposition.

Exponentially small quantities (tunnel splitting, power imbalance) are
handled in log space throughout: the linear fields may underflow to zero,
but the log10 companions are always finite and are the reported truth.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ValidationError
from .model import (C_LIGHT, HBAR, DimensionlessParams, PhysicalParams,
                    critical_coupling, critical_power, eta_from_power,
                    lambda_from_physical)

LN10 = math.log(10.0)


@dataclass(frozen=True)
class LabEstimate:
    """Operating-point summary for a pumped two-mode cavity experiment."""

    lam: float           # dimensionless light--membrane coupling
    lambda_c: float      # its critical value at the chosen pump power
    P_c: float           # critical laser power (W)
    mu_P: float          # sqrt(P / P_c)
    R_snr: float         # order parameter over shot noise, |n_a-n_b|/sqrt(n_a+n_b)
    n_tot: float         # intracavity photon number n_a + n_b
    n_diff: float        # photon number difference |n_a - n_b|
    n_c: float           # membrane phonon number
    mech_loss_W: float   # power lost through mechanical damping (W)
    opt_loss_W: float    # power lost through the cavity mirrors (W)


@dataclass(frozen=True)
class CatSensitivity:
    """Double-well superposition parameters and their fragility.

    All rates in units of the membrane frequency except the power fields.
    `dE_split` and `dP_W` underflow to 0.0 deep in the broken phase; the
    log10 fields remain finite and carry the actual magnitudes.
    """

    Omega: float           # classical oscillation frequency in one well
    E_well: float          # ground energy of a single well
    a_turn: float          # classical turning point at the central barrier
    dE_split: float        # symmetric/antisymmetric tunnel splitting
    log10_dE_split: float  # its base-10 logarithm, computed in log space
    dE_imb: float          # potential tilt that collapses the superposition
    dP_W: float            # pump power imbalance producing that tilt (W)
    log10_dP: float        # base-10 log of |dP_W|, computed in log space


def _dimensionless(pp: PhysicalParams, g: float, kappa: float) -> DimensionlessParams:
    """Balanced antisymmetrically pumped dimensionless point for lab values."""
    w = pp.omega
    eta = eta_from_power(pp.P, kappa, pp.omega_centre) / w
    return DimensionlessParams(g=g / w, kappa=kappa / w, eta_a=eta, eta_b=-eta,
                               lam=lambda_from_physical(pp), V=pp.V)


def signal_to_noise(pp: PhysicalParams, g: float, kappa: float) -> float:
    """Order parameter relative to photon shot noise, |n_a-n_b|/sqrt(n_a+n_b).

    Closed form R = (omega L / omega_centre) sqrt(g m V / (2 hbar))
    sqrt(1 - 1/mu_P) with g dimensional and mu_P = sqrt(P/P_c).  Vanishes
    at threshold; below threshold there is no broken-phase signal and the
    request is rejected.
    """
    p_c = critical_power(pp, g, kappa)
    mu_p = math.sqrt(pp.P / p_c)
    if mu_p < 1.0:
        raise ValidationError(
            f"P = {pp.P:.6g} W is below P_c = {p_c:.6g} W: no broken-phase signal")
    pref = (pp.omega * pp.L / pp.omega_centre) * math.sqrt(
        g * pp.m * pp.V / (2.0 * HBAR))
    return pref * math.sqrt(1.0 - 1.0 / mu_p)


def lab_report(pp: PhysicalParams, g: float, kappa: float,
               P_over_Pc: float) -> LabEstimate:
    """Full operating-point report at pump power P = P_over_Pc * P_c.

    The power ratio defines the operating point (pp.P is ignored); the
    occupations use the broken-phase closed forms, so P_over_Pc >= 1 is
    required.  Loss channels: mechanical gamma n_c hbar omega with
    gamma = omega/Q, optical kappa n_tot hbar omega_centre.
    """
    if not P_over_Pc >= 1.0:
        raise ValidationError(
            f"P/P_c = {P_over_Pc:.6g} is below threshold; "
            "broken-phase outputs need P >= P_c")
    p_c = critical_power(pp, g, kappa)
    mu_p = math.sqrt(P_over_Pc)
    pp_at = replace(pp, P=P_over_Pc * p_c)
    p = _dimensionless(pp_at, g, kappa)
    c = p.g ** 2 + p.kappa ** 2
    lam_c = critical_coupling(p.g, p.kappa, p.eta)
    eps0 = 2.0 * p.g * p.eta ** 2 * p.V / c

    n_tot = p.eta * p.V / (math.sqrt(p.g) * p.lam)
    n_diff = (p.V / p.lam ** 2) * math.sqrt(c * (mu_p - 1.0))
    n_c = eps0 * (mu_p - 1.0) / mu_p ** 2
    gamma_dim = pp.omega / pp.Q
    return LabEstimate(
        lam=p.lam, lambda_c=lam_c, P_c=p_c, mu_P=mu_p,
        R_snr=signal_to_noise(pp_at, g, kappa),
        n_tot=n_tot, n_diff=n_diff, n_c=n_c,
        mech_loss_W=gamma_dim * n_c * HBAR * pp.omega,
        opt_loss_W=kappa * n_tot * HBAR * pp.omega_centre)


def _log_splitting(mu: float, eps0: float) -> float:
    """Natural log of the WKB tunnel splitting; raises if the barrier is
    too low for the stationary-phase treatment to mean anything."""
    if not mu > 1.0:
        raise ValidationError(f"tunnel splitting needs mu > 1, got {mu}")
    barrier = eps0 * (mu - 1.0) ** 2 / mu ** 2
    well_gs = math.sqrt((mu - 1.0) / mu)
    if barrier <= well_gs:
        raise ValidationError(
            f"central barrier {barrier:.6g} sits below the single-well "
            f"ground energy {well_gs:.6g}; splitting formula invalid")
    return (math.log(2.0 / math.pi) + 0.5 * math.log((mu - 1.0) / mu)
            - math.pi * (barrier - well_gs) / math.sqrt(mu * mu - 1.0))


def wkb_splitting(mu: float, eps0: float):
    """Harmonic-well / inverted-parabola WKB estimate of the doublet.

    Returns (Omega, E_well, a_turn, dE_split):
      Omega  = 2 sqrt((mu-1)/mu)           well oscillation frequency
      E_well = sqrt((mu-1)/mu) + E0        single-well ground energy
      a_turn = classical turning point of the central barrier
      dE_split = (2/pi) sqrt((mu-1)/mu) exp[-pi (barrier - Omega/2)/sqrt(mu^2-1)]

    The splitting stacks three local approximations; against direct
    quadrature of the exact potential it is good to a factor of a few,
    not percent.  dE_split may underflow; use _log_splitting consumers
    (cat_sensitivity) when the log matters.
    """
    log_de = _log_splitting(mu, eps0)
    omega_well = 2.0 * math.sqrt((mu - 1.0) / mu)
    e0 = eps0 * (2.0 * mu - 1.0) / mu ** 2
    e_well = math.sqrt((mu - 1.0) / mu) + e0
    a_sq = (2.0 * eps0 * (mu - 1.0) / mu ** 2
            - 2.0 * math.sqrt(1.0 / (mu * (mu - 1.0)))) / (1.0 + mu)
    return omega_well, e_well, math.sqrt(a_sq), math.exp(log_de)


def critical_imbalance(p: DimensionlessParams):
    """Pump-imbalance tilt of the double well and the collapse threshold.

    Returns (dE_imb, eta_sq_diff_crit):
      dE_imb = 2 V (eta_a^2 - eta_b^2)(g^2 - kappa^2) sqrt(mu-1)/(g^2+kappa^2)^{3/2},
        the well-energy difference produced by p's own pumping (zero when
        balanced);
      eta_sq_diff_crit = the value of eta_a^2 - eta_b^2 at which that tilt
        equals the tunnel splitting, i.e. where the superposition collapses.

    The linearized tilt vanishes identically at g = kappa, where the
    threshold is undefined; that degenerate point is rejected.
    """
    if p.g == p.kappa:
        raise ValidationError(
            "g = kappa makes the linearized imbalance vanish; threshold undefined")
    c = p.g ** 2 + p.kappa ** 2
    eta = p.eta
    lam_c = critical_coupling(p.g, p.kappa, eta)
    mu = p.lam / lam_c
    if not mu > 1.0:
        raise ValidationError(f"imbalance analysis needs mu > 1, got {mu:.6g}")
    eps0 = 2.0 * p.g * eta ** 2 * p.V / c
    de_imb = (2.0 * p.V * (p.eta_a ** 2 - p.eta_b ** 2)
              * (p.g ** 2 - p.kappa ** 2) * math.sqrt(mu - 1.0) / c ** 1.5)
    barrier = eps0 * (mu - 1.0) ** 2 / mu ** 2
    well_gs = math.sqrt((mu - 1.0) / mu)
    crit = (c ** 1.5 / (p.V * math.pi * math.sqrt(mu) * (p.g ** 2 - p.kappa ** 2))
            * math.exp(-math.pi * (barrier - well_gs) / math.sqrt(mu * mu - 1.0)))
    return de_imb, crit


def power_imbalance(pp: PhysicalParams, g: float, kappa: float,
                    P_over_Pc: float):
    """Pump power difference P_a - P_b that collapses the superposition.

    Returns (dP_W, log10_dP).  Evaluated in log space:
      dP = C1 exp[-pi ((C2/hbar omega)(mu_P-1)^2 - sqrt((mu_P-1)/mu_P))
                  / sqrt(mu_P^2 - 1)]
      C1 = hbar omega omega_centre (g^2+kappa^2)^{3/2}
           / (V pi kappa sqrt(mu_P) (g^2-kappa^2))
      C2 = V L^2 omega^2 m (g^2+kappa^2) / (8 omega_centre^2)
    with g, kappa dimensional.  dP_W underflows to signed zero deep in the
    broken phase; log10_dP (of the magnitude) is always finite.
    """
    if g == kappa:
        raise ValidationError("g = kappa makes the imbalance prefactor singular")
    if not P_over_Pc > 1.0:
        raise ValidationError(
            f"P/P_c = {P_over_Pc:.6g} must exceed 1 for a double well")
    mu_p = math.sqrt(P_over_Pc)
    c = g * g + kappa * kappa
    c1 = (HBAR * pp.omega * pp.omega_centre * c ** 1.5
          / (pp.V * math.pi * kappa * math.sqrt(mu_p) * (g * g - kappa * kappa)))
    c2 = pp.V * pp.L ** 2 * pp.omega ** 2 * pp.m * c / (8.0 * pp.omega_centre ** 2)
    expo = -math.pi * (c2 / (HBAR * pp.omega) * (mu_p - 1.0) ** 2
                       - math.sqrt((mu_p - 1.0) / mu_p)) / math.sqrt(mu_p ** 2 - 1.0)
    log_dp = math.log(abs(c1)) + expo
    sign = math.copysign(1.0, c1)
    try:
        dp = sign * math.exp(log_dp)
    except OverflowError:
        dp = sign * math.inf
    return dp, log_dp / LN10


def cat_sensitivity(pp: PhysicalParams, g: float, kappa: float,
                    P_over_Pc: float) -> CatSensitivity:
    """Cat-state report at pump power P = P_over_Pc * P_c.

    The tilt field dE_imb equals the tunnel splitting by construction:
    it is the well-energy imbalance at which the symmetric superposition
    gives way to a localized state, and dP_W is the pump power imbalance
    producing exactly that tilt.
    """
    p_c = critical_power(pp, g, kappa)
    pp_at = replace(pp, P=P_over_Pc * p_c)
    p = _dimensionless(pp_at, g, kappa)
    mu_p = math.sqrt(P_over_Pc)
    eps0 = 2.0 * p.g * p.eta ** 2 * p.V / (p.g ** 2 + p.kappa ** 2)
    omega_well, e_well, a_turn, de = wkb_splitting(mu_p, eps0)
    log_de = _log_splitting(mu_p, eps0)
    dp, log10_dp = power_imbalance(pp, g, kappa, P_over_Pc)
    return CatSensitivity(
        Omega=omega_well, E_well=e_well, a_turn=a_turn,
        dE_split=de, log10_dE_split=log_de / LN10,
        dE_imb=math.exp(log_de) if log_de > -700.0 else 0.0,
        dP_W=dp, log10_dP=log10_dp)


def reference_cavity(P: float = 1.0e-3) -> PhysicalParams:
    """Membrane-in-the-middle parameter set used for the feasibility study.

    50 nm SiN membrane (motional mass 5e-14 kg, fundamental at
    2 pi x 100 kHz, Q = 1e6) in a 6.7 cm cavity pumped at 1064 nm.
    R_membrane is back-solved so that coupling_from_reflectivity gives
    g = 2 pi x 10 MHz.
    """
    g = 2.0 * math.pi * 1.0e7
    length = 0.067
    # g = (c/L) sqrt((1-R)/R)  =>  R = 1/(1 + (gL/c)^2)
    ratio = (g * length / C_LIGHT) ** 2
    return PhysicalParams(
        L=length, m=5.0e-14, omega=2.0 * math.pi * 1.0e5,
        omega_centre=C_LIGHT * 2.0 * math.pi / 1.064e-6,
        R_membrane=1.0 / (1.0 + ratio), P=P, Q=1.0e6, V=1.0)
