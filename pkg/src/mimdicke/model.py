"""Parameter containers, unit conversions and closed-form critical quantities.

The rest of the package works exclusively in dimensionless units: rates are
measured in units of the membrane frequency omega, lengths in units of the
zero-point width sqrt(hbar/(m*omega)).  This module is the single place where
laboratory (SI) quantities enter or leave.

Conventions
-----------
g          photon tunneling rate through the membrane
kappa      cavity field decay rate
eta_a/b    pump amplitudes of the two optical modes
lambda     light--membrane coupling strength ("lam" in code: keyword clash)
V          scale (volume) parameter of the Kac-style 1/V normalization
delta      cavity--pump detuning
gamma      membrane momentum/position damping rate
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ValidationError

# Fixed physical constants (SI).  Frozen so golden values are reproducible.
HBAR = 1.054571817e-34  # J s
C_LIGHT = 2.99792458e8  # m / s


@dataclass(frozen=True)
class DimensionlessParams:
    """Dimensionless model parameters, all rates in units of omega."""

    g: float
    kappa: float
    eta_a: float
    eta_b: float
    lam: float
    V: float
    delta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValidationError(f"g must be positive, got {self.g}")
        if self.kappa < 0:
            raise ValidationError(f"kappa must be non-negative, got {self.kappa}")
        if not self.V > 0:
            raise ValidationError(f"V must be positive, got {self.V}")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be non-negative, got {self.gamma}")

    def is_balanced_antisymmetric(self) -> bool:
        """True when the pumps satisfy eta_a = -eta_b exactly."""
        return self.eta_a == -self.eta_b

    @property
    def eta(self) -> float:
        """Common pump magnitude |eta_a| (meaningful for balanced pumping)."""
        return abs(self.eta_a)


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory parameters in SI units."""

    L: float             # cavity length (m)
    m: float             # membrane motional mass (kg)
    omega: float         # membrane angular frequency (rad/s)
    omega_centre: float  # pump / cavity-centre angular frequency (rad/s)
    R_membrane: float    # membrane intensity reflectivity, 0 < R < 1
    P: float             # pump laser power (W)
    Q: float             # membrane mechanical quality factor
    V: float             # scale parameter carried into the dimensionless model

    def __post_init__(self):
        for name in ("L", "m", "omega", "omega_centre", "P", "Q", "V"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.R_membrane < 1:
            raise ValidationError(
                f"R_membrane must lie strictly between 0 and 1, got {self.R_membrane}")


@dataclass(frozen=True)
class CriticalSet:
    """Critical coupling data evaluated for one parameter point."""

    lambda_c: float
    lambda_c_detuned: float
    mu: float
    epsilon0: float


def coupling_from_reflectivity(p: PhysicalParams) -> float:
    """Photon tunneling rate g (rad/s) of a thin membrane of reflectivity R.

    g = (c/L) sqrt((1-R)/R); a perfectly reflecting membrane (R -> 1)
    decouples the two halves of the cavity and g -> 0.
    """
    R = p.R_membrane
    return (C_LIGHT / p.L) * math.sqrt((1.0 - R) / R)


def lambda_from_physical(p: PhysicalParams) -> float:
    """Dimensionless light--membrane coupling from laboratory parameters.

    lambda = (2/L) (omega_centre/omega) sqrt(hbar/(m omega)).
    """
    x_zp = math.sqrt(HBAR / (p.m * p.omega))
    return (2.0 / p.L) * (p.omega_centre / p.omega) * x_zp


def eta_from_power(P: float, kappa: float, omega_centre: float) -> float:
    """Pump amplitude eta (rad/s) sustained by laser power P (W).

    eta = sqrt(kappa * P / (hbar * omega_centre)) with kappa dimensional.
    """
    if P < 0:
        raise ValidationError(f"P must be non-negative, got {P}")
    return math.sqrt(kappa * P / (HBAR * omega_centre))


def critical_coupling(g: float, kappa: float, eta: float) -> float:
    """Critical coupling lambda_c = (g^2 + kappa^2) / (2 eta sqrt(g)).

    Above lambda_c the x = 0 configuration destabilizes and the membrane
    displaces into one of two symmetry-broken wells.  At kappa = 0 this
    reduces to the closed-system value sqrt(g)/2 when eta = g.
    """
    if not g > 0:
        raise ValidationError(f"g must be positive, got {g}")
    if not eta > 0:
        raise ValidationError(
            f"eta must be positive for a finite threshold, got {eta}")
    return (g * g + kappa * kappa) / (2.0 * eta * math.sqrt(g))


def detuned_critical_coupling(g: float, kappa: float, eta: float, delta: float) -> float:
    """Critical coupling at nonzero cavity--pump detuning delta.

    lambda_c(delta) = (1/(2 eta)) sqrt([(g-delta)^2+kappa^2][(g+delta)^2+kappa^2]/(g+delta)),
    which reduces to critical_coupling at delta = 0.  For delta <= -g the
    expression loses meaning (criticality is lost), which is reported as an
    error rather than a complex number.
    """
    if not g > 0:
        raise ValidationError(f"g must be positive, got {g}")
    if not eta > 0:
        raise ValidationError(
            f"eta must be positive for a finite threshold, got {eta}")
    if g + delta <= 0:
        raise ValidationError(
            f"criticality lost for delta <= -g (g={g}, delta={delta})")
    num = ((g - delta) ** 2 + kappa * kappa) * ((g + delta) ** 2 + kappa * kappa)
    return 0.5 / eta * math.sqrt(num / (g + delta))


def critical_power(p: PhysicalParams, g: float, kappa: float) -> float:
    """Laser power (W) at which the transition occurs.

    P_c = (1/16) (omega^2 L^2 m / omega_centre) (g^2+kappa^2)^2 / (g kappa)
    with g and kappa *dimensional* (rad/s).
    """
    if not g > 0 or not kappa > 0:
        raise ValidationError("dimensional g and kappa must be positive")
    pref = p.omega ** 2 * p.L ** 2 * p.m / p.omega_centre
    return pref * (g * g + kappa * kappa) ** 2 / (16.0 * g * kappa)


def critical_set(p: DimensionlessParams) -> CriticalSet:
    """Evaluate lambda_c, its detuned variant, mu and epsilon0 for `p`.

    Requires balanced antisymmetric pumping so that a single pump magnitude
    eta = |eta_a| defines the threshold.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError(
            "critical_set requires balanced antisymmetric pumping (eta_a = -eta_b)")
    lam_c = critical_coupling(p.g, p.kappa, p.eta)
    lam_c_det = detuned_critical_coupling(p.g, p.kappa, p.eta, p.delta)
    eps0 = 2.0 * p.g * p.eta ** 2 * p.V / (p.g ** 2 + p.kappa ** 2)
    return CriticalSet(lambda_c=lam_c, lambda_c_detuned=lam_c_det,
                       mu=p.lam / lam_c, epsilon0=eps0)
