"""Adiabatic steady states, effective membrane potential and order parameter.

When the optical fields relax much faster than the membrane moves they can
be slaved to the instantaneous position x, which leaves classical motion in
an effective potential V_eff(x).  For balanced antisymmetric pumping
(eta_a = -eta_b) the potential is

    V_eff(x) = x^2/2 + eps0 / (1 + x^2 lam^2 / ((g^2+kappa^2) V)),

a symmetric double well once mu = lam/lam_c exceeds one; the well positions
carry the Z2 order parameter.  General (imbalanced) pumping tilts the
potential through an arctan term and is handled numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import csvio
from .errors import ConvergenceError, ValidationError
from .model import DimensionlessParams, critical_set

BRANCH_NORMAL = "normal"
BRANCH_PLUS = "broken_plus"
BRANCH_MINUS = "broken_minus"

SWEEP_CSV_HEADER = "mu,x_ss_plus,n_a,n_b,n_diff,n_c,E0_over_eps0"


@dataclass(frozen=True)
class SteadyState:
    """One stationary point of the effective potential with its slaved fields."""

    x_ss: float
    a_ss: complex
    b_ss: complex
    n_a: float
    n_b: float
    n_c: float
    branch: str
    is_minimum: bool = True


@dataclass
class SweepTable:
    """Order parameter and photon numbers on a mu grid (broken_plus branch)."""

    mu: np.ndarray
    x_ss_plus: np.ndarray
    n_a: np.ndarray
    n_b: np.ndarray
    n_diff: np.ndarray
    n_c: np.ndarray
    E0_over_eps0: np.ndarray


def field_steady_states(p: DimensionlessParams, x):
    """Closed-form steady amplitudes (a_ss, b_ss) at membrane position x.

    Solves the 2x2 linear system obtained from the field equations of motion,
    (kappa + i lam x/sqrt(V)) a + i g b = -i eta_a sqrt(V)  (and a<->b with
    the sign of the position term flipped).  The determinant
    g^2 + kappa^2 + x^2 lam^2 / V is positive for any g > 0.
    """
    sV = math.sqrt(p.V)
    D = p.g ** 2 + p.kappa ** 2 + np.asarray(x) ** 2 * p.lam ** 2 / p.V
    a = -(p.g * p.eta_b * sV + x * p.lam * p.eta_a + 1j * p.kappa * p.eta_a * sV) / D
    b = -(p.g * p.eta_a * sV - x * p.lam * p.eta_b + 1j * p.kappa * p.eta_b * sV) / D
    return a, b


def effective_potential(p: DimensionlessParams, x):
    """Effective membrane potential V_eff(x); accepts scalars or arrays.

    The pump-imbalance part (odd in x, with an arctan tail) vanishes for
    |eta_a| = |eta_b|.
    """
    x = np.asarray(x, dtype=float)
    c = p.g ** 2 + p.kappa ** 2
    D = c + x * x * p.lam ** 2 / p.V
    val = 0.5 * x * x - 2.0 * p.g * p.eta_a * p.eta_b * p.V / D
    imbalance = p.eta_a ** 2 - p.eta_b ** 2
    if imbalance != 0.0:
        val = val + imbalance * (
            p.kappa ** 2 * p.V / c ** 1.5 * np.arctan(p.lam * x / math.sqrt(c * p.V))
            - p.g ** 2 * p.lam * math.sqrt(p.V) * x / (c * D)
        )
    return val if val.ndim else float(val)


def effective_force(p: DimensionlessParams, x):
    """Force -dV_eff/dx = -x - (lam/sqrt(V)) (n_a - n_b) on the membrane."""
    a, b = field_steady_states(p, x)
    n_a = np.abs(a) ** 2
    n_b = np.abs(b) ** 2
    out = -np.asarray(x, dtype=float) - p.lam / math.sqrt(p.V) * (n_a - n_b)
    return out if out.ndim else float(out)


def _state_at(p: DimensionlessParams, x: float, branch: str, is_minimum: bool) -> SteadyState:
    a, b = field_steady_states(p, x)
    return SteadyState(x_ss=x, a_ss=complex(a), b_ss=complex(b),
                       n_a=abs(a) ** 2, n_b=abs(b) ** 2, n_c=0.5 * x * x,
                       branch=branch, is_minimum=is_minimum)


def _roots_by_scan(p: DimensionlessParams, x_max: float, n_scan: int = 4001):
    """All force roots in [-x_max, x_max] by sign-change scan + bisection."""
    grid = np.linspace(-x_max, x_max, n_scan)
    f = effective_force(p, grid)
    roots = []
    sign_change = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    for i in sign_change:
        lo, hi = grid[i], grid[i + 1]
        flo = effective_force(p, lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = effective_force(p, mid)
            if flo * fm <= 0:
                hi = mid
            else:
                lo, flo = mid, fm
            if hi - lo < 1e-12 * max(1.0, abs(mid)):
                break
        roots.append(0.5 * (lo + hi))
    # exact zeros sitting on grid points (x = 0 typically)
    for i in np.nonzero(f == 0.0)[0]:
        roots.append(grid[i])
    roots = sorted(roots)
    merged = []
    for r in roots:
        if not merged or abs(r - merged[-1]) > 1e-9 * max(1.0, x_max):
            merged.append(r)
    return merged


def steady_positions(p: DimensionlessParams) -> list[SteadyState]:
    """Stationary membrane positions with their slaved fields.

    Balanced antisymmetric pumping uses the closed form: x = 0 only for
    mu <= 1; for mu > 1 the two minima x = +-sqrt(2 eps0) sqrt(mu-1)/mu
    are returned along with the x = 0 saddle (is_minimum=False).  Any other
    pumping falls back to a bracketed scan over the force.
    """
    if p.eta_a == 0.0 and p.eta_b == 0.0:
        return [_state_at(p, 0.0, BRANCH_NORMAL, True)]
    if p.is_balanced_antisymmetric() and p.lam >= 0:
        cs = critical_set(p)
        if cs.mu <= 1.0:
            return [_state_at(p, 0.0, BRANCH_NORMAL, True)]
        x = math.sqrt(2.0 * cs.epsilon0) * math.sqrt(cs.mu - 1.0) / cs.mu
        return [
            _state_at(p, +x, BRANCH_PLUS, True),
            _state_at(p, -x, BRANCH_MINUS, True),
            _state_at(p, 0.0, BRANCH_NORMAL, False),
        ]
    # general pumping: numeric root finding seeded by the balanced scale
    eta_ref = max(abs(p.eta_a), abs(p.eta_b), 1e-30)
    eps_ref = 2.0 * p.g * eta_ref ** 2 * p.V / (p.g ** 2 + p.kappa ** 2)
    x_max = 2.0 * math.sqrt(2.0 * eps_ref) + 10.0
    roots = _roots_by_scan(p, x_max)
    if not roots:
        raise ConvergenceError(
            "no stationary point found",
            diagnostics={"x_max": x_max,
                         "force_at_edges": (effective_force(p, -x_max),
                                            effective_force(p, x_max))})
    states = []
    h = 1e-6 * max(1.0, x_max)
    for r in roots:
        dfdx = (effective_force(p, r + h) - effective_force(p, r - h)) / (2 * h)
        is_min = dfdx < 0  # force = -V', so V'' = -f' > 0 at a minimum
        if abs(r) < 1e-8 * max(1.0, x_max):
            branch = BRANCH_NORMAL
            r = 0.0 if abs(r) < 1e-12 else r
        else:
            branch = BRANCH_PLUS if r > 0 else BRANCH_MINUS
        states.append(_state_at(p, r, branch, bool(is_min)))
    return states


def ground_energy(p: DimensionlessParams) -> float:
    """Minimum value of V_eff for balanced antisymmetric pumping.

    E0/eps0 = 1 below threshold and (2 mu - 1)/mu^2 above; continuous at
    mu = 1 and decaying to zero as mu -> infinity.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError("ground_energy requires balanced antisymmetric pumping")
    cs = critical_set(p)
    if cs.mu <= 1.0:
        return cs.epsilon0
    return cs.epsilon0 * (2.0 * cs.mu - 1.0) / cs.mu ** 2


def photon_observables(p: DimensionlessParams, branch: str | None = None):
    """Total and differential photon numbers (n_a+n_b, n_a-n_b) per branch.

    Returns a dict keyed by branch name, or a single (n_tot, n_diff) pair
    when `branch` is given.  Broken-branch closed forms exist only above
    threshold; asking for them below threshold is an error.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError("photon_observables requires balanced antisymmetric pumping")
    cs = critical_set(p)
    c = p.g ** 2 + p.kappa ** 2
    out = {BRANCH_NORMAL: (2.0 * p.eta ** 2 * p.V / c, 0.0)}
    if cs.mu > 1.0:
        n_tot = p.eta * p.V / (math.sqrt(p.g) * p.lam)
        n_diff = (p.V / p.lam ** 2) * math.sqrt(c * (cs.mu - 1.0))
        # the field imbalance pushes the membrane the opposite way
        out[BRANCH_PLUS] = (n_tot, -n_diff)
        out[BRANCH_MINUS] = (n_tot, +n_diff)
    if branch is None:
        return out
    if branch not in out:
        raise ValidationError(
            f"branch {branch!r} unavailable at mu = {cs.mu:.6g} (mu <= 1 has no broken branch)")
    return out[branch]


def phonon_number(p: DimensionlessParams) -> float:
    """Steady phonon occupation n_c = x_ss^2 / 2 on the broken branch (0 below)."""
    if not p.is_balanced_antisymmetric():
        raise ValidationError("phonon_number requires balanced antisymmetric pumping")
    cs = critical_set(p)
    if cs.mu <= 1.0:
        return 0.0
    return cs.epsilon0 * (cs.mu - 1.0) / cs.mu ** 2


def make_mu_grid(mu_min: float, mu_max: float, n_points: int, spacing: str = "linear") -> np.ndarray:
    """Uniform mu grid, or log-spaced in (mu - 1) for exponent fits."""
    if n_points < 2:
        raise ValidationError("need at least two grid points")
    if not mu_max > mu_min:
        raise ValidationError("mu_max must exceed mu_min")
    if spacing == "linear":
        return np.linspace(mu_min, mu_max, n_points)
    if spacing == "log1p":
        if mu_min <= 1.0:
            raise ValidationError("log1p spacing requires mu_min > 1")
        return 1.0 + np.geomspace(mu_min - 1.0, mu_max - 1.0, n_points)
    raise ValidationError(f"unknown spacing {spacing!r}")


def sweep(p: DimensionlessParams, mu_grid: np.ndarray) -> SweepTable:
    """Evaluate the broken_plus-branch observables on a mu grid.

    Each row rescales lam to mu * lambda_c with every other parameter held
    fixed; below threshold the branch coincides with the normal one.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError("sweep requires balanced antisymmetric pumping")
    mu = np.asarray(mu_grid, dtype=float)
    if mu.ndim != 1 or mu.size < 1:
        raise ValidationError("mu_grid must be a one-dimensional array")
    if np.any(np.diff(mu) <= 0):
        raise ValidationError("mu grid must be strictly increasing")
    cs = critical_set(replace(p, lam=1.0))
    lam = mu * cs.lambda_c
    above = mu > 1.0
    x = np.zeros_like(mu)
    x[above] = np.sqrt(2.0 * cs.epsilon0) * np.sqrt(mu[above] - 1.0) / mu[above]

    sV = math.sqrt(p.V)
    D = p.g ** 2 + p.kappa ** 2 + x * x * lam ** 2 / p.V
    a = -(p.g * p.eta_b * sV + x * lam * p.eta_a + 1j * p.kappa * p.eta_a * sV) / D
    b = -(p.g * p.eta_a * sV - x * lam * p.eta_b + 1j * p.kappa * p.eta_b * sV) / D
    n_a = np.abs(a) ** 2
    n_b = np.abs(b) ** 2
    e0 = np.ones_like(mu)
    e0[above] = (2.0 * mu[above] - 1.0) / mu[above] ** 2
    return SweepTable(mu=mu, x_ss_plus=x, n_a=n_a, n_b=n_b,
                      n_diff=n_a - n_b, n_c=0.5 * x * x, E0_over_eps0=e0)


def sweep_csv(table: SweepTable) -> str:
    rows = zip(table.mu, table.x_ss_plus, table.n_a, table.n_b,
               table.n_diff, table.n_c, table.E0_over_eps0)
    return csvio.render_csv(SWEEP_CSV_HEADER, rows)


def fit_beta(table: SweepTable, window: tuple[float, float] = (1.001, 1.01)) -> float:
    """Least-squares slope of log n_c against log(mu - 1) just above threshold.

    The phonon number grows linearly in (mu - 1), i.e. the fitted slope is
    +1 (the critical exponent is quoted as beta = -1 in the convention
    n_c ~ |mu - 1|^{-beta}).
    """
    lo, hi = window
    if not (1.0 < lo < hi <= 1.1):
        raise ValidationError(
            f"fit window must lie strictly inside (1, 1.1], got ({lo}, {hi})")
    mask = (table.mu >= lo) & (table.mu <= hi)
    if np.count_nonzero(mask) < 5:
        raise ValidationError(
            f"need at least 5 sweep points inside the window, found {np.count_nonzero(mask)}")
    mu = table.mu[mask]
    n_c = table.n_c[mask]
    if np.any(n_c <= 0):
        raise ValidationError("window contains points without a broken branch")
    slope, _ = np.polyfit(np.log(mu - 1.0), np.log(n_c), 1)
    return float(slope)
