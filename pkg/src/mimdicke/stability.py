"""Linearized fluctuations: drift matrices, excitation spectra, branch tracking.

Fluctuations around a steady state obey du/dt = D u for the quadrature
vector u = (dx, dp, dX_a, dP_a, dX_b, dP_b); the eigenvalues of iD are the
complex excitation frequencies.  Decay shows up as a negative imaginary
part (and growth as a positive one) — that convention is fixed here and
used everywhere.

The quadratures follow the convention X = sqrt(2) Re(alpha),
P = -sqrt(2) Im(alpha) (and likewise for the membrane pair), which is the
basis in which the normal-branch matrix takes its published closed form
with rows built from g, kappa and mu only.

A genuine feature of the broken branch at gamma = 0: the displaced wells
are attractors only just above threshold.  For g = kappa = 1 the well
spectrum acquires a growing pair (a Hopf instability of the full flow)
near mu = 4/3, which `drift_matrix_general` reproduces and which matches
finite-difference Jacobians of the nonlinear equations.  Membrane damping
restabilizes the wells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import csvio
from .errors import ConvergenceError, ValidationError
from .meanfield import SteadyState, field_steady_states
from .model import DimensionlessParams, critical_set

SCAN_CSV_HEADER = "mu,branch,re_omega,im_omega"

# canonical branch order used by scans and their CSV output
BRANCHES = ("light1+", "light1-", "light2+", "light2-", "membrane+", "membrane-")

EIG_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class ExcitationSpectrum:
    """Six excitation frequencies, sorted by (Re, Im)."""

    omegas: np.ndarray  # shape (6,), complex


@dataclass
class SpectrumScan:
    """Branch-labeled spectra on a mu grid (columns follow `branches`)."""

    mu: np.ndarray           # (n,)
    branches: tuple          # (6,) label strings
    omegas: np.ndarray       # (n, 6) complex


def drift_matrix(p: DimensionlessParams, mu: float) -> np.ndarray:
    """Normal-branch (x = 0) drift matrix in closed form.

    Valid for balanced antisymmetric pumping; the light-membrane entries
    depend only on g, kappa and mu.  Membrane damping gamma sits on the
    first two diagonal entries.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError("drift_matrix requires balanced antisymmetric pumping")
    g, kappa, gamma = p.g, p.kappa, p.gamma
    sg = math.sqrt(g / 2.0)
    sk = kappa / math.sqrt(2.0 * g)
    return np.array([
        [-gamma, -1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, -gamma, mu * sg, mu * sk, mu * sg, mu * sk],
        [-mu * sk, 0.0, -kappa, 0.0, 0.0, -g],
        [mu * sg, 0.0, 0.0, -kappa, g, 0.0],
        [-mu * sk, 0.0, 0.0, -g, -kappa, 0.0],
        [mu * sg, 0.0, g, 0.0, 0.0, -kappa],
    ])


def drift_matrix_general(p: DimensionlessParams, ss: SteadyState) -> np.ndarray:
    """Drift matrix linearized about an arbitrary steady state.

    Built from the Jacobian of the classical flow expressed in the same
    quadrature convention as `drift_matrix`; it reduces to that closed form
    at the normal branch and covers the displaced wells, where the position
    enters through Phi = (lam/sqrt(V)) x_ss and the condensate quadratures
    of the two fields.
    """
    L = p.lam / math.sqrt(p.V)
    phi = L * ss.x_ss
    XA = math.sqrt(2.0) * ss.a_ss.real
    PA = -math.sqrt(2.0) * ss.a_ss.imag
    XB = math.sqrt(2.0) * ss.b_ss.real
    PB = -math.sqrt(2.0) * ss.b_ss.imag
    g, kappa, gamma = p.g, p.kappa, p.gamma
    return np.array([
        [-gamma, -1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, -gamma, L * XA, L * PA, -L * XB, -L * PB],
        [-L * PA, 0.0, -kappa, -phi, 0.0, -g],
        [L * XA, 0.0, phi, -kappa, g, 0.0],
        [L * PB, 0.0, 0.0, -g, -kappa, phi],
        [-L * XB, 0.0, g, 0.0, -phi, -kappa],
    ])


def spectrum(D: np.ndarray) -> ExcitationSpectrum:
    """Excitation frequencies: eigenvalues of iD, sorted by (Re, Im).

    Every eigenpair is verified against the residual ||D v - s v|| <=
    1e-9 ||D||; LAPACK failures and residual violations surface as
    ConvergenceError.
    """
    D = np.asarray(D, dtype=float)
    try:
        s, v = np.linalg.eig(D)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    scale = np.linalg.norm(D)
    resid = np.linalg.norm(D @ v - v * s[None, :], axis=0)
    worst = float(np.max(resid))
    if worst > EIG_RESIDUAL_TOL * scale:
        raise ConvergenceError(
            f"eigenpair residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.0e}*||D||",
            residual=worst)
    omegas = 1j * s
    order = np.lexsort((omegas.imag, omegas.real))
    return ExcitationSpectrum(omegas=omegas[order])


def analytic_spectrum_lossless(g: float, mu: float) -> np.ndarray:
    """Closed-form excitation frequencies for kappa = 0 (gamma = 0).

    Three +- pairs: (+-g, +-sqrt[(1+g^2+r)/2], +-sqrt[(1+g^2-r)/2]) with
    r = sqrt((g^2-1)^2 + 4 g^2 mu^2).  The third pair becomes purely
    imaginary above mu = 1, signalling the pitchfork.
    """
    if not g > 0:
        raise ValidationError(f"g must be positive, got {g}")
    r = math.sqrt((g * g - 1.0) ** 2 + 4.0 * g * g * mu * mu)
    w2 = np.lib.scimath.sqrt((1.0 + g * g + r) / 2.0)
    w3 = np.lib.scimath.sqrt(complex((1.0 + g * g - r) / 2.0))
    vals = np.array([g, -g, w2, -w2, w3, -w3], dtype=complex)
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


def _mu_zero_anchor(p: DimensionlessParams):
    """Expected decoupled frequencies at mu = 0, in canonical branch order."""
    g, kappa, gamma = p.g, p.kappa, p.gamma
    return np.array([g - 1j * kappa, -g - 1j * kappa,
                     g - 1j * kappa, -g - 1j * kappa,
                     1.0 - 1j * gamma, -1.0 - 1j * gamma])


def _match(reference: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Permutation aligning `omegas` with `reference` (minimal total |delta|)."""
    cost = np.abs(reference[:, None] - omegas[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def scan_spectrum(p: DimensionlessParams, mu_grid: np.ndarray) -> SpectrumScan:
    """Normal-branch spectra across mu with continuation-stable branch labels.

    Labels are anchored at mu = 0, where every frequency is a pure light
    (Im = -kappa) or pure membrane (Re = +-1, Im = -gamma) excitation, and
    carried along the grid by minimal-distance assignment between
    consecutive spectra, so each column of the result is one continuous
    branch even through avoided crossings.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError("scan_spectrum requires balanced antisymmetric pumping")
    mu = np.asarray(mu_grid, dtype=float)
    if mu.ndim != 1 or mu.size < 1:
        raise ValidationError("mu_grid must be a one-dimensional array")
    if np.any(np.diff(mu) <= 0):
        raise ValidationError("mu grid must be strictly increasing")
    if mu[0] < 0:
        raise ValidationError("mu must be non-negative")

    # walk from the mu = 0 anchor to the grid start so labels stay glued
    walk = np.arange(0.0, mu[0], 0.02) if mu[0] > 0 else np.empty(0)
    prev = _mu_zero_anchor(p)
    for m in walk:
        w = spectrum(drift_matrix(p, m)).omegas
        prev = w[_match(prev, w)]
    out = np.empty((mu.size, 6), dtype=complex)
    for i, m in enumerate(mu):
        w = spectrum(drift_matrix(p, m)).omegas
        prev = w[_match(prev, w)]
        out[i] = prev
    return SpectrumScan(mu=mu, branches=BRANCHES, omegas=out)


def scan_csv(scan: SpectrumScan) -> str:
    rows = []
    for i in range(scan.mu.size):
        for j, name in enumerate(scan.branches):
            w = scan.omegas[i, j]
            rows.append((scan.mu[i], name, w.real, w.imag))
    return csvio.render_csv(SCAN_CSV_HEADER, rows)


def normal_steady_state(p: DimensionlessParams) -> SteadyState:
    """The x = 0 steady state with its slaved fields (any mu)."""
    a, b = field_steady_states(p, 0.0)
    return SteadyState(x_ss=0.0, a_ss=complex(a), b_ss=complex(b),
                       n_a=abs(a) ** 2, n_b=abs(b) ** 2, n_c=0.0,
                       branch="normal",
                       is_minimum=critical_set(p).mu <= 1.0
                       if p.is_balanced_antisymmetric() else True)
