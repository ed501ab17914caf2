"""Quantum diagnostics of the membrane moving in its effective potential.

Ground states are found by imaginary-time propagation of the 1D
Schroedinger equation H = p^2/2 + V_eff(x) - min V_eff on a uniform grid,
with the kinetic step applied spectrally.  On top of that the module
provides position/momentum moments (squeezing), Wigner phase-space maps,
and fidelity-susceptibility estimates together with their closed-form
Gaussian counterparts.

Every ground-state solve is sequential; sweeps over the coupling
parallelize across states (``threads``), and the Wigner map is evaluated
in row blocks that go through BLAS.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .csvio import render_csv
from .errors import ConvergenceError, ValidationError
from .meanfield import effective_potential, steady_positions
from .model import DimensionlessParams, critical_coupling

WAVEFUNCTION_CSV_HEADER = "x,re_psi,im_psi"
WIGNER_CSV_HEADER = "x,p,w"
SQUEEZING_CSV_HEADER = "lambda,dx,dp"

# log-log fit windows (in mu = lam/lambda_c) for the susceptibility
# exponents; the upper window sits just above threshold because the
# displacement term's prefactor drifts the local slope away from -1/2
# once mu - 1 is no longer small.
ALPHA_WINDOW_BELOW = (0.90, 0.99)
ALPHA_WINDOW_ABOVE = (1.001, 1.01)

_WIGNER_IMAG_TOL = 1e-10


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of n_points nodes spanning [x_min, x_max]."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 256:
            raise ValidationError(
                f"n_points must be at least 256, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValidationError("x_max must exceed x_min")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        # Built from the midpoint so a centred domain has exactly
        # mirror-image nodes (x[n-1-j] == -x[j] bit for bit), which keeps
        # parity clean during propagation.
        centre = 0.5 * (self.x_min + self.x_max)
        j = np.arange(self.n_points) - 0.5 * (self.n_points - 1)
        return centre + j * self.h


@dataclass(frozen=True)
class ImagTimeConfig:
    """Step ladder for imaginary-time relaxation.

    Each stage runs blocks of block_steps steps until the energy drift per
    unit imaginary time drops below coarse_tol (energy_tol on the final,
    smallest step).  max_steps caps the total across all stages.
    """

    dtau_ladder: tuple = (0.05, 0.02, 0.008, 0.003, 0.001)
    block_steps: int = 50
    energy_tol: float = 1e-12
    coarse_tol: float = 1e-9
    max_steps: int = 500_000

    def __post_init__(self):
        if len(self.dtau_ladder) == 0 or any(d <= 0 for d in self.dtau_ladder):
            raise ValidationError("dtau_ladder must be non-empty and positive")
        if self.block_steps < 1:
            raise ValidationError("block_steps must be at least 1")
        if not self.energy_tol > 0 or not self.coarse_tol > 0:
            raise ValidationError("energy tolerances must be positive")
        if self.max_steps < self.block_steps:
            raise ValidationError("max_steps must allow at least one block")


@dataclass(frozen=True)
class WaveFunction:
    """Normalized state on a Grid1D with its variational energy."""

    grid: Grid1D
    amplitudes: np.ndarray
    energy: float

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return math.sqrt(self.grid.h * float(np.sum(self.density())))


@dataclass
class WignerGrid:
    """Wigner map W(x, p) sampled on the outer product of x and p."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray  # shape (len(x), len(p))

    def integral(self) -> float:
        wx = _trap_weights(self.x.size, self.x[1] - self.x[0])
        wp = _trap_weights(self.p.size, self.p[1] - self.p[0])
        return float(wx @ self.values @ wp)

    def position_marginal(self) -> np.ndarray:
        """Integral over p; equals |psi(x)|^2 for an adequate p grid."""
        wp = _trap_weights(self.p.size, self.p[1] - self.p[0])
        return self.values @ wp


@dataclass
class SqueezingTable:
    """Result of a coupling sweep of ground-state quadrature widths."""

    lam: np.ndarray
    dx: np.ndarray
    dp: np.ndarray


def _trap_weights(n: int, d: float) -> np.ndarray:
    w = np.full(n, d)
    w[0] = 0.5 * d
    w[-1] = 0.5 * d
    return w


# ---------------------------------------------------------------------------
# grids

def _length_scales(p: DimensionlessParams):
    """Displacement reach and width padding used by the default grids."""
    minima = [s for s in steady_positions(p) if s.is_minimum]
    reach = max((abs(s.x_ss) for s in minima), default=0.0)
    eta_m = max(abs(p.eta_a), abs(p.eta_b))
    pad = 10.0
    if eta_m > 0.0:
        c = p.g ** 2 + p.kappa ** 2
        eps_scale = 2.0 * p.g * eta_m ** 2 * p.V / c
        mu = p.lam / critical_coupling(p.g, p.kappa, eta_m)
        mu_f = max(abs(mu), 0.5)
        # width of the quartic-dominated state at threshold
        l_q = (4.0 * eps_scale / mu_f ** 4) ** (1.0 / 6.0)
        pad = max(pad, 4.5 * l_q)
        if abs(mu - 1.0) > 0.05:
            pad = max(pad, 7.0 * math.sqrt(gaussian_variance(mu)))
    return reach, pad


def default_grid(p: DimensionlessParams, n_points: int = 2048) -> Grid1D:
    """Symmetric grid wide enough for the ground state (cat included)."""
    reach, pad = _length_scales(p)
    half = reach + pad
    return Grid1D(-half, half, n_points)


def default_grid_half(p: DimensionlessParams, n_points: int = 2048) -> Grid1D:
    """Grid for the half domain x > 0 with a hard wall at x = 0.

    Nodes sit at j*h for j = 1..n; the wall is one spacing below x_min and
    a second implied node of zero amplitude lies one spacing above x_max.
    """
    reach, pad = _length_scales(p)
    outer = reach + pad
    h = outer / (n_points + 1)
    return Grid1D(h, n_points * h, n_points)


# ---------------------------------------------------------------------------
# imaginary time

def _initial_guess(p: DimensionlessParams, x: np.ndarray, positive_only: bool) -> np.ndarray:
    centres = [s.x_ss for s in steady_positions(p) if s.is_minimum]
    if positive_only:
        centres = [c for c in centres if c > 0.0] or [max(1.0, float(x[x.size // 2]))]
    if not centres:
        centres = [0.0]
    psi = np.zeros_like(x)
    for c in centres:
        psi += np.exp(-0.5 * (x - c) ** 2)
    return psi


def _run_ladder(psi, step_factory, energy_fn, itc: ImagTimeConfig):
    total = 0
    last = len(itc.dtau_ladder) - 1
    for idx, dtau in enumerate(itc.dtau_ladder):
        tol = itc.energy_tol if idx == last else itc.coarse_tol
        step = step_factory(dtau)
        e_prev = energy_fn(psi)
        while True:
            for _ in range(itc.block_steps):
                psi = step(psi)
            total += itc.block_steps
            e_now = energy_fn(psi)
            drift = abs(e_now - e_prev) / (itc.block_steps * dtau)
            if drift < tol:
                break
            e_prev = e_now
            if total >= itc.max_steps:
                raise ConvergenceError(
                    "imaginary-time relaxation did not reach the energy "
                    "tolerance within max_steps",
                    residual=drift, iterations=total,
                    diagnostics={"dtau": dtau, "energy": e_now})
    return psi, energy_fn(psi), total


def ground_state(p: DimensionlessParams, grid: Grid1D | None = None,
                 itc: ImagTimeConfig | None = None) -> WaveFunction:
    """Lowest state of p^2/2 + V_eff(x) - min V_eff by imaginary time.

    The kinetic half of the split step is applied in Fourier space (the
    grid is treated as periodic; states must vanish at the edges, which
    the default grid guarantees).  The reported energy is the variational
    expectation value in the exact discrete Hamiltonian, so it carries no
    Trotter bias.
    """
    grid = grid if grid is not None else default_grid(p)
    itc = itc if itc is not None else ImagTimeConfig()
    x = grid.x
    h = grid.h
    n = grid.n_points
    v = effective_potential(p, x)
    v = v - v.min()

    kr = 2.0 * math.pi * sfft.rfftfreq(n, d=h)
    kr_sq_half = 0.5 * kr ** 2
    # Parseval weights of the one-sided spectrum
    w = np.full(kr.size, 2.0)
    w[0] = 1.0
    if n % 2 == 0:
        w[-1] = 1.0

    def energy_fn(psi):
        c = sfft.rfft(psi)
        kin = h / n * float(np.sum(w * kr_sq_half * (c.real ** 2 + c.imag ** 2)))
        pot = h * float(np.dot(psi * psi, v))
        return kin + pot

    def step_factory(dtau):
        ev = np.exp(-0.5 * dtau * v)
        ek = np.exp(-dtau * kr_sq_half)

        def step(psi):
            psi = ev * psi
            psi = sfft.irfft(ek * sfft.rfft(psi), n=n)
            psi = ev * psi
            return psi / math.sqrt(h * float(np.dot(psi, psi)))

        return step

    psi = _initial_guess(p, x, positive_only=False)
    psi = psi / math.sqrt(h * float(np.dot(psi, psi)))
    psi, energy, _ = _run_ladder(psi, step_factory, energy_fn, itc)
    return WaveFunction(grid=grid, amplitudes=psi.astype(np.complex128), energy=energy)


def ground_state_half_domain(p: DimensionlessParams, grid: Grid1D | None = None,
                             itc: ImagTimeConfig | None = None) -> WaveFunction:
    """Ground state on x > 0 with a reflecting wall at x = 0.

    Selects a single well of the symmetry-broken double well; used for the
    one-well fidelity susceptibility.  The kinetic step is applied in the
    sine basis, which builds the wall in exactly.
    """
    grid = grid if grid is not None else default_grid_half(p)
    itc = itc if itc is not None else ImagTimeConfig()
    x = grid.x
    h = grid.h
    n = grid.n_points
    if abs(grid.x_min - h) > 1e-9 * h:
        raise ValidationError(
            "half-domain grid must start one spacing above the wall at x = 0")
    v = effective_potential(p, x)
    v = v - v.min()

    km = math.pi * np.arange(1, n + 1) / ((n + 1) * h)
    km_sq_half = 0.5 * km ** 2

    def energy_fn(psi):
        c = sfft.dst(psi, type=1, norm="ortho")
        kin = h * float(np.dot(km_sq_half, c * c))
        pot = h * float(np.dot(psi * psi, v))
        return kin + pot

    def step_factory(dtau):
        ev = np.exp(-0.5 * dtau * v)
        ek = np.exp(-dtau * km_sq_half)

        def step(psi):
            psi = ev * psi
            c = ek * sfft.dst(psi, type=1, norm="ortho")
            psi = ev * sfft.dst(c, type=1, norm="ortho")
            return psi / math.sqrt(h * float(np.dot(psi, psi)))

        return step

    psi = _initial_guess(p, x, positive_only=True)
    psi = psi / math.sqrt(h * float(np.dot(psi, psi)))
    psi, energy, _ = _run_ladder(psi, step_factory, energy_fn, itc)
    return WaveFunction(grid=grid, amplitudes=psi.astype(np.complex128), energy=energy)


# ---------------------------------------------------------------------------
# observables

def moments(psi: WaveFunction):
    """(<x>, dx, <p>, dp) with the momentum moments taken spectrally."""
    x = psi.grid.x
    h = psi.grid.h
    n = psi.grid.n_points
    f = psi.amplitudes
    dens = (f.real ** 2 + f.imag ** 2)
    mean_x = h * float(np.dot(x, dens))
    mean_x2 = h * float(np.dot(x * x, dens))
    c = sfft.fft(f)
    k = 2.0 * math.pi * sfft.fftfreq(n, d=h)
    spec = c.real ** 2 + c.imag ** 2
    mean_p = h / n * float(np.dot(k, spec))
    mean_p2 = h / n * float(np.dot(k * k, spec))
    dx = math.sqrt(max(mean_x2 - mean_x ** 2, 0.0))
    dp = math.sqrt(max(mean_p2 - mean_p ** 2, 0.0))
    return mean_x, dx, mean_p, dp


def overlap(psi_a: WaveFunction, psi_b: WaveFunction) -> complex:
    """Inner product <a|b>; the two states must share one grid."""
    ga, gb = psi_a.grid, psi_b.grid
    if ga.n_points != gb.n_points or abs(ga.x_min - gb.x_min) > 1e-12 or \
            abs(ga.x_max - gb.x_max) > 1e-12:
        raise ValidationError("overlap requires both states on the same grid")
    return complex(ga.h * np.sum(np.conj(psi_a.amplitudes) * psi_b.amplitudes))


def default_momentum_grid(grid: Grid1D, p_max: float = 8.0,
                          n_min: int = 512) -> np.ndarray:
    """Momentum grid fine enough for trapezoid Wigner marginals.

    The Wigner map is band limited in p by the y reach of the state, so dp
    must stay below pi over twice that reach (a small safety margin is
    added); the count is rounded up to odd so that p = 0 is a node.
    """
    reach = 0.5 * (grid.x_max - grid.x_min)
    dp_needed = math.pi / (2.0 * reach + 4.0)
    n_p = max(n_min, int(math.ceil(2.0 * p_max / dp_needed)) + 1)
    if n_p % 2 == 0:
        n_p += 1
    return np.linspace(-p_max, p_max, n_p)


def wigner(psi: WaveFunction, p_grid: np.ndarray | None = None,
           block: int = 256) -> WignerGrid:
    """Wigner map W(x,p) = (1/pi) int dy psi*(x+y) psi(x-y) e^{2ipy}.

    The y integral reuses the state's own grid (zero padding outside), so
    no interpolation is involved.  The result is checked to be real up to
    a small residue and the imaginary part is then discarded.
    """
    grid = psi.grid
    x = grid.x
    h = grid.h
    n = grid.n_points
    if p_grid is None:
        p_grid = default_momentum_grid(grid)
    p_grid = np.asarray(p_grid, dtype=float)

    f = psi.amplitudes
    is_real = bool(np.all(f.imag == 0.0))
    j = np.arange(-(n - 1), n)          # y_j = j h, both signs
    y = j * h
    if is_real:
        fr = f.real
        pad = np.zeros(3 * n)
        pad[n:2 * n] = fr
        cosm = np.cos(np.outer(2.0 * y, p_grid))
        sinm = np.sin(np.outer(2.0 * y, p_grid))
        w_re = np.empty((n, p_grid.size))
        w_im = np.empty((n, p_grid.size))
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            rows = np.arange(lo, hi)[:, None] + n
            prod = pad[rows + j] * pad[rows - j]
            w_re[lo:hi] = prod @ cosm
            w_im[lo:hi] = prod @ sinm
    else:
        pad = np.zeros(3 * n, dtype=np.complex128)
        pad[n:2 * n] = f
        phase = np.exp(np.outer(2.0j * y, p_grid))
        vals = np.empty((n, p_grid.size), dtype=np.complex128)
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            rows = np.arange(lo, hi)[:, None] + n
            prod = np.conj(pad[rows + j]) * pad[rows - j]
            vals[lo:hi] = prod @ phase
        w_re = vals.real
        w_im = vals.imag

    scale = h / math.pi
    residue = scale * float(np.max(np.abs(w_im)))
    if residue > _WIGNER_IMAG_TOL:
        raise ConvergenceError(
            "Wigner map has an imaginary residue above tolerance "
            "(grid too coarse for this state)", residual=residue)
    return WignerGrid(x=x.copy(), p=p_grid.copy(), values=scale * w_re)


# ---------------------------------------------------------------------------
# fidelity susceptibility

def gaussian_variance(mu: float):
    """Width of the Gaussian ground-state approximation on either side."""
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(mu_arr == 1.0):
        raise ValidationError("variance diverges at mu = 1")
    out = np.empty_like(mu_arr)
    below = mu_arr < 1.0
    out[below] = 0.5 / np.sqrt(1.0 - mu_arr[below] ** 2)
    above = ~below
    out[above] = 0.5 / np.sqrt(4.0 * (mu_arr[above] - 1.0) / mu_arr[above])
    return float(out) if out.ndim == 0 else out


def fs_width_term(mu):
    """Susceptibility of the Gaussian width alone, (1/4)(d ln sigma/d mu)^2."""
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(mu_arr == 1.0):
        raise ValidationError("susceptibility diverges at mu = 1")
    out = np.empty_like(mu_arr)
    below = mu_arr < 1.0
    mb = mu_arr[below]
    out[below] = mb ** 2 / (16.0 * (1.0 - mb ** 2) ** 2)
    ma = mu_arr[~below]
    out[~below] = 1.0 / (64.0 * ma ** 2 * (ma - 1.0) ** 2)
    return float(out) if out.ndim == 0 else out


def fs_displacement_term(mu, eps0: float):
    """Well-displacement contribution at the conventional 1/2 weight.

    Zero below threshold (the well sits at x = 0 there).  Above threshold
    this is half of the raw Gaussian-overlap displacement term; the halved
    weight is the convention under which the quoted closed form and the
    alpha_+ exponent are stated.
    """
    mu_arr = np.asarray(mu, dtype=float)
    if np.any(mu_arr == 1.0):
        raise ValidationError("susceptibility diverges at mu = 1")
    out = np.zeros_like(mu_arr)
    above = mu_arr > 1.0
    ma = mu_arr[above]
    out[above] = eps0 * np.sqrt(ma) * (ma - 2.0) ** 2 / (8.0 * ma ** 5 * np.sqrt(ma - 1.0))
    return float(out) if out.ndim == 0 else out


def fs_analytic(mu, eps0: float):
    """Leading-order closed form of the fidelity susceptibility.

    Width term on both sides plus the displacement term above threshold at
    its conventional 1/2 weight (see fs_displacement_term); use
    fs_gaussian_overlap for the value a direct overlap computation gives.
    """
    return fs_width_term(mu) + fs_displacement_term(mu, eps0)


def fs_gaussian_overlap(mu, eps0: float):
    """Second-order overlap expansion for exact Gaussian approximants.

    Same width term as fs_analytic but the displacement term enters at
    full weight, which is what fs_numeric measures in the displaced phase.
    """
    return fs_width_term(mu) + 2.0 * fs_displacement_term(mu, eps0)


def fs_numeric(p: DimensionlessParams, lam: float | None = None,
               delta_step: float = 1e-3, *, half_domain: bool | None = None,
               n_points: int = 2048, itc: ImagTimeConfig | None = None) -> float:
    """Fidelity susceptibility from ground-state overlaps.

    chi = (2 - F(+d) - F(-d)) / (2 d^2) with F(d) the real part of the
    overlap between the ground states at mu and mu + d, where mu is the
    coupling in units of the critical one and d = delta_step.  Above
    threshold the states are computed on the half domain x > 0 (one well)
    unless half_domain forces otherwise; all three states share one grid.
    """
    if not p.is_balanced_antisymmetric():
        raise ValidationError(
            "fidelity susceptibility requires balanced antisymmetric pumping")
    if delta_step < 1e-6:
        raise ValidationError(
            "delta_step below the resolvable overlap change (min 1e-6)")
    lam_val = p.lam if lam is None else float(lam)
    lam_c = critical_coupling(p.g, p.kappa, p.eta)
    mu = lam_val / lam_c
    if mu - delta_step <= 0.0:
        raise ValidationError("mu - delta_step must stay positive")
    if half_domain is None:
        half_domain = mu > 1.0

    pc = replace(p, lam=lam_val)
    if half_domain:
        grid = default_grid_half(pc, n_points)
        solve = ground_state_half_domain
    else:
        grid = default_grid(pc, n_points)
        solve = ground_state

    states = [solve(replace(p, lam=(mu + s) * lam_c), grid, itc)
              for s in (-delta_step, 0.0, delta_step)]
    f_minus = overlap(states[1], states[0]).real
    f_plus = overlap(states[1], states[2]).real
    return (2.0 - f_plus - f_minus) / (2.0 * delta_step ** 2)


def fit_alpha(mu_below, chi_below, mu_above, chi_above):
    """Log-log slopes of chi vs |mu - 1|, returned as (alpha_-, alpha_+).

    Callers supply the data; the module-level ALPHA_WINDOW_* constants are
    the windows under which the quoted exponents (2 and 1/2) hold, the
    upper one fed with the displacement term only.
    """
    mu_b = np.asarray(mu_below, dtype=float)
    chi_b = np.asarray(chi_below, dtype=float)
    mu_a = np.asarray(mu_above, dtype=float)
    chi_a = np.asarray(chi_above, dtype=float)
    for mu_s, chi_s in ((mu_b, chi_b), (mu_a, chi_a)):
        if mu_s.size != chi_s.size:
            raise ValidationError("mu and chi arrays must have equal length")
        if mu_s.size < 5:
            raise ValidationError("at least five points needed per side")
        if np.any(chi_s <= 0.0):
            raise ValidationError("chi values must be positive")
    if np.any(mu_b <= 0.0) or np.any(mu_b >= 1.0):
        raise ValidationError("below-threshold grid must lie in (0, 1)")
    if np.any(mu_a <= 1.0):
        raise ValidationError("above-threshold grid must lie above 1")
    slope_b = np.polyfit(np.log(1.0 - mu_b), np.log(chi_b), 1)[0]
    slope_a = np.polyfit(np.log(mu_a - 1.0), np.log(chi_a), 1)[0]
    return float(-slope_b), float(-slope_a)


# ---------------------------------------------------------------------------
# sweeps and CSV dumps

def squeezing_sweep(p: DimensionlessParams, lam_values, n_points: int = 2048,
                    itc: ImagTimeConfig | None = None,
                    threads: int = 1) -> SqueezingTable:
    """Ground-state quadrature widths for each coupling in lam_values."""
    lam_arr = np.asarray(lam_values, dtype=float)
    if lam_arr.ndim != 1 or lam_arr.size == 0:
        raise ValidationError("lam_values must be a non-empty 1D sequence")

    def one(lv: float):
        q = replace(p, lam=float(lv))
        psi = ground_state(q, default_grid(q, n_points), itc)
        _, dx, _, dp = moments(psi)
        return dx, dp

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(one, lam_arr))
    else:
        pairs = [one(lv) for lv in lam_arr]
    dx = np.array([a for a, _ in pairs])
    dp = np.array([b for _, b in pairs])
    return SqueezingTable(lam=lam_arr.copy(), dx=dx, dp=dp)


def squeezing_csv(table: SqueezingTable) -> str:
    rows = zip(table.lam, table.dx, table.dp)
    return render_csv(SQUEEZING_CSV_HEADER, rows)


def wavefunction_csv(psi: WaveFunction) -> str:
    x = psi.grid.x
    f = psi.amplitudes
    rows = zip(x, f.real, f.imag)
    return render_csv(WAVEFUNCTION_CSV_HEADER, rows)


def wigner_csv(wg: WignerGrid) -> str:
    nx, np_ = wg.values.shape
    rows = ((wg.x[i], wg.p[k], wg.values[i, k])
            for i in range(nx) for k in range(np_))
    return render_csv(WIGNER_CSV_HEADER, rows)
