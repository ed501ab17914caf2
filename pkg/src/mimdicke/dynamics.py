"""Time integration of the semi-classical field--membrane equations.

The classical state is (x, p, a, b) with complex fields split into
quadrature components.  The equations of motion integrated here are

    dx/dt = p - gamma x
    dp/dt = -x - (lam/sqrt(V)) (|a|^2 - |b|^2) - gamma p
    da/dt = -i [g b + (lam/sqrt(V)) x a + eta_a sqrt(V)] - kappa a
    db/dt = -i [g a - (lam/sqrt(V)) x b + eta_b sqrt(V)] - kappa b

with damping acting on both membrane quadratures; this convention
reproduces the sqrt(1+gamma^2) rescaling of the critical coupling that the
damped transition obeys.  Fixed-step RK4 keeps trajectories reproducible
bit-for-bit across runs and thread counts.

Note on the broken branch: for gamma = 0 the displaced fixed points are
attractors only up to a finite pump strength (for g = kappa = 1 they turn
unstable to a limit cycle near mu = 4/3), so `relax_to_steady` can genuinely
fail to converge above threshold even though the stationary point exists.
With realistic membrane damping the branch restabilizes; the damped
displacement satisfies x_ss = sqrt(2 eps0 (mu_gamma - 1)) / mu with
mu_gamma = mu / sqrt(1 + gamma^2), exposed as `damped_displacement`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from . import csvio
from .errors import ConvergenceError, ValidationError
from .meanfield import (
    BRANCH_MINUS,
    BRANCH_NORMAL,
    BRANCH_PLUS,
    SteadyState,
)
from .model import DimensionlessParams, critical_set

TRAJECTORY_CSV_HEADER = "t,x,p,re_a,im_a,re_b,im_b"

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class StateVector:
    """Classical phase-space point; fields stored as quadrature components."""

    x: float = 0.0
    p: float = 0.0
    re_a: float = 0.0
    im_a: float = 0.0
    re_b: float = 0.0
    im_b: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.p, self.re_a, self.im_a,
                         self.re_b, self.im_b], dtype=float)

    @classmethod
    def from_array(cls, y) -> "StateVector":
        return cls(x=float(y[0]), p=float(y[1]), re_a=float(y[2]),
                   im_a=float(y[3]), re_b=float(y[4]), im_b=float(y[5]))


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float | None = None      # None -> automatic 1e-3 / max(g, kappa, 1)
    t_max: float = 2.0e4
    residual_tol: float = 1e-9
    scheme: str = "rk4"

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not self.residual_tol > 0:
            raise ValidationError(f"residual_tol must be positive, got {self.residual_tol}")
        if self.scheme != "rk4":
            raise ValidationError(f"unknown integration scheme {self.scheme!r}")

    def step_for(self, p: DimensionlessParams) -> float:
        if self.dt is not None:
            return self.dt
        return 1e-3 / max(p.g, p.kappa, 1.0)


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    p: np.ndarray
    re_a: np.ndarray
    im_a: np.ndarray
    re_b: np.ndarray
    im_b: np.ndarray


@njit(cache=True)
def _rhs(y, g, kappa, ea, eb, lam, V, gamma, out):
    x = y[0]
    p = y[1]
    ra = y[2]
    ia = y[3]
    rb = y[4]
    ib = y[5]
    L = lam / math.sqrt(V)
    sV = math.sqrt(V)
    out[0] = p - gamma * x
    out[1] = -x - L * ((ra * ra + ia * ia) - (rb * rb + ib * ib)) - gamma * p
    out[2] = g * ib + L * x * ia - kappa * ra
    out[3] = -(g * rb + L * x * ra + ea * sV) - kappa * ia
    out[4] = g * ia - L * x * ib - kappa * rb
    out[5] = -(g * ra - L * x * rb + eb * sV) - kappa * ib


@njit(cache=True)
def _rk4_run(y, dt, nsteps, g, kappa, ea, eb, lam, V, gamma):
    """Advance y by nsteps in place.

    Returns (max |x| over the run, mean ||rhs|| at step starts, ok flag);
    ok turns False as soon as any component leaves [-1e12, 1e12].
    """
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    yt = np.empty(6)
    max_x = abs(y[0])
    resid_sum = 0.0
    for _ in range(nsteps):
        _rhs(y, g, kappa, ea, eb, lam, V, gamma, k1)
        for i in range(6):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        _rhs(yt, g, kappa, ea, eb, lam, V, gamma, k2)
        for i in range(6):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        _rhs(yt, g, kappa, ea, eb, lam, V, gamma, k3)
        for i in range(6):
            yt[i] = y[i] + dt * k3[i]
        _rhs(yt, g, kappa, ea, eb, lam, V, gamma, k4)
        norm2 = 0.0
        for i in range(6):
            norm2 += k1[i] * k1[i]
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        resid_sum += math.sqrt(norm2)
        if abs(y[0]) > max_x:
            max_x = abs(y[0])
        for i in range(6):
            if not (-1e12 <= y[i] <= 1e12):
                return max_x, resid_sum / nsteps, False
    return max_x, resid_sum / nsteps, True


@njit(cache=True)
def _rk4_record(y, dt, nsteps, stride, g, kappa, ea, eb, lam, V, gamma, out):
    """Advance y by nsteps, writing the state into out every `stride` steps.

    out must have shape (nsteps // stride + 1, 6); out[0] is the initial
    state.  Returns True unless a component diverged.
    """
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    yt = np.empty(6)
    for i in range(6):
        out[0, i] = y[i]
    row = 1
    for n in range(nsteps):
        _rhs(y, g, kappa, ea, eb, lam, V, gamma, k1)
        for i in range(6):
            yt[i] = y[i] + 0.5 * dt * k1[i]
        _rhs(yt, g, kappa, ea, eb, lam, V, gamma, k2)
        for i in range(6):
            yt[i] = y[i] + 0.5 * dt * k2[i]
        _rhs(yt, g, kappa, ea, eb, lam, V, gamma, k3)
        for i in range(6):
            yt[i] = y[i] + dt * k3[i]
        _rhs(yt, g, kappa, ea, eb, lam, V, gamma, k4)
        for i in range(6):
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not (-1e12 <= y[i] <= 1e12):
                return False
        if (n + 1) % stride == 0:
            for i in range(6):
                out[row, i] = y[i]
            row += 1
    return True


def _args(p: DimensionlessParams):
    return (p.g, p.kappa, p.eta_a, p.eta_b, p.lam, p.V, p.gamma)


def eom_rhs(p: DimensionlessParams, s: StateVector) -> StateVector:
    """Right-hand side of the equations of motion at state s."""
    out = np.empty(6)
    _rhs(s.to_array(), *_args(p), out)
    return StateVector.from_array(out)


def rk4_step(p: DimensionlessParams, s: StateVector, dt: float) -> StateVector:
    """One fixed-step RK4 update (exposed mainly for order/symmetry checks)."""
    y = s.to_array()
    _rk4_run(y, dt, 1, *_args(p))
    return StateVector.from_array(y)


def default_initial_state() -> StateVector:
    """Empty cavity with the symmetry-breaking +1e-3 membrane displacement."""
    return StateVector(x=1e-3)


def integrate_trajectory(p: DimensionlessParams, init: StateVector,
                         t_final: float, cfg: IntegratorConfig | None = None,
                         stride: int = 1) -> Trajectory:
    """Record a trajectory from `init` up to t_final, decimated by `stride`."""
    cfg = cfg or IntegratorConfig()
    if stride < 1:
        raise ValidationError(f"stride must be >= 1, got {stride}")
    dt = cfg.step_for(p)
    nsteps = max(1, int(round(t_final / dt)))
    out = np.empty((nsteps // stride + 1, 6))
    y = init.to_array()
    ok = _rk4_record(y, dt, nsteps, stride, *_args(p), out)
    if not ok:
        raise ConvergenceError(
            "trajectory diverged (component exceeded 1e12)",
            diagnostics={"t_final": t_final, "dt": dt})
    t = dt * stride * np.arange(out.shape[0])
    return Trajectory(t=t, x=out[:, 0], p=out[:, 1], re_a=out[:, 2],
                      im_a=out[:, 3], re_b=out[:, 4], im_b=out[:, 5])


def trajectory_csv(traj: Trajectory) -> str:
    rows = zip(traj.t, traj.x, traj.p, traj.re_a, traj.im_a, traj.re_b, traj.im_b)
    return csvio.render_csv(TRAJECTORY_CSV_HEADER, rows)


def damped_displacement(p: DimensionlessParams) -> float:
    """Broken-branch displacement of the damped flow.

    The damped threshold sits at mu = sqrt(1 + gamma^2); writing
    mu_gamma = mu / sqrt(1 + gamma^2), the stationary displacement is
    sqrt(2 eps0 (mu_gamma - 1)) / mu (and the momentum p_ss = gamma x_ss).
    Reduces to the undamped closed form at gamma = 0.  Returns 0 below the
    damped threshold.
    """
    cs = critical_set(p)
    mu_gamma = cs.mu / math.sqrt(1.0 + p.gamma ** 2)
    if mu_gamma <= 1.0:
        return 0.0
    return math.sqrt(2.0 * cs.epsilon0 * (mu_gamma - 1.0)) / cs.mu


def relax_to_steady(p: DimensionlessParams, init: StateVector | None = None,
                    cfg: IntegratorConfig | None = None) -> SteadyState:
    """Integrate until the flow settles, then report the steady state.

    The convergence criterion is the mean ||rhs|| over one full membrane
    period (2 pi) dropping below cfg.residual_tol, which avoids flagging a
    slowly spiralling state as converged.  Raises ConvergenceError when the
    horizon t_max is exhausted or a component diverges.
    """
    cfg = cfg or IntegratorConfig()
    if p.kappa == 0.0 and p.gamma == 0.0:
        raise ValidationError(
            "relaxation needs dissipation: kappa > 0 or gamma > 0")
    y = (init or default_initial_state()).to_array()
    dt = cfg.step_for(p)
    steps_per_period = max(1, int(round(2.0 * math.pi / dt)))
    n_periods = max(1, int(math.ceil(cfg.t_max / (steps_per_period * dt))))
    resid = math.inf
    for k in range(n_periods):
        _, resid, ok = _rk4_run(y, dt, steps_per_period, *_args(p))
        if not ok:
            raise ConvergenceError(
                "trajectory diverged (component exceeded 1e12)",
                residual=resid, iterations=(k + 1) * steps_per_period,
                diagnostics={"state": y.tolist()})
        if resid <= cfg.residual_tol:
            break
    else:
        raise ConvergenceError(
            f"no steady state within t_max = {cfg.t_max} "
            f"(period-mean residual {resid:.3e} > {cfg.residual_tol:.1e}; "
            "the broken branch has no point attractor in this regime)",
            residual=resid, iterations=n_periods * steps_per_period,
            diagnostics={"state": y.tolist()})
    x = float(y[0])
    a = complex(y[2], y[3])
    b = complex(y[4], y[5])
    if abs(x) <= 1e-4:
        branch = BRANCH_NORMAL
    else:
        branch = BRANCH_PLUS if x > 0 else BRANCH_MINUS
    return SteadyState(x_ss=x, a_ss=a, b_ss=b, n_a=abs(a) ** 2, n_b=abs(b) ** 2,
                       n_c=0.5 * x * x, branch=branch, is_minimum=True)


def _classify(p: DimensionlessParams, lam: float, dt: float,
              chunk_time: float = 250.0, max_chunks: int = 16) -> bool:
    """True when the x = 0 state is unstable at coupling `lam` (broken phase).

    Integrates from the deterministic 1e-3 seed with the fields slaved to
    the seed position, so the trajectory starts on the adiabatic manifold
    and the envelope max|x| per chunk tracks the soft mode from the first
    chunk.  A 50-fold rise, or a 50-fold fall while still falling, settles
    the call early; marginal cases go to the log-envelope slope over the
    second half of the window.
    """
    from dataclasses import replace

    from .meanfield import field_steady_states

    q = replace(p, lam=lam)
    x0 = 1e-3
    a0, b0 = field_steady_states(q, x0)
    y = np.array([x0, 0.0, a0.real, a0.imag, b0.real, b0.imag])
    nsteps = max(1, int(round(chunk_time / dt)))
    env = []
    for _ in range(max_chunks):
        mx, _, ok = _rk4_run(y, dt, nsteps, *_args(q))
        if not ok:
            return True
        env.append(mx)
        if mx > 50.0 * x0:
            return True
        if len(env) >= 2 and mx < x0 / 50.0 and env[-1] < env[-2]:
            return False
    # marginal: decide by the established envelope trend
    logs = np.log(np.asarray(env[len(env) // 2:]))
    slope = np.polyfit(np.arange(logs.size), logs, 1)[0]
    return bool(slope > 0)


def locate_bifurcation(p: DimensionlessParams, lambda_range: tuple[float, float],
                       cfg: IntegratorConfig | None = None) -> float:
    """Bisect the coupling at which x = 0 destabilizes.

    The supplied range must bracket the transition (stable at the lower
    edge, unstable at the upper); the returned midpoint carries an interval
    no wider than 1e-4 of itself.
    """
    cfg = cfg or IntegratorConfig()
    lo, hi = float(lambda_range[0]), float(lambda_range[1])
    if not hi > lo:
        raise ValidationError(f"empty coupling range ({lo}, {hi})")
    dt = cfg.step_for(p)
    lo_broken = _classify(p, lo, dt)
    hi_broken = _classify(p, hi, dt)
    if lo_broken or not hi_broken:
        raise ValidationError(
            f"range ({lo}, {hi}) does not bracket the transition: "
            f"lower edge {'unstable' if lo_broken else 'stable'}, "
            f"upper edge {'unstable' if hi_broken else 'stable'}")
    while hi - lo > 1e-4 * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if _classify(p, mid, dt):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
