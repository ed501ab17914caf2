"""Drift matrices, excitation spectra and branch continuation."""

import math

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from mimdicke import DimensionlessParams, ValidationError
from mimdicke import dynamics as dyn
from mimdicke import meanfield as mf
from mimdicke import stability as stab


def params(lam=1.0, gamma=0.0, g=1.0, kappa=1.0, eta=1.0, V=100.0):
    return DimensionlessParams(g=g, kappa=kappa, eta_a=eta, eta_b=-eta,
                               lam=lam, V=V, gamma=gamma)


def broken_state(p):
    """Broken_plus steady state of the (possibly damped) flow."""
    x0 = dyn.damped_displacement(p)
    a0, b0 = mf.field_steady_states(p, x0)
    return mf.SteadyState(x_ss=x0, a_ss=complex(a0), b_ss=complex(b0),
                          n_a=abs(a0) ** 2, n_b=abs(b0) ** 2,
                          n_c=0.5 * x0 * x0, branch=mf.BRANCH_PLUS)


def matched_max_distance(w1, w2):
    cost = np.abs(np.asarray(w1)[:, None] - np.asarray(w2)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


class TestDriftMatrix:
    def test_printed_entries(self):
        D = stab.drift_matrix(params(g=2.0), 1.0)
        assert D[1, 2] == pytest.approx(1.0, rel=1e-15)      # mu sqrt(g/2)
        assert D[2, 0] == pytest.approx(-0.5, rel=1e-15)     # -mu kappa/sqrt(2g)

    def test_membrane_rotation_block(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            D = stab.drift_matrix(params(g=rng.uniform(0.5, 5),
                                         kappa=rng.uniform(0, 3)),
                                  rng.uniform(0, 3))
            assert D[0, 1] == -1.0
            assert D[1, 0] == 1.0

    def test_decoupling_at_mu_zero(self):
        D = stab.drift_matrix(params(g=2.0), 0.0)
        # membrane block and light blocks share no entries at mu = 0
        assert np.all(D[0:2, 2:] == 0)
        assert np.all(D[2:, 0:2] == 0)
        light = D[2:, 2:]
        assert np.allclose(np.diag(light), -1.0)  # kappa damping
        assert np.count_nonzero(light - np.diag(np.diag(light))) == 4  # g couplings

    def test_requires_balanced_pumping(self):
        q = DimensionlessParams(g=1, kappa=1, eta_a=1.0, eta_b=0.3, lam=1, V=100)
        with pytest.raises(ValidationError):
            stab.drift_matrix(q, 1.0)


class TestDriftMatrixGeneral:
    def test_reduces_to_closed_form_at_normal_branch(self):
        for lam in (0.3, 1.0, 1.5, 2.7):
            for g, kappa in ((1.0, 1.0), (2.0, 1.0), (0.7, 0.2)):
                p = params(lam=lam, g=g, kappa=kappa)
                mu = lam / ((g * g + kappa * kappa) / (2 * math.sqrt(g)))
                Dg = stab.drift_matrix_general(p, stab.normal_steady_state(p))
                Dc = stab.drift_matrix(p, mu)
                assert np.max(np.abs(Dg - Dc)) <= 1e-13

    def test_matches_finite_difference_jacobian_of_flow(self):
        # the drift matrix must be the Jacobian of the integrated equations;
        # compare spectra in a basis-free way at the broken branch
        def fd_jacobian(p, y0, h=1e-6):
            J = np.zeros((6, 6))
            for j in range(6):
                yp, ym = y0.copy(), y0.copy()
                yp[j] += h
                ym[j] -= h
                fp = dyn.eom_rhs(p, dyn.StateVector.from_array(yp)).to_array()
                fm = dyn.eom_rhs(p, dyn.StateVector.from_array(ym)).to_array()
                J[:, j] = (fp - fm) / (2 * h)
            return J

        for gamma in (0.0, 0.5):
            p = params(lam=2.0, gamma=gamma)
            ss = broken_state(p)
            y0 = np.array([ss.x_ss, gamma * ss.x_ss, ss.a_ss.real, ss.a_ss.imag,
                           ss.b_ss.real, ss.b_ss.imag])
            # the expansion point must be an exact fixed point
            assert np.max(np.abs(dyn.eom_rhs(
                p, dyn.StateVector.from_array(y0)).to_array())) <= 1e-9
            w_fd = np.linalg.eigvals(fd_jacobian(p, y0))
            w_dm = np.linalg.eigvals(stab.drift_matrix_general(p, ss))
            assert matched_max_distance(w_fd, w_dm) <= 1e-8

    def test_well_spectrum_stability_map(self):
        # just above threshold the well is attracting; by mu = 1.5 the
        # undamped well has picked up a growing pair (the limit-cycle onset
        # sits at mu = 4/3 for g = kappa = 1); damping restores decay
        w12 = stab.spectrum(stab.drift_matrix_general(
            params(lam=1.2), broken_state(params(lam=1.2)))).omegas
        assert np.max(w12.imag) < 0
        w15 = stab.spectrum(stab.drift_matrix_general(
            params(lam=1.5), broken_state(params(lam=1.5)))).omegas
        assert np.max(w15.imag) > 0
        p_damped = params(lam=1.5, gamma=0.5)
        w15d = stab.spectrum(stab.drift_matrix_general(
            p_damped, broken_state(p_damped))).omegas
        assert np.max(w15d.imag) < 0

    def test_normal_branch_grows_above_threshold(self):
        w = stab.spectrum(stab.drift_matrix(params(), 1.5)).omegas
        assert np.max(w.imag) > 0


class TestSpectrum:
    def test_lossless_hand_values(self):
        w = stab.spectrum(stab.drift_matrix(params(g=2.0, kappa=0.0), 0.0)).omegas
        expected = np.array([-2, -2, -1, 1, 2, 2], dtype=complex)
        assert matched_max_distance(w, expected) <= 1e-12

    def test_soft_pair_vanishes_at_threshold(self):
        # closed form: the inner square root hits 1 + g^2 exactly at mu = 1
        for g in (0.5, 1.0, 2.0, 5.0):
            w = stab.analytic_spectrum_lossless(g, 1.0)
            assert sorted(np.abs(w))[0] == 0.0
            assert sorted(np.abs(w))[1] == 0.0

    def test_soft_pair_purely_imaginary_above_threshold(self):
        w = stab.analytic_spectrum_lossless(2.0, 1.2)
        soft = sorted(w, key=abs)[:2]
        for val in soft:
            assert val.real == 0.0
            assert abs(val.imag) > 0

    def test_numeric_matches_analytic_lossless(self):
        # defective zero pair at mu = 1 limits any eigensolver to ~sqrt(eps)
        # forward error there; everywhere else demand 1e-9
        for g in (0.5, 1.0, 2.0, 5.0):
            p = params(g=g, kappa=0.0)
            for mu in np.linspace(0.0, 3.0, 61):
                w_num = stab.spectrum(stab.drift_matrix(p, mu)).omegas
                w_ana = stab.analytic_spectrum_lossless(g, mu)
                tol = 1e-7 if abs(mu - 1.0) <= 0.05 else 1e-9
                assert matched_max_distance(w_num, w_ana) <= tol

    def test_pairing_under_negated_conjugation(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            p = params(g=rng.uniform(0.5, 4), kappa=rng.uniform(0, 2),
                       gamma=rng.uniform(0, 0.5))
            w = stab.spectrum(stab.drift_matrix(p, rng.uniform(0, 2.5))).omegas
            assert matched_max_distance(w, -np.conj(w)) <= 1e-9

    def test_trace_sum_rule(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            kappa = rng.uniform(0, 3)
            D = stab.drift_matrix(params(g=rng.uniform(0.5, 4), kappa=kappa),
                                  rng.uniform(0, 2.5))
            assert abs(np.trace(D) + 4 * kappa) <= 1e-10
            w = stab.spectrum(D).omegas
            assert abs(np.sum(w).imag + 4 * kappa) <= 1e-9

    def test_eigenpair_residuals(self):
        D = stab.drift_matrix(params(g=2.0), 1.3)
        s, v = np.linalg.eig(D)
        resid = np.linalg.norm(D @ v - v * s[None, :], axis=0)
        assert np.max(resid) <= 1e-9 * np.linalg.norm(D)

    def test_threshold_location_lossless(self):
        # smallest |Re omega| branch crosses zero at mu = 1 +- 1e-3
        p = params(g=2.0, kappa=0.0)
        mus = np.linspace(0.99, 1.01, 2001)
        crossing = None
        for mu in mus:
            w = stab.spectrum(stab.drift_matrix(p, mu)).omegas
            soft = min(w, key=lambda z: abs(z.real))
            if abs(soft.real) < 1e-6:
                crossing = mu
                break
        assert crossing is not None
        assert crossing == pytest.approx(1.0, abs=1e-3)


class TestScanSpectrum:
    def test_figure_labels_at_mu_zero(self):
        p = params(g=2.0)
        scan = stab.scan_spectrum(p, np.linspace(0.0, 1.5, 151))
        idx = {name: j for j, name in enumerate(scan.branches)}
        w0 = scan.omegas[0]
        for name in ("light1+", "light1-", "light2+", "light2-"):
            assert w0[idx[name]].imag == pytest.approx(-1.0, abs=1e-12)
        assert w0[idx["membrane+"]] == pytest.approx(1.0 + 0j, abs=1e-12)
        assert w0[idx["membrane-"]] == pytest.approx(-1.0 + 0j, abs=1e-12)

    def test_membrane_picks_up_light_damping(self):
        p = params(g=2.0)
        scan = stab.scan_spectrum(p, np.linspace(0.05, 0.95, 91))
        j = list(scan.branches).index("membrane+")
        assert np.all(scan.omegas[:, j].imag < 0)

    def test_membrane_collision_near_threshold(self):
        p = params(g=2.0)
        scan = stab.scan_spectrum(p, np.linspace(0.9, 1.1, 101))
        j = list(scan.branches).index("membrane+")
        re = np.abs(scan.omegas[:, j].real)
        collided = scan.mu[re < 1e-9]
        assert collided.size > 0
        assert collided[0] == pytest.approx(1.0, abs=0.02)

    def test_uncoupled_light_pair_stays_put(self):
        # the symmetric optical mode never talks to the membrane
        p = params(g=2.0)
        scan = stab.scan_spectrum(p, np.linspace(0.0, 1.5, 151))
        j = list(scan.branches).index("light1+")
        col = scan.omegas[:, j]
        assert np.max(np.abs(col - (p.g - 1j * p.kappa))) <= 1e-9

    def test_csv_schema(self):
        p = params(g=2.0)
        scan = stab.scan_spectrum(p, np.linspace(0.0, 0.2, 3))
        text = stab.scan_csv(scan)
        lines = text.strip().split("\n")
        assert lines[0] == "mu,branch,re_omega,im_omega"
        assert len(lines) == 1 + 3 * 6
        fields = lines[1].split(",")
        assert fields[1] in stab.BRANCHES

    def test_grid_validation(self):
        p = params()
        with pytest.raises(ValidationError):
            stab.scan_spectrum(p, np.array([0.5, 0.4]))
        with pytest.raises(ValidationError):
            stab.scan_spectrum(p, np.array([-0.1, 0.5]))
