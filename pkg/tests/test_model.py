"""Unit conversions and critical-coupling formulas."""

import math

import numpy as np
import pytest

from mimdicke import (
    C_LIGHT,
    DimensionlessParams,
    PhysicalParams,
    ValidationError,
    coupling_from_reflectivity,
    critical_coupling,
    critical_power,
    critical_set,
    detuned_critical_coupling,
    eta_from_power,
    lambda_from_physical,
)

# Laboratory reference point: 67 mm cavity, 50 ng-scale SiN membrane at
# 100 kHz, 1064 nm pump.
LAB = dict(L=0.067, m=5e-14, omega=2 * math.pi * 1e5,
           omega_centre=2 * math.pi * C_LIGHT / 1064e-9,
           R_membrane=0.5, P=1e-3, Q=1e7, V=1.0)


def lab_params(**over):
    d = dict(LAB)
    d.update(over)
    return PhysicalParams(**d)


class TestCouplingFromReflectivity:
    def test_half_reflectivity_gives_c_over_L(self):
        g = coupling_from_reflectivity(lab_params())
        assert g == pytest.approx(C_LIGHT / 0.067, rel=1e-12)
        assert g == pytest.approx(4.475e9, rel=1e-3)

    def test_perfect_mirror_limit(self):
        g_half = coupling_from_reflectivity(lab_params())
        g_near1 = coupling_from_reflectivity(lab_params(R_membrane=1 - 1e-9))
        assert 0 < g_near1 < 1e-4 * g_half

    def test_halving_length_doubles_g(self):
        g1 = coupling_from_reflectivity(lab_params())
        g2 = coupling_from_reflectivity(lab_params(L=0.067 / 2))
        assert g2 == pytest.approx(2 * g1, rel=1e-12)

    def test_rejects_unphysical_reflectivity(self):
        with pytest.raises(ValidationError):
            lab_params(R_membrane=1.0)
        with pytest.raises(ValidationError):
            lab_params(R_membrane=0.0)


class TestLambdaFromPhysical:
    def test_lab_value(self):
        lam = lambda_from_physical(lab_params())
        assert lam == pytest.approx(4.87e-3, rel=0.01)

    def test_mass_scaling(self):
        lam1 = lambda_from_physical(lab_params())
        lam4 = lambda_from_physical(lab_params(m=4 * LAB["m"]))
        assert lam4 == pytest.approx(lam1 / 2, rel=1e-12)

    def test_pump_frequency_scaling(self):
        lam1 = lambda_from_physical(lab_params())
        lam2 = lambda_from_physical(lab_params(omega_centre=2 * LAB["omega_centre"]))
        assert lam2 == pytest.approx(2 * lam1, rel=1e-12)


class TestEtaFromPower:
    def test_zero_power(self):
        assert eta_from_power(0.0, 2 * math.pi * 1e5, LAB["omega_centre"]) == 0.0

    def test_sqrt_power_scaling(self):
        kw = dict(kappa=2 * math.pi * 1e5, omega_centre=LAB["omega_centre"])
        e1 = eta_from_power(1e-3, **kw)
        e4 = eta_from_power(4e-3, **kw)
        assert e4 == pytest.approx(2 * e1, rel=1e-12)

    def test_eta_at_critical_power(self):
        # At P = P_c the dimensionless pump amplitude is ~1.03e5 membrane
        # frequencies for the reference point g = 2*pi*1e7, kappa = omega.
        p = lab_params()
        g = 2 * math.pi * 1e7
        kappa = p.omega
        Pc = critical_power(p, g, kappa)
        eta = eta_from_power(Pc, kappa, p.omega_centre)
        assert eta / p.omega == pytest.approx(1.03e5, rel=0.02)


class TestCriticalCoupling:
    def test_unit_point(self):
        assert critical_coupling(1.0, 1.0, 1.0) == pytest.approx(1.0, rel=1e-15)

    def test_hand_value(self):
        # (9 + 4) / (8 sqrt(3))
        assert critical_coupling(3.0, 2.0, 4.0) == pytest.approx(13 / (8 * math.sqrt(3)), rel=1e-14)
        assert critical_coupling(3.0, 2.0, 4.0) == pytest.approx(0.9382, abs=1e-4)

    def test_lossless_closed_form(self):
        # kappa = 0, eta = g recovers sqrt(g)/2
        for g in (0.5, 1.0, 2.0, 7.3):
            assert critical_coupling(g, 0.0, g) == pytest.approx(math.sqrt(g) / 2, rel=1e-14)

    def test_rejects_zero_pump(self):
        with pytest.raises(ValidationError):
            critical_coupling(1.0, 1.0, 0.0)


class TestDetunedCriticalCoupling:
    def test_reduces_to_undetuned(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            g = rng.uniform(0.1, 10)
            kappa = rng.uniform(0, 5)
            eta = rng.uniform(0.1, 10)
            lc = critical_coupling(g, kappa, eta)
            lcd = detuned_critical_coupling(g, kappa, eta, 0.0)
            assert abs(lcd - lc) <= 1e-12 * lc

    def test_hand_value(self):
        val = detuned_critical_coupling(1.0, 1.0, 1.0, 0.5)
        assert val == pytest.approx(0.5 * math.sqrt(1.25 * 3.25 / 1.5), rel=1e-14)
        assert val == pytest.approx(0.8227, abs=2e-4)

    def test_divergence_towards_minus_g(self):
        assert detuned_critical_coupling(1.0, 1.0, 1.0, -1.0 + 1e-8) > 1e3

    def test_loss_of_criticality(self):
        with pytest.raises(ValidationError):
            detuned_critical_coupling(1.0, 1.0, 1.0, -1.0)


class TestCriticalPower:
    def test_lab_value(self):
        p = lab_params()
        Pc = critical_power(p, 2 * math.pi * 1e7, p.omega)
        assert Pc == pytest.approx(1.237e-3, rel=0.01)

    def test_length_scaling(self):
        p1, p2 = lab_params(), lab_params(L=2 * LAB["L"])
        g, kappa = 2 * math.pi * 1e7, LAB["omega"]
        assert critical_power(p2, g, kappa) == pytest.approx(
            4 * critical_power(p1, g, kappa), rel=1e-12)

    def test_self_consistency_with_lambda(self):
        # eta(P_c) inserted into the critical-coupling formula must return
        # the same lambda as the direct conversion: that identity defines P_c.
        p = lab_params()
        g_dim = 2 * math.pi * 1e7
        kappa_dim = p.omega
        Pc = critical_power(p, g_dim, kappa_dim)
        eta = eta_from_power(Pc, kappa_dim, p.omega_centre) / p.omega
        lam_c = critical_coupling(g_dim / p.omega, kappa_dim / p.omega, eta)
        lam = lambda_from_physical(p)
        assert lam_c == pytest.approx(lam, rel=0.005)


class TestParamContainers:
    def test_balanced_antisymmetric_predicate(self):
        p = DimensionlessParams(g=1, kappa=1, eta_a=1.0, eta_b=-1.0, lam=1, V=100)
        assert p.is_balanced_antisymmetric()
        q = DimensionlessParams(g=1, kappa=1, eta_a=1.0, eta_b=1.0, lam=1, V=100)
        assert not q.is_balanced_antisymmetric()

    def test_invariants_enforced(self):
        with pytest.raises(ValidationError):
            DimensionlessParams(g=0, kappa=1, eta_a=1, eta_b=-1, lam=1, V=100)
        with pytest.raises(ValidationError):
            DimensionlessParams(g=1, kappa=-0.1, eta_a=1, eta_b=-1, lam=1, V=100)
        with pytest.raises(ValidationError):
            DimensionlessParams(g=1, kappa=1, eta_a=1, eta_b=-1, lam=1, V=0)
        with pytest.raises(ValidationError):
            DimensionlessParams(g=1, kappa=1, eta_a=1, eta_b=-1, lam=1, V=100, gamma=-1)

    def test_critical_set_unit_point(self):
        p = DimensionlessParams(g=1, kappa=1, eta_a=1, eta_b=-1, lam=2.0, V=100)
        cs = critical_set(p)
        assert cs.lambda_c == pytest.approx(1.0, rel=1e-15)
        assert cs.lambda_c_detuned == pytest.approx(1.0, rel=1e-15)
        assert cs.mu == pytest.approx(2.0, rel=1e-15)
        assert cs.epsilon0 == pytest.approx(100.0, rel=1e-15)

    def test_critical_set_requires_balanced_pumping(self):
        p = DimensionlessParams(g=1, kappa=1, eta_a=1, eta_b=0.5, lam=1, V=100)
        with pytest.raises(ValidationError):
            critical_set(p)
