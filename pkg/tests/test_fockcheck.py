import numpy as np
import pytest

from mimdicke.errors import ValidationError
from mimdicke.model import DimensionlessParams
from mimdicke import fockcheck as fc

EXACT = 1e-12


def params(g=1.0, lam=0.0, eta_a=0.0, eta_b=0.0, V=50.0):
    return DimensionlessParams(g=g, kappa=1.0, eta_a=eta_a, eta_b=eta_b,
                               lam=lam, V=V)


def sector(mat, t, n_tot):
    idx = fc.sector_indices(t, n_tot)
    return mat[np.ix_(idx, idx)]


def test_truncation_rejects_tiny_cutoffs():
    with pytest.raises(ValidationError):
        fc.FockTruncation(1, 3, 3)
    with pytest.raises(ValidationError):
        fc.FockTruncation(3, 3, 0)


def test_truncation_budget_overflow():
    # 4*4*401 = 6416 > 4096
    with pytest.raises(ValidationError):
        fc.FockTruncation(3, 3, 400)
    t = fc.FockTruncation(3, 3, 400, budget=10000)
    assert t.dim == 6416


def test_dimension_product():
    t = fc.FockTruncation(3, 2, 4)
    assert t.dims == (4, 3, 5)
    assert t.dim == 60
    assert fc.occupations(t).shape == (60, 3)


def test_commutator_canonical_below_cutoff():
    a = fc.destroy(5)
    comm = (a @ a.conj().T - a.conj().T @ a).real
    # identity on occupations the cutoff cannot see; defect -n_max on top
    # (diagonal entries are sqrt(n)^2 differences, so only near-exact)
    assert np.allclose(np.diag(comm), [1.0, 1.0, 1.0, 1.0, -4.0], atol=EXACT)
    assert np.max(np.abs(comm - np.diag(np.diag(comm)))) == 0.0


def test_hamiltonian_exactly_hermitian_and_real():
    t = fc.FockTruncation(3, 3, 3)
    h = fc.build_hamiltonian(params(g=1.3, lam=0.9, eta_a=0.7, eta_b=-0.7), t).matrix
    assert np.max(np.abs(h - h.conj().T)) == 0.0
    assert np.max(np.abs(h.imag)) == 0.0


def test_decoupled_spectrum_sector_zero():
    # no coupling, no pumping: vacuum optical sector is a bare oscillator
    t = fc.FockTruncation(3, 3, 3)
    h = fc.build_hamiltonian(params(g=1.0), t).matrix
    ev = np.linalg.eigvalsh(sector(h, t, 0))
    assert abs(ev[0] - 0.5) < EXACT
    # n_c + 1/2 ladder below the truncation defect
    assert np.allclose(np.sort(ev)[:3], [0.5, 1.5, 1.5], atol=EXACT)


def test_decoupled_spectrum_single_photon_splitting():
    t = fc.FockTruncation(3, 3, 3)
    h = fc.build_hamiltonian(params(g=1.0), t).matrix
    ev = np.linalg.eigvalsh(sector(h, t, 1))
    # n_c + 1/2 +- g; lowest pair at n_c = 0
    assert abs(ev[0] + 0.5) < EXACT
    assert np.min(np.abs(ev - 1.5)) < EXACT


def test_single_phonon_diagonal_element():
    t = fc.FockTruncation(3, 3, 3)
    h = fc.build_hamiltonian(params(g=1.0), t).matrix
    # lexicographic index of (0, 0, 1)
    assert h[1, 1].real == pytest.approx(1.5, abs=EXACT)


def test_spin_commutator_on_intact_sectors():
    t = fc.FockTruncation(3, 3, 3)
    sx, sy, sz = (o.matrix for o in fc.schwinger_operators(t))
    for n in range(4):
        dev = np.max(np.abs(sector(sx @ sy - sy @ sx, t, n)
                            + 4j * sector(sz, t, n)))
        assert dev < EXACT
    # truncation deforms the algebra on overfull sectors
    assert np.max(np.abs(sx @ sy - sy @ sx + 4j * sz)) > 1.0


def test_spin_operators_block_diagonal_in_total_number():
    t = fc.FockTruncation(3, 3, 3)
    n = fc.total_number(t).matrix
    for op in fc.schwinger_operators(t):
        assert np.max(np.abs(op.matrix @ n - n @ op.matrix)) == 0.0


def test_sx_eigenvalues_single_photon():
    t = fc.FockTruncation(3, 3, 3)
    sx = fc.schwinger_operators(t)[0].matrix
    ev = np.linalg.eigvalsh(sector(sx, t, 1))
    assert np.allclose(np.sort(np.unique(np.round(ev, 10))), [-1.0, 1.0])


def test_casimir_on_intact_sectors():
    t = fc.FockTruncation(3, 3, 3)
    sx, sy, sz = (o.matrix for o in fc.schwinger_operators(t))
    cas = sx @ sx + sy @ sy + 4.0 * sz @ sz
    for n in range(4):
        blk = sector(cas, t, n)
        dev = np.max(np.abs(blk - n * (n + 2) * np.eye(len(blk))))
        assert dev < EXACT


def test_number_conserved_without_pumping():
    t = fc.FockTruncation(3, 3, 3)
    assert fc.check_number_conservation(params(g=1.3, lam=0.9), t) == 0.0


def test_pumping_breaks_number_conservation():
    t = fc.FockTruncation(3, 3, 3)
    assert fc.check_number_conservation(
        params(g=1.3, lam=0.9, eta_a=0.1), t) > 0.1


def test_dicke_equivalence_at_zero_pumping():
    t = fc.FockTruncation(2, 2, 4)
    assert fc.check_dicke_equivalence(params(g=1.0, lam=1.0, V=100.0), t) < EXACT


def test_dicke_equivalence_zero_coupling():
    t = fc.FockTruncation(2, 2, 4)
    assert fc.check_dicke_equivalence(params(g=2.0, lam=0.0, V=100.0), t) < EXACT


def test_dicke_coupling_scales_with_mode_volume():
    # lambda-coupling blocks of both Hamiltonians shrink by 1/sqrt(2) when
    # V doubles, and are identical between the two forms
    t = fc.FockTruncation(2, 2, 4)
    def coupling(build, v):
        on = build(params(g=1.0, lam=1.0, V=v), t).matrix
        off = build(params(g=1.0, lam=0.0, V=v), t).matrix
        return on - off
    c1 = coupling(fc.build_hamiltonian, 100.0)
    c2 = coupling(fc.build_hamiltonian, 200.0)
    d1 = coupling(fc.dicke_hamiltonian, 100.0)
    d2 = coupling(fc.dicke_hamiltonian, 200.0)
    assert np.max(np.abs(c1 - d1)) == 0.0
    assert np.max(np.abs(c2 * np.sqrt(2.0) - c1)) < EXACT
    assert np.max(np.abs(d2 * np.sqrt(2.0) - d1)) < EXACT


def test_parity_antisymmetric_pumping():
    t = fc.FockTruncation(3, 3, 3)
    p = params(g=1.3, lam=0.9, eta_a=0.7, eta_b=-0.7)
    assert fc.check_parity(p, t, -1) == 0.0
    assert fc.check_parity(p, t, +1) > 1.0


def test_parity_symmetric_pumping():
    t = fc.FockTruncation(3, 3, 3)
    p = params(g=1.3, lam=0.9, eta_a=0.7, eta_b=0.7)
    assert fc.check_parity(p, t, +1) == 0.0
    assert fc.check_parity(p, t, -1) > 1.0


def test_unequal_pump_magnitudes_break_parity():
    t = fc.FockTruncation(3, 3, 3)
    p = params(g=1.3, lam=0.9, eta_a=0.7, eta_b=-0.5)
    assert fc.check_parity(p, t, -1) > 0.1
    assert fc.check_parity(p, t, +1) > 0.1


def test_parity_operator_is_an_exact_involution():
    t = fc.FockTruncation(3, 3, 3)
    eye = np.eye(t.dim)
    for sign in (-1, +1):
        u = fc.parity_operator(t, sign).matrix
        assert np.max(np.abs(u @ u - eye)) == 0.0
        assert np.max(np.abs(u - u.T)) == 0.0


def test_parity_requires_equal_optical_cutoffs():
    with pytest.raises(ValidationError):
        fc.parity_operator(fc.FockTruncation(3, 2, 3), -1)
    with pytest.raises(ValidationError):
        fc.parity_operator(fc.FockTruncation(3, 3, 3), 2)


def test_phonon_parity_flips_position_and_momentum():
    t = fc.FockTruncation(2, 2, 5)
    pc = fc.phonon_parity(t).matrix
    x = fc.position_operator(t).matrix
    pm = fc.momentum_operator(t).matrix
    assert np.max(np.abs(pc @ x @ pc + x)) == 0.0
    assert np.max(np.abs(pc @ pm @ pc + pm)) == 0.0


def test_all_checks_over_random_draws():
    t = fc.FockTruncation(3, 3, 3)
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = rng.uniform(0.5, 3.0)
        lam = rng.uniform(0.0, 2.0)
        v = rng.uniform(10.0, 1000.0)
        eta = rng.uniform(0.1, 1.0)
        assert fc.check_number_conservation(params(g=g, lam=lam, V=v), t) < EXACT
        assert fc.check_dicke_equivalence(params(g=g, lam=lam, V=v), t) < EXACT
        assert fc.check_parity(
            params(g=g, lam=lam, eta_a=eta, eta_b=-eta, V=v), t, -1) < EXACT
        assert fc.check_parity(
            params(g=g, lam=lam, eta_a=eta, eta_b=eta, V=v), t, +1) < EXACT


def test_operator_csv_lists_nonzero_entries():
    t = fc.FockTruncation(2, 2, 2)
    sy = fc.schwinger_operators(t)[1]
    txt = fc.operator_csv(sy)
    lines = txt.splitlines()
    assert lines[0] == "row,col,re,im"
    assert len(lines) - 1 == np.count_nonzero(sy.matrix)
    row, col, re, im = lines[1].split(",")
    assert sy.matrix[int(row), int(col)] == complex(float(re), float(im))
    assert fc.operator_csv(sy) == txt
