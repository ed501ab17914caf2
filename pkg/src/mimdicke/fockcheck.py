"""Exact operator-level checks on a truncated three-mode Fock space.

Dense matrices for the two optical modes and the membrane mode on the
lexicographic product basis (n_a, n_b, n_c), used to verify number
conservation, the unnormalized two-mode spin algebra, the reduction to a
Dicke-type Hamiltonian at zero pumping, and the Z2 swap-parity symmetry.

Truncation puts defects at the highest occupation of each mode, so the
identities hold exactly only on sub-blocks that truncation cannot reach;
helpers for those masks are provided and the check_* functions apply them.
All construction is deterministic; matrix products may run on threaded
BLAS without affecting results.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .csvio import render_csv
from .errors import ValidationError
from .model import DimensionlessParams

OPERATOR_CSV_HEADER = "row,col,re,im"

DEFAULT_DIMENSION_BUDGET = 4096


@dataclass(frozen=True)
class FockTruncation:
    """Per-mode occupation cutoffs (inclusive) for the dense basis."""

    n_max_a: int
    n_max_b: int
    n_max_c: int
    budget: int = DEFAULT_DIMENSION_BUDGET

    def __post_init__(self):
        for name in ("n_max_a", "n_max_b", "n_max_c"):
            if getattr(self, name) < 2:
                raise ValidationError(f"{name} must be at least 2")
        if self.dim > self.budget:
            raise ValidationError(
                f"basis dimension {self.dim} overflows the budget {self.budget}")

    @property
    def dims(self) -> tuple:
        return (self.n_max_a + 1, self.n_max_b + 1, self.n_max_c + 1)

    @property
    def dim(self) -> int:
        da, db, dc = self.dims
        return da * db * dc


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator on the (n_a, n_b, n_c) lexicographic basis."""

    matrix: np.ndarray
    truncation: FockTruncation


def occupations(t: FockTruncation) -> np.ndarray:
    """(dim, 3) table of (n_a, n_b, n_c) in basis order."""
    da, db, dc = t.dims
    return np.array(list(itertools.product(range(da), range(db), range(dc))))


def sector_indices(t: FockTruncation, n_tot: int) -> np.ndarray:
    """Basis indices with n_a + n_b = n_tot (any n_c)."""
    occ = occupations(t)
    return np.nonzero(occ[:, 0] + occ[:, 1] == n_tot)[0]


def destroy(n_levels: int) -> np.ndarray:
    """Single-mode annihilation matrix on occupations 0..n_levels-1."""
    return np.diag(np.sqrt(np.arange(1.0, n_levels)), k=1).astype(np.complex128)


def _embed(t: FockTruncation, mode: int, single: np.ndarray) -> np.ndarray:
    mats = [np.eye(d, dtype=np.complex128) for d in t.dims]
    mats[mode] = single
    return np.kron(np.kron(mats[0], mats[1]), mats[2])


def position_operator(t: FockTruncation) -> OperatorMatrix:
    """x = (c + c^dag)/sqrt(2) of the membrane mode, embedded."""
    c = destroy(t.dims[2])
    return OperatorMatrix(_embed(t, 2, (c + c.conj().T) / math.sqrt(2.0)), t)


def momentum_operator(t: FockTruncation) -> OperatorMatrix:
    """p = i (c^dag - c)/sqrt(2) of the membrane mode, embedded."""
    c = destroy(t.dims[2])
    return OperatorMatrix(_embed(t, 2, 1.0j * (c.conj().T - c) / math.sqrt(2.0)), t)


def phonon_parity(t: FockTruncation) -> OperatorMatrix:
    """Diagonal (-1)^{n_c}; conjugation flips the sign of x and p."""
    occ = occupations(t)
    return OperatorMatrix(np.diag(((-1.0) ** occ[:, 2]).astype(np.complex128)), t)


def total_number(t: FockTruncation) -> OperatorMatrix:
    """N_tot = n_a + n_b (the membrane mode is not counted)."""
    occ = occupations(t)
    return OperatorMatrix(np.diag((occ[:, 0] + occ[:, 1]).astype(np.complex128)), t)


def schwinger_operators(t: FockTruncation):
    """Unnormalized two-mode spin triple.

    S_x = a^dag b + b^dag a, S_y = i (a^dag b - b^dag a),
    S_z = (n_a - n_b)/2; with these conventions [S_x, S_y] = -4i S_z and
    S_x^2 + S_y^2 + 4 S_z^2 = N_tot (N_tot + 2) on sectors the truncation
    leaves intact.
    """
    a = _embed(t, 0, destroy(t.dims[0]))
    b = _embed(t, 1, destroy(t.dims[1]))
    hop = a.conj().T @ b
    s_x = hop + hop.conj().T
    s_y = 1.0j * (hop - hop.conj().T)
    occ = occupations(t)
    s_z = np.diag(((occ[:, 0] - occ[:, 1]) / 2.0).astype(np.complex128))
    return (OperatorMatrix(s_x, t), OperatorMatrix(s_y, t), OperatorMatrix(s_z, t))


def build_hamiltonian(p: DimensionlessParams, t: FockTruncation) -> OperatorMatrix:
    """Driven two-mode/membrane Hamiltonian on the truncated basis.

    H = (p^2 + x^2)/2 + g (a^dag b + b^dag a) + (lam/sqrt(V)) x (n_a - n_b)
        + eta_a sqrt(V) (a + a^dag) + eta_b sqrt(V) (b + b^dag)

    Every term is Hermitian by construction (exactly, not to roundoff).
    """
    a = _embed(t, 0, destroy(t.dims[0]))
    b = _embed(t, 1, destroy(t.dims[1]))
    x = position_operator(t).matrix
    pm = momentum_operator(t).matrix
    occ = occupations(t)
    n_diff = np.diag((occ[:, 0] - occ[:, 1]).astype(np.complex128))

    hop = a.conj().T @ b
    sv = math.sqrt(p.V)
    h = 0.5 * (pm @ pm + x @ x)
    h = h + p.g * (hop + hop.conj().T)
    h = h + (p.lam / sv) * (x @ n_diff)
    h = h + p.eta_a * sv * (a + a.conj().T)
    h = h + p.eta_b * sv * (b + b.conj().T)
    return OperatorMatrix(h, t)


def dicke_hamiltonian(p: DimensionlessParams, t: FockTruncation) -> OperatorMatrix:
    """n_c + g S_x + sqrt(2/V) lam (c + c^dag) S_z on the same basis."""
    occ = occupations(t)
    n_c = np.diag(occ[:, 2].astype(np.complex128))
    s_x, _, s_z = schwinger_operators(t)
    c = _embed(t, 2, destroy(t.dims[2]))
    h = n_c + p.g * s_x.matrix
    h = h + math.sqrt(2.0 / p.V) * p.lam * ((c + c.conj().T) @ s_z.matrix)
    return OperatorMatrix(h, t)


def parity_operator(t: FockTruncation, sign: int) -> OperatorMatrix:
    """Z2 symmetry operator: (-1)^{n_c} combined with the a<->b swap.

    sign=+1 is the variant that commutes with symmetric pumping
    (eta_a = +eta_b); sign=-1 additionally applies (-1)^{n_a+n_b} and
    commutes with antisymmetric pumping (eta_a = -eta_b).  Requires equal
    optical cutoffs so the swap is an endomorphism; U^2 = identity.
    """
    if sign not in (-1, 1):
        raise ValidationError("sign must be +1 or -1")
    da, db, dc = t.dims
    if da != db:
        raise ValidationError(
            "swap parity requires n_max_a == n_max_b")
    swap = np.zeros((da * db, da * db))
    ii, jj = np.meshgrid(np.arange(da), np.arange(db), indexing="ij")
    swap[(ii * db + jj).ravel(), (jj * da + ii).ravel()] = 1.0
    if sign == -1:
        swap = swap * ((-1.0) ** (ii + jj)).ravel()[np.newaxis, :]
    p_c = np.diag((-1.0) ** np.arange(dc))
    return OperatorMatrix(np.kron(swap, p_c).astype(np.complex128), t)


def _max_abs(m: np.ndarray) -> float:
    return float(np.max(np.abs(m)))


def check_number_conservation(p: DimensionlessParams, t: FockTruncation) -> float:
    """Max-norm of [H, N_tot]; zero (exactly) when eta_a = eta_b = 0.

    With pumping on, the drive terms a + a^dag move single photons and the
    commutator is nonzero; the returned norm quantifies the breaking.
    """
    h = build_hamiltonian(p, t).matrix
    n = total_number(t).matrix
    return _max_abs(h @ n - n @ h)


def check_dicke_equivalence(p: DimensionlessParams, t: FockTruncation) -> float:
    """Max deviation of H - H_D - I/2 away from the top phonon level.

    The oscillator part of H equals n_c + 1/2 everywhere except the
    n_c = n_max_c diagonal entry (a truncation defect), so the comparison
    is restricted to rows and columns with n_c < n_max_c.  Meaningful at
    zero pumping, where the two Hamiltonians coincide sector by sector.
    """
    h = build_hamiltonian(p, t).matrix
    h_d = dicke_hamiltonian(p, t).matrix
    dev = h - h_d - 0.5 * np.eye(t.dim)
    keep = occupations(t)[:, 2] < t.n_max_c
    return _max_abs(dev[np.ix_(keep, keep)])


def check_parity(p: DimensionlessParams, t: FockTruncation, sign: int) -> float:
    """Max-norm of [H, U] for the sign-selected swap-parity variant."""
    h = build_hamiltonian(p, t).matrix
    u = parity_operator(t, sign).matrix
    return _max_abs(h @ u - u @ h)


def operator_csv(op: OperatorMatrix) -> str:
    """Flat dump of the nonzero entries, row-major: row,col,re,im."""
    rows, cols = np.nonzero(op.matrix)
    vals = op.matrix[rows, cols]
    return render_csv(OPERATOR_CSV_HEADER,
                      zip(rows, cols, vals.real, vals.imag))
