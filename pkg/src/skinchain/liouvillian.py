"""Lindblad superoperator assembly and its reduction to non-Hermitian XXZ form.

Conventions, fixed bit-exactly here because they matter downstream:

* Vectorization: |rho> = sum_ij rho_ij |i>_R (x) |j>_L with superspace index
  i * 2**L + j, so a map rho -> A rho B lifts to kron(A, B.T).
* Dissipator normalization: D[rho] = sum_k (L_k rho L_k^dag
  - {L_k^dag L_k, rho} / 2).  With hop channels sqrt(J_L) S_a^+ S_b^- and
  sqrt(J_R) S_b^+ S_a^- per bond this reproduces the effective asymmetric
  XXZ generator exactly (checked by the projection tests); the doubled
  convention would give twice it.
* phi > 0 biases hopping to the right; the phi < 0 model is the site
  inversion j -> L+1-j of the phi > 0 one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import SectorBasis, apply_hop, site_weight
from .params import ModelParams
from .sparseop import SparseOperator

FULL_SPACE_MAX_L = 6


@dataclass(frozen=True)
class ProjectorSet:
    """Local projectors on the doubled space at one site.

    P1 selects (up)_R (down)_L, P2 the reverse, P0 the equal-spin rest;
    they are orthogonal and complete.
    """

    site: int
    P0: SparseOperator
    P1: SparseOperator
    P2: SparseOperator


def _bulk_bonds(params: ModelParams):
    """(a, b) site pairs carrying the bulk hop/dephase terms, 1-based."""
    if params.bc == "PBC":
        return [(j, j % params.L + 1) for j in range(1, params.L + 1)]
    return [(j, j + 1) for j in range(1, params.L)]


def build_effective_liouvillian(params: ModelParams, basis: SectorBasis) -> SparseOperator:
    """Sector-restricted effective Liouvillian for PBC, OBC, or GBC.

    Matrix elements: hop a -> a+1 carries J*exp(phi), the reverse
    J*exp(-phi); each anti-aligned bulk bond contributes -J*cosh(phi) on
    the diagonal.  OBC/GBC add the edge term J*sinh(phi)*(n_L - n_1); GBC
    further adds the delta_L (hop 1 -> L) and delta_R (hop L -> 1)
    boundary channels with their loss diagonals.  Coherent couplings
    (J_prime, h) cancel identically in this diagonal sector.
    """
    if basis.L != params.L or basis.M != params.M:
        raise ValueError("basis does not match params (L, M)")
    L, J, phi = params.L, params.J, params.phi
    amp_r = J * math.exp(phi)
    amp_l = J * math.exp(-phi)
    cosh = J * math.cosh(phi)
    sinh = J * math.sinh(phi)
    bonds = _bulk_bonds(params)

    rows, cols, vals = [], [], []
    for idx, c in enumerate(basis.configs):
        diag = 0.0
        for a, b in bonds:
            na = (c >> (a - 1)) & 1
            nb = (c >> (b - 1)) & 1
            if na != nb:
                diag -= cosh
            if na and not nb:
                rows.append(basis.index_of[apply_hop(c, a, b)])
                cols.append(idx)
                vals.append(amp_r)
            elif nb and not na:
                rows.append(basis.index_of[apply_hop(c, b, a)])
                cols.append(idx)
                vals.append(amp_l)
        if params.bc in ("OBC", "GBC"):
            n1 = c & 1
            nL = (c >> (L - 1)) & 1
            diag += sinh * (nL - n1)
            if params.bc == "GBC":
                if n1 and not nL:
                    diag -= params.delta_L
                    rows.append(basis.index_of[apply_hop(c, 1, L)])
                    cols.append(idx)
                    vals.append(params.delta_L)
                if nL and not n1:
                    diag -= params.delta_R
                    rows.append(basis.index_of[apply_hop(c, L, 1)])
                    cols.append(idx)
                    vals.append(params.delta_R)
        if diag != 0.0:
            rows.append(idx)
            cols.append(idx)
            vals.append(diag)
    return SparseOperator.from_triplets(basis.dim, rows, cols, vals)


def build_hermitian_obc(params: ModelParams, basis: SectorBasis) -> SparseOperator:
    """Hermitian image of the OBC chain under the imaginary gauge transform.

    Symmetric hop J on every bulk bond, the same diagonal as OBC.
    """
    L, J, phi = params.L, params.J, params.phi
    cosh = J * math.cosh(phi)
    sinh = J * math.sinh(phi)
    rows, cols, vals = [], [], []
    for idx, c in enumerate(basis.configs):
        diag = 0.0
        for a in range(1, L):
            na = (c >> (a - 1)) & 1
            nb = (c >> a) & 1
            if na != nb:
                diag -= cosh
                src, dst = (a, a + 1) if na else (a + 1, a)
                rows.append(basis.index_of[apply_hop(c, src, dst)])
                cols.append(idx)
                vals.append(J)
        diag += sinh * (((c >> (L - 1)) & 1) - (c & 1))
        if diag != 0.0:
            rows.append(idx)
            cols.append(idx)
            vals.append(diag)
    return SparseOperator.from_triplets(basis.dim, rows, cols, vals)


def build_phi_infinity_obc(basis: SectorBasis, J: float = 1.0) -> SparseOperator:
    """OBC generator in the phi -> infinity limit, in units of exp(phi).

    Right hops only; triangular once configurations are ordered by the
    occupied-site weight, with the fully right-packed domain wall as an
    exact null vector.
    """
    L = basis.L
    rows, cols, vals = [], [], []
    for idx, c in enumerate(basis.configs):
        diag = 0.0
        for a in range(1, L):
            na = (c >> (a - 1)) & 1
            nb = (c >> a) & 1
            if na != nb:
                diag -= 0.5 * J
            if na and not nb:
                rows.append(basis.index_of[apply_hop(c, a, a + 1)])
                cols.append(idx)
                vals.append(J)
        diag += 0.5 * J * (((c >> (L - 1)) & 1) - (c & 1))
        if diag != 0.0:
            rows.append(idx)
            cols.append(idx)
            vals.append(diag)
    return SparseOperator.from_triplets(basis.dim, rows, cols, vals)


def gauge_transform(op: SparseOperator, basis: SectorBasis, phi: float) -> SparseOperator:
    """Conjugate by D = diag(exp(phi * sum of occupied sites)): D^-1 op D.

    Realizes S_j^+ -> exp(-j*phi) S_j^+ on the sector; for OBC it turns
    the asymmetric chain Hermitian, for PBC the wrap bond picks up
    exp(+-phi*L) and Hermiticity fails.
    """
    if phi == 0.0:
        return op
    w = np.array([site_weight(c, basis.L) for c in basis.configs], dtype=float)
    coo = op.tocsr().tocoo()
    vals = coo.data * np.exp(phi * (w[coo.col] - w[coo.row]))
    return SparseOperator.from_triplets(op.dim, coo.row, coo.col, vals)


# ---------------------------------------------------------------------------
# Full doubled-space assembly
# ---------------------------------------------------------------------------

def _check_full_capacity(L: int):
    if L > FULL_SPACE_MAX_L:
        raise ValueError(f"full superoperator limited to L <= {FULL_SPACE_MAX_L}, got {L}")


def _hop_operator(L: int, src: int, dst: int, amp: float) -> sp.csr_matrix:
    """amp * S_dst^+ S_src^- on the 2**L space (sites 1-based)."""
    dim = 1 << L
    rows, cols, vals = [], [], []
    for w in range(dim):
        w2 = apply_hop(w, src, dst)
        if w2 is not None:
            rows.append(w2)
            cols.append(w)
            vals.append(amp)
    return sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim), dtype=np.complex128)


def _number_operator(L: int, site: int) -> sp.csr_matrix:
    dim = 1 << L
    diag = np.array([(w >> (site - 1)) & 1 for w in range(dim)], dtype=np.complex128)
    return sp.diags(diag).tocsr()


def _dissipation_channels(params: ModelParams):
    """Jump operators on the 2**L space: bulk hop pairs plus GBC boundaries."""
    L = params.L
    chans = []
    for a, b in _bulk_bonds(params):
        chans.append(_hop_operator(L, b, a, math.sqrt(params.J_L)))  # hop left
        chans.append(_hop_operator(L, a, b, math.sqrt(params.J_R)))  # hop right
    if params.bc == "GBC":
        if params.delta_L > 0:
            chans.append(_hop_operator(L, 1, L, math.sqrt(params.delta_L)))
        if params.delta_R > 0:
            chans.append(_hop_operator(L, L, 1, math.sqrt(params.delta_R)))
    return chans


def _coherent_hamiltonian(params: ModelParams) -> sp.csr_matrix:
    """H_S = sum_j J' Sz_j Sz_{j+1} + h Sz_j (diagonal, so integrability-safe)."""
    L = params.L
    dim = 1 << L
    diag = np.zeros(dim, dtype=np.complex128)
    if params.J_prime != 0.0 or params.h != 0.0:
        for w in range(dim):
            sz = [((w >> j) & 1) - 0.5 for j in range(L)]
            val = params.h * sum(sz)
            for a, b in _bulk_bonds(params):
                val += params.J_prime * sz[a - 1] * sz[b - 1]
            diag[w] = val
    return sp.diags(diag).tocsr()


def build_full_liouvillian(params: ModelParams, dissipators_on: bool = True) -> SparseOperator:
    """Full 4**L Lindblad superoperator in the doubled space."""
    _check_full_capacity(params.L)
    dim = 1 << params.L
    eye = sp.identity(dim, dtype=np.complex128, format="csr")
    total = sp.csr_matrix((dim * dim, dim * dim), dtype=np.complex128)

    if dissipators_on:
        for Lk in _dissipation_channels(params):
            LdL = (Lk.conjugate().transpose() @ Lk).tocsr()
            total = total + sp.kron(Lk, Lk.conjugate(), format="csr")
            total = total - 0.5 * sp.kron(LdL, eye, format="csr")
            total = total - 0.5 * sp.kron(eye, LdL.transpose(), format="csr")

    H = _coherent_hamiltonian(params)
    if H.nnz:
        total = total - 1j * (sp.kron(H, eye, format="csr")
                              - sp.kron(eye, H.transpose(), format="csr"))
    return SparseOperator(dim * dim, total)


def build_projectors(L: int, j: int) -> ProjectorSet:
    """The three local projectors at site j on the doubled space."""
    _check_full_capacity(L)
    if not 1 <= j <= L:
        raise ValueError(f"site j={j} out of range 1..{L}")
    dim = 1 << L
    n = _number_operator(L, j)
    eye = sp.identity(dim, dtype=np.complex128, format="csr")
    hole = (eye - n).tocsr()
    P1 = sp.kron(n, hole, format="csr")
    P2 = sp.kron(hole, n, format="csr")
    P0 = sp.identity(dim * dim, dtype=np.complex128, format="csr") - P1 - P2
    d = dim * dim
    return ProjectorSet(site=j, P0=SparseOperator(d, P0),
                        P1=SparseOperator(d, P1), P2=SparseOperator(d, P2))


def diagonal_sector_indices(basis: SectorBasis) -> np.ndarray:
    """Superspace indices of |s>_R (x) |s>_L for the sector's configs."""
    dim = 1 << basis.L
    return np.array([s * dim + s for s in basis.configs], dtype=np.int64)


def restrict_to_diagonal_sector(full_op: SparseOperator, basis: SectorBasis) -> SparseOperator:
    """Submatrix of the full superoperator on the diagonal magnetization sector."""
    idx = diagonal_sector_indices(basis)
    sub = full_op.tocsr()[idx, :][:, idx]
    return SparseOperator(basis.dim, sub)
