"""Eigendecomposition of sector Liouvillians and steady-state extraction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import SectorBasis
from .params import ModelParams
from .sparseop import SparseOperator

DENSE_DIM_CAP = 4096
SPLU_DIM_CAP = 20_000
STEADY_DIM_CAP = 200_000
RESIDUAL_TOL = 1e-8
STEADY_RESIDUAL_TOL = 1e-9


class NumericError(Exception):
    """Eigen/null-space solve failed to converge."""


@dataclass
class SpectrumResult:
    params: Optional[ModelParams]
    eigenvalues: np.ndarray
    right_vectors: Optional[np.ndarray] = None
    left_vectors: Optional[np.ndarray] = None

    @property
    def sorted_order(self) -> np.ndarray:
        """Permutation sorting eigenvalues by (Re, Im) ascending."""
        return np.lexsort((self.eigenvalues.imag, self.eigenvalues.real))

    def sorted_eigenvalues(self) -> np.ndarray:
        return self.eigenvalues[self.sorted_order]


@dataclass
class SteadyState:
    params: Optional[ModelParams]
    probabilities: np.ndarray
    residual: float


def dense_spectrum(op: SparseOperator, want_vectors: bool = True,
                   params: Optional[ModelParams] = None,
                   want_left: bool = False) -> SpectrumResult:
    """Full complex eigendecomposition; residuals are verified on exit."""
    if op.dim > DENSE_DIM_CAP:
        raise ValueError(f"dense spectrum capped at dim {DENSE_DIM_CAP}, got {op.dim}")
    A = op.todense()
    if not want_vectors:
        return SpectrumResult(params, la.eigvals(A))
    if want_left:
        evals, vl, vr = la.eig(A, left=True, right=True)
    else:
        evals, vr = la.eig(A)
        vl = None
    scale = max(1.0, float(np.abs(A).max()))
    res = np.linalg.norm(A @ vr - vr * evals[None, :], axis=0)
    worst = float(res.max()) / scale
    if worst > RESIDUAL_TOL:
        raise NumericError(
            f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL:.1e} "
            f"(dim={op.dim}, |A|max={scale:.3e})")
    return SpectrumResult(params, evals, right_vectors=vr, left_vectors=vl)


def refined_eigenvalues(op: SparseOperator) -> np.ndarray:
    """Eigenvalues sharpened by a two-sided Rayleigh quotient.

    For non-normal generators the plain QR eigenvalues carry an error
    of order eps times the eigenvalue condition number; one Rayleigh
    step with the computed left/right vectors squares that error away.
    """
    A = op.todense()
    evals, vl, vr = la.eig(A, left=True, right=True)
    num = np.einsum("ij,jk,ki->i", vl.conj().T, A, vr)
    den = np.einsum("ij,ji->i", vl.conj().T, vr)
    good = np.abs(den) > 1e-12
    refined = evals.copy()
    refined[good] = num[good] / den[good]
    return refined


def steady_state(op: SparseOperator, basis: SectorBasis,
                 params: Optional[ModelParams] = None,
                 max_iter: int = 200, tol: float = STEADY_RESIDUAL_TOL) -> SteadyState:
    """Probability-normalized right null vector of a sector generator.

    Shifted inverse iteration through a sparse LU factorization; the
    generator structure guarantees a zero eigenvalue, so a tiny negative
    shift keeps the factorization nonsingular while the iteration locks
    onto the null direction.
    """
    dim = op.dim
    if dim > STEADY_DIM_CAP:
        raise ValueError(f"steady-state solve capped at dim {STEADY_DIM_CAP}, got {dim}")
    A = op.tocsc()
    scale = max(1.0, float(np.abs(A.data).max()) if A.nnz else 1.0)
    if dim <= SPLU_DIM_CAP:
        # Shifted inverse iteration; the tiny shift keeps the LU nonsingular.
        shift = 1e-10 * scale
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", spla.MatrixRankWarning)
            lu = spla.splu(A - shift * sp.identity(dim, format="csc"))
        v = np.full(dim, 1.0 / dim, dtype=complex)
        residual = np.inf
        for _ in range(max_iter):
            v = lu.solve(v)
            v /= np.linalg.norm(v)
            residual = float(np.abs(A @ v).max()) / scale
            if residual < tol:
                break
        else:
            raise NumericError(f"steady state not converged: residual {residual:.3e} > {tol:.1e}")
    else:
        # LU fill-in is prohibitive at this size; the steady state is the
        # rightmost eigenvalue (Re = 0) of the generator, which Arnoldi
        # reaches with matrix-vector products only.
        v0 = np.full(dim, 1.0 / dim)
        try:
            _, vecs = spla.eigs(A, k=1, which="LR", v0=v0, tol=1e-13,
                                maxiter=100 * max_iter)
        except spla.ArpackNoConvergence as exc:
            raise NumericError(f"steady state Arnoldi did not converge: {exc}") from exc
        v = vecs[:, 0]
        residual = float(np.abs(A @ v).max()) / scale
        if residual > tol:
            raise NumericError(f"steady state not converged: residual {residual:.3e} > {tol:.1e}")
    v = np.real(v)
    total = v.sum()
    if total < 0:
        v = -v
        total = -total
    p = v / total
    if p.min() < -1e-12:
        raise NumericError(f"steady state has negative weight {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    return SteadyState(params=params, probabilities=p,
                       residual=float(np.abs(A @ p).max()))


def normalized_mean_energy(spec: SpectrumResult, imag_tol: float = 1e-8) -> float:
    """Mean of (E_j - E_min) / (E_max - E_min) over the spectrum.

    Defined on real spectra; complex eigenvalues fall back to real parts
    with a warning (an extension beyond the real-spectrum regime).
    """
    ev = spec.eigenvalues
    if np.abs(ev.imag).max(initial=0.0) > imag_tol:
        warnings.warn("complex spectrum: normalized mean energy uses real parts")
    e = np.sort(ev.real)
    span = e[-1] - e[0]
    if span <= 0:
        raise NumericError("degenerate spectrum: E_max == E_min, normalization undefined")
    return float(((e - e[0]) / span).mean())
