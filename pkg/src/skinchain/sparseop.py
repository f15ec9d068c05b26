"""Complex sparse operators with coalesced triplet storage and text export."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

DROP_TOL = 1e-14
HERMITIAN_TOL = 1e-12


class SparseOperator:
    """Immutable complex sparse matrix with dimension metadata.

    Exact (and near-exact, |v| <= 1e-14) zeros are never stored.  The
    hermitian flag is computed lazily and cached.
    """

    def __init__(self, dim: int, matrix: sp.spmatrix):
        m = sp.csr_matrix(matrix, shape=(dim, dim), dtype=np.complex128)
        m.sum_duplicates()
        mask = np.abs(m.data) > DROP_TOL
        if not mask.all():
            coo = m.tocoo()
            keep = np.abs(coo.data) > DROP_TOL
            m = sp.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])),
                              shape=(dim, dim))
        self.dim = dim
        self._csr = m
        self._hermitian = None

    @classmethod
    def from_triplets(cls, dim: int, rows, cols, vals) -> "SparseOperator":
        m = sp.coo_matrix((np.asarray(vals, dtype=np.complex128),
                           (np.asarray(rows, dtype=np.int64),
                            np.asarray(cols, dtype=np.int64))), shape=(dim, dim))
        return cls(dim, m)

    @classmethod
    def zeros(cls, dim: int) -> "SparseOperator":
        return cls(dim, sp.csr_matrix((dim, dim), dtype=np.complex128))

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    @property
    def hermitian(self) -> bool:
        if self._hermitian is None:
            diff = self._csr - self._csr.conjugate().transpose()
            self._hermitian = (diff.nnz == 0 or
                               np.abs(diff.data).max() <= HERMITIAN_TOL)
        return self._hermitian

    def tocsr(self) -> sp.csr_matrix:
        return self._csr.copy()

    def tocsc(self) -> sp.csc_matrix:
        return self._csr.tocsc()

    def todense(self) -> np.ndarray:
        return self._csr.toarray()

    def triplets(self):
        """(row, col, value) arrays in row-major order."""
        coo = self._csr.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def export_text(self, path) -> None:
        """Write `dim nnz` header then one `row col re im` line per entry."""
        rows, cols, vals = self.triplets()
        with open(path, "w") as fh:
            fh.write(f"{self.dim} {len(vals)}\n")
            for r, c, v in zip(rows, cols, vals):
                fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")

    @classmethod
    def load_text(cls, path) -> "SparseOperator":
        with open(path) as fh:
            dim, nnz = map(int, fh.readline().split())
            rows, cols, vals = [], [], []
            for _ in range(nnz):
                r, c, re, im = fh.readline().split()
                rows.append(int(r))
                cols.append(int(c))
                vals.append(complex(float(re), float(im)))
        return cls.from_triplets(dim, rows, cols, vals)

    def max_abs_diff(self, other: "SparseOperator") -> float:
        diff = self._csr - other._csr
        return 0.0 if diff.nnz == 0 else float(np.abs(diff.data).max())
