"""Exactly solvable Liouvillian of a dissipative asymmetric spin chain.

Builds the non-Hermitian XXZ reduction of the chain's Liouvillian under
periodic, open, and generalized boundary conditions, solves its Bethe
ansatz equations, cross-checks against exact diagonalization, and
computes the skin-effect observables behind the reference figures.
"""

__version__ = "1.0.0"

from .basis import SectorBasis, build_sector
from .params import ModelParams
from .sparseop import SparseOperator

__all__ = ["ModelParams", "SectorBasis", "SparseOperator", "build_sector",
           "__version__"]
