"""Model parameterization for the dissipative asymmetric-hopping spin chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


BOUNDARY_MODES = ("PBC", "OBC", "GBC")


@dataclass(frozen=True)
class ModelParams:
    """One chain instance.

    The left/right hopping rates are always derived from (J, phi):
    J_L = J*exp(-phi), J_R = J*exp(phi), so that J_L*J_R = J**2 holds to
    machine precision.  phi > 0 means right hopping dominates.

    Boundary couplings delta_L (counter-flow, hop 1 -> L) and delta_R
    (co-flow, hop L -> 1) only act in GBC mode; PBC ignores them and OBC
    requires both to be zero.
    """

    L: int
    M: int
    J: float = 1.0
    phi: float = 0.0
    delta_L: float = 0.0
    delta_R: float = 0.0
    bc: str = "PBC"
    J_prime: float = 0.0
    h: float = 0.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"L must be >= 2, got {self.L}")
        if not 0 <= self.M <= self.L:
            raise ValueError(f"M must satisfy 0 <= M <= L, got M={self.M}, L={self.L}")
        if self.J <= 0:
            raise ValueError(f"J must be positive, got {self.J}")
        if self.bc not in BOUNDARY_MODES:
            raise ValueError(f"bc must be one of {BOUNDARY_MODES}, got {self.bc!r}")
        if self.bc == "OBC" and (self.delta_L != 0.0 or self.delta_R != 0.0):
            raise ValueError("OBC requires delta_L = delta_R = 0")
        if self.delta_L < 0 or self.delta_R < 0:
            raise ValueError("boundary couplings must be nonnegative")

    @property
    def J_L(self) -> float:
        return self.J * math.exp(-self.phi)

    @property
    def J_R(self) -> float:
        return self.J * math.exp(self.phi)

    def with_bc(self, bc: str, delta_L: float = 0.0, delta_R: float = 0.0) -> "ModelParams":
        """Same bulk parameters under a different boundary mode."""
        return ModelParams(L=self.L, M=self.M, J=self.J, phi=self.phi,
                           delta_L=delta_L, delta_R=delta_R, bc=bc,
                           J_prime=self.J_prime, h=self.h)
