"""Fixed-magnetization configuration bases and bitwise hop arithmetic.

Occupation words use bit j-1 for site j (site 1 = least significant bit);
a set bit is an up spin / hard-core particle.  Sites are 1-based in the
public API.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional

MAX_SITES = 28
DEFAULT_DIM_CAP = 5_000_000


class CapacityError(Exception):
    """Requested sector exceeds the configured size limits."""


@dataclass(frozen=True)
class SectorBasis:
    L: int
    M: int
    configs: tuple  # ascending occupation words, exactly M bits set
    index_of: dict = field(repr=False)  # word -> ordinal

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def dim(self) -> int:
        return len(self.configs)


def build_sector(L: int, M: int, dim_cap: int = DEFAULT_DIM_CAP) -> SectorBasis:
    """Enumerate all C(L, M) occupation words in ascending integer order."""
    if not 0 <= M <= L:
        raise ValueError(f"need 0 <= M <= L, got L={L}, M={M}")
    if L > MAX_SITES:
        raise CapacityError(f"L={L} exceeds hard cap {MAX_SITES}")
    dim = comb(L, M)
    if dim > dim_cap:
        raise CapacityError(f"sector dimension {dim} exceeds cap {dim_cap}")

    configs = []
    if M == 0:
        configs.append(0)
    else:
        # Gosper's hack: next integer with the same popcount.
        c = (1 << M) - 1
        top = 1 << L
        while c < top:
            configs.append(c)
            lo = c & -c
            ripple = c + lo
            c = ripple | (((c ^ ripple) >> 2) // lo)
    configs = tuple(configs)
    index_of = {w: i for i, w in enumerate(configs)}
    return SectorBasis(L=L, M=M, configs=configs, index_of=index_of)


def apply_hop(config: int, frm: int, to: int) -> Optional[int]:
    """Move the particle on site `frm` to site `to` (1-based).

    Returns None when the hop is blocked: source empty or target occupied
    (hard-core constraint).
    """
    src = 1 << (frm - 1)
    dst = 1 << (to - 1)
    if not config & src or config & dst:
        return None
    return (config & ~src) | dst


def occupations(config: int, L: int):
    """Occupation numbers n_1..n_L of a word as a list of 0/1."""
    return [(config >> j) & 1 for j in range(L)]


def site_weight(config: int, L: int) -> int:
    """Sum of 1-based occupied site indices; the imaginary-gauge exponent."""
    return sum(j + 1 for j in range(L) if (config >> j) & 1)
