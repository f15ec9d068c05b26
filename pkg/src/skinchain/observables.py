"""Figure-level observables: density profiles, imbalances, boundary ratios.

Steady states enter with L1 (probability) weights because the diagonal
sector carries the density-matrix diagonal; generic eigenstates enter
with L2-normalized amplitude-squared weights.  The mean imbalance
averages per-eigenstate imbalances over every state of a dense spectrum;
right-eigenvector amplitude-squared weighting is the default with
biorthogonal weighting available when left eigenvectors are supplied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import SectorBasis
from .params import ModelParams

RATIO_FLOOR = 1e-300
PROFILE_SUM_TOL = 1e-10


class ObservableError(Exception):
    """Undefined observable (zero filling, empty boundary site, ...)."""


@dataclass
class ObservableRecord:
    """One bundle of figure-level quantities with provenance labels."""

    params: ModelParams
    density_profile: np.ndarray
    imbalance: float
    mean_imbalance: Optional[float] = None
    ratio_LR: Optional[float] = None
    label: str = ""
    weighting: str = "probability"

    def __post_init__(self):
        total = float(np.sum(self.density_profile))
        if abs(total - self.params.M) > PROFILE_SUM_TOL:
            raise ValueError(f"profile sums to {total}, expected M={self.params.M}")
        if not -1.0 - 1e-12 <= self.imbalance <= 1.0 + 1e-12:
            raise ValueError(f"imbalance {self.imbalance} outside [-1, 1]")


def density_profile(state: np.ndarray, basis: SectorBasis,
                    mode: str = "probability") -> np.ndarray:
    """Site occupations <n_j> under probability or amplitude^2 weights."""
    state = np.asarray(state)
    if state.shape != (basis.dim,):
        raise ValueError(f"state has shape {state.shape}, basis dim {basis.dim}")
    if mode == "probability":
        w = state.real.astype(float)
    elif mode == "amplitude2":
        w = np.abs(state) ** 2
        total = w.sum()
        if total <= 0:
            raise ValueError("zero-norm state")
        w = w / total
    else:
        raise ValueError(f"unknown mode {mode!r}")
    profile = np.zeros(basis.L)
    for idx, c in enumerate(basis.configs):
        for j in range(basis.L):
            if (c >> j) & 1:
                profile[j] += w[idx]
    return profile


def imbalance(profile: np.ndarray) -> float:
    """(N_r - N_l)/(N_r + N_l); odd L drops the middle site (documented)."""
    profile = np.asarray(profile, dtype=float)
    L = len(profile)
    half = L // 2
    n_left = profile[:half].sum()
    n_right = profile[L - half:].sum()
    total = n_left + n_right
    if total <= 0:
        raise ObservableError("imbalance undefined at zero filling")
    return float((n_right - n_left) / total)


def boundary_ratio(profile: np.ndarray) -> float:
    """profile[L]/profile[1]; raises with the log-ratio when underflowing."""
    profile = np.asarray(profile, dtype=float)
    if profile[0] < RATIO_FLOOR:
        if profile[-1] < RATIO_FLOOR:
            raise ObservableError("both boundary occupations vanish")
        raise ObservableError(
            "left boundary occupation underflows; log-ratio = "
            f"{math.log(profile[-1]) - math.log(max(profile[0], 5e-324)):.6g}")
    return float(profile[-1] / profile[0])


def imbalance_deviation(params_gbc: ModelParams, params_obc: ModelParams,
                        dim_cap: Optional[int] = None) -> float:
    """Delta I = I_gbc - I_obc between the two steady states."""
    from .basis import build_sector
    from .liouvillian import build_effective_liouvillian
    from .spectra import steady_state

    if (params_gbc.L, params_gbc.M, params_gbc.J, params_gbc.phi) != \
            (params_obc.L, params_obc.M, params_obc.J, params_obc.phi):
        raise ValueError("Delta I compares equal (L, M, J, phi)")
    if params_gbc.delta_R != 0.0:
        raise ValueError("the left-boundary deviation uses delta_R = 0")
    values = []
    basis = build_sector(params_gbc.L, params_gbc.M)
    for p in (params_gbc, params_obc):
        op = build_effective_liouvillian(p, basis)
        ss = steady_state(op, basis)
        values.append(imbalance(density_profile(ss.probabilities, basis)))
    return values[0] - values[1]


def mean_imbalance(eigenvectors: np.ndarray, basis: SectorBasis,
                   left_eigenvectors: Optional[np.ndarray] = None) -> float:
    """Average per-eigenstate imbalance over all D sector eigenstates.

    Columns of `eigenvectors` are right eigenvectors; amplitude-squared
    weights by default, biorthogonal <L|n_j|R> weights when the matching
    left eigenvectors are given.
    """
    if eigenvectors.shape != (basis.dim, basis.dim):
        raise ValueError("mean imbalance needs the full dense eigenvector set")
    occ = np.zeros((basis.dim, basis.L))
    for idx, c in enumerate(basis.configs):
        for j in range(basis.L):
            occ[idx, j] = (c >> j) & 1
    total = 0.0
    for n in range(basis.dim):
        if left_eigenvectors is None:
            w = np.abs(eigenvectors[:, n]) ** 2
            w /= w.sum()
        else:
            lv, rv = left_eigenvectors[:, n], eigenvectors[:, n]
            w = (lv.conj() * rv) / np.vdot(lv, rv)
            w = w.real
        total += imbalance(w @ occ)
    return total / basis.dim


def steady_observables(params: ModelParams, label: str = "steady",
                       with_mean_imbalance: bool = False) -> ObservableRecord:
    """Steady-state record for one parameter point (profile, I, ratio)."""
    from .basis import build_sector
    from .liouvillian import build_effective_liouvillian
    from .spectra import dense_spectrum, steady_state

    basis = build_sector(params.L, params.M)
    op = build_effective_liouvillian(params, basis)
    ss = steady_state(op, basis)
    profile = density_profile(ss.probabilities, basis)
    mean_i = None
    if with_mean_imbalance:
        spec = dense_spectrum(op)
        mean_i = mean_imbalance(spec.right_vectors, basis)
    try:
        ratio = boundary_ratio(profile)
    except ObservableError:
        ratio = None
    return ObservableRecord(params=params, density_profile=profile,
                            imbalance=imbalance(profile),
                            mean_imbalance=mean_i, ratio_LR=ratio,
                            label=label, weighting="probability")
