"""Bethe ansatz machinery for the asymmetric XXZ generator.

Residual systems for all three boundary modes, a damped complex Newton
solver with finite-difference Jacobians, quantum-number seeded root
enumeration for M <= 2, rapidity/log-form utilities, the root-density
Fourier series, and explicit wavefunction reconstruction.

Momentum conventions: PBC quasimomenta live in [0, 2*pi) modulo 2*pi;
OBC momenta are reflection-symmetric (k ~ -k) and are canonicalized to
Re k > 0 (Im k > 0 on the imaginary axis).  The OBC boundary root
k = i*phi is an exact root of the cross-multiplied form of the boundary
factor and yields the zero-energy edge mode.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .basis import SectorBasis
from .params import ModelParams

ROOT_RESIDUAL_TOL = 1e-10
DISTINCT_TOL = 1e-8
# candidate roots must reproduce an exact eigenpair through the ansatz
# wavefunction; this rejects extraneous solutions of the cross-multiplied
# OBC form that accumulate near the singular reflection pair k = +-i phi
WAVEFUNCTION_VERIFY_TOL = 1e-9
MOPUP_TRIALS = 400


class SolveError(Exception):
    """Newton iteration failed or produced an unusable root."""


# ---------------------------------------------------------------------------
# scattering kernel, dispersion, rapidities
# ---------------------------------------------------------------------------

def s_matrix(kj, kl, phi: float):
    """Two-body kernel S(k_j, k_l) = 1 - 2 cosh(phi) e^{i k_l} + e^{i(k_j+k_l)}."""
    return 1.0 - 2.0 * math.cosh(phi) * np.exp(1j * kl) + np.exp(1j * (kj + kl))


def pbc_energy(k, params: ModelParams) -> complex:
    """E = 2J sum_j [cos(k_j + i phi) - cosh phi]; also used for GBC roots."""
    k = np.asarray(k, dtype=complex)
    return complex(2.0 * params.J * np.sum(np.cos(k + 1j * params.phi)
                                           - math.cosh(params.phi)))


def obc_energy(k, params: ModelParams) -> complex:
    """E = 2J sum_j [cos k_j - cosh phi]; real for the physical OBC roots."""
    k = np.asarray(k, dtype=complex)
    return complex(2.0 * params.J * np.sum(np.cos(k) - math.cosh(params.phi)))


def k_to_lambda(k, phi: float):
    """Rapidity of a quasimomentum: e^{i k - phi} = -sin(phi(l-i)/2)/sin(phi(l+i)/2).

    The +-i orientation is fixed so the logarithmic equations hold as
    written: on this branch theta_1(lambda(k)) = k + i phi for real k,
    which the free-magnon case L k = 2 pi I requires.
    """
    if phi == 0.0:
        raise ValueError("rapidity parametrization is degenerate at phi = 0")
    z = np.exp(1j * np.asarray(k, dtype=complex) - phi)
    ep, em = math.exp(phi / 2), math.exp(-phi / 2)
    w2 = (ep + z * em) / (z * ep + em)
    return 2j * np.log(np.sqrt(w2)) / phi


def lambda_to_k(lam, phi: float):
    """Inverse rapidity map on the principal branch, Re k in (-pi, pi]."""
    if phi == 0.0:
        raise ValueError("rapidity parametrization is degenerate at phi = 0")
    lam = np.asarray(lam, dtype=complex)
    z = -np.sin(phi * (lam - 1j) / 2) / np.sin(phi * (lam + 1j) / 2)
    return -1j * np.log(z) - 1j * phi


def theta_n(lam, phi: float, n: int):
    """Log-form scattering phase theta_n = 2 arctan[tan(phi l / 2) coth(n phi / 2)]."""
    return 2.0 * np.arctan(np.tan(phi * np.asarray(lam, dtype=complex) / 2)
                           / math.tanh(n * phi / 2))


# ---------------------------------------------------------------------------
# residual systems
# ---------------------------------------------------------------------------

def _pbc_scatter(k: np.ndarray, j: int, phi: float) -> complex:
    """(-1)^(M-1) times the product over l != j of the PBC kernel ratio."""
    M = len(k)
    cosh = math.cosh(phi)
    prod = 1.0 + 0j
    for l in range(M):
        if l == j:
            continue
        common = np.exp(1j * (k[j] + k[l]) - 2 * phi) + 1.0
        num = common - 2 * cosh * np.exp(1j * k[j] - phi)
        den = common - 2 * cosh * np.exp(1j * k[l] - phi)
        prod *= num / den
    return (-1) ** (M - 1) * prod


def pbc_system(k, params: ModelParams) -> np.ndarray:
    """Exponential-form PBC residual e^{i k_j L} - (-1)^(M-1) prod(...)."""
    k = np.asarray(k, dtype=complex)
    return np.array([np.exp(1j * k[j] * params.L) - _pbc_scatter(k, j, params.phi)
                     for j in range(len(k))])


def pbc_bae_residual(k, params: ModelParams, I: Optional[Sequence] = None,
                     mode: str = "exp") -> np.ndarray:
    """Per-root PBC residual magnitude in exponential or logarithmic form.

    The log form evaluates L*theta_1(l_j) - 2 pi I_j - i phi L
    - sum_l theta_2(l_j - l_l) on the principal branch; when quantum
    numbers are omitted the nearest half-integer set is used, so the
    value reports distance from the branch lattice.
    """
    k = np.asarray(k, dtype=complex)
    if mode == "exp":
        return np.abs(pbc_system(k, params))
    if mode != "log":
        raise ValueError(f"unknown mode {mode!r}")
    phi, L = params.phi, params.L
    lam = k_to_lambda(k, phi)
    out = np.zeros(len(k))
    for j in range(len(k)):
        val = L * theta_n(lam[j], phi, 1) - 1j * phi * L
        for l in range(len(k)):
            if l != j:
                val -= theta_n(lam[j] - lam[l], phi, 2)
        if I is not None:
            val -= 2 * math.pi * I[j]
        else:
            val -= 2 * math.pi * np.round(val.real / (2 * math.pi) * 2) / 2
        out[j] = abs(val)
    return out


def _obc_boundary_polynomials(k, phi: float):
    """Numerator/denominator of the OBC boundary factor, as polynomials in e^{ik}."""
    z, zi = np.exp(1j * k), np.exp(-1j * k)
    ep, em = math.exp(phi), math.exp(-phi)
    return (z - ep) * (z - em), (zi - ep) * (zi - em)


def obc_system(k, params: ModelParams) -> np.ndarray:
    """Cross-multiplied OBC residual; regular at the boundary root k = i phi."""
    k = np.asarray(k, dtype=complex)
    phi, L, M = params.phi, params.L, len(k)
    F = np.zeros(M, dtype=complex)
    for j in range(M):
        Nb, Db = _obc_boundary_polynomials(k[j], phi)
        lhs = np.exp(2j * (L - 1) * k[j]) * Nb
        rhs = Db
        for l in range(M):
            if l == j:
                continue
            lhs *= s_matrix(k[j], k[l], phi) * s_matrix(k[l], -k[j], phi)
            rhs *= s_matrix(-k[j], k[l], phi) * s_matrix(k[l], k[j], phi)
        F[j] = lhs - rhs
    return F


def obc_bae_residual(k, params: ModelParams, form: str = "ratio") -> np.ndarray:
    """Per-root OBC residual magnitude.

    form="ratio" evaluates the equation as printed (boundary factor times
    plane-wave phase minus the scattering product); form="poly" is the
    cross-multiplied variant that stays finite where numerator and
    denominator vanish together.
    """
    k = np.asarray(k, dtype=complex)
    for q in k:
        if min(abs(q), abs(q - math.pi), abs(q + math.pi)) < 1e-12:
            raise ValueError(f"momentum {q} is a singular reflection point")
    if form == "poly":
        return np.abs(obc_system(k, params))
    if form != "ratio":
        raise ValueError(f"unknown form {form!r}")
    phi, L, M = params.phi, params.L, len(k)
    out = np.zeros(M)
    for j in range(M):
        Nb, Db = _obc_boundary_polynomials(k[j], phi)
        lhs = np.exp(2j * (L - 1) * k[j]) * Nb / Db
        rhs = 1.0 + 0j
        for l in range(M):
            if l == j:
                continue
            rhs *= (s_matrix(-k[j], k[l], phi) * s_matrix(k[l], k[j], phi)
                    / (s_matrix(k[j], k[l], phi) * s_matrix(k[l], -k[j], phi)))
        out[j] = abs(lhs - rhs)
    return out


def gbc_kappa(k, params: ModelParams):
    """Boundary correction factor of the PBC-like GBC equations."""
    if params.delta_R <= 0:
        raise ValueError("kappa requires delta_R > 0 (use the OBC solver otherwise)")
    return 1.0 - ((params.J_L - params.delta_L)
                  * (params.J_R / params.delta_R) ** (1.0 / params.L)
                  * np.exp(1j * np.asarray(k, dtype=complex)) / params.J_R)


def gbc_system(k, params: ModelParams) -> np.ndarray:
    """GBC residual e^{i k_j L} - (-1)^(M-1) kappa(k_j) prod(...)."""
    k = np.asarray(k, dtype=complex)
    kappa = gbc_kappa(k, params)
    return np.array([np.exp(1j * k[j] * params.L)
                     - kappa[j] * _pbc_scatter(k, j, params.phi)
                     for j in range(len(k))])


def gbc_bae_residual(k, params: ModelParams) -> np.ndarray:
    return np.abs(gbc_system(k, params))


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

@dataclass
class BetheRoots:
    """One accepted solution of a Bethe system."""

    bc: str
    k: np.ndarray
    energy: complex
    residual: float
    quantum_numbers: Optional[tuple] = None
    rapidities: Optional[np.ndarray] = None
    reflection_signs: Optional[tuple] = None

    @property
    def M(self) -> int:
        return len(self.k)


def newton_solve(system_fn: Callable[[np.ndarray], np.ndarray],
                 initial: Sequence, max_iter: int = 200,
                 tol: float = ROOT_RESIDUAL_TOL, fd_step: float = 1e-7,
                 max_step: float = 30.0) -> tuple[np.ndarray, float]:
    """Complex Newton iteration with central-difference Jacobian.

    Returns (roots, residual); raises SolveError on divergence,
    non-convergence, or a momentum collision in the converged root.
    """
    k = np.asarray(initial, dtype=complex).copy()
    M = len(k)
    residual = np.inf
    for _ in range(max_iter):
        f = system_fn(k)
        residual = float(np.abs(f).max())
        if residual < tol:
            break
        jac = np.zeros((M, M), dtype=complex)
        for m in range(M):
            e = np.zeros(M, dtype=complex)
            e[m] = fd_step
            jac[:, m] = (system_fn(k + e) - system_fn(k - e)) / (2 * fd_step)
        try:
            dk = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError as exc:
            raise SolveError(f"singular Jacobian at k={k}") from exc
        if np.abs(dk).max() > max_step:
            raise SolveError(f"Newton step diverged at k={k}")
        k = k + dk
    else:
        raise SolveError(f"no convergence after {max_iter} iterations, residual {residual:.2e}")
    for a, b in itertools.combinations(range(M), 2):
        if abs(k[a] - k[b]) < DISTINCT_TOL:
            raise SolveError(f"coincident momenta k[{a}] ~ k[{b}] ~ {k[a]}")
    return k, residual


def continue_in_phi(system_factory: Callable[[float], Callable],
                    k_start: Sequence, phi_values: Sequence[float],
                    tol: float = ROOT_RESIDUAL_TOL):
    """Track one root along a path in phi; returns [(phi, k, residual)]."""
    k = np.asarray(k_start, dtype=complex)
    path = []
    for phi in phi_values:
        k, res = newton_solve(system_factory(phi), k, tol=tol)
        path.append((phi, k.copy(), res))
    return path


# ---------------------------------------------------------------------------
# root enumeration (M <= 2)
# ---------------------------------------------------------------------------

def _canonical_pbc(k: np.ndarray) -> np.ndarray:
    two_pi = 2 * math.pi
    k = k.copy()
    k.real %= two_pi
    return k


def _canonical_obc(k: np.ndarray) -> np.ndarray:
    two_pi = 2 * math.pi
    out = []
    for q in k:
        re = (q.real + math.pi) % two_pi - math.pi
        q = re + 1j * q.imag
        if q.real < -1e-10 or (abs(q.real) <= 1e-10 and q.imag < 0):
            q = -q
        out.append(q)
    return np.array(out)


def _dedupe_push(accepted: list, roots: BetheRoots, energy_tol: float = 1e-7) -> bool:
    for other in accepted:
        if abs(other.energy - roots.energy) < energy_tol:
            return False
    accepted.append(roots)
    return True


def _pbc_log_continuation(ns, params: ModelParams, steps: int = 40,
                          inner: int = 80) -> Optional[np.ndarray]:
    """Turn on the scattering term gradually in the log form of the BAE.

    The free-magnon momenta 2 pi (n_j + (M-1)/2) / L anchor the branch;
    the scattering phase is unwrapped continuously as its strength s goes
    0 -> 1, which reaches the real-pair solutions Newton alone misses.
    """
    M = len(ns)
    ns = np.asarray(ns, dtype=float)
    base = 2 * math.pi * (ns + (M - 1) / 2)
    k = (base / params.L).astype(complex)
    theta_prev = np.zeros(M)
    theta = np.zeros(M, dtype=complex)
    for s in np.linspace(0.0, 1.0, steps + 1)[1:]:
        for _ in range(inner):
            theta = np.zeros(M, dtype=complex)
            for j in range(M):
                ratio = _pbc_scatter(k, j, params.phi) * (-1) ** (M - 1)
                lg = -1j * np.log(ratio)
                re = lg.real + 2 * math.pi * np.round((theta_prev[j] - lg.real) / (2 * math.pi))
                theta[j] = re + 1j * lg.imag
            k_new = (base + s * theta) / params.L
            if np.abs(k_new - k).max() < 1e-14:
                k = k_new
                break
            k = 0.5 * k + 0.5 * k_new
        theta_prev = theta.real.copy()
    try:
        k, _ = newton_solve(lambda q: pbc_system(q, params), k)
    except SolveError:
        return None
    return k


def _eigenpair_residual(roots: BetheRoots, params: ModelParams) -> float:
    """Relative residual of the ansatz wavefunction as an eigenpair."""
    from .basis import build_sector
    from .liouvillian import build_effective_liouvillian

    basis = build_sector(params.L, params.M)
    op = build_effective_liouvillian(params, basis).tocsr()
    v = bethe_wavefunction(roots, basis, params)
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or norm < 1e-300:
        return math.inf
    return float(np.linalg.norm(op @ v - roots.energy * v) / norm)


def solve_pbc_sector(params: ModelParams) -> list[BetheRoots]:
    """All reachable PBC Bethe states for M <= 2.

    M = 1 momenta are exact, k = 2 pi n / L.  M = 2 combines log-form
    continuation over quantum-number pairs, a one-dimensional string
    search at fixed total momentum, and a deterministic random mop-up;
    every candidate must reproduce an exact eigenpair through its
    wavefunction.  The singular zero-momentum steady state (coincident
    momenta) is not a regular Bethe state and is never reported.
    """
    L, M, phi = params.L, params.M, params.phi
    if M == 1:
        out = []
        for n in range(L):
            k = np.array([2 * math.pi * n / L], dtype=complex)
            res = float(np.abs(pbc_system(k, params)).max())
            out.append(BetheRoots(bc="PBC", k=k, energy=pbc_energy(k, params),
                                  residual=res, quantum_numbers=(n,),
                                  rapidities=k_to_lambda(k, phi) if phi != 0 else None))
        return out
    if M != 2:
        raise ValueError("root enumeration implemented for M <= 2")

    accepted: list[BetheRoots] = []

    def push(k, qn):
        k = _canonical_pbc(k)
        if abs(k[0] - k[1]) < DISTINCT_TOL:
            return
        res = float(np.abs(pbc_system(k, params)).max())
        if res > ROOT_RESIDUAL_TOL:
            return
        roots = BetheRoots(bc="PBC", k=k, energy=pbc_energy(k, params),
                           residual=res, quantum_numbers=qn,
                           rapidities=k_to_lambda(k, phi) if phi != 0 else None)
        if any(abs(other.energy - roots.energy) < 1e-7 for other in accepted):
            return
        if _eigenpair_residual(roots, params) > WAVEFUNCTION_VERIFY_TOL:
            return
        accepted.append(roots)

    for n1 in range(L):
        for n2 in range(n1 + 1, L):
            k = _pbc_log_continuation([n1, n2], params)
            if k is not None:
                push(k, (n1, n2))

    # string (bound-state) search: total momentum is conserved, so reduce
    # to one complex unknown u with k = (K/2 + u, K/2 - u).
    for n_tot in range(2 * L):
        K = math.pi * n_tot / L

        def g(u):
            kk = np.array([K / 2 + u[0], K / 2 - u[0]])
            return pbc_system(kk, params)[:1]
        for x in np.linspace(0.0, math.pi, 7):
            for y in (0.25, 0.5, 0.8, 1.2, 1.8):
                try:
                    u, _ = newton_solve(g, [x + 1j * y], max_iter=120)
                except SolveError:
                    continue
                kk = np.array([K / 2 + u[0], K / 2 - u[0]])
                push(kk, None)

    rng = np.random.default_rng(20230814)
    for _ in range(MOPUP_TRIALS):
        seed = (rng.uniform(0, 2 * math.pi, 2)
                + 1j * rng.uniform(-1.8, 1.8, 2))
        try:
            k, _ = newton_solve(lambda q: pbc_system(q, params), seed, max_iter=80)
        except SolveError:
            continue
        push(k, None)
    return accepted


def _obc_seed_pool(params: ModelParams) -> list[np.ndarray]:
    L, M, phi = params.L, params.M, params.phi
    grid = [math.pi * n / L for n in range(1, L)]
    grid_shift = [math.pi * (n + 0.5) / L for n in range(1, L)]
    boundary = 1j * phi
    seeds = []
    if M == 1:
        seeds = [np.array([g], dtype=complex) for g in grid + grid_shift]
        seeds.append(np.array([boundary], dtype=complex))
        return seeds
    for g1, g2 in itertools.combinations(grid + grid_shift, 2):
        seeds.append(np.array([g1, g2], dtype=complex))
    for g in grid:
        seeds.append(np.array([boundary, g], dtype=complex))
    for x in np.linspace(0.2, math.pi - 0.2, 9):
        for y in (0.3, 0.6, 0.9, 1.2, 1.5):
            seeds.append(np.array([x + 1j * y, x - 1j * y]))
    return seeds


def solve_obc_sector(params: ModelParams) -> list[BetheRoots]:
    """All reachable OBC Bethe states for M <= 2 (poly-form Newton).

    The cross-multiplied form admits extraneous solutions near the
    singular reflection pair k = +-i phi; candidates are therefore
    verified as exact eigenpairs through the ansatz wavefunction.
    """
    if params.M > 2:
        raise ValueError("root enumeration implemented for M <= 2")
    accepted: list[BetheRoots] = []

    def push(k, res):
        k = _canonical_obc(k)
        if len(k) == 2 and (abs(k[0] - k[1]) < DISTINCT_TOL
                            or abs(k[0] + k[1]) < DISTINCT_TOL):
            return
        if any(abs(q) < 1e-8
               or (abs(abs(q.real) - math.pi) < 1e-8 and abs(q.imag) < 1e-8)
               for q in k):
            return  # excluded reflection-singular momenta
        roots = BetheRoots(bc="OBC", k=k, energy=obc_energy(k, params),
                           residual=res, reflection_signs=tuple([1] * len(k)))
        if any(abs(other.energy - roots.energy) < 1e-7 for other in accepted):
            return
        if _eigenpair_residual(roots, params) > WAVEFUNCTION_VERIFY_TOL:
            return
        accepted.append(roots)

    for seed in _obc_seed_pool(params):
        try:
            k, res = newton_solve(lambda q: obc_system(q, params), seed)
        except SolveError:
            continue
        push(k, res)

    if params.M == 2:
        rng = np.random.default_rng(20230815)
        for _ in range(MOPUP_TRIALS):
            seed = (rng.uniform(-math.pi, math.pi, 2)
                    + 1j * rng.uniform(-1.5, 1.5, 2))
            try:
                k, res = newton_solve(lambda q: obc_system(q, params),
                                      seed, max_iter=80)
            except SolveError:
                continue
            push(k, res)
    return accepted


def solve_gbc_sector(params: ModelParams) -> list[BetheRoots]:
    """GBC roots from the PBC-like kappa-corrected equations, M <= 2."""
    if params.delta_R <= 0:
        raise ValueError("GBC solver needs delta_R > 0; delta_R = 0 is OBC-like")
    L, M = params.L, params.M
    accepted: list[BetheRoots] = []

    def push(k, qn):
        k = _canonical_pbc(k)
        if M == 2 and abs(k[0] - k[1]) < DISTINCT_TOL:
            return
        res = float(np.abs(gbc_system(k, params)).max())
        if res > ROOT_RESIDUAL_TOL:
            return
        _dedupe_push(accepted, BetheRoots(bc="GBC", k=k, energy=pbc_energy(k, params),
                                          residual=res, quantum_numbers=qn))

    if M == 1:
        for n in range(L):
            try:
                k, _ = newton_solve(lambda q: gbc_system(q, params),
                                    [2 * math.pi * n / L])
            except SolveError:
                continue
            push(k, (n,))
        return accepted
    if M != 2:
        raise ValueError("root enumeration implemented for M <= 2")
    for n1 in range(L):
        for n2 in range(n1 + 1, L):
            try:
                k, _ = newton_solve(lambda q: gbc_system(q, params),
                                    [2 * math.pi * n1 / L, 2 * math.pi * n2 / L])
            except SolveError:
                continue
            push(k, (n1, n2))
    return accepted


def solve_sector(params: ModelParams) -> list[BetheRoots]:
    if params.bc == "PBC":
        return solve_pbc_sector(params)
    if params.bc == "OBC":
        return solve_obc_sector(params)
    return solve_gbc_sector(params)


@dataclass
class CoverageReport:
    """Optimal (Hungarian) matching of Bethe energies against a dense spectrum."""

    matched: list  # (root index, dense index, |error|)
    unmatched_dense: np.ndarray
    coverage: float


def match_to_spectrum(roots: Sequence[BetheRoots], eigenvalues: np.ndarray,
                      tol: float = 1e-8) -> CoverageReport:
    ev = np.asarray(eigenvalues)
    matched = []
    used = set()
    if roots and len(ev):
        energies = np.array([r.energy for r in roots])
        cost = np.abs(energies[:, None] - ev[None, :])
        ri_idx, ci_idx = linear_sum_assignment(cost)
        for ri, ci in zip(ri_idx, ci_idx):
            if cost[ri, ci] < tol:
                matched.append((int(ri), int(ci), float(cost[ri, ci])))
                used.add(int(ci))
    unmatched = np.array([ev[i] for i in range(len(ev)) if i not in used])
    return CoverageReport(matched=matched, unmatched_dense=unmatched,
                          coverage=len(matched) / len(ev))


# ---------------------------------------------------------------------------
# series of Appendix A: root density and the critical-phi condition
# ---------------------------------------------------------------------------

def root_density(lam, phi: float, m_max: int = 200):
    """Truncated Fourier series sum_m e^{-i m phi lam} / (2 cosh(m phi))."""
    if phi <= 0:
        raise ValueError("root density defined for phi > 0")
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    lam = np.asarray(lam, dtype=float)
    out = np.full_like(lam, 0.5, dtype=float)
    for m in range(1, m_max + 1):
        out += np.cos(m * phi * lam) / math.cosh(m * phi)
    return out if out.shape else float(out)


def critical_phi_residual(phi: float, m_max: int = 200) -> float:
    """g(phi) = sum_{m>=1} (-1)^m tanh(m phi) / m; phi_c solves g = 0."""
    if phi < 0:
        raise ValueError("phi must be >= 0")
    total = 0.0
    for m in range(1, m_max + 1):
        total += (-1) ** m * math.tanh(m * phi) / m
    return total


# ---------------------------------------------------------------------------
# wavefunction reconstruction (M <= 2)
# ---------------------------------------------------------------------------

def _left_reflection_factor(q, phi: float):
    """Amplitude ratio A(-q)/A(q) at the left edge of the gauged chain.

    Returns None at boundary momenta q = i phi where the ratio diverges.
    """
    den = 1 - np.exp(-1j * q - phi)
    if abs(den) < 1e-12:
        return None
    return -(1 - np.exp(1j * q - phi)) / den


def _config_positions(basis: SectorBasis):
    for idx, c in enumerate(basis.configs):
        yield idx, [j + 1 for j in range(basis.L) if (c >> j) & 1]


def _obc_m2_amplitudes(k: np.ndarray, phi: float) -> Optional[dict]:
    """Generate the 8 reflection-superposition amplitudes by relation chasing.

    Keys are signed-momentum tuples (q1, q2) for the ordered coordinates;
    returns None when a relation hits a vanishing denominator (boundary
    strings), in which case the caller falls back to a subspace solve.
    """
    eps = 1e-12
    amps = {(0, 1, 1, 1): 1.0 + 0j}

    def qs(key):
        p1, p2, r1, r2 = key
        return r1 * k[p1], r2 * k[p2]

    frontier = [(0, 1, 1, 1)]
    while frontier:
        nxt = []
        for key in frontier:
            p1, p2, r1, r2 = key
            q1, q2 = qs(key)
            den = s_matrix(q2, q1, phi)
            if abs(den) < eps:
                return None
            cand = [((p2, p1, r2, r1), amps[key] * (-s_matrix(q1, q2, phi) / den))]
            refl = _left_reflection_factor(q1, phi)
            if refl is None:
                return None
            cand.append(((p1, p2, -r1, r2), amps[key] * refl))
            for nk, val in cand:
                if nk not in amps:
                    amps[nk] = val
                    nxt.append(nk)
        frontier = nxt
    return {qs(key): v for key, v in amps.items()}


def _obc_m2_subspace(k: np.ndarray, energy: complex, basis: SectorBasis,
                     params: ModelParams) -> np.ndarray:
    """Null vector of (L_obc - E) inside the 8-function ansatz span.

    Used for boundary-string roots where the relation chain is singular;
    still a pure-ansatz construction: only the span of the reflection
    superposition enters.
    """
    from .liouvillian import build_effective_liouvillian

    phi = params.phi
    tuples = [(r1 * k[p[0]], r2 * k[p[1]])
              for p in ((0, 1), (1, 0)) for r1 in (1, -1) for r2 in (1, -1)]
    V = np.zeros((basis.dim, len(tuples)), dtype=complex)
    for idx, (x1, x2) in _config_positions(basis):
        w = math.exp(phi * (x1 + x2))
        for col, (q1, q2) in enumerate(tuples):
            V[idx, col] = w * np.exp(1j * (q1 * x1 + q2 * x2))
    op = build_effective_liouvillian(params, basis).tocsr()
    A = op @ V - energy * V
    _, _, vh = np.linalg.svd(A, full_matrices=False)
    coeff = vh[-1].conj()
    return V @ coeff


def bethe_wavefunction(roots: BetheRoots, basis: SectorBasis,
                       params: ModelParams) -> np.ndarray:
    """Dense eigenvector from the ansatz for M <= 2, PBC or OBC."""
    if roots.M > 2:
        raise ValueError("wavefunction construction implemented for M <= 2")
    if roots.bc != params.bc or roots.bc not in ("PBC", "OBC"):
        raise ValueError(f"unsupported or mismatched boundary mode {roots.bc!r}")
    k = roots.k
    phi = params.phi
    v = np.zeros(basis.dim, dtype=complex)

    if roots.bc == "PBC":
        if roots.M == 1:
            for idx, (x,) in _config_positions(basis):
                v[idx] = np.exp(1j * k[0] * x)
            return v
        kt = k + 1j * phi
        a12 = s_matrix(kt[1], kt[0], phi)
        a21 = -s_matrix(kt[0], kt[1], phi)
        for idx, (x1, x2) in _config_positions(basis):
            v[idx] = (a12 * np.exp(1j * (k[0] * x1 + k[1] * x2))
                      + a21 * np.exp(1j * (k[1] * x1 + k[0] * x2)))
        return v

    if roots.M == 1:
        # unnormalized reflection pair avoids the singular ratio at k = i phi
        ap = 1 - np.exp(-1j * k[0] - phi)
        am = -(1 - np.exp(1j * k[0] - phi))
        for idx, (x,) in _config_positions(basis):
            v[idx] = math.exp(phi * x) * (ap * np.exp(1j * k[0] * x)
                                          + am * np.exp(-1j * k[0] * x))
        return v

    amps = _obc_m2_amplitudes(k, phi)
    if amps is None:
        return _obc_m2_subspace(k, roots.energy, basis, params)
    for idx, (x1, x2) in _config_positions(basis):
        total = 0j
        for (q1, q2), a in amps.items():
            total += a * np.exp(1j * (q1 * x1 + q2 * x2))
        v[idx] = math.exp(phi * (x1 + x2)) * total
    return v
