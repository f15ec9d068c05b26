"""Bethe ansatz machinery: residual systems, solvers, wavefunctions."""

import math

import numpy as np
import pytest

from skinchain import bethe
from skinchain.basis import build_sector
from skinchain.liouvillian import build_effective_liouvillian
from skinchain.params import ModelParams
from skinchain.spectra import dense_spectrum


def test_pbc_m1_free_momenta_are_roots():
    params = ModelParams(L=6, M=1, phi=0.5, bc="PBC")
    for n in range(6):
        k = np.array([2 * math.pi * n / 6], dtype=complex)
        assert bethe.pbc_bae_residual(k, params).max() < 1e-12


def test_pbc_m1_energy_example():
    # L=4, k=pi/2, phi=0.5: E = 2[cos(pi/2 + 0.5i) - cosh 0.5]
    params = ModelParams(L=4, M=1, phi=0.5, bc="PBC")
    E = bethe.pbc_energy([math.pi / 2], params)
    assert E == pytest.approx(-2.2552519304127614 - 1.0421906109874948j, abs=1e-10)
    spec = dense_spectrum(build_effective_liouvillian(params, build_sector(4, 1)))
    assert np.abs(spec.eigenvalues - E).min() < 1e-12


def test_rapidity_roundtrip_in_strip():
    phi = 0.8
    rng = np.random.default_rng(11)
    k = (rng.uniform(-math.pi, math.pi, 50)
         + 1j * rng.uniform(-0.95 * phi, 0.95 * phi, 50))
    back = bethe.lambda_to_k(bethe.k_to_lambda(k, phi), phi)
    assert np.abs(back - k).max() < 1e-12


def test_rapidity_map_degenerate_at_phi_zero():
    with pytest.raises(ValueError):
        bethe.k_to_lambda(0.3, 0.0)


def test_log_form_residual_on_real_pairs():
    params = ModelParams(L=8, M=2, phi=0.7, bc="PBC")
    roots = bethe.solve_pbc_sector(params)
    real_pairs = [r for r in roots if np.abs(r.k.imag).max() < 1e-8]
    assert real_pairs, "expected real-momentum pairs in the sector"
    for r in real_pairs:
        assert bethe.pbc_bae_residual(r.k, params, mode="log").max() < 1e-8


def test_obc_solution_set_reflection_invariant():
    # the solution set of the reflection equations is invariant under
    # flipping the sign of any single momentum
    params = ModelParams(L=6, M=2, phi=0.6, bc="OBC")
    roots = bethe.solve_obc_sector(params)
    assert roots
    for r in roots[:4]:
        for j in range(2):
            flipped = r.k.copy()
            flipped[j] = -flipped[j]
            assert bethe.obc_bae_residual(flipped, params,
                                          form="poly").max() < 1e-8


def test_obc_boundary_root_exact_in_poly_form():
    params = ModelParams(L=7, M=1, phi=0.4, bc="OBC")
    k = np.array([1j * params.phi])
    assert bethe.obc_bae_residual(k, params, form="poly").max() < 1e-12


def test_obc_singular_reflection_point_rejected():
    params = ModelParams(L=6, M=1, phi=0.5, bc="OBC")
    with pytest.raises(ValueError):
        bethe.obc_bae_residual(np.array([0.0 + 0j]), params)


def test_kappa_closes_to_pbc():
    phi, J, L = 0.5, 1.0, 8
    k = np.array([0.3 + 0.1j, 1.1 - 0.4j])
    pbc = ModelParams(L=L, M=2, J=J, phi=phi, bc="PBC")
    for eps in (1e-3, 1e-6, 1e-9):
        gbc = ModelParams(L=L, M=2, J=J, phi=phi, bc="GBC",
                          delta_L=J * math.exp(-phi) - eps,
                          delta_R=J * math.exp(phi) - eps)
        gap = np.abs(bethe.gbc_system(k, gbc) - bethe.pbc_system(k, pbc)).max()
        assert gap < 20 * eps
    exact = ModelParams(L=L, M=2, J=J, phi=phi, bc="GBC",
                        delta_L=J * math.exp(-phi), delta_R=J * math.exp(phi))
    assert np.abs(bethe.gbc_kappa(k, exact) - 1.0).max() < 1e-14


def test_newton_solves_quadratic():
    k, res = bethe.newton_solve(lambda z: np.array([z[0] ** 2 + 1.0]),
                                [0.4 + 0.5j])
    assert res < 1e-10
    assert abs(k[0] - 1j) < 1e-8


def test_newton_raises_on_divergence():
    with pytest.raises(bethe.SolveError):
        bethe.newton_solve(lambda z: np.array([np.exp(z[0]) + z[0] ** 2 + 50.0]),
                           [40.0 + 0j], max_iter=10)


def test_phi_homotopy_keeps_residual_small():
    L = 8
    start = ModelParams(L=L, M=2, phi=1e-6, bc="PBC")
    k0 = bethe._pbc_log_continuation([1, 3], start)
    assert k0 is not None
    phis = np.linspace(1e-6, 1.0, 20)
    path = bethe.continue_in_phi(
        lambda ph: (lambda q: bethe.pbc_system(
            q, ModelParams(L=L, M=2, phi=ph, bc="PBC"))), k0, phis)
    assert len(path) == 20
    assert max(res for _, _, res in path) < bethe.ROOT_RESIDUAL_TOL


def test_energy_self_consistency():
    params = ModelParams(L=6, M=2, phi=0.7, bc="PBC")
    for r in bethe.solve_pbc_sector(params):
        assert abs(r.energy - bethe.pbc_energy(r.k, params)) < 1e-12


@pytest.mark.parametrize("bc", ["PBC", "OBC"])
def test_solver_roots_are_distinct_and_converged(bc):
    params = ModelParams(L=6, M=2, phi=0.6, bc=bc)
    roots = bethe.solve_sector(params)
    energies = [r.energy for r in roots]
    for i, a in enumerate(energies):
        assert r_ok(roots[i])
        for b in energies[i + 1:]:
            assert abs(a - b) > 1e-7


def r_ok(root):
    return root.residual < bethe.ROOT_RESIDUAL_TOL


def test_wavefunctions_are_eigenvectors():
    for bc, L, M in [("PBC", 7, 1), ("PBC", 6, 2), ("OBC", 7, 1), ("OBC", 6, 2)]:
        params = ModelParams(L=L, M=M, phi=0.6, bc=bc)
        basis = build_sector(L, M)
        op = build_effective_liouvillian(params, basis).tocsr()
        for r in bethe.solve_sector(params):
            v = bethe.bethe_wavefunction(r, basis, params)
            res = np.linalg.norm(op @ v - r.energy * v) / np.linalg.norm(v)
            assert res < 1e-9, (bc, L, M, r.k)


def test_pbc_m2_amplitude_ratio_contact_condition():
    # A21/A12 = -S(k1 + i phi, k2 + i phi)/S(k2 + i phi, k1 + i phi); the
    # shift by i phi enters because the ansatz carries bare plane waves
    # while the kernel acts on gauge-shifted momenta.
    params = ModelParams(L=6, M=2, phi=0.7, bc="PBC")
    roots = [r for r in bethe.solve_pbc_sector(params)
             if np.abs(r.k.imag).max() < 1e-8]
    for r in roots:
        kt = r.k + 1j * params.phi
        ratio = (-bethe.s_matrix(kt[0], kt[1], params.phi)
                 / bethe.s_matrix(kt[1], kt[0], params.phi))
        basis = build_sector(6, 2)
        v = bethe.bethe_wavefunction(r, basis, params)
        # extract the ratio from two independent configuration amplitudes
        # ((x1,x2) = (1,2) and (1,3)) by solving the 2x2 linear system
        e = lambda k1, k2, x1, x2: np.exp(1j * (k1 * x1 + k2 * x2))
        A = np.array([[e(r.k[0], r.k[1], 1, 2), e(r.k[1], r.k[0], 1, 2)],
                      [e(r.k[0], r.k[1], 1, 3), e(r.k[1], r.k[0], 1, 3)]])
        b = np.array([v[basis.index_of[0b11]], v[basis.index_of[0b101]]])
        a12, a21 = np.linalg.solve(A, b)
        assert abs(a21 / a12 - ratio) < 1e-10


def test_root_density_properties():
    phi = 0.9
    lam = np.linspace(-3.0, 3.0, 41)
    sigma = bethe.root_density(lam, phi)
    assert np.abs(sigma - sigma[::-1]).max() < 1e-12          # even
    assert np.abs(bethe.root_density(lam + 2 * math.pi / phi, phi)
                  - sigma).max() < 1e-10                      # periodic
    from scipy.integrate import quad
    val, _ = quad(lambda x: bethe.root_density(np.array([x]), phi)[0],
                  -math.pi / phi, math.pi / phi, limit=200)
    assert val == pytest.approx(math.pi / phi, rel=1e-10)     # mean 1/2


def test_critical_phi_series():
    assert bethe.critical_phi_residual(0.0) == 0.0
    # large phi limit: sum (-1)^m / m = -ln 2
    # alternating tail truncates at ~1/(2 m_max)
    assert bethe.critical_phi_residual(30.0, m_max=200_000) == pytest.approx(
        -math.log(2), abs=1e-5)
    with pytest.raises(ValueError):
        bethe.critical_phi_residual(-1.0)


def test_match_to_spectrum_reports_coverage():
    params = ModelParams(L=6, M=1, phi=0.5, bc="PBC")
    roots = bethe.solve_sector(params)
    spec = dense_spectrum(build_effective_liouvillian(params, build_sector(6, 1)),
                          want_vectors=False)
    rep = bethe.match_to_spectrum(roots, spec.eigenvalues)
    assert rep.coverage == 1.0
    assert len(rep.unmatched_dense) == 0
