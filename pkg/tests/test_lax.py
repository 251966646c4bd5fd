import numpy as np
import pytest

from botorus import (
    DimensionError,
    HardyVector,
    NearSingularError,
    RealPotential,
    TruncationError,
    build_matrix,
    eigen_decompose,
    generating_function_product,
    generating_function_resolvent,
    one_gap_potential,
    smooth_random_potential,
    spectrum,
)
from botorus.lax import converged_range, normalize_phases, resolvent_solve, write_spectrum_csv
from botorus.fourier import power_law_potential


def dense_lax(u, N):
    # entry formula evaluated one entry at a time
    L = np.zeros((N, N), dtype=complex)
    for j in range(N):
        for k in range(N):
            L[j, k] = (j if j == k else 0) - u.coeff(j - k)
    return L


class TestBuildMatrix:
    def test_zero(self):
        L = build_matrix(RealPotential.zero(1), 6)
        assert np.array_equal(L.entries, np.diag(np.arange(6.0)))

    def test_two_cosine_is_tridiagonal(self):
        L = build_matrix(RealPotential.cosine(2.0), 5).entries
        want = np.diag(np.arange(5.0)) - np.diag(np.ones(4), 1) - np.diag(np.ones(4), -1)
        assert np.array_equal(L, want)

    def test_constant_shift(self):
        L = build_matrix(RealPotential.constant(0.7), 4).entries
        assert np.allclose(L, np.diag(np.arange(4) - 0.7))

    def test_matches_entry_formula(self, rng):
        u = smooth_random_potential(rng, 5, mean=0.3)
        assert np.allclose(build_matrix(u, 12).entries, dense_lax(u, 12), atol=0)

    def test_exactly_hermitian(self, rng):
        L = build_matrix(smooth_random_potential(rng, 8), 40).entries
        assert np.array_equal(L, L.conj().T)

    def test_needs_room_for_potential(self):
        with pytest.raises(DimensionError):
            build_matrix(RealPotential.cosine(1.0, 5), 5)


class TestEigenDecompose:
    def test_zero_potential(self):
        S = eigen_decompose(build_matrix(RealPotential.zero(1), 10))
        assert np.array_equal(S.eigenvalues, np.arange(10.0))
        assert np.allclose(S.eigenvectors, np.eye(10))

    def test_one_gap(self):
        S = eigen_decompose(build_matrix(one_gap_potential(0.5, 60), 64))
        assert S.eigenvalues[0] == pytest.approx(-1 / 3, abs=1e-8)
        assert np.allclose(S.eigenvalues[1:11], np.arange(1, 11), atol=1e-8)

    def test_against_numpy_eigvalsh(self, rng):
        u = smooth_random_potential(rng, 6)
        S = eigen_decompose(build_matrix(u, 48))
        assert np.allclose(S.eigenvalues, np.linalg.eigvalsh(dense_lax(u, 48)), atol=1e-12)

    def test_truncation_convergence(self, rng):
        u = smooth_random_potential(rng, 4)
        a = eigen_decompose(build_matrix(u, 128)).eigenvalues[:21]
        b = eigen_decompose(build_matrix(u, 256)).eigenvalues[:21]
        assert np.max(np.abs(a - b)) < 1e-9


class TestPhases:
    def test_zero_potential_canonical(self):
        S = eigen_decompose(build_matrix(RealPotential.zero(1), 6))
        assert np.array_equal(np.diag(S.eigenvectors), np.ones(6))

    def test_shift_products_real_nonnegative(self, rng):
        S = eigen_decompose(build_matrix(smooth_random_potential(rng, 6), 64))
        V = S.eigenvectors
        shift = np.sum(V[1:, 1:] * np.conj(V[:-1, :-1]), axis=0)
        assert np.max(np.abs(shift.imag)) < 1e-12
        assert np.all(shift.real >= 0)
        assert S.inner_products[0].real > 0 and abs(S.inner_products[0].imag) < 1e-15

    def test_one_gap_inner_product(self):
        S = eigen_decompose(build_matrix(one_gap_potential(0.5, 60), 128))
        assert abs(S.inner_products[1]) ** 2 == pytest.approx(0.25, abs=1e-8)

    def test_idempotent(self, rng):
        S = eigen_decompose(build_matrix(smooth_random_potential(rng, 4), 32))
        assert np.allclose(normalize_phases(S).eigenvectors, S.eigenvectors, atol=1e-14)


class TestSpectrum:
    def test_converged_range_reported(self, rng):
        S = spectrum(smooth_random_potential(rng, 8), n_required=30)
        assert S.converged_range >= 30

    def test_rough_data_hits_cap(self):
        u = power_law_potential(400, -0.5, amplitude=3.0)
        with pytest.raises(TruncationError):
            spectrum(u, n_required=600, max_dim=1024)

    def test_converged_range_helper(self):
        a = np.array([0.0, 1.0, 2.0, 3.0])
        assert converged_range(a, a + [0, 0, 1e-6, 0]) == 1
        assert converged_range(a, a) == 3
        assert converged_range(a, a + 1) == -1

    def test_csv(self, tmp_path):
        S = spectrum(one_gap_potential(0.5, 60), n_required=4)
        text = write_spectrum_csv(tmp_path / "s.csv", S, 4).read_text().splitlines()
        assert text[0] == "n,lambda,gamma,kappa,re_inner,im_inner"
        assert len(text) == 6


class TestResolvent:
    def test_zero_constant_rhs(self):
        L = build_matrix(RealPotential.zero(1), 6)
        w = resolvent_solve(L, 2.0, HardyVector.constant(1.0, 6))
        assert np.allclose(w.coeffs, [0.5, 0, 0, 0, 0, 0])

    def test_zero_exponential_rhs(self):
        L = build_matrix(RealPotential.zero(1), 6)
        w = resolvent_solve(L, 1j, HardyVector.basis(1, 6))
        assert w.coeffs[1] == pytest.approx(1 / (1 + 1j))

    def test_near_singular(self):
        L = build_matrix(RealPotential.zero(1), 6)
        S = eigen_decompose(L)
        with pytest.raises(NearSingularError):
            resolvent_solve(L, -2.0, HardyVector.constant(1.0, 6), S)

    def test_one_gap_matches_product(self):
        u = one_gap_potential(0.5, 60)
        S = spectrum(u, n_required=4)
        assert generating_function_resolvent(u, 1.0) == pytest.approx(generating_function_product(S, 1.0), rel=1e-12)


class TestGeneratingFunction:
    def test_zero_potential(self):
        assert generating_function_resolvent(RealPotential.zero(1), 2.0) == pytest.approx(0.5, abs=1e-15)

    def test_one_gap_value(self):
        u = one_gap_potential(0.5, 60)
        assert generating_function_resolvent(u, 2.0) == pytest.approx(8 / 15, abs=1e-8)

    def test_conjugation_symmetry(self, rng):
        u = smooth_random_potential(rng, 6)
        S = spectrum(u, n_required=16)
        a = generating_function_resolvent(u, 1j)
        b = generating_function_product(S, -1j)
        assert np.conj(a) == pytest.approx(b, rel=1e-10)

    def test_against_dense_solve(self, rng):
        u = smooth_random_potential(rng, 5)
        N = 96
        e0 = np.zeros(N)
        e0[0] = 1
        want = np.linalg.solve(dense_lax(u, N) + 3 * np.eye(N), e0)[0]
        assert generating_function_resolvent(u, 3.0, N) == pytest.approx(want, rel=1e-13)
