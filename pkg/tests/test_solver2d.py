import numpy as np
import pytest

import oracles
from conftest import random_signal
from ptychodirect.core import make_shift_set
from ptychodirect.forward import simulate_1d, simulate_2d
from ptychodirect.solver1d import build_gram, pair_mask, solve_tight
from ptychodirect.solver2d import (
    build_gram_2d,
    expand_to_band_2d,
    measure_lifted_2d,
    reconstruct_2d,
    solve_pattern_2d,
    solve_tight_2d,
    tight_band_2d,
)
from ptychodirect.windows import Window2D, custom_window, exponential_window, gaussian_window


def complex_window(rng, N, s):
    return custom_window(np.r_[rng.normal(size=s) + 1j * rng.normal(size=s) + 2, np.zeros(N - s)])


class TestGram2D:
    def test_kronecker_matches_brute_force(self, rng):
        N, s, K = 6, 2, 1
        u, v = complex_window(rng, N, s), complex_window(rng, N, s)
        sh = make_shift_set(N, s, 1, "circulant")
        gu, gv = build_gram_2d(Window2D(u, v), (sh, sh), K)
        frames = oracles.frames_2d(u.coeffs, v.coeffs, sh.offsets, sh.offsets, K)
        G = oracles.gram_brute([fr.ravel().tolist() for fr in frames])
        np.testing.assert_allclose(np.kron(gu.G, gv.G), G, rtol=1e-12, atol=1e-14)

    def test_equal_factors_give_equal_grams(self):
        u = gaussian_window(12, 4, 0.99)
        sh = make_shift_set(12, 4, 2)
        gu, gv = build_gram_2d(Window2D(u, u), (sh, sh), 3)
        np.testing.assert_array_equal(gu.G, gv.G)

    def test_diagonal(self, rng):
        u, v = complex_window(rng, 8, 3), complex_window(rng, 8, 3)
        sh = make_shift_set(8, 3, 1)
        gu, gv = build_gram_2d(Window2D(u, v), (sh, sh), 2)
        np.testing.assert_allclose(np.kron(np.diag(gu.G), np.diag(gv.G)), u.norm**4 * v.norm**4, rtol=1e-13)

    def test_mismatch(self):
        u = gaussian_window(12, 4, 0.99)
        with pytest.raises(ValueError):
            build_gram_2d(Window2D(u, u), (make_shift_set(12, 3), make_shift_set(12, 4)), 3)


class TestTight2D:
    def test_zero(self):
        u = exponential_window(8, 2)
        sh = make_shift_set(8, 2, 1, "circulant")
        gu, gv = build_gram_2d(Window2D(u, u), (sh, sh), 2)
        assert not np.any(solve_tight_2d(gu, gv, np.zeros(gu.D * gv.D)))

    def test_separable_data(self, rng):
        u = gaussian_window(10, 3, 0.9)
        sh = make_shift_set(10, 3, 1, "circulant")
        gu, gv = build_gram_2d(Window2D(u, u), (sh, sh), 3)
        y1 = simulate_1d(random_signal(rng, 10), u, sh, 3).values
        y2 = rng.uniform(size=gv.D)
        C = solve_tight_2d(gu, gv, np.outer(y1, y2).ravel())
        c1 = solve_tight(build_gram(u, sh, 3), y1)
        c2 = build_gram(u, sh, 3, sign=-1).solve(y2)
        np.testing.assert_allclose(C, np.outer(c1, c2), rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("kappa,mode", [(1, "circulant"), (2, "interior")])
    def test_matches_materialized_dense_solve(self, rng, kappa, mode):
        N, s, K = 8, 2, 2
        u, v = gaussian_window(N, s, 0.9), exponential_window(N, s)
        sh = make_shift_set(N, s, kappa, mode)
        W = Window2D(u, v)
        F = random_signal(rng, (N, N))
        Y = simulate_2d(F, W, (sh, sh), K)
        Z = tight_band_2d(*build_gram_2d(W, (sh, sh), K), Y).to_dense()
        X = oracles.dense_tight_solve(oracles.frames_2d(u.coeffs, v.coeffs, sh.offsets, sh.offsets, K), Y.values)
        assert np.linalg.norm(Z - X) <= 1e-10 * np.linalg.norm(X)

    def test_unit_coefficient(self, rng):
        N, s, K = 6, 2, 1
        u, v = complex_window(rng, N, s), complex_window(rng, N, s)
        sh = make_shift_set(N, s, 1, "circulant")
        D = len(sh) * (K + 1)
        C = np.zeros((D, D))
        C[3, 7] = 1.0
        Z = expand_to_band_2d(C, Window2D(u, v), (sh, sh), K).to_dense()
        frame = oracles.frames_2d(u.coeffs, v.coeffs, sh.offsets, sh.offsets, K)[3 * D + 7].ravel()
        np.testing.assert_allclose(Z, np.outer(frame, frame.conj()), atol=1e-14)
        assert np.linalg.matrix_rank(Z, tol=1e-10) == 1
        assert np.trace(Z).real == pytest.approx(u.norm**2 * v.norm**2)

    def test_band_mask_is_cartesian_square(self):
        sh = make_shift_set(8, 3, 2, "interior")
        u = exponential_window(8, 3)
        D = len(sh) * 2
        Z = expand_to_band_2d(np.ones((D, D)), Window2D(u, u), (sh, sh), 1)
        m = pair_mask(sh)
        pairs1 = set(zip(m.rows.tolist(), m.cols.tolist()))
        got = {(int(r), int(c)) for r, c in zip(Z.rows, Z.cols)}
        ref = {(i1 * 8 + i2, j1 * 8 + j2) for (i1, j1) in pairs1 for (i2, j2) in pairs1}
        assert got == ref
        assert Z.is_hermitian()

    def test_n128_nnz_bound(self):
        m = pair_mask(make_shift_set(128, 8, 1, "interior"))
        assert m.size**2 <= 128**2 * 15**2 == 3_686_400

    def test_vectorization_pins_row_major(self, rng):
        X = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        Y = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert np.sum(X * Y.conj()) == pytest.approx(np.vdot(Y.ravel(), X.ravel()), rel=1e-14)

    def test_remeasure(self, rng):
        N, s, K = 8, 3, 4
        u = gaussian_window(N, s, 0.9)
        sh = make_shift_set(N, s, 1, "circulant")
        W = Window2D(u, u)
        Y = simulate_2d(random_signal(rng, (N, N)), W, (sh, sh), K)
        Z = tight_band_2d(*build_gram_2d(W, (sh, sh), K), Y)
        Y2 = measure_lifted_2d(Z, W, (sh, sh), K)
        assert np.linalg.norm(Y2 - Y.values) <= 1e-8 * np.linalg.norm(Y.values)


class TestPattern2D:
    def test_is_least_squares_solution_of_masked_system(self, rng):
        N, s, K = 8, 3, 2
        u = gaussian_window(N, s, 0.99)
        sh = make_shift_set(N, s, 2, "interior")
        W = Window2D(u, u)
        Y = simulate_2d(random_signal(rng, (N, N)), W, (sh, sh), K)
        Z = solve_pattern_2d(W, (sh, sh), K, Y)
        frames = oracles.frames_2d(u.coeffs, u.coeffs, sh.offsets, sh.offsets, K)
        rows, cols = Z.rows, Z.cols
        A = np.array([np.conj(fr.ravel()[rows]) * fr.ravel()[cols] for fr in frames])
        x_ls = np.linalg.lstsq(A, Y.values, rcond=None)[0]
        best = np.linalg.norm(A @ x_ls - Y.values)
        assert Z.diagnostics["residual"] * np.linalg.norm(Y.values) <= best + 1e-9
        assert Z.is_hermitian()

    def test_coincides_with_tight_at_full_shifts(self, rng):
        N, s, K = 12, 3, 4
        u = exponential_window(N, s)
        sh = make_shift_set(N, s, 1, "circulant")
        W = Window2D(u, u)
        Y = simulate_2d(random_signal(rng, (N, N)), W, (sh, sh), K)
        Zt = tight_band_2d(*build_gram_2d(W, (sh, sh), K), Y)
        Zp = solve_pattern_2d(W, (sh, sh), K, Y)
        assert np.linalg.norm(Zp.values - Zt.values) <= 1e-6 * np.linalg.norm(Zt.values)

    def test_zero(self):
        u = exponential_window(8, 2)
        sh = make_shift_set(8, 2, 2)
        D = len(sh) * 3
        assert not np.any(solve_pattern_2d(Window2D(u, u), (sh, sh), 2, np.zeros(D * D)).values)


class TestReconstruct2D:
    @pytest.mark.parametrize("projector", ["tight", "pattern"])
    def test_exact_recovery(self, rng, projector):
        N, s, K = 16, 4, 6
        u = exponential_window(N, s)
        sh = make_shift_set(N, s, 1, "circulant")
        F = random_signal(rng, (N, N))
        res = reconstruct_2d(simulate_2d(F, Window2D(u, u), (sh, sh), K), Window2D(u, u), projector)
        assert res.estimate.shape == (N, N)
        assert oracles.aligned_relerr(F, res.estimate) < 1e-6

    def test_global_phase_invariance(self, rng):
        N, s, K = 16, 4, 3
        u = gaussian_window(N, s, 0.99)
        sh = make_shift_set(N, s, 2, "interior")
        W = Window2D(u, u)
        F = random_signal(rng, (N, N))
        e1 = reconstruct_2d(simulate_2d(F, W, (sh, sh), K, freq_step=4), W).estimate
        e2 = reconstruct_2d(simulate_2d(np.exp(1.1j) * F, W, (sh, sh), K, freq_step=4), W).estimate
        assert oracles.aligned_relerr(F, e1) == pytest.approx(oracles.aligned_relerr(F, e2), rel=1e-6)

    def test_non_overlapping_windows_disconnect(self, rng):
        N, s, K = 16, 4, 3
        u = gaussian_window(N, s, 0.99)
        sh = make_shift_set(N, s, s, "interior")
        W = Window2D(u, u)
        res = reconstruct_2d(simulate_2d(random_signal(rng, (N, N)), W, (sh, sh), K, freq_step=4), W)
        assert res.diagnostics["components"] == 16
