import numpy as np
import pytest

import oracles
from conftest import random_signal
from helpers import lifted_from_dense, noisy_sync_band, rank_one_on_shifts
from ptychodirect.core import make_shift_set
from ptychodirect.sync import (
    assemble_estimate,
    connectivity,
    normalize_band,
    power_iteration,
    synchronize,
    top_eigenvector,
)


def test_normalize_two_by_two():
    z = np.array([1, 1j])
    band = normalize_band(lifted_from_dense(np.outer(z, z.conj())))
    np.testing.assert_allclose(band.matrix.toarray(), [[1, -1j], [1j, 1]], atol=1e-16)
    np.testing.assert_array_equal(band.degree, [2, 2])


def test_normalized_diagonal_is_one(rng):
    f = random_signal(rng, 20)
    band = normalize_band(rank_one_on_shifts(2.5 * f, make_shift_set(20, 3, 1)))
    np.testing.assert_array_equal(band.matrix.diagonal(), np.ones(20))
    assert np.allclose(np.abs(band.matrix.data), 1)


def test_no_energy():
    Z = rank_one_on_shifts(np.zeros(3, complex), make_shift_set(3, 3, 1))
    with pytest.raises(ValueError, match="no signal energy"):
        normalize_band(Z)


def test_two_blocks():
    Z = np.zeros((6, 6), complex)
    Z[:3, :3] = 1
    Z[3:, 3:] = 2
    band = normalize_band(lifted_from_dense(Z))
    n, labels = connectivity(band)
    assert n == 2
    np.testing.assert_array_equal(band.degree, [3] * 6)
    assert len(set(labels[:3])) == 1 and labels[0] != labels[3]


def test_overlapping_shifts_connect(rng):
    f = random_signal(rng, 24)
    band = normalize_band(rank_one_on_shifts(f, make_shift_set(24, 3, 1, "interior")))
    assert connectivity(band)[0] == 1


def test_non_overlapping_shifts_disconnect(rng):
    N, s = 24, 4
    f = random_signal(rng, N)
    band = normalize_band(rank_one_on_shifts(f, make_shift_set(N, s, s, "interior")))
    assert connectivity(band)[0] >= int(np.ceil(band.active.sum() / s))


def test_single_node():
    band = normalize_band(lifted_from_dense(np.array([[2.0 + 0j]])))
    assert connectivity(band)[0] == 1


def test_inactive_indices_and_zero_estimate(rng):
    f = random_signal(rng, 12)
    f[4] = 0
    Z = rank_one_on_shifts(f, make_shift_set(12, 3, 1, "circulant"))
    res = synchronize(Z)
    assert res.estimate[4] == 0
    assert not normalize_band(Z).active[4]


def test_eigenvector_two_by_two():
    z = np.array([1, 1j])
    band = normalize_band(lifted_from_dense(np.outer(z, z.conj())))
    x, info = top_eigenvector(band, stabilized=False)
    assert abs(np.vdot(x, z / np.sqrt(2))) == pytest.approx(1, abs=1e-12)
    assert info.eigenvalue == pytest.approx(2, abs=1e-12)


def test_eigenvector_unimodular_rank_one(rng):
    z = np.exp(2j * np.pi * rng.uniform(size=30))
    band = normalize_band(rank_one_on_shifts(z, make_shift_set(30, 4, 1, "circulant")))
    for stab in (True, False):
        x, _ = top_eigenvector(band, stabilized=stab)
        assert abs(np.vdot(x, z / np.linalg.norm(z))) > 1 - 1e-8


def test_eigenvector_matches_dense(rng):
    M = noisy_sync_band(rng)
    band = normalize_band(lifted_from_dense(M))
    x, info = top_eigenvector(band, stabilized=True)
    d = 1 / np.sqrt(band.degree)
    ref = oracles.dense_top_eigvec(d[:, None] * M * d[None, :])
    assert info.converged
    assert oracles.aligned_relerr(ref, x) < 1e-8


def test_rayleigh_quotient_monotone(rng):
    M = noisy_sync_band(rng, n=40, noise=1.0)
    from scipy import sparse

    _, info = power_iteration(sparse.csr_matrix(M), np.ones(40, complex), track=True)
    rq = np.array(info.rayleigh)
    assert np.all(np.diff(rq) >= -1e-12)


def test_exact_rank_one_recovery(rng):
    f = random_signal(rng, 40)
    for sh in (make_shift_set(40, 5, 1, "circulant"), make_shift_set(40, 5, 2, "interior")):
        res = synchronize(rank_one_on_shifts(f, sh), stabilized=not sh.is_full_circulant)
        cov = sh.covered()
        assert res.diagnostics["components"] == 1
        assert oracles.aligned_relerr(f[cov], res.estimate[cov]) < 1e-8
        assert not np.any(res.estimate[~cov])


def test_positive_real_signal_recovered_positive(rng):
    f = rng.uniform(0.2, 0.7, 16)
    res = synchronize(rank_one_on_shifts(f + 0j, make_shift_set(16, 3, 1, "circulant")), stabilized=False)
    np.testing.assert_allclose(res.estimate, f, rtol=1e-10)


def test_magnitudes_from_diagonal(rng):
    f = random_signal(rng, 10)
    Z = rank_one_on_shifts(f, make_shift_set(10, 3, 1))
    Z.values[Z.rows == Z.cols] += rng.normal(scale=0.01, size=10)
    Z.clamp_diagonal()
    est = synchronize(Z).estimate
    np.testing.assert_allclose(np.abs(est) ** 2, np.maximum(Z.diagonal().real, 0), rtol=1e-15)


def test_components_get_independent_phases(rng):
    f = random_signal(rng, 16)
    Z = rank_one_on_shifts(f, make_shift_set(16, 4, 4, "interior"))
    res = synchronize(Z)
    assert res.diagnostics["components"] == 4
    for b in range(4):
        blk = slice(4 * b, 4 * b + 4)
        assert oracles.aligned_relerr(f[blk], res.estimate[blk]) < 1e-8
        assert np.real(res.estimate[blk].sum() / np.abs(res.estimate[blk]).sum()) > 0


def test_assemble_handles_zero_eigvec_entries():
    Z = lifted_from_dense(np.diag([4.0, 9.0]) + 0j)
    np.testing.assert_array_equal(assemble_estimate(Z, np.array([0, -1j])), [2, -3j])


def test_small_gap_warns_and_returns_best_iterate(rng):
    M = noisy_sync_band(rng, n=50, width=3, noise=0.6)
    band = normalize_band(lifted_from_dense(M))
    with pytest.warns(UserWarning, match="did not converge"):
        x, info = top_eigenvector(band, maxiter=200)
    assert not info.converged and info.iterations == 200
    assert np.linalg.norm(x) == pytest.approx(1.0)
