import numpy as np

from ptychodirect.core import LiftedSolution
from ptychodirect.solver1d import pair_mask


def lifted_from_dense(Zd: np.ndarray, mask=None) -> LiftedSolution:
    """Store ``Zd`` on ``mask`` (a PairMask) or on its own nonzero pattern."""
    if mask is not None:
        rows, cols = mask.rows, mask.cols
    else:
        rows, cols = np.nonzero(Zd)
    return LiftedSolution((Zd.shape[0],), rows.copy(), cols.copy(), Zd[rows, cols].astype(complex))


def rank_one_on_shifts(f: np.ndarray, shifts) -> LiftedSolution:
    return lifted_from_dense(np.outer(f, f.conj()), pair_mask(shifts))


def noisy_sync_band(rng, n: int = 50, width: int = 8, noise: float = 0.6) -> np.ndarray:
    """Hermitian matrix with unimodular entries on ``|i-j| < width``: ``e^{i(t_i - t_j + noise)}``."""
    t = rng.uniform(0, 2 * np.pi, n)
    M = np.zeros((n, n), complex)
    for i in range(n):
        for j in range(i, min(n, i + width)):
            e = 0.0 if i == j else noise * rng.normal()
            M[i, j] = np.exp(1j * (t[i] - t[j] + e))
            M[j, i] = np.conj(M[i, j])
    return M
