"""Simulated ptychographic intensities: squared moduli of windowed DFT samples.

The ``1/N`` (``1/N**2``) prefactors of the discrete STFT are dropped. Values are
computed by direct summation over the window support, one independent sum per
output, so results do not depend on how the work is split.
"""
from __future__ import annotations

import numpy as np

from .core import MeasurementSet, ShiftSet, as_grid, check_frequencies
from .windows import Window, Window2D


def brute_force_stft(f, w: Window, l: int, k: int) -> complex:
    """``sum_n f(n) conj(w(n-l mod N)) exp(-2j*pi*k*n/N)`` by a plain loop."""
    f = np.asarray(f, dtype=np.complex128)
    N = w.N
    if f.shape != (N,):
        raise ValueError(f"object length {f.shape} does not match window length {N}")
    total = 0j
    for n in range(N):
        total += f[n] * np.conj(w.coeffs[(n - l) % N]) * np.exp(-2j * np.pi * k * n / N)
    return complex(total)


def _stft_table(f: np.ndarray, w: Window, shifts: ShiftSet, K: int, freq_step: int = 1) -> np.ndarray:
    """``(n_shifts, K+1)`` table of windowed DFT samples (up to unit phases per row)."""
    N, s = w.N, w.s
    m = np.arange(s)
    idx = (shifts.offsets[:, None] + m[None, :]) % N
    seg = f[idx] * np.conj(w.support)[None, :]  # (L, s)
    E = np.exp(-2j * np.pi * np.outer(freq_step * np.arange(K + 1), m) / N)  # (K+1, s)
    # drops the row phase exp(-2j*pi*k*l/N), which has unit modulus
    return seg @ E.T


def _check_geometry(N: int, w_N: int, shifts: ShiftSet, K: int, freq_step: int) -> None:
    if N != w_N or shifts.N != N:
        raise ValueError(f"shape mismatch: object N={N}, window N={w_N}, shifts N={shifts.N}")
    check_frequencies(N, K, freq_step)


def simulate_1d(f, w: Window, shifts: ShiftSet, K: int, freq_step: int = 1) -> MeasurementSet:
    """``y[k + pos*(K+1)] = |STFT(shift pos, modulation k*freq_step)|**2``."""
    f = as_grid(f, ndims=1)
    _check_geometry(f.size, w.N, shifts, K, freq_step)
    y = np.abs(_stft_table(f, w, shifts, K, freq_step)) ** 2
    return MeasurementSet(K=K, shifts=(shifts,), values=y.ravel(), window=w.describe(),
                          freq_step=freq_step)


def simulate_2d(F, W: Window2D, shifts: tuple[ShiftSet, ShiftSet], K: int,
                freq_step: int = 1) -> MeasurementSet:
    """2D intensities for ``W(a, b) = u(a) conj(v(b))``, DFT denominator ``N`` per axis."""
    F = as_grid(F, ndims=2)
    N = F.shape[0]
    sh1, sh2 = shifts
    _check_geometry(N, W.N, sh1, K, freq_step)
    _check_geometry(N, W.N, sh2, K, freq_step)
    s = W.s
    m = np.arange(s)
    E = np.exp(-2j * np.pi * np.outer(freq_step * np.arange(K + 1), m) / N)
    # conj(W(a, b)) = conj(u(a)) * v(b)
    left = E * np.conj(W.u.support)[None, :]   # (K+1, s) along axis 0
    right = E * W.v.support[None, :]           # (K+1, s) along axis 1
    idx1 = (sh1.offsets[:, None] + m[None, :]) % N
    idx2 = (sh2.offsets[:, None] + m[None, :]) % N
    patches = F[idx1[:, None, :, None], idx2[None, :, None, :]]  # (L1, L2, s, s)
    S = np.einsum("km,abmn,qn->akbq", left, patches, right, optimize=True)
    Y = np.abs(S) ** 2  # (L1, K+1, L2, K+1) = (alpha1, alpha2) row-major
    return MeasurementSet(
        K=K, shifts=(sh1, sh2), values=Y.ravel(),
        window={"u": W.u.describe(), "v": W.v.describe()}, freq_step=freq_step,
    )
