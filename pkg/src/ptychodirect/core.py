"""Shared domain types, index contracts and shift-set construction.

Indexing is zero-based throughout. A 1D measurement ``y[alpha]`` with
``alpha = k + pos * (K + 1)`` holds the frequency-``k`` sample for the shift at
position ``pos`` of the (increasing) shift set. In 2D the per-dimension
indices nest as ``alpha = alpha1 * D2 + alpha2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Literal, Sequence

import numpy as np

Mode = Literal["circulant", "interior"]

#: measurements more negative than this fraction of the max are rejected
NEG_TOL = 1e-12


def as_grid(values, ndims: int | None = None) -> np.ndarray:
    """Validate and return a complex128 copy of a 1D vector or square 2D image."""
    arr = np.array(values, dtype=np.complex128)
    if arr.ndim not in (1, 2):
        raise ValueError(f"grid must be 1D or 2D, got ndim={arr.ndim}")
    if ndims is not None and arr.ndim != ndims:
        raise ValueError(f"expected a {ndims}D grid, got {arr.ndim}D")
    if arr.ndim == 2 and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"2D grids must be square, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("grid is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grid contains non-finite values")
    return arr


@dataclass(frozen=True, eq=False)
class ShiftSet:
    """Translation offsets of the window along one dimension."""

    N: int
    s: int
    stride: int
    mode: Mode
    offsets: np.ndarray

    def __post_init__(self):
        off = np.asarray(self.offsets, dtype=np.int64)
        if off.ndim != 1 or off.size == 0:
            raise ValueError("no admissible shifts")
        if np.any(np.diff(off) <= 0):
            raise ValueError("offsets must be strictly increasing")
        if off[0] < 0 or off[-1] > self.N - 1:
            raise ValueError("offsets must lie in [0, N)")
        if self.mode == "interior" and off[-1] + self.s > self.N:
            raise ValueError("interior shifts must keep the window inside the grid")
        off.setflags(write=False)
        object.__setattr__(self, "offsets", off)

    def __len__(self) -> int:
        return int(self.offsets.size)

    def __eq__(self, other):
        if not isinstance(other, ShiftSet):
            return NotImplemented
        return (self.N, self.s, self.stride, self.mode) == (
            other.N, other.s, other.stride, other.mode
        ) and np.array_equal(self.offsets, other.offsets)

    @property
    def is_full_circulant(self) -> bool:
        return self.mode == "circulant" and len(self) == self.N

    def covered(self) -> np.ndarray:
        """Boolean mask of grid points touched by at least one shifted window."""
        mask = np.zeros(self.N, dtype=bool)
        for l in self.offsets:
            mask[(l + np.arange(self.s)) % self.N] = True
        return mask


def make_shift_set(N: int, s: int, stride: int = 1, mode: Mode = "interior") -> ShiftSet:
    """Build ``{0, stride, 2*stride, ...}`` restricted to admissible offsets.

    ``interior`` keeps only offsets with ``l + s <= N`` (no wrap-around);
    ``circulant`` keeps every multiple of ``stride`` below ``N``.
    """
    if s > N:
        raise ValueError(f"no admissible shifts: support s={s} exceeds N={N}")
    if s < 1:
        raise ValueError(f"need s >= 1, got s={s}")
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if mode == "interior":
        stop = N - s + 1
    elif mode == "circulant":
        stop = N
    else:
        raise ValueError(f"unknown shift mode {mode!r}")
    offsets = np.arange(0, stop, stride)
    if offsets.size == 0:
        raise ValueError("no admissible shifts")
    return ShiftSet(N=N, s=s, stride=stride, mode=mode, offsets=offsets)


def measurement_index(shift_pos: int, k: int, K: int, n_shifts: int | None = None) -> int:
    """Zero-based linear index of the ``(shift position, frequency)`` pair."""
    if not 0 <= k <= K:
        raise IndexError(f"frequency {k} outside [0, {K}]")
    if shift_pos < 0 or (n_shifts is not None and shift_pos >= n_shifts):
        raise IndexError(f"shift position {shift_pos} out of range")
    return k + shift_pos * (K + 1)


def measurement_index_2d(pos: Sequence[int], k: Sequence[int], K: int,
                         n_shifts: Sequence[int]) -> int:
    a1 = measurement_index(pos[0], k[0], K, n_shifts[0])
    a2 = measurement_index(pos[1], k[1], K, n_shifts[1])
    return a1 * n_shifts[1] * (K + 1) + a2


def check_frequencies(N: int, K: int, freq_step: int = 1) -> None:
    """Modulation indices ``0, step, ..., K*step`` must be distinct modulo ``N``."""
    if K < 0 or freq_step < 1 or K * freq_step > N - 1:
        raise ValueError(f"need 0 <= K*freq_step <= N-1, got K={K}, freq_step={freq_step}, N={N}")


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Nonnegative intensities in the linear index order described above.

    Frequency index ``k`` stands for modulation index ``k * freq_step``.

    Values slightly below zero (round-off, at most ``NEG_TOL`` times the
    maximum) are clamped to zero; anything more negative is rejected.
    """

    K: int
    shifts: tuple[ShiftSet, ...]
    values: np.ndarray
    window: dict[str, Any] | None = None
    freq_step: int = 1

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).ravel()
        if len(self.shifts) not in (1, 2):
            raise ValueError("need one shift set per dimension (1 or 2)")
        if len({sh.N for sh in self.shifts}) != 1:
            raise ValueError("2D shift sets must share N")
        check_frequencies(self.shifts[0].N, self.K, self.freq_step)
        if vals.size != self.size:
            raise ValueError(
                f"value count {vals.size} does not match geometry ({self.size})"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("measurements must be finite")
        if vals.size:
            top = max(float(vals.max()), 0.0)
            if vals.min() < -NEG_TOL * top or (top == 0.0 and vals.min() < 0):
                raise ValueError("not a valid intensity: negative measurement")
            np.maximum(vals, 0.0, out=vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "shifts", tuple(self.shifts))

    @property
    def ndims(self) -> int:
        return len(self.shifts)

    @property
    def N(self) -> int:
        return self.shifts[0].N

    @property
    def dims(self) -> tuple[int, ...]:
        """Per-dimension measurement counts ``card(L_i) * (K + 1)``."""
        return tuple(len(sh) * (self.K + 1) for sh in self.shifts)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def as_matrix(self) -> np.ndarray:
        """1D: ``(n_shifts, K+1)`` table. 2D: ``(D1, D2)`` matrix."""
        if self.ndims == 1:
            return self.values.reshape(len(self.shifts[0]), self.K + 1)
        return self.values.reshape(self.dims)


@dataclass(eq=False)
class LiftedSolution:
    """Sparse Hermitian estimate of the lifted signal, stored as COO triplets.

    ``grid_shape`` is ``(N,)`` in 1D and ``(N, N)`` in 2D; in 2D the matrix
    acts on row-major vectorized images of length ``N**2``.
    """

    grid_shape: tuple[int, ...]
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(np.prod(self.grid_shape))

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_sparse(self):
        from scipy import sparse

        return sparse.csr_matrix((self.values, (self.rows, self.cols)), shape=(self.n, self.n))

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=np.complex128)
        on = self.rows == self.cols
        d[self.rows[on]] = self.values[on]
        return d

    def clamp_diagonal(self) -> None:
        on = self.rows == self.cols
        self.values[on] = np.maximum(self.values[on].real, 0.0)

    def is_hermitian(self) -> bool:
        """Exact check: every stored pair has its mirror with conjugate value."""
        key = self.rows * self.n + self.cols
        tkey = self.cols * self.n + self.rows
        order = np.argsort(key)
        pos = np.searchsorted(key[order], tkey)
        if np.any(pos >= key.size):
            return False
        mirror = order[pos]
        if not np.array_equal(key[mirror], tkey):
            return False
        return bool(np.array_equal(self.values[mirror], np.conj(self.values)))

    def to_dense(self) -> np.ndarray:
        """Dense copy; intended for small problems and tests only."""
        out = np.zeros((self.n, self.n), dtype=np.complex128)
        out[self.rows, self.cols] = self.values
        return out


@dataclass
class ReconstructionResult:
    """Estimate of the object, determined only up to a global unimodular factor."""

    estimate: np.ndarray
    global_phase_ambiguous: bool = True
    diagnostics: dict[str, Any] = field(default_factory=dict)
