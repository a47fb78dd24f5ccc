"""Lifted linear inversion in 1D.

Measurements are linear in the lifted matrix ``X = f f*``:
``y_alpha = v_alpha* X v_alpha`` with ``v_alpha`` the frame vectors. Two
inversions are provided:

* tight: solve the Gram system of the rank-one matrices ``v v*`` and expand
  the coefficients, giving the orthogonal projection of ``f f*`` onto their
  span;
* pattern: treat every entry of ``X`` inside the window-pair support as a free
  complex unknown and take a basic least-squares solution, followed by
  Hermitian symmetrization.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .core import LiftedSolution, MeasurementSet, ReconstructionResult, ShiftSet
from .windows import Window, frame_matrix

log = logging.getLogger(__name__)

# relative singular-value cutoff of the lifted spanning matrix
RCOND = 1e-10
PATTERN_RCOND = RCOND
LAMBDA_START = 1e-10
LAMBDA_MAX = 1e-4
LAMBDA_STEP = 100.0


class SingularSystemError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# band / pattern structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PairMask:
    """Index pairs ``(i, j)`` jointly covered by some shifted window, row-major."""

    N: int
    rows: np.ndarray
    cols: np.ndarray
    transpose: np.ndarray  # position of (j, i) for each stored (i, j)

    @property
    def size(self) -> int:
        return int(self.rows.size)

    @property
    def diag(self) -> np.ndarray:
        return np.flatnonzero(self.rows == self.cols)


def pair_mask(shifts: ShiftSet) -> PairMask:
    N, s = shifts.N, shifts.s
    cover = np.zeros((N, N), dtype=bool)
    for l in shifts.offsets:
        idx = (l + np.arange(s)) % N
        cover[np.ix_(idx, idx)] = True
    rows, cols = np.nonzero(cover)
    lookup = np.full((N, N), -1, dtype=np.int64)
    lookup[rows, cols] = np.arange(rows.size)
    return PairMask(N=N, rows=rows, cols=cols, transpose=lookup[cols, rows])


def lifted_operator(V: np.ndarray, mask: PairMask) -> np.ndarray:
    """Matrix of ``X -> (v_a* X v_a)_a`` on the masked entries, shape ``(D, M)``."""
    return np.conj(V[:, mask.rows]) * V[:, mask.cols]


def basic_ginverse(A: np.ndarray, rcond: float = PATTERN_RCOND) -> tuple[np.ndarray, int]:
    """Basic least-squares generalized inverse via column-pivoted QR.

    Returns ``(R, rank)`` with ``R`` of shape ``(M, D)``: ``R @ y`` is the
    least-squares solution that is zero outside the ``rank`` pivot columns.
    This is deliberately not the minimum-norm solution.
    """
    Q, Rf, piv = sla.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(Rf))
    if diag.size == 0 or diag[0] == 0:
        raise SingularSystemError("pattern system has no measurable entries")
    rank = int(np.sum(diag > rcond * diag[0]))
    sol = sla.solve_triangular(Rf[:rank, :rank], Q[:, :rank].conj().T)
    R = np.zeros((A.shape[1], A.shape[0]), dtype=np.complex128)
    R[piv[:rank]] = sol
    return R, rank


def ridge_ginverse(A: np.ndarray) -> tuple[np.ndarray, float]:
    """``(A^H A + lam I)^{-1} A^H`` with ``lam`` escalated until Cholesky succeeds."""
    H = A.conj().T @ A
    scale = np.real(np.trace(H)) / H.shape[0]
    rel = LAMBDA_START
    while True:
        try:
            fac = sla.cho_factor(H + rel * scale * np.eye(H.shape[0]), lower=True)
            break
        except np.linalg.LinAlgError:
            rel *= LAMBDA_STEP
            if rel > LAMBDA_MAX * (1 + 1e-9):
                raise SingularSystemError("pattern normal equations numerically singular") from None
            log.info("escalating pattern regularization to %g", rel)
    return sla.cho_solve(fac, A.conj().T), rel * scale


# ---------------------------------------------------------------------------
# tight projector
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class GramSystem:
    """Gram matrix ``G[a, b] = |<v_a, v_b>|**2`` of the lifted frame plus its factorization.

    ``G = A A*`` with ``A`` the lifted operator on the window-pair mask. The
    factorization is the thin SVD ``A* = U S V*``, i.e. ``G = V S^2 V*``;
    singular values below ``rcond * S.max()`` are discarded, which turns the
    solve into a truncated pseudo-inverse. Working from ``A`` rather than
    ``G`` avoids squaring its condition number.
    """

    window: Window
    shifts: ShiftSet
    K: int
    sign: int
    V: np.ndarray
    G: np.ndarray
    freq_step: int = 1
    rcond: float = RCOND
    U: np.ndarray | None = field(default=None, repr=False)
    sv: np.ndarray | None = field(default=None, repr=False)
    Vh: np.ndarray | None = field(default=None, repr=False)
    mask: PairMask | None = field(default=None, repr=False)

    @property
    def D(self) -> int:
        return self.G.shape[0]

    @property
    def rank(self) -> int:
        return int(self.sv.size)

    def index_map(self) -> np.ndarray:
        """``(D, 2)`` array of ``(shift offset, modulation index)`` per linear index."""
        L = len(self.shifts)
        l = np.repeat(self.shifts.offsets, self.K + 1)
        k = np.tile(self.sign * self.freq_step * np.arange(self.K + 1), L)
        return np.stack([l, k], axis=1)

    def factorize(self) -> None:
        self.mask = pair_mask(self.shifts)
        At = lifted_operator(self.V, self.mask).conj().T  # (M, D)
        U, sv, Vh = sla.svd(At, full_matrices=False, lapack_driver="gesdd")
        if sv.size == 0 or not np.all(np.isfinite(sv)) or sv[0] == 0:
            raise SingularSystemError("Gram system numerically singular")
        keep = sv > self.rcond * sv[0]
        self.U, self.sv, self.Vh = U[:, keep], sv[keep], Vh[keep]
        if self.rank < self.D:
            log.debug("Gram system rank %d of %d", self.rank, self.D)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Coefficients ``G^+ rhs`` along axis 0 (real right-hand sides)."""
        t = (self.Vh @ rhs) / (self.sv**2).reshape((-1,) + (1,) * (np.ndim(rhs) - 1))
        return np.real(self.Vh.conj().T @ t)

    def band_map(self) -> np.ndarray:
        """``A* G^+ = U S^-1 V*``: measurements straight to masked entries, ``(M, D)``."""
        return (self.U / self.sv) @ self.Vh


def build_gram(w: Window, shifts: ShiftSet, K: int, sign: int = 1, freq_step: int = 1,
               rcond: float = RCOND) -> GramSystem:
    """Assemble and factor the Gram system of the lifted frame.

    ``sign=-1`` uses frequencies ``-k`` (the second factor of a 2D window).
    """
    V = frame_matrix(w, shifts, K, sign=sign, freq_step=freq_step)
    inner = V @ V.conj().T
    G = np.abs(inner) ** 2
    G = 0.5 * (G + G.T)
    gram = GramSystem(window=w, shifts=shifts, K=K, sign=sign, V=V, G=G, freq_step=freq_step, rcond=rcond)
    gram.factorize()
    return gram


def _values(y) -> np.ndarray:
    return y.values if isinstance(y, MeasurementSet) else np.asarray(y, dtype=np.float64)


def solve_tight(gram: GramSystem, y, return_info: bool = False):
    """Coefficients ``c`` of the tight-projector solution ``X = sum_a c_a v_a v_a*``."""
    yv = _values(y)
    if yv.shape != (gram.D,):
        raise ValueError(f"expected {gram.D} measurements, got {yv.shape}")
    c = gram.solve(yv)
    if not return_info:
        return c
    ny = np.linalg.norm(yv)
    res = np.linalg.norm(gram.G @ c - yv) / ny if ny > 0 else 0.0
    return c, {"residual": float(res), "rcond": gram.rcond, "rank": gram.rank, "D": gram.D}


def expand_to_band(c, w: Window, shifts: ShiftSet, K: int, sign: int = 1,
                   mask: PairMask | None = None, freq_step: int = 1) -> LiftedSolution:
    """Evaluate ``sum_a c_a v_a v_a*`` on the window-pair mask."""
    mask = mask or pair_mask(shifts)
    V = frame_matrix(w, shifts, K, sign=sign, freq_step=freq_step)
    c = np.asarray(c, dtype=np.float64)
    A = lifted_operator(V, mask)
    vals = A.conj().T @ c
    # exact Hermitian pairing: the two mirrored sums differ only by round-off
    vals = 0.5 * (vals + np.conj(vals[mask.transpose]))
    Z = LiftedSolution((w.N,), mask.rows.copy(), mask.cols.copy(), vals)
    Z.clamp_diagonal()
    return Z


def tight_band(gram: GramSystem, y) -> LiftedSolution:
    """Tight-projector band straight from the measurements.

    Same matrix as ``expand_to_band(solve_tight(gram, y), ...)`` but applies
    ``U S^-1 V*`` instead of forming ``A*`` times ``G^+ y``, which keeps
    ill-conditioned systems accurate.
    """
    yv = _values(y)
    if yv.shape != (gram.D,):
        raise ValueError(f"expected {gram.D} measurements, got {yv.shape}")
    mask = gram.mask
    vals = (gram.U / gram.sv) @ (gram.Vh @ yv)
    vals = symmetrize(vals, mask)
    ny = np.linalg.norm(yv)
    resid = lifted_operator(gram.V, mask) @ vals - yv
    info = {"rcond": gram.rcond, "rank": gram.rank, "D": gram.D,
            "residual": float(np.linalg.norm(resid) / ny) if ny > 0 else 0.0}
    Z = LiftedSolution((gram.window.N,), mask.rows.copy(), mask.cols.copy(), vals, diagnostics=info)
    Z.clamp_diagonal()
    return Z


# ---------------------------------------------------------------------------
# pattern projector
# ---------------------------------------------------------------------------

def symmetrize(vals: np.ndarray, mask: PairMask) -> np.ndarray:
    return 0.5 * (vals + np.conj(vals[mask.transpose]))


def solve_pattern(w: Window, shifts: ShiftSet, K: int, y, method: str = "basic",
                  mask: PairMask | None = None, freq_step: int | None = None) -> LiftedSolution:
    """Least squares over the masked entries, then ``Z <- (Z + Z*)/2`` and clamping.

    ``method="basic"`` (default) uses the pivoted-QR basic solution, which is
    what separates this estimator from the tight projector. ``"ridge"``
    solves Tikhonov-regularized normal equations; that limit is the minimum
    norm solution and reproduces the tight projector.
    """
    if freq_step is None:
        freq_step = y.freq_step if isinstance(y, MeasurementSet) else 1
    mask = mask or pair_mask(shifts)
    V = frame_matrix(w, shifts, K, freq_step=freq_step)
    A = lifted_operator(V, mask)
    yv = _values(y)
    if yv.shape != (A.shape[0],):
        raise ValueError(f"expected {A.shape[0]} measurements, got {yv.shape}")
    info: dict = {"method": method}
    if method == "basic":
        R, rank = basic_ginverse(A)
        vals = R @ yv
        info["rank"] = rank
    elif method == "ridge":
        R, lam = ridge_ginverse(A)
        vals = R @ yv
        info["lambda"] = lam
    else:
        raise ValueError(f"unknown pattern method {method!r}")
    ny = np.linalg.norm(yv)
    info["residual"] = float(np.linalg.norm(A @ vals - yv) / ny) if ny > 0 else 0.0
    info["hermitian_defect"] = float(np.linalg.norm(vals - np.conj(vals[mask.transpose])))
    vals = symmetrize(vals, mask)
    Z = LiftedSolution((w.N,), mask.rows.copy(), mask.cols.copy(), vals, diagnostics=info)
    Z.clamp_diagonal()
    return Z


def measure_lifted(Z: LiftedSolution, w: Window, shifts: ShiftSet, K: int,
                   freq_step: int = 1) -> np.ndarray:
    """Re-measure a lifted matrix: ``(v_a* Z v_a)_a`` (real part)."""
    V = frame_matrix(w, shifts, K, freq_step=freq_step)
    M = Z.to_sparse()
    return np.real(np.einsum("an,an->a", V.conj(), (M @ V.T).T))


def reconstruct_1d(y: MeasurementSet, w: Window, projector: str = "tight",
                   stabilized: bool | None = None, pattern_method: str = "basic") -> ReconstructionResult:
    """Full 1D pipeline: lifted solve, then angular synchronization."""
    from .sync import synchronize

    (shifts,) = y.shifts
    if projector == "tight":
        gram = build_gram(w, shifts, y.K, freq_step=y.freq_step)
        Z = tight_band(gram, y)
    elif projector == "pattern":
        Z = solve_pattern(w, shifts, y.K, y, method=pattern_method)
    else:
        raise ValueError(f"unknown projector {projector!r}")
    if stabilized is None:
        stabilized = not shifts.is_full_circulant
    res = synchronize(Z, stabilized=stabilized)
    res.diagnostics["lifted"] = Z.diagnostics
    return res
