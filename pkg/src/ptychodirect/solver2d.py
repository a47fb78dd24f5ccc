"""2D lifted inversion for separable windows ``W = u v*``.

A 2D frame matrix is ``a b^T`` with ``a = T M_k1 u`` and
``b = conj(T M_{-k2} v)``, so in row-major vectorization it is
``kron(a, b)``. Every lifted quantity then factorizes over the two axes:
the Gram matrix is ``G_u (x) G_v`` and the lifted operator on the pattern is
``A_u (x) A_b``. Lifted matrices are held as a pair matrix
``P[(i1, j1), (i2, j2)] = Z[(i1, i2), (j1, j2)]`` over the 1D pair masks.
"""
from __future__ import annotations

import numpy as np

from .core import LiftedSolution, MeasurementSet, ReconstructionResult, ShiftSet
from .solver1d import (
    GramSystem,
    PairMask,
    basic_ginverse,
    build_gram,
    lifted_operator,
    pair_mask,
    ridge_ginverse,
)
from .windows import Window2D, frame_matrix


def build_gram_2d(W: Window2D, shifts: tuple[ShiftSet, ShiftSet], K: int,
                  freq_step: int = 1) -> tuple[GramSystem, GramSystem]:
    """Factor Gram systems; the full 2D Gram ``G_u (x) G_v`` is never formed."""
    sh1, sh2 = shifts
    if sh1.N != W.N or sh2.N != W.N or sh1.s != W.s or sh2.s != W.s:
        raise ValueError("window factors and shift sets disagree on N or s")
    return (build_gram(W.u, sh1, K, freq_step=freq_step),
            build_gram(W.v, sh2, K, sign=-1, freq_step=freq_step))


def solve_tight_2d(gu: GramSystem, gv: GramSystem, Y) -> np.ndarray:
    """Solve ``(G_u (x) G_v) vec(C) = vec(Y)`` as ``G_u C G_v = Y`` (pseudo-inverse per factor)."""
    vals = Y.values if isinstance(Y, MeasurementSet) else np.asarray(Y, dtype=np.float64)
    Ym = vals.reshape(gu.D, gv.D)
    C = gu.solve(Ym)          # G_u^{-1} Y
    return gv.solve(C.T).T    # ... G_v^{-1}  (G_v symmetric)


def _factor_operators(W: Window2D, shifts, K, freq_step=1):
    sh1, sh2 = shifts
    m1, m2 = pair_mask(sh1), pair_mask(sh2)
    Au = lifted_operator(frame_matrix(W.u, sh1, K, freq_step=freq_step), m1)
    # b = conj(T M_{-k} v)
    Ab = lifted_operator(np.conj(frame_matrix(W.v, sh2, K, sign=-1, freq_step=freq_step)), m2)
    return m1, m2, Au, Ab


def _pairs_to_solution(P: np.ndarray, m1: PairMask, m2: PairMask, N: int,
                       diagnostics: dict | None = None) -> LiftedSolution:
    i1, j1 = m1.rows[:, None], m1.cols[:, None]
    i2, j2 = m2.rows[None, :], m2.cols[None, :]
    rows = (i1 * N + i2).ravel()
    cols = (j1 * N + j2).ravel()
    Z = LiftedSolution((N, N), rows, cols, P.ravel().copy(), diagnostics=diagnostics or {})
    Z.clamp_diagonal()
    return Z


def _hermitize(P: np.ndarray, m1: PairMask, m2: PairMask) -> np.ndarray:
    return 0.5 * (P + np.conj(P[np.ix_(m1.transpose, m2.transpose)]))


def expand_to_band_2d(C, W: Window2D, shifts, K: int, freq_step: int = 1) -> LiftedSolution:
    """``sum C[a, b] kron(a_a, b_b) kron(a_a, b_b)*`` on the Cartesian pair mask."""
    m1, m2, Au, Ab = _factor_operators(W, shifts, K, freq_step)
    C = np.asarray(C, dtype=np.float64)
    P = Au.conj().T @ C @ np.conj(Ab)
    return _pairs_to_solution(_hermitize(P, m1, m2), m1, m2, W.N)


def tight_band_2d(gu: GramSystem, gv: GramSystem, Y) -> LiftedSolution:
    """Tight band without forming coefficients: ``P = B_u Y B_v*`` with ``B = A* G^+``.

    The second factor's lifted operator is ``conj(A_v)``, hence ``B_v*``.
    """
    vals = Y.values if isinstance(Y, MeasurementSet) else np.asarray(Y, dtype=np.float64)
    Ym = vals.reshape(gu.D, gv.D)
    P = gu.band_map() @ Ym @ gv.band_map().conj().T
    m1, m2 = gu.mask, gv.mask
    info = {"rank": (gu.rank, gv.rank), "rcond": gu.rcond}
    return _pairs_to_solution(_hermitize(P, m1, m2), m1, m2, gu.window.N, info)


def solve_pattern_2d(W: Window2D, shifts, K: int, Y, freq_step: int | None = None,
                     method: str = "basic") -> LiftedSolution:
    """Least-squares solution on the masked entries, then Hermitian symmetrization.

    The operator is ``A_u (x) A_b``; the Kronecker product of two per-axis
    generalized inverses (basic or ridge, as in 1D) is a least-squares
    inverse of it.
    """
    if freq_step is None:
        freq_step = Y.freq_step if isinstance(Y, MeasurementSet) else 1
    m1, m2, Au, Ab = _factor_operators(W, shifts, K, freq_step)
    vals = Y.values if isinstance(Y, MeasurementSet) else np.asarray(Y, dtype=np.float64)
    Ym = vals.reshape(Au.shape[0], Ab.shape[0])
    if method == "basic":
        Ru, ru = basic_ginverse(Au)
        Rb, rb = basic_ginverse(Ab)
    elif method == "ridge":
        Ru, ru = ridge_ginverse(Au)
        Rb, rb = ridge_ginverse(Ab)
    else:
        raise ValueError(f"unknown pattern method {method!r}")
    P = Ru @ Ym @ Rb.T
    resid = Au @ P @ Ab.T - Ym
    ny = np.linalg.norm(Ym)
    info = {
        "method": method,
        ("rank" if method == "basic" else "lambda"): (ru, rb),
        "residual": float(np.linalg.norm(resid) / ny) if ny > 0 else 0.0,
        "hermitian_defect": float(np.linalg.norm(P - np.conj(P[np.ix_(m1.transpose, m2.transpose)]))),
    }
    return _pairs_to_solution(_hermitize(P, m1, m2), m1, m2, W.N, info)


def measure_lifted_2d(Z: LiftedSolution, W: Window2D, shifts, K: int, freq_step: int = 1) -> np.ndarray:
    """Re-measure a 2D lifted matrix (small problems only: frames are formed densely)."""
    sh1, sh2 = shifts
    a = frame_matrix(W.u, sh1, K, freq_step=freq_step)
    b = np.conj(frame_matrix(W.v, sh2, K, sign=-1, freq_step=freq_step))
    F = np.einsum("ai,bj->abij", a, b).reshape(a.shape[0] * b.shape[0], -1)
    M = Z.to_sparse()
    return np.real(np.einsum("an,an->a", F.conj(), (M @ F.T).T))


def reconstruct_2d(Y: MeasurementSet, W: Window2D, projector: str = "tight",
                   stabilized: bool | None = None, pattern_method: str = "basic") -> ReconstructionResult:
    from .sync import synchronize

    shifts = Y.shifts
    K = Y.K
    if projector == "tight":
        gu, gv = build_gram_2d(W, shifts, K, Y.freq_step)
        Z = tight_band_2d(gu, gv, Y)
    elif projector == "pattern":
        Z = solve_pattern_2d(W, shifts, K, Y, method=pattern_method)
    else:
        raise ValueError(f"unknown projector {projector!r}")
    if stabilized is None:
        stabilized = not all(sh.is_full_circulant for sh in shifts)
    res = synchronize(Z, stabilized=stabilized)
    res.diagnostics["lifted"] = Z.diagnostics
    return res
