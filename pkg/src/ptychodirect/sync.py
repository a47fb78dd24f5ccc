"""Angular synchronization: magnitudes from the diagonal, phases from a leading eigenvector."""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .core import LiftedSolution, ReconstructionResult

log = logging.getLogger(__name__)

TAU = 1e-12
EIG_TOL = 1e-10
EIG_MAXITER = 5000


@dataclass(eq=False)
class NormalizedBand:
    """Entrywise-normalized Hermitian matrix restricted to active indices."""

    matrix: sparse.csr_matrix
    degree: np.ndarray
    active: np.ndarray


def normalize_band(Z: LiftedSolution, tau: float = TAU) -> NormalizedBand:
    """Keep entries with ``|Z_ij| > tau * max diag`` among active indices, scaled to modulus one."""
    diag = np.maximum(Z.diagonal().real, 0.0)
    top = diag.max(initial=0.0)
    if top <= 0:
        raise ValueError("no signal energy")
    thresh = tau * top
    active = diag > thresh
    mag = np.abs(Z.values)
    keep = (mag > thresh) & active[Z.rows] & active[Z.cols]
    vals = Z.values[keep] / mag[keep]
    r, c = Z.rows[keep], Z.cols[keep]
    on = r == c
    vals[on] = 1.0
    M = sparse.csr_matrix((vals, (r, c)), shape=(Z.n, Z.n))
    degree = np.bincount(r, minlength=Z.n).astype(np.float64)
    return NormalizedBand(matrix=M, degree=degree, active=active)


def connectivity(band: NormalizedBand) -> tuple[int, np.ndarray]:
    """Connected components among active indices; inactive ones are labelled -1."""
    act = np.flatnonzero(band.active)
    labels = np.full(band.active.size, -1, dtype=np.int64)
    if act.size == 0:
        return 0, labels
    sub = abs(band.matrix[act][:, act])
    n, lab = connected_components(sub, directed=False)
    labels[act] = lab
    return int(n), labels


@dataclass
class EigenInfo:
    iterations: int
    converged: bool
    eigenvalue: float
    rayleigh: list[float]


def power_iteration(M, x0: np.ndarray, tol: float = EIG_TOL, maxiter: int = EIG_MAXITER,
                    track: bool = False) -> tuple[np.ndarray, EigenInfo]:
    """Leading eigenvector of Hermitian ``M`` by power iteration on ``M + rho I``.

    ``rho`` is the largest absolute row sum, which bounds the spectrum below
    by ``-rho``, so the iteration targets the largest (not largest-magnitude)
    eigenvalue. Convergence needs successive iterates (after removing their
    relative phase) to differ by less than ``tol``, and the geometric tail
    estimated from the last two steps to be below ``tol`` as well.
    """
    rho = float(abs(M).sum(axis=1).max())
    x = x0 / np.linalg.norm(x0)
    rq = []
    converged = False
    it = 0
    prev = np.inf
    for it in range(1, maxiter + 1):
        Mx = M @ x
        if track:
            rq.append(float(np.real(np.vdot(x, Mx))))
        y = Mx + rho * x
        ny = np.linalg.norm(y)
        if ny == 0:
            break
        y /= ny
        ph = np.vdot(x, y)
        ph = ph / abs(ph) if ph != 0 else 1.0
        d = float(np.linalg.norm(y - ph * x))
        x = y
        # the remaining error is about d * r / (1 - r) for contraction ratio r
        r = min(d / prev, 1 - 1e-12) if prev > 0 else 0.0
        prev = d
        if d < tol and d * r / (1 - r) < tol:
            converged = True
            break
    lam = float(np.real(np.vdot(x, M @ x)))
    return x, EigenInfo(iterations=it, converged=converged, eigenvalue=lam, rayleigh=rq)


def top_eigenvector(band: NormalizedBand, stabilized: bool = True,
                    tol: float = EIG_TOL, maxiter: int = EIG_MAXITER) -> tuple[np.ndarray, EigenInfo]:
    """Leading eigenvector of ``D^-1/2 Z~ D^-1/2`` (or of ``Z~``), zero on inactive indices.

    Start vector is all-ones on the active set; if the first product
    annihilates it, a fixed deterministic perturbation is used instead.
    """
    act = np.flatnonzero(band.active)
    if act.size == 0:
        raise ValueError("no active indices")
    M = band.matrix[act][:, act]
    if stabilized:
        d = 1.0 / np.sqrt(band.degree[act])
        M = sparse.diags(d) @ M @ sparse.diags(d)
    M = sparse.csr_matrix(M)
    x0 = np.ones(act.size, dtype=np.complex128)
    if np.linalg.norm(M @ x0) == 0:
        x0 = x0 + 0.5 * np.exp(1j * np.arange(act.size))
    x, info = power_iteration(M, x0, tol=tol, maxiter=maxiter)
    if not info.converged:
        warnings.warn(f"power iteration did not converge in {maxiter} iterations")
    out = np.zeros(band.active.size, dtype=np.complex128)
    out[act] = x
    return out, info


def assemble_estimate(Z: LiftedSolution, z: np.ndarray) -> np.ndarray:
    """``sqrt(max(Re Z_nn, 0)) * z_n/|z_n|``, reshaped to the object grid."""
    mag = np.sqrt(np.maximum(Z.diagonal().real, 0.0))
    absz = np.abs(z)
    phase = np.ones_like(z)
    nz = absz > 0
    phase[nz] = z[nz] / absz[nz]
    return (mag * phase).reshape(Z.grid_shape)


def synchronize(Z: LiftedSolution, stabilized: bool = True, tau: float = TAU) -> ReconstructionResult:
    """Normalize, check connectivity, and synchronize each component separately.

    Every component gets its own global phase, fixed so that its entries sum
    to a positive real (what the all-ones start vector selects).
    """
    t0 = time.perf_counter()
    band = normalize_band(Z, tau)
    ncomp, labels = connectivity(band)
    if ncomp > 1:
        log.warning("synchronization graph has %d components; phases are per component", ncomp)
    z = np.zeros(Z.n, dtype=np.complex128)
    iters, converged = [], True
    for c in range(ncomp):
        members = labels == c
        sub = NormalizedBand(band.matrix, band.degree, members)
        zc, info = top_eigenvector(sub, stabilized=stabilized)
        tot = zc.sum()
        if tot != 0:
            zc *= np.conj(tot) / abs(tot)
        z += zc
        iters.append(info.iterations)
        converged &= info.converged
    t1 = time.perf_counter()
    est = assemble_estimate(Z, z)
    return ReconstructionResult(
        estimate=est,
        diagnostics={
            "components": ncomp,
            "active": int(band.active.sum()),
            "eigen_iterations": int(max(iters, default=0)),
            "eigen_converged": bool(converged),
            "sync_seconds": t1 - t0,
            "stabilized": stabilized,
        },
    )
