"""Phantoms, global-phase alignment, error metrics and parameter sweeps."""
from __future__ import annotations

import csv
import logging
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .core import make_shift_set
from .forward import simulate_2d
from .solver2d import reconstruct_2d
from .windows import Window, Window2D, exponential_window, gaussian_window

log = logging.getLogger(__name__)

PHASE_MASK_FRACTION = 0.05
CSV_HEADER = ["kappa", "projector", "window", "mse_total", "mse_phase", "mse_amp", "components", "seconds"]


def _smooth_field(rng: np.random.Generator, N: int) -> np.ndarray:
    noise = rng.uniform(size=(N, N))
    spec = np.fft.fft2(noise)
    k = np.fft.fftfreq(N) * N
    keep = np.hypot(k[:, None], k[None, :]) <= N / 8
    field_ = np.real(np.fft.ifft2(spec * keep))
    lo, hi = field_.min(), field_.max()
    return (field_ - lo) / (hi - lo)


def phantom(N: int, seed: int = 0, amp_range=(0.2, 0.7), phase_range=(0.0, np.pi / 2)) -> np.ndarray:
    """Seeded smooth complex test object.

    Amplitude and phase are independent low-pass filtered uniform noise fields
    (radial cutoff ``N/8``) mapped affinely onto the requested ranges.
    """
    if N < 8:
        raise ValueError("phantom needs N >= 8")
    rng = np.random.default_rng(seed)
    amp = amp_range[0] + (amp_range[1] - amp_range[0]) * _smooth_field(rng, N)
    ph = phase_range[0] + (phase_range[1] - phase_range[0]) * _smooth_field(rng, N)
    return amp * np.exp(1j * ph)


def align_global_phase(truth, estimate) -> tuple[float, np.ndarray]:
    """Rotate ``estimate`` by the unit factor minimizing ``||truth - e^{i theta} estimate||``."""
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    if truth.shape != estimate.shape:
        raise ValueError(f"shape mismatch {truth.shape} vs {estimate.shape}")
    ip = np.vdot(estimate.ravel(), truth.ravel())
    if ip == 0:
        warnings.warn("estimate is orthogonal to truth; global phase left at 0")
        return 0.0, estimate.astype(np.complex128)
    theta = float(np.angle(ip))
    return theta, np.exp(1j * theta) * estimate


def mse_metrics(truth, estimate) -> dict[str, float]:
    """Total, amplitude and phase errors after global-phase alignment.

    The phase error is the mean squared wrapped phase difference over pixels
    with ``|truth| > 0.05 * max |truth|``.
    """
    truth = np.asarray(truth, dtype=np.complex128)
    _, est = align_global_phase(truth, estimate)
    n = truth.size
    total = float(np.sum(np.abs(truth - est) ** 2) / n)
    amp = float(np.sum((np.abs(truth) - np.abs(est)) ** 2) / n)
    mask = np.abs(truth) > PHASE_MASK_FRACTION * np.abs(truth).max()
    # angle(0) = 0, so vanishing estimates still count against the true phase
    dphi = np.angle(np.exp(1j * (np.angle(est[mask]) - np.angle(truth[mask]))))
    phase = float(np.mean(dphi**2)) if mask.any() else 0.0
    return {"total": total, "amplitude": amp, "phase": phase}


def window_from_spec(spec: dict[str, Any], N: int, s: int) -> Window:
    """Build a window from ``{"kind": "gw", "alpha": ...}`` / ``{"kind": "ew", "a": ...}``."""
    kind = spec.get("kind", "gw").lower()
    if kind in ("gw", "gaussian"):
        return gaussian_window(N, s, alpha=spec.get("alpha", 0.99), photons=spec.get("photons", 1.0),
                               two_sided=spec.get("two_sided", True))
    if kind in ("ew", "exponential"):
        return exponential_window(N, s, a=spec.get("a", 4.0))
    raise ValueError(f"unknown window kind {kind!r}")


def window_label(spec: dict[str, Any]) -> str:
    kind = spec.get("kind", "gw").lower()
    if kind in ("gw", "gaussian"):
        return f"gw{spec.get('alpha', 0.99):g}"
    return f"ew{spec.get('a', 4.0):g}"


def resolve_freq_step(freq_step: int | str, N: int, K: int) -> int:
    """``"uniform"`` -> ``N // (K+1)``; integers pass through."""
    if freq_step == "uniform":
        return max(N // (K + 1), 1)
    return int(freq_step)


@dataclass
class SweepConfig:
    N: int = 64
    s: int = 8
    K: int = 15
    kappas: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    projectors: list[str] = field(default_factory=lambda: ["tight", "pattern"])
    windows: list[dict] = field(default_factory=lambda: [{"kind": "gw", "alpha": 0.99}])
    sim_window: dict = field(default_factory=lambda: {"kind": "gw", "alpha": 0.97})
    mode: str = "interior"
    seed: int = 0
    # "uniform" spreads the K+1 detector frequencies over the whole circle
    freq_step: int | str = "uniform"
    workers: int = 1

    def resolved_freq_step(self) -> int:
        return resolve_freq_step(self.freq_step, self.N, self.K)

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown sweep config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def sweep(config: SweepConfig) -> list[dict[str, Any]]:
    """Simulate on a phantom once per stride and reconstruct with every window/projector.

    Rows come out in config order (window, projector, stride) whatever
    ``workers`` is. A failing cell is recorded with ``error`` set and NaN
    metrics; the sweep carries on.
    """
    F = phantom(config.N, config.seed)
    sim = window_from_spec(config.sim_window, config.N, config.s)
    sim2 = Window2D(sim, sim)
    data = {}
    for kappa in config.kappas:
        sh = make_shift_set(config.N, config.s, kappa, config.mode)
        data[kappa] = simulate_2d(F, sim2, (sh, sh), config.K, freq_step=config.resolved_freq_step())
    cells = []
    for wspec in config.windows:
        w = window_from_spec(wspec, config.N, config.s)
        W = Window2D(w, w)
        cells += [(window_label(wspec), W, proj, kappa) for proj in config.projectors for kappa in config.kappas]

    def run(cell):
        label, W, proj, kappa = cell
        row: dict[str, Any] = {"kappa": kappa, "projector": proj, "window": label}
        t0 = time.perf_counter()
        try:
            res = reconstruct_2d(data[kappa], W, proj)
            m = mse_metrics(F, res.estimate)
            row.update(mse_total=m["total"], mse_phase=m["phase"], mse_amp=m["amplitude"],
                       components=res.diagnostics["components"])
        except Exception as exc:  # noqa: BLE001 - per-cell failure is data
            log.exception("sweep cell failed")
            row.update(mse_total=np.nan, mse_phase=np.nan, mse_amp=np.nan, components=-1, error=str(exc))
        row["seconds"] = time.perf_counter() - t0
        log.info("%s", row)
        return row

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            rows = list(pool.map(run, cells))
    else:
        rows = [run(c) for c in cells]
    return rows


def zero_estimate_mse(truth) -> float:
    truth = np.asarray(truth)
    return float(np.sum(np.abs(truth) ** 2) / truth.size)


def write_csv(rows: list[dict[str, Any]], fh) -> None:
    """Write sweep rows under ``CSV_HEADER``; floats keep full precision."""
    out = csv.writer(fh, lineterminator="\n")
    out.writerow(CSV_HEADER)
    for row in rows:
        out.writerow([repr(float(row[k])) if isinstance(row[k], (float, np.floating)) else row[k] for k in CSV_HEADER])
