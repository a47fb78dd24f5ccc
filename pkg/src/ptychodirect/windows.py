"""Window (probe) vectors and the shifted, modulated frame vectors built from them."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import ndtri

from .core import ShiftSet


@dataclass(frozen=True, eq=False)
class Window:
    """Length-``N`` window that is nonzero exactly on its first ``s`` entries."""

    N: int
    s: int
    coeffs: np.ndarray
    kind: str = "custom"
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (self.N,):
            raise ValueError(f"coeffs must have shape ({self.N},), got {c.shape}")
        if not 1 <= self.s <= self.N:
            raise ValueError(f"need 1 <= s <= N, got s={self.s}, N={self.N}")
        if not np.all(np.isfinite(c)):
            raise ValueError("window coefficients must be finite")
        if np.any(c[: self.s] == 0):
            raise ValueError("window must be nonvanishing on support")
        if np.any(c[self.s:] != 0):
            raise ValueError("window must vanish outside its support")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @property
    def support(self) -> np.ndarray:
        return self.coeffs[: self.s]

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, "N": self.N, "s": self.s, **self.params}


@dataclass(frozen=True, eq=False)
class Window2D:
    """Separable 2D window ``W = u v*`` with equal support along both axes."""

    u: Window
    v: Window

    def __post_init__(self):
        if (self.u.N, self.u.s) != (self.v.N, self.v.s):
            raise ValueError("separable factors must share N and s")

    @property
    def N(self) -> int:
        return self.u.N

    @property
    def s(self) -> int:
        return self.u.s

    def matrix(self) -> np.ndarray:
        return np.outer(self.u.coeffs, np.conj(self.v.coeffs))


def exponential_window(N: int, s: int, a: float = 4.0) -> Window:
    """``(2s-1)**(-1/4) * exp(-n/a)`` on ``n < s``.

    Decay rates ``a < 4`` are accepted but flagged (``params['below_range']``)
    and warned about, since invertibility is only known for ``a >= 4``.
    """
    if s > N:
        raise ValueError(f"support s={s} exceeds N={N}")
    params: dict[str, Any] = {"a": float(a)}
    if a < 4:
        warnings.warn(f"exponential window decay a={a} is below the analysed range a >= 4")
        params["below_range"] = True
    c = np.zeros(N)
    n = np.arange(s)
    c[:s] = (2 * s - 1) ** -0.25 * np.exp(-n / a)
    return Window(N=N, s=s, coeffs=c, kind="exponential", params=params)


def gaussian_quantile(alpha: float, two_sided: bool = True) -> float:
    """Truncation point ``t`` of the standard normal for coverage ``alpha``."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return float(ndtri((1 + alpha) / 2)) if two_sided else float(ndtri(alpha))


def gaussian_window(N: int, s: int, alpha: float = 0.99, photons: float = 1.0,
                    two_sided: bool = True) -> Window:
    """Truncated Gaussian sampled uniformly on ``[-t, t]``, scaled to ``||w||^2 = photons``.

    ``t`` is the two-sided ``alpha`` quantile by default (mass ``alpha`` on
    ``[-t, t]``); ``two_sided=False`` uses the one-sided ``Phi^{-1}(alpha)``.
    """
    t = gaussian_quantile(alpha, two_sided)
    if s < 2:
        raise ValueError("gaussian window needs s >= 2")
    if s > N:
        raise ValueError(f"support s={s} exceeds N={N}")
    if photons <= 0:
        raise ValueError("photon count must be positive")
    n = np.arange(s)
    u = np.exp(-(t**2) * (2 * n - s + 1) ** 2 / (2 * (s - 1) ** 2))
    u *= np.sqrt(photons) / np.linalg.norm(u)
    c = np.zeros(N)
    c[:s] = u
    return Window(
        N=N, s=s, coeffs=c, kind="gaussian",
        params={"alpha": float(alpha), "photons": float(photons), "two_sided": two_sided, "t": t},
    )


def custom_window(coeffs, s: int | None = None) -> Window:
    """Wrap explicit coefficients; ``s`` defaults to the index past the last nonzero."""
    c = np.asarray(coeffs, dtype=np.complex128)
    if s is None:
        nz = np.flatnonzero(c)
        if nz.size == 0:
            raise ValueError("window must be nonvanishing on support")
        s = int(nz[-1]) + 1
    return Window(N=c.size, s=s, coeffs=c, kind="custom")


def frame_vector(w: Window, k: int, l: int) -> np.ndarray:
    """Shifted, modulated window ``T_l M_k w``.

    Entry ``n`` is ``w(n-l) * exp(2j*pi*k*(n-l)/N)`` (indices mod ``N``), so
    ``<f, v> = sum_n f(n) conj(v(n))`` equals the STFT sample
    ``sum_n f(n) conj(w(n-l)) exp(-2j*pi*k*n/N)`` times ``exp(2j*pi*k*l/N)``.
    Negative ``k`` is allowed (it is taken mod ``N``).
    """
    N = w.N
    m = np.arange(w.s)
    out = np.zeros(N, dtype=np.complex128)
    out[(l + m) % N] = w.support * np.exp(2j * np.pi * k * m / N)
    return out


def frame_matrix(w: Window, shifts: ShiftSet, K: int, sign: int = 1,
                 freq_step: int = 1) -> np.ndarray:
    """All frame vectors stacked as rows in measurement-index order, shape ``(D, N)``.

    Row ``k + pos*(K+1)`` uses modulation index ``sign * freq_step * k``.
    """
    if shifts.N != w.N or shifts.s != w.s:
        raise ValueError("window and shift set disagree on N or s")
    N, s = w.N, w.s
    m = np.arange(s)
    k = np.arange(K + 1)
    block = w.support[None, :] * np.exp(sign * 2j * np.pi * freq_step * np.outer(k, m) / N)  # (K+1, s)
    L = len(shifts)
    V = np.zeros((L, K + 1, N), dtype=np.complex128)
    cols = (shifts.offsets[:, None] + m[None, :]) % N  # (L, s)
    V[np.arange(L)[:, None, None], k[None, :, None], cols[:, None, :]] = block[None]
    return V.reshape(L * (K + 1), N)
