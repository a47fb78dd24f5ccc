"""Binary and text formats for grids and measurements, plus 16-bit PGM export.

All multi-byte fields are little-endian.

PTYG (grids)::

    b"PTYG" | u32 version=1 | u32 ndims | u32 dim * ndims | f64 (re, im) * prod(dims)

PTYM (measurements)::

    b"PTYM" | u32 version | u32 ndims
    per dim: u32 N | u32 s | u32 K | u32 mode (0 circulant, 1 interior) | u32 stride
             [version 2 only: u32 freq_step] | u32 count | u32 offset * count
    f64 value * prod(count_i * (K+1))

Version 1 is written whenever ``freq_step == 1``; version 2 carries the
modulation stride.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import MeasurementSet, ShiftSet, as_grid

GRID_MAGIC = b"PTYG"
MEAS_MAGIC = b"PTYM"
MODES = {"circulant": 0, "interior": 1}
MODE_NAMES = {v: k for k, v in MODES.items()}


class FormatError(ValueError):
    pass


class _Reader:
    def __init__(self, data: bytes, name: str):
        self.data, self.pos, self.name = data, 0, name

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"unexpected end of {self.name} stream")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self, count: int = 1):
        vals = struct.unpack(f"<{count}I", self.take(4 * count))
        return vals[0] if count == 1 else list(vals)

    def u32s(self, count: int) -> list[int]:
        return list(struct.unpack(f"<{count}I", self.take(4 * count)))

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

def write_grid(path, grid, fmt: str | None = None) -> None:
    arr = np.asarray(grid, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise FormatError("refusing to write non-finite values")
    arr = as_grid(arr)
    fmt = fmt or _guess_format(path)
    if fmt == "PTYG":
        head = GRID_MAGIC + struct.pack(f"<II{arr.ndim}I", 1, arr.ndim, *arr.shape)
        body = np.ascontiguousarray(arr).view("<f8").tobytes()
        Path(path).write_bytes(head + body)
    elif fmt == "CSV":
        lines = [f"# dims={','.join(map(str, arr.shape))}", "re,im"]
        lines += [f"{float(z.real)!r},{float(z.imag)!r}" for z in arr.ravel()]
        Path(path).write_text("\n".join(lines) + "\n")
    else:
        raise FormatError(f"unknown grid format {fmt!r}")


def read_grid(path, fmt: str | None = None) -> np.ndarray:
    fmt = fmt or _guess_format(path)
    if fmt == "PTYG":
        return _parse_ptyg(Path(path).read_bytes())
    if fmt == "CSV":
        return _parse_csv(Path(path).read_text())
    raise FormatError(f"unknown grid format {fmt!r}")


def _guess_format(path) -> str:
    return "CSV" if str(path).lower().endswith(".csv") else "PTYG"


def _parse_ptyg(data: bytes) -> np.ndarray:
    r = _Reader(data, "PTYG")
    if r.take(4) != GRID_MAGIC:
        raise FormatError("bad magic, not a PTYG file")
    version = r.u32()
    if version != 1:
        raise FormatError(f"unsupported PTYG version {version}")
    ndims = r.u32()
    if ndims not in (1, 2):
        raise FormatError(f"bad PTYG dimension count {ndims}")
    dims = [r.u32() for _ in range(ndims)]
    if any(d == 0 for d in dims):
        raise FormatError(f"bad PTYG dims {dims}")
    vals = r.f64(2 * int(np.prod(dims)))
    if r.pos != len(data):
        raise FormatError("trailing bytes after PTYG payload")
    return vals.view(np.complex128).reshape(dims).copy()


def _parse_csv(text: str) -> np.ndarray:
    dims = None
    values = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line[1:].strip().startswith("dims="):
                try:
                    dims = [int(x) for x in line.split("=", 1)[1].split(",")]
                except ValueError:
                    raise FormatError(f"line {lineno}: bad dims line {line!r}") from None
            continue
        if not header_seen:
            if line.replace(" ", "") != "re,im":
                raise FormatError(f"line {lineno}: expected header 're,im'")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected 2 columns, got {len(parts)}")
        try:
            values.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise FormatError(f"line {lineno}: cannot parse {line!r}") from None
    if dims is None:
        raise FormatError("missing '# dims=' line")
    if len(values) != int(np.prod(dims)):
        raise FormatError(f"dims {dims} need {int(np.prod(dims))} values, got {len(values)}")
    return np.array(values, dtype=np.complex128).reshape(dims)


# ---------------------------------------------------------------------------
# measurements
# ---------------------------------------------------------------------------

def write_measurements(path, meas: MeasurementSet) -> None:
    version = 1 if meas.freq_step == 1 else 2
    out = [MEAS_MAGIC, struct.pack("<II", version, meas.ndims)]
    for sh in meas.shifts:
        out.append(struct.pack("<5I", sh.N, sh.s, meas.K, MODES[sh.mode], sh.stride))
        if version == 2:
            out.append(struct.pack("<I", meas.freq_step))
        out.append(struct.pack(f"<I{len(sh)}I", len(sh), *sh.offsets.tolist()))
    out.append(np.asarray(meas.values, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(out))


def read_measurements(path) -> MeasurementSet:
    data = Path(path).read_bytes()
    r = _Reader(data, "PTYM")
    if r.take(4) != MEAS_MAGIC:
        raise FormatError("bad magic, not a PTYM file")
    version = r.u32()
    if version not in (1, 2):
        raise FormatError(f"unsupported PTYM version {version}")
    ndims = r.u32()
    if ndims not in (1, 2):
        raise FormatError(f"bad PTYM dimension count {ndims}")
    shifts, Ks, steps = [], [], []
    for _ in range(ndims):
        N, s, K, mode, stride = r.u32(5)
        steps.append(r.u32() if version == 2 else 1)
        count = r.u32()
        offsets = np.array(r.u32s(count), dtype=np.int64)
        if mode not in MODE_NAMES:
            raise FormatError(f"bad shift mode code {mode}")
        try:
            shifts.append(ShiftSet(N=N, s=s, stride=stride, mode=MODE_NAMES[mode], offsets=offsets))
        except ValueError as exc:
            raise FormatError(f"bad geometry: {exc}") from None
        Ks.append(K)
    if len(set(Ks)) != 1 or len(set(steps)) != 1:
        raise FormatError("per-dimension K and frequency stride must agree")
    expected = int(np.prod([len(sh) * (Ks[0] + 1) for sh in shifts]))
    remaining = (len(data) - r.pos) // 8
    if remaining != expected or (len(data) - r.pos) % 8:
        raise FormatError(f"value count mismatch: geometry needs {expected}, file has {remaining}")
    vals = r.f64(expected)
    return MeasurementSet(K=Ks[0], shifts=tuple(shifts), values=vals, freq_step=steps[0])


# ---------------------------------------------------------------------------
# images
# ---------------------------------------------------------------------------

def export_pgm(grid, which: str, path) -> None:
    """16-bit binary PGM; amplitude maps [0, 1] and phase maps [-pi, pi] linearly."""
    arr = np.asarray(grid)
    if arr.ndim != 2:
        raise ValueError("PGM export needs a 2D grid")
    if which == "amplitude":
        x = np.clip(np.abs(arr), 0.0, 1.0)
    elif which == "phase":
        x = (np.angle(arr) + np.pi) / (2 * np.pi)
    else:
        raise ValueError(f"which must be 'amplitude' or 'phase', got {which!r}")
    pix = np.floor(x * 65535 + 0.5).astype(">u2")
    h, w = arr.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n65535\n".encode("ascii") + pix.tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise FormatError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(parts[4], dtype=dtype).reshape(h, w)
