"""Sampled functions on regular grids in one and two dimensions.

All L2 quantities use Riemann-sum weighting with the cell volume ``spacing**dim``
and convolutions are circular (periodic boundary). Signals are expected to be
concentrated in the central half of the grid so that wrap-around is negligible.

Discrete Fourier convention: ``fft_samples = scipy.fft.fftn(samples)``
(unnormalized). With it, Parseval reads

    l2_norm(f)**2 == spacing**dim / N * sum(|fft_samples|**2)

where ``N`` is the total number of samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.fft as sfft

__all__ = [
    "Grid",
    "Signal",
    "l2_norm",
    "l1_norm",
    "sup_norm_samples",
    "fft_convolve",
    "subsample",
    "japanese_bracket",
    "delta",
    "fourier_multiplier",
    "save_signal",
    "load_signal",
    "read_pgm",
    "write_pgm",
]

MAGIC = b"SCS1"
HEADER = struct.Struct("<4sIIId8x")


def _is_power_of_two(n: int) -> bool:
    return n >= 2 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Regular isotropic grid centered at the origin.

    Sample ``i`` along an axis sits at ``origin + i * spacing`` with
    ``origin = -extent * spacing / 2``.
    """

    dim: int
    extent: tuple[int, ...]
    spacing: float

    def __post_init__(self):
        extent = tuple(int(n) for n in np.atleast_1d(self.extent))
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "spacing", float(self.spacing))
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(extent) != self.dim:
            raise ValueError(f"expected {self.dim} extents, got {extent}")
        for n in extent:
            if not _is_power_of_two(n):
                raise ValueError(f"extent must be a power of two >= 2, got {n}")
        if not (self.spacing > 0 and np.isfinite(self.spacing)):
            raise ValueError(f"spacing must be positive, got {self.spacing}")

    @classmethod
    def regular(cls, dim: int, n: int, length: float) -> "Grid":
        """Grid with ``n`` samples per axis covering ``[-length/2, length/2)``."""
        return cls(dim, (n,) * dim, length / n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.extent

    @property
    def size(self) -> int:
        return int(np.prod(self.extent))

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def origin(self) -> tuple[float, ...]:
        return tuple(-n * self.spacing / 2 for n in self.extent)

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(n * self.spacing for n in self.extent)

    def axis(self, k: int) -> np.ndarray:
        n = self.extent[k]
        return self.origin[k] + np.arange(n) * self.spacing

    def points(self) -> np.ndarray:
        """Sample coordinates as an array of shape ``extent + (dim,)``."""
        axes = np.meshgrid(*(self.axis(k) for k in range(self.dim)), indexing="ij")
        return np.stack(axes, axis=-1)

    def frequencies(self) -> np.ndarray:
        """DFT bin frequencies (cycles per unit length), shape ``extent + (dim,)``."""
        axes = np.meshgrid(
            *(sfft.fftfreq(n, d=self.spacing) for n in self.extent), indexing="ij"
        )
        return np.stack(axes, axis=-1)

    def refined(self, factor: int) -> "Grid":
        """Same physical window sampled ``factor`` times more densely."""
        return Grid(self.dim, tuple(n * factor for n in self.extent), self.spacing / factor)

    def decimated(self, factor: int) -> "Grid":
        for n in self.extent:
            if n % factor:
                raise ValueError(f"factor {factor} does not divide extent {self.extent}")
        return Grid(self.dim, tuple(n // factor for n in self.extent), self.spacing)

    @property
    def nyquist(self) -> float:
        return 0.5 / self.spacing


@dataclass(frozen=True, eq=False)
class Signal:
    """Complex samples of a function on a :class:`Grid`. Immutable."""

    grid: Grid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128)
        if samples.shape != self.grid.shape:
            if samples.size != self.grid.size:
                raise ValueError(
                    f"{samples.size} samples do not match grid of shape {self.grid.shape}"
                )
            samples = samples.reshape(self.grid.shape)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zeros(cls, grid: Grid) -> "Signal":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Signal":
        """Sample ``func(points)`` where points has shape ``extent + (dim,)``."""
        return cls(grid, func(grid.points()))

    def with_samples(self, samples) -> "Signal":
        return Signal(self.grid, samples)

    def __add__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.grid, self.samples + other.samples)

    def __sub__(self, other: "Signal") -> "Signal":
        _check_same_grid(self, other)
        return Signal(self.grid, self.samples - other.samples)

    def __mul__(self, scalar) -> "Signal":
        return Signal(self.grid, self.samples * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Signal":
        return Signal(self.grid, -self.samples)

    def fft(self) -> np.ndarray:
        return sfft.fftn(self.samples)


def _check_same_grid(f: Signal, g: Signal):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def l2_norm(f: Signal) -> float:
    """Riemann-sum L2 norm ``(spacing**d * sum |f_i|**2) ** 0.5``."""
    s = f.samples
    return float(np.sqrt(f.grid.cell_volume * np.vdot(s, s).real))


def l1_norm(f: Signal) -> float:
    return float(f.grid.cell_volume * np.abs(f.samples).sum())


def sup_norm_samples(f: Signal) -> float:
    return float(np.abs(f.samples).max())


def fourier_multiplier(g: Signal) -> np.ndarray:
    """Transfer function of convolution with ``g`` on its grid.

    ``spacing**d * DFT(g)`` with ``g`` re-centered so its origin sample sits at
    index 0; approximates the continuous Fourier transform of ``g`` at the DFT
    bin frequencies.
    """
    return g.grid.cell_volume * sfft.fftn(sfft.ifftshift(g.samples))


def fft_convolve(f: Signal, g: Signal) -> Signal:
    """Circular convolution approximating ``(f * g)(x) = int f(y) g(x - y) dy``.

    Output sample ``k`` is the approximation at the grid coordinate of ``k``.
    """
    _check_same_grid(f, g)
    out = sfft.ifftn(sfft.fftn(f.samples) * fourier_multiplier(g))
    return Signal(f.grid, out)


def subsample(f: Signal, factor: int) -> Signal:
    """Dilation ``x -> factor**(d/2) * f(factor * x)`` realized by decimation.

    Keeps every ``factor``-th sample (the origin sample is kept), scales by
    ``factor**(d/2)`` and keeps the spacing, so the output grid covers a
    window ``factor`` times smaller. For signals constant on blocks of
    ``factor`` samples the L2 norm is preserved exactly.
    """
    factor = int(factor)
    if factor < 1:
        raise ValueError(f"sub-sampling factor must be >= 1, got {factor}")
    if factor == 1:
        return f
    out_grid = f.grid.decimated(factor)
    index = tuple(slice(None, None, factor) for _ in range(f.grid.dim))
    scale = factor ** (f.grid.dim / 2)
    return Signal(out_grid, f.samples[index] * scale)


def japanese_bracket(x) -> np.ndarray | float:
    """``(1 + |x|**2) ** 0.5`` over the last axis of ``x``; scalars are 1-d points."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return float(np.sqrt(1.0 + x * x))
    out = np.sqrt(1.0 + np.sum(x * x, axis=-1))
    return float(out) if out.ndim == 0 else out


def delta(grid: Grid) -> Signal:
    """Discrete Dirac of mass ``spacing**-d`` at the origin sample."""
    samples = np.zeros(grid.shape, dtype=np.complex128)
    samples[tuple(n // 2 for n in grid.extent)] = 1.0 / grid.cell_volume
    return Signal(grid, samples)


# --------------------------------------------------------------------- I/O


def save_signal(f: Signal, path) -> None:
    """Write the ``SCS1`` raw format.

    32-byte little-endian header: magic ``b"SCS1"``, ``dim`` (u32), two extents
    (u32; the second is 1 for 1-d signals), spacing (f64), 8 reserved zero
    bytes. Then ``(re, im)`` float64 pairs in row-major order.
    """
    extent = f.grid.extent + (1,) * (2 - f.grid.dim)
    header = HEADER.pack(MAGIC, f.grid.dim, extent[0], extent[1], f.grid.spacing)
    body = np.ascontiguousarray(f.samples, dtype="<c16").tobytes()
    Path(path).write_bytes(header + body)


def load_signal(path) -> Signal:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, dim, n0, n1, spacing = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    extent = (n0,) if dim == 1 else (n0, n1)
    grid = Grid(dim, extent, spacing)
    body = data[HEADER.size:]
    if len(body) != 16 * grid.size:
        raise ValueError(f"{path}: expected {16 * grid.size} payload bytes, got {len(body)}")
    samples = np.frombuffer(body, dtype="<c16").reshape(grid.shape)
    return Signal(grid, samples)


def _pgm_tokens(data: bytes, count: int):
    tokens, pos = [], 2
    while len(tokens) < count:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            while data[pos:pos + 1] not in (b"\n", b"\r", b""):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(int(data[start:pos]))
    # exactly one whitespace byte separates maxval from the raster
    return tokens, pos + 1


def read_pgm(path) -> Signal:
    """Read a binary 8-bit PGM (P5) as a real signal ``v / 255`` on a unit grid.

    Images whose sides are not powers of two are zero-padded symmetrically to
    the next power of two.
    """
    data = Path(path).read_bytes()
    if data[:2] != b"P5":
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    (width, height, maxval), offset = _pgm_tokens(data, 3)
    if maxval > 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval={maxval})")
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=offset)
    image = raster.reshape(height, width).astype(float) / 255.0
    shape = tuple(max(2, 1 << (n - 1).bit_length()) for n in image.shape)
    pad = [((m - n) // 2, m - n - (m - n) // 2) for n, m in zip(image.shape, shape)]
    image = np.pad(image, pad)
    return Signal(Grid(2, shape, 1.0), image)


def write_pgm(f: Signal, path, vmin: float | None = None, vmax: float | None = None) -> None:
    """Render the real part of a 2-d signal as an 8-bit PGM, linearly mapped to [0, 255]."""
    if f.grid.dim != 2:
        raise ValueError("PGM export needs a 2-d signal")
    values = f.samples.real
    lo = values.min() if vmin is None else vmin
    hi = values.max() if vmax is None else vmax
    scaled = np.zeros_like(values) if hi <= lo else (values - lo) / (hi - lo)
    raster = np.clip(np.rint(scaled * 255), 0, 255).astype(np.uint8)
    height, width = raster.shape
    Path(path).write_bytes(f"P5\n{width} {height}\n255\n".encode() + raster.tobytes())
