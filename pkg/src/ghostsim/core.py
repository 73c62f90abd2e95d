"""Square-grid images, cyclic stencil filtering, and the dense operator form.

An image is a square 2-D float array; its flattened form is the row-major
vector of length ``side**2``.  All filtering wraps indices at the grid edges,
so a stencil and its dense matrix form agree exactly everywhere with no
boundary special cases, and the matrix is block-circulant with circulant
blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DimensionError, NormalizationError

__all__ = [
    "GridSpec",
    "Kernel",
    "edge_detect_kernel",
    "identity_kernel",
    "kernel_preset",
    "KERNEL_PRESETS",
    "flatten",
    "unflatten",
    "cyclic_convolve",
    "cyclic_correlate",
    "build_operator_matrix",
    "filter_energy",
    "kernel_autocorrelation",
]


@dataclass(frozen=True)
class GridSpec:
    """Square pixel grid with ``side`` pixels per edge."""

    side: int

    def __post_init__(self):
        side = self.side
        if isinstance(side, bool) or not isinstance(side, (int, np.integer)):
            raise DimensionError(f"grid side must be an integer, got {side!r}")
        if side < 1:
            raise DimensionError(f"grid side must be at least 1, got {side}")
        object.__setattr__(self, "side", int(side))

    @property
    def pixel_count(self) -> int:
        return self.side * self.side


@dataclass(frozen=True, eq=False)
class Kernel:
    """Small odd-sized real stencil with its centre tap at ((h-1)/2, (w-1)/2)."""

    taps: np.ndarray
    name: str | None = None

    def __post_init__(self):
        taps = np.array(self.taps, dtype=float)
        if taps.ndim != 2:
            raise DimensionError(f"kernel taps must be 2-D, got shape {taps.shape}")
        h, w = taps.shape
        if h % 2 == 0 or w % 2 == 0:
            raise DimensionError(f"kernel dimensions must be odd, got {h}x{w}")
        if not np.all(np.isfinite(taps)):
            raise DimensionError("kernel taps must all be finite")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    @property
    def height(self) -> int:
        return self.taps.shape[0]

    @property
    def width(self) -> int:
        return self.taps.shape[1]

    def offsets(self) -> Iterator[tuple[int, int, float]]:
        """Yield ``(row_offset, col_offset, tap)`` for every nonzero tap.

        Offsets are relative to the centre tap, in fixed row-major order so
        accumulation is deterministic.
        """
        ch = (self.height - 1) // 2
        cw = (self.width - 1) // 2
        for i in range(self.height):
            for j in range(self.width):
                v = self.taps[i, j]
                if v != 0.0:
                    yield i - ch, j - cw, float(v)

    def rotated(self) -> "Kernel":
        """180-degree rotation; correlating with a kernel equals convolving with its rotation."""
        return Kernel(self.taps[::-1, ::-1])

    def __eq__(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        return self.name == other.name and np.array_equal(self.taps, other.taps)

    def __repr__(self):
        return f"Kernel(name={self.name!r}, shape={self.height}x{self.width})"


def edge_detect_kernel() -> Kernel:
    """Cross-shaped edge stencil: the sum of vertical and horizontal central differences."""
    return Kernel([[0, -1, 0], [-1, 0, 1], [0, 1, 0]], name="edge-eq3")


def identity_kernel() -> Kernel:
    """1x1 unit stencil; filtering with it is a no-op."""
    return Kernel([[1.0]], name="identity")


KERNEL_PRESETS = {
    "edge-eq3": edge_detect_kernel,
    "identity": identity_kernel,
}


def kernel_preset(name: str) -> Kernel:
    try:
        return KERNEL_PRESETS[name]()
    except KeyError:
        known = ", ".join(sorted(KERNEL_PRESETS))
        raise KeyError(f"unknown kernel preset {name!r}; known presets: {known}") from None


def _as_square(image) -> np.ndarray:
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"expected a square 2-D image, got shape {arr.shape}")
    return arr


def _require_fits(kernel: Kernel, side: int):
    if kernel.height > side or kernel.width > side:
        raise DimensionError(
            f"kernel {kernel.height}x{kernel.width} does not fit a {side}x{side} grid"
        )


def flatten(image) -> np.ndarray:
    """Row-major vector of a square image."""
    return _as_square(image).reshape(-1)


def unflatten(vector, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`flatten`; exact round-trip."""
    vec = np.asarray(vector, dtype=float)
    if vec.ndim != 1 or vec.size != grid.pixel_count:
        raise DimensionError(
            f"expected {grid.pixel_count} values for a {grid.side}x{grid.side} grid, "
            f"got shape {vec.shape}"
        )
    return vec.reshape(grid.side, grid.side)


def cyclic_convolve(image, kernel: Kernel) -> np.ndarray:
    """Convolve an image with a stencil, wrapping indices at the grid edges.

    ``out[p] = sum_q K[q] * image[(p - q) mod side]`` with ``q`` running over
    the kernel support centred on zero (true convolution: the kernel is
    flipped relative to correlation).
    """
    img = _as_square(image)
    _require_fits(kernel, img.shape[0])
    out = np.zeros_like(img)
    for dr, dc, v in kernel.offsets():
        out += v * np.roll(img, (dr, dc), axis=(0, 1))
    return out


def cyclic_correlate(image, kernel: Kernel) -> np.ndarray:
    """Cyclic correlation: ``out[p] = sum_q K[q] * image[(p + q) mod side]``.

    Equals :func:`cyclic_convolve` with the 180-degree-rotated kernel; both
    orientations are needed because the dense operator and its transpose
    differ by exactly this rotation.
    """
    img = _as_square(image)
    _require_fits(kernel, img.shape[0])
    out = np.zeros_like(img)
    for dr, dc, v in kernel.offsets():
        out += v * np.roll(img, (-dr, -dc), axis=(0, 1))
    return out


def build_operator_matrix(kernel: Kernel, grid: GridSpec) -> np.ndarray:
    """Dense ``side**2 x side**2`` matrix applying :func:`cyclic_convolve`.

    For every image ``x``: ``unflatten(B @ flatten(x)) == cyclic_convolve(x,
    kernel)``.  Intended as an equivalence oracle; the stencil path is the
    one to use in pipelines (dense storage is only reasonable up to side 64).
    """
    n = grid.side
    _require_fits(kernel, n)
    m = grid.pixel_count
    op = np.zeros((m, m))
    src = np.arange(m)
    rows = src // n
    cols = src % n
    for dr, dc, v in kernel.offsets():
        dest = ((rows + dr) % n) * n + (cols + dc) % n
        # column j holds the flattened convolution of the one-hot image at j
        op[dest, src] += v
    return op


def filter_energy(kernel: Kernel) -> float:
    """Sum of squared taps; white noise passed through the stencil has its
    standard deviation amplified by the square root of this."""
    return float(np.sum(kernel.taps * kernel.taps))


def kernel_autocorrelation(kernel: Kernel) -> dict[tuple[int, int], float]:
    """Normalized tap autocorrelation ``R[l] = sum_q K[q] K[q+l] / energy``.

    Covers every lag in the ``(2h-1) x (2w-1)`` window (zero-valued lags
    included) with ``R[(0, 0)] == 1``.  This is the autocorrelation the
    stencil imprints on white noise it filters.
    """
    t = kernel.taps
    h, w = t.shape

    def overlap(dr: int, dc: int) -> float:
        acc = 0.0
        for i in range(max(0, -dr), min(h, h - dr)):
            for j in range(max(0, -dc), min(w, w - dc)):
                acc += t[i, j] * t[i + dr, j + dc]
        return acc

    # normalize by the zero-lag overlap (the filter energy, accumulated the
    # same way) so the zero-lag entry is exactly 1
    energy = overlap(0, 0)
    if energy == 0.0:
        raise NormalizationError("autocorrelation is undefined for an all-zero kernel")
    return {
        (dr, dc): overlap(dr, dc) / energy
        for dr in range(-(h - 1), h)
        for dc in range(-(w - 1), w)
    }
