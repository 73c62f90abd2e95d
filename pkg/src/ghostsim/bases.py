"""Illumination-pattern sets.

Canonical (one-hot raster) and Hadamard generators, filter-modified variants
of either, and the split of a multi-level pattern into weighted binary parts
that a two-state amplitude modulator can actually project.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard as _sylvester_hadamard

from .core import GridSpec, Kernel, _require_fits
from .errors import DimensionError, UnsupportedSizeError

__all__ = [
    "CANONICAL",
    "HADAMARD",
    "PatternBasis",
    "SubPatternSet",
    "canonical_basis",
    "hadamard_basis",
    "modify_basis",
    "binary_decompose",
    "decompose_basis",
    "projection_count",
]

CANONICAL = "canonical"
HADAMARD = "hadamard"


@dataclass(frozen=True, eq=False)
class PatternBasis:
    """Ordered, complete set of ``side**2`` patterns sharing one grid.

    ``stack`` has shape ``(pixel_count, side, side)``; pattern ``j`` is
    ``stack[j]``.  The stack is frozen after construction so bases can be
    shared between threads.
    """

    grid: GridSpec
    stack: np.ndarray
    label: str

    def __post_init__(self):
        stack = np.asarray(self.stack)
        n = self.grid.side
        expected = (self.grid.pixel_count, n, n)
        if stack.shape != expected:
            raise DimensionError(
                f"basis stack must have shape {expected}, got {stack.shape}"
            )
        if not np.all(np.isfinite(stack)):
            raise DimensionError("basis patterns must be finite")
        stack.setflags(write=False)
        object.__setattr__(self, "stack", stack)

    def __len__(self) -> int:
        return self.stack.shape[0]

    def __iter__(self):
        return iter(self.stack)

    def pattern(self, index: int) -> np.ndarray:
        return self.stack[index]


def canonical_basis(grid: GridSpec) -> PatternBasis:
    """One-hot pattern per pixel, ordered by flattened index."""
    m, n = grid.pixel_count, grid.side
    stack = np.eye(m, dtype=np.int8).reshape(m, n, n)
    return PatternBasis(grid, stack, CANONICAL)


def hadamard_basis(grid: GridSpec) -> PatternBasis:
    """Rows of the Sylvester-ordered Hadamard matrix of side ``side**2``,
    reshaped row-major; entries are exactly +/-1."""
    n = grid.side
    if n & (n - 1) != 0:
        raise UnsupportedSizeError(
            f"Hadamard basis needs a power-of-two grid side, got {n}"
        )
    h = _sylvester_hadamard(grid.pixel_count, dtype=np.int8)
    return PatternBasis(grid, h.reshape(grid.pixel_count, n, n), HADAMARD)


def modify_basis(basis: PatternBasis, kernel: Kernel) -> PatternBasis:
    """Cyclically convolve every pattern with ``kernel``.

    Pattern order is preserved and the label records parentage, so a
    modified basis can always be traced back to the set used for
    reconstruction.
    """
    _require_fits(kernel, basis.grid.side)
    out = np.zeros(basis.stack.shape, dtype=float)
    for dr, dc, v in kernel.offsets():
        out += v * np.roll(basis.stack, (dr, dc), axis=(1, 2))
    label = f"modified({basis.label},{kernel.name or 'custom'})"
    return PatternBasis(basis.grid, out, label)


@dataclass(frozen=True, eq=False)
class SubPatternSet:
    """Binary split of one multi-level pattern.

    ``parts`` holds ``(binary image with entries in {0, 1}, weight)`` pairs;
    the weighted sum of the parts reproduces the parent pattern exactly, one
    part per distinct nonzero level.
    """

    parent_index: int
    parts: tuple[tuple[np.ndarray, float], ...]

    @property
    def part_count(self) -> int:
        return len(self.parts)

    def recombine(self) -> np.ndarray:
        total = np.zeros(self.parts[0][0].shape, dtype=float)
        for part, weight in self.parts:
            total += weight * part
        return total


def binary_decompose(pattern, parent_index: int = 0) -> SubPatternSet:
    """Split a pattern into weighted binary parts, one per distinct nonzero
    value (descending), so each part is projectable by a binary modulator.

    An all-zero pattern yields a single all-zero part with weight 0.
    """
    img = np.asarray(pattern, dtype=float)
    if img.ndim != 2:
        raise DimensionError(f"pattern must be 2-D, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DimensionError("pattern values must be finite")
    levels = np.unique(img)
    levels = levels[levels != 0.0]
    if levels.size == 0:
        part = np.zeros(img.shape, dtype=np.uint8)
        part.setflags(write=False)
        parts = ((part, 0.0),)
    else:
        built = []
        for level in levels[::-1]:  # descending: positive parts first
            part = (img == level).astype(np.uint8)
            part.setflags(write=False)
            built.append((part, float(level)))
        parts = tuple(built)
    return SubPatternSet(parent_index, parts)


def decompose_basis(basis: PatternBasis) -> list[SubPatternSet]:
    """Decompose every pattern of a basis, preserving order."""
    return [binary_decompose(basis.pattern(j), j) for j in range(len(basis))]


def projection_count(basis: PatternBasis, repeats_per_pattern: int) -> int:
    """Total binary frames needed to project the whole basis.

    Each pattern costs ``max(number of binary parts, repeats_per_pattern)``
    frames: multi-level patterns need one frame per part, while already-binary
    patterns are repeated so both acquisition styles consume the same frame
    budget.
    """
    if repeats_per_pattern < 1:
        raise ValueError("repeats_per_pattern must be >= 1")
    total = 0
    for pat in basis:
        vals = np.unique(np.asarray(pat, dtype=float))
        n_parts = max(1, int(np.count_nonzero(vals)))
        total += max(n_parts, repeats_per_pattern)
    return total
