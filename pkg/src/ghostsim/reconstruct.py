"""Rebuilding images from coefficient streams, and the two filter routes.

The measured weight of each pattern multiplies that pattern in the
reconstruction sum; for the canonical basis this reduces to a reshape of the
coefficient vector.  Reconstruction always uses the *parent* (unmodified)
basis, also when the coefficients were acquired with a filter-modified
illumination set: that is exactly what makes the modified-basis route return
the filtered image directly.

``post_processed_image`` and ``basis_processed_image`` run the full
acquire-and-rebuild pipelines and return images that, in the noiseless
limit, are equal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bases import (
    CANONICAL,
    HADAMARD,
    PatternBasis,
    canonical_basis,
    decompose_basis,
    modify_basis,
)
from .bench import (
    BASIS_PROCESSED,
    POST_PROCESSED,
    CoefficientRecord,
    NoiseModel,
    ProtocolConfig,
    run_basis_protocol,
    run_post_protocol,
)
from .core import GridSpec, Kernel, cyclic_correlate
from .errors import DimensionError

__all__ = [
    "ReconstructionResult",
    "reconstruct",
    "post_process",
    "hadamard_inverse_scale",
    "post_processed_image",
    "basis_processed_image",
]


def reconstruct(coefficients, recon_basis: PatternBasis) -> np.ndarray:
    """Sum of ``coefficient_j * pattern_j`` over the reconstruction basis.

    ``coefficients`` is either a sequence of :class:`CoefficientRecord` (each
    pattern index must appear exactly once) or a plain vector ordered by
    pattern index.
    """
    m = len(recon_basis)
    if len(coefficients) and isinstance(coefficients[0], CoefficientRecord):
        vec = np.zeros(m)
        seen = np.zeros(m, dtype=bool)
        for rec in coefficients:
            j = rec.pattern_index
            if not 0 <= j < m:
                raise DimensionError(f"pattern index {j} outside basis of size {m}")
            if seen[j]:
                raise DimensionError(f"duplicate coefficient for pattern {j}")
            seen[j] = True
            vec[j] = rec.coefficient
        if not seen.all():
            raise DimensionError(
                f"coefficient stream covers {int(seen.sum())} of {m} patterns"
            )
    else:
        vec = np.asarray(coefficients, dtype=float)
        if vec.shape != (m,):
            raise DimensionError(
                f"expected {m} coefficients, got shape {vec.shape}"
            )
    return np.tensordot(vec, recon_basis.stack, axes=(0, 0))


def post_process(image, kernel: Kernel) -> np.ndarray:
    """Apply the filter to an already-reconstructed image.

    Uses cyclic correlation because measuring with a convolution-modified
    basis makes the effective object the *correlation* of the original with
    the kernel; matching the orientation keeps the two routes comparable (for
    symmetric kernels the two orientations coincide anyway).
    """
    return cyclic_correlate(image, kernel)


def hadamard_inverse_scale(image, grid: GridSpec) -> np.ndarray:
    """Divide by ``side**2`` to undo the Hadamard completeness factor, making
    Hadamard reconstructions directly comparable to canonical ones."""
    img = np.asarray(image, dtype=float)
    if img.shape != (grid.side, grid.side):
        raise DimensionError(
            f"expected a {grid.side}x{grid.side} image, got shape {img.shape}"
        )
    return img / grid.pixel_count


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """A rebuilt image tagged with how it was produced.

    ``provenance`` is ``(basis label, kernel name, noise seed)``.
    """

    image: np.ndarray
    method: str
    provenance: tuple[str, str, int]


def _grid_of(obj: np.ndarray) -> GridSpec:
    if obj.ndim != 2 or obj.shape[0] != obj.shape[1]:
        raise DimensionError(f"object must be a square 2-D image, got {obj.shape}")
    return GridSpec(obj.shape[0])


def _rebuild(records, parent: PatternBasis) -> np.ndarray:
    raw = reconstruct(records, parent)
    if parent.label == HADAMARD:
        raw = hadamard_inverse_scale(raw, parent.grid)
    return raw


def post_processed_image(obj, kernel: Kernel, noise: NoiseModel,
                         protocol: ProtocolConfig,
                         parent: PatternBasis | None = None) -> ReconstructionResult:
    """Measure in the plain basis, reconstruct, then filter the image.

    Canonical (binary) bases are acquired with the repeat protocol; a
    Hadamard parent is acquired through its binary sub-patterns, which costs
    the same number of frames per +/-1 pattern.
    """
    o = np.asarray(obj, dtype=float)
    grid = _grid_of(o)
    if parent is None:
        parent = canonical_basis(grid)
    if parent.label == CANONICAL:
        records = run_post_protocol(o, parent, noise, protocol)
    else:
        records = run_basis_protocol(o, decompose_basis(parent), noise, protocol)
    image = post_process(_rebuild(records, parent), kernel)
    return ReconstructionResult(
        image, POST_PROCESSED, (parent.label, kernel.name or "custom", noise.seed)
    )


def basis_processed_image(obj, kernel: Kernel, noise: NoiseModel,
                          protocol: ProtocolConfig,
                          parent: PatternBasis | None = None,
                          decomposed=None) -> ReconstructionResult:
    """Measure with the filter-modified basis; the reconstruction in the
    parent basis is already the filtered image.

    ``decomposed`` may carry a precomputed
    ``decompose_basis(modify_basis(parent, kernel))`` so sweeps do not rebuild
    the modified patterns for every run.
    """
    o = np.asarray(obj, dtype=float)
    grid = _grid_of(o)
    if parent is None:
        parent = canonical_basis(grid)
    if decomposed is None:
        decomposed = decompose_basis(modify_basis(parent, kernel))
    records = run_basis_protocol(o, decomposed, noise, protocol)
    image = _rebuild(records, parent)
    return ReconstructionResult(
        image, BASIS_PROCESSED, (parent.label, kernel.name or "custom", noise.seed)
    )
