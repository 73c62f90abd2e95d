"""Image-quality metrics and the SNR-versus-integration-time comparison.

SNR is the peak-to-background contrast divided by the background spread,
``(peak_mean - background_mean) / background_std`` with the population
standard deviation.  The peak region is picked from the largest absolute
values of a noiseless reference (filtered images are signed, and edges of
both polarities are signal), so the sweep scores the magnitude of each
reconstruction against masks fixed once per sweep.

``noise_autocorrelation`` measures whether reconstruction noise is white or
carries the filter's correlation structure; ``predicted_amplification`` is
the matching model prediction from the kernel alone.
"""

from __future__ import annotations

import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .bases import PatternBasis, canonical_basis, decompose_basis, modify_basis
from .bench import (
    BASIS_PROCESSED,
    METHODS,
    POST_PROCESSED,
    NoiseModel,
    ProtocolConfig,
)
from .core import GridSpec, Kernel, cyclic_correlate, filter_energy
from .errors import (
    DegenerateBackgroundError,
    DimensionError,
    MaskError,
    NormalizationError,
)
from .pgmio import atomic_write_text
from .reconstruct import ReconstructionResult, basis_processed_image, post_processed_image

__all__ = [
    "RegionMask",
    "SNRReport",
    "SweepRow",
    "SweepCell",
    "SweepSummary",
    "select_peak_mask",
    "select_background_mask",
    "mask_from_rect",
    "compute_snr",
    "predicted_amplification",
    "noise_autocorrelation",
    "derive_seed",
    "sweep_cells",
    "snr_sweep",
    "summarize_sweep",
    "write_sweep_csv",
    "write_summary_csv",
]

PEAK = "peak"
BACKGROUND = "background"


@dataclass(frozen=True, eq=False)
class RegionMask:
    """A set of pixels (sorted flat indices) playing the peak or background role."""

    grid: GridSpec
    indices: np.ndarray
    role: str

    def __post_init__(self):
        idx = np.unique(np.asarray(self.indices, dtype=np.int64))
        if idx.size == 0:
            raise MaskError(f"{self.role} mask is empty")
        if idx[0] < 0 or idx[-1] >= self.grid.pixel_count:
            raise MaskError(f"{self.role} mask has indices outside the grid")
        if self.role not in (PEAK, BACKGROUND):
            raise MaskError(f"mask role must be {PEAK!r} or {BACKGROUND!r}")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return int(self.indices.size)


@dataclass(frozen=True)
class SNRReport:
    peak_mean: float
    background_mean: float
    background_std: float
    snr: float


@dataclass(frozen=True)
class SweepRow:
    method: str
    integration_time_ms: float
    repeat: int
    snr: float


@dataclass(frozen=True, eq=False)
class SweepCell:
    """One sweep cell: the reconstruction and its score."""

    method: str
    integration_time_ms: float
    repeat: int
    result: ReconstructionResult
    report: SNRReport


@dataclass(frozen=True)
class SweepSummary:
    method: str
    integration_time_ms: float
    mean_snr: float
    std_snr: float


def _candidates(reference: np.ndarray, border: int) -> np.ndarray:
    n = reference.shape[0]
    if border < 0:
        raise MaskError("border must be >= 0")
    if 2 * border >= n:
        raise MaskError(f"border {border} leaves no candidate pixels on side {n}")
    keep = np.zeros((n, n), dtype=bool)
    keep[border:n - border, border:n - border] = True
    return np.flatnonzero(keep.ravel())


def select_peak_mask(reference, fraction: float, border: int = 0) -> RegionMask:
    """Pixels with the top ``fraction`` of absolute values, borders excluded.

    Ties break by ascending flattened index, so identical references always
    give identical masks.
    """
    ref = np.asarray(reference, dtype=float)
    if ref.ndim != 2 or ref.shape[0] != ref.shape[1]:
        raise DimensionError(f"reference must be a square image, got {ref.shape}")
    if not 0 < fraction < 1:
        raise MaskError(f"fraction must be in (0, 1), got {fraction}")
    cand = _candidates(ref, border)
    k = int(np.ceil(fraction * cand.size))
    if k == 0:
        raise MaskError("fraction selects zero pixels")
    mag = np.abs(ref.ravel()[cand])
    order = np.argsort(-mag, kind="stable")
    return RegionMask(GridSpec(ref.shape[0]), cand[order[:k]], PEAK)


def select_background_mask(reference, fraction: float, border: int = 0,
                           exclude=None) -> RegionMask:
    """Pixels with the bottom ``fraction`` of absolute values: the flattest
    region of the reference, disjoint from ``exclude`` if given."""
    ref = np.asarray(reference, dtype=float)
    if ref.ndim != 2 or ref.shape[0] != ref.shape[1]:
        raise DimensionError(f"reference must be a square image, got {ref.shape}")
    if not 0 < fraction < 1:
        raise MaskError(f"fraction must be in (0, 1), got {fraction}")
    cand = _candidates(ref, border)
    if exclude is not None:
        cand = np.setdiff1d(cand, np.asarray(exclude, dtype=np.int64))
    if cand.size == 0:
        raise MaskError("no candidate pixels left for the background mask")
    k = int(np.ceil(fraction * cand.size))
    mag = np.abs(ref.ravel()[cand])
    order = np.argsort(mag, kind="stable")
    return RegionMask(GridSpec(ref.shape[0]), cand[order[:k]], BACKGROUND)


def mask_from_rect(grid: GridSpec, rect: tuple[int, int, int, int],
                   role: str = BACKGROUND) -> RegionMask:
    """Mask covering the rectangle ``(row0, col0, height, width)``."""
    r0, c0, h, w = rect
    n = grid.side
    if h < 1 or w < 1 or r0 < 0 or c0 < 0 or r0 + h > n or c0 + w > n:
        raise MaskError(f"rectangle {rect} does not fit a {n}x{n} grid")
    rows = np.arange(r0, r0 + h)
    cols = np.arange(c0, c0 + w)
    idx = (rows[:, None] * n + cols[None, :]).ravel()
    return RegionMask(grid, idx, role)


def compute_snr(image, peak: RegionMask, background: RegionMask) -> SNRReport:
    """Contrast-over-spread score of an image for a fixed mask pair.

    ``snr = (mean over peak - mean over background) / population std over
    background``; raises if the background has zero spread.
    """
    img = np.asarray(image, dtype=float)
    if img.shape != (peak.grid.side, peak.grid.side):
        raise DimensionError(
            f"image shape {img.shape} does not match mask grid {peak.grid.side}"
        )
    if peak.grid != background.grid:
        raise MaskError("peak and background masks live on different grids")
    if np.intersect1d(peak.indices, background.indices).size:
        raise MaskError("peak and background masks overlap")
    vals = img.ravel()
    peak_mean = float(vals[peak.indices].mean())
    bg = vals[background.indices]
    background_mean = float(bg.mean())
    background_std = float(bg.std())
    if background_std == 0.0:
        raise DegenerateBackgroundError(
            "background region is constant; SNR is undefined"
        )
    return SNRReport(peak_mean, background_mean, background_std,
                     (peak_mean - background_mean) / background_std)


def predicted_amplification(kernel: Kernel) -> float:
    """Predicted white-noise std amplification of the filter: sqrt of the
    filter energy."""
    return float(np.sqrt(filter_energy(kernel)))


def noise_autocorrelation(image) -> np.ndarray:
    """Cyclic normalized autocorrelation of a mean-subtracted image.

    Returns an array ``R`` with ``R[dr % n, dc % n]`` the correlation at lag
    ``(dr, dc)`` (negative lags wrap, so ``R[1, -1]`` works directly) and
    ``R[0, 0] == 1``.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise DimensionError(f"image must be 2-D, got shape {img.shape}")
    x = img - img.mean()
    power = float(np.sum(x * x))
    if power == 0.0:
        raise NormalizationError("autocorrelation is undefined for a constant image")
    spectrum = np.fft.fft2(x)
    corr = np.real(np.fft.ifft2(spectrum * np.conj(spectrum)))
    corr /= corr[0, 0]
    return corr


def derive_seed(base_seed: int, *components: int) -> int:
    """Stable 64-bit sub-seed from a base seed and integer coordinates."""
    ss = np.random.SeedSequence([int(base_seed), *(int(c) for c in components)])
    return int(ss.generate_state(1, np.uint64)[0])


def sweep_cells(obj, kernel: Kernel, noise: NoiseModel, times_ms, repeats: int,
                *, parent: PatternBasis | None = None, repeats_per_pattern: int = 2,
                peak_fraction: float = 0.1, background_fraction: float = 0.3,
                mask_border: int = 1, background_rect=None,
                threads: int = 1) -> list[SweepCell]:
    """Run both pipelines over every (integration time, repeat) cell.

    Masks are fixed once, from the noiseless filtered object: the peak from
    its top absolute values, the background from its flattest region (or from
    ``background_rect`` when configured).  Each cell runs with its own
    sub-seed derived from ``noise.seed``, so the sweep is reproducible and
    order-independent; SNR is computed on the magnitude image because the
    filtered signal is signed.
    """
    o = np.asarray(obj, dtype=float)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DimensionError(f"object must be a square image, got {o.shape}")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    times = [float(t) for t in times_ms]
    if not times:
        raise ValueError("times_ms must not be empty")
    grid = GridSpec(o.shape[0])
    if parent is None:
        parent = canonical_basis(grid)

    reference = cyclic_correlate(o, kernel)
    peak = select_peak_mask(reference, peak_fraction, mask_border)
    if background_rect is not None:
        background = mask_from_rect(grid, background_rect, BACKGROUND)
    else:
        background = select_background_mask(
            reference, background_fraction, mask_border, exclude=peak.indices
        )

    decomposed = decompose_basis(modify_basis(parent, kernel))
    specs = [
        (method, ti, rep)
        for method in METHODS
        for ti in range(len(times))
        for rep in range(repeats)
    ]

    def run_cell(spec):
        method, ti, rep = spec
        cell_noise = replace(
            noise, seed=derive_seed(noise.seed, METHODS.index(method), ti, rep)
        )
        protocol = ProtocolConfig(times[ti], repeats_per_pattern, method)
        if method == POST_PROCESSED:
            result = post_processed_image(o, kernel, cell_noise, protocol, parent)
        else:
            result = basis_processed_image(o, kernel, cell_noise, protocol,
                                           parent, decomposed)
        report = compute_snr(np.abs(result.image), peak, background)
        return SweepCell(method, times[ti], rep, result, report)

    if threads == 1:
        return [run_cell(s) for s in specs]
    workers = threads if threads > 0 else None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_cell, specs))


def snr_sweep(obj, kernel: Kernel, noise: NoiseModel, times_ms, repeats: int,
              **kwargs) -> list[SweepRow]:
    """The sweep table: one row per (method, integration time, repeat)."""
    return [
        SweepRow(c.method, c.integration_time_ms, c.repeat, c.report.snr)
        for c in sweep_cells(obj, kernel, noise, times_ms, repeats, **kwargs)
    ]


def summarize_sweep(rows: list[SweepRow]) -> list[SweepSummary]:
    """Mean and population std of SNR per (method, integration time) cell,
    in first-appearance order."""
    groups: dict[tuple[str, float], list[float]] = {}
    for row in rows:
        groups.setdefault((row.method, row.integration_time_ms), []).append(row.snr)
    return [
        SweepSummary(method, t, float(np.mean(v)), float(np.std(v)))
        for (method, t), v in groups.items()
    ]


def write_sweep_csv(rows: list[SweepRow], path):
    buf = io.StringIO()
    buf.write("method,integration_time_ms,repeat,snr\n")
    for r in rows:
        buf.write(f"{r.method},{r.integration_time_ms!r},{r.repeat},{r.snr!r}\n")
    atomic_write_text(path, buf.getvalue())


def write_summary_csv(summaries: list[SweepSummary], path):
    buf = io.StringIO()
    buf.write("method,integration_time_ms,mean_snr,std_snr\n")
    for s in summaries:
        buf.write(
            f"{s.method},{s.integration_time_ms!r},{s.mean_snr!r},{s.std_snr!r}\n"
        )
    atomic_write_text(path, buf.getvalue())
