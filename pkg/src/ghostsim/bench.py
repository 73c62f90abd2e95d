"""Virtual optical bench.

Simulates a lamp with slow deterministic drift, a binary spatial modulator,
a transmissive object, a bucket photodiode, and a normalization photodiode
that monitors the lamp.  Every detector sample picks up additive Gaussian
read noise plus a constant background, and the bucket signal is divided by
the normalization sample to cancel lamp fluctuations.

Two acquisition protocols are provided:

* the repeat protocol projects each binary pattern several times and
  averages the reads (``run_post_protocol``), and
* the weighted protocol projects the binary parts of a multi-level pattern
  once each and recombines them with their weights (``run_basis_protocol``).

Both share one lamp sample and one normalization read per pattern, so a
coefficient record always carries a single normalization value.

Signal scales linearly with the detector integration time while per-read
noise stays fixed (a read-noise-dominated detector).  Every read draws from
its own random substream keyed by ``(seed, pattern_index, read_index)``, so
coefficient streams are bit-identical regardless of evaluation order and
safe to compute in parallel.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .bases import PatternBasis, SubPatternSet
from .core import GridSpec
from .errors import ConfigError, DimensionError, ProtocolError
from .pgmio import atomic_write_text, read_pgm

__all__ = [
    "POST_PROCESSED",
    "BASIS_PROCESSED",
    "METHODS",
    "NoiseModel",
    "ProtocolConfig",
    "CoefficientRecord",
    "read_stream",
    "synth_bar_target",
    "as_transmission",
    "load_object",
    "lamp_intensity",
    "bucket_read",
    "normalization_read",
    "run_post_protocol",
    "run_basis_protocol",
    "write_coefficients_csv",
]

POST_PROCESSED = "post-processed"
BASIS_PROCESSED = "basis-processed"
METHODS = (POST_PROCESSED, BASIS_PROCESSED)

_MAX_SEED = 2**64


@dataclass(frozen=True)
class NoiseModel:
    """Lamp and detector noise parameters.

    ``lamp_base`` is the lamp power per unit integration time;
    ``detector_sigma`` is the std of each bucket read, ``normalization_sigma``
    the std of each normalization read, and the two backgrounds are constant
    offsets added to every read of the respective photodiode (stray light).
    ``seed`` keys every random substream of a run.
    """

    lamp_base: float = 1.0
    lamp_drift_amplitude: float = 0.0
    lamp_drift_period: float = 40960.0
    detector_sigma: float = 0.0
    normalization_sigma: float = 0.0
    background_measure: float = 0.0
    background_norm: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.lamp_base > 0:
            raise ConfigError(f"lamp_base must be positive, got {self.lamp_base}")
        if self.lamp_drift_amplitude < 0:
            raise ConfigError("lamp_drift_amplitude must be >= 0")
        if not self.lamp_drift_period > 0:
            raise ConfigError("lamp_drift_period must be positive")
        for field in ("detector_sigma", "normalization_sigma",
                      "background_measure", "background_norm"):
            if getattr(self, field) < 0:
                raise ConfigError(f"{field} must be >= 0")
        if not (0 <= int(self.seed) < _MAX_SEED):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class ProtocolConfig:
    """Acquisition settings: detector integration time (ms), how many times a
    single-part pattern is repeated, and which pipeline the run feeds."""

    integration_time_ms: float
    repeats_per_pattern: int = 2
    method: str = POST_PROCESSED

    def __post_init__(self):
        if not self.integration_time_ms > 0:
            raise ConfigError("integration_time_ms must be positive")
        if self.repeats_per_pattern < 1:
            raise ConfigError("repeats_per_pattern must be >= 1")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class CoefficientRecord:
    """One measured expansion coefficient with its raw detector reads."""

    pattern_index: int
    coefficient: float
    raw_reads: tuple[float, ...]
    normalization_read: float


def read_stream(seed: int, pattern_index: int, read_index: int) -> np.random.Generator:
    """Independent random substream for one detector read.

    Streams are keyed, not sequential, so any evaluation order (or degree of
    parallelism) reproduces the same draws.
    """
    if pattern_index < 0 or read_index < 0:
        raise ValueError("pattern_index and read_index must be >= 0")
    return np.random.default_rng([int(seed), int(pattern_index), int(read_index)])


def synth_bar_target(grid: GridSpec, bar_groups: int = 3) -> np.ndarray:
    """Deterministic binary bar target: three-bar groups of halving pitch
    stacked below each other, inside a clear border margin.

    Raises if the grid is too small to hold the requested number of groups.
    """
    n = grid.side
    if n < 16:
        raise DimensionError(f"bar target needs a grid side of at least 16, got {n}")
    if bar_groups < 1:
        raise ValueError("bar_groups must be >= 1")
    margin = max(2, n // 8)
    usable = n - 2 * margin
    img = np.zeros((n, n))
    thickness = max(1, usable // 12)
    bar_len = max(4, (2 * usable) // 3)
    y = margin
    for g in range(bar_groups):
        t = max(1, thickness >> g)
        for b in range(3):
            y0 = y + 2 * b * t
            if y0 + t > n - margin:
                raise DimensionError(
                    f"{n}x{n} grid is too small for {bar_groups} bar groups"
                )
            img[y0:y0 + t, margin:margin + bar_len] = 1.0
        y += 7 * t  # group height 5t plus a 2t gap
    return img


def as_transmission(image) -> np.ndarray:
    """Clamp an image into the valid transmission range [0, 1]."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise DimensionError(f"object image must be 2-D, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise DimensionError("object image must be finite")
    return np.clip(img, 0.0, 1.0)


def load_object(path) -> np.ndarray:
    """Load a transmissive object from a portable graymap file."""
    gray, maxval = read_pgm(path)
    if gray.shape[0] != gray.shape[1]:
        raise DimensionError(f"{path}: object image must be square, got {gray.shape}")
    return as_transmission(gray / maxval)


def lamp_intensity(step: int, noise: NoiseModel, protocol: ProtocolConfig) -> float:
    """Integrated lamp power at a measurement step.

    ``A(step) = integration_time * lamp_base * (1 + amplitude *
    sin(2*pi*step/period))``; the drift is a deterministic slow sinusoid so
    runs stay reproducible.
    """
    if step < 0:
        raise ValueError(f"step must be >= 0, got {step}")
    phase = 2.0 * math.pi * step / noise.lamp_drift_period
    a = (protocol.integration_time_ms * noise.lamp_base
         * (1.0 + noise.lamp_drift_amplitude * math.sin(phase)))
    if a <= 0:
        raise ConfigError(
            f"lamp intensity is non-positive at step {step}; "
            "lamp_drift_amplitude must stay below 1"
        )
    return float(a)


def _check_pair(pattern: np.ndarray, obj: np.ndarray):
    if pattern.shape != obj.shape:
        raise DimensionError(
            f"pattern shape {pattern.shape} does not match object shape {obj.shape}"
        )


def bucket_read(pattern, obj, a: float, noise: NoiseModel,
                rng: np.random.Generator) -> float:
    """One bucket-photodiode sample for a projected pattern.

    Returns ``a * <pattern, obj> + background_measure + N(0, detector_sigma^2)``.
    The pattern is expected to be binary (decompose multi-level patterns
    first); reads may go negative when the noise is large, by design of the
    additive model.
    """
    pat = np.asarray(pattern, dtype=float)
    o = np.asarray(obj, dtype=float)
    _check_pair(pat, o)
    value = a * float(np.dot(pat.ravel(), o.ravel())) + noise.background_measure
    if noise.detector_sigma > 0:
        value += noise.detector_sigma * rng.standard_normal()
    return float(value)


def normalization_read(a: float, noise: NoiseModel,
                       rng: np.random.Generator) -> float:
    """One normalization-photodiode sample:
    ``a + background_norm + N(0, normalization_sigma^2)``."""
    value = a + noise.background_norm
    if noise.normalization_sigma > 0:
        value += noise.normalization_sigma * rng.standard_normal()
    return float(value)


def _is_binary(arr: np.ndarray) -> bool:
    return bool(np.all((arr == 0) | (arr == 1)))


def _check_object(obj) -> np.ndarray:
    o = np.asarray(obj, dtype=float)
    if o.ndim != 2 or o.shape[0] != o.shape[1]:
        raise DimensionError(f"object must be a square 2-D image, got {o.shape}")
    if not np.all(np.isfinite(o)):
        raise DimensionError("object values must be finite")
    if o.size and (o.min() < 0 or o.max() > 1):
        raise ProtocolError("object transmission values must lie in [0, 1]")
    return o


def run_post_protocol(obj, basis: PatternBasis, noise: NoiseModel,
                      protocol: ProtocolConfig) -> list[CoefficientRecord]:
    """Acquire plain-basis coefficients: per pattern, ``repeats_per_pattern``
    bucket reads sharing one lamp value, averaged and divided by a single
    normalization read.

    The basis must be binary (e.g. canonical); multi-level patterns belong in
    :func:`run_basis_protocol` after decomposition.
    """
    o = _check_object(obj)
    if o.shape != (basis.grid.side, basis.grid.side):
        raise DimensionError("object grid does not match basis grid")
    if not _is_binary(basis.stack):
        raise ProtocolError(
            "repeat protocol needs binary patterns; decompose multi-level "
            "patterns and use run_basis_protocol instead"
        )
    repeats = protocol.repeats_per_pattern
    records = []
    for j, pattern in enumerate(basis):
        a = lamp_intensity(j, noise, protocol)
        reads = [
            bucket_read(pattern, o, a, noise, read_stream(noise.seed, j, i))
            for i in range(repeats)
        ]
        norm = normalization_read(a, noise, read_stream(noise.seed, j, repeats))
        coefficient = float(sum(reads) / repeats / norm)
        records.append(CoefficientRecord(j, coefficient, tuple(reads), norm))
    return records


def run_basis_protocol(obj, decomposed: list[SubPatternSet], noise: NoiseModel,
                       protocol: ProtocolConfig) -> list[CoefficientRecord]:
    """Acquire modified-basis coefficients from binary sub-patterns.

    Per parent pattern: one bucket read per binary part (each with its own
    noise draw), combined with the part weights and divided by a single
    shared normalization read.  The weighted combination reproduces the
    multi-level pattern's overlap with the object, so the coefficient of the
    modified pattern is measured without ever projecting a multi-level frame.
    """
    o = _check_object(obj)
    records = []
    for sub in decomposed:
        j = sub.parent_index
        a = lamp_intensity(j, noise, protocol)
        reads = []
        combined = 0.0
        for i, (part, weight) in enumerate(sub.parts):
            p = np.asarray(part)
            if not _is_binary(p):
                raise ProtocolError(
                    f"sub-pattern {i} of pattern {j} is not binary; "
                    "decompose patterns with binary_decompose first"
                )
            value = bucket_read(p, o, a, noise, read_stream(noise.seed, j, i))
            reads.append(value)
            combined += weight * value
        norm = normalization_read(a, noise,
                                  read_stream(noise.seed, j, len(sub.parts)))
        records.append(CoefficientRecord(j, float(combined / norm),
                                         tuple(reads), norm))
    return records


def write_coefficients_csv(records: list[CoefficientRecord], path):
    """Write a coefficient stream as CSV.

    Columns are ``pattern_index, read_1, .., read_k, norm_read, coefficient``
    with ``k`` the largest read count in the stream; shorter rows leave the
    extra read columns empty.
    """
    k = max((len(r.raw_reads) for r in records), default=0)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["pattern_index"]
                    + [f"read_{i + 1}" for i in range(k)]
                    + ["norm_read", "coefficient"])
    for r in records:
        reads = [repr(float(x)) for x in r.raw_reads]
        reads += [""] * (k - len(reads))
        writer.writerow([r.pattern_index, *reads,
                         repr(float(r.normalization_read)),
                         repr(float(r.coefficient))])
    atomic_write_text(path, buf.getvalue())
