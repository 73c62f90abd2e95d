"""Command-line front end.

Verbs:

* ``run``      -- full comparison experiment: reconstructed images per
  (method, integration time, repeat) as graymaps, the sweep and summary CSVs,
  and a re-parseable run manifest.
* ``gallery``  -- export selected basis patterns, original and
  filter-modified, as graymaps.
* ``validate`` -- parse and validate a config, echo the resolved values.

Exit codes: 0 success, 1 config error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .analysis import summarize_sweep, sweep_cells, write_summary_csv, write_sweep_csv
from .analysis import SweepRow
from .bases import HADAMARD, canonical_basis, hadamard_basis, modify_basis
from .bench import load_object, synth_bar_target
from .config import ExperimentConfig, load_config
from .core import GridSpec
from .errors import ConfigError, GhostSimError
from .pgmio import atomic_write_text, write_pgm

__all__ = ["main", "run_experiment", "emit_pattern_gallery", "build_scene"]


def build_scene(config: ExperimentConfig):
    """The object under test: a file-backed graymap or the synthetic target."""
    if config.object_path is not None:
        obj = load_object(config.object_path)
        if obj.shape[0] != config.grid_side:
            raise ConfigError(
                f"object_path: image side {obj.shape[0]} does not match "
                f"grid_side {config.grid_side}"
            )
        return obj
    return synth_bar_target(GridSpec(config.grid_side), config.bar_groups)


def _parent_basis(config: ExperimentConfig):
    grid = GridSpec(config.grid_side)
    if config.basis == HADAMARD:
        return hadamard_basis(grid)
    return canonical_basis(grid)


def _manifest_text(config: ExperimentConfig) -> str:
    import numpy
    import scipy

    lines = [
        "# ghostsim run manifest (re-parseable as a config file)",
        f"# ghostsim_version = {__version__}",
        f"# numpy_version = {numpy.__version__}",
        f"# scipy_version = {scipy.__version__}",
    ]
    return "\n".join(lines) + "\n" + config.to_text()


def run_experiment(config: ExperimentConfig, out_dir=None) -> list[Path]:
    """Run the full sweep and write every output file; returns the paths.

    All computation happens before any file is written, and each file goes
    through a temp-name-then-rename step, so a failed run leaves no partial
    outputs.  Outputs are byte-identical for identical (config, seed),
    whatever the thread count.
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    obj = build_scene(config)
    cells = sweep_cells(
        obj,
        config.kernel,
        config.to_noise_model(),
        config.integration_times_ms,
        config.repeats,
        parent=_parent_basis(config),
        repeats_per_pattern=config.repeats_per_pattern,
        peak_fraction=config.peak_fraction,
        background_fraction=config.background_fraction,
        mask_border=config.mask_border,
        background_rect=config.background_rect,
        threads=config.threads,
    )
    rows = [SweepRow(c.method, c.integration_time_ms, c.repeat, c.report.snr)
            for c in cells]

    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for cell in cells:
        name = f"recon_{cell.method}_t{cell.integration_time_ms:g}ms_rep{cell.repeat}.pgm"
        path = out / name
        write_pgm(path, cell.result.image)
        written.append(path)

    sweep_path = out / "snr_sweep.csv"
    write_sweep_csv(rows, sweep_path)
    written.append(sweep_path)
    summary_path = out / "snr_summary.csv"
    write_summary_csv(summarize_sweep(rows), summary_path)
    written.append(summary_path)

    manifest_path = out / "manifest.txt"
    atomic_write_text(manifest_path, _manifest_text(config))
    written.append(manifest_path)
    return written


def _gallery_indices(config: ExperimentConfig) -> list[int]:
    if config.gallery_indices is not None:
        return sorted(set(config.gallery_indices))
    m = config.grid_side * config.grid_side
    picks = {0, m // 2 + config.grid_side // 2, m - 1}
    if m > 85:
        picks.add(85)
    return sorted(picks)


def emit_pattern_gallery(config: ExperimentConfig, out_dir=None) -> list[Path]:
    """Write selected patterns of the configured basis, before and after the
    filter modification, as graymaps."""
    out = Path(out_dir if out_dir is not None else config.output_dir)
    parent = _parent_basis(config)
    modified = modify_basis(parent, config.kernel)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for index in _gallery_indices(config):
        for tag, basis in (("original", parent), ("modified", modified)):
            path = out / f"pattern_{tag}_{index:05d}.pgm"
            write_pgm(path, basis.pattern(index))
            written.append(path)
    return written


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", metavar="PATH", default=None,
                        help="config file (defaults apply when omitted)")
    parser.add_argument("--seed", metavar="U64", default=None,
                        help="override the config seed")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="override the config output directory")
    parser.add_argument("--threads", metavar="N", default=None,
                        help="worker threads for sweep cells (0 = auto)")


def _overrides(args) -> dict[str, str]:
    over: dict[str, str] = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.out is not None:
        over["output_dir"] = args.out
    if args.threads is not None:
        over["threads"] = args.threads
    return over


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ghostsim",
        description="Ghost-imaging simulator comparing filter-compiled "
                    "illumination against post-acquisition filtering.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, text in (
        ("run", "run the experiment and write images, CSVs, and a manifest"),
        ("gallery", "export original and filter-modified basis patterns"),
        ("validate", "check a config and echo the resolved values"),
    ):
        _add_common(sub.add_parser(verb, help=text))

    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, overrides=_overrides(args))
        if args.verb == "validate":
            sys.stdout.write(cfg.to_text())
        elif args.verb == "run":
            paths = run_experiment(cfg)
            print(f"wrote {len(paths)} files to {Path(cfg.output_dir).resolve()}")
        else:
            paths = emit_pattern_gallery(cfg)
            print(f"wrote {len(paths)} pattern files to {Path(cfg.output_dir).resolve()}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (GhostSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
