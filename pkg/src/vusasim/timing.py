"""Analytical cycle counts for standard arrays and virtually upscaled runs.

The per-tile model is weight load (one cycle per occupied row) plus input
streaming plus skew fill and drain:

    cycles = rows + T + (rows - 1) + (cols - 1)

which matches the measured dataflow simulation exactly (cross-checked in the
test suite for every shape up to 8x8 and streams up to 32).
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .core import ArrayConfig, validate_config
from .mapper import iter_partition
from .workload import GemmWorkload


@dataclass(frozen=True)
class TileCost:
    """Cost of one mapped tile: width, cycles, and dense MAC ops covered
    (zeros included)."""

    window_width: int
    cycles: int
    mac_ops: int


@dataclass(frozen=True)
class LoadSplit:
    """How a run distributes over window widths.

    `cycle_fraction` is the primary view (share of execution cycles spent at
    each width); `job_fraction` is the share of tiles. Ragged edge tiles
    narrower than the MAC budget appear under their actual width.
    """

    cycles_by_width: dict[int, int] = field(default_factory=dict)
    jobs_by_width: dict[int, int] = field(default_factory=dict)

    @property
    def cycle_fraction(self) -> dict[int, float]:
        total = sum(self.cycles_by_width.values())
        if total == 0:
            return {}
        return {w: c / total for w, c in sorted(self.cycles_by_width.items())}

    @property
    def job_fraction(self) -> dict[int, float]:
        total = sum(self.jobs_by_width.values())
        if total == 0:
            return {}
        return {w: n / total for w, n in sorted(self.jobs_by_width.items())}


def tile_cycles(rows_used: int, cols_used: int, stream_len: int) -> int:
    """Cycles for one tile: load + stream + skew fill + drain."""
    if rows_used < 1 or cols_used < 1 or stream_len < 1:
        raise ValueError(
            f"tile dimensions must be positive, got "
            f"({rows_used}, {cols_used}, {stream_len})"
        )
    return rows_used + stream_len + (rows_used - 1) + (cols_used - 1)


def tile_cost(rows_used: int, cols_used: int, stream_len: int) -> TileCost:
    return TileCost(
        window_width=cols_used,
        cycles=tile_cycles(rows_used, cols_used, stream_len),
        mac_ops=rows_used * cols_used * stream_len,
    )


def _folds(total: int, size: int) -> Iterable[int]:
    """Chunk sizes covering `total` in pieces of at most `size`."""
    for start in range(0, total, size):
        yield min(size, total - start)


def run_standard(gemms: Iterable[GemmWorkload], rows: int, cols: int) -> int:
    """Total cycles to run the workload on a standard rows x cols array.

    Each GEMM is folded into ceil(K/rows) * ceil(C/cols) tiles; edge tiles
    use their actual remaining dimensions.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"array dimensions must be positive, got {rows}x{cols}")
    total = 0
    for gemm in gemms:
        for band_rows in _folds(gemm.k, rows):
            for tile_cols in _folds(gemm.c, cols):
                total += tile_cycles(band_rows, tile_cols, gemm.t)
    return total


def run_vusa(
    gemms: Iterable[GemmWorkload], cfg: ArrayConfig
) -> tuple[int, LoadSplit]:
    """Total cycles and load split for the virtually upscaled array.

    Each GEMM's weights are partitioned into greedy maximal windows; every
    tile costs tile_cycles(band_rows, width, T).
    """
    validate_config(cfg)
    cycles_by_width: dict[int, int] = {}
    jobs_by_width: dict[int, int] = {}
    total = 0
    for gemm in gemms:
        for assignment in iter_partition(gemm.weights, cfg):
            width = assignment.tile.width
            cycles = tile_cycles(len(assignment.rows), width, gemm.t)
            total += cycles
            cycles_by_width[width] = cycles_by_width.get(width, 0) + cycles
            jobs_by_width[width] = jobs_by_width.get(width, 0) + 1
    return total, LoadSplit(cycles_by_width=cycles_by_width, jobs_by_width=jobs_by_width)


def blend_cycles(
    split: Mapping[int, float], per_width_full_cycles: Mapping[int, float]
) -> float:
    """Combine per-width fractions with per-width full-run cycle counts.

    Given the fraction of the load executed at each window width and the
    cycles a standard array of that width needs for the whole model, the
    blend estimates the upscaled array's cycle count.
    """
    total_frac = sum(split.values())
    if abs(total_frac - 1.0) > 1e-6:
        raise ValueError(f"split fractions must sum to 1, got {total_frac}")
    missing = [w for w in split if w not in per_width_full_cycles]
    if missing:
        raise ValueError(f"no cycle counts for widths {missing}")
    return sum(frac * per_width_full_cycles[w] for w, frac in split.items())
