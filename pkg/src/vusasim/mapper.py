"""Window selection and MAC-to-column matching for virtually upscaled arrays.

A row of the array has `macs_per_row` MAC units behind `virtual_cols`
forwarding elements. MAC j can only serve columns [j, j + max_shift], so a
window of weights is usable iff every row's nonzero columns admit such a
matching; with at most `macs_per_row` nonzeros per row the greedy
smallest-feasible-MAC rule always finds one.

Windows are chosen greedily per row band, left to right, starting from the
widest candidate and shrinking until every row fits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import ArrayConfig, TileRef, WeightMatrix, validate_config


class MappingError(RuntimeError):
    """A row admitted no feasible MAC matching.

    Unreachable when the per-row nonzero count is within the MAC budget;
    kept as a hard failure so a violation surfaces instead of corrupting
    results.
    """


@dataclass(frozen=True)
class RowAssignment:
    """(mac_index, column) pairs for one row, both strictly increasing."""

    pairs: tuple[tuple[int, int], ...] = ()

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(col for _, col in self.pairs)


@dataclass(frozen=True)
class WindowAssignment:
    """A selected tile plus one RowAssignment per occupied band row."""

    tile: TileRef
    rows: tuple[RowAssignment, ...]

    @property
    def mac_count(self) -> int:
        return sum(len(r.pairs) for r in self.rows)


def select_window(mask: np.ndarray, cfg: ArrayConfig) -> int:
    """Widest usable window at the left edge of `mask`.

    `mask` holds nonzero flags for the remaining columns of a row band
    (band_rows x remaining). Returns the largest width in
    [macs_per_row, min(virtual_cols, remaining)] whose per-row nonzero
    counts all fit the MAC budget; a remainder narrower than macs_per_row
    is returned as is.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    remaining = mask.shape[1]
    if remaining < 1:
        raise ValueError("mask must have at least one column")
    hi = min(cfg.virtual_cols, remaining)
    if remaining < cfg.macs_per_row:
        return remaining
    counts = np.cumsum(mask[:, :hi], axis=1)
    for width in range(hi, cfg.macs_per_row, -1):
        if counts[:, width - 1].max(initial=0) <= cfg.macs_per_row:
            return width
    return cfg.macs_per_row


def assign_row(nonzero_cols: Sequence[int], cfg: ArrayConfig) -> RowAssignment:
    """Match a row's nonzero columns to MAC units, smallest feasible MAC first.

    For the i-th column p, the MAC index is max(previous + 1, p - max_shift).
    Raises MappingError if that lands outside [0, macs_per_row) or beyond p,
    which cannot happen when len(nonzero_cols) <= macs_per_row.
    """
    cols = sorted(int(c) for c in nonzero_cols)
    if any(c < 0 or c >= cfg.virtual_cols for c in cols):
        raise ValueError(f"columns {cols} outside [0, {cfg.virtual_cols})")
    if len(set(cols)) != len(cols):
        raise ValueError(f"duplicate columns in {cols}")
    shift = cfg.max_shift
    pairs = []
    mac = -1
    for col in cols:
        mac = max(mac + 1, col - shift)
        if mac >= cfg.macs_per_row or mac > col:
            raise MappingError(
                f"no MAC for column {col} (next free {mac}, "
                f"budget {cfg.macs_per_row}, shift {shift})"
            )
        pairs.append((mac, col))
    return RowAssignment(pairs=tuple(pairs))


def iter_partition(weights: WeightMatrix, cfg: ArrayConfig) -> Iterator[WindowAssignment]:
    """Lazily tile a weight matrix into window assignments.

    Row bands of height `cfg.rows` are scanned top to bottom; within a band,
    windows are selected greedily left to right (same result as
    select_window, via one prefix-sum per band). Tiles cover the matrix
    exactly once. Partial sums across bands are keyed by absolute output
    column, so bands may partition columns differently.
    """
    validate_config(cfg)
    mask = weights.nonzero_mask
    n_rows, n_cols = mask.shape
    for band, row0 in enumerate(range(0, n_rows, cfg.rows)):
        band_mask = mask[row0 : row0 + cfg.rows]
        csum = np.zeros((band_mask.shape[0], n_cols + 1), dtype=np.int64)
        csum[:, 1:] = np.cumsum(band_mask, axis=1)
        col = 0
        while col < n_cols:
            remaining = n_cols - col
            hi = min(cfg.virtual_cols, remaining)
            width = remaining if remaining < cfg.macs_per_row else cfg.macs_per_row
            for cand in range(hi, cfg.macs_per_row, -1):
                if (csum[:, col + cand] - csum[:, col]).max() <= cfg.macs_per_row:
                    width = cand
                    break
            rows = tuple(
                assign_row(np.flatnonzero(band_mask[r, col : col + width]), cfg)
                for r in range(band_mask.shape[0])
            )
            yield WindowAssignment(tile=TileRef(band, col, width), rows=rows)
            col += width


def partition(weights: WeightMatrix, cfg: ArrayConfig) -> list[WindowAssignment]:
    """Tile a weight matrix into window assignments (see iter_partition)."""
    return list(iter_partition(weights, cfg))


def validate_assignment(
    assignment: WindowAssignment, weights: WeightMatrix, cfg: ArrayConfig
) -> list[str]:
    """Check one WindowAssignment against its invariants.

    Returns the names of violated invariants (empty list when clean):
    mac-order, col-order, mac-budget, mac-shift-range, cols-match-nonzeros,
    tile-bounds.
    """
    bad: list[str] = []
    tile = assignment.tile
    band_rows = min(cfg.rows, weights.n_rows - tile.row_band * cfg.rows)
    if (
        tile.col_end > weights.n_cols
        or tile.width > cfg.virtual_cols
        or band_rows < 1
        or len(assignment.rows) != band_rows
    ):
        bad.append("tile-bounds")
        return bad
    shift = cfg.max_shift
    window = weights.nonzero_mask[
        tile.row_band * cfg.rows : tile.row_band * cfg.rows + band_rows,
        tile.col_start : tile.col_end,
    ]
    for r, row in enumerate(assignment.rows):
        macs = [m for m, _ in row.pairs]
        cols = [c for _, c in row.pairs]
        if macs != sorted(set(macs)):
            bad.append("mac-order")
        if cols != sorted(set(cols)):
            bad.append("col-order")
        if len(row.pairs) > cfg.macs_per_row or any(
            m < 0 or m >= cfg.macs_per_row for m in macs
        ):
            bad.append("mac-budget")
        if any(not (m <= c <= m + shift) for m, c in row.pairs):
            bad.append("mac-shift-range")
        if list(np.flatnonzero(window[r])) != cols:
            bad.append("cols-match-nonzeros")
    return sorted(set(bad))
