"""Layer topologies, conv-to-GEMM lowering, and sparse weight sources.

Topology files use the common accelerator-simulator layer descriptor: a CSV
with one convolution per row (name, ifmap_h, ifmap_w, filter_h, filter_w,
channels, num_filters, stride). Padding is not modeled; pre-adjust padded
layers in the file. Depthwise layers enter as one row per channel group.

Weight files use the `smx` text format: a header line
``smx <version> <rows> <cols>`` followed by whitespace-separated values in
row-major order. Integer values round-trip bit-exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from .core import ArrayConfig, WeightMatrix

SMX_VERSION = 1


@dataclass(frozen=True)
class LayerSpec:
    """One convolution layer as read from a topology file."""

    name: str
    ifmap_h: int
    ifmap_w: int
    filter_h: int
    filter_w: int
    channels: int
    num_filters: int
    stride: int

    def __post_init__(self):
        for fname in (
            "ifmap_h",
            "ifmap_w",
            "filter_h",
            "filter_w",
            "channels",
            "num_filters",
            "stride",
        ):
            if getattr(self, fname) < 1:
                raise ValueError(
                    f"layer {self.name!r}: {fname} must be >= 1, "
                    f"got {getattr(self, fname)}"
                )
        if self.filter_h > self.ifmap_h or self.filter_w > self.ifmap_w:
            raise ValueError(
                f"layer {self.name!r}: filter "
                f"{self.filter_h}x{self.filter_w} larger than ifmap "
                f"{self.ifmap_h}x{self.ifmap_w}"
            )


class GemmShape(NamedTuple):
    """Dimensions of a lowered matrix multiply."""

    k: int  # reduction depth: filter_h * filter_w * channels
    c: int  # output columns: num_filters
    t: int  # input-stream length: output_h * output_w


@dataclass(frozen=True)
class GemmWorkload:
    """A lowered matmul job: shape plus the weight values to map."""

    k: int
    c: int
    t: int
    weights: WeightMatrix

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"stream length must be >= 1, got {self.t}")
        if (self.weights.n_rows, self.weights.n_cols) != (self.k, self.c):
            raise ValueError(
                f"weights are {self.weights.n_rows}x{self.weights.n_cols}, "
                f"expected {self.k}x{self.c}"
            )

    @property
    def dense_macs(self) -> int:
        """Dense MAC count, zeros included."""
        return self.k * self.c * self.t


def parse_topology(path: str | Path) -> list[LayerSpec]:
    """Read a topology CSV (header line first, trailing commas tolerated)."""
    layers: list[LayerSpec] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)  # header
        for lineno, row in enumerate(reader, start=2):
            fields = [f.strip() for f in row]
            while fields and not fields[-1]:
                fields.pop()
            if not fields:
                continue
            if len(fields) != 8:
                raise ValueError(
                    f"{path}: line {lineno}: expected 8 fields, got {len(fields)}"
                )
            name = fields[0]
            try:
                dims = [int(f) for f in fields[1:]]
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-integer dimension"
                ) from None
            try:
                layers.append(LayerSpec(name, *dims))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return layers


def lower_to_gemm(layer: LayerSpec) -> GemmShape:
    """im2col lowering of a convolution (no padding, unit dilation)."""
    out_h = (layer.ifmap_h - layer.filter_h) // layer.stride + 1
    out_w = (layer.ifmap_w - layer.filter_w) // layer.stride + 1
    return GemmShape(
        k=layer.filter_h * layer.filter_w * layer.channels,
        c=layer.num_filters,
        t=out_h * out_w,
    )


def generate_weights(
    n_rows: int,
    n_cols: int,
    sparsity: float,
    pattern: str = "iid",
    block_cols: int | None = None,
    seed: int | np.random.SeedSequence = 0,
) -> WeightMatrix:
    """Synthesize a sparse integer weight matrix.

    ``iid`` zeroes each entry independently with probability `sparsity`; for
    a fixed seed the zero set only grows as sparsity increases, so sweeps
    over sparsity are monotone. ``clustered`` zeroes whole column blocks of
    `block_cols`, spread evenly to hit the target rate.
    """
    if not 0.0 <= sparsity <= 1.0:
        raise ValueError(f"sparsity must be in [0, 1], got {sparsity}")
    if n_rows < 1 or n_cols < 1:
        raise ValueError(f"matrix dimensions must be positive, got {n_rows}x{n_cols}")
    rng = np.random.default_rng(seed)
    if pattern == "iid":
        keep = rng.random((n_rows, n_cols)) >= sparsity
    elif pattern == "clustered":
        if block_cols is None or block_cols < 1:
            raise ValueError("clustered pattern needs block_cols >= 1")
        blocks = np.arange(n_cols) // block_cols
        zeroed = np.floor((blocks + 1) * sparsity) > np.floor(blocks * sparsity)
        keep = np.broadcast_to(~zeroed, (n_rows, n_cols))
    else:
        raise ValueError(f"unknown pattern {pattern!r}")
    magnitudes = rng.integers(1, 128, size=(n_rows, n_cols), dtype=np.int64)
    signs = rng.integers(0, 2, size=(n_rows, n_cols), dtype=np.int64) * 2 - 1
    return WeightMatrix(values=np.where(keep, magnitudes * signs, 0))


def save_weights_file(weights: WeightMatrix, path: str | Path) -> None:
    """Write a WeightMatrix in smx format."""
    values = weights.values
    is_int = np.issubdtype(values.dtype, np.integer)
    with open(path, "w") as fh:
        fh.write(f"smx {SMX_VERSION} {weights.n_rows} {weights.n_cols}\n")
        for row in values:
            fh.write(" ".join(str(int(v)) if is_int else repr(float(v)) for v in row))
            fh.write("\n")


def load_weights_file(path: str | Path) -> WeightMatrix:
    """Read an smx weight file; zeros are preserved exactly."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 4 or header[0] != "smx":
            raise ValueError(f"{path}: not an smx file")
        try:
            version, n_rows, n_cols = (int(x) for x in header[1:])
        except ValueError:
            raise ValueError(f"{path}: malformed smx header") from None
        if version != SMX_VERSION:
            raise ValueError(f"{path}: unsupported smx version {version}")
        if n_rows < 1 or n_cols < 1:
            raise ValueError(f"{path}: non-positive dimensions in header")
        tokens = fh.read().split()
    if len(tokens) != n_rows * n_cols:
        raise ValueError(
            f"{path}: expected {n_rows * n_cols} values, got {len(tokens)}"
        )
    try:
        values = np.array([int(t) for t in tokens], dtype=np.int64)
    except ValueError:
        try:
            values = np.array([float(t) for t in tokens], dtype=np.float64)
        except ValueError:
            raise ValueError(f"{path}: non-numeric value in payload") from None
    return WeightMatrix(values=values.reshape(n_rows, n_cols))


@dataclass(frozen=True)
class LayerStats:
    """Sparsity summary for one layer's weights on a given array config."""

    name: str
    zero_fraction: float
    row_nonzero_hist: dict[int, int]
    window_tiles: dict[int, int]
    window_cycles: dict[int, int]


def sparsity_stats(
    named_gemms: Iterable[tuple[str, GemmWorkload]], cfg: ArrayConfig
) -> list[LayerStats]:
    """Zero fractions, per-row nonzero histograms, and window histograms
    (by tile count and by cycles) for each layer."""
    from .mapper import iter_partition
    from .timing import tile_cycles

    stats = []
    for name, gemm in named_gemms:
        mask = gemm.weights.nonzero_mask
        row_counts = mask.sum(axis=1)
        hist: dict[int, int] = {}
        for count in row_counts:
            hist[int(count)] = hist.get(int(count), 0) + 1
        tiles: dict[int, int] = {}
        cycles: dict[int, int] = {}
        for assignment in iter_partition(gemm.weights, cfg):
            w = assignment.tile.width
            tiles[w] = tiles.get(w, 0) + 1
            cycles[w] = cycles.get(w, 0) + tile_cycles(
                len(assignment.rows), w, gemm.t
            )
        stats.append(
            LayerStats(
                name=name,
                zero_fraction=gemm.weights.zero_fraction,
                row_nonzero_hist=dict(sorted(hist.items())),
                window_tiles=dict(sorted(tiles.items())),
                window_cycles=dict(sorted(cycles.items())),
            )
        )
    return stats
