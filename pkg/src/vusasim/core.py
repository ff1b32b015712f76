"""Shared domain types and the dense matmul reference used by all equivalence tests.

Everything here is immutable after construction and safe to share across
threads. Functional simulation uses signed integers (values sized like 8-bit
weights/inputs, 64-bit accumulation) so oracle comparisons are bit-exact;
a weight is pruned iff it is exactly zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

VUSA_LABEL = "vusa"


def standard_label(rows: int, cols: int) -> str:
    """Canonical design label for a standard rows x cols array."""
    return f"standard-{rows}x{cols}"


@dataclass(frozen=True)
class ArrayConfig:
    """Array geometry: `rows` x `virtual_cols` grid of forwarding elements,
    `macs_per_row` physical MAC units per row.

    When macs_per_row == virtual_cols the config degenerates to a standard
    systolic array of that size.
    """

    rows: int
    virtual_cols: int
    macs_per_row: int
    clock_hz: float = 1e9

    @property
    def is_standard(self) -> bool:
        return self.macs_per_row == self.virtual_cols

    @property
    def label(self) -> str:
        if self.is_standard:
            return standard_label(self.rows, self.virtual_cols)
        return VUSA_LABEL

    @property
    def max_shift(self) -> int:
        """How far a MAC can be displaced from its home column."""
        return self.virtual_cols - self.macs_per_row

    @property
    def geometry(self) -> str:
        """Compact rows x virtual_cols / MACs-per-row string."""
        return f"{self.rows}x{self.virtual_cols}/{self.macs_per_row}"


def validate_config(cfg: ArrayConfig) -> ArrayConfig:
    """Check ArrayConfig invariants; returns the config or raises ValueError."""
    if cfg.rows < 1:
        raise ValueError(f"rows must be >= 1, got {cfg.rows}")
    if cfg.virtual_cols < 1:
        raise ValueError(f"virtual_cols must be >= 1, got {cfg.virtual_cols}")
    if not (1 <= cfg.macs_per_row <= cfg.virtual_cols):
        raise ValueError(
            f"macs_per_row must be in [1, virtual_cols={cfg.virtual_cols}], "
            f"got {cfg.macs_per_row}"
        )
    if cfg.clock_hz <= 0:
        raise ValueError(f"clock_hz must be positive, got {cfg.clock_hz}")
    return cfg


@dataclass(frozen=True)
class WeightMatrix:
    """Dense 2-D weight grid, row-major; an entry of exactly 0 is a pruned weight.

    Rows index the reduction dimension, columns the output dimension.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"weight dimensions must be positive, got {arr.shape}")
        if np.issubdtype(arr.dtype, np.integer):
            arr = arr.astype(np.int64)
        elif np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        else:
            raise ValueError(f"weights must be numeric, got dtype {arr.dtype}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]

    @property
    def nonzero_mask(self) -> np.ndarray:
        return self.values != 0

    @property
    def zero_fraction(self) -> float:
        return float(np.count_nonzero(self.values == 0) / self.values.size)


@dataclass(frozen=True)
class TileRef:
    """One mapped chunk of a weight matrix: `width` columns starting at
    `col_start` within row band `row_band` (bands are `rows` high)."""

    row_band: int
    col_start: int
    width: int

    def __post_init__(self):
        if self.row_band < 0 or self.col_start < 0:
            raise ValueError("tile indices must be non-negative")
        if self.width < 1:
            raise ValueError(f"tile width must be >= 1, got {self.width}")

    @property
    def col_end(self) -> int:
        return self.col_start + self.width


@dataclass(frozen=True)
class CostCoefficients:
    """Normalized silicon area and power per design label.

    Labels follow :func:`standard_label` plus ``"vusa"``. Values are
    dimensionless ratios; the shipped defaults are normalized so the vusa
    entry is (1, 1).
    """

    area: dict[str, float] = field(default_factory=dict)
    power: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if set(self.area) != set(self.power):
            raise ValueError("area and power tables must cover the same designs")
        for table, name in ((self.area, "area"), (self.power, "power")):
            for design, value in table.items():
                if not value > 0:
                    raise ValueError(f"{name} for {design!r} must be > 0, got {value}")

    def area_of(self, design: str) -> float:
        try:
            return self.area[design]
        except KeyError:
            raise ValueError(f"no area coefficient for design {design!r}") from None

    def power_of(self, design: str) -> float:
        try:
            return self.power[design]
        except KeyError:
            raise ValueError(f"no power coefficient for design {design!r}") from None

    def scaled(self, factor: float) -> "CostCoefficients":
        return CostCoefficients(
            area={k: v * factor for k, v in self.area.items()},
            power={k: v * factor for k, v in self.power.items()},
        )

    @classmethod
    def from_csv(cls, path: str | Path) -> "CostCoefficients":
        """Load a `design,area_norm,power_norm` CSV."""
        area: dict[str, float] = {}
        power: dict[str, float] = {}
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header[:3]] != [
                "design",
                "area_norm",
                "power_norm",
            ]:
                raise ValueError(
                    f"{path}: expected header 'design,area_norm,power_norm'"
                )
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not f.strip() for f in row):
                    continue
                if len(row) < 3:
                    raise ValueError(f"{path}: line {lineno}: expected 3 fields")
                design = row[0].strip()
                try:
                    area[design] = float(row[1])
                    power[design] = float(row[2])
                except ValueError:
                    raise ValueError(
                        f"{path}: line {lineno}: non-numeric coefficient"
                    ) from None
        coeffs = cls(area=area, power=power)
        if VUSA_LABEL in coeffs.area:
            if coeffs.area[VUSA_LABEL] != 1.0 or coeffs.power[VUSA_LABEL] != 1.0:
                raise ValueError(f"{path}: vusa entry must be normalized to (1, 1)")
        return coeffs

    @classmethod
    def default(cls) -> "CostCoefficients":
        """16-nm synthesis coefficients shipped with the package."""
        return cls.from_csv(Path(__file__).parent / "data" / "coefficients.csv")


def dense_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Plain matrix product, the reference oracle for every simulator test.

    Integer inputs are computed exactly in int64; anything else in float64.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError(f"operands must be 2-D, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    if np.issubdtype(a.dtype, np.integer) and np.issubdtype(b.dtype, np.integer):
        return a.astype(np.int64) @ b.astype(np.int64)
    return a.astype(np.float64) @ b.astype(np.float64)
