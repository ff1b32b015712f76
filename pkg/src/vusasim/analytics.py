"""Closed-form probability that a window of sparse weights fits the MAC budget.

With truly unstructured sparsity each weight is nonzero independently with
probability p, so the nonzero count of a row over `width` columns is
binomial. A row fits when that count is at most the per-row MAC budget, and
the whole window grows when every row fits:

    P(grow to width) = (sum_{i=0}^{budget} C(width, i) p^i (1-p)^(width-i)) ^ rows

A Monte Carlo estimator over random masks is included as an independent
check of the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import ArrayConfig, validate_config

_MC_CHUNK = 100_000


def exact_nonzero_prob(count: int, cols: int, p_nonzero: float) -> float:
    """Probability of exactly `count` nonzeros among `cols` i.i.d. weights."""
    if not 0 <= count <= cols:
        raise ValueError(f"count must be in [0, {cols}], got {count}")
    if not 0.0 <= p_nonzero <= 1.0:
        raise ValueError(f"p_nonzero must be in [0, 1], got {p_nonzero}")
    return (
        math.comb(cols, count)
        * p_nonzero**count
        * (1.0 - p_nonzero) ** (cols - count)
    )


def row_fit_prob(width: int, macs_per_row: int, p_nonzero: float) -> float:
    """Probability that one row of `width` columns has at most `macs_per_row`
    nonzeros (binomial CDF at the MAC budget)."""
    if width < 1 or macs_per_row < 1:
        raise ValueError("width and macs_per_row must be >= 1")
    return sum(
        exact_nonzero_prob(i, width, p_nonzero)
        for i in range(min(macs_per_row, width) + 1)
    )


def growth_prob(cfg: ArrayConfig, width: int, p_nonzero: float) -> float:
    """Probability that the array virtually grows to `width` columns: every
    one of the `cfg.rows` rows must fit independently."""
    validate_config(cfg)
    if not cfg.macs_per_row <= width <= cfg.virtual_cols:
        raise ValueError(
            f"width must be in [{cfg.macs_per_row}, {cfg.virtual_cols}], got {width}"
        )
    return row_fit_prob(width, cfg.macs_per_row, p_nonzero) ** cfg.rows


def monte_carlo_growth(
    cfg: ArrayConfig,
    width: int,
    p_nonzero: float,
    trials: int,
    seed: int = 0,
) -> float:
    """Estimate growth_prob by sampling random nonzero masks.

    Independent of the closed form; deterministic for a given seed.
    """
    validate_config(cfg)
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not cfg.macs_per_row <= width <= cfg.virtual_cols:
        raise ValueError(
            f"width must be in [{cfg.macs_per_row}, {cfg.virtual_cols}], got {width}"
        )
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < trials:
        n = min(_MC_CHUNK, trials - done)
        masks = rng.random((n, cfg.rows, width)) < p_nonzero
        fits = (masks.sum(axis=2) <= cfg.macs_per_row).all(axis=1)
        hits += int(np.count_nonzero(fits))
        done += n
    return hits / trials


@dataclass(frozen=True)
class GrowthCurve:
    """Growth probability per target width over a sparsity grid."""

    sparsity: tuple[float, ...]
    probabilities: dict[int, tuple[float, ...]]  # width -> one value per point

    def rows(self) -> Iterator[tuple[float, int, float]]:
        """(sparsity, window_width, probability) rows for CSV emission."""
        for width in sorted(self.probabilities):
            for p0, prob in zip(self.sparsity, self.probabilities[width]):
                yield p0, width, prob


def sweep_curve(cfg: ArrayConfig, sparsity_grid: Sequence[float]) -> GrowthCurve:
    """Evaluate growth_prob over a sparsity grid for every reachable width."""
    validate_config(cfg)
    grid = tuple(float(p0) for p0 in sparsity_grid)
    if any(not 0.0 <= p0 <= 1.0 for p0 in grid):
        raise ValueError("sparsity grid values must be in [0, 1]")
    probabilities = {
        width: tuple(growth_prob(cfg, width, 1.0 - p0) for p0 in grid)
        for width in range(cfg.macs_per_row, cfg.virtual_cols + 1)
    }
    return GrowthCurve(sparsity=grid, probabilities=probabilities)
