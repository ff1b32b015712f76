"""Functional cycle-stepped simulation of the weight-stationary grid.

Every cell forwards its input one column right and its accumulator one row
down per cycle; cells with an attached MAC add weight * input on the way
down, cells without one pass the accumulator through untouched. Inputs are
fed with the standard diagonal skew (row r delayed r cycles) and incoming
partial sums with the matching per-column skew, so results for one input
vector drain from the bottom one column per cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ArrayConfig, WeightMatrix
from .mapper import WindowAssignment, iter_partition, validate_assignment

# Weight load is modeled as one cycle per occupied row (row-parallel broadcast).
LOAD_CYCLES_PER_ROW = 1


@dataclass(frozen=True)
class GridState:
    """Registers of one tile's grid: input/accumulator per cell, plus the
    stationary weight where a MAC is attached."""

    input_reg: np.ndarray
    acc_reg: np.ndarray
    mac_weight: np.ndarray
    mac_mask: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.input_reg.shape


def load_weights(
    assignment: WindowAssignment, weights: WeightMatrix, cfg: ArrayConfig
) -> GridState:
    """Attach MACs at the assigned columns, holding the matching nonzero
    weights; all registers start at zero."""
    violations = validate_assignment(assignment, weights, cfg)
    if violations:
        raise ValueError(f"assignment/weights mismatch: {', '.join(violations)}")
    tile = assignment.tile
    rows = len(assignment.rows)
    dtype = weights.values.dtype
    mac_weight = np.zeros((rows, tile.width), dtype=dtype)
    mac_mask = np.zeros((rows, tile.width), dtype=bool)
    row0 = tile.row_band * cfg.rows
    for r, row in enumerate(assignment.rows):
        for _, col in row.pairs:
            mac_mask[r, col] = True
            mac_weight[r, col] = weights.values[row0 + r, tile.col_start + col]
    return GridState(
        input_reg=np.zeros((rows, tile.width), dtype=dtype),
        acc_reg=np.zeros((rows, tile.width), dtype=dtype),
        mac_weight=mac_weight,
        mac_mask=mac_mask,
    )


def step(
    state: GridState, left_inputs: np.ndarray, top_accums: np.ndarray
) -> tuple[GridState, np.ndarray, np.ndarray]:
    """Advance the grid one cycle.

    Returns (new state, accumulators leaving the bottom row, inputs leaving
    the right column).
    """
    rows, cols = state.shape
    left = np.asarray(left_inputs).reshape(rows)
    top = np.asarray(top_accums).reshape(cols)

    new_input = np.empty_like(state.input_reg)
    new_input[:, 0] = left
    new_input[:, 1:] = state.input_reg[:, :-1]

    acc_in = np.empty_like(state.acc_reg)
    acc_in[0, :] = top
    acc_in[1:, :] = state.acc_reg[:-1, :]

    new_acc = acc_in + np.where(state.mac_mask, state.mac_weight * new_input, 0)
    new_state = GridState(
        input_reg=new_input,
        acc_reg=new_acc,
        mac_weight=state.mac_weight,
        mac_mask=state.mac_mask,
    )
    return new_state, new_acc[-1, :].copy(), new_input[:, -1].copy()


def simulate_tile(
    assignment: WindowAssignment,
    weights: WeightMatrix,
    inputs: np.ndarray,
    partial_in: np.ndarray,
    cfg: ArrayConfig,
) -> tuple[np.ndarray, int]:
    """Stream `inputs` (T x band_rows) through one loaded tile.

    `partial_in` (T x width) enters at the top and the returned outputs
    (same shape) are partial_in + inputs @ window. The cycle count is
    measured: load cycles plus grid steps until the last output drains.
    """
    state = load_weights(assignment, weights, cfg)
    rows, cols = state.shape
    inputs = np.asarray(inputs)
    partial_in = np.asarray(partial_in)
    if inputs.ndim != 2 or inputs.shape[1] != rows:
        raise ValueError(f"inputs must be T x {rows}, got {inputs.shape}")
    n_steps_t = inputs.shape[0]
    if n_steps_t < 1:
        raise ValueError("input stream must have at least one step")
    if partial_in.shape != (n_steps_t, cols):
        raise ValueError(
            f"partial sums must be {(n_steps_t, cols)}, got {partial_in.shape}"
        )

    dtype = np.promote_types(
        state.acc_reg.dtype, np.promote_types(inputs.dtype, partial_in.dtype)
    )
    if dtype != state.acc_reg.dtype:
        state = GridState(
            input_reg=state.input_reg.astype(dtype),
            acc_reg=state.acc_reg.astype(dtype),
            mac_weight=state.mac_weight.astype(dtype),
            mac_mask=state.mac_mask,
        )
    inputs = inputs.astype(dtype)
    partial_in = partial_in.astype(dtype)
    outputs = np.zeros((n_steps_t, cols), dtype=dtype)

    row_idx = np.arange(rows)
    col_idx = np.arange(cols)
    drained = 0
    cycles = rows * LOAD_CYCLES_PER_ROW
    max_steps = n_steps_t + rows + cols + 8  # hard stop on a drain bug
    for s in range(max_steps):
        if drained == outputs.size:
            break
        t_in = s - row_idx
        ok_in = (t_in >= 0) & (t_in < n_steps_t)
        left = np.where(ok_in, inputs[np.clip(t_in, 0, n_steps_t - 1), row_idx], 0)

        t_top = s - col_idx
        ok_top = (t_top >= 0) & (t_top < n_steps_t)
        top = np.where(
            ok_top, partial_in[np.clip(t_top, 0, n_steps_t - 1), col_idx], 0
        )

        state, bottom, _ = step(state, left, top)
        cycles += 1

        t_out = s - col_idx - (rows - 1)
        ok_out = (t_out >= 0) & (t_out < n_steps_t)
        outputs[t_out[ok_out], col_idx[ok_out]] = bottom[ok_out]
        drained += int(np.count_nonzero(ok_out))
    if drained != outputs.size:
        raise RuntimeError("tile failed to drain within the step budget")
    return outputs, cycles


def simulate_matmul(
    weights: WeightMatrix, inputs: np.ndarray, cfg: ArrayConfig
) -> tuple[np.ndarray, int]:
    """Full matrix multiply on the array: partition, simulate every tile,
    chain partial sums across row bands by absolute output column.

    `inputs` is T x K. Returns (T x n_cols outputs, summed tile cycles).
    """
    inputs = np.asarray(inputs)
    if inputs.ndim != 2 or inputs.shape[1] != weights.n_rows:
        raise ValueError(
            f"inputs must be T x {weights.n_rows}, got {inputs.shape}"
        )
    acc = np.zeros(
        (inputs.shape[0], weights.n_cols),
        dtype=np.promote_types(weights.values.dtype, inputs.dtype),
    )
    total_cycles = 0
    for assignment in iter_partition(weights, cfg):
        tile = assignment.tile
        row0 = tile.row_band * cfg.rows
        band_inputs = inputs[:, row0 : row0 + len(assignment.rows)]
        out, cycles = simulate_tile(
            assignment,
            weights,
            band_inputs,
            acc[:, tile.col_start : tile.col_end],
            cfg,
        )
        acc[:, tile.col_start : tile.col_end] = out
        total_cycles += cycles
    return acc, total_cycles
