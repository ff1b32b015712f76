"""Cycle-stepped grid simulation vs the dense oracle."""

import numpy as np
import pytest

from vusasim import (
    ArrayConfig,
    WeightMatrix,
    dense_matmul,
    load_weights,
    partition,
    simulate_matmul,
    simulate_tile,
    step,
    tile_cycles,
)
from vusasim.mapper import RowAssignment, WindowAssignment

CFG = ArrayConfig(3, 6, 3)


def _single_tile(values, cfg=CFG):
    w = WeightMatrix(np.asarray(values))
    tiles = partition(w, cfg)
    assert len(tiles) == 1
    return tiles[0], w


class TestLoadWeights:
    def test_all_zero_tile_has_no_macs(self):
        wa, w = _single_tile(np.zeros((3, 6), dtype=int))
        state = load_weights(wa, w, CFG)
        assert not state.mac_mask.any()
        assert not state.acc_reg.any() and not state.input_reg.any()

    def test_spread_row_macs_at_assigned_columns(self):
        vals = np.zeros((3, 6), dtype=int)
        vals[:, [0, 3, 5]] = [[1, 2, 3]] * 3
        wa, w = _single_tile(vals)
        state = load_weights(wa, w, CFG)
        assert state.mac_mask.sum(axis=1).tolist() == [3, 3, 3]
        assert np.flatnonzero(state.mac_mask[0]).tolist() == [0, 3, 5]
        assert state.mac_weight[0, [0, 3, 5]].tolist() == [1, 2, 3]

    def test_dense_narrow_tile(self):
        wa, w = _single_tile(np.full((3, 3), 7))
        state = load_weights(wa, w, CFG)
        assert state.mac_mask.all()
        assert state.shape == (3, 3)

    def test_mismatched_assignment_rejected(self):
        wa, w = _single_tile(np.zeros((3, 6), dtype=int))
        other = WeightMatrix(np.ones((3, 6), dtype=int))
        with pytest.raises(ValueError, match="mismatch"):
            load_weights(wa, other, CFG)


class TestStep:
    def test_single_mac_cell(self):
        # one cell, weight 2: accumulator 5 plus 2 * 3 leaves the bottom as 11
        wa, w = _single_tile(np.array([[2]]), ArrayConfig(1, 1, 1))
        state = load_weights(wa, w, ArrayConfig(1, 1, 1))
        state, bottom, right = step(state, np.array([3]), np.array([5]))
        assert bottom.tolist() == [11]
        assert right.tolist() == [3]

    def test_noop_grid_delays_accumulators(self):
        wa, w = _single_tile(np.zeros((3, 6), dtype=int))
        state = load_weights(wa, w, CFG)
        fed = [np.arange(6) + 10 * s for s in range(6)]
        outs = []
        for s in range(6):
            state, bottom, _ = step(state, np.zeros(3, dtype=int), fed[s])
            outs.append(bottom.tolist())
        # accumulators fall straight through, arriving rows cycles later
        assert outs[2] == fed[0].tolist()
        assert outs[5] == fed[3].tolist()

    def test_dense_grid_matches_oracle(self):
        cfg = ArrayConfig(2, 2, 2)
        rng = np.random.default_rng(8)
        vals = rng.integers(-9, 10, size=(2, 2))
        wa, w = _single_tile(vals, cfg)
        inputs = rng.integers(-9, 10, size=(3, 2))
        out, _ = simulate_tile(wa, w, inputs, np.zeros((3, 2), dtype=int), cfg)
        assert np.array_equal(out, dense_matmul(inputs, vals))


class TestSimulateTile:
    def test_all_zero_window_passes_partials(self):
        wa, w = _single_tile(np.zeros((3, 6), dtype=int))
        partial = np.arange(24).reshape(4, 6)
        out, _ = simulate_tile(wa, w, np.ones((4, 3), dtype=int), partial, CFG)
        assert np.array_equal(out, partial)

    def test_permutation_window(self):
        # a single 1 per row at distinct columns permutes inputs into columns
        vals = np.zeros((3, 6), dtype=int)
        vals[0, 1] = 1
        vals[1, 4] = 1
        vals[2, 2] = 1
        wa, w = _single_tile(vals)
        rng = np.random.default_rng(9)
        inputs = rng.integers(-9, 10, size=(5, 3))
        partial = rng.integers(-9, 10, size=(5, 6))
        out, _ = simulate_tile(wa, w, inputs, partial, CFG)
        assert np.array_equal(out, partial + dense_matmul(inputs, vals))

    def test_random_sparse_window_matches_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            mask = rng.random((3, 6)) < 0.4
            vals = np.where(mask, rng.integers(-99, 100, size=(3, 6)), 0)
            tiles = partition(WeightMatrix(vals), CFG)
            if len(tiles) != 1:
                continue
            inputs = rng.integers(-99, 100, size=(8, 3))
            partial = rng.integers(-99, 100, size=(8, 6))
            out, _ = simulate_tile(tiles[0], WeightMatrix(vals), inputs, partial, CFG)
            assert np.array_equal(out, partial + dense_matmul(inputs, vals))

    def test_measured_cycles_match_model(self):
        rng = np.random.default_rng(13)
        for rows in (1, 2, 3):
            for cols in (1, 3, 6):
                cfg = ArrayConfig(rows, cols, cols)
                vals = rng.integers(-5, 6, size=(rows, cols))
                tiles = partition(WeightMatrix(vals), cfg)
                t = int(rng.integers(1, 12))
                _, cycles = simulate_tile(
                    tiles[0],
                    WeightMatrix(vals),
                    rng.integers(-5, 6, size=(t, rows)),
                    np.zeros((t, cols), dtype=int),
                    cfg,
                )
                assert cycles == tile_cycles(rows, cols, t)

    def test_shape_validation(self):
        wa, w = _single_tile(np.zeros((3, 6), dtype=int))
        with pytest.raises(ValueError):
            simulate_tile(wa, w, np.ones((4, 2), dtype=int), np.zeros((4, 6)), CFG)
        with pytest.raises(ValueError):
            simulate_tile(wa, w, np.ones((4, 3), dtype=int), np.zeros((4, 5)), CFG)


class TestVirtualGrowthTransparency:
    def test_sparse_window_equals_standard_array(self):
        # the same sparse window on (3,6,3) and on a standard 3x6 array
        rng = np.random.default_rng(14)
        full = ArrayConfig(3, 6, 6)
        for _ in range(10):
            mask = rng.random((3, 6)) < 0.4
            vals = np.where(mask, rng.integers(-9, 10, size=(3, 6)), 0)
            w = WeightMatrix(vals)
            tiles_sparse = partition(w, CFG)
            tiles_full = partition(w, full)
            if len(tiles_sparse) != 1:
                continue
            inputs = rng.integers(-9, 10, size=(6, 3))
            partial = rng.integers(-9, 10, size=(6, 6))
            out_sparse, _ = simulate_tile(tiles_sparse[0], w, inputs, partial, CFG)
            out_full, _ = simulate_tile(tiles_full[0], w, inputs, partial, full)
            assert np.array_equal(out_sparse, out_full)


class TestSimulateMatmul:
    @pytest.mark.parametrize("geometry", [(3, 6, 3), (2, 4, 2), (4, 8, 2)])
    def test_multi_tile_chaining_matches_oracle(self, geometry):
        cfg = ArrayConfig(*geometry)
        rng = np.random.default_rng(sum(geometry))
        for _ in range(40):
            k = int(rng.integers(1, 3 * cfg.rows))
            c = int(rng.integers(1, 3 * cfg.virtual_cols))
            t = int(rng.integers(1, 7))
            mask = rng.random((k, c)) < rng.random()
            vals = np.where(mask, rng.integers(-99, 100, size=(k, c)), 0)
            w = WeightMatrix(vals)
            inputs = rng.integers(-99, 100, size=(t, k))
            got, cycles = simulate_matmul(w, inputs, cfg)
            assert np.array_equal(got, dense_matmul(inputs, vals))
            assert cycles > 0

    def test_input_shape_checked(self):
        with pytest.raises(ValueError):
            simulate_matmul(
                WeightMatrix(np.ones((3, 6), dtype=int)),
                np.ones((4, 2), dtype=int),
                CFG,
            )
