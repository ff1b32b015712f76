"""Simulator and cost-model toolkit for virtually upscaled systolic arrays.

A virtually upscaled array keeps a reduced number of physical MAC units per
row behind a wider grid of forwarding elements; when the stationary weights
are sparse enough it behaves like the wider array. This package maps sparse
weight matrices onto such arrays, simulates the weight-stationary dataflow
cycle by cycle, evaluates the closed-form growth-probability model, and
compares performance and normalized area/power efficiency against standard
arrays.
"""

from .analytics import (
    GrowthCurve,
    exact_nonzero_prob,
    growth_prob,
    monte_carlo_growth,
    row_fit_prob,
    sweep_curve,
)
from .core import (
    ArrayConfig,
    CostCoefficients,
    TileRef,
    VUSA_LABEL,
    WeightMatrix,
    dense_matmul,
    standard_label,
    validate_config,
)
from .dataflow import GridState, load_weights, simulate_matmul, simulate_tile, step
from .efficiency import (
    RunReport,
    SweepPoint,
    make_report,
    normalize,
    pruning_sweep,
    throughput,
)
from .mapper import (
    MappingError,
    RowAssignment,
    WindowAssignment,
    assign_row,
    partition,
    select_window,
    validate_assignment,
)
from .timing import (
    LoadSplit,
    TileCost,
    blend_cycles,
    run_standard,
    run_vusa,
    tile_cost,
    tile_cycles,
)
from .workload import (
    GemmShape,
    GemmWorkload,
    LayerSpec,
    LayerStats,
    generate_weights,
    load_weights_file,
    lower_to_gemm,
    parse_topology,
    save_weights_file,
    sparsity_stats,
)

__version__ = "0.1.0"
