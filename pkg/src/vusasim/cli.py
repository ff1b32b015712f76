"""Command-line front end.

Subcommands: analyze (sparsity report), simulate (cycles and efficiency
comparison), sweep (growth-probability and pruning-rate curves), verify
(seeded self-checks of the simulator against its oracles).

Options can come from a flat key=value config file (--config); command-line
flags win. All randomness derives from one --seed, with fixed per-layer and
per-check sub-seeds, so identical config and seed give byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .analytics import growth_prob, monte_carlo_growth, sweep_curve
from .core import (
    ArrayConfig,
    CostCoefficients,
    VUSA_LABEL,
    dense_matmul,
    standard_label,
    validate_config,
)
from .dataflow import simulate_tile
from .efficiency import make_report, normalize, pruning_sweep
from .mapper import WindowAssignment, partition, validate_assignment
from .timing import run_standard, run_vusa, tile_cycles
from .workload import (
    GemmWorkload,
    LayerSpec,
    generate_weights,
    load_weights_file,
    lower_to_gemm,
    parse_topology,
    sparsity_stats,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_VERIFY = 3

VERIFY_CONFIGS = ((3, 6, 3), (2, 4, 2), (4, 8, 2))


@dataclass
class RunConfig:
    """Validated inputs for one CLI invocation."""

    array: ArrayConfig
    topology: Path | None = None
    sparsity: float | None = None
    pattern: str = "iid"
    block_cols: int | None = None
    weights_dir: Path | None = None
    seed: int = 0
    designs: list[tuple[int, int]] = field(default_factory=list)
    coefficients: CostCoefficients = field(default_factory=CostCoefficients.default)
    out_dir: Path = Path("out")
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _layer_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(index,))


def load_config_file(path: str | Path) -> dict[str, str]:
    """Flat key = value file; '#' starts a comment; values mirror flag syntax."""
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected key = value")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip().strip('"').strip("'")
            if not key or not val:
                raise ValueError(f"{path}: line {lineno}: empty key or value")
            values[key] = val
    return values


def _config_argv(values: dict[str, str]) -> list[str]:
    argv: list[str] = []
    for key, val in values.items():
        argv.append("--" + key.replace("_", "-"))
        argv.extend(val.split())
    return argv


class _Parser(argparse.ArgumentParser):
    # usage problems count as validation errors (exit 1), not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


def _parse_design(text: str) -> tuple[int, int]:
    try:
        rows, _, cols = text.lower().partition("x")
        return int(rows), int(cols)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"design must look like ROWSxCOLS, got {text!r}"
        ) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vusasim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value config file")
    common.add_argument(
        "--array",
        nargs=3,
        type=int,
        metavar=("ROWS", "VCOLS", "MACS"),
        default=[3, 6, 3],
        help="array geometry: rows, virtual columns, MACs per row",
    )
    common.add_argument("--clock-hz", type=float, default=1e9)
    common.add_argument("--topology", type=Path, help="layer topology CSV")
    common.add_argument(
        "--sparsity", type=float, help="synthetic weights: zero probability"
    )
    common.add_argument(
        "--pattern",
        default="iid",
        help="synthetic sparsity pattern: iid or clustered:BLOCKCOLS",
    )
    common.add_argument(
        "--weights-dir", type=Path, help="directory of <layer>.smx weight files"
    )
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--designs",
        nargs="+",
        type=_parse_design,
        metavar="RxC",
        help="standard designs to compare (default: every width from MACS to VCOLS)",
    )
    common.add_argument(
        "--coefficients", type=Path, help="area/power coefficients CSV"
    )
    common.add_argument("--out", type=Path, default=Path("out"))
    common.add_argument(
        "--format", nargs="+", choices=["csv", "json"], default=["csv", "json"]
    )

    sub.add_parser("analyze", parents=[common], help="per-layer sparsity report")
    sub.add_parser(
        "simulate", parents=[common], help="cycles and efficiency comparison"
    )
    p_sweep = sub.add_parser(
        "sweep", parents=[common], help="growth and pruning-rate curves"
    )
    p_sweep.add_argument(
        "--grid-step", type=float, default=0.05, help="sparsity grid step over [0, 1]"
    )
    p_sweep.add_argument(
        "--grid", help="explicit comma-separated sparsity points (overrides step)"
    )
    p_verify = sub.add_parser(
        "verify", parents=[common], help="simulator self-checks against oracles"
    )
    p_verify.add_argument(
        "--instances", type=int, default=25, help="random instances per config"
    )
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    rows, vcols, macs = args.array
    array = validate_config(
        ArrayConfig(
            rows=rows, virtual_cols=vcols, macs_per_row=macs, clock_hz=args.clock_hz
        )
    )
    pattern, block_cols = args.pattern, None
    if pattern.startswith("clustered"):
        pattern, _, block = args.pattern.partition(":")
        if not block:
            raise ValueError("clustered pattern needs a block size: clustered:COLS")
        block_cols = int(block)
    elif pattern != "iid":
        raise ValueError(f"unknown pattern {args.pattern!r}")
    if args.sparsity is not None and not 0.0 <= args.sparsity <= 1.0:
        raise ValueError(f"sparsity must be in [0, 1], got {args.sparsity}")
    if args.sparsity is not None and args.weights_dir is not None:
        raise ValueError("--sparsity and --weights-dir are mutually exclusive")
    if args.command in ("analyze", "simulate"):
        if args.topology is None:
            raise ValueError(f"--topology is required for {args.command}")
        if args.sparsity is None and args.weights_dir is None:
            raise ValueError("need a weights source: --sparsity or --weights-dir")
    designs = args.designs or [
        (rows, w) for w in range(macs, vcols + 1)
    ]
    for d_rows, d_cols in designs:
        if d_rows < 1 or d_cols < 1:
            raise ValueError(f"bad design {d_rows}x{d_cols}")
    coefficients = (
        CostCoefficients.from_csv(args.coefficients)
        if args.coefficients
        else CostCoefficients.default()
    )
    return RunConfig(
        array=array,
        topology=args.topology,
        sparsity=args.sparsity,
        pattern=pattern,
        block_cols=block_cols,
        weights_dir=args.weights_dir,
        seed=args.seed,
        designs=designs,
        coefficients=coefficients,
        out_dir=args.out,
        formats=list(args.format),
    )


def resolve_gemms(cfg: RunConfig) -> list[tuple[str, GemmWorkload]]:
    """Lower every topology layer and attach weights (file or synthetic)."""
    if cfg.topology is None:
        raise ValueError("a topology file is required for this command")
    if cfg.weights_dir is None and cfg.sparsity is None:
        raise ValueError("need a weights source: sparsity or weights-dir")
    layers = parse_topology(cfg.topology)
    gemms = []
    for i, layer in enumerate(layers):
        shape = lower_to_gemm(layer)
        if cfg.weights_dir is not None:
            path = cfg.weights_dir / f"{layer.name}.smx"
            if not path.exists():
                raise FileNotFoundError(
                    f"layer {layer.name!r}: weight file not found: {path}"
                )
            weights = load_weights_file(path)
            if (weights.n_rows, weights.n_cols) != (shape.k, shape.c):
                raise ValueError(
                    f"layer {layer.name!r}: weights are "
                    f"{weights.n_rows}x{weights.n_cols}, expected "
                    f"{shape.k}x{shape.c}"
                )
        else:
            weights = generate_weights(
                shape.k,
                shape.c,
                cfg.sparsity,
                cfg.pattern,
                cfg.block_cols,
                seed=_layer_seed(cfg.seed, i),
            )
        gemms.append((layer.name, GemmWorkload(*shape, weights=weights)))
    return gemms


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def cmd_analyze(cfg: RunConfig) -> int:
    gemms = resolve_gemms(cfg)
    stats = sparsity_stats(gemms, cfg.array)
    print(f"{'layer':<16} {'zeros':>7}  windows (width: tiles)")
    rows = []
    for st in stats:
        windows = "  ".join(f"{w}:{n}" for w, n in st.window_tiles.items())
        print(f"{st.name:<16} {st.zero_fraction:>6.1%}  {windows}")
        for width, tiles in st.window_tiles.items():
            rows.append(
                (
                    st.name,
                    _fmt(st.zero_fraction),
                    width,
                    tiles,
                    st.window_cycles[width],
                )
            )
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.formats:
        _write_csv(
            cfg.out_dir / "sparsity.csv",
            ["layer", "zero_fraction", "window_width", "tiles", "cycles"],
            rows,
        )
    if "json" in cfg.formats:
        payload = [
            {
                "layer": st.name,
                "zero_fraction": st.zero_fraction,
                "row_nonzero_hist": {str(k): v for k, v in st.row_nonzero_hist.items()},
                "window_tiles": {str(k): v for k, v in st.window_tiles.items()},
                "window_cycles": {str(k): v for k, v in st.window_cycles.items()},
            }
            for st in stats
        ]
        (cfg.out_dir / "sparsity.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    gemms = resolve_gemms(cfg)
    workload = [g for _, g in gemms]
    macs = sum(g.dense_macs for g in workload)
    clock = cfg.array.clock_hz

    vusa_cycles, split = run_vusa(workload, cfg.array)
    reports = {}
    for rows, cols in cfg.designs:
        label = standard_label(rows, cols)
        reports[label] = make_report(
            label, run_standard(workload, rows, cols), macs, clock
        )
    ref_label = standard_label(cfg.array.rows, cfg.array.virtual_cols)
    if ref_label not in reports:
        reports[ref_label] = make_report(
            ref_label,
            run_standard(workload, cfg.array.rows, cfg.array.virtual_cols),
            macs,
            clock,
        )
    reports[VUSA_LABEL] = make_report(VUSA_LABEL, vusa_cycles, macs, clock, split)
    reference = reports[ref_label]
    reports = {
        label: normalize(rep, cfg.coefficients, reference)
        for label, rep in reports.items()
    }

    print(
        f"{'design':<14} {'cycles':>12} {'time_ms':>10} {'GOP/s':>8} "
        f"{'perf/area':>10} {'perf/power':>11} {'energy':>8}"
    )
    for label, rep in reports.items():
        print(
            f"{label:<14} {rep.total_cycles:>12} {rep.time_s * 1e3:>10.3f} "
            f"{rep.perf_gops:>8.2f} {rep.perf_per_area_norm:>10.2f} "
            f"{rep.perf_per_power_norm:>11.2f} {rep.energy_norm:>8.2f}"
        )
    if split.cycle_fraction:
        pretty = "  ".join(
            f"{w}: {frac:.1%}" for w, frac in split.cycle_fraction.items()
        )
        print(f"vusa load split (cycles): {pretty}")

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    if "csv" in cfg.formats:
        _write_csv(
            cfg.out_dir / "reports.csv",
            [
                "design",
                "total_cycles",
                "time_s",
                "perf_gops",
                "perf_per_area_norm",
                "perf_per_power_norm",
                "energy_norm",
            ],
            [
                (
                    label,
                    rep.total_cycles,
                    _fmt(rep.time_s),
                    _fmt(rep.perf_gops),
                    _fmt(rep.perf_per_area_norm),
                    _fmt(rep.perf_per_power_norm),
                    _fmt(rep.energy_norm),
                )
                for label, rep in reports.items()
            ],
        )
        _write_csv(
            cfg.out_dir / "load_split.csv",
            ["window_width", "cycle_fraction", "job_fraction", "cycles", "jobs"],
            [
                (
                    w,
                    _fmt(split.cycle_fraction[w]),
                    _fmt(split.job_fraction[w]),
                    split.cycles_by_width[w],
                    split.jobs_by_width[w],
                )
                for w in sorted(split.cycles_by_width)
            ],
        )
    if "json" in cfg.formats:
        payload = {label: rep.to_dict() for label, rep in reports.items()}
        (cfg.out_dir / "reports.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
    return EXIT_OK


def _sweep_grid(args: argparse.Namespace) -> list[float]:
    if args.grid:
        points = [float(p) for p in args.grid.split(",") if p.strip()]
    else:
        step = args.grid_step
        if not 0 < step <= 1:
            raise ValueError(f"grid step must be in (0, 1], got {step}")
        n = round(1.0 / step)
        points = [min(1.0, i * step) for i in range(n + 1)]
    if any(not 0.0 <= p <= 1.0 for p in points):
        raise ValueError("sparsity grid points must be in [0, 1]")
    return points


def cmd_sweep(cfg: RunConfig, grid: list[float]) -> int:
    curve = sweep_curve(cfg.array, grid)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        cfg.out_dir / "growth_curve.csv",
        ["sparsity", "window_width", "probability"],
        [(_fmt(p0), w, _fmt(prob)) for p0, w, prob in curve.rows()],
    )
    print(f"growth curve: {len(grid)} points -> {cfg.out_dir / 'growth_curve.csv'}")

    if cfg.topology is not None:
        layers = parse_topology(cfg.topology)
        points = pruning_sweep(layers, grid, cfg.array, cfg.coefficients, cfg.seed)
        _write_csv(
            cfg.out_dir / "pruning_efficiency.csv",
            [
                "sparsity",
                "vusa_cycles",
                "standard_cycles",
                "area_efficiency_ratio",
                "power_efficiency_ratio",
                "energy_ratio",
            ],
            [
                (
                    _fmt(pt.sparsity),
                    pt.vusa_cycles,
                    pt.standard_cycles,
                    _fmt(pt.area_efficiency_ratio),
                    _fmt(pt.power_efficiency_ratio),
                    _fmt(pt.energy_ratio),
                )
                for pt in points
            ],
        )
        print(f"pruning sweep -> {cfg.out_dir / 'pruning_efficiency.csv'}")
    else:
        print("no --topology given: skipping the pruning-efficiency sweep")
    return EXIT_OK


def run_verification(
    configs: Sequence[ArrayConfig],
    seed: int = 0,
    instances: int = 25,
    tile_mutator: Callable[[list[WindowAssignment]], list[WindowAssignment]]
    | None = None,
) -> list[str]:
    """Seeded self-checks; returns a list of failure descriptions.

    `tile_mutator` exists for tests: it can corrupt the partition before the
    invariant checks run, to prove violations are caught and named.
    """
    failures: list[str] = []
    for cfg in configs:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(cfg.rows, cfg.virtual_cols))
        )
        for i in range(instances):
            k = int(rng.integers(1, 2 * cfg.rows + 2))
            c = int(rng.integers(1, 3 * cfg.virtual_cols + 2))
            t = int(rng.integers(1, 9))
            weights = generate_weights(
                k, c, float(rng.random()), seed=int(rng.integers(2**31))
            )
            inputs = rng.integers(-100, 101, size=(t, k))
            assignments = partition(weights, cfg)
            if tile_mutator is not None:
                assignments = tile_mutator(assignments)
            bad = [
                name
                for a in assignments
                for name in validate_assignment(a, weights, cfg)
            ]
            if bad:
                failures.append(
                    f"{cfg.geometry} instance {i}: invariant violated: "
                    + ", ".join(sorted(set(bad)))
                )
                continue
            acc = np.zeros((t, c), dtype=np.int64)
            for a in assignments:
                row0 = a.tile.row_band * cfg.rows
                sl = slice(a.tile.col_start, a.tile.col_end)
                out, measured = simulate_tile(
                    a, weights, inputs[:, row0 : row0 + len(a.rows)], acc[:, sl], cfg
                )
                acc[:, sl] = out
                expected_cycles = tile_cycles(len(a.rows), a.tile.width, t)
                if measured != expected_cycles:
                    failures.append(
                        f"{cfg.geometry} instance {i}: cycle-model-vs-measured: "
                        f"{expected_cycles} != {measured}"
                    )
            if not np.array_equal(acc, dense_matmul(inputs, weights.values)):
                failures.append(
                    f"{cfg.geometry} instance {i}: dataflow-vs-oracle mismatch"
                )
        print(f"checked {cfg.geometry}: {instances} seeded instances")

    mc_cfg = configs[0]
    for p0 in (0.2, 0.5, 0.85):
        width = mc_cfg.virtual_cols
        closed = growth_prob(mc_cfg, width, 1.0 - p0)
        trials = 20_000
        estimate = monte_carlo_growth(
            mc_cfg, width, 1.0 - p0, trials, seed=seed + int(p0 * 100)
        )
        bound = 3.0 * (closed * (1.0 - closed) / trials) ** 0.5 + 1e-9
        if abs(estimate - closed) > bound:
            failures.append(
                f"growth-model-vs-monte-carlo at sparsity {p0}: "
                f"closed {closed:.6f} vs estimate {estimate:.6f}"
            )
    print(f"checked growth model vs Monte Carlo on {mc_cfg.geometry}")
    return failures


def cmd_verify(cfg: RunConfig, instances: int) -> int:
    configs = [cfg.array]
    for rows, vcols, macs in VERIFY_CONFIGS:
        candidate = ArrayConfig(rows, vcols, macs, cfg.array.clock_hz)
        if candidate != cfg.array:
            configs.append(candidate)
    failures = run_verification(configs, seed=cfg.seed, instances=instances)
    if failures:
        for failure in failures:
            print(f"FAIL {failure}")
        print(f"verification failed: {len(failures)} problem(s)")
        return EXIT_VERIFY
    print("verification passed")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            try:
                injected = _config_argv(load_config_file(args.config))
            except OSError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_RUNTIME
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_VALIDATION
            args = parser.parse_args([argv[0], *injected, *argv[1:]])
    except SystemExit as exc:  # argparse --help or usage error
        return int(exc.code or 0)
    try:
        cfg = build_run_config(args)
        grid = _sweep_grid(args) if args.command == "sweep" else None
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, grid)
        if args.command == "verify":
            return cmd_verify(cfg, args.instances)
        raise AssertionError(f"unhandled command {args.command}")
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
