"""Throughput, normalized area/power efficiency, and pruning-rate sweeps.

Cycle counts become wall-clock time at the configured clock; throughput
counts two operations per dense MAC position, zeros included, since skipped
work is still delivered output. Area and power enter only as normalized
coefficients from synthesis data, so every efficiency figure here is a ratio
against a reference design (the full-width standard array by default).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .core import ArrayConfig, CostCoefficients, standard_label
from .timing import LoadSplit, run_standard, run_vusa
from .workload import GemmWorkload, LayerSpec, generate_weights, lower_to_gemm


@dataclass(frozen=True)
class RunReport:
    """Metrics for one design executing one workload."""

    design_label: str
    total_cycles: int
    time_s: float
    perf_gops: float
    perf_per_area_norm: float | None = None
    perf_per_power_norm: float | None = None
    energy_norm: float | None = None
    load_split: LoadSplit | None = None

    def to_dict(self) -> dict:
        d = {
            "design": self.design_label,
            "total_cycles": self.total_cycles,
            "time_s": self.time_s,
            "perf_gops": self.perf_gops,
            "perf_per_area_norm": self.perf_per_area_norm,
            "perf_per_power_norm": self.perf_per_power_norm,
            "energy_norm": self.energy_norm,
        }
        if self.load_split is not None:
            d["load_split_cycles"] = {
                str(w): f for w, f in self.load_split.cycle_fraction.items()
            }
            d["load_split_jobs"] = {
                str(w): f for w, f in self.load_split.job_fraction.items()
            }
        return d


def throughput(total_dense_macs: int, cycles: int, clock_hz: float) -> float:
    """GOP/s at two ops per dense MAC position."""
    if cycles <= 0:
        raise ValueError(f"cycles must be positive, got {cycles}")
    if total_dense_macs < 0:
        raise ValueError(f"mac count must be non-negative, got {total_dense_macs}")
    return 2.0 * total_dense_macs / (cycles / clock_hz) / 1e9


def make_report(
    design_label: str,
    total_cycles: int,
    total_dense_macs: int,
    clock_hz: float,
    load_split: LoadSplit | None = None,
) -> RunReport:
    return RunReport(
        design_label=design_label,
        total_cycles=total_cycles,
        time_s=total_cycles / clock_hz,
        perf_gops=throughput(total_dense_macs, total_cycles, clock_hz),
        load_split=load_split,
    )


def normalize(
    report: RunReport, coefficients: CostCoefficients, reference: RunReport
) -> RunReport:
    """Fill in efficiency metrics relative to `reference`.

    perf/area and perf/power are ratios of the respective densities; energy
    is power * time over the reference's power * time.
    """
    area = coefficients.area_of(report.design_label)
    power = coefficients.power_of(report.design_label)
    ref_area = coefficients.area_of(reference.design_label)
    ref_power = coefficients.power_of(reference.design_label)
    return replace(
        report,
        perf_per_area_norm=(report.perf_gops / area)
        / (reference.perf_gops / ref_area),
        perf_per_power_norm=(report.perf_gops / power)
        / (reference.perf_gops / ref_power),
        energy_norm=(power * report.time_s) / (ref_power * reference.time_s),
    )


@dataclass(frozen=True)
class SweepPoint:
    """Efficiency of the upscaled array vs the full-width standard array at
    one pruning rate."""

    sparsity: float
    vusa_cycles: int
    standard_cycles: int
    area_efficiency_ratio: float
    power_efficiency_ratio: float
    energy_ratio: float


def pruning_sweep(
    layers: Sequence[LayerSpec],
    sparsity_grid: Iterable[float],
    cfg: ArrayConfig,
    coefficients: CostCoefficients,
    seed: int = 0,
) -> list[SweepPoint]:
    """Synthesize i.i.d. weights at each pruning rate and compare the
    upscaled array against the standard rows x virtual_cols array.

    Layer sub-seeds are fixed per layer, so raising the rate only adds zeros
    and the resulting curves are monotone rather than sampling noise.
    """
    shapes = [lower_to_gemm(layer) for layer in layers]
    layer_seeds = [
        np.random.SeedSequence(entropy=seed, spawn_key=(i,))
        for i in range(len(shapes))
    ]
    ref_label = standard_label(cfg.rows, cfg.virtual_cols)
    points = []
    for p0 in sparsity_grid:
        gemms = [
            GemmWorkload(
                k=s.k,
                c=s.c,
                t=s.t,
                weights=generate_weights(s.k, s.c, p0, "iid", seed=sub),
            )
            for s, sub in zip(shapes, layer_seeds)
        ]
        macs = sum(g.dense_macs for g in gemms)
        vusa_cycles, split = run_vusa(gemms, cfg)
        std_cycles = run_standard(gemms, cfg.rows, cfg.virtual_cols)
        ref = make_report(ref_label, std_cycles, macs, cfg.clock_hz)
        vusa = normalize(
            make_report("vusa", vusa_cycles, macs, cfg.clock_hz, split),
            coefficients,
            ref,
        )
        points.append(
            SweepPoint(
                sparsity=float(p0),
                vusa_cycles=vusa_cycles,
                standard_cycles=std_cycles,
                area_efficiency_ratio=vusa.perf_per_area_norm,
                power_efficiency_ratio=vusa.perf_per_power_norm,
                energy_ratio=vusa.energy_norm,
            )
        )
    return points
