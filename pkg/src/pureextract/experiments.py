"""Experiment drivers behind the command line; each returns a ``CsvTable``."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .extraction import apply_projection, block_flip_projector
from .groundstate import (
    XYParams,
    build_hamiltonian,
    ground_state,
    parity_expectation,
    sector_ground,
    two_flip_field_window,
)
from .quench import QuenchSetup, evolved_state, time_grid
from .search import SearchResult, optimize_epp
from .spinbasis import (
    PureState,
    Region,
    RingGeometry,
    TwoFlipBasis,
    check_disjoint,
    contiguous_block,
)
from .states import supersinglet

log = logging.getLogger(__name__)


def format_value(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    x = float(value)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    text = f"{x:.12g}"
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


@dataclass
class CsvTable:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} fields, header has {len(self.header)}")
        self.rows.append(list(values))

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        lines += [",".join(format_value(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [row[i] for row in self.rows]


@dataclass(frozen=True)
class SweepGrid:
    gamma_range: tuple[float, float, float] = (-1.0, 1.0, 0.05)
    h_range: tuple[float, float, float] = (-2.0, 2.0, 0.05)
    n_sites: int = 6
    region_a: Region = (1, 2)
    region_b: Region = (4, 5)

    def __post_init__(self):
        for start, stop, step in (self.gamma_range, self.h_range):
            if step <= 0:
                raise ValueError("grid steps must be > 0")
            if stop < start:
                raise ValueError("grid stop must be >= start")
        check_disjoint(self.region_a, self.region_b)

    def gammas(self) -> np.ndarray:
        return grid_values(*self.gamma_range)

    def fields(self) -> np.ndarray:
        return grid_values(*self.h_range)


def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


def diametric_regions(n_sites: int, size: int, center: float) -> tuple[Region, Region]:
    """Blocks of ``size`` sites centred a quarter ring either side of ``center``."""
    if not 1 <= size <= n_sites // 2:
        raise ValueError(f"block size {size} outside 1..{n_sites // 2}")
    pole_a = int(math.floor(center - n_sites / 4 + 0.5) - 1) % n_sites + 1
    pole_b = (pole_a - 1 + n_sites // 2) % n_sites + 1
    return contiguous_block(n_sites, pole_a, size), contiguous_block(n_sites, pole_b, size)


def ring_midpoint(n_sites: int, r1: int, r2: int) -> float:
    """Midpoint of the shorter arc joining ``r1`` and ``r2``."""
    lo, hi = min(r1, r2), max(r1, r2)
    if hi - lo <= n_sites - (hi - lo):
        return (lo + hi) / 2
    return ((hi + lo + n_sites) / 2 - 1) % n_sites + 1


# --------------------------------------------------------------------------


def cmd_supersinglet(n: int) -> CsvTable:
    if not 2 <= n <= 5:
        raise ValueError("supersinglet size must be in 2..5")
    result = optimize_epp(supersinglet(n), [1], [2])
    table = CsvTable(["N", "best_epp", "probability", "entropy"])
    best = result.best
    table.add(n, result.best_epp, best.probability if best else 0.0, best.entropy if best else 0.0)
    return table


def cmd_quench(
    n: int = 24,
    r1: int = 10,
    r2: int = 14,
    t_max: float = 6.0,
    dt: float = 0.05,
    blocks: Sequence[int] | None = None,
    placement: tuple[Region, Region] | None = None,
    engine: str = "sector",
) -> CsvTable:
    """Entropy, probability and E_PP of block-flip extraction over time.

    Impossible branches (probability <= 1e-12) are written with entropy 0.
    """
    geometry = RingGeometry(n)
    setup = QuenchSetup(geometry, r1, r2)
    if placement is not None:
        check_disjoint(*placement)
        layouts = [placement]
    else:
        sizes = range(2, n // 2 + 1) if blocks is None else blocks
        center = ring_midpoint(n, r1, r2)
        layouts = [diametric_regions(n, size, center) for size in sizes]
    layouts = sorted(layouts, key=lambda ab: (len(ab[0]), len(ab[1])))
    projectors = [
        (block_flip_projector(a, n), block_flip_projector(b, n)) for a, b in layouts
    ]
    times = time_grid(t_max, dt)
    states = [evolved_state(setup.at(t), engine) for t in times]
    table = CsvTable(["t", "delta_A", "delta_B", "entropy", "probability", "epp"])
    for (a, b), (p_a, p_b) in zip(layouts, projectors):
        for t, state in zip(times, states):
            out = apply_projection(state, p_a, p_b)
            entropy = out.entropy if out.is_pure else 0.0
            table.add(t, len(a), len(b), entropy, out.probability, out.epp)
    return table


def two_flip_ground_state(n: int) -> PureState:
    _, vec = sector_ground(n, 0.0, 2)
    return PureState(TwoFlipBasis(n), vec)


def cmd_groundstate(
    n: int = 24,
    h: float | None = None,
    delta_max: int | None = None,
    placement: tuple[Region, Region] | None = None,
) -> CsvTable:
    """Block-flip extraction from the two-flip ground state for growing blocks."""
    lo, hi = two_flip_field_window(n)
    if h is None:
        h = (lo + hi) / 2
    warning = ""
    if not lo < h < hi:
        warning = "h_outside_m2_window"
        log.warning(
            "h=%g lies outside the two-flip ground window (%.6g, %.6g); using the m=2 state",
            h, lo, hi,
        )
    state = two_flip_ground_state(n)
    if placement is not None:
        check_disjoint(*placement)
        layouts = [placement]
    else:
        top = n // 2 if delta_max is None else delta_max
        if not 2 <= top <= n // 2:
            raise ValueError(f"delta-max must lie in 2..{n // 2}")
        layouts = [diametric_regions(n, size, n / 2) for size in range(2, top + 1)]
    table = CsvTable(["delta_A", "entropy", "probability", "epp", "warning"])
    for a, b in layouts:
        out = apply_projection(state, block_flip_projector(a, n), block_flip_projector(b, n))
        entropy = out.entropy if out.is_pure else 0.0
        table.add(len(a), entropy, out.probability, out.epp, warning)
    return table


@dataclass(frozen=True)
class SweepPoint:
    gamma: float
    h: float
    parity: float
    degeneracy: int
    max_entropy: float
    max_probability: float
    epp: float
    result: SearchResult | None = field(default=None, repr=False, compare=False)


def sweep_point(
    gamma: float,
    h: float,
    n: int = 6,
    region_a: Region = (1, 2),
    region_b: Region = (4, 5),
    keep_result: bool = False,
) -> SweepPoint:
    """Full search at one ``(gamma, h)``; degenerate ground spaces report the best vector."""
    report = ground_state(build_hamiltonian(XYParams(n, gamma, h)))
    best = None
    for vector in report.manifold:
        result = optimize_epp(vector, region_a, region_b)
        if best is None or result.best_epp > best[0].best_epp + 1e-12:
            best = (result, vector)
    result, vector = best
    return SweepPoint(
        float(gamma),
        float(h),
        parity_expectation(vector),
        report.degeneracy,
        result.max_entropy,
        result.max_probability,
        result.best_epp,
        result if keep_result else None,
    )


def _sweep_task(args) -> SweepPoint:
    return sweep_point(*args)


def run_sweep(grid: SweepGrid, workers: int = 1) -> list[SweepPoint]:
    tasks = [
        (g, h, grid.n_sites, grid.region_a, grid.region_b)
        for g in grid.gammas()
        for h in grid.fields()
    ]
    if workers <= 1:
        return [_sweep_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (8 * workers))))


def cmd_sweep(grid: SweepGrid | None = None, workers: int = 1) -> CsvTable:
    grid = SweepGrid() if grid is None else grid
    table = CsvTable(
        ["gamma", "h", "parity", "degeneracy", "max_entropy", "max_probability", "epp"]
    )
    for p in run_sweep(grid, workers):
        table.add(p.gamma, p.h, p.parity, p.degeneracy, p.max_entropy, p.max_probability, p.epp)
    return table


def _subset_label(indices: Iterable[int]) -> str:
    return ";".join(str(i + 1) for i in indices)


def cmd_search(state: PureState, region_a: Sequence[int], region_b: Sequence[int]) -> CsvTable:
    """Every pure candidate, case-b detections, and a final ``best`` row.

    Subsets list 1-based Schmidt indices joined by ``;``.
    """
    result = optimize_epp(state, region_a, region_b)
    weights = result.decomposition.weights
    table = CsvTable(
        ["kind", "branch", "weight", "mu", "nu", "probability", "entropy", "epp"]
    )
    for score in result.all_pure_candidates:
        c = score.candidate
        table.add(
            "candidate", c.branch + 1, weights[c.branch], _subset_label(c.mu),
            _subset_label(c.nu), score.probability, score.entropy, score.epp,
        )
    for det in result.case_b_detections:
        c = det.candidate
        table.add(
            "case_b", c.branch + 1, weights[c.branch], _subset_label(c.mu),
            _subset_label(c.nu), det.probability, det.entropy, 0.0,
        )
    if result.best is None:
        table.add("best", "", "", "", "", 0.0, 0.0, 0.0)
    else:
        c = result.best.candidate
        table.add(
            "best", c.branch + 1, weights[c.branch], _subset_label(c.mu),
            _subset_label(c.nu), result.best.probability, result.best.entropy,
            result.best_epp,
        )
    return table
