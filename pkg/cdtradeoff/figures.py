"""Row tables behind the two reference figures.

``fig2`` is the (R1, R2, D1) boundary of the multiplicative BC with both
baselines; ``fig4`` is the sum-rate versus symmetric distortion of the Dueck
channel. Rows are plain tuples in the order of the matching column constants.
"""
from __future__ import annotations

import logging
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from .channels import DUECK, MULTIPLICATIVE
from .closed_forms import (
    ENVELOPE_SLACK,
    corollary1_region,
    dueck_inner_sum_rate,
    dueck_min_distortion,
    dueck_outer_sum_rate,
    dueck_saturation_distortion,
)
from .errors import DomainError
from .logging_utils import log_with_context
from .regions import RegionPoint, baseline_resource_splitting, baseline_time_sharing

FIG2_COLUMNS = ("r", "p", "R1", "R2", "D1", "curve", "share")
FIG4_COLUMNS = ("D", "outer", "inner", "resource_splitting", "time_sharing")
FIGURES = ("fig2", "fig4")

FIG4_STEP = 1e-3
FIG4_TAIL = 0.01

Row = Tuple[Any, ...]


def unit_grid(grid_res: int) -> List[float]:
    if grid_res < 1:
        raise DomainError(f"grid resolution must be at least 1, got {grid_res}")
    return [float(value) for value in np.linspace(0.0, 1.0, grid_res + 1)]


def fig2_rows(q: float = 0.6, gamma: float = 0.5, grid_res: int = 20) -> List[Row]:
    """Multiplicative-channel surface over a (p, r) grid, then the resource-splitting and time-sharing sweeps.

    ``curve`` names the scheme; ``share`` is the time-sharing weight of the
    communicating operating point (empty for the surface itself).
    """
    grid = unit_grid(grid_res)
    rows: List[Row] = []
    for p in grid:
        for r in grid:
            point = corollary1_region(q, gamma, p, r)
            rows.append((r, p, point.r1, point.r2, point.d1, "cd", None))

    splitting = baseline_resource_splitting(MULTIPLICATIVE, q=q, gamma=gamma, r_values=grid)
    for r, endpoint in zip(grid, splitting.communication):
        for share in grid:
            point = baseline_time_sharing([splitting.sensing, endpoint], [1.0 - share, share])
            rows.append((r, None, point.r1, point.r2, point.d1, "resource_splitting", share))

    for r in grid:
        silent = corollary1_region(q, gamma, 1.0, r)
        fastest = corollary1_region(q, gamma, 0.5, r)
        for share in grid:
            point = baseline_time_sharing([silent, fastest], [1.0 - share, share])
            rows.append((r, None, point.r1, point.r2, point.d1, "time_sharing", share))

    log_with_context(logging.INFO, "Built fig2 rows", q=q, gamma=gamma, grid_res=grid_res, rows=len(rows))
    return rows


def fig4_grid(p_s1: float = 0.75) -> List[float]:
    """D_min + j/1000 below the saturation distortion, then the saturation point and 0.01 past it."""
    d_min = dueck_min_distortion(p_s1)
    d_sat = dueck_saturation_distortion(p_s1)
    grid: List[float] = []
    step = 0
    while d_min + step * FIG4_STEP < d_sat - ENVELOPE_SLACK:
        grid.append(d_min + step * FIG4_STEP)
        step += 1
    grid.extend([d_sat, d_sat + FIG4_TAIL])
    return grid


def _line(start: RegionPoint, end: RegionPoint, distortion: float) -> Optional[float]:
    """Sum-rate of the time-shared pair at ``distortion``, held flat past ``end``."""
    if distortion < start.d1 - ENVELOPE_SLACK:
        return None
    span = end.d1 - start.d1
    share = 1.0 if span <= ENVELOPE_SLACK else min(max((distortion - start.d1) / span, 0.0), 1.0)
    return baseline_time_sharing([start, end], [1.0 - share, share]).sum_rate


def _symmetric(sum_rate: float, distortion: float, source: str) -> RegionPoint:
    return RegionPoint(sum_rate / 2.0, sum_rate / 2.0, distortion, distortion, source)


def fig4_rows(p_s1: float = 0.75, *, exact: bool = False, grid: Optional[Sequence[float]] = None) -> List[Row]:
    """Outer and inner sum-rate envelopes with both baselines.

    Without ``exact`` the envelopes hold their last sampled value from the
    saturation distortion on, like the reference curve data.
    """
    distortions = list(fig4_grid(p_s1) if grid is None else grid)
    d_min = dueck_min_distortion(p_s1)
    d_sat = dueck_saturation_distortion(p_s1)

    splitting = baseline_resource_splitting(DUECK, ps1=p_s1, r_values=(0.5,))
    sensing, talking = splitting.sensing, splitting.communication[0]
    low = _symmetric(dueck_inner_sum_rate(p_s1, d_min) or 1.0, d_min, "time_sharing")
    high = _symmetric(dueck_inner_sum_rate(p_s1, d_sat) or 1.0, d_sat, "time_sharing")

    held: Optional[Tuple[Optional[float], Optional[float]]] = None
    rows: List[Row] = []
    for distortion in distortions:
        outer = dueck_outer_sum_rate(p_s1, distortion)
        inner = dueck_inner_sum_rate(p_s1, distortion)
        if not exact and distortion >= d_sat - ENVELOPE_SLACK and held is not None:
            outer, inner = held
        elif distortion < d_sat - ENVELOPE_SLACK:
            held = (outer, inner)
        rows.append(
            (
                distortion,
                outer,
                inner,
                _line(sensing, talking, distortion),
                _line(low, high, distortion),
            )
        )
    log_with_context(logging.INFO, "Built fig4 rows", p_s1=p_s1, exact=exact, rows=len(rows))
    return rows
