"""Subsampling calibration of the two-sample statistics.

Replicates are built from without-replacement subsamples: rows are drawn,
re-ranked within the subsample, smoothed at the subsample's own order, and
the finite-population-corrected difference

    sqrt(b / (1 - b/n)) * (subsample surface - full-sample surface)

plays the role of the per-sample fluctuation process. No derivative
estimation is involved, which also makes the method valid when the
smoothing order equals the subsample size.
"""

from dataclasses import dataclass

import numpy as np

from .bernstein import EvaluationGrid, survival_table
from .estimators import CopulaEvaluator, stieltjes_cell_masses
from .multiplier import TestFragment, _pooled_process, _statistics_matrix, p_value
from .samplers import RngStream
from .statistics import (
    STATISTIC_NAMES,
    SampleSizes,
    StatisticTriple,
    triple_from_surfaces,
)

__all__ = [
    "SubsampleConfig",
    "draw_subsample_indices",
    "subsample_replicate_process",
    "subsample_test",
]


@dataclass(frozen=True)
class SubsampleConfig:
    """Subsample sizes, per-subsample smoothing orders, replicate count."""

    b1: int
    b2: int
    order1: int
    order2: int
    count: int

    def __post_init__(self) -> None:
        if self.b1 < 2 or self.b2 < 2:
            raise ValueError(f"subsample sizes must be >= 2, got {self.b1}, {self.b2}")
        if self.order1 < 1 or self.order2 < 1:
            raise ValueError(
                f"subsample orders must be >= 1, got {self.order1}, {self.order2}"
            )
        if self.count < 1:
            raise ValueError(f"replicate count must be >= 1, got {self.count}")


def draw_subsample_indices(n: int, b: int, rng: RngStream) -> np.ndarray:
    """`b` distinct row indices drawn uniformly from ``0..n-1``, sorted."""
    if not 2 <= b < n:
        raise ValueError(f"subsample size must satisfy 2 <= b < n, got b={b}, n={n}")
    idx = rng.generator().choice(n, size=b, replace=False)
    return np.sort(idx)


def subsample_replicate_process(
    full_ev: CopulaEvaluator,
    sub_rows: np.ndarray,
    sub_order: int | None,
    n: int,
    grid: EvaluationGrid,
) -> np.ndarray:
    """Corrected replicate process of one subsample on the grid.

    `sub_rows` are raw rows; they are re-ranked within the subsample
    before smoothing at `sub_order` (``None`` for no smoothing). `n` is
    the full-sample size behind `full_ev`.
    """
    sub_rows = np.asarray(sub_rows, dtype=float)
    b = sub_rows.shape[0]
    if not 2 <= b < n:
        raise ValueError(f"subsample size must satisfy 2 <= b < n, got b={b}, n={n}")
    sub_ev = CopulaEvaluator.from_data(sub_rows, sub_order)
    correction = np.sqrt(b / (1.0 - b / n))
    return correction * (
        np.asarray(sub_ev.evaluate(grid.points))
        - np.asarray(full_ev.evaluate(grid.points))
    )


def _within_subsample_ranks(sub: np.ndarray) -> np.ndarray:
    """Maximal ranks within each subsample, shape ``(H, b, d)``."""
    H, b, d = sub.shape
    ranks = np.empty((H, b, d), dtype=np.int64)
    for axis in range(d):
        a = sub[:, :, axis]
        ranks[:, :, axis] = (a[:, None, :] <= a[:, :, None]).sum(axis=2)
    return ranks


def _subsample_surfaces(
    data: np.ndarray,
    indices: np.ndarray,
    sub_order: int | None,
    grid: EvaluationGrid,
) -> np.ndarray:
    """Surfaces of every subsample estimator on the grid, shape ``(G, H)``.

    Per-axis weights with shape ``(H, g, b)`` are combined by broadcasting
    over all leading axes and one batched matmul over the observation axis,
    so the full ``G x H x b`` product is never materialized.
    """
    H, b = indices.shape
    d = grid.dim
    g = grid.points_per_axis
    sub = data[indices]  # (H, b, d)
    ranks = _within_subsample_ranks(sub)
    axis_weights = []
    if sub_order is not None:
        table = survival_table(sub_order, grid.axis_values)  # (g, m+2)
        ceil = -((-sub_order * ranks) // b)
        for axis in range(d):
            axis_weights.append(table.T[ceil[:, :, axis]].transpose(0, 2, 1))
    else:
        pseudo = ranks / b
        values = grid.axis_values[None, :, None]
        for axis in range(d):
            axis_weights.append((pseudo[:, None, :, axis] <= values).astype(float))

    if d == 1:
        surfaces = axis_weights[0].mean(axis=2).T
        return np.ascontiguousarray(surfaces)
    prod = axis_weights[0]
    for axis in range(1, d - 1):
        prod = (prod[:, :, None, :] * axis_weights[axis][:, None, :, :]).reshape(
            H, -1, b
        )
    surfaces = prod @ axis_weights[d - 1].transpose(0, 2, 1) / b  # (H, g^(d-1), g)
    return surfaces.reshape(H, grid.size).T.copy()


def subsample_test(
    x: np.ndarray,
    y: np.ndarray,
    cfg: SubsampleConfig,
    orders: tuple[int, int],
    grid: EvaluationGrid,
    rng: RngStream,
    mode: str = "bernstein",
    shared_indices: bool = False,
) -> TestFragment:
    """Full subsampling calibration of the three statistics.

    Observed statistics come from the full-sample estimators at `orders`
    (smoothing skipped in empirical mode). For each replicate ``h``, both
    index sets are drawn (first sample, then second) from the substream
    keyed by ``h``; with `shared_indices` (paired rows) the first set is
    applied to both samples. Replicate processes are combined with
    weights derived from ``b1 / (b1 + b2)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise ValueError(f"sample shapes {x.shape} and {y.shape} do not agree")
    if x.shape[1] != grid.dim:
        raise ValueError(
            f"sample dimension {x.shape[1]} does not match grid dimension {grid.dim}"
        )
    if mode not in ("bernstein", "empirical"):
        raise ValueError(f"unknown mode {mode!r}")
    n1, n2 = x.shape[0], y.shape[0]
    if not (cfg.b1 < n1 and cfg.b2 < n2):
        raise ValueError(
            f"subsample sizes ({cfg.b1}, {cfg.b2}) must be smaller than "
            f"sample sizes ({n1}, {n2})"
        )
    if shared_indices and (n1 != n2 or cfg.b1 != cfg.b2):
        raise ValueError("shared subsample indices require equal sizes")

    sizes = SampleSizes(n1, n2)
    if mode == "bernstein":
        ev_c = CopulaEvaluator.from_data(x, orders[0])
        ev_d = CopulaEvaluator.from_data(y, orders[1])
        sub_orders: tuple[int | None, int | None] = (cfg.order1, cfg.order2)
    else:
        ev_c = CopulaEvaluator.from_data(x)
        ev_d = CopulaEvaluator.from_data(y)
        sub_orders = (None, None)

    masses_c = stieltjes_cell_masses(ev_c, grid)
    surf_c = np.asarray(ev_c.evaluate(grid.points))
    surf_d = np.asarray(ev_d.evaluate(grid.points))
    observed = triple_from_surfaces(surf_c, surf_d, sizes, grid, masses_c)

    idx_x = np.empty((cfg.count, cfg.b1), dtype=np.int64)
    idx_y = np.empty((cfg.count, cfg.b2), dtype=np.int64)
    for h in range(cfg.count):
        gen = rng.split(h).generator()
        idx_x[h] = np.sort(gen.choice(n1, size=cfg.b1, replace=False))
        if shared_indices:
            idx_y[h] = idx_x[h]
        else:
            idx_y[h] = np.sort(gen.choice(n2, size=cfg.b2, replace=False))
    corr_c = np.sqrt(cfg.b1 / (1.0 - cfg.b1 / n1))
    corr_d = np.sqrt(cfg.b2 / (1.0 - cfg.b2 / n2))
    rep_c = _subsample_surfaces(x, idx_x, sub_orders[0], grid)
    rep_c -= surf_c[:, None]
    rep_c *= corr_c
    rep_d = _subsample_surfaces(y, idx_y, sub_orders[1], grid)
    rep_d -= surf_d[:, None]
    rep_d *= corr_d

    replicates = _statistics_matrix(
        _pooled_process(rep_c, rep_d, SampleSizes(cfg.b1, cfg.b2)), masses_c, grid
    )
    p_values = StatisticTriple(
        *(
            p_value(observed[name], replicates[:, i])
            for i, name in enumerate(STATISTIC_NAMES)
        )
    )
    return TestFragment(observed=observed, replicates=replicates, p_values=p_values)
