"""Multiplier-bootstrap calibration of the two-sample statistics.

Each replicate reweights the observations of a sample with centered
Exp(1) multipliers to mimic the sample's limiting fluctuation process,
then corrects with plug-in partial derivatives of the estimated surface:

    rep(u) = Ghat(u) - sum_l Ghat(margin_l(u)) * d/du_l surface(u)

Replicates of both samples are combined into a pooled difference process
whose statistics calibrate the observed ones. All H replicates are driven
by substreams keyed by the replicate index, so results do not depend on
evaluation order.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .bernstein import EvaluationGrid
from .estimators import CopulaEvaluator, stieltjes_cell_masses
from .samplers import RngStream
from .statistics import (
    STATISTIC_NAMES,
    SampleSizes,
    StatisticTriple,
    triple_from_surfaces,
)

__all__ = [
    "TestFragment",
    "draw_centered_multipliers",
    "draw_paired_multipliers",
    "finite_difference_derivatives",
    "g_hat_process",
    "multiplier_test",
    "p_value",
    "replicate_process",
    "replicate_statistics",
]


@dataclass(frozen=True)
class TestFragment:
    """One resampling method's output: observed values, replicates, p-values."""

    observed: StatisticTriple
    replicates: np.ndarray  # shape (H, 3), columns ordered as STATISTIC_NAMES
    p_values: StatisticTriple


def draw_centered_multipliers(
    n1: int, n2: int, count: int, rng: RngStream
) -> tuple[np.ndarray, np.ndarray]:
    """Centered Exp(1) multiplier blocks for both samples.

    For each replicate ``h``, ``n1 + n2`` unit-exponential values are
    drawn (replicates in increasing ``h`` order from the stream's
    generator); the first ``n1`` and the last ``n2`` are each centered by
    their own mean. Returns arrays of shape ``(count, n1)`` and
    ``(count, n2)`` whose rows sum to zero.
    """
    if n1 < 2 or n2 < 2:
        raise ValueError(f"sample sizes must be >= 2, got {n1}, {n2}")
    block = rng.generator().standard_exponential((count, n1 + n2))
    first = block[:, :n1]
    second = block[:, n1:]
    first -= first.mean(axis=1, keepdims=True)
    second -= second.mean(axis=1, keepdims=True)
    return first, np.ascontiguousarray(second)


def draw_paired_multipliers(n: int, count: int, rng: RngStream) -> np.ndarray:
    """One centered Exp(1) multiplier per paired row, shape ``(count, n)``."""
    if n < 2:
        raise ValueError(f"sample size must be >= 2, got {n}")
    block = rng.generator().standard_exponential((count, n))
    block -= block.mean(axis=1, keepdims=True)
    return block


def g_hat_process(
    ev: CopulaEvaluator, xi_centered: np.ndarray, points: np.ndarray
) -> np.ndarray:
    """Multiplier-weighted surface process at arbitrary points.

    Returns ``(1/sqrt(n)) sum_i xi_i * prod_l w_l(u, i)`` for each point,
    with the same per-observation weights the evaluator itself uses.
    """
    xi_centered = np.asarray(xi_centered, dtype=float)
    if xi_centered.shape != (ev.nobs,):
        raise ValueError(
            f"multiplier vector of shape {xi_centered.shape} does not match "
            f"sample size {ev.nobs}"
        )
    return ev.factors(points) @ xi_centered / np.sqrt(ev.nobs)


def finite_difference_derivatives(
    ev: CopulaEvaluator, grid: EvaluationGrid
) -> np.ndarray:
    """Centered finite-difference margin derivatives on the grid, ``(d, G)``.

    Step ``1/sqrt(n)`` with evaluation points clamped to ``[0, 1]``; used
    for the unsmoothed empirical copula whose surface has no usable
    closed-form derivatives.
    """
    return _GridFactors(ev, grid).derivatives


class _GridFactors:
    """Per-observation factor arrays of one evaluator on one grid.

    Caches the per-axis weight matrices ``(G, n)`` so that the surface,
    the margin derivatives, and the derivative-corrected factor matrix

        M[p, i] = prod_l w_l(u_p, i)
                  - sum_l  d/du_l surface(u_p) * w_l(u_p[l], i)

    are all built from the same gathers. Every replicate quantity is then
    a single matrix product with the multiplier block: the corrected
    process for all H replicates at once is ``M @ xi.T / sqrt(n)``.
    """

    def __init__(self, ev: CopulaEvaluator, grid: EvaluationGrid):
        self.ev = ev
        self.grid = grid
        idx = grid.axis_indices
        self.axis_weights = [
            ev.axis_weights(grid.axis_values, ax)[idx[:, ax]]
            for ax in range(grid.dim)
        ]
        self.factors = self.axis_weights[0].copy()
        for ax in range(1, grid.dim):
            self.factors *= self.axis_weights[ax]
        self.surface = self.factors.mean(axis=1)
        self.derivatives = self._derivative_surfaces()

    def _derivative_surfaces(self) -> np.ndarray:
        ev, grid = self.ev, self.grid
        idx = grid.axis_indices
        out = np.empty((grid.dim, grid.size))
        step = 1.0 / np.sqrt(ev.nobs)
        for axis in range(grid.dim):
            others = None
            for j in range(grid.dim):
                if j == axis:
                    continue
                others = (
                    self.axis_weights[j].copy()
                    if others is None
                    else others * self.axis_weights[j]
                )
            if ev.order is not None:
                deriv_w = ev.derivative_axis_weights(grid.axis_values, axis)[
                    idx[:, axis]
                ]
                out[axis] = (others * deriv_w).mean(axis=1)
            else:
                hi_vals = np.clip(grid.axis_values + step, 0.0, 1.0)
                lo_vals = np.clip(grid.axis_values - step, 0.0, 1.0)
                hi = ev.axis_weights(hi_vals, axis)[idx[:, axis]]
                lo = ev.axis_weights(lo_vals, axis)[idx[:, axis]]
                out[axis] = ((others * hi).mean(axis=1) - (others * lo).mean(axis=1)) / (
                    2.0 * step
                )
        return out

    def corrected_factors(self) -> np.ndarray:
        """Factor matrix with the margin-derivative correction folded in."""
        corrected = self.factors.copy()
        for axis in range(self.grid.dim):
            corrected -= self.derivatives[axis][:, None] * self.axis_weights[axis]
        return corrected


def _replicate_matrix(
    ev: CopulaEvaluator,
    xi: np.ndarray,
    grid: EvaluationGrid,
    factors: "_GridFactors | None" = None,
) -> np.ndarray:
    """Replicate processes for all multiplier rows at once, shape ``(G, H)``."""
    xi = np.asarray(xi, dtype=float)
    if factors is None:
        factors = _GridFactors(ev, grid)
    return factors.corrected_factors() @ xi.T / np.sqrt(ev.nobs)


def replicate_process(
    ev: CopulaEvaluator,
    xi_centered: np.ndarray,
    grid: EvaluationGrid,
) -> np.ndarray:
    """Derivative-corrected replicate process of one sample on the grid.

    ``rep(u) = Ghat(u) - sum_l Ghat(u with all coordinates but l set to 1)
    * d/du_l surface(u)``, evaluated at every grid point for a single
    centered multiplier vector.
    """
    xi_centered = np.asarray(xi_centered, dtype=float)
    if xi_centered.shape != (ev.nobs,):
        raise ValueError(
            f"multiplier vector of shape {xi_centered.shape} does not match "
            f"sample size {ev.nobs}"
        )
    return _replicate_matrix(ev, xi_centered[None, :], grid)[:, 0]


def _statistics_matrix(
    pooled: np.ndarray, masses: np.ndarray, grid: EvaluationGrid
) -> np.ndarray:
    """Per-replicate statistic triples from pooled processes, ``(H, 3)``.

    `pooled` is consumed (squared in place).
    """
    np.multiply(pooled, pooled, out=pooled)
    out = np.empty((pooled.shape[1], len(STATISTIC_NAMES)))
    out[:, 0] = grid.cell_volume * pooled.sum(axis=0)
    out[:, 1] = masses @ pooled
    np.sqrt(pooled.max(axis=0), out=out[:, 2])
    return out


def _pooled_process(
    rep_c: np.ndarray, rep_d: np.ndarray, sizes: SampleSizes
) -> np.ndarray:
    """Combine the per-sample replicates in place (both inputs consumed)."""
    lam = sizes.lam
    np.multiply(rep_c, np.sqrt(1.0 - lam), out=rep_c)
    np.multiply(rep_d, np.sqrt(lam), out=rep_d)
    np.subtract(rep_c, rep_d, out=rep_c)
    return rep_c


def replicate_statistics(
    rep_c: np.ndarray,
    rep_d: np.ndarray,
    sizes: SampleSizes,
    ev_c: CopulaEvaluator,
    grid: EvaluationGrid,
    masses: np.ndarray | None = None,
) -> StatisticTriple:
    """Statistic triple of one replicate pair.

    Combines the two per-sample replicate processes with weights
    ``sqrt(1 - lambda)`` and ``sqrt(lambda)`` and computes the same three
    functionals as the observed statistics: squared-integral against
    Lebesgue measure, against the first sample's cell masses (`masses`
    may be passed to avoid recomputation), and the supremum.
    """
    rep_c = np.array(rep_c, dtype=float)
    rep_d = np.array(rep_d, dtype=float)
    if rep_c.shape != (grid.size,) or rep_d.shape != (grid.size,):
        raise ValueError("replicate processes must be aligned to the grid")
    if masses is None:
        masses = stieltjes_cell_masses(ev_c, grid)
    pooled = _pooled_process(rep_c[:, None], rep_d[:, None], sizes)
    row = _statistics_matrix(pooled, masses, grid)[0]
    return StatisticTriple(*map(float, row))


def p_value(observed: float, replicates: np.ndarray) -> float:
    """Right-tail resampling p-value ``#(replicate >= observed) / H``.

    The comparison is weak, so ties between replicates and the observed
    value count toward the p-value (conservative).
    """
    replicates = np.asarray(replicates)
    if replicates.size < 1:
        raise ValueError("need at least one replicate")
    return float(np.count_nonzero(replicates >= observed)) / replicates.size


def multiplier_test(
    x: np.ndarray,
    y: np.ndarray,
    mode: str,
    orders: tuple[int, int],
    count: int,
    grid: EvaluationGrid,
    rng: RngStream,
    multipliers: tuple[np.ndarray, np.ndarray] | None = None,
) -> TestFragment:
    """Full multiplier calibration of the three statistics.

    Parameters
    ----------
    x, y : ndarray
        Raw samples of shape ``(n1, d)`` and ``(n2, d)``.
    mode : str
        ``"bernstein"`` for smoothed surfaces with closed-form derivative
        plug-in, ``"empirical"`` for raw surfaces with finite-difference
        derivatives.
    orders : tuple of int
        Smoothing orders ``(m1, m2)``; ignored in empirical mode.
    count : int
        Number of replicates ``H``.
    multipliers : optional
        Pre-drawn centered blocks ``(xi_c, xi_d)`` of shapes
        ``(H, n1)``, ``(H, n2)``; used to share draws across modes or to
        couple paired samples. Drawn from `rng` when omitted.
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
    sizes = SampleSizes(n1, n2)
    if mode == "bernstein":
        m1, m2 = orders
        if m1 >= n1 or m2 >= n2:
            warnings.warn(
                f"multiplier calibration with order >= sample size "
                f"(m1={m1}, n1={n1}, m2={m2}, n2={n2}) is outside the "
                f"method's validity range; consider the subsampling method",
                UserWarning,
                stacklevel=2,
            )
        ev_c = CopulaEvaluator.from_data(x, m1)
        ev_d = CopulaEvaluator.from_data(y, m2)
    else:
        ev_c = CopulaEvaluator.from_data(x)
        ev_d = CopulaEvaluator.from_data(y)

    factors_c = _GridFactors(ev_c, grid)
    factors_d = _GridFactors(ev_d, grid)
    masses_c = stieltjes_cell_masses(ev_c, grid)
    observed = triple_from_surfaces(
        factors_c.surface, factors_d.surface, sizes, grid, masses_c
    )

    if multipliers is None:
        xi_c, xi_d = draw_centered_multipliers(n1, n2, count, rng)
    else:
        xi_c, xi_d = multipliers
    rep_c = _replicate_matrix(ev_c, xi_c, grid, factors_c)
    rep_d = _replicate_matrix(ev_d, xi_d, grid, factors_d)
    replicates = _statistics_matrix(_pooled_process(rep_c, rep_d, sizes), masses_c, grid)
    p_values = StatisticTriple(
        *(
            p_value(observed[name], replicates[:, i])
            for i, name in enumerate(STATISTIC_NAMES)
        )
    )
    return TestFragment(observed=observed, replicates=replicates, p_values=p_values)
