"""Bernstein polynomial basis, binomial survival tables, and evaluation grids.

Everything here is a pure function of its inputs; returned arrays are
read-only so they can be shared freely across workers.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CapacityError",
    "EvaluationGrid",
    "bernstein_weights",
    "binomial_survival",
    "make_grid",
    "survival_table",
    "weight_table",
]


class CapacityError(ValueError):
    """A requested object would exceed the addressable size."""


def _check_unit_interval(u: np.ndarray) -> None:
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError(f"evaluation points must lie in [0, 1], got {u!r}")


def weight_table(m: int, u: np.ndarray) -> np.ndarray:
    """Binomial pmf rows ``P_{k,m}(u)`` for every value in `u`.

    Parameters
    ----------
    m : int
        Basis degree, ``m >= 0``.
    u : array_like
        Points in ``[0, 1]``.

    Returns
    -------
    ndarray of shape ``(len(u), m + 1)``
        Row ``a`` holds ``[P_{0,m}(u_a), ..., P_{m,m}(u_a)]`` with
        ``P_{k,m}(u) = binom(m, k) u^k (1-u)^(m-k)``. Rows are nonnegative
        and sum to one; endpoints ``u in {0, 1}`` are exact.

    Notes
    -----
    Uses the multiplicative recurrence
    ``P_{k+1,m} = P_{k,m} * ((m-k)/(k+1)) * (u/(1-u))`` accumulated in log
    space, so no explicit factorials appear and degrees up to at least 10^4
    are handled without overflow or underflow of the normalization.
    """
    if m < 0:
        raise ValueError(f"degree must be nonnegative, got m={m}")
    u = np.atleast_1d(np.asarray(u, dtype=float))
    _check_unit_interval(u)
    out = np.zeros((u.size, m + 1))
    if m == 0:
        out[:, 0] = 1.0
        return out

    at_zero = u == 0.0
    at_one = u == 1.0
    out[at_zero, 0] = 1.0
    out[at_one, m] = 1.0

    interior = ~(at_zero | at_one)
    if np.any(interior):
        ui = u[interior, None]
        k = np.arange(m, dtype=float)
        log_ratio = np.log((m - k) / (k + 1.0))[None, :] + (
            np.log(ui) - np.log1p(-ui)
        )
        logw = np.empty((ui.size, m + 1))
        logw[:, 0] = m * np.log1p(-ui[:, 0])
        np.cumsum(log_ratio, axis=1, out=logw[:, 1:])
        logw[:, 1:] += logw[:, :1]
        w = np.exp(logw - logw.max(axis=1, keepdims=True))
        w /= w.sum(axis=1, keepdims=True)
        out[interior] = w
    return out


def bernstein_weights(m: int, u: float) -> np.ndarray:
    """Bernstein basis weights ``[P_{0,m}(u), ..., P_{m,m}(u)]`` at one point.

    `m` must be a positive integer and `u` must lie in ``[0, 1]``.
    """
    if m < 1:
        raise ValueError(f"Bernstein order must be >= 1, got m={m}")
    return weight_table(m, np.asarray([u], dtype=float))[0]


def survival_table(m: int, u: np.ndarray) -> np.ndarray:
    """Binomial survival rows ``P(B >= k)`` for ``B ~ Binomial(m, u)``.

    Returns an array of shape ``(len(u), m + 2)`` whose row ``a`` holds the
    survival function at thresholds ``k = 0, ..., m + 1``: entry ``k`` is
    ``sum_{j >= k} P_{j,m}(u_a)``, with entry ``0`` exactly 1 and entry
    ``m + 1`` exactly 0. Rows are nonincreasing in ``k``.
    """
    w = weight_table(m, u)
    table = np.zeros((w.shape[0], m + 2))
    table[:, 0] = 1.0
    if m >= 1:
        suffix = np.cumsum(w[:, ::-1], axis=1)[:, ::-1]
        table[:, 1 : m + 1] = suffix[:, 1:]
    return table


def binomial_survival(m: int, u: float, k: int) -> float:
    """``P(B >= k)`` for ``B ~ Binomial(m, u)`` with ``k`` in ``0..m+1``."""
    if not 0 <= k <= m + 1:
        raise ValueError(f"threshold k={k} outside 0..{m + 1}")
    return float(survival_table(m, np.asarray([u], dtype=float))[0, k])


@dataclass(frozen=True)
class EvaluationGrid:
    """Midpoint integration grid on the unit hypercube.

    Attributes
    ----------
    dim : int
        Number of axes ``d``.
    points_per_axis : int
        Cells per axis ``g``; the grid holds ``g**d`` points.
    points : ndarray of shape ``(g**d, d)``
        Cell midpoints ``((j - 0.5)/g per axis)`` in lexicographic order of
        the axis indices (last axis fastest).
    axis_values : ndarray of shape ``(g,)``
        The shared per-axis midpoint values.
    axis_indices : ndarray of shape ``(g**d, d)``
        Integer per-axis index of each point, same order as `points`.
    cell_volume : float
        ``g**-d``; `cell_volume` times the point count is one.
    """

    dim: int
    points_per_axis: int
    points: np.ndarray
    axis_values: np.ndarray
    axis_indices: np.ndarray
    cell_volume: float

    @property
    def size(self) -> int:
        return self.points.shape[0]


def make_grid(d: int, g: int, max_points: int = 2_000_000) -> EvaluationGrid:
    """Build the ``g**d``-point midpoint grid on ``[0, 1]**d``.

    Raises
    ------
    CapacityError
        If ``g**d`` exceeds `max_points`.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got d={d}")
    if g < 1:
        raise ValueError(f"points per axis must be >= 1, got g={g}")
    total = g**d
    if total > max_points:
        raise CapacityError(
            f"grid with d={d}, g={g} would hold {total} points "
            f"(limit {max_points})"
        )
    axis_values = (np.arange(g) + 0.5) / g
    axis_indices = np.indices((g,) * d).reshape(d, total).T
    points = axis_values[axis_indices]
    for arr in (axis_values, axis_indices, points):
        arr.setflags(write=False)
    return EvaluationGrid(
        dim=d,
        points_per_axis=g,
        points=points,
        axis_values=axis_values,
        axis_indices=axis_indices,
        cell_volume=float(g) ** (-d),
    )
