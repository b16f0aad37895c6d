"""Rank-based copula estimators.

The central object is :class:`CopulaEvaluator`, which bundles a matrix of
pseudo-observations with an optional Bernstein smoothing order and can be
evaluated anywhere on the unit hypercube. With an order set, evaluation
uses the per-observation survival identity

    C(u) = (1/n) sum_i prod_l  P(B_{m, u_l} >= ceil(m * U_hat[i, l]))

which collapses the (m+1)^d-term tensor sum of the literal Bernstein
smoother into O(n * d) work per point. The literal nested sum is kept in
:func:`bernstein_copula_eval_naive` as a correctness oracle only.
"""

import numpy as np

from .bernstein import (
    CapacityError,
    EvaluationGrid,
    survival_table,
    weight_table,
)

__all__ = [
    "CopulaEvaluator",
    "bernstein_copula_eval_naive",
    "empirical_copula_eval",
    "pseudo_observations",
    "stieltjes_cell_masses",
]


def pseudo_observations(data: np.ndarray) -> np.ndarray:
    """Normalized-rank matrix of a raw sample.

    Entry ``(i, l)`` is ``(1/n) * #{j : data[j, l] <= data[i, l]}``; tied
    values therefore share their maximal rank. Each entry is a multiple of
    ``1/n`` in ``(0, 1]``.

    Parameters
    ----------
    data : ndarray of shape ``(n, d)``
        Raw observations, ``n >= 2`` rows and ``d >= 2`` finite columns.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"expected an (n, d) matrix, got shape {data.shape}")
    n, d = data.shape
    if n < 2:
        raise ValueError(f"need at least 2 observations, got n={n}")
    if d < 2:
        raise ValueError(f"need at least 2 columns, got d={d}")
    if not np.all(np.isfinite(data)):
        raise ValueError("sample contains non-finite entries")
    ranks = np.empty((n, d))
    for col in range(d):
        x = data[:, col]
        order = np.sort(x)
        ranks[:, col] = np.searchsorted(order, x, side="right")
    return ranks / n


class CopulaEvaluator:
    """Empirical or Bernstein-smoothed empirical copula of one sample.

    Parameters
    ----------
    pseudo : ndarray of shape ``(n, d)``
        Pseudo-observations (multiples of ``1/n`` in ``(0, 1]``).
    order : int or None
        Bernstein smoothing order ``m >= 1``, or ``None`` for the
        unsmoothed empirical copula.
    """

    def __init__(self, pseudo: np.ndarray, order: int | None = None):
        pseudo = np.asarray(pseudo, dtype=float)
        if pseudo.ndim != 2:
            raise ValueError(f"pseudo-observations must be (n, d), got {pseudo.shape}")
        if np.any(pseudo <= 0.0) or np.any(pseudo > 1.0):
            raise ValueError("pseudo-observations must lie in (0, 1]")
        self.pseudo = pseudo
        self.pseudo.setflags(write=False)
        if order is not None and order < 1:
            raise ValueError(f"Bernstein order must be >= 1, got {order}")
        self.order = order
        if order is not None:
            n = pseudo.shape[0]
            ranks = np.rint(pseudo * n).astype(np.int64)
            # exact integer ceil(m * r / n), immune to float rounding
            self._ceil = -((-order * ranks) // n)
        else:
            self._ceil = None

    @classmethod
    def from_data(cls, data: np.ndarray, order: int | None = None) -> "CopulaEvaluator":
        """Rank `data` afresh and wrap the result."""
        return cls(pseudo_observations(data), order)

    @property
    def nobs(self) -> int:
        return self.pseudo.shape[0]

    @property
    def dim(self) -> int:
        return self.pseudo.shape[1]

    @property
    def ceil_indices(self) -> np.ndarray:
        if self._ceil is None:
            raise ValueError("ceil indices exist only in Bernstein mode")
        return self._ceil

    def axis_weights(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Per-observation weight matrix of shape ``(len(values), n)``.

        Bernstein mode: binomial survival at each observation's ceil index.
        Empirical mode: the indicator ``pseudo[:, axis] <= value``.
        Repeated values (grid columns) are collapsed before the table is
        built, so grid-sized requests cost only the unique-value work.
        """
        values = np.asarray(values, dtype=float)
        unique, inverse = np.unique(values, return_inverse=True)
        if self.order is not None:
            table = survival_table(self.order, unique)
            return table[np.ix_(inverse, self._ceil[:, axis])]
        indicator = (self.pseudo[None, :, axis] <= unique[:, None]).astype(float)
        return indicator[inverse]

    def factors(self, points: np.ndarray) -> np.ndarray:
        """Product over axes of per-observation weights, shape ``(k, n)``."""
        points = self._as_points(points)
        prod = self.axis_weights(points[:, 0], 0)
        for axis in range(1, self.dim):
            prod = prod * self.axis_weights(points[:, axis], axis)
        return prod

    def evaluate(self, points: np.ndarray) -> np.ndarray | float:
        """Copula surface at `points`; scalar for a single point."""
        single = np.asarray(points).ndim == 1
        values = self.factors(points).mean(axis=1)
        return float(values[0]) if single else values

    def derivative_axis_weights(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Axis factor of the smoothed partial derivative, ``(len(values), n)``."""
        if self.order is None:
            raise ValueError("closed-form derivatives exist only in Bernstein mode")
        m = self.order
        values = np.asarray(values, dtype=float)
        unique, inverse = np.unique(values, return_inverse=True)
        table = weight_table(m - 1, unique)
        return m * table[np.ix_(inverse, self._ceil[:, axis] - 1)]

    def partial_derivative(self, points: np.ndarray, axis: int) -> np.ndarray | float:
        """Partial derivative of the smoothed surface along `axis`."""
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for dimension {self.dim}")
        points = np.asarray(points)
        single = points.ndim == 1
        points = self._as_points(points)
        prod = self.derivative_axis_weights(points[:, axis], axis)
        for other in range(self.dim):
            if other != axis:
                prod = prod * self.axis_weights(points[:, other], other)
        values = prod.mean(axis=1)
        return float(values[0]) if single else values

    def _as_points(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise ValueError(
                f"points of shape {points.shape} do not match dimension {self.dim}"
            )
        if np.any(points < 0.0) or np.any(points > 1.0):
            raise ValueError("evaluation points must lie in [0, 1]^d")
        return points


def empirical_copula_eval(pseudo: np.ndarray, u: np.ndarray) -> np.ndarray | float:
    """Unsmoothed empirical copula of `pseudo` at point(s) `u`."""
    return CopulaEvaluator(pseudo).evaluate(u)


def bernstein_copula_eval_naive(
    ev: CopulaEvaluator, u: np.ndarray, max_terms: int = 10**7
) -> float:
    """Literal tensor-sum Bernstein smoother; kept as a test oracle.

    Evaluates ``sum_{k_1..k_d} C_n(k/m) prod_l P_{k_l, m}(u_l)`` over the
    full ``(m+1)**d`` lattice. Intentionally slow and memory-hungry; use
    :meth:`CopulaEvaluator.evaluate` for anything but cross-checks.
    """
    if ev.order is None:
        raise ValueError("naive evaluation requires Bernstein mode")
    m, d = ev.order, ev.dim
    u = np.asarray(u, dtype=float).reshape(d)
    if (m + 1) ** d > max_terms:
        raise CapacityError(
            f"naive sum with m={m}, d={d} needs {(m + 1) ** d} terms "
            f"(limit {max_terms})"
        )
    lattice = np.arange(m + 1) / m
    # empirical copula on the full lattice, accumulated one axis at a time
    prod = np.ones((1,) * d + (ev.nobs,))
    for axis in range(d):
        indicator = (ev.pseudo[None, :, axis] <= lattice[:, None]).astype(float)
        shape = [1] * d + [ev.nobs]
        shape[axis] = m + 1
        prod = prod * indicator.reshape(shape)
    copula_lattice = prod.mean(axis=-1)
    result = copula_lattice
    for axis in range(d):
        w = weight_table(m, np.asarray([u[axis]]))[0]
        result = np.tensordot(w, result, axes=(0, 0))
    return float(result)


def stieltjes_cell_masses(ev, grid: EvaluationGrid) -> np.ndarray:
    """Signed measure of each grid cell under the evaluator's surface.

    The mass of cell ``prod_l ((j_l - 1)/g, j_l/g]`` is obtained by
    inclusion-exclusion of the surface over the ``2**d`` cell corners,
    computed as iterated differences on the ``(g+1)**d`` corner lattice.
    Masses are returned in the grid's own point order and sum to the value
    at the all-ones corner (one, for any copula estimator here).

    `ev` may be any object with ``evaluate(points)``; no sign assumption
    is made on the result.
    """
    d, g = grid.dim, grid.points_per_axis
    corners = np.linspace(0.0, 1.0, g + 1)
    lattice = np.stack(
        np.meshgrid(*([corners] * d), indexing="ij"), axis=-1
    ).reshape(-1, d)
    surface = np.asarray(ev.evaluate(lattice)).reshape((g + 1,) * d)
    for axis in range(d):
        surface = np.diff(surface, axis=axis)
    return surface.reshape(-1)
