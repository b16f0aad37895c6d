"""Observed two-sample distance statistics between copula surfaces.

Three statistics compare the two estimated surfaces over a midpoint grid:

* ``cvm``    -- pooled-scaled integral of the squared difference against
  Lebesgue measure (midpoint Riemann sum),
* ``cvm_dc`` -- the same squared difference integrated against the first
  sample's estimated copula measure (inclusion-exclusion cell masses),
* ``ks``     -- square-root-pooled-scaled supremum of the absolute
  difference over the grid.

The pooled scale is ``n1 * n2 / (n1 + n2)``, written that way (rather than
``n2 * lambda``) so that swapping the samples is exactly symmetric.
"""

from dataclasses import dataclass

import numpy as np

from .bernstein import EvaluationGrid
from .estimators import stieltjes_cell_masses

__all__ = [
    "STATISTIC_NAMES",
    "SampleSizes",
    "StatisticTriple",
    "cvm_copula_statistic",
    "cvm_statistic",
    "ks_statistic",
    "observed_statistics",
    "triple_from_surfaces",
]

STATISTIC_NAMES = ("cvm", "cvm_dc", "ks")


@dataclass(frozen=True)
class SampleSizes:
    """Sizes of the two samples and the derived pooled quantities."""

    n1: int
    n2: int

    def __post_init__(self) -> None:
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError(f"sample sizes must be positive, got {self.n1}, {self.n2}")

    @property
    def lam(self) -> float:
        """First-sample share ``n1 / (n1 + n2)``."""
        return self.n1 / (self.n1 + self.n2)

    @property
    def pooled(self) -> float:
        """``n1 * n2 / (n1 + n2)``, the shared scale of all statistics."""
        return self.n1 * self.n2 / (self.n1 + self.n2)


@dataclass(frozen=True)
class StatisticTriple:
    """The three observed (or replicate) statistics as one record."""

    cvm: float
    cvm_dc: float
    ks: float

    def as_dict(self) -> dict[str, float]:
        return {"cvm": self.cvm, "cvm_dc": self.cvm_dc, "ks": self.ks}

    def __getitem__(self, name: str) -> float:
        return self.as_dict()[name]


def _surfaces(ev_c, ev_d, grid: EvaluationGrid) -> tuple[np.ndarray, np.ndarray]:
    for ev in (ev_c, ev_d):
        dim = getattr(ev, "dim", grid.dim)
        if dim != grid.dim:
            raise ValueError(
                f"evaluator dimension {dim} does not match grid dimension {grid.dim}"
            )
    return (
        np.asarray(ev_c.evaluate(grid.points)),
        np.asarray(ev_d.evaluate(grid.points)),
    )


def cvm_statistic(ev_c, ev_d, sizes: SampleSizes, grid: EvaluationGrid) -> float:
    """Pooled-scaled integrated squared difference against Lebesgue measure."""
    surf_c, surf_d = _surfaces(ev_c, ev_d, grid)
    diff = surf_c - surf_d
    return sizes.pooled * grid.cell_volume * float((diff * diff).sum())


def cvm_copula_statistic(
    ev_c,
    ev_d,
    sizes: SampleSizes,
    grid: EvaluationGrid,
    masses: np.ndarray | None = None,
) -> float:
    """Squared difference integrated against the first surface's cell masses.

    `masses` may be supplied to reuse a precomputed
    :func:`~copeq.estimators.stieltjes_cell_masses` vector for `ev_c`.
    """
    surf_c, surf_d = _surfaces(ev_c, ev_d, grid)
    if masses is None:
        masses = stieltjes_cell_masses(ev_c, grid)
    diff = surf_c - surf_d
    return sizes.pooled * float((masses * diff * diff).sum())


def ks_statistic(ev_c, ev_d, sizes: SampleSizes, grid: EvaluationGrid) -> float:
    """Square-root-pooled-scaled sup of ``|surface difference|`` on the grid."""
    surf_c, surf_d = _surfaces(ev_c, ev_d, grid)
    return float(np.sqrt(sizes.pooled) * np.abs(surf_c - surf_d).max())


def triple_from_surfaces(
    surf_c: np.ndarray,
    surf_d: np.ndarray,
    sizes: SampleSizes,
    grid: EvaluationGrid,
    masses: np.ndarray,
) -> StatisticTriple:
    """All three statistics from precomputed grid surfaces and cell masses."""
    diff = surf_c - surf_d
    sq = diff * diff
    return StatisticTriple(
        cvm=sizes.pooled * grid.cell_volume * float(sq.sum()),
        cvm_dc=sizes.pooled * float((masses * sq).sum()),
        ks=float(np.sqrt(sizes.pooled) * np.abs(diff).max()),
    )


def observed_statistics(
    ev_c,
    ev_d,
    sizes: SampleSizes,
    grid: EvaluationGrid,
    masses: np.ndarray | None = None,
) -> StatisticTriple:
    """All three statistics from one pass over the grid surfaces."""
    surf_c, surf_d = _surfaces(ev_c, ev_d, grid)
    if masses is None:
        masses = stieltjes_cell_masses(ev_c, grid)
    return triple_from_surfaces(surf_c, surf_d, sizes, grid, masses)
