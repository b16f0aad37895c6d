"""Synthetic copula samplers and rank-correlation utilities.

Randomness flows through :class:`RngStream`, a splittable, counter-keyed
wrapper around NumPy's seed-sequence machinery: the same seed and the same
key path always reproduce the same draws, independent of scheduling.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import kendalltau

__all__ = [
    "CopulaModel",
    "RngStream",
    "clayton_theta_from_tau",
    "gaussian_rho_from_tau",
    "sample_clayton",
    "sample_gaussian",
    "sample_kendall_tau",
    "sample_model",
]


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream splittable by integer keys.

    ``RngStream(seed).split(3, 7).generator()`` always yields the same
    generator state; distinct key paths give statistically independent
    substreams that may be consumed concurrently.
    """

    seed: int
    path: tuple[int, ...] = ()

    def split(self, *keys: int) -> "RngStream":
        """Child stream keyed by `keys` appended to this stream's path."""
        return RngStream(self.seed, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        """Fresh NumPy generator positioned at the start of this stream."""
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=self.path)
        )

    def derive_seed(self) -> int:
        """A 64-bit integer seed derived from this stream's identity."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class CopulaModel:
    """A named copula family with one scalar dependence parameter.

    ``family`` is one of ``clayton``, ``gaussian``, ``independence``.
    For Clayton, `parameter` is the generator parameter ``theta >= 0``
    (0 means independence). For Gaussian, `parameter` is the common
    pairwise correlation of a ``dim x dim`` equicorrelation matrix.
    """

    family: str
    dim: int
    parameter: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in ("clayton", "gaussian", "independence"):
            raise ValueError(f"unknown copula family {self.family!r}")
        if self.dim < 2:
            raise ValueError(f"copula dimension must be >= 2, got {self.dim}")
        if self.family == "clayton" and self.parameter < 0:
            raise ValueError(f"clayton parameter must be >= 0, got {self.parameter}")
        if self.family == "gaussian":
            _check_equicorrelation(self.dim, self.parameter)


def _check_equicorrelation(d: int, rho: float) -> None:
    # eigenvalues of the equicorrelation matrix are 1 + (d-1)rho and 1 - rho
    if not (-1.0 / (d - 1) < rho < 1.0):
        raise ValueError(
            f"equicorrelation rho={rho} is not positive definite in dimension {d}"
        )


def sample_clayton(n: int, d: int, theta: float, rng: RngStream) -> np.ndarray:
    """Draw `n` rows from the `d`-dimensional Clayton copula.

    Uses the frailty construction: ``V ~ Gamma(1/theta)``,
    ``U_l = (1 + E_l / V) ** (-1/theta)`` with ``E_l ~ Exp(1)``.
    ``theta = 0`` yields independent uniforms.
    """
    if theta < 0:
        raise ValueError(f"clayton parameter must be >= 0, got theta={theta}")
    gen = rng.generator()
    if theta < 1e-12:
        return gen.uniform(size=(n, d))
    v = gen.gamma(1.0 / theta, size=n)
    e = gen.standard_exponential((n, d))
    return (1.0 + e / v[:, None]) ** (-1.0 / theta)


def sample_gaussian(n: int, d: int, rho: float, rng: RngStream) -> np.ndarray:
    """Draw `n` rows of correlated normals with equicorrelation `rho`.

    The marginal normal-CDF transform is intentionally skipped: all
    downstream statistics are rank-based and therefore invariant under
    strictly increasing marginal transforms.
    """
    _check_equicorrelation(d, rho)
    corr = np.full((d, d), rho)
    np.fill_diagonal(corr, 1.0)
    chol = np.linalg.cholesky(corr)
    w = rng.generator().standard_normal((n, d))
    return w @ chol.T


def sample_model(model: CopulaModel, n: int, rng: RngStream) -> np.ndarray:
    """Draw `n` rows from `model` using substream `rng`."""
    if model.family == "clayton":
        return sample_clayton(n, model.dim, model.parameter, rng)
    if model.family == "gaussian":
        return sample_gaussian(n, model.dim, model.parameter, rng)
    return rng.generator().uniform(size=(n, model.dim))


def clayton_theta_from_tau(tau: float) -> float:
    """Clayton parameter giving population Kendall tau `tau` in ``[0, 1)``."""
    if not 0.0 <= tau < 1.0:
        raise ValueError(f"clayton tau must lie in [0, 1), got {tau}")
    return 2.0 * tau / (1.0 - tau)


def gaussian_rho_from_tau(tau: float) -> float:
    """Equicorrelation giving pairwise Kendall tau `tau` in ``(-1, 1)``."""
    if not -1.0 < tau < 1.0:
        raise ValueError(f"gaussian tau must lie in (-1, 1), got {tau}")
    return math.sin(math.pi * tau / 2.0)


def sample_kendall_tau(data: np.ndarray) -> float:
    """Kendall rank correlation of a two-column sample.

    Returns ``(concordant - discordant) / (n(n-1)/2)`` over all pairs,
    with tied pairs counted as neither concordant nor discordant.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"expected an (n, 2) sample, got shape {data.shape}")
    n = data.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 observations, got n={n}")
    x, y = data[:, 0], data[:, 1]
    n0 = n * (n - 1) // 2
    tx = _tied_pairs(x)
    ty = _tied_pairs(y)
    if tx == n0 or ty == n0:
        return 0.0
    # recover concordant - discordant from the tie-corrected estimate
    tau_b = kendalltau(x, y).statistic
    pq = tau_b * math.sqrt(float(n0 - tx) * float(n0 - ty))
    return pq / n0


def _tied_pairs(column: np.ndarray) -> int:
    _, counts = np.unique(column, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())
