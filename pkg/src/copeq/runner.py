"""End-to-end two-sample and paired-sample copula equality tests.

A single call ranks both samples, resolves smoothing orders and subsample
sizes, runs the configured resampling methods, and assembles an immutable
:class:`TestReport`. Within one report the Bernstein and empirical
multiplier pipelines consume identical multiplier blocks per replicate,
so their columns are comparable under one seed.
"""

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bernstein import make_grid
from .multiplier import (
    TestFragment,
    draw_centered_multipliers,
    draw_paired_multipliers,
    multiplier_test,
)
from .samplers import RngStream
from .statistics import STATISTIC_NAMES, SampleSizes
from .subsample import SubsampleConfig, subsample_test

__all__ = [
    "ConfigurationError",
    "ResolvedOrders",
    "TestConfig",
    "TestReport",
    "TestResult",
    "paired_sample_test",
    "resolve_orders",
    "two_sample_test",
]

MODES = ("bernstein", "empirical", "both")
METHODS = ("multiplier", "subsample")

# purpose keys for the per-test random stream
_MULTIPLIER_KEY = 0
_SUBSAMPLE_KEY = 1


class ConfigurationError(ValueError):
    """A configuration value cannot be honored."""


@dataclass(frozen=True)
class TestConfig:
    """Everything a test run needs besides the data.

    ``orders``, ``subsample_sizes`` and ``subsample_orders`` may be left
    ``None`` to use the automatic rules ``m_r = n_r // 5`` and
    ``b_r = int(0.28 * n_r)`` with per-subsample order equal to ``b_r``.
    """

    mode: str = "both"
    methods: tuple[str, ...] = ("multiplier", "subsample")
    orders: tuple[int, int] | None = None
    subsample_sizes: tuple[int, int] | None = None
    subsample_orders: tuple[int, int] | None = None
    replicates: int = 200
    grid_points: int = 20
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.methods:
            raise ConfigurationError("at least one resampling method is required")
        for method in self.methods:
            if method not in METHODS:
                raise ConfigurationError(
                    f"methods must be among {METHODS}, got {method!r}"
                )
        if self.replicates < 1:
            raise ConfigurationError(
                f"replicate count must be >= 1, got {self.replicates}"
            )
        if self.grid_points < 2:
            raise ConfigurationError(
                f"grid points per axis must be >= 2, got {self.grid_points}"
            )
        if self.orders is not None and min(self.orders) < 1:
            raise ConfigurationError(f"explicit orders must be >= 1, got {self.orders}")


@dataclass(frozen=True)
class ResolvedOrders:
    m1: int
    m2: int
    b1: int
    b2: int
    sub_m1: int
    sub_m2: int


def resolve_orders(n1: int, n2: int, cfg: TestConfig) -> ResolvedOrders:
    """Apply the automatic order/size rules or pass explicit values through."""
    if cfg.orders is not None:
        m1, m2 = cfg.orders
    else:
        m1, m2 = n1 // 5, n2 // 5
        if m1 < 1 or m2 < 1:
            raise ConfigurationError(
                f"automatic smoothing order n // 5 is zero for sizes "
                f"({n1}, {n2}); pass explicit orders"
            )
    if cfg.subsample_sizes is not None:
        b1, b2 = cfg.subsample_sizes
    else:
        b1, b2 = int(0.28 * n1), int(0.28 * n2)
    if cfg.subsample_orders is not None:
        s1, s2 = cfg.subsample_orders
    else:
        s1, s2 = b1, b2
    if "subsample" in cfg.methods:
        if b1 < 2 or b2 < 2:
            raise ConfigurationError(
                f"subsample sizes ({b1}, {b2}) must be >= 2; pass explicit "
                f"sizes or drop the subsample method"
            )
        if not (b1 < n1 and b2 < n2):
            raise ConfigurationError(
                f"subsample sizes ({b1}, {b2}) must be smaller than "
                f"sample sizes ({n1}, {n2})"
            )
        if s1 < 1 or s2 < 1:
            raise ConfigurationError(f"subsample orders ({s1}, {s2}) must be >= 1")
    return ResolvedOrders(m1, m2, b1, b2, s1, s2)


@dataclass(frozen=True)
class ReplicateSummary:
    count: int
    minimum: float
    maximum: float
    q25: float
    median: float
    q75: float

    @classmethod
    def from_values(cls, values: np.ndarray) -> "ReplicateSummary":
        q25, median, q75 = np.quantile(values, [0.25, 0.5, 0.75])
        return cls(
            count=int(values.size),
            minimum=float(values.min()),
            maximum=float(values.max()),
            q25=float(q25),
            median=float(median),
            q75=float(q75),
        )


@dataclass(frozen=True)
class TestResult:
    """One (mode, method, statistic) outcome inside a report."""

    statistic: str
    mode: str
    method: str
    observed: float
    p_value: float
    replicates: ReplicateSummary


@dataclass(frozen=True)
class TestReport:
    """Immutable outcome of a complete test run.

    ``wall_time`` is informational and deliberately excluded from both
    serialized forms so that equal inputs and seed produce byte-identical
    output.
    """

    n1: int
    n2: int
    dim: int
    mode: str
    methods: tuple[str, ...]
    replicate_count: int
    grid_points: int
    m1: int
    m2: int
    b1: int
    b2: int
    seed: int
    paired: bool
    results: tuple[TestResult, ...]
    wall_time: float = field(compare=False, default=0.0)

    def to_json(self) -> dict:
        """JSON-compatible structured form with fixed field names."""
        return {
            "n1": self.n1,
            "n2": self.n2,
            "dim": self.dim,
            "mode": self.mode,
            "methods": list(self.methods),
            "H": self.replicate_count,
            "grid": self.grid_points,
            "m1": self.m1,
            "m2": self.m2,
            "b1": self.b1,
            "b2": self.b2,
            "seed": self.seed,
            "paired": self.paired,
            "results": [
                {
                    "statistic": r.statistic,
                    "mode": r.mode,
                    "method": r.method,
                    "observed": r.observed,
                    "p_value": r.p_value,
                    "replicates": {
                        "count": r.replicates.count,
                        "min": r.replicates.minimum,
                        "q25": r.replicates.q25,
                        "median": r.replicates.median,
                        "q75": r.replicates.q75,
                        "max": r.replicates.maximum,
                    },
                }
                for r in self.results
            ],
        }

    def to_text(self) -> str:
        """Flat key-value text form, one result block per line group."""
        lines = [
            f"n1 = {self.n1}",
            f"n2 = {self.n2}",
            f"dim = {self.dim}",
            f"mode = {self.mode}",
            f"methods = {','.join(self.methods)}",
            f"H = {self.replicate_count}",
            f"grid = {self.grid_points}",
            f"m1 = {self.m1}",
            f"m2 = {self.m2}",
            f"b1 = {self.b1}",
            f"b2 = {self.b2}",
            f"seed = {self.seed}",
            f"paired = {str(self.paired).lower()}",
        ]
        for r in self.results:
            lines.append(
                f"result: statistic={r.statistic} mode={r.mode} "
                f"method={r.method} observed={r.observed!r} p_value={r.p_value!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def p_value_of(self, mode: str, method: str, statistic: str) -> float:
        for r in self.results:
            if (r.mode, r.method, r.statistic) == (mode, method, statistic):
                return r.p_value
        raise KeyError(f"no result for ({mode}, {method}, {statistic})")


def method_mode_pairs(cfg: TestConfig) -> list[tuple[str, str]]:
    """Canonical (method, mode) execution order for a configuration.

    With ``mode="both"`` the subsample method runs for the Bernstein
    estimator only, giving the standard nine-variant layout; an explicit
    single mode applies to every requested method.
    """
    modes = ["empirical", "bernstein"] if cfg.mode == "both" else [cfg.mode]
    pairs: list[tuple[str, str]] = []
    if "multiplier" in cfg.methods:
        pairs.extend(("multiplier", mode) for mode in modes)
    if "subsample" in cfg.methods:
        sub_modes = ["bernstein"] if cfg.mode == "both" else [cfg.mode]
        pairs.extend(("subsample", mode) for mode in sub_modes)
    return pairs


def _validate_sample(name: str, data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError(f"{name} must be an (n, d) matrix, got shape {data.shape}")
    if data.shape[0] < 2:
        raise ValueError(f"{name} needs at least 2 rows, got {data.shape[0]}")
    if data.shape[1] < 2:
        raise ValueError(f"{name} needs at least 2 columns, got {data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{name} contains non-finite entries")
    return data


def _run(
    x: np.ndarray,
    y: np.ndarray,
    cfg: TestConfig,
    paired: bool,
) -> TestReport:
    start = time.perf_counter()
    n1, n2 = x.shape[0], y.shape[0]
    resolved = resolve_orders(n1, n2, cfg)
    grid = make_grid(x.shape[1], cfg.grid_points)
    rng = RngStream(cfg.seed)
    pairs = method_mode_pairs(cfg)

    multipliers = None
    if "multiplier" in cfg.methods:
        mult_rng = rng.split(_MULTIPLIER_KEY)
        if paired:
            shared = draw_paired_multipliers(n1, cfg.replicates, mult_rng)
            multipliers = (shared, shared)
        else:
            multipliers = draw_centered_multipliers(n1, n2, cfg.replicates, mult_rng)

    results: list[TestResult] = []
    for method, mode in pairs:
        fragment = _run_fragment(
            x, y, cfg, resolved, grid, rng, method, mode, multipliers, paired
        )
        for col, statistic in enumerate(STATISTIC_NAMES):
            results.append(
                TestResult(
                    statistic=statistic,
                    mode=mode,
                    method=method,
                    observed=fragment.observed[statistic],
                    p_value=fragment.p_values[statistic],
                    replicates=ReplicateSummary.from_values(
                        fragment.replicates[:, col]
                    ),
                )
            )
    return TestReport(
        n1=n1,
        n2=n2,
        dim=x.shape[1],
        mode=cfg.mode,
        methods=cfg.methods,
        replicate_count=cfg.replicates,
        grid_points=cfg.grid_points,
        m1=resolved.m1,
        m2=resolved.m2,
        b1=resolved.b1,
        b2=resolved.b2,
        seed=cfg.seed,
        paired=paired,
        results=tuple(results),
        wall_time=time.perf_counter() - start,
    )


def _run_fragment(
    x, y, cfg, resolved, grid, rng, method, mode, multipliers, paired
) -> TestFragment:
    if method == "multiplier":
        return multiplier_test(
            x,
            y,
            mode,
            (resolved.m1, resolved.m2),
            cfg.replicates,
            grid,
            rng.split(_MULTIPLIER_KEY),
            multipliers=multipliers,
        )
    sub_cfg = SubsampleConfig(
        b1=resolved.b1,
        b2=resolved.b2,
        order1=resolved.sub_m1,
        order2=resolved.sub_m2,
        count=cfg.replicates,
    )
    return subsample_test(
        x,
        y,
        sub_cfg,
        (resolved.m1, resolved.m2),
        grid,
        rng.split(_SUBSAMPLE_KEY),
        mode=mode,
        shared_indices=paired,
    )


def two_sample_test(x: np.ndarray, y: np.ndarray, cfg: TestConfig) -> TestReport:
    """Test whether two independent samples share one dependence structure.

    Parameters
    ----------
    x, y : ndarray
        Raw samples of shapes ``(n1, d)`` and ``(n2, d)`` with ``d >= 2``.
    cfg : TestConfig
        Modes, methods, replicate budget, grid resolution, seed.
    """
    x = _validate_sample("x", x)
    y = _validate_sample("y", y)
    if x.shape[1] != y.shape[1]:
        raise ValueError(
            f"samples have different dimensions: x has {x.shape[1]} columns, "
            f"y has {y.shape[1]}"
        )
    return _run(x, y, cfg, paired=False)


def paired_sample_test(z: np.ndarray, dim: int, cfg: TestConfig) -> TestReport:
    """Test dependence-structure equality between the halves of paired rows.

    `z` has ``2 * dim`` columns; the first `dim` form one margin block and
    the rest the other. Observed statistics coincide exactly with the
    two-sample test on the split halves; resampling couples the halves by
    reusing one multiplier per row (multiplier method) or one index set
    per replicate (subsampling).
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[1] != 2 * dim:
        raise ValueError(
            f"paired sample must have exactly {2 * dim} columns, got shape {z.shape}"
        )
    x = _validate_sample("first half", z[:, :dim])
    y = _validate_sample("second half", z[:, dim:])
    return _run(x, y, cfg, paired=True)


def _with_seed(cfg: TestConfig, seed: int) -> TestConfig:
    return replace(cfg, seed=seed)
