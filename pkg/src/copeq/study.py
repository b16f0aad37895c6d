"""Monte Carlo level/power studies over a grid of alternative parameters.

A study draws both samples afresh in every repetition (the first at the
baseline dependence parameter, the second at the row's varying value),
runs the configured test, and tabulates rejection rates per statistic,
mode, and method. Every repetition's randomness is keyed by
``(row, repetition, purpose)`` under one master seed, so results are
bit-identical for any worker count or execution order.
"""

import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .runner import (
    ConfigurationError,
    TestConfig,
    method_mode_pairs,
    two_sample_test,
)
from .samplers import (
    CopulaModel,
    RngStream,
    clayton_theta_from_tau,
    gaussian_rho_from_tau,
    sample_model,
)
from .statistics import STATISTIC_NAMES

__all__ = [
    "StudyConfig",
    "StudyRow",
    "parse_study_config",
    "rows_from_csv",
    "rows_to_csv",
    "rows_to_text",
    "run_study",
    "study_variants",
]

CSV_HEADER = "family,dim,n1,n2,param,mode,method,statistic,rejection_rate,reps"

# purpose keys under the (row, repetition) path of the master stream
_X_BLOCK = 0
_Y_BLOCK = 1
_TEST_SEED = 2


@dataclass(frozen=True)
class StudyConfig:
    """Complete description of one level/power experiment."""

    family: str
    dim: int
    n1: int
    n2: int
    param_kind: str
    baseline: float
    varying: tuple[float, ...]
    repetitions: int = 500
    level: float = 0.05
    test: TestConfig = field(default_factory=TestConfig)
    output: str | None = None

    def __post_init__(self) -> None:
        if self.family not in ("clayton", "gaussian"):
            raise ConfigurationError(f"unknown study family {self.family!r}")
        allowed = ("tau", "theta") if self.family == "clayton" else ("tau", "rho")
        if self.param_kind not in allowed:
            raise ConfigurationError(
                f"param_kind for {self.family} must be one of {allowed}, "
                f"got {self.param_kind!r}"
            )
        if not self.varying:
            raise ConfigurationError("varying parameter list must be non-empty")
        if self.repetitions < 1:
            raise ConfigurationError(
                f"repetitions must be >= 1, got {self.repetitions}"
            )
        if not 0.0 < self.level < 1.0:
            raise ConfigurationError(f"level must lie in (0, 1), got {self.level}")

    def model(self, value: float) -> CopulaModel:
        """Copula model for one dependence-parameter value."""
        if self.family == "clayton":
            theta = clayton_theta_from_tau(value) if self.param_kind == "tau" else value
            return CopulaModel("clayton", self.dim, theta)
        rho = gaussian_rho_from_tau(value) if self.param_kind == "tau" else value
        return CopulaModel("gaussian", self.dim, rho)


@dataclass(frozen=True)
class StudyRow:
    """Rejection rate of one test variant at one alternative parameter."""

    family: str
    dim: int
    n1: int
    n2: int
    param: float
    mode: str
    method: str
    statistic: str
    rejection_rate: float
    repetitions: int
    mean_seconds: float = 0.0


def study_variants(cfg: StudyConfig) -> list[tuple[str, str, str]]:
    """Canonical (method, mode, statistic) column order of a study."""
    return [
        (method, mode, statistic)
        for method, mode in method_mode_pairs(cfg.test)
        for statistic in STATISTIC_NAMES
    ]


def _repetition_pvalues(cfg: StudyConfig, row: int, rep: int) -> np.ndarray:
    master = RngStream(cfg.test.seed)
    x = sample_model(cfg.model(cfg.baseline), cfg.n1, master.split(row, rep, _X_BLOCK))
    y = sample_model(
        cfg.model(cfg.varying[row]), cfg.n2, master.split(row, rep, _Y_BLOCK)
    )
    rep_cfg = replace(cfg.test, seed=master.split(row, rep, _TEST_SEED).derive_seed())
    report = two_sample_test(x, y, rep_cfg)
    return np.array(
        [
            report.p_value_of(mode, method, statistic)
            for method, mode, statistic in study_variants(cfg)
        ]
    )


def _repetition_task(args: tuple[StudyConfig, int, int]) -> np.ndarray:
    return _repetition_pvalues(*args)


def run_study(
    cfg: StudyConfig, threads: int = 1, progress=None
) -> tuple[list[StudyRow], dict]:
    """Run the full study; returns its rows and a run manifest.

    `threads` > 1 distributes repetitions over a process pool; results are
    independent of the worker count because every repetition is keyed by
    its own index. `progress`, if given, is called as
    ``progress(done, total)`` after each repetition completes.
    """
    variants = study_variants(cfg)
    n_rows = len(cfg.varying)
    tasks = [(cfg, row, rep) for row in range(n_rows) for rep in range(cfg.repetitions)]
    pvalues = np.empty((n_rows, cfg.repetitions, len(variants)))

    start = time.perf_counter()
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunk = max(1, len(tasks) // (threads * 8))
            results = pool.map(_repetition_task, tasks, chunksize=chunk)
            for (_, row, rep), result in zip(tasks, results):
                pvalues[row, rep] = result
                if progress is not None:
                    progress(row * cfg.repetitions + rep + 1, len(tasks))
    else:
        for _, row, rep in tasks:
            pvalues[row, rep] = _repetition_pvalues(cfg, row, rep)
            if progress is not None:
                progress(row * cfg.repetitions + rep + 1, len(tasks))
    wall = time.perf_counter() - start

    mean_seconds = wall / len(tasks)
    rows = []
    for row, param in enumerate(cfg.varying):
        for col, (method, mode, statistic) in enumerate(variants):
            rejected = int(np.count_nonzero(pvalues[row, :, col] <= cfg.level))
            rows.append(
                StudyRow(
                    family=cfg.family,
                    dim=cfg.dim,
                    n1=cfg.n1,
                    n2=cfg.n2,
                    param=param,
                    mode=mode,
                    method=method,
                    statistic=statistic,
                    rejection_rate=rejected / cfg.repetitions,
                    repetitions=cfg.repetitions,
                    mean_seconds=mean_seconds,
                )
            )

    modes = 2 if cfg.test.mode == "both" else 1
    manifest = {
        "version": f"copeq {__version__}",
        "seed": cfg.test.seed,
        "config": _config_echo(cfg),
        "budget": {
            "repetitions": cfg.repetitions,
            "varying_params": n_rows,
            "methods": len(cfg.test.methods),
            "modes": modes,
            "total_tests": cfg.repetitions * n_rows * len(cfg.test.methods) * modes,
        },
        "wall_time_seconds": wall,
        "threads": threads,
    }
    return rows, manifest


def _config_echo(cfg: StudyConfig) -> dict:
    return {
        "family": cfg.family,
        "dim": cfg.dim,
        "n1": cfg.n1,
        "n2": cfg.n2,
        "param_kind": cfg.param_kind,
        "baseline": cfg.baseline,
        "varying": list(cfg.varying),
        "repetitions": cfg.repetitions,
        "level": cfg.level,
        "mode": cfg.test.mode,
        "methods": list(cfg.test.methods),
        "H": cfg.test.replicates,
        "grid": cfg.test.grid_points,
        "orders": list(cfg.test.orders) if cfg.test.orders else "auto",
        "subsample_sizes": (
            list(cfg.test.subsample_sizes) if cfg.test.subsample_sizes else "auto"
        ),
        "subsample_orders": (
            list(cfg.test.subsample_orders) if cfg.test.subsample_orders else "auto"
        ),
        "seed": cfg.test.seed,
        "output": cfg.output,
    }


def rows_to_csv(rows: list[StudyRow]) -> str:
    """Canonical CSV form; floats use shortest round-trip formatting."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r.family},{r.dim},{r.n1},{r.n2},{r.param!r},{r.mode},"
            f"{r.method},{r.statistic},{r.rejection_rate!r},{r.repetitions}"
        )
    return "\n".join(lines) + "\n"


def rows_from_csv(text: str) -> list[StudyRow]:
    """Parse the canonical CSV form back into rows."""
    lines = [line for line in io.StringIO(text).read().splitlines() if line]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unrecognized study CSV header")
    rows = []
    for line in lines[1:]:
        family, dim, n1, n2, param, mode, method, statistic, rate, reps = line.split(",")
        rows.append(
            StudyRow(
                family=family,
                dim=int(dim),
                n1=int(n1),
                n2=int(n2),
                param=float(param),
                mode=mode,
                method=method,
                statistic=statistic,
                rejection_rate=float(rate),
                repetitions=int(reps),
            )
        )
    return rows


def rows_to_text(rows: list[StudyRow]) -> str:
    """Aligned table: one row per parameter, one column per test variant.

    Cells are rejection percentages with one decimal.
    """
    if not rows:
        raise ValueError("no study rows to format")
    params: list[float] = []
    variants: list[tuple[str, str, str]] = []
    cells: dict[tuple[float, tuple[str, str, str]], float] = {}
    for r in rows:
        variant = (r.method, r.mode, r.statistic)
        if r.param not in params:
            params.append(r.param)
        if variant not in variants:
            variants.append(variant)
        cells[(r.param, variant)] = r.rejection_rate

    short_mode = {"empirical": "emp", "bernstein": "brn"}
    short_method = {"multiplier": "mul", "subsample": "sub"}
    # display order: per statistic, empirical multiplier first, then
    # bernstein multiplier, then bernstein subsample
    def column_key(variant: tuple[str, str, str]) -> tuple:
        method, mode, statistic = variant
        return (
            STATISTIC_NAMES.index(statistic),
            0 if mode == "empirical" else 1,
            0 if method == "multiplier" else 1,
        )

    ordered = sorted(variants, key=column_key)
    headers = ["param"] + [
        f"{stat}/{short_mode[mode]}/{short_method[method]}"
        for method, mode, stat in ordered
    ]
    table = [headers]
    for param in params:
        row = [f"{param:g}"]
        for variant in ordered:
            rate = cells.get((param, variant))
            row.append("" if rate is None else f"{100.0 * rate:.1f}")
        table.append(row)
    widths = [max(len(line[i]) for line in table) for i in range(len(headers))]
    lines = [
        "  ".join(cell.rjust(width) for cell, width in zip(line, widths))
        for line in table
    ]
    return "\n".join(lines) + "\n"


_CONFIG_KEYS = {
    "family",
    "dim",
    "n1",
    "n2",
    "param_kind",
    "baseline",
    "varying",
    "repetitions",
    "level",
    "mode",
    "methods",
    "H",
    "grid",
    "orders",
    "subsample_sizes",
    "subsample_orders",
    "seed",
    "output",
}


def parse_study_config(text: str) -> StudyConfig:
    """Parse the flat ``key = value`` study configuration format.

    Blank lines and ``#`` comments are ignored; ``[section]`` headers are
    tolerated as organizational markers. Unknown keys are rejected.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()

    required = ("family", "dim", "n1", "n2", "param_kind", "baseline", "varying")
    for key in required:
        if key not in values:
            raise ConfigurationError(f"missing required key {key!r}")

    def pair_or_auto(key: str) -> tuple[int, int] | None:
        raw = values.get(key, "auto")
        if raw == "auto":
            return None
        parts = [p.strip() for p in raw.split(",")]
        if len(parts) != 2:
            raise ConfigurationError(f"{key} must be 'auto' or two integers")
        return int(parts[0]), int(parts[1])

    try:
        test = TestConfig(
            mode=values.get("mode", "both"),
            methods=tuple(
                m.strip() for m in values.get("methods", "multiplier,subsample").split(",")
            ),
            orders=pair_or_auto("orders"),
            subsample_sizes=pair_or_auto("subsample_sizes"),
            subsample_orders=pair_or_auto("subsample_orders"),
            replicates=int(values.get("H", "200")),
            grid_points=int(values.get("grid", "20")),
            seed=int(values.get("seed", "0")),
        )
        return StudyConfig(
            family=values["family"],
            dim=int(values["dim"]),
            n1=int(values["n1"]),
            n2=int(values["n2"]),
            param_kind=values["param_kind"],
            baseline=float(values["baseline"]),
            varying=tuple(float(v.strip()) for v in values["varying"].split(",")),
            repetitions=int(values.get("repetitions", "500")),
            level=float(values.get("level", "0.05")),
            test=test,
            output=values.get("output"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc
