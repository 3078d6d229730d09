"""Experiment orchestration behind the command-line interface.

Every ``cmd_*`` function takes an :class:`ExperimentConfig`, runs one
analysis, writes its report (JSON, or CSV for ensembles) and returns it.
Configs come from a flat ``key = value`` file overridden by flags.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from src import linalg
from src.config import (
    DEFAULT_BUDGET,
    DEFAULT_N_MAX,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_SING_N_MAX,
    Plant,
    Variety,
    Verdict,
)
from src.errors import (
    BoundViolationError,
    BudgetExceededError,
    ConfigError,
    FFBiasError,
    LemmaViolationError,
    NoCompletedLevelsError,
    NotCGoodError,
    SizeOverflowError,
)
from src.fiber_census import (
    BiasReport,
    RegularCountReport,
    SameTopReport,
    bias_estimate,
    census,
    compare_same_top,
    regular_count_profile,
)
from src.finite_field import FieldCtx, FieldElement, extend, parse_field_spec
from src.logger import get_logger
from src.polynomial import MultiPoly, homogenize, parse, random_poly, top_homogeneous
from src.rank_strength import RankInterval, SandwichReport, rank_of, sandwich_check
from src.reports import write_csv, write_json
from src.singular_locus import (
    GoodnessSweep,
    GoodnessVerdict,
    SingularReport,
    c_good_check,
    c_good_sweep,
    c_regularity,
)
from src.workers import ordered_map, resolve_workers

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------
@dataclass
class ExperimentConfig:
    field: str = "3^1"
    nvars: Optional[int] = None
    degree: int = 3
    homogeneous: bool = False
    poly: Optional[str] = None
    poly2: Optional[str] = None
    seed: int = 0
    n: int = 1
    n_max: int = DEFAULT_N_MAX
    sing_n_max: int = DEFAULT_SING_N_MAX
    budget: int = DEFAULT_BUDGET
    search_budget: int = DEFAULT_SEARCH_BUDGET
    extension_degree: int = 1
    t_ext_degree: int = 1
    t: Optional[str] = None
    c_values: List[int] = dc_field(default_factory=list)
    ensemble_size: int = 1
    plant: Plant = Plant.NONE
    plant_rank: int = 1
    rank_threshold: Optional[int] = None
    workers: Optional[int] = None
    out: Optional[str] = None
    aggregate_out: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        positive = ("degree", "n", "n_max", "sing_n_max", "budget", "extension_degree",
                    "t_ext_degree", "ensemble_size", "plant_rank")
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.search_budget < 0:
            raise ConfigError("search_budget must be nonnegative")
        if self.nvars is not None and self.nvars < 1:
            raise ConfigError(f"nvars must be positive, got {self.nvars}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        return self


def _int_list(text: str) -> List[int]:
    return [int(part) for part in re.split(r"[,\s]+", text.strip()) if part]


def _boolean(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text: str) -> Optional[int]:
    return None if text.strip().lower() in ("", "none") else int(text)


_CONVERTERS = {
    "field": str,
    "nvars": _optional_int,
    "degree": int,
    "homogeneous": _boolean,
    "poly": str,
    "poly2": str,
    "seed": int,
    "n": int,
    "n_max": int,
    "sing_n_max": int,
    "budget": int,
    "search_budget": int,
    "extension_degree": int,
    "t_ext_degree": int,
    "t": str,
    "c_values": _int_list,
    "ensemble_size": int,
    "plant": Plant,
    "plant_rank": int,
    "rank_threshold": _optional_int,
    "workers": _optional_int,
    "out": str,
    "aggregate_out": str,
}


def load_config(path: str) -> Dict[str, Any]:
    """Parse a ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    values: Dict[str, Any] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path}:{number}: expected 'key = value'")
        values[key] = value.strip()
    return _convert(values, source=path)


def _convert(values: Mapping[str, Any], source: str) -> Dict[str, Any]:
    converted: Dict[str, Any] = {}
    for key, value in values.items():
        if key not in _CONVERTERS:
            raise ConfigError(f"{source}: unknown key {key!r}")
        if not isinstance(value, str):
            converted[key] = value
            continue
        try:
            converted[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}: bad value for {key}: {value!r}") from exc
    return converted


def build_config(
    path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """File values first, then explicit overrides (flags)."""
    values: Dict[str, Any] = load_config(path) if path else {}
    values.update(_convert(overrides or {}, source="flags"))
    return ExperimentConfig(**values).validate()


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------
_VARIABLE = re.compile(r"x(\d+)")


def field_of(config: ExperimentConfig) -> FieldCtx:
    return parse_field_spec(config.field)


def _nvars(config: ExperimentConfig, text: Optional[str], spare: int = 0) -> int:
    if config.nvars is not None:
        return config.nvars
    if text is None:
        raise ConfigError("nvars is required for random polynomials")
    if "z" in text:
        raise ConfigError("'z' needs an explicit nvars")
    indices = [int(i) for i in _VARIABLE.findall(text)]
    return max(indices, default=0) + 1 + spare


def _poly_in(
    config: ExperimentConfig, ctx: FieldCtx, nvars: int, text: Optional[str] = None
) -> MultiPoly:
    text = text if text is not None else config.poly
    if text is None:
        return random_poly(ctx, nvars, config.degree, config.homogeneous, config.seed)
    return parse(text, ctx, nvars)


def poly_of(config: ExperimentConfig, text: Optional[str] = None) -> MultiPoly:
    """The configured polynomial, or a seeded random one when none is given."""
    text = text if text is not None else config.poly
    return _poly_in(config, field_of(config), _nvars(config, text), text)


def t_of(config: ExperimentConfig, ctx: FieldCtx) -> Optional[FieldElement]:
    """Parse ``config.t`` as an element of k_{t_ext_degree}."""
    if config.t is None:
        return None
    t_field = extend(ctx.base, config.t_ext_degree)
    return FieldElement(t_field, parse(config.t, t_field, 0).coefficient(()))


# ---------------------------------------------------------------------------
# Single-polynomial commands
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RankReport:
    poly: str
    interval: RankInterval
    sandwich: Optional[SandwichReport]


def cmd_census(config: ExperimentConfig) -> Dict[str, Any]:
    F = poly_of(config)
    c = census(F, config.n, config.budget, config.workers)
    payload = {
        "field": c.field.spec,
        "n": c.n,
        "nvars": c.nvars,
        "poly": str(F),
        "total": c.total,
        "counts": c.as_mapping(),
    }
    write_json(config.out, payload)
    return payload


def cmd_bias(config: ExperimentConfig) -> BiasReport:
    report = bias_estimate(poly_of(config), config.n_max, config.budget, config.workers)
    write_json(config.out, report)
    return report


def cmd_rank(config: ExperimentConfig) -> RankReport:
    F = poly_of(config)
    interval = rank_of(
        F,
        config.search_budget,
        config.seed,
        config.extension_degree,
        config.sing_n_max,
        config.budget,
        config.workers,
    )
    t = t_of(config, F.ctx)
    sandwich = sandwich_check(F, t) if t is not None and F.degree == 2 else None
    report = RankReport(str(F), interval, sandwich)
    write_json(config.out, report)
    return report


def cmd_singular(config: ExperimentConfig) -> SingularReport:
    """Singular locus over k_1..k_{n_max}.

    Without an explicit nvars a form is read in one more variable than it
    mentions, so ``x0*x1`` is the pair of lines in P^2.
    """
    ctx = field_of(config)
    t = t_of(config, ctx)
    if t is None:
        nvars = _nvars(config, config.poly, spare=1)
        H, variety = top_homogeneous(_poly_in(config, ctx, nvars)), Variety.X
    else:
        H, variety = homogenize(poly_of(config), t).poly, Variety.Y
    report = c_regularity(
        H, config.n_max, config.budget, config.workers, config.c_values, variety, t
    )
    write_json(config.out, report)
    return report


def cmd_good(config: ExperimentConfig) -> GoodnessSweep:
    if not config.c_values:
        raise ConfigError("good needs at least one c value")
    sweep = c_good_sweep(
        poly_of(config),
        config.c_values,
        config.t_ext_degree,
        config.sing_n_max,
        config.budget,
        config.workers,
    )
    for verdict in sweep.verdicts.values():
        if verdict.overall is Verdict.INCONCLUSIVE:
            logger.warning("c=%d: verdict inconclusive", verdict.c)
    write_json(config.out, sweep)
    return sweep


def cmd_compare(config: ExperimentConfig) -> SameTopReport:
    if config.poly2 is None:
        raise ConfigError("compare needs poly2")
    F, G = poly_of(config), poly_of(config, config.poly2)
    report = compare_same_top(F, G, config.n, config.budget, config.workers)
    write_json(config.out, report)
    return report


def cmd_regular_count(config: ExperimentConfig) -> RegularCountReport:
    if len(config.c_values) != 1:
        raise ConfigError("regular-count needs exactly one c value")
    H = top_homogeneous(poly_of(config))
    report = regular_count_profile(
        H, config.c_values[0], config.n_max, config.budget, config.workers
    )
    write_json(config.out, report)
    return report


# ---------------------------------------------------------------------------
# Fiber deviations and the derived bound
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Lemma3Level:
    n: int
    deviations: Dict[str, Fraction]
    max_deviation: Fraction
    scaled: float
    scaled_squared: Fraction


@dataclass(frozen=True)
class Lemma3Report:
    poly: str
    c: int
    verdict: GoodnessVerdict
    levels: List[Lemma3Level]
    skipped: List[int]
    m_hat: float
    m_hat_squared: Fraction
    attained_at: int
    non_increasing: bool
    stable: bool
    warning: Optional[str] = None


def verify_lemma3(
    F: MultiPoly,
    c: int,
    n_max: int = 3,
    t_ext_degree: int = 1,
    sing_n_max: int = 2,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> Lemma3Report:
    """|μ_n(t) − q^{−n}| for every t ∈ k_n, scaled by q^{n(c/2−1)}.

    Scaled values are compared through their exact squares. A failed
    goodness verdict raises :class:`NotCGoodError` carrying the full report;
    an inconclusive one only adds a warning.
    """
    verdict = c_good_check(F, c, t_ext_degree, sing_n_max, budget, workers)
    levels: List[Lemma3Level] = []
    skipped: List[int] = []
    for n in range(1, n_max + 1):
        try:
            fibers = census(F, n, budget, workers)
        except (BudgetExceededError, SizeOverflowError):
            skipped.append(n)
            continue
        Q = fibers.field.size
        uniform = Fraction(1, Q)
        deviations = {
            fibers.field.format(code): abs(Fraction(count, fibers.total) - uniform)
            for code, count in enumerate(fibers.counts)
        }
        worst = max(deviations.values())
        squared = worst * worst * Fraction(Q) ** (c - 2)
        levels.append(Lemma3Level(n, deviations, worst, math.sqrt(squared), squared))
    if not levels:
        raise NoCompletedLevelsError(f"budget {budget} excludes every level up to n={n_max}")
    squares = [level.scaled_squared for level in levels]
    best = max(squares)
    attained = levels[squares.index(best)].n
    warning = None
    if verdict.overall is not Verdict.GOOD:
        warning = f"F is {verdict.overall.value} at c={c}; the bound need not apply"
    report = Lemma3Report(
        poly=str(F),
        c=c,
        verdict=verdict,
        levels=levels,
        skipped=skipped,
        m_hat=math.sqrt(best),
        m_hat_squared=best,
        attained_at=attained,
        non_increasing=all(a >= b for a, b in zip(squares, squares[1:])),
        stable=attained == levels[0].n,
        warning=warning,
    )
    if verdict.overall is Verdict.NOT_GOOD:
        raise NotCGoodError(warning or "", report)
    if warning:
        logger.warning(warning)
    return report


def cmd_verify_lemma3(config: ExperimentConfig) -> Lemma3Report:
    if len(config.c_values) != 1:
        raise ConfigError("verify-lemma3 needs exactly one c value")
    try:
        report = verify_lemma3(
            poly_of(config),
            config.c_values[0],
            config.n_max,
            config.t_ext_degree,
            config.sing_n_max,
            config.budget,
            config.workers,
        )
    except NotCGoodError as exc:
        write_json(config.out, exc.report)
        raise
    write_json(config.out, report)
    return report


@dataclass(frozen=True)
class DerivedBoundReport:
    poly: str
    c: Optional[int]
    confident: bool
    t_sample_spec: str
    bias_estimate: float
    bias_exact: Optional[Fraction]
    bound: Optional[Fraction]
    slack: Optional[float]
    status: str


def _slack(c: int, bias: BiasReport) -> float:
    """2/(c−2) − B̂, exact when B̂ is rational."""
    if bias.bias_exact is not None:
        return float(Fraction(2, c - 2) - bias.bias_exact)
    return 2 / (c - 2) - bias.bias_estimate


def derived_bound(
    F: MultiPoly,
    n_max: int = DEFAULT_N_MAX,
    t_ext_degree: int = 1,
    sing_n_max: int = 2,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> DerivedBoundReport:
    """Check B̂ ≤ 2/(c−2) with c the largest sampled goodness level of F."""
    sweep = c_good_sweep(F, [], t_ext_degree, sing_n_max, budget, workers)
    bias = bias_estimate(F, n_max, budget, workers)
    c = sweep.min_codim
    bound: Optional[Fraction] = None
    slack: Optional[float] = None
    if c is None or not sweep.confident:
        status = "inconclusive"
    elif c <= 2:
        status = "vacuous"
    else:
        bound = Fraction(2, c - 2)
        slack = _slack(c, bias)
        status = "holds" if slack >= 0 else "violated"
    report = DerivedBoundReport(
        str(F), c, sweep.confident, sweep.t_sample_spec,
        bias.bias_estimate, bias.bias_exact, bound, slack, status,
    )
    if status == "violated":
        raise BoundViolationError(f"B̂ = {bias.bias_estimate} exceeds 2/(c-2) at c={c}", report)
    return report


def cmd_derived_bound(config: ExperimentConfig) -> DerivedBoundReport:
    try:
        report = derived_bound(
            poly_of(config),
            config.n_max,
            config.t_ext_degree,
            config.sing_n_max,
            config.budget,
            config.workers,
        )
    except BoundViolationError as exc:
        write_json(config.out, exc.report)
        raise
    write_json(config.out, report)
    return report


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EnsembleRow:
    seed: int
    poly: str
    rank_lo: Optional[int] = None
    rank_hi: Optional[int] = None
    codim_x: Optional[int] = None
    codim_confident: Optional[bool] = None
    c_good: Dict[int, str] = dc_field(default_factory=dict)
    b_values: Dict[int, Any] = dc_field(default_factory=dict)
    bias_est: Any = None
    goodness_c: Optional[int] = None
    bound_slack: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class CAggregate:
    c: int
    rows_below_threshold: int
    failing_below_threshold: int
    fail_fraction: Optional[Fraction]
    violations: List[int]


@dataclass(frozen=True)
class EnsembleAggregate:
    size: int
    errors: int
    rank_threshold: Optional[int]
    per_c: List[CAggregate]
    bound_rows: int
    bound_violations: List[int]


@dataclass(frozen=True)
class EnsembleResult:
    rows: List[EnsembleRow]
    aggregate: EnsembleAggregate


def planted_poly(config: ExperimentConfig, seed: int) -> MultiPoly:
    """Random polynomial, or a planted rank-r family under a random change of variables."""
    ctx = field_of(config)
    nvars = _nvars(config, config.poly)
    if config.plant is Plant.NONE:
        return random_poly(ctx, nvars, config.degree, config.homogeneous, seed)
    r = config.plant_rank
    rng = np.random.default_rng(seed)
    if config.plant is Plant.HYPERBOLIC:
        if nvars < 2 * r:
            raise ConfigError(f"hyperbolic plant of rank {r} needs {2 * r} variables")
        G = MultiPoly.zero(ctx, nvars)
        for i in range(r):
            G = G + MultiPoly.variable(ctx, nvars, 2 * i) * MultiPoly.variable(ctx, nvars, 2 * i + 1)
    else:
        G = MultiPoly.zero(ctx, nvars)
        for i in range(r):
            ell = MultiPoly.variable(ctx, nvars, i % nvars)
            cofactor = random_poly(
                ctx, nvars, config.degree - 1, homogeneous=True,
                seed=int(rng.integers(0, 2**31)),
            )
            G = G + ell * cofactor
    return G.linear_substitution(linalg.random_invertible(ctx, nvars, rng))


def _ensemble_row(config: ExperimentConfig, seed: int, workers: int) -> EnsembleRow:
    try:
        F = planted_poly(config, seed)
    except FFBiasError as exc:
        return EnsembleRow(seed, "", error=f"{type(exc).__name__}: {exc}")
    try:
        sweep = c_good_sweep(
            F, config.c_values, config.t_ext_degree, config.sing_n_max, config.budget, workers
        )
        x_report = next((r for r in sweep.reports if r.variety is Variety.X), None)
        interval = rank_of(
            F, config.search_budget, seed, config.extension_degree,
            config.sing_n_max, config.budget, workers, x_report,
        )
        bias = bias_estimate(F, config.n_max, config.budget, workers)
    except FFBiasError as exc:
        return EnsembleRow(seed, str(F), error=f"{type(exc).__name__}: {exc}")
    c = sweep.min_codim
    slack = None
    if c is not None and sweep.confident and c > 2:
        slack = _slack(c, bias)
    return EnsembleRow(
        seed=seed,
        poly=str(F),
        rank_lo=interval.lo,
        rank_hi=interval.hi,
        codim_x=None if x_report is None else x_report.codim,
        codim_confident=None if x_report is None else x_report.confident,
        c_good={k: v.overall.value for k, v in sweep.verdicts.items()},
        b_values=bias.b_values(),
        bias_est=bias.bias_exact if bias.bias_exact is not None else bias.bias_estimate,
        goodness_c=c,
        bound_slack=slack,
    )


def _aggregate(config: ExperimentConfig, rows: Sequence[EnsembleRow]) -> EnsembleAggregate:
    per_c: List[CAggregate] = []
    ok = [row for row in rows if row.error is None]
    threshold = config.rank_threshold
    for c in config.c_values:
        below = [row for row in ok if threshold is not None and row.rank_hi < threshold]
        failing = [row for row in below if row.c_good.get(c) == Verdict.NOT_GOOD.value]
        violations = [
            row.seed
            for row in ok
            if threshold is not None
            and row.rank_lo >= threshold
            and row.c_good.get(c) == Verdict.NOT_GOOD.value
        ]
        fraction = Fraction(len(failing), len(below)) if below else None
        per_c.append(CAggregate(c, len(below), len(failing), fraction, violations))
    bound_rows = [row for row in ok if row.bound_slack is not None]
    return EnsembleAggregate(
        size=len(rows),
        errors=len(rows) - len(ok),
        rank_threshold=threshold,
        per_c=per_c,
        bound_rows=len(bound_rows),
        bound_violations=[row.seed for row in bound_rows if row.bound_slack < 0],
    )


def run_ensemble(config: ExperimentConfig) -> EnsembleResult:
    """Rows for seeds seed, seed+1, ... in seed order.

    With several rows the worker budget goes to the rows and each row runs
    its sweeps serially; a single row gets the workers for its sweeps.
    """
    workers = resolve_workers(config.workers)
    seeds = [config.seed + i for i in range(config.ensemble_size)]
    if len(seeds) > 1:
        rows = ordered_map(_ensemble_row, [(config, s, 1) for s in seeds], workers)
    else:
        rows = [_ensemble_row(config, seeds[0], workers)]
    for row in rows:
        if row.error:
            logger.warning("seed %d failed: %s", row.seed, row.error)
    return EnsembleResult(list(rows), _aggregate(config, rows))


def ensemble_header(config: ExperimentConfig) -> List[str]:
    return (
        ["seed", "poly", "rank_lo", "rank_hi", "codim_X", "codim_confident"]
        + [f"c_good_at_{c}" for c in config.c_values]
        + [f"b_{n}" for n in range(1, config.n_max + 1)]
        + ["bias_est", "bound_slack", "error"]
    )


def _csv_row(row: EnsembleRow) -> Dict[str, Any]:
    cells: Dict[str, Any] = {
        "seed": row.seed,
        "poly": row.poly,
        "rank_lo": row.rank_lo,
        "rank_hi": row.rank_hi,
        "codim_X": row.codim_x,
        "codim_confident": row.codim_confident,
        "bias_est": row.bias_est,
        "bound_slack": row.bound_slack,
        "error": row.error,
    }
    for c, verdict in row.c_good.items():
        cells[f"c_good_at_{c}"] = verdict
    for n, b in row.b_values.items():
        cells[f"b_{n}"] = b
    return cells


def aggregate_path(config: ExperimentConfig) -> Optional[str]:
    if config.aggregate_out:
        return config.aggregate_out
    if config.out and config.out != "-":
        return os.path.splitext(config.out)[0] + ".aggregate.json"
    return None


def cmd_ensemble(config: ExperimentConfig) -> EnsembleResult:
    result = run_ensemble(config)
    write_csv(config.out, ensemble_header(config), (_csv_row(r) for r in result.rows))
    target = aggregate_path(config)
    if target:
        write_json(target, result.aggregate)
    aggregate = result.aggregate
    logger.info(
        "ensemble: %d rows, %d errors, %d bound rows",
        aggregate.size, aggregate.errors, aggregate.bound_rows,
    )
    broken = [a for a in aggregate.per_c if a.violations]
    if broken:
        raise LemmaViolationError(
            "rows with rank lo ≥ threshold fail c-goodness: "
            + ", ".join(f"c={a.c}: seeds {a.violations}" for a in broken),
            [r for r in result.rows if any(r.seed in a.violations for a in broken)],
        )
    if aggregate.bound_violations:
        raise BoundViolationError(
            f"derived bound violated for seeds {aggregate.bound_violations}", aggregate
        )
    return result


COMMANDS = {
    "census": cmd_census,
    "bias": cmd_bias,
    "rank": cmd_rank,
    "singular": cmd_singular,
    "good": cmd_good,
    "verify-lemma3": cmd_verify_lemma3,
    "derived-bound": cmd_derived_bound,
    "ensemble": cmd_ensemble,
    "compare": cmd_compare,
    "regular-count": cmd_regular_count,
}
