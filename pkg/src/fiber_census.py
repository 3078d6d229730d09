"""Exhaustive fiber counting over V(k_n) and the statistics built on it.

The census enumerates the q^{nN} points of k_n^N in base-q^n positional
order (x0 most significant), evaluates F on vectorized blocks of
``CHUNK_SIZE`` points and histograms the values. Workers receive contiguous
ranges of the index space and their histograms are summed in range order,
so any worker count yields the same counts.

Probabilities μ_n and gaps Δ_n stay exact Fractions; logarithms are taken
only for b_n, and b_n itself is exact whenever Δ_n is a power of 1/p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, List, Optional, Union

import numpy as np

from src.config import CHUNK_SIZE, DEFAULT_BUDGET, Variety
from src.errors import (
    BudgetExceededError,
    DegreeTooLowError,
    DivisibilityViolationError,
    IdentityViolationError,
    NoCompletedLevelsError,
    NotHomogeneousError,
    SizeOverflowError,
    UsageError,
    ZeroPolynomialError,
)
from src.finite_field import FieldCtx, FieldElement, embed_codes, enumerate_elements, extend
from src.logger import get_logger
from src.polynomial import MultiPoly, compile_poly, evaluate, homogenize, top_homogeneous
from src.types import Counts
from src.workers import ordered_map, partition, resolve_workers

logger = get_logger(__name__)

Real = Union[Fraction, float]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FiberCensus:
    """Exact fiber sizes of F over k_n, indexed by element code."""

    field: FieldCtx
    n: int
    nvars: int
    poly: MultiPoly
    total: int
    counts: Counts

    def count(self, t: FieldElement) -> int:
        return self.counts[int(embed_codes(t.code, t.ctx, self.field))]

    def as_mapping(self) -> Dict[str, int]:
        return {self.field.format(code): c for code, c in enumerate(self.counts)}


@dataclass(frozen=True)
class LevelMeasures:
    n: int
    mu: List[Fraction]
    delta: Fraction
    b_n: Optional[Real]
    uniform: bool

    @property
    def inverse_b(self) -> Real:
        """Contribution 1/b_n to the bias; a uniform level contributes 0."""
        if self.uniform:
            return Fraction(0)
        assert self.b_n is not None
        if self.b_n == 0:
            return math.inf
        return 1 / self.b_n


@dataclass(frozen=True)
class LevelRecord:
    """One level of a bias report; ``b_exact`` is set when b_n is rational."""

    n: int
    counts: Dict[str, int]
    delta: Fraction
    b_n: Optional[float]
    b_exact: Optional[Fraction]
    uniform: bool


@dataclass(frozen=True)
class SkippedLevel:
    n: int
    required: int
    reason: str


@dataclass(frozen=True)
class BiasReport:
    field: str
    nvars: int
    poly: str
    levels: List[LevelRecord]
    skipped: List[SkippedLevel]
    bias_estimate: float
    bias_exact: Optional[Fraction]
    attained_at: int
    stabilized: bool
    note: str = "bias_estimate is the max of 1/b_n over the computed levels, not the limsup"

    def b_values(self) -> Dict[int, Optional[Real]]:
        """b_n per completed level, exact where available."""
        return {
            level.n: level.b_exact if level.b_exact is not None else level.b_n
            for level in self.levels
        }


@dataclass(frozen=True)
class ProjectiveCount:
    variety: Variety
    t: Optional[str]
    n: int
    ambient_dim: int
    points: int
    affine_zeros: int


@dataclass(frozen=True)
class FiberIdentityReport:
    t: str
    n: int
    affine: int
    y_points: int
    x_points: int
    holds: bool


@dataclass(frozen=True)
class SameTopReport:
    n: int
    baseline: int
    deviations_f: Dict[str, int]
    deviations_g: Dict[str, int]
    max_deviation_f: int
    max_deviation_g: int
    max_gap: int
    within_twice: bool


@dataclass(frozen=True)
class RegularCountLevel:
    n: int
    points: int
    main_term: int
    deviation: int
    scaled: float


@dataclass(frozen=True)
class RegularCountReport:
    c: int
    dimension: int
    levels: List[RegularCountLevel] = dc_field(default_factory=list)
    m_hat: float = 0.0
    non_increasing: bool = True


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------
def level_field(P: MultiPoly, n: int) -> FieldCtx:
    """k_n over the base field of P's coefficients."""
    return extend(P.ctx.base, n)


def point_blocks(field: FieldCtx, nvars: int, start: int, stop: int):
    """Coordinate arrays for the points with indices in [start, stop)."""
    Q = field.size
    weights = [Q ** (nvars - 1 - j) for j in range(nvars)]
    for lo in range(start, stop, CHUNK_SIZE):
        idx = np.arange(lo, min(stop, lo + CHUNK_SIZE), dtype=np.int64)
        yield idx, [(idx // w) % Q for w in weights]


def check_budget(field: FieldCtx, nvars: int, budget: int) -> int:
    required = field.size**nvars
    if required > budget:
        raise BudgetExceededError(required, budget)
    return required


def _census_range(poly: MultiPoly, field: FieldCtx, start: int, stop: int) -> np.ndarray:
    compiled = compile_poly(poly, field)
    hist = np.zeros(field.size, dtype=np.int64)
    for idx, coords in point_blocks(field, poly.nvars, start, stop):
        values = compiled(coords)
        if values.shape != idx.shape:
            values = np.broadcast_to(values, idx.shape)
        hist += np.bincount(values, minlength=field.size)
    return hist


def census(
    F: MultiPoly,
    n: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> FiberCensus:
    """Exact #F|_n^{-1}(t) for every t ∈ k_n by full enumeration."""
    field = level_field(F, n)
    required = check_budget(field, F.nvars, budget)
    workers = resolve_workers(workers)
    logger.debug("census of %s over %s: %d points", F, field, required)
    ranges = partition(0, required, workers, CHUNK_SIZE)
    parts = ordered_map(_census_range, [(F, field, lo, hi) for lo, hi in ranges], workers)
    hist = np.sum(parts, axis=0) if parts else np.zeros(field.size, dtype=np.int64)
    counts = tuple(int(c) for c in hist)
    assert sum(counts) == required
    return FiberCensus(field, n, F.nvars, F, required, counts)


def census_naive(F: MultiPoly, n: int, budget: int = DEFAULT_BUDGET) -> FiberCensus:
    """Term-by-term scalar enumeration; the oracle for :func:`census`."""
    field = level_field(F, n)
    required = check_budget(field, F.nvars, budget)
    counts = [0] * field.size
    for point in itertools.product(list(enumerate_elements(field)), repeat=F.nvars):
        counts[evaluate(F, list(point)).code if point else _constant_code(F, field)] += 1
    return FiberCensus(field, n, F.nvars, F, required, tuple(counts))


def _constant_code(F: MultiPoly, field: FieldCtx) -> int:
    return int(embed_codes(F.coefficient(()), F.ctx, field))


# ---------------------------------------------------------------------------
# Bias
# ---------------------------------------------------------------------------
def _integer_log(value: int, base: int) -> Optional[int]:
    k = 0
    while value > 1 and value % base == 0:
        value //= base
        k += 1
    return k if value == 1 else None


def _neg_log(delta: Fraction, field: FieldCtx) -> Real:
    """−log_{|field|}(delta), exact when delta is a power of 1/p."""
    if delta.numerator == 1:
        e = _integer_log(delta.denominator, field.p)
        if e is not None:
            return Fraction(e, field.m * field.n)
    logs = math.log(delta.numerator) - math.log(delta.denominator)
    return -logs / math.log(field.size)


def measures(c: FiberCensus) -> LevelMeasures:
    """μ_n, Δ_n = max_{t,s}|μ_n(t) − μ_n(s)| and b_n for one census."""
    mu = [Fraction(k, c.total) for k in c.counts]
    delta = Fraction(max(c.counts) - min(c.counts), c.total)
    if delta == 0:
        return LevelMeasures(c.n, mu, delta, None, True)
    return LevelMeasures(c.n, mu, delta, _neg_log(delta, c.field), False)


def bias_estimate(
    F: MultiPoly,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> BiasReport:
    """Census for n = 1..n_max; B̂ is the max of 1/b_n over completed levels."""
    if n_max < 1:
        raise UsageError(f"n_max must be at least 1, got {n_max}")
    records: List[LevelRecord] = []
    inverses: List[Real] = []
    skipped: List[SkippedLevel] = []
    for n in range(1, n_max + 1):
        try:
            c = census(F, n, budget, workers)
        except BudgetExceededError as exc:
            logger.info("level n=%d skipped: needs %d evaluations", n, exc.required)
            skipped.append(SkippedLevel(n, exc.required, "budget"))
            continue
        except SizeOverflowError as exc:
            logger.info("level n=%d skipped: field size %d", n, exc.size)
            skipped.append(SkippedLevel(n, exc.size**F.nvars, "field-size"))
            continue
        level = measures(c)
        exact = level.b_n if isinstance(level.b_n, Fraction) else None
        approx = None if level.b_n is None else float(level.b_n)
        records.append(
            LevelRecord(n, c.as_mapping(), level.delta, approx, exact, level.uniform)
        )
        inverses.append(level.inverse_b)
    if not records:
        raise NoCompletedLevelsError(
            f"budget {budget} excludes every level up to n={n_max}"
        )
    best = max(inverses)
    attained = records[inverses.index(best)].n
    stabilized = len(inverses) >= 2 and inverses[-1] == inverses[-2]
    return BiasReport(
        field=F.ctx.spec,
        nvars=F.nvars,
        poly=str(F),
        levels=records,
        skipped=skipped,
        bias_estimate=float(best),
        bias_exact=best if isinstance(best, Fraction) else None,
        attained_at=attained,
        stabilized=stabilized,
    )


# ---------------------------------------------------------------------------
# Projective counts
# ---------------------------------------------------------------------------
def _require_homogeneous(H: MultiPoly) -> None:
    if H.is_zero():
        raise ZeroPolynomialError("the zero polynomial defines no hypersurface")
    if not H.is_homogeneous():
        raise NotHomogeneousError(f"{H} is not homogeneous")


def cone_to_projective(cone_points: int, field: FieldCtx) -> int:
    """(affine cone count − 1)/(q^n − 1); the division must be exact."""
    numerator = cone_points - 1
    if numerator % (field.size - 1):
        raise DivisibilityViolationError(
            f"cone count {cone_points} is not 1 mod {field.size - 1}"
        )
    return numerator // (field.size - 1)


def projective_count(
    H: MultiPoly,
    n: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
    variety: Variety = Variety.X,
    t: Optional[FieldElement] = None,
) -> ProjectiveCount:
    """Number of k_n-points of {H = 0} in P^{nvars-1}."""
    _require_homogeneous(H)
    c = census(H, n, budget, workers)
    zeros = c.counts[0]
    points = cone_to_projective(zeros, c.field)
    return ProjectiveCount(
        variety, None if t is None else str(t), n, H.nvars - 1, points, zeros
    )


def fiber_identity_check(
    F: MultiPoly,
    t: FieldElement,
    n: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
    affine_census: Optional[FiberCensus] = None,
) -> FiberIdentityReport:
    """#F|_n^{-1}(t) = #Y_t(k_n) − #X(k_n), both sides by enumeration."""
    if F.degree < 1:
        raise DegreeTooLowError("the fiber identity needs deg F ≥ 1")
    c = affine_census or census(F, n, budget, workers)
    affine = c.count(t)
    x = projective_count(top_homogeneous(F), n, budget, workers, Variety.X)
    y = projective_count(homogenize(F, t).poly, n, budget, workers, Variety.Y, t)
    if affine != y.points - x.points:
        raise IdentityViolationError(
            f"fiber identity failed for t={t}, n={n}", affine, y.points - x.points
        )
    return FiberIdentityReport(str(t), n, affine, y.points, x.points, True)


# ---------------------------------------------------------------------------
# Comparisons
# ---------------------------------------------------------------------------
def compare_same_top(
    F: MultiPoly,
    G: MultiPoly,
    n: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> SameTopReport:
    """Fiber deviations from q^{n(N−1)} for two polynomials sharing F̃."""
    if F.nvars != G.nvars or top_homogeneous(F) != top_homogeneous(G):
        raise UsageError("compare_same_top needs polynomials with the same top part")
    cf, cg = census(F, n, budget, workers), census(G, n, budget, workers)
    baseline = cf.field.size ** (F.nvars - 1)
    dev_f = {cf.field.format(k): v - baseline for k, v in enumerate(cf.counts)}
    dev_g = {cg.field.format(k): v - baseline for k, v in enumerate(cg.counts)}
    max_f = max(abs(v) for v in dev_f.values())
    max_g = max(abs(v) for v in dev_g.values())
    gap = max(abs(a - b) for a, b in zip(cf.counts, cg.counts))
    return SameTopReport(n, baseline, dev_f, dev_g, max_f, max_g, gap, gap <= 2 * max(max_f, max_g))


def regular_count_profile(
    H: MultiPoly,
    c: int,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> RegularCountReport:
    """Deviation of #Z(k_n) from the top ⌊c/2⌋ powers of q^n, Z = {H = 0}.

    Scaled by q^{−n(e − c/2)} with e = dim Z; a bounded, non-increasing
    profile is what a c-regular Z predicts.
    """
    _require_homogeneous(H)
    e = H.nvars - 2
    half = c // 2
    levels: List[RegularCountLevel] = []
    for n in range(1, n_max + 1):
        try:
            count = projective_count(H, n, budget, workers)
        except (BudgetExceededError, SizeOverflowError):
            logger.info("regular-count level n=%d skipped", n)
            continue
        Q = level_field(H, n).size
        main = sum(Q**i for i in range(max(0, e - half + 1), e + 1))
        deviation = abs(count.points - main)
        scaled = deviation / Q ** (e - c / 2)
        levels.append(RegularCountLevel(n, count.points, main, deviation, scaled))
    if not levels:
        raise NoCompletedLevelsError(f"budget {budget} excludes every level")
    scaled = [level.scaled for level in levels]
    non_increasing = all(a >= b for a, b in zip(scaled, scaled[1:]))
    return RegularCountReport(c, e, levels, max(scaled), non_increasing)
