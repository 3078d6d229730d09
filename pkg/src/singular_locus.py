"""Singular loci by the Jacobian criterion, dimension by point-count growth.

A projective point is singular on {H = 0} when H and every ∂H/∂x_i vanish
there. Counts come from sweeping the affine cone over k_n with the census
engine's block enumeration; dimensions come from how those counts grow with
n (a d-dimensional variety has about q^{nd} points over k_n).

Codimension is measured inside the hypersurface, and an empty singular locus
is given codimension equal to the number of variables of H.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.config import (
    CHUNK_SIZE,
    DEFAULT_BUDGET,
    DEFAULT_SING_N_MAX,
    POINT_CAP,
    SLOPE_TOLERANCE,
    Variety,
    Verdict,
)
from src.errors import (
    BudgetExceededError,
    ConePartialsMismatchError,
    DegreeTooLowError,
    InsufficientLevelsError,
    SizeOverflowError,
)
from src.fiber_census import (
    _require_homogeneous,
    check_budget,
    cone_to_projective,
    level_field,
    point_blocks,
)
from src.finite_field import FieldCtx, FieldElement, enumerate_elements, extend
from src.logger import get_logger
from src.polynomial import MultiPoly, compile_poly, homogenize, partials, top_homogeneous
from src.workers import ordered_map, partition, resolve_workers

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class CommonZeros:
    n: int
    count: int
    points: List[List[str]]
    truncated: bool


@dataclass(frozen=True)
class SingularReport:
    variety: Variety
    t: Optional[str]
    poly: str
    nvars: int
    dimension: int
    counts: Dict[int, int]
    skipped: List[int]
    dim_estimate: Optional[int]
    empty: bool
    confident: bool
    codim: Optional[int]
    tolerance: float
    regular: Dict[int, bool] = dc_field(default_factory=dict)
    points: Dict[int, List[List[str]]] = dc_field(default_factory=dict)

    @property
    def ambient_codim(self) -> Optional[int]:
        """Codimension of the singular locus in P^{nvars-1}."""
        if self.empty:
            return self.nvars
        if self.dim_estimate is None:
            return None
        return (self.nvars - 1) - self.dim_estimate

    def is_regular(self, c: int) -> Optional[bool]:
        if self.codim is None:
            return None
        return self.codim >= c


@dataclass(frozen=True)
class VarietyVerdict:
    variety: Variety
    t: Optional[str]
    codim: Optional[int]
    confident: bool
    regular: Optional[bool]


@dataclass(frozen=True)
class GoodnessVerdict:
    c: int
    varieties: List[VarietyVerdict]
    overall: Verdict
    t_sample_spec: str


@dataclass(frozen=True)
class GoodnessSweep:
    reports: List[SingularReport]
    verdicts: Dict[int, GoodnessVerdict]
    t_sample_spec: str

    @property
    def confident(self) -> bool:
        return bool(self.reports) and all(r.confident for r in self.reports)

    @property
    def min_codim(self) -> Optional[int]:
        """Largest c for which every swept variety is c-regular."""
        codims = [r.codim for r in self.reports]
        if not codims or any(c is None for c in codims):
            return None
        return min(codims)  # type: ignore[type-var]


# ---------------------------------------------------------------------------
# Common zeros
# ---------------------------------------------------------------------------
def _zeros_range(
    polys: Sequence[MultiPoly],
    systems: Sequence[Sequence[int]],
    field: FieldCtx,
    start: int,
    stop: int,
    cap: int,
) -> Tuple[List[int], List[Tuple[int, ...]]]:
    compiled = [compile_poly(P, field) for P in polys]
    nvars = polys[0].nvars
    counts = [0] * len(systems)
    points: List[Tuple[int, ...]] = []
    for idx, coords in point_blocks(field, nvars, start, stop):
        zero = [np.broadcast_to(f(coords), idx.shape) == 0 for f in compiled]
        mask = None
        for s, system in enumerate(systems):
            mask = np.ones(idx.shape, dtype=bool)
            for i in system:
                mask &= zero[i]
            counts[s] += int(mask.sum())
        if mask is None or len(points) >= cap or not nvars:
            continue
        stacked = np.stack(coords)
        nonzero = stacked != 0
        first = np.argmax(nonzero, axis=0)
        lead = stacked[first, np.arange(idx.size)]
        keep = np.flatnonzero(mask & nonzero.any(axis=0) & (lead == 1))
        for k in keep[: cap - len(points)]:
            points.append(tuple(int(v) for v in stacked[:, k]))
    return counts, points


def _sweep_zeros(
    polys: Sequence[MultiPoly],
    systems: Sequence[Sequence[int]],
    n: int,
    budget: int,
    workers: Optional[int],
    cap: int,
) -> Tuple[FieldCtx, List[int], List[Tuple[int, ...]]]:
    field = level_field(polys[0], n)
    required = check_budget(field, polys[0].nvars, budget)
    workers = resolve_workers(workers)
    ranges = partition(0, required, workers, CHUNK_SIZE)
    parts = ordered_map(
        _zeros_range,
        [(list(polys), systems, field, lo, hi, cap) for lo, hi in ranges],
        workers,
    )
    counts = [sum(part[0][s] for part in parts) for s in range(len(systems))]
    points = [pt for part in parts for pt in part[1]][:cap]
    return field, counts, points


def _format_points(field: FieldCtx, points: Sequence[Tuple[int, ...]]) -> List[List[str]]:
    return [[field.format(v) for v in pt] for pt in points]


def common_zeros(
    polys: Sequence[MultiPoly],
    n: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
    cap: int = POINT_CAP,
) -> CommonZeros:
    """Projective k_n-points where every homogeneous polynomial vanishes."""
    for P in polys:
        _require_homogeneous(P)
    field, counts, points = _sweep_zeros(
        polys, [list(range(len(polys)))], n, budget, workers, cap
    )
    count = cone_to_projective(counts[0], field)
    return CommonZeros(n, count, _format_points(field, points), count > len(points))


def singular_points(
    H: MultiPoly,
    n: int,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
    cap: int = POINT_CAP,
) -> CommonZeros:
    """Singular k_n-points of {H = 0} in P^{nvars-1} (Jacobian criterion).

    Counts with and without H itself; when p ∤ deg H Euler's identity makes
    them equal and that is asserted.
    """
    _require_homogeneous(H)
    grads = partials(H)
    polys = [H] + grads
    with_h = list(range(len(polys)))
    grads_only = list(range(1, len(polys)))
    field, counts, points = _sweep_zeros(polys, [grads_only, with_h], n, budget, workers, cap)
    if H.degree % H.ctx.p and counts[0] != counts[1]:
        raise ConePartialsMismatchError(
            f"{H}: {counts[0]} cone points kill the partials, {counts[1]} also kill H"
        )
    count = cone_to_projective(counts[1], field)
    return CommonZeros(n, count, _format_points(field, points), count > len(points))


# ---------------------------------------------------------------------------
# Dimension
# ---------------------------------------------------------------------------
def _slope(a: Tuple[int, int], b: Tuple[int, int], q: int) -> float:
    (n1, c1), (n2, c2) = a, b
    return math.log(c2 / c1) / ((n2 - n1) * math.log(q))


def dim_estimate(
    counts: Mapping[int, int], q: int, tolerance: float = SLOPE_TOLERANCE
) -> Tuple[Optional[int], bool]:
    """(d̂, confident) from per-n point counts; d̂ = None means EMPTY.

    Uses the two largest levels; confident when that slope is within
    ``tolerance`` of an integer and every consecutive pair rounds the same.
    """
    levels = sorted(counts.items())
    if not levels:
        raise InsufficientLevelsError("no computed levels")
    if all(c == 0 for _, c in levels):
        return None, len(levels) >= 2
    nonzero = [(n, c) for n, c in levels if c > 0]
    if len(nonzero) < 2:
        raise InsufficientLevelsError(f"only one level with points: {levels}")
    slope = _slope(nonzero[-2], nonzero[-1], q)
    d_hat = round(slope)
    pairs = [round(_slope(a, b, q)) for a, b in zip(nonzero, nonzero[1:])]
    confident = (
        abs(slope - d_hat) <= tolerance
        and all(r == d_hat for r in pairs)
        and len(nonzero) == len(levels)
        and d_hat >= 0
    )
    return max(d_hat, 0), confident


# ---------------------------------------------------------------------------
# Regularity and goodness
# ---------------------------------------------------------------------------
def c_regularity(
    H: MultiPoly,
    n_max: int = DEFAULT_SING_N_MAX,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
    c_values: Sequence[int] = (),
    variety: Variety = Variety.X,
    t: Optional[FieldElement] = None,
) -> SingularReport:
    """Singular counts over the tower, dimension estimate and codimension.

    A polynomial with coefficients in k_e is swept at n = e, 2e, ..., n_max·e.
    """
    _require_homogeneous(H)
    step = H.ctx.n
    counts: Dict[int, int] = {}
    points: Dict[int, List[List[str]]] = {}
    skipped: List[int] = []
    for j in range(1, n_max + 1):
        n = step * j
        try:
            result = singular_points(H, n, budget, workers)
        except (BudgetExceededError, SizeOverflowError):
            logger.info("singular level n=%d of %s skipped", n, H)
            skipped.append(n)
            continue
        counts[n] = result.count
        points[n] = result.points
    dimension = H.nvars - 2
    q = H.ctx.q
    d_hat: Optional[int]
    try:
        d_hat, confident = dim_estimate(counts, q)
        empty = d_hat is None
    except InsufficientLevelsError:
        nonzero = [(n, c) for n, c in sorted(counts.items()) if c > 0]
        d_hat = (
            max(0, round(math.log(nonzero[0][1]) / (nonzero[0][0] * math.log(q))))
            if nonzero
            else None
        )
        confident, empty = False, False
    if empty:
        codim: Optional[int] = H.nvars
    elif d_hat is None:
        codim = None
    else:
        codim = dimension - d_hat
    regular = {c: codim >= c for c in c_values} if codim is not None else {}
    return SingularReport(
        variety=variety,
        t=None if t is None else str(t),
        poly=str(H),
        nvars=H.nvars,
        dimension=dimension,
        counts=counts,
        skipped=skipped,
        dim_estimate=d_hat,
        empty=empty,
        confident=confident,
        codim=codim,
        tolerance=SLOPE_TOLERANCE,
        regular=regular,
        points=points,
    )


def _verdict(c: int, reports: Sequence[SingularReport], sampling: str) -> GoodnessVerdict:
    if c <= 0:
        return GoodnessVerdict(c, [], Verdict.GOOD, sampling)
    rows = [
        VarietyVerdict(r.variety, r.t, r.codim, r.confident, r.is_regular(c))
        for r in reports
    ]
    if any(v.confident and v.regular is False for v in rows):
        overall = Verdict.NOT_GOOD
    elif all(v.confident and v.regular for v in rows):
        overall = Verdict.GOOD
    else:
        overall = Verdict.INCONCLUSIVE
    return GoodnessVerdict(c, rows, overall, sampling)


def c_good_sweep(
    F: MultiPoly,
    c_values: Sequence[int],
    t_ext_degree: int = 1,
    n_max: int = 2,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> GoodnessSweep:
    """Regularity of X^F and every Y_t^F, t ∈ k_{t_ext_degree}, for many c."""
    if F.degree < 2:
        raise DegreeTooLowError("c-goodness needs deg F ≥ 2")
    t_field = extend(F.ctx.base, t_ext_degree)
    sampling = f"t swept over k_{t_ext_degree} = {t_field.spec}, not all of the algebraic closure"
    reports: List[SingularReport] = []
    if not c_values or any(c > 0 for c in c_values):
        reports.append(
            c_regularity(top_homogeneous(F), n_max, budget, workers, c_values, Variety.X)
        )
        for t in enumerate_elements(t_field):
            Y = homogenize(F, t).poly
            reports.append(c_regularity(Y, n_max, budget, workers, c_values, Variety.Y, t))
    verdicts = {c: _verdict(c, reports, sampling) for c in c_values}
    for c, v in verdicts.items():
        logger.debug("%s: %s for c=%d", F, v.overall.value, c)
    return GoodnessSweep(reports, verdicts, sampling)


def c_good_check(
    F: MultiPoly,
    c: int,
    t_ext_degree: int = 1,
    n_max: int = 2,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
) -> GoodnessVerdict:
    return c_good_sweep(F, [c], t_ext_degree, n_max, budget, workers).verdicts[c]
