"""Rank (strength) of homogeneous polynomials.

The rank of G is the least r with G = Q_1·P_1 + ... + Q_r·P_r where every
factor has degree below deg G. Quadratics get the exact value from the
associated symmetric matrix. Higher degrees get an interval: an upper bound
from an explicit, re-checked factorization and a lower bound from the
codimension of the singular locus.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src import linalg
from src.config import (
    CHUNK_SIZE,
    DEFAULT_BUDGET,
    DEFAULT_SEARCH_BUDGET,
    DEFAULT_SING_N_MAX,
    RankMethod,
    Variety,
)
from src.errors import (
    CharacteristicTwoError,
    DegreeTooLowError,
    MismatchedVarietyError,
    NotHomogeneousError,
    NotQuadraticError,
    SandwichViolationError,
    SizeOverflowError,
    WitnessError,
)
from src.finite_field import FieldCtx, FieldElement, embed_codes, extend, sqrt
from src.logger import get_logger
from src.polynomial import CompiledPoly, MultiPoly, homogenize, monomials, top_homogeneous
from src.singular_locus import SingularReport, c_regularity

logger = get_logger(__name__)

Pair = Tuple[MultiPoly, MultiPoly]


@dataclass(frozen=True)
class Factorization:
    """Σ Q_i·P_i = target, the pairs living over ``field`` ⊇ target's field."""

    pairs: List[Pair]
    target: MultiPoly
    field: FieldCtx

    @property
    def length(self) -> int:
        return len(self.pairs)

    def expand(self) -> MultiPoly:
        total = MultiPoly.zero(self.field, self.target.nvars)
        for Q, P in self.pairs:
            total = total + Q * P
        return total

    def validate(self) -> "Factorization":
        d = self.target.degree
        for Q, P in self.pairs:
            if Q.degree >= d or P.degree >= d:
                raise WitnessError(f"factor degree not below {d}: ({Q}) * ({P})")
        if self.expand() != self.target.change_ring(self.field):
            raise WitnessError(f"factorization does not expand to {self.target}")
        return self


@dataclass(frozen=True)
class NoWitnessFound:
    """The search ran out of budget; this is not a lower bound."""

    attempts: int


@dataclass(frozen=True)
class RankInterval:
    lo: int
    hi: int
    witness: Optional[Factorization]
    lo_method: RankMethod
    hi_method: RankMethod
    confident: bool = True

    @property
    def exact(self) -> bool:
        return self.confident and self.lo == self.hi


@dataclass(frozen=True)
class SandwichReport:
    poly: str
    t: str
    rank: int
    rank_homogenized: int
    holds: bool


# ---------------------------------------------------------------------------
# Quadratics
# ---------------------------------------------------------------------------
def _unit(nvars: int, *indices: int) -> Tuple[int, ...]:
    e = [0] * nvars
    for i in indices:
        e[i] += 1
    return tuple(e)


def _check_quadratic(Q: MultiPoly) -> None:
    if Q.degree != 2 or not Q.is_homogeneous():
        raise NotQuadraticError(f"expected a homogeneous quadratic, got {Q}")
    if Q.ctx.p == 2:
        raise CharacteristicTwoError("quadratic rank needs odd characteristic")


def quadratic_matrix(Q: MultiPoly) -> List[List[int]]:
    """2B for the symmetric B with Q(x) = xᵀBx: diagonal 2·a_ii, off-diagonal c_ij."""
    N, ctx = Q.nvars, Q.ctx
    two = ctx.from_int(2)
    M = [[0] * N for _ in range(N)]
    for i in range(N):
        M[i][i] = ctx.mul(two, Q.coefficient(_unit(N, i, i)))
        for j in range(i + 1, N):
            M[i][j] = M[j][i] = Q.coefficient(_unit(N, i, j))
    return M


def quadratic_rank(Q: MultiPoly) -> int:
    """⌈rank(B)/2⌉, the exact rank of a quadratic form in odd characteristic."""
    _check_quadratic(Q)
    return (linalg.rank(quadratic_matrix(Q), Q.ctx) + 1) // 2


def _split_quadratic(Q: MultiPoly) -> Tuple[List[Pair], List[Tuple[int, MultiPoly]]]:
    """Hyperbolic planes (f, g) and weighted squares (a, ℓ) summing to Q."""
    N, ctx = Q.nvars, Q.ctx
    products: List[Pair] = []
    squares: List[Tuple[int, MultiPoly]] = []
    rest = Q
    while not rest.is_zero():
        i = next((k for k in range(N) if rest.coefficient(_unit(N, k, k))), None)
        if i is not None:
            a = rest.coefficient(_unit(N, i, i))
            half = ctx.inv(ctx.mul(ctx.from_int(2), a))
            coeffs = [
                1 if j == i else ctx.mul(rest.coefficient(_unit(N, i, j)), half)
                for j in range(N)
            ]
            ell = MultiPoly.linear_form(ctx, coeffs)
            squares.append((a, ell))
            rest = rest - (ell * ell).scale(a)
            continue
        e, c = rest.sorted_terms()[0]
        i, j = [k for k, v in enumerate(e) if v]
        A = [0 if k in (i, j) else rest.coefficient(_unit(N, i, k)) for k in range(N)]
        B = [0 if k in (i, j) else rest.coefficient(_unit(N, j, k)) for k in range(N)]
        f = MultiPoly.variable(ctx, N, i, c) + MultiPoly.linear_form(ctx, B)
        g = MultiPoly.variable(ctx, N, j) + MultiPoly.linear_form(ctx, A).scale(ctx.inv(c))
        products.append((f, g))
        rest = rest - f * g
    return products, squares


def quadratic_witness(Q: MultiPoly) -> Factorization:
    """A factorization of length quadratic_rank(Q).

    Two squares a·ℓ² + b·m² become a·(ℓ − s·m)(ℓ + s·m) with s² = −b/a;
    when some s is missing from the field the witness moves to the quadratic
    extension, where every element is a square.
    """
    _check_quadratic(Q)
    products, squares = _split_quadratic(Q)
    field = Q.ctx
    roots: List[Optional[FieldElement]] = []
    for (a, _), (b, _) in zip(squares[0::2], squares[1::2]):
        roots.append(sqrt(FieldElement(field, field.neg(field.mul(b, field.inv(a))))))
    if any(s is None for s in roots):
        field = extend(Q.ctx.base, 2 * Q.ctx.n)
        roots = []
        for (a, _), (b, _) in zip(squares[0::2], squares[1::2]):
            ratio = FieldElement(Q.ctx, Q.ctx.neg(Q.ctx.mul(b, Q.ctx.inv(a))))
            roots.append(sqrt(FieldElement(field, int(embed_codes(ratio.code, Q.ctx, field)))))
    pairs: List[Pair] = [(f.change_ring(field), g.change_ring(field)) for f, g in products]
    for k, s in enumerate(roots):
        (a, ell), (_, m) = squares[2 * k], squares[2 * k + 1]
        assert s is not None
        a_big = int(embed_codes(a, Q.ctx, field))
        ell, m = ell.change_ring(field), m.change_ring(field)
        pairs.append(
            (
                (ell - m.scale(s.code)).scale(a_big),
                ell + m.scale(s.code),
            )
        )
    if len(squares) % 2:
        a, ell = squares[-1]
        ell = ell.change_ring(field)
        pairs.append((ell.scale(int(embed_codes(a, Q.ctx, field))), ell))
    return Factorization(pairs, Q, field).validate()


# ---------------------------------------------------------------------------
# Witness search
# ---------------------------------------------------------------------------
class _Budget:
    def __init__(self, total: int) -> None:
        self.total = total
        self.spent = 0

    def spend(self) -> bool:
        if self.spent >= self.total:
            return False
        self.spent += 1
        return True

    @property
    def left(self) -> int:
        return self.total - self.spent


def _solve_cofactors(
    G: MultiPoly, Qs: Sequence[MultiPoly]
) -> Optional[List[MultiPoly]]:
    """P_i with Σ Q_i·P_i = G by matching coefficients, or ``None``."""
    field, N, d = G.ctx, G.nvars, G.degree
    rows_index = {e: k for k, e in enumerate(monomials(N, d, homogeneous=True))}
    columns: List[Tuple[int, Tuple[int, ...]]] = []
    for i, Q in enumerate(Qs):
        columns.extend((i, m) for m in monomials(N, d - Q.degree, homogeneous=True))
    A = [[0] * len(columns) for _ in rows_index]
    for col, (i, m) in enumerate(columns):
        for e, c in Qs[i].terms.items():
            A[rows_index[tuple(a + b for a, b in zip(e, m))]][col] = c
    rhs = [G.coefficient(e) for e in rows_index]
    x = linalg.solve(A, rhs, field)
    if x is None:
        return None
    terms: List[Dict[Tuple[int, ...], int]] = [{} for _ in Qs]
    for (i, m), value in zip(columns, x):
        if value:
            terms[i][m] = value
    return [MultiPoly(field, N, t) for t in terms]


def _factorization(G: MultiPoly, Qs: Sequence[MultiPoly], field: FieldCtx) -> Optional[Factorization]:
    target = G.change_ring(field)
    Ps = _solve_cofactors(target, Qs)
    if Ps is None:
        return None
    pairs = [(Q, P) for Q, P in zip(Qs, Ps) if not P.is_zero()]
    return Factorization(pairs, G, field).validate()


def _variable_cover(G: MultiPoly) -> Factorization:
    """Σ x_i·(G_i / x_i) over a smallest set of variables meeting every monomial."""
    support = G.variables()
    cover: Tuple[int, ...] = tuple(support)
    for size in range(1, len(support) + 1):
        found = next(
            (
                S
                for S in itertools.combinations(support, size)
                if all(any(e[i] for i in S) for e in G.terms)
            ),
            None,
        )
        if found is not None:
            cover = found
            break
    remaining = dict(G.terms)
    pairs: List[Pair] = []
    for i in cover:
        taken = {e: c for e, c in remaining.items() if e[i]}
        for e in taken:
            del remaining[e]
        quotient = {e[:i] + (e[i] - 1,) + e[i + 1 :]: c for e, c in taken.items()}
        pairs.append((MultiPoly.variable(G.ctx, G.nvars, i), MultiPoly(G.ctx, G.nvars, quotient)))
    return Factorization(pairs, G, G.ctx).validate()


def _linear_factor(
    G: MultiPoly, field: FieldCtx, budget: _Budget
) -> Optional[Factorization]:
    """ℓ·P = G with ℓ monic in its first variable, found by substitution."""
    target = G.change_ring(field)
    N = G.nvars
    support = G.variables()
    for pos, lead in enumerate(support):
        others = support[pos + 1 :]
        for values in itertools.product(range(field.size), repeat=len(others)):
            if not budget.spend():
                return None
            coeffs = [0] * N
            coeffs[lead] = 1
            for k, v in zip(others, values):
                coeffs[k] = v
            rows = [[int(i == j) for j in range(N)] for i in range(N)]
            rows[lead] = [0 if j == lead else field.neg(coeffs[j]) for j in range(N)]
            if target.linear_substitution(rows).is_zero():
                ell = MultiPoly.linear_form(field, coeffs)
                return _factorization(G, [ell], field)
    return None


def _blocks(G: MultiPoly) -> List[MultiPoly]:
    """G split into summands on pairwise disjoint sets of variables."""
    groups: List[Tuple[set, Dict[Tuple[int, ...], int]]] = []
    for e, c in G.sorted_terms():
        vars_e = {i for i, k in enumerate(e) if k}
        merged: Tuple[set, Dict[Tuple[int, ...], int]] = (set(vars_e), {e: c})
        kept = []
        for group in groups:
            if group[0] & vars_e:
                merged[0].update(group[0])
                merged[1].update(group[1])
            else:
                kept.append(group)
        groups = kept + [merged]
    groups.sort(key=lambda g: min(g[0]))
    return [MultiPoly(G.ctx, G.nvars, terms) for _, terms in groups]


def _paired_blocks(
    G: MultiPoly, fields: Sequence[FieldCtx], budget: _Budget
) -> Optional[Factorization]:
    """Greedily merge disjoint blocks whose sum has a linear factor."""
    blocks = _blocks(G)
    if len(blocks) < 2:
        return None
    used = [False] * len(blocks)
    pieces: List[Factorization] = []
    for i in range(len(blocks)):
        if used[i]:
            continue
        for j in range(i + 1, len(blocks)):
            if used[j]:
                continue
            for field in fields:
                found = _linear_factor(blocks[i] + blocks[j], field, budget)
                if found is not None:
                    pieces.append(found)
                    used[i] = used[j] = True
                    break
            if used[i]:
                break
        if not used[i]:
            single = next(
                (f for f in (_linear_factor(blocks[i], fd, budget) for fd in fields) if f),
                None,
            )
            pieces.append(single or _variable_cover(blocks[i]))
            used[i] = True
    try:
        field = extend(G.ctx.base, math.lcm(*(piece.field.n for piece in pieces)))
    except SizeOverflowError:
        return None
    pairs = [
        (Q.change_ring(field), P.change_ring(field)) for piece in pieces for Q, P in piece.pairs
    ]
    return Factorization(pairs, G, field).validate()


def _random_form(field: FieldCtx, nvars: int, degree: int, rng: np.random.Generator) -> MultiPoly:
    mons = monomials(nvars, degree, homogeneous=True)
    coeffs = rng.integers(0, field.size, size=len(mons))
    return MultiPoly(field, nvars, {e: int(c) for e, c in zip(mons, coeffs)})


def _vanishes_on_common_zeros(
    G: CompiledPoly, Qs: Sequence[MultiPoly], field: FieldCtx
) -> bool:
    """Whether G is zero on every k-point of {ℓ_1 = ... = ℓ_r = 0}.

    Necessary for G ∈ (ℓ_1, ..., ℓ_r); spans too large to list pass.
    """
    rows = [[Q.coefficient(_unit(Q.nvars, i)) for i in range(Q.nvars)] for Q in Qs]
    basis = linalg.nullspace(rows, field)
    if field.size ** len(basis) > CHUNK_SIZE:
        return True
    kernel = field.kernel
    idx = np.arange(field.size ** len(basis), dtype=np.int64)
    digits = [(idx // field.size**b) % field.size for b in range(len(basis))]
    coords = []
    for j in range(G.nvars):
        value: object = np.zeros_like(idx)
        for b, vector in enumerate(basis):
            if vector[j]:
                value = kernel.add(value, kernel.mul(digits[b], vector[j]))
        coords.append(np.asarray(value, dtype=np.int64))
    return not np.any(G(coords))


def _random_search(
    G: MultiPoly,
    below: int,
    fields: Sequence[FieldCtx],
    budget: _Budget,
    rng: np.random.Generator,
) -> Optional[Factorization]:
    """Random Q_i with P_i solved by linear algebra, r ascending.

    Linear Q_i start at r = 2 (one linear factor is searched exhaustively
    beforehand); quadratic Q_i follow when deg G ≥ 4. Each r gets half of
    what its stage has left.
    """
    stages = [(1, 2)] + ([(2, 1)] if G.degree >= 4 else [])
    compiled = {field: CompiledPoly(G, field) for field in fields}
    for k, (q_degree, first) in enumerate(stages):
        stage = _Budget(budget.left // (len(stages) - k))
        for r in range(first, below):
            allotted = _Budget(stage.left if r == below - 1 else max(1, stage.left // 2))
            while allotted.spend() and stage.spend() and budget.spend():
                field = fields[int(rng.integers(0, len(fields)))]
                Qs = [_random_form(field, G.nvars, q_degree, rng) for _ in range(r)]
                if any(Q.is_zero() for Q in Qs):
                    continue
                if q_degree == 1 and not _vanishes_on_common_zeros(compiled[field], Qs, field):
                    continue
                found = _factorization(G, Qs, field)
                if found is not None:
                    return found
    return None


def _search_fields(G: MultiPoly, extension_degree: int) -> List[FieldCtx]:
    fields: List[FieldCtx] = []
    for n in range(1, extension_degree + 1):
        try:
            candidate = extend(G.ctx.base, n)
        except SizeOverflowError:
            break
        if G.ctx.embeds_into(candidate):
            fields.append(candidate)
    return fields or [G.ctx]


def rank_upper(
    G: MultiPoly,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int = 0,
    extension_degree: int = 1,
) -> Union[Tuple[int, Factorization], NoWitnessFound]:
    """Smallest factorization found within ``search_budget`` attempts.

    Structured candidates come first (a variable cover, one linear factor,
    linear factors of pairs of variable-disjoint blocks), then a seeded
    random search below the best length found so far.
    """
    if not G.is_homogeneous():
        raise NotHomogeneousError(f"{G} is not homogeneous")
    if G.degree < 2:
        raise DegreeTooLowError(f"rank needs degree ≥ 2, got {G.degree}")
    budget = _Budget(search_budget)
    if not budget.spend():
        return NoWitnessFound(0)
    fields = _search_fields(G, extension_degree)
    best = _variable_cover(G)
    for field in fields:
        if best.length <= 1:
            break
        found = _linear_factor(G, field, budget)
        if found is not None:
            best = found
            break
    if best.length > 2:
        paired = _paired_blocks(G, fields, budget)
        if paired is not None and paired.length < best.length:
            best = paired
    if best.length > 1:
        rng = np.random.default_rng(seed)
        found = _random_search(G, best.length, fields, budget, rng)
        if found is not None and found.length < best.length:
            best = found
    logger.debug("%s: witness of length %d after %d attempts", G, best.length, budget.spent)
    return best.length, best


# ---------------------------------------------------------------------------
# Lower bound and dispatch
# ---------------------------------------------------------------------------
def rank_lower_via_sing(G: MultiPoly, report: SingularReport) -> int:
    """⌈codim(Sing X_G ⊂ P^{N-1}) / 2⌉, or 1 when the estimate is unconfident.

    The common zeros of all Q_i and P_i of an r-factorization are singular
    points of X_G and have codimension at most 2r.
    """
    if report.variety is not Variety.X or report.poly != str(G):
        raise MismatchedVarietyError(f"report is about {report.variety.value}: {report.poly}")
    ambient = report.ambient_codim
    if not report.confident or ambient is None:
        return 1
    return max(1, math.ceil(ambient / 2))


def rank_of(
    F: MultiPoly,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    seed: int = 0,
    extension_degree: int = 1,
    sing_n_max: int = DEFAULT_SING_N_MAX,
    budget: int = DEFAULT_BUDGET,
    workers: Optional[int] = None,
    sing_report: Optional[SingularReport] = None,
) -> RankInterval:
    """Rank interval of F̃; a point for quadratics in odd characteristic."""
    if F.degree < 2:
        raise DegreeTooLowError(f"rank needs degree ≥ 2, got {F.degree}")
    G = top_homogeneous(F)
    if G.degree == 2 and G.ctx.p != 2:
        r = quadratic_rank(G)
        return RankInterval(
            r, r, quadratic_witness(G), RankMethod.QUADRATIC_EXACT, RankMethod.QUADRATIC_EXACT
        )
    upper = rank_upper(G, search_budget, seed, extension_degree)
    if isinstance(upper, NoWitnessFound):
        witness = _variable_cover(G)
    else:
        witness = upper[1]
    hi = witness.length
    lo, lo_method = 1, RankMethod.DEGENERATE
    if hi > 1:
        report = sing_report or c_regularity(G, sing_n_max, budget, workers)
        bound = rank_lower_via_sing(G, report)
        if bound > 1:
            lo, lo_method = bound, RankMethod.SING_CODIM
        if lo > hi:
            # the witness is verified, so the singular estimate missed points
            logger.warning(
                "%s: singular bound %d exceeds witness %d, falling back to 1", G, lo, hi
            )
            return RankInterval(
                1, hi, witness, RankMethod.DEGENERATE, RankMethod.WITNESS_SEARCH, False
            )
    return RankInterval(lo, hi, witness, lo_method, RankMethod.WITNESS_SEARCH)


def sandwich_check(F: MultiPoly, t: FieldElement) -> SandwichReport:
    """R(F) ≤ R(F̂_t) ≤ R(F) + 1 for a quadratic F."""
    rank = quadratic_rank(top_homogeneous(F))
    rank_hat = quadratic_rank(homogenize(F, t).poly)
    holds = rank <= rank_hat <= rank + 1
    if not holds:
        raise SandwichViolationError(f"{F}, t={t}: R(F)={rank}, R(F̂_t)={rank_hat}")
    return SandwichReport(str(F), str(t), rank, rank_hat, holds)
