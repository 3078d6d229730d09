"""Sparse multivariate polynomials over a :class:`~src.finite_field.FieldCtx`.

A :class:`MultiPoly` maps exponent vectors to nonzero coefficient codes. The
canonical term order is graded lexicographic, highest term first; it fixes
printing, so ``parse(str(P)) == P`` for every polynomial.

Grammar accepted by :func:`parse`::

    poly   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' nat)?
    atom   := nat | 'x' nat | 'z' | 'g' | 'y'

``g`` is the generator of F_q (m > 1), ``y`` the generator of k_n over F_q
(n > 1), ``z`` the last variable, naturals reduce mod p.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    CoefficientNotInFieldError,
    DimensionMismatchError,
    MixedFieldsError,
    PolynomialSyntaxError,
    UnknownVariableError,
    ZeroPolynomialError,
)
from src.finite_field import FieldCtx, FieldElement, embed_codes
from src.types import Exponent, Terms

__all__ = [
    "MultiPoly",
    "HomogenizationResult",
    "CompiledPoly",
    "parse",
    "evaluate",
    "top_homogeneous",
    "homogenize",
    "partials",
    "random_poly",
    "monomials",
    "compile_poly",
]


def _grlex_key(e: Exponent) -> Tuple[int, Exponent]:
    return (sum(e), e)


class MultiPoly:
    """Immutable sparse polynomial in ``nvars`` variables over ``ctx``."""

    __slots__ = ("ctx", "nvars", "_terms", "degree")

    def __init__(self, ctx: FieldCtx, nvars: int, terms: Mapping[Exponent, int]) -> None:
        clean: Terms = {}
        for e, c in terms.items():
            if len(e) != nvars:
                raise DimensionMismatchError(
                    f"exponent {e} does not have {nvars} entries"
                )
            if c:
                clean[tuple(e)] = int(c)
        self.ctx = ctx
        self.nvars = nvars
        self._terms = clean
        # -1 marks the zero polynomial
        self.degree = max((sum(e) for e in clean), default=-1)

    # construction -----------------------------------------------------------
    @classmethod
    def zero(cls, ctx: FieldCtx, nvars: int) -> "MultiPoly":
        return cls(ctx, nvars, {})

    @classmethod
    def constant(cls, ctx: FieldCtx, nvars: int, code: int) -> "MultiPoly":
        return cls(ctx, nvars, {(0,) * nvars: code})

    @classmethod
    def variable(cls, ctx: FieldCtx, nvars: int, index: int, code: int = 1) -> "MultiPoly":
        e = [0] * nvars
        e[index] = 1
        return cls(ctx, nvars, {tuple(e): code})

    @classmethod
    def linear_form(cls, ctx: FieldCtx, coeffs: Sequence[int]) -> "MultiPoly":
        nvars = len(coeffs)
        return cls(
            ctx,
            nvars,
            {tuple(int(i == j) for j in range(nvars)): c for i, c in enumerate(coeffs)},
        )

    # inspection -------------------------------------------------------------
    @property
    def terms(self) -> Mapping[Exponent, int]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def sorted_terms(self) -> List[Tuple[Exponent, int]]:
        return sorted(self._terms.items(), key=lambda item: _grlex_key(item[0]), reverse=True)

    def coefficient(self, e: Exponent) -> int:
        return self._terms.get(tuple(e), 0)

    def variables(self) -> List[int]:
        return sorted({i for e in self._terms for i, k in enumerate(e) if k})

    # arithmetic -------------------------------------------------------------
    def _same(self, other: "MultiPoly") -> None:
        if other.ctx != self.ctx:
            raise MixedFieldsError(f"{self.ctx.spec} vs {other.ctx.spec}")
        if other.nvars != self.nvars:
            raise DimensionMismatchError(f"{self.nvars} vs {other.nvars} variables")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._same(other)
        out = dict(self._terms)
        for e, c in other._terms.items():
            out[e] = self.ctx.add(out.get(e, 0), c)
        return MultiPoly(self.ctx, self.nvars, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(
            self.ctx, self.nvars, {e: self.ctx.neg(c) for e, c in self._terms.items()}
        )

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other: Any) -> "MultiPoly":
        if isinstance(other, FieldElement):
            if other.ctx != self.ctx:
                raise MixedFieldsError(f"{self.ctx.spec} vs {other.ctx.spec}")
            return self.scale(other.code)
        self._same(other)
        out: Terms = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = self.ctx.add(out.get(e, 0), self.ctx.mul(c1, c2))
        return MultiPoly(self.ctx, self.nvars, out)

    def __pow__(self, k: int) -> "MultiPoly":
        result = MultiPoly.constant(self.ctx, self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, code: int) -> "MultiPoly":
        return MultiPoly(
            self.ctx, self.nvars, {e: self.ctx.mul(c, code) for e, c in self._terms.items()}
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return (self.ctx, self.nvars, self._terms) == (other.ctx, other.nvars, other._terms)

    def __hash__(self) -> int:
        return hash((self.ctx, self.nvars, frozenset(self._terms.items())))

    # transformations --------------------------------------------------------
    def change_ring(self, target: FieldCtx) -> "MultiPoly":
        """Coefficients pushed along the embedding of ``ctx`` into ``target``."""
        if target == self.ctx:
            return self
        return MultiPoly(
            target,
            self.nvars,
            {e: int(embed_codes(c, self.ctx, target)) for e, c in self._terms.items()},
        )

    def specialize(self, index: int, code: int, drop: bool = True) -> "MultiPoly":
        """Fix variable ``index`` to the constant ``code``; optionally drop it."""
        out: Terms = {}
        for e, c in self._terms.items():
            value = self.ctx.mul(c, self.ctx.pow(code, e[index]))
            if drop:
                key = e[:index] + e[index + 1 :]
            else:
                key = e[:index] + (0,) + e[index + 1 :]
            out[key] = self.ctx.add(out.get(key, 0), value)
        return MultiPoly(self.ctx, self.nvars - 1 if drop else self.nvars, out)

    def linear_substitution(self, rows: Sequence[Sequence[int]]) -> "MultiPoly":
        """Substitute x_i ↦ sum_j rows[i][j] x_j."""
        if len(rows) != self.nvars:
            raise DimensionMismatchError(f"need {self.nvars} rows, got {len(rows)}")
        width = len(rows[0]) if rows else 0
        images = [MultiPoly.linear_form(self.ctx, row) for row in rows]
        powers: Dict[Tuple[int, int], MultiPoly] = {}
        result = MultiPoly.zero(self.ctx, width)
        for e, c in self._terms.items():
            term = MultiPoly.constant(self.ctx, width, c)
            for i, k in enumerate(e):
                if k:
                    if (i, k) not in powers:
                        powers[(i, k)] = images[i] ** k
                    term = term * powers[(i, k)]
            result = result + term
        return result

    def homogeneous_part(self, degree: int) -> "MultiPoly":
        return MultiPoly(
            self.ctx, self.nvars, {e: c for e, c in self._terms.items() if sum(e) == degree}
        )

    # printing ---------------------------------------------------------------
    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces: List[str] = []
        for e, c in self.sorted_terms():
            mono = [f"x{i}" if k == 1 else f"x{i}^{k}" for i, k in enumerate(e) if k]
            for a, i, j in self.ctx.atoms(c):
                factors: List[str] = []
                if a != 1 or (i == 0 and j == 0 and not mono):
                    factors.append(str(a))
                if i:
                    factors.append("g" if i == 1 else f"g^{i}")
                if j:
                    factors.append("y" if j == 1 else f"y^{j}")
                pieces.append("*".join(factors + mono))
        return " + ".join(pieces)

    def __repr__(self) -> str:
        return f"MultiPoly({self.ctx.spec}, nvars={self.nvars}, {self})"


@dataclass(frozen=True)
class HomogenizationResult:
    """F̂_t in nvars + 1 variables, the last one being z."""

    poly: MultiPoly
    shift: FieldElement


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------
_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>x\d+|[gyz])|(?P<op>[-+*^]))")


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens: List[Tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if not match:
            raise PolynomialSyntaxError("unexpected character", text, pos)
        kind = match.lastgroup or ""
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str, ctx: FieldCtx, nvars: int) -> None:
        self.text = text
        self.ctx = ctx
        self.nvars = nvars
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _fail(self, message: str) -> None:
        tok = self._peek()
        pos = tok[2] if tok else len(self.text)
        raise PolynomialSyntaxError(message, self.text, pos)

    def parse(self) -> MultiPoly:
        terms: Terms = {}
        sign = "+"
        tok = self._peek()
        if tok and tok[0] == "op" and tok[1] in "+-":
            sign = tok[1]
            self.i += 1
        while True:
            code, e = self._term()
            if sign == "-":
                code = self.ctx.neg(code)
            terms[e] = self.ctx.add(terms.get(e, 0), code)
            tok = self._peek()
            if tok is None:
                break
            if tok[0] == "op" and tok[1] in "+-":
                sign = tok[1]
                self.i += 1
                continue
            self._fail("expected '+' or '-'")
        return MultiPoly(self.ctx, self.nvars, terms)

    def _term(self) -> Tuple[int, Exponent]:
        code, e = self._factor()
        exps = list(e)
        while True:
            tok = self._peek()
            if not (tok and tok[0] == "op" and tok[1] == "*"):
                break
            self.i += 1
            c2, e2 = self._factor()
            code = self.ctx.mul(code, c2)
            exps = [a + b for a, b in zip(exps, e2)]
        return code, tuple(exps)

    def _factor(self) -> Tuple[int, Exponent]:
        tok = self._peek()
        if tok is None or tok[0] == "op":
            self._fail("expected a number or a variable")
        assert tok is not None
        kind, value, pos = tok
        self.i += 1
        exponent = 1
        nxt = self._peek()
        if nxt and nxt[0] == "op" and nxt[1] == "^":
            self.i += 1
            power = self._peek()
            if power is None or power[0] != "num":
                self._fail("expected a natural exponent")
            assert power is not None
            exponent = int(power[1])
            self.i += 1
        zero = (0,) * self.nvars
        if kind == "num":
            return self.ctx.pow(self.ctx.from_int(int(value)), exponent), zero
        if value == "g":
            if self.ctx.m == 1:
                raise CoefficientNotInFieldError("'g' needs m > 1", self.text, pos)
            return self.ctx.pow(self.ctx.p, exponent), zero
        if value == "y":
            if self.ctx.n == 1:
                raise CoefficientNotInFieldError("'y' needs n > 1", self.text, pos)
            return self.ctx.pow(self.ctx.q, exponent), zero
        index = self.nvars - 1 if value == "z" else int(value[1:])
        if not 0 <= index < self.nvars:
            raise UnknownVariableError(f"unknown variable {value}", self.text, pos)
        e = [0] * self.nvars
        e[index] = exponent
        return 1, tuple(e)


def parse(text: str, ctx: FieldCtx, nvars: int) -> MultiPoly:
    """Parse ``text`` into canonical form; errors carry the offending position."""
    return _Parser(text, ctx, nvars).parse()


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------
def evaluate(P: MultiPoly, point: Sequence[FieldElement]) -> FieldElement:
    """Value of ``P`` at ``point``; coefficients are embedded into its field first."""
    if len(point) != P.nvars:
        raise DimensionMismatchError(f"point of length {len(point)} for {P.nvars} variables")
    field = point[0].ctx if point else P.ctx
    if any(x.ctx != field for x in point):
        raise MixedFieldsError("point coordinates live in different fields")
    if not P.ctx.embeds_into(field):
        raise MixedFieldsError(f"{P.ctx.spec} does not embed into {field.spec}")
    Q = P.change_ring(field)
    total = 0
    for e, c in Q.terms.items():
        value = c
        for x, k in zip(point, e):
            if k:
                value = field.mul(value, field.pow(x.code, k))
        total = field.add(total, value)
    return FieldElement(field, total)


def top_homogeneous(P: MultiPoly) -> MultiPoly:
    """F̃: the terms of total degree exactly deg(P)."""
    if P.is_zero():
        raise ZeroPolynomialError("the zero polynomial has no top homogeneous part")
    return P.homogeneous_part(P.degree)


def _common_field(a: FieldCtx, b: FieldCtx) -> FieldCtx:
    if a.embeds_into(b):
        return b
    if b.embeds_into(a):
        return a
    raise MixedFieldsError(f"{a.spec} and {b.spec} have no common field here")


def homogenize(P: MultiPoly, t: FieldElement) -> HomogenizationResult:
    """Homogenization of P − t; z = 0 gives F̃, z = 1 gives P − t."""
    if P.is_zero():
        raise ZeroPolynomialError("cannot homogenize the zero polynomial")
    field = _common_field(P.ctx, t.ctx)
    Q = P.change_ring(field)
    shift = FieldElement(field, int(embed_codes(t.code, t.ctx, field)))
    d = Q.degree
    shifted = dict(Q.terms)
    zero = (0,) * Q.nvars
    shifted[zero] = field.sub(shifted.get(zero, 0), shift.code)
    terms = {e + (d - sum(e),): c for e, c in shifted.items()}
    return HomogenizationResult(MultiPoly(field, Q.nvars + 1, terms), shift)


def partials(P: MultiPoly) -> List[MultiPoly]:
    """Formal partial derivatives; exponents divisible by p annihilate."""
    out: List[MultiPoly] = []
    for i in range(P.nvars):
        terms: Terms = {}
        for e, c in P.terms.items():
            k = e[i]
            if k % P.ctx.p == 0:
                continue
            e2 = e[:i] + (k - 1,) + e[i + 1 :]
            terms[e2] = P.ctx.mul(c, P.ctx.from_int(k))
        out.append(MultiPoly(P.ctx, P.nvars, terms))
    return out


def monomials(nvars: int, d: int, homogeneous: bool = False) -> List[Exponent]:
    """Exponent vectors of degree d (or ≤ d), ascending degree, then lex."""
    out: List[Exponent] = []
    degrees: Iterable[int] = (d,) if homogeneous else range(d + 1)
    for deg in degrees:
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def random_poly(
    ctx: FieldCtx, nvars: int, d: int, homogeneous: bool = False, seed: int = 0
) -> MultiPoly:
    """Independent uniform coefficients on every monomial; deterministic per seed."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    rng = np.random.default_rng(seed)
    mons = monomials(nvars, d, homogeneous)
    coeffs = rng.integers(0, ctx.size, size=len(mons))
    return MultiPoly(ctx, nvars, {e: int(c) for e, c in zip(mons, coeffs)})


# ---------------------------------------------------------------------------
# Vectorized evaluation
# ---------------------------------------------------------------------------
class CompiledPoly:
    """Straight-line evaluator over arrays of element codes.

    Monomials are built variable by variable and every prefix product is
    cached, so terms sharing leading factors share the work.
    """

    def __init__(self, P: MultiPoly, field: FieldCtx) -> None:
        if not P.ctx.embeds_into(field):
            raise MixedFieldsError(f"{P.ctx.spec} does not embed into {field.spec}")
        self.field = field
        self.nvars = P.nvars
        self.terms = P.change_ring(field).sorted_terms()

    def __call__(self, coords: Sequence[np.ndarray]) -> np.ndarray:
        kernel = self.field.kernel
        shape = coords[0].shape if coords else (1,)
        powers: Dict[Tuple[int, int], Any] = {}
        prefixes: Dict[Exponent, Any] = {}

        def var_power(i: int, k: int) -> Any:
            if (i, k) not in powers:
                powers[(i, k)] = coords[i] if k == 1 else kernel.mul(var_power(i, k - 1), coords[i])
            return powers[(i, k)]

        def monomial(e: Exponent) -> Any:
            last = max((i for i, k in enumerate(e) if k), default=-1)
            if last < 0:
                return None
            if e in prefixes:
                return prefixes[e]
            head = e[:last] + (0,) * (len(e) - last)
            rest = monomial(head)
            factor = var_power(last, e[last])
            value = factor if rest is None else kernel.mul(rest, factor)
            prefixes[e] = value
            return value

        total: Any = np.zeros(shape, dtype=np.int64)
        for e, c in self.terms:
            mono = monomial(e)
            if mono is None:
                value = np.full(shape, c, dtype=np.int64)
            elif c == 1:
                value = mono
            else:
                value = kernel.mul(mono, c)
            total = kernel.add(total, value)
        return np.asarray(total, dtype=np.int64)


def compile_poly(P: MultiPoly, field: FieldCtx) -> CompiledPoly:
    return CompiledPoly(P, field)
