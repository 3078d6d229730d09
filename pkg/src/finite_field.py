"""Exact arithmetic in F_p, F_q = F_{p^m} and the extensions k_n = F_{q^n}.

An element is an integer *code*: the coefficient vector of its polynomial
representative read as a positional number, constant term least significant.
F_q = F_p[g]/(f) uses base-p digits, k_n = F_q[y]/(h) uses base-q digits whose
digits are themselves F_q codes. The embedded copy of F_q in k_n is therefore
the set of codes below q, and code order is the enumeration order.

Arithmetic is done by small "kernels" whose operations accept either Python
ints or numpy integer arrays, so the same code serves scalar work (parsing,
linear algebra) and the vectorized census sweeps.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from typing import Any, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import isprime, primefactors

from src.config import MAX_FIELD_SIZE, TABLE_LIMIT
from src.errors import (
    DivisionByZeroError,
    FieldSpecError,
    MixedFieldsError,
    NotPrimeError,
    SizeOverflowError,
)
from src.logger import get_logger

logger = get_logger(__name__)

__all__ = [
    "FieldCtx",
    "FieldElement",
    "make_field",
    "extend",
    "add",
    "sub",
    "mul",
    "inv",
    "power",
    "frobenius",
    "sqrt",
    "embed",
    "embed_codes",
    "enumerate_elements",
    "parse_field_spec",
    "format_modulus",
    "is_irreducible",
]


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------
class _PrimeKernel:
    """Arithmetic mod p."""

    def __init__(self, p: int) -> None:
        self.p = p
        self.size = p

    def add(self, a: Any, b: Any) -> Any:
        return (a + b) % self.p

    def sub(self, a: Any, b: Any) -> Any:
        return (a - b) % self.p

    def neg(self, a: Any) -> Any:
        return (-a) % self.p

    def mul(self, a: Any, b: Any) -> Any:
        return (a * b) % self.p


class _ExtensionKernel:
    """Arithmetic in ground[y]/(modulus) on positional codes.

    ``modulus`` is monic, coefficients ascending, given as ground codes.
    """

    def __init__(self, ground: Any, modulus: Sequence[int]) -> None:
        self.ground = ground
        self.k = len(modulus) - 1
        self.size = ground.size**self.k
        self.tail = tuple(modulus[:-1])
        self._weights = [ground.size**i for i in range(self.k)]

    def _split(self, a: Any) -> List[Any]:
        g = self.ground.size
        return [(a // w) % g for w in self._weights]

    def _join(self, digits: Sequence[Any]) -> Any:
        total: Any = 0
        for d, w in zip(digits, self._weights):
            total = total + d * w
        return total

    def add(self, a: Any, b: Any) -> Any:
        g = self.ground
        return self._join([g.add(x, y) for x, y in zip(self._split(a), self._split(b))])

    def sub(self, a: Any, b: Any) -> Any:
        g = self.ground
        return self._join([g.sub(x, y) for x, y in zip(self._split(a), self._split(b))])

    def neg(self, a: Any) -> Any:
        return self._join([self.ground.neg(x) for x in self._split(a)])

    def mul(self, a: Any, b: Any) -> Any:
        g = self.ground
        k = self.k
        da, db = self._split(a), self._split(b)
        prod: List[Any] = [0] * (2 * k - 1)
        for i, x in enumerate(da):
            for j, y in enumerate(db):
                prod[i + j] = g.add(prod[i + j], g.mul(x, y))
        # y^k = -tail, applied from the top degree down
        for s in range(2 * k - 2, k - 1, -1):
            lead = prod[s]
            for j, f in enumerate(self.tail):
                if f:
                    prod[s - k + j] = g.sub(prod[s - k + j], g.mul(lead, f))
        return self._join(prod[:k])


class _TableKernel:
    """Lookup tables built once from a slower kernel."""

    def __init__(self, inner: Any) -> None:
        self.size = inner.size
        codes = np.arange(self.size, dtype=np.int64)
        rows, cols = codes[:, None], codes[None, :]
        self._add = np.asarray(inner.add(rows, cols), dtype=np.int64)
        self._mul = np.asarray(inner.mul(rows, cols), dtype=np.int64)
        self._neg = np.asarray(inner.neg(codes), dtype=np.int64)

    def add(self, a: Any, b: Any) -> Any:
        return self._add[a, b]

    def sub(self, a: Any, b: Any) -> Any:
        return self._add[a, self._neg[b]]

    def neg(self, a: Any) -> Any:
        return self._neg[a]

    def mul(self, a: Any, b: Any) -> Any:
        return self._mul[a, b]


def _maybe_table(kernel: Any) -> Any:
    if kernel.size <= TABLE_LIMIT:
        return _TableKernel(kernel)
    return kernel


@functools.lru_cache(maxsize=None)
def _kernel_for(ctx: "FieldCtx") -> Any:
    if ctx.n > 1:
        return _maybe_table(_ExtensionKernel(_kernel_for(ctx.base), ctx.ext_modulus))
    kernel: Any = _PrimeKernel(ctx.p)
    if ctx.m > 1:
        kernel = _maybe_table(_ExtensionKernel(kernel, ctx.base_modulus))
    return kernel


# ---------------------------------------------------------------------------
# Field context and elements
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class FieldCtx:
    """The field k_n = F_q[y]/(h) over F_q = F_p[g]/(f).

    ``base_modulus`` is f (ascending F_p coefficients, monic, degree m) and is
    ``None`` for m = 1; ``ext_modulus`` is h (ascending F_q codes, monic,
    degree n) and is ``None`` for n = 1. Instances are immutable and cheap to
    pickle; arithmetic tables are rebuilt lazily in each process.
    """

    p: int
    m: int = 1
    n: int = 1
    base_modulus: Optional[Tuple[int, ...]] = None
    ext_modulus: Optional[Tuple[int, ...]] = None

    @property
    def q(self) -> int:
        return self.p**self.m

    @property
    def size(self) -> int:
        return self.q**self.n

    @property
    def base(self) -> "FieldCtx":
        """The ground field F_q (itself when n = 1)."""
        if self.n == 1:
            return self
        return FieldCtx(self.p, self.m, 1, self.base_modulus, None)

    @property
    def prime_field(self) -> "FieldCtx":
        return FieldCtx(self.p)

    @property
    def kernel(self) -> Any:
        return _kernel_for(self)

    @property
    def spec(self) -> str:
        """Text form ``p^m:n`` used by the CLI and in reports."""
        return f"{self.p}^{self.m}:{self.n}"

    def __str__(self) -> str:
        return self.spec

    # elements ---------------------------------------------------------------
    def __call__(self, code: int) -> "FieldElement":
        return FieldElement(self, int(code))

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    @property
    def gen(self) -> "FieldElement":
        """y for k_n with n > 1, g for F_q with m > 1."""
        if self.n > 1:
            return FieldElement(self, self.q)
        if self.m > 1:
            return FieldElement(self, self.p)
        raise FieldSpecError(f"prime field {self.spec} has no generator")

    def element(self, value: int) -> "FieldElement":
        """The image of the integer ``value`` in the field."""
        return FieldElement(self, value % self.p)

    def from_int(self, value: int) -> int:
        return value % self.p

    # code arithmetic --------------------------------------------------------
    def add(self, a: int, b: int) -> int:
        return int(self.kernel.add(a, b))

    def sub(self, a: int, b: int) -> int:
        return int(self.kernel.sub(a, b))

    def neg(self, a: int) -> int:
        return int(self.kernel.neg(a))

    def mul(self, a: int, b: int) -> int:
        return int(self.kernel.mul(a, b))

    def pow(self, a: int, e: int) -> int:
        """Square-and-multiply; negative exponents go through the inverse."""
        if e < 0:
            return self.pow(self.inv(a), -e)
        result, base = 1, a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZeroError(f"zero has no inverse in {self.spec}")
        return self.pow(a, self.size - 2)

    # embedding --------------------------------------------------------------
    def embeds_into(self, other: "FieldCtx") -> bool:
        if self == other:
            return True
        same_tower = (self.p, self.m, self.base_modulus) == (
            other.p,
            other.m,
            other.base_modulus,
        )
        return same_tower and other.n % self.n == 0

    # printing ---------------------------------------------------------------
    def atoms(self, code: int) -> List[Tuple[int, int, int]]:
        """Nonzero (a, i, j) with code = sum a g^i y^j, highest term first."""
        out: List[Tuple[int, int, int]] = []
        for j in range(self.n - 1, -1, -1):
            digit = (code // self.q**j) % self.q
            for i in range(self.m - 1, -1, -1):
                a = (digit // self.p**i) % self.p
                if a:
                    out.append((a, i, j))
        return out

    def format(self, code: int) -> str:
        atoms = self.atoms(code)
        if not atoms:
            return "0"
        return "+".join(_atom_text(a, i, j) for a, i, j in atoms)


def _atom_text(a: int, i: int, j: int) -> str:
    factors: List[str] = []
    if a != 1 or (i == 0 and j == 0):
        factors.append(str(a))
    if i:
        factors.append("g" if i == 1 else f"g^{i}")
    if j:
        factors.append("y" if j == 1 else f"y^{j}")
    return "*".join(factors)


@dataclass(frozen=True, eq=False)
class FieldElement:
    """A value of a finite field; equality across fields is an error."""

    ctx: FieldCtx
    code: int

    def __post_init__(self) -> None:
        if not 0 <= self.code < self.ctx.size:
            raise ValueError(f"code {self.code} outside {self.ctx.spec}")

    def _other(self, other: "FieldElement") -> int:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected a field element, got {type(other).__name__}")
        if other.ctx != self.ctx:
            raise MixedFieldsError(f"{self.ctx.spec} vs {other.ctx.spec}")
        return other.code

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.code == self._other(other)

    def __hash__(self) -> int:
        return hash((self.ctx, self.code))

    def __bool__(self) -> bool:
        return self.code != 0

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.add(self.code, self._other(other)))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.sub(self.code, self._other(other)))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.mul(self.code, self._other(other)))

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return self * other.inverse()

    def __neg__(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.neg(self.code))

    def __pow__(self, e: int) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.pow(self.code, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.ctx, self.ctx.inv(self.code))

    def frobenius(self) -> "FieldElement":
        return self ** self.ctx.q

    def __str__(self) -> str:
        return self.ctx.format(self.code)

    def __repr__(self) -> str:
        return f"FieldElement({self.ctx.spec}, {self})"


# ---------------------------------------------------------------------------
# Operations on elements
# ---------------------------------------------------------------------------
def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, e: int) -> FieldElement:
    return a**e


def frobenius(a: FieldElement) -> FieldElement:
    """x ↦ x^q; fixes exactly the embedded copy of F_q."""
    return a.frobenius()


def sqrt(a: FieldElement) -> Optional[FieldElement]:
    """A square root of ``a`` or ``None`` when ``a`` is a non-square.

    Tonelli–Shanks with the least non-residue for odd order; in even order
    every element is a square and a^(size/2) is its root.
    """
    ctx = a.ctx
    size = ctx.size
    if not a:
        return a
    if size % 2 == 0:
        return a ** (size // 2)
    if a ** ((size - 1) // 2) != ctx.one:
        return None
    odd, s = size - 1, 0
    while odd % 2 == 0:
        odd //= 2
        s += 1
    z = next(x for x in enumerate_elements(ctx, 2) if x ** ((size - 1) // 2) != ctx.one)
    c, t, root = z**odd, a**odd, a ** ((odd + 1) // 2)
    while t != ctx.one:
        i, u = 0, t
        while u != ctx.one:
            u = u * u
            i += 1
        b = c ** (2 ** (s - i - 1))
        s, c = i, b * b
        t, root = t * c, root * b
    return root


def enumerate_elements(ctx: FieldCtx, offset: int = 0) -> Iterator[FieldElement]:
    """All elements in code order, starting at position ``offset``."""
    for code in range(offset, ctx.size):
        yield FieldElement(ctx, code)


# ---------------------------------------------------------------------------
# Univariate polynomials over a field (coefficient lists, ascending)
# ---------------------------------------------------------------------------
def _trim(a: List[int]) -> List[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_sub(a: Sequence[int], b: Sequence[int], F: FieldCtx) -> List[int]:
    size = max(len(a), len(b))
    a = list(a) + [0] * (size - len(a))
    b = list(b) + [0] * (size - len(b))
    return _trim([F.sub(x, y) for x, y in zip(a, b)])


def _poly_mod(a: Sequence[int], f: Sequence[int], F: FieldCtx) -> List[int]:
    a = _trim(list(a))
    lead_inv = F.inv(f[-1])
    k = len(f) - 1
    while len(a) > k:
        factor = F.mul(a[-1], lead_inv)
        shift = len(a) - 1 - k
        for j, c in enumerate(f):
            a[shift + j] = F.sub(a[shift + j], F.mul(factor, c))
        _trim(a)
    return a


def _poly_mulmod(a: Sequence[int], b: Sequence[int], f: Sequence[int], F: FieldCtx) -> List[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            prod[i + j] = F.add(prod[i + j], F.mul(x, y))
    return _poly_mod(prod, f, F)


def _poly_powmod(a: Sequence[int], e: int, f: Sequence[int], F: FieldCtx) -> List[int]:
    result: List[int] = [1]
    base = _poly_mod(a, f, F)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, f, F)
        base = _poly_mulmod(base, base, f, F)
        e >>= 1
    return result


def _poly_gcd(a: Sequence[int], b: Sequence[int], F: FieldCtx) -> List[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, F)
    return a


def is_irreducible(f: Sequence[int], F: FieldCtx) -> bool:
    """Rabin's test for a monic ``f`` (ascending coefficients) over ``F``."""
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = _poly_mod([0, 1], f, F)
    frob = [x]
    for _ in range(n):
        frob.append(_poly_powmod(frob[-1], F.size, f, F))
    if _poly_sub(frob[n], x, F):
        return False
    for r in primefactors(n):
        g = _poly_gcd(_poly_sub(frob[n // r], x, F), f, F)
        if len(g) > 1:
            return False
    return True


@functools.lru_cache(maxsize=None)
def _least_irreducible(F: FieldCtx, degree: int) -> Tuple[int, ...]:
    """Least monic irreducible of ``degree``, ordering by the code of its tail."""
    for code in range(F.size**degree):
        tail = [(code // F.size**i) % F.size for i in range(degree)]
        if degree > 1 and tail[0] == 0:
            continue
        candidate = tail + [1]
        if is_irreducible(candidate, F):
            logger.debug("modulus of degree %d over %s: %s", degree, F.spec, candidate)
            return tuple(candidate)
    raise AssertionError(f"no irreducible of degree {degree} over {F.spec}")


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------
def make_field(p: int, m: int = 1, max_size: int = MAX_FIELD_SIZE) -> FieldCtx:
    """F_q for q = p^m with the least monic irreducible modulus of degree m."""
    if m < 1:
        raise FieldSpecError(f"extension degree must be positive, got {m}")
    if not isprime(p):
        raise NotPrimeError(p)
    if p**m > max_size:
        raise SizeOverflowError(p**m, max_size)
    if m == 1:
        return FieldCtx(p)
    return FieldCtx(p, m, 1, _least_irreducible(FieldCtx(p), m), None)


def extend(ctx: FieldCtx, n: int, max_size: int = MAX_FIELD_SIZE) -> FieldCtx:
    """k_n over the base field ``ctx`` (n = 1 returns ``ctx`` itself)."""
    if ctx.n != 1:
        raise FieldSpecError(f"extend expects a base field, got {ctx.spec}")
    if n < 1:
        raise FieldSpecError(f"extension degree must be positive, got {n}")
    if ctx.q**n > max_size:
        raise SizeOverflowError(ctx.q**n, max_size)
    if n == 1:
        return ctx
    return FieldCtx(ctx.p, ctx.m, n, ctx.base_modulus, _least_irreducible(ctx, n))


# ---------------------------------------------------------------------------
# Embeddings k_e ⊂ k_n
# ---------------------------------------------------------------------------
@functools.lru_cache(maxsize=None)
def _embedding_table(small: FieldCtx, large: FieldCtx) -> np.ndarray:
    kernel = large.kernel
    codes = np.arange(large.size, dtype=np.int64)
    value = np.ones_like(codes)
    # Horner on the monic modulus of the small field, coefficients in F_q
    for c in reversed(small.ext_modulus[:-1]):
        value = kernel.add(kernel.mul(value, codes), c)
    roots = np.flatnonzero(np.asarray(value) == 0)
    beta = int(roots[0])
    powers = [1]
    for _ in range(small.n - 1):
        powers.append(large.mul(powers[-1], beta))
    small_codes = np.arange(small.size, dtype=np.int64)
    image: Any = np.zeros_like(small_codes)
    for j, weight in enumerate(powers):
        digit = (small_codes // small.q**j) % small.q
        image = kernel.add(image, kernel.mul(digit, weight))
    return np.asarray(image, dtype=np.int64)


def embed_codes(codes: Any, small: FieldCtx, large: FieldCtx) -> Any:
    """Map codes of ``small`` into ``large`` (identity on F_q codes)."""
    if not small.embeds_into(large):
        raise MixedFieldsError(f"{small.spec} does not embed into {large.spec}")
    if small == large or small.n == 1:
        return codes
    return _embedding_table(small, large)[codes]


def embed(a: FieldElement, target: FieldCtx) -> FieldElement:
    return FieldElement(target, int(embed_codes(a.code, a.ctx, target)))


# ---------------------------------------------------------------------------
# Text forms
# ---------------------------------------------------------------------------
_FIELD_SPEC = re.compile(r"^\s*(\d+)\s*(?:\^\s*(\d+))?\s*(?::\s*(\d+))?\s*$")


def parse_field_spec(text: str, max_size: int = MAX_FIELD_SIZE) -> FieldCtx:
    """Parse ``p^m[:n]`` into k_n (the base field when ``:n`` is absent)."""
    match = _FIELD_SPEC.match(text)
    if not match:
        raise FieldSpecError(f"field spec must look like p^m or p^m:n, got {text!r}")
    p = int(match.group(1))
    m = int(match.group(2) or 1)
    n = int(match.group(3) or 1)
    return extend(make_field(p, m, max_size), n, max_size)


def format_modulus(ctx: FieldCtx) -> str:
    """Moduli in ascending-degree term order, e.g. ``1 + y + y^2``."""
    parts: List[str] = []
    for name, modulus, ground in (
        ("base", ctx.base_modulus, ctx.prime_field),
        ("ext", ctx.ext_modulus, ctx.base),
    ):
        if modulus is None:
            continue
        terms = []
        for deg, c in enumerate(modulus):
            if not c:
                continue
            coeff = ground.format(c)
            if len(ground.atoms(c)) > 1:
                coeff = f"({coeff})"
            if deg == 0:
                terms.append(coeff)
            else:
                mono = "y" if deg == 1 else f"y^{deg}"
                terms.append(mono if coeff == "1" else f"{coeff}*{mono}")
        parts.append(f"{name}: " + " + ".join(terms))
    return "; ".join(parts) if parts else "prime field"
