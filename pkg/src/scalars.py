"""Commutative semirings used as scalars of the matrix models."""

import random
from abc import ABC, abstractmethod
from fractions import Fraction
from itertools import product
from typing import Any, NamedTuple

from src.errors import AlgebraError, ConjUnavailable, NotASemilattice


class ScalarAlgebra(ABC):
    """Carrier with add/mul/zero/one and an optional involution."""

    name: str = "abstract"
    has_conj: bool = False
    is_field: bool = False
    exact: bool = True
    additive: bool = True

    @property
    @abstractmethod
    def zero(self) -> Any: ...

    @property
    @abstractmethod
    def one(self) -> Any: ...

    @abstractmethod
    def add(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def mul(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def parse(self, raw: Any) -> Any:
        """Read an element from its JSON form."""

    @abstractmethod
    def to_json(self, a: Any) -> Any: ...

    @abstractmethod
    def sample(self, rng: random.Random) -> Any: ...

    def eq(self, a: Any, b: Any) -> bool:
        return a == b

    def conj(self, a: Any) -> Any:
        raise ConjUnavailable(f"The {self.name} scalars have no involution")

    def neg(self, a: Any) -> Any:
        raise AlgebraError(f"The {self.name} scalars have no negation")

    def inv(self, a: Any) -> Any:
        raise AlgebraError(f"The {self.name} scalars have no division")

    def from_int(self, n: int) -> Any:
        """The image of n under the unique semiring map from the naturals."""
        total = self.zero
        for _ in range(n):
            total = self.add(total, self.one)
        return total

    def is_zero(self, a: Any) -> bool:
        return self.eq(a, self.zero)

    def elements(self) -> list[Any] | None:
        """All elements when the carrier is finite, otherwise None."""
        return None

    def render(self, a: Any) -> str:
        return str(self.to_json(a))

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self) -> int:
        return hash((type(self), self.name))

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class BooleanAlgebra(ScalarAlgebra):
    """The scalars of Rel: there are just two."""

    name = "bool"
    has_conj = True

    @property
    def zero(self) -> bool:
        return False

    @property
    def one(self) -> bool:
        return True

    def add(self, a: bool, b: bool) -> bool:
        return a or b

    def mul(self, a: bool, b: bool) -> bool:
        return a and b

    def conj(self, a: bool) -> bool:
        return a

    def parse(self, raw: Any) -> bool:
        if isinstance(raw, bool):
            return raw
        if raw in (0, 1, "0", "1"):
            return bool(int(raw))
        raise AlgebraError(f"{raw!r} is not a boolean scalar")

    def to_json(self, a: bool) -> int:
        return int(a)

    def sample(self, rng: random.Random) -> bool:
        return rng.random() < 0.5

    def elements(self) -> list[bool]:
        return [False, True]


def parse_fraction(raw: Any) -> Fraction:
    if isinstance(raw, bool):
        raise AlgebraError(f"{raw!r} is not a rational")
    if isinstance(raw, int | Fraction):
        return Fraction(raw)
    if isinstance(raw, str):
        try:
            return Fraction(raw.strip())
        except ValueError as err:
            raise AlgebraError(f"{raw!r} is not a rational") from err
    raise AlgebraError(f"{raw!r} is not a rational (use 'p/q' strings)")


_RATIONAL_SAMPLES = [
    Fraction(0),
    Fraction(1),
    Fraction(-1),
    Fraction(2),
    Fraction(1, 2),
    Fraction(-3, 2),
    Fraction(3),
    Fraction(2, 3),
]


class RationalField(ScalarAlgebra):
    """Exact rationals; the involution is trivial."""

    name = "rational"
    has_conj = True
    is_field = True

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def add(self, a: Fraction, b: Fraction) -> Fraction:
        return a + b

    def mul(self, a: Fraction, b: Fraction) -> Fraction:
        return a * b

    def conj(self, a: Fraction) -> Fraction:
        return a

    def neg(self, a: Fraction) -> Fraction:
        return -a

    def inv(self, a: Fraction) -> Fraction:
        if a == 0:
            raise AlgebraError("Division by zero")
        return 1 / a

    def parse(self, raw: Any) -> Fraction:
        return parse_fraction(raw)

    def to_json(self, a: Fraction) -> str:
        return str(a)

    def sample(self, rng: random.Random) -> Fraction:
        return rng.choice(_RATIONAL_SAMPLES)


class ComplexRational(NamedTuple):
    re: Fraction
    im: Fraction

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


class ComplexRationalField(ScalarAlgebra):
    """Pairs of rationals with complex conjugation."""

    name = "complex-rational"
    has_conj = True
    is_field = True

    @property
    def zero(self) -> ComplexRational:
        return ComplexRational(Fraction(0), Fraction(0))

    @property
    def one(self) -> ComplexRational:
        return ComplexRational(Fraction(1), Fraction(0))

    def add(self, a: ComplexRational, b: ComplexRational) -> ComplexRational:
        return ComplexRational(a.re + b.re, a.im + b.im)

    def mul(self, a: ComplexRational, b: ComplexRational) -> ComplexRational:
        return ComplexRational(
            a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re
        )

    def conj(self, a: ComplexRational) -> ComplexRational:
        return ComplexRational(a.re, -a.im)

    def neg(self, a: ComplexRational) -> ComplexRational:
        return ComplexRational(-a.re, -a.im)

    def inv(self, a: ComplexRational) -> ComplexRational:
        norm = a.re * a.re + a.im * a.im
        if norm == 0:
            raise AlgebraError("Division by zero")
        return ComplexRational(a.re / norm, -a.im / norm)

    def parse(self, raw: Any) -> ComplexRational:
        if isinstance(raw, list | tuple) and len(raw) == 2:
            return ComplexRational(parse_fraction(raw[0]), parse_fraction(raw[1]))
        return ComplexRational(parse_fraction(raw), Fraction(0))

    def to_json(self, a: ComplexRational) -> list[str]:
        return [str(a.re), str(a.im)]

    def render(self, a: ComplexRational) -> str:
        return str(a)

    def sample(self, rng: random.Random) -> ComplexRational:
        return ComplexRational(
            rng.choice(_RATIONAL_SAMPLES), rng.choice(_RATIONAL_SAMPLES)
        )


class ComplexFloatField(ScalarAlgebra):
    """Floating complex numbers compared within a relative tolerance."""

    name = "complex-float"
    has_conj = True
    is_field = True
    exact = False

    def __init__(self, tolerance: float = 1e-9):
        if tolerance < 0:
            raise AlgebraError("Tolerance must be non-negative")
        self.tolerance = tolerance

    @property
    def zero(self) -> complex:
        return 0j

    @property
    def one(self) -> complex:
        return 1 + 0j

    def add(self, a: complex, b: complex) -> complex:
        return a + b

    def mul(self, a: complex, b: complex) -> complex:
        return a * b

    def eq(self, a: complex, b: complex) -> bool:
        scale = max(1.0, abs(a), abs(b))
        return abs(a - b) <= self.tolerance * scale

    def conj(self, a: complex) -> complex:
        return a.conjugate()

    def neg(self, a: complex) -> complex:
        return -a

    def inv(self, a: complex) -> complex:
        if abs(a) <= self.tolerance:
            raise AlgebraError("Division by (numerically) zero")
        return 1 / a

    def parse(self, raw: Any) -> complex:
        if isinstance(raw, list | tuple) and len(raw) == 2:
            return complex(float(raw[0]), float(raw[1]))
        return complex(float(raw), 0.0)

    def to_json(self, a: complex) -> list[float]:
        return [a.real, a.imag]

    def sample(self, rng: random.Random) -> complex:
        return complex(rng.uniform(-2, 2), rng.uniform(-2, 2))

    def __repr__(self) -> str:
        return f"ComplexFloatField(tolerance={self.tolerance})"


class SemilatticeAlgebra(ScalarAlgebra):
    """A meet-semilattice with top, read as a commutative idempotent monoid.

    Elements are the indices 0..n-1 of the meet table. Every object of the
    semilattice model has dimension 1, so sums never arise and the additive
    structure is left undefined.
    """

    name = "semilattice"
    additive = False

    def __init__(self, meet_table: list[list[int]]):
        self.meet_table = tuple(tuple(row) for row in meet_table)
        self.size = len(self.meet_table)
        self._top = check_semilattice(self.meet_table)

    @property
    def zero(self) -> int:
        raise AlgebraError("Semilattice scalars have no additive unit")

    @property
    def one(self) -> int:
        return self._top

    def add(self, a: int, b: int) -> int:
        raise AlgebraError("Semilattice scalars cannot be added")

    def mul(self, a: int, b: int) -> int:
        return self.meet_table[a][b]

    def parse(self, raw: Any) -> int:
        if isinstance(raw, bool) or not isinstance(raw, int | str):
            raise AlgebraError(f"{raw!r} is not a semilattice element")
        value = int(raw)
        if not 0 <= value < self.size:
            raise AlgebraError(f"{value} is not an element of the semilattice")
        return value

    def to_json(self, a: int) -> int:
        return a

    def sample(self, rng: random.Random) -> int:
        return rng.randrange(self.size)

    def elements(self) -> list[int]:
        return list(range(self.size))

    def __repr__(self) -> str:
        return f"SemilatticeAlgebra(size={self.size})"


def check_semilattice(table: tuple[tuple[int, ...], ...]) -> int:
    """Validate a meet table and return its top (the monoid unit)."""
    n = len(table)
    if n == 0 or any(len(row) != n for row in table):
        raise NotASemilattice("The meet table must be a non-empty square")
    elements = range(n)
    for a, b in product(elements, repeat=2):
        if not 0 <= table[a][b] < n:
            raise NotASemilattice(f"meet({a},{b}) = {table[a][b]} is out of range")
        if table[a][b] != table[b][a]:
            raise NotASemilattice(f"meet is not commutative at ({a},{b})")
    for a in elements:
        if table[a][a] != a:
            raise NotASemilattice(f"meet is not idempotent at {a}")
    for a, b, c in product(elements, repeat=3):
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise NotASemilattice(f"meet is not associative at ({a},{b},{c})")
    tops = [t for t in elements if all(table[t][x] == x for x in elements)]
    if not tops:
        raise NotASemilattice("The semilattice has no top element (unit)")
    return tops[0]


def algebra_for(name: str, tolerance: float = 1e-9,
                meet_table: list[list[int]] | None = None) -> ScalarAlgebra:
    if name == "bool":
        return BooleanAlgebra()
    if name == "rational":
        return RationalField()
    if name == "complex-rational":
        return ComplexRationalField()
    if name == "complex-float":
        return ComplexFloatField(tolerance)
    if name == "semilattice":
        if meet_table is None:
            raise NotASemilattice("The semilattice scalars need a meet_table")
        return SemilatticeAlgebra(meet_table)
    raise AlgebraError(f"Unknown scalar algebra '{name}'")
