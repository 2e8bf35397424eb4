"""Dense matrices over a pluggable scalar algebra."""

from functools import reduce
from typing import Any

from pydantic import (
    BaseModel,
    ConfigDict,
    field_serializer,
    model_validator,
)

from src.errors import AlgebraError, DimensionMismatch, NotInvertible
from src.scalars import BooleanAlgebra, ScalarAlgebra


class Matrix(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    rows: int
    cols: int
    entries: tuple[Any, ...]
    algebra: ScalarAlgebra

    @model_validator(mode="after")
    def _check_size(self) -> "Matrix":
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatch("Matrix dimensions must be non-negative")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch(
                f"A {self.rows}×{self.cols} matrix needs "
                f"{self.rows * self.cols} entries, got {len(self.entries)}"
            )
        return self

    @field_serializer("entries")
    def _entries_json(self, entries: tuple[Any, ...]) -> list[Any]:
        return [self.algebra.to_json(x) for x in entries]

    @field_serializer("algebra")
    def _algebra_json(self, algebra: ScalarAlgebra) -> str:
        return algebra.name

    # Constructors

    @classmethod
    def of(cls, algebra: ScalarAlgebra, rows: int, cols: int,
           entries: list[Any]) -> "Matrix":
        return cls(rows=rows, cols=cols, entries=tuple(entries),
                   algebra=algebra)

    @classmethod
    def parse(cls, algebra: ScalarAlgebra, rows: int, cols: int,
              raw: list[Any]) -> "Matrix":
        """Read row-major JSON entries."""
        if len(raw) != rows * cols:
            raise DimensionMismatch(
                f"Expected {rows * cols} entries for a {rows}×{cols} "
                f"matrix, got {len(raw)}"
            )
        return cls.of(algebra, rows, cols, [algebra.parse(x) for x in raw])

    @classmethod
    def from_rows(cls, algebra: ScalarAlgebra,
                  rows: list[list[Any]]) -> "Matrix":
        n_cols = len(rows[0]) if rows else 0
        if any(len(r) != n_cols for r in rows):
            raise DimensionMismatch("Ragged rows")
        return cls.of(algebra, len(rows), n_cols,
                      [x for r in rows for x in r])

    @classmethod
    def identity(cls, algebra: ScalarAlgebra, n: int) -> "Matrix":
        return cls.of(
            algebra, n, n,
            [algebra.one if i == j else algebra.zero
             for i in range(n) for j in range(n)],
        )

    @classmethod
    def permutation(cls, algebra: ScalarAlgebra,
                    images: list[int]) -> "Matrix":
        """Sends basis vector j to basis vector images[j]."""
        n = len(images)
        return cls.of(
            algebra, n, n,
            [algebra.one if images[j] == i else algebra.zero
             for i in range(n) for j in range(n)],
        )

    @classmethod
    def scalar(cls, algebra: ScalarAlgebra, value: Any) -> "Matrix":
        return cls.of(algebra, 1, 1, [value])

    # Access

    def __getitem__(self, ij: tuple[int, int]) -> Any:
        i, j = ij
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[Any]]:
        return [
            list(self.entries[i * self.cols:(i + 1) * self.cols])
            for i in range(self.rows)
        ]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def value(self) -> Any:
        """The entry of a 1×1 matrix."""
        if self.shape != (1, 1):
            raise DimensionMismatch(f"{self.rows}×{self.cols} is not a scalar")
        return self.entries[0]

    # Algebra

    def _sum(self, terms: list[Any]) -> Any:
        if not terms:
            return self.algebra.zero
        return reduce(self.algebra.add, terms)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"Cannot multiply {self.rows}×{self.cols} by "
                f"{other.rows}×{other.cols}"
            )
        mul = self.algebra.mul
        entries = [
            self._sum([
                mul(self[i, k], other[k, j]) for k in range(self.cols)
            ])
            for i in range(self.rows)
            for j in range(other.cols)
        ]
        return Matrix.of(self.algebra, self.rows, other.cols, entries)

    def kron(self, other: "Matrix") -> "Matrix":
        """Kronecker product, left factor major: (i, k) ↦ i·rows_r + k."""
        mul = self.algebra.mul
        entries = [
            mul(self[i, j], other[k, m])
            for i in range(self.rows)
            for k in range(other.rows)
            for j in range(self.cols)
            for m in range(other.cols)
        ]
        return Matrix.of(self.algebra, self.rows * other.rows,
                         self.cols * other.cols, entries)

    def transpose(self) -> "Matrix":
        return Matrix.of(
            self.algebra, self.cols, self.rows,
            [self[i, j] for j in range(self.cols) for i in range(self.rows)],
        )

    def conjugate(self) -> "Matrix":
        return Matrix.of(self.algebra, self.rows, self.cols,
                         [self.algebra.conj(x) for x in self.entries])

    def dagger(self) -> "Matrix":
        return self.transpose().conjugate()

    def scale(self, s: Any) -> "Matrix":
        return Matrix.of(self.algebra, self.rows, self.cols,
                         [self.algebra.mul(s, x) for x in self.entries])

    def trace(self) -> Any:
        if not self.is_square:
            raise DimensionMismatch(
                f"Trace of a non-square {self.rows}×{self.cols} matrix"
            )
        return self._sum([self[i, i] for i in range(self.rows)])

    def equals(self, other: "Matrix") -> bool:
        """Entrywise equality under the algebra's notion of equality."""
        return self.shape == other.shape and all(
            self.algebra.eq(a, b)
            for a, b in zip(self.entries, other.entries)
        )

    def is_identity(self) -> bool:
        return self.is_square and self.equals(
            Matrix.identity(self.algebra, self.rows)
        )

    def is_self_adjoint(self) -> bool:
        return self.is_square and self.equals(self.dagger())

    def is_unitary(self) -> bool:
        """Invertible with inverse equal to the dagger."""
        if not self.is_square:
            return False
        return (self.dagger() @ self).is_identity() and (
            self @ self.dagger()
        ).is_identity()

    def inverse(self) -> "Matrix":
        if not self.is_square:
            raise NotInvertible(f"A {self.rows}×{self.cols} matrix")
        if isinstance(self.algebra, BooleanAlgebra):
            return self._boolean_inverse()
        if self.algebra.is_field:
            return self._gauss_jordan()
        if self.rows == 1 and self.algebra.eq(self.entries[0],
                                              self.algebra.one):
            return self
        raise NotInvertible(
            f"Cannot invert over the {self.algebra.name} scalars"
        )

    def _boolean_inverse(self) -> "Matrix":
        # a boolean matrix is invertible exactly when it is a permutation
        t = self.transpose()
        if (self @ t).is_identity() and (t @ self).is_identity():
            return t
        raise NotInvertible("Boolean matrix is not a permutation")

    def _gauss_jordan(self) -> "Matrix":
        alg = self.algebra
        n = self.rows
        work = [
            list(row) + [alg.one if i == j else alg.zero for j in range(n)]
            for i, row in enumerate(self.to_rows())
        ]
        for col in range(n):
            pivot = next(
                (r for r in range(col, n) if not alg.is_zero(work[r][col])),
                None,
            )
            if pivot is None:
                raise NotInvertible("Matrix is singular")
            work[col], work[pivot] = work[pivot], work[col]
            try:
                factor = alg.inv(work[col][col])
            except AlgebraError as err:
                raise NotInvertible("Matrix is singular") from err
            work[col] = [alg.mul(factor, x) for x in work[col]]
            for r in range(n):
                if r == col or alg.is_zero(work[r][col]):
                    continue
                scale = alg.neg(work[r][col])
                work[r] = [
                    alg.add(x, alg.mul(scale, y))
                    for x, y in zip(work[r], work[col])
                ]
        return Matrix.from_rows(alg, [row[n:] for row in work])

    def to_json(self) -> list[Any]:
        return [self.algebra.to_json(x) for x in self.entries]

    def render(self) -> str:
        cells = [[self.algebra.render(x) for x in row]
                 for row in self.to_rows()]
        if not cells or not cells[0]:
            return f"[{self.rows}×{self.cols} empty]"
        width = max(len(c) for row in cells for c in row)
        return "\n".join(
            "[ " + "  ".join(c.rjust(width) for c in row) + " ]"
            for row in cells
        )

    def __str__(self) -> str:
        return self.render()
