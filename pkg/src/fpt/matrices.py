"""Dense exact matrices over Q or GF(p).

Column convention: entry (r, c) is the coefficient of basis vector r in the
image of basis vector c, so columns are images. Rationals are eliminated
fraction-free (integer Bareiss after clearing row denominators).
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from . import _kernels
from .fields import Rationals, require_same_field
from .vectors import SparseVector


class FiniteMatrix:
    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field, rows, ncols=None):
        self.field = field
        rows = [tuple(row) for row in rows]
        self.nrows = len(rows)
        if rows:
            widths = {len(row) for row in rows}
            if len(widths) != 1:
                raise ValueError("ragged rows")
            self.ncols = widths.pop()
        else:
            self.ncols = 0 if ncols is None else ncols
        self.rows = tuple(rows)

    @classmethod
    def from_rows(cls, field, rows, ncols=None) -> "FiniteMatrix":
        """Coerce a grid of ints / Fractions / literal strings into the field."""
        coerced = []
        for row in rows:
            out = []
            for value in row:
                if isinstance(value, int):
                    out.append(field.from_int(value))
                elif isinstance(value, Fraction):
                    out.append(field.from_fraction(value))
                elif isinstance(value, str):
                    out.append(field.parse(value))
                else:
                    out.append(value)
            coerced.append(out)
        return cls(field, coerced, ncols=ncols)

    @classmethod
    def identity(cls, field, n: int) -> "FiniteMatrix":
        one, zero = field.one, field.zero
        return cls(field, [[one if r == c else zero for c in range(n)] for r in range(n)], ncols=n)

    @classmethod
    def zeros(cls, field, nrows: int, ncols: int) -> "FiniteMatrix":
        zero = field.zero
        return cls(field, [[zero] * ncols for _ in range(nrows)], ncols=ncols)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def entry(self, r: int, c: int):
        """1-based entry access."""
        return self.rows[r - 1][c - 1]

    def column(self, c: int) -> SparseVector:
        """1-based column as a sparse vector (row index -> coefficient)."""
        return SparseVector(self.field, {r + 1: row[c - 1] for r, row in enumerate(self.rows)})

    def trace(self):
        if not self.is_square:
            raise ValueError(f"trace of non-square {self.nrows}x{self.ncols} matrix")
        total = self.field.zero
        for i in range(self.nrows):
            total = self.field.add(total, self.rows[i][i])
        return total

    def det(self):
        if not self.is_square:
            raise ValueError(f"determinant of non-square {self.nrows}x{self.ncols} matrix")
        field = self.field
        if isinstance(field, Rationals):
            scaled = []
            denom = 1
            for row in self.rows:
                mult = lcm(*(value.denominator for value in row)) if row else 1
                scaled.append([int(value * mult) for value in row])
                denom *= mult
            return Fraction(_kernels.det_int(scaled), denom)
        return _kernels.det_mod([list(row) for row in self.rows], field.characteristic)

    def __add__(self, other: "FiniteMatrix") -> "FiniteMatrix":
        require_same_field(self.field, other.field)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch")
        add = self.field.add
        return FiniteMatrix(
            self.field,
            [[add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)],
            ncols=self.ncols,
        )

    def scale(self, c) -> "FiniteMatrix":
        mul = self.field.mul
        return FiniteMatrix(
            self.field, [[mul(c, value) for value in row] for row in self.rows], ncols=self.ncols
        )

    def __matmul__(self, other: "FiniteMatrix") -> "FiniteMatrix":
        require_same_field(self.field, other.field)
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        add, mul, zero = self.field.add, self.field.mul, self.field.zero
        cols = list(zip(*other.rows)) if other.rows else []
        out = []
        for row in self.rows:
            out_row = []
            for col in cols:
                acc = zero
                for a, b in zip(row, col):
                    acc = add(acc, mul(a, b))
                out_row.append(acc)
            out.append(out_row)
        return FiniteMatrix(self.field, out, ncols=other.ncols)

    def inverse(self) -> "FiniteMatrix":
        """Exact inverse by Gauss-Jordan; raises ZeroDivisionError if singular."""
        if not self.is_square:
            raise ValueError("inverse of non-square matrix")
        n = self.nrows
        field = self.field
        work = [list(row) + list(ident) for row, ident in zip(self.rows, FiniteMatrix.identity(field, n).rows)]
        for col in range(n):
            pivot_row = next((r for r in range(col, n) if work[r][col] != field.zero), None)
            if pivot_row is None:
                raise ZeroDivisionError("matrix is singular")
            work[col], work[pivot_row] = work[pivot_row], work[col]
            inv = field.invert(work[col][col])
            work[col] = [field.mul(inv, value) for value in work[col]]
            for r in range(n):
                if r != col and work[r][col] != field.zero:
                    factor = work[r][col]
                    work[r] = [field.sub(a, field.mul(factor, b)) for a, b in zip(work[r], work[col])]
        return FiniteMatrix(field, [row[n:] for row in work], ncols=n)

    def to_str_rows(self):
        to_str = self.field.to_str
        return [[to_str(value) for value in row] for row in self.rows]

    def __eq__(self, other):
        if not isinstance(other, FiniteMatrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.nrows == other.nrows
            and self.ncols == other.ncols
            and self.rows == other.rows
        )

    def __hash__(self):
        return hash((self.field, self.nrows, self.ncols, self.rows))

    def __repr__(self):
        return f"FiniteMatrix({self.nrows}x{self.ncols}, {self.to_str_rows()})"


def matrix_trace(matrix: FiniteMatrix):
    return matrix.trace()


def matrix_det(matrix: FiniteMatrix):
    return matrix.det()
