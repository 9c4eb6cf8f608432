"""Finite-dimensional subspaces of the countable-basis space.

A subspace is stored as a reduced row-echelon basis of sparse vectors, which
makes equality of subspaces literal equality of their stored rows. Elimination
is delegated to the kernel backend after compressing onto the union of the
supports (rationals are scaled to integers first; scaling rows never changes
the span).
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from . import _kernels
from .fields import Rationals, require_same_field
from .matrices import FiniteMatrix
from .vectors import SparseVector


class NotInSpanError(ValueError):
    """A vector expected to lie in a subspace does not."""


class NotInvariantError(ValueError):
    """An operator expected to preserve a subspace maps it outside."""


class Subspace:
    """Span of finitely many vectors, held in reduced row-echelon form.

    ``rows`` are pairwise-reduced with leading coefficient 1, ordered by
    pivot index; two Subspace objects over the same field are equal exactly
    when they describe the same subspace.
    """

    __slots__ = ("field", "rows", "pivots")

    def __init__(self, field, rows, pivots):
        self.field = field
        self.rows = tuple(rows)
        self.pivots = tuple(pivots)

    @property
    def dim(self) -> int:
        return len(self.rows)

    def reduce_vector(self, vector: SparseVector) -> SparseVector:
        """Residual of ``vector`` after clearing every pivot coordinate."""
        require_same_field(self.field, vector.field)
        residual = vector
        for pivot, row in zip(self.pivots, self.rows):
            coeff = residual.coeff(pivot)
            if coeff != self.field.zero:
                residual = residual - row.scale(coeff)
        return residual

    def contains(self, vector: SparseVector) -> bool:
        return self.reduce_vector(vector).is_zero

    def coordinates(self, vector: SparseVector):
        """Coefficients of ``vector`` on ``rows``; raises NotInSpanError otherwise."""
        coords = [vector.coeff(pivot) for pivot in self.pivots]
        if not self.reduce_vector(vector).is_zero:
            raise NotInSpanError("vector lies outside the subspace")
        return coords

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.field == other.field and self.rows == other.rows

    def __hash__(self):
        return hash((self.field, self.rows))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, pivots={self.pivots})"


def span(field, vectors) -> Subspace:
    """Row-reduce ``vectors`` into a canonical Subspace."""
    vectors = [v for v in vectors if not v.is_zero]
    if not vectors:
        return Subspace(field, (), ())
    support = sorted({index for v in vectors for index in v.support()})
    col_of = {index: pos for pos, index in enumerate(support)}
    width = len(support)

    if isinstance(field, Rationals):
        dense = []
        for v in vectors:
            mult = lcm(*(coeff.denominator for _, coeff in v.items()))
            row = [0] * width
            for index, coeff in v.items():
                row[col_of[index]] = int(coeff * mult)
            dense.append(row)
        reduced, pivot_cols = _kernels.rref_int(dense)
        rows = []
        for row, col in zip(reduced, pivot_cols):
            lead = row[col]
            rows.append(
                SparseVector(
                    field,
                    {support[pos]: Fraction(value, lead) for pos, value in enumerate(row) if value},
                )
            )
    else:
        p = field.characteristic
        dense = []
        for v in vectors:
            row = [0] * width
            for index, coeff in v.items():
                row[col_of[index]] = coeff
            dense.append(row)
        reduced, pivot_cols = _kernels.rref_mod(dense, p)
        rows = [
            SparseVector(field, {support[pos]: value for pos, value in enumerate(row) if value})
            for row in reduced
        ]
    return Subspace(field, rows, tuple(support[col] for col in pivot_cols))


def restrict_operator(apply_fn, sub: Subspace) -> FiniteMatrix:
    """Matrix of an operator on an invariant subspace, columns as images.

    ``apply_fn`` maps SparseVector -> SparseVector; entry (r, c) is the
    coefficient of row r in the image of row c. Raises NotInvariantError if
    any image leaves the subspace.
    """
    columns = []
    for basis_vector in sub.rows:
        image = apply_fn(basis_vector)
        try:
            columns.append(sub.coordinates(image))
        except NotInSpanError:
            raise NotInvariantError(
                f"image of basis vector with pivot {basis_vector.max_index()} leaves the subspace"
            ) from None
    rows = [[columns[c][r] for c in range(sub.dim)] for r in range(sub.dim)]
    return FiniteMatrix(sub.field, rows, ncols=sub.dim)


def quotient_operator(matrix: FiniteMatrix, sub: Subspace) -> FiniteMatrix:
    """Matrix induced on the quotient (ambient space of ``matrix``) / ``sub``.

    The ambient space is span{1..n} for an n×n matrix; ``sub`` must have all
    pivots ≤ n and be invariant under the matrix. The quotient basis is the
    set of non-pivot indices; reducing an image modulo a reduced-row-echelon
    basis clears exactly the pivot coordinates, so the residual reads off as
    quotient coordinates directly.
    """
    require_same_field(matrix.field, sub.field)
    if not matrix.is_square:
        raise ValueError("quotient of non-square matrix")
    field = sub.field
    n = matrix.nrows
    pivot_set = set(sub.pivots)
    if any(pivot > n for pivot in pivot_set):
        raise ValueError("subspace pivots exceed the ambient dimension")
    for row in sub.rows:
        image = matrix_apply(matrix, row)
        if not sub.contains(image):
            raise NotInvariantError("matrix does not preserve the subspace")
    quotient_indices = [i for i in range(1, n + 1) if i not in pivot_set]
    slot = {index: pos for pos, index in enumerate(quotient_indices)}
    dim = len(quotient_indices)
    rows = [[field.zero] * dim for _ in range(dim)]
    for c, index in enumerate(quotient_indices):
        residual = sub.reduce_vector(matrix.column(index))
        for support_index, coeff in residual.items():
            rows[slot[support_index]][c] = coeff
    return FiniteMatrix(field, rows, ncols=dim)


def matrix_apply(matrix: FiniteMatrix, vector: SparseVector) -> SparseVector:
    """Apply a finite matrix (columns-are-images) to a sparse vector."""
    result = SparseVector.zero(matrix.field)
    for index, coeff in vector.items():
        if index > matrix.ncols:
            raise ValueError(f"vector index {index} exceeds matrix width {matrix.ncols}")
        result = result + matrix.column(index).scale(coeff)
    return result
