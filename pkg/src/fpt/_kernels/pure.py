"""Pure-Python elimination kernels.

These are the reference twins of the compiled routines in `_speedups.pyx`;
both expose the same four entry points over dense rows:

* integer rows (exact, fraction-free): `rref_int`, `det_int`
* rows mod a prime p: `rref_mod`, `det_mod`

`rref_int` returns primitive integer rows (content 1, positive pivot) that
are fully reduced above and below the pivots; dividing each row by its pivot
yields the unique reduced echelon form over the rationals.
"""

from __future__ import annotations

from math import gcd

BACKEND = "pure"


def _first_nonzero(row):
    for pos, value in enumerate(row):
        if value:
            return pos
    return -1


def _make_primitive(row):
    g = 0
    for value in row:
        if value:
            g = gcd(g, value)
    if g == 0:
        return row
    lead = row[_first_nonzero(row)]
    if lead < 0:
        g = -g
    if g != 1:
        return [value // g for value in row]
    return row


def rref_int(rows):
    """Integer-preserving Gauss-Jordan. Returns (rows, pivot_columns)."""
    basis = []  # (pivot_col, row), kept sorted by pivot_col and mutually reduced
    for row in rows:
        row = list(row)
        for pivot, base in basis:
            coeff = row[pivot]
            if coeff:
                lead = base[pivot]
                row = [a * lead - b * coeff for a, b in zip(row, base)]
        pivot = _first_nonzero(row)
        if pivot < 0:
            continue
        row = _make_primitive(row)
        lead = row[pivot]
        for pos, (bp, base) in enumerate(basis):
            coeff = base[pivot]
            if coeff:
                updated = [a * lead - b * coeff for a, b in zip(base, row)]
                basis[pos] = (bp, _make_primitive(updated))
        basis.append((pivot, row))
        basis.sort(key=lambda item: item[0])
    return [row for _, row in basis], [pivot for pivot, _ in basis]


def rref_mod(rows, p):
    """Reduced row echelon form mod prime p. Returns (rows, pivot_columns)."""
    basis = []
    for row in rows:
        row = [value % p for value in row]
        for pivot, base in basis:
            coeff = row[pivot]
            if coeff:
                row = [(a - coeff * b) % p for a, b in zip(row, base)]
        pivot = _first_nonzero(row)
        if pivot < 0:
            continue
        inv = pow(row[pivot], p - 2, p)
        row = [value * inv % p for value in row]
        for pos, (bp, base) in enumerate(basis):
            coeff = base[pivot]
            if coeff:
                basis[pos] = (bp, [(a - coeff * b) % p for a, b in zip(base, row)])
        basis.append((pivot, row))
        basis.sort(key=lambda item: item[0])
    return [row for _, row in basis], [pivot for pivot, _ in basis]


def det_int(matrix):
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    n = len(matrix)
    if n == 0:
        return 1
    m = [list(row) for row in matrix]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            row_i = m[i]
            row_k = m[k]
            factor = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def det_mod(matrix, p):
    """Determinant of a square matrix mod prime p."""
    n = len(matrix)
    if n == 0:
        return 1 % p
    m = [[value % p for value in row] for row in matrix]
    det = 1
    for k in range(n):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    det = -det
                    break
            else:
                return 0
        pivot = m[k][k]
        det = det * pivot % p
        inv = pow(pivot, p - 2, p)
        for i in range(k + 1, n):
            factor = m[i][k] * inv % p
            if factor:
                m[i] = [(a - factor * b) % p for a, b in zip(m[i], m[k])]
    return det % p
