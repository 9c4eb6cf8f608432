# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elimination kernels; behavioral twins of ``pure.py``.

Same four entry points, identical outputs (the normalized forms are unique,
so the two backends are interchangeable and cross-checked in tests):

* ``rref_int`` / ``det_int``: arbitrary-precision integers (Python objects;
  the win is loop dispatch, the big-int arithmetic itself is unchanged)
* ``rref_mod`` / ``det_mod``: residues mod p in C integers when p is small
  enough that products fit in 64 bits, else delegated to the pure twin
"""

from libc.stdlib cimport free, malloc

from math import gcd as _gcd

from . import pure as _pure

BACKEND = "cython"

# Largest modulus for which (p-1)^2 fits comfortably in a signed 64-bit int.
cdef long long SMALL_PRIME_LIMIT = 3037000499


cdef Py_ssize_t _first_nonzero(list row):
    cdef Py_ssize_t pos
    for pos in range(len(row)):
        if row[pos]:
            return pos
    return -1


cdef list _make_primitive(list row):
    cdef Py_ssize_t pos, n = len(row)
    g = 0
    for pos in range(n):
        if row[pos]:
            g = _gcd(g, row[pos])
    if g == 0:
        return row
    if row[_first_nonzero(row)] < 0:
        g = -g
    if g == 1:
        return row
    return [value // g for value in row]


cdef list _combine(list a, list b, coeff_a, coeff_b):
    """coeff_a * a - coeff_b * b, elementwise."""
    cdef Py_ssize_t pos, n = len(a)
    cdef list out = [0] * n
    for pos in range(n):
        out[pos] = a[pos] * coeff_a - b[pos] * coeff_b
    return out


def rref_int(rows):
    """Integer-preserving Gauss-Jordan. Returns (rows, pivot_columns)."""
    cdef list basis_rows = []
    cdef list basis_pivots = []
    cdef list row
    cdef Py_ssize_t pivot, pos, insert_at
    for source in rows:
        row = list(source)
        for pos in range(len(basis_rows)):
            coeff = row[<Py_ssize_t> basis_pivots[pos]]
            if coeff:
                base = <list> basis_rows[pos]
                row = _combine(row, base, base[<Py_ssize_t> basis_pivots[pos]], coeff)
        pivot = _first_nonzero(row)
        if pivot < 0:
            continue
        row = _make_primitive(row)
        lead = row[pivot]
        for pos in range(len(basis_rows)):
            base = <list> basis_rows[pos]
            coeff = base[pivot]
            if coeff:
                basis_rows[pos] = _make_primitive(_combine(base, row, lead, coeff))
        insert_at = 0
        while insert_at < len(basis_pivots) and <Py_ssize_t> basis_pivots[insert_at] < pivot:
            insert_at += 1
        basis_rows.insert(insert_at, row)
        basis_pivots.insert(insert_at, pivot)
    return basis_rows, basis_pivots


def det_int(matrix):
    """Exact determinant of a square integer matrix (Bareiss elimination)."""
    cdef Py_ssize_t n = len(matrix)
    if n == 0:
        return 1
    cdef list m = [list(row) for row in matrix]
    cdef Py_ssize_t k, i, j, r
    cdef int sign = 1
    prev = 1
    cdef list row_i, row_k
    for k in range(n - 1):
        row_k = <list> m[k]
        if not row_k[k]:
            for r in range(k + 1, n):
                if (<list> m[r])[k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
            row_k = <list> m[k]
        pivot = row_k[k]
        for i in range(k + 1, n):
            row_i = <list> m[i]
            factor = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - factor * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * (<list> m[n - 1])[n - 1]


cdef long long _modpow(long long base, long long exponent, long long p):
    cdef long long result = 1 % p
    base %= p
    while exponent > 0:
        if exponent & 1:
            result = result * base % p
        base = base * base % p
        exponent >>= 1
    return result


def rref_mod(rows, p_in):
    """Reduced row echelon form mod prime p. Returns (rows, pivot_columns)."""
    if p_in >= SMALL_PRIME_LIMIT:
        return _pure.rref_mod(rows, p_in)
    cdef long long p = p_in
    cdef Py_ssize_t nr = len(rows)
    if nr == 0:
        return [], []
    cdef Py_ssize_t nc = len(rows[0])
    if nc == 0:
        return [], []
    cdef long long *buf = <long long *> malloc(nr * nc * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t r, c, rank, pivot_row, pos
    cdef long long value, inv, factor
    try:
        for r in range(nr):
            source = rows[r]
            for c in range(nc):
                buf[r * nc + c] = <long long> (source[c] % p_in)
        rank = 0
        pivots = []
        for c in range(nc):
            pivot_row = -1
            for r in range(rank, nr):
                if buf[r * nc + c]:
                    pivot_row = r
                    break
            if pivot_row < 0:
                continue
            if pivot_row != rank:
                for pos in range(nc):
                    value = buf[rank * nc + pos]
                    buf[rank * nc + pos] = buf[pivot_row * nc + pos]
                    buf[pivot_row * nc + pos] = value
            inv = _modpow(buf[rank * nc + c], p - 2, p)
            for pos in range(c, nc):
                buf[rank * nc + pos] = buf[rank * nc + pos] * inv % p
            for r in range(nr):
                if r != rank:
                    factor = buf[r * nc + c]
                    if factor:
                        for pos in range(c, nc):
                            buf[r * nc + pos] = (
                                buf[r * nc + pos] - factor * buf[rank * nc + pos]
                            ) % p
                            if buf[r * nc + pos] < 0:
                                buf[r * nc + pos] += p
            pivots.append(c)
            rank += 1
            if rank == nr:
                break
        out = []
        for r in range(rank):
            out.append([buf[r * nc + pos] for pos in range(nc)])
        return out, pivots
    finally:
        free(buf)


def det_mod(matrix, p_in):
    """Determinant of a square matrix mod prime p."""
    if p_in >= SMALL_PRIME_LIMIT:
        return _pure.det_mod(matrix, p_in)
    cdef long long p = p_in
    cdef Py_ssize_t n = len(matrix)
    if n == 0:
        return 1 % p_in
    cdef long long *buf = <long long *> malloc(n * n * sizeof(long long))
    if buf == NULL:
        raise MemoryError()
    cdef Py_ssize_t k, r, c
    cdef long long det = 1, pivot, inv, factor, value
    try:
        for r in range(n):
            source = matrix[r]
            for c in range(n):
                buf[r * n + c] = <long long> (source[c] % p_in)
        for k in range(n):
            if not buf[k * n + k]:
                for r in range(k + 1, n):
                    if buf[r * n + k]:
                        for c in range(n):
                            value = buf[k * n + c]
                            buf[k * n + c] = buf[r * n + c]
                            buf[r * n + c] = value
                        det = p - det if det else 0
                        break
                else:
                    return 0
            pivot = buf[k * n + k]
            det = det * pivot % p
            inv = _modpow(pivot, p - 2, p)
            for r in range(k + 1, n):
                factor = buf[r * n + k] * inv % p
                if factor:
                    for c in range(k, n):
                        buf[r * n + c] = (buf[r * n + c] - factor * buf[k * n + c]) % p
                        if buf[r * n + c] < 0:
                            buf[r * n + c] += p
        return int(det % p)
    finally:
        free(buf)
