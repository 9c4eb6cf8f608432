"""Finitely supported vectors over a countable basis indexed from 1.

A vector is canonical: the entry map never stores zero coefficients, so
equal vectors have identical entry sets.
"""

from __future__ import annotations

from fractions import Fraction

from .fields import require_same_field


class SparseVector:
    __slots__ = ("field", "entries")

    def __init__(self, field, entries=None):
        self.field = field
        clean = {}
        if entries:
            zero = field.zero
            for idx, coeff in entries.items():
                if not isinstance(idx, int) or idx < 1:
                    raise ValueError(f"basis index must be an integer >= 1, got {idx!r}")
                if coeff != zero:
                    clean[idx] = coeff
        self.entries = clean

    @classmethod
    def zero(cls, field) -> "SparseVector":
        return cls(field)

    @classmethod
    def basis(cls, field, index: int) -> "SparseVector":
        return cls(field, {index: field.one})

    @classmethod
    def from_pairs(cls, field, pairs) -> "SparseVector":
        """Build from (index, coefficient) pairs.

        Coefficients may be field scalars, ints, Fractions, or exact literal
        strings (the `to_pairs` format); repeated indices accumulate.
        """
        acc = {}
        for idx, coeff in pairs:
            if isinstance(coeff, str):
                coeff = field.parse(coeff)
            elif isinstance(coeff, bool):
                raise ValueError("boolean is not a scalar")
            elif isinstance(coeff, int):
                coeff = field.from_int(coeff)
            elif isinstance(coeff, Fraction):
                coeff = field.from_fraction(coeff)
            acc[idx] = field.add(acc.get(idx, field.zero), coeff)
        return cls(field, acc)

    @property
    def is_zero(self) -> bool:
        return not self.entries

    def max_index(self):
        """Largest support index, or None for the zero vector."""
        return max(self.entries) if self.entries else None

    def min_index(self):
        """Smallest support index, or None for the zero vector."""
        return min(self.entries) if self.entries else None

    def to_pairs(self):
        """JSON-friendly form: [[index, coefficient-as-string], ...], index order."""
        to_str = self.field.to_str
        return [[index, to_str(value)] for index, value in self.items()]

    def coeff(self, index: int):
        return self.entries.get(index, self.field.zero)

    def support(self):
        return sorted(self.entries)

    def items(self):
        """Entries as (index, coefficient) pairs in increasing index order."""
        return sorted(self.entries.items())

    def __add__(self, other: "SparseVector") -> "SparseVector":
        require_same_field(self.field, other.field)
        field = self.field
        add, zero = field.add, field.zero
        big, small = self.entries, other.entries
        if len(big) < len(small):
            big, small = small, big
        acc = dict(big)
        for idx, coeff in small.items():
            s = add(acc.get(idx, zero), coeff)
            if s == zero:
                acc.pop(idx, None)
            else:
                acc[idx] = s
        out = SparseVector.__new__(SparseVector)
        out.field = field
        out.entries = acc
        return out

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + (-other)

    def __neg__(self) -> "SparseVector":
        neg = self.field.neg
        out = SparseVector.__new__(SparseVector)
        out.field = self.field
        out.entries = {idx: neg(c) for idx, c in self.entries.items()}
        return out

    def scale(self, c) -> "SparseVector":
        field = self.field
        if c == field.zero:
            return SparseVector.zero(field)
        mul = field.mul
        out = SparseVector.__new__(SparseVector)
        out.field = field
        out.entries = {idx: mul(c, v) for idx, v in self.entries.items()}
        return out

    def shift(self, offset: int) -> "SparseVector":
        """Translate every support index by `offset` (result indices must stay >= 1)."""
        out = SparseVector.__new__(SparseVector)
        out.field = self.field
        moved = {}
        for idx, coeff in self.entries.items():
            if idx + offset < 1:
                raise ValueError(f"shift by {offset} pushes index {idx} below 1")
            moved[idx + offset] = coeff
        out.entries = moved
        return out

    def __eq__(self, other):
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.field == other.field and self.entries == other.entries

    def __hash__(self):
        return hash((self.field, tuple(sorted(self.entries.items()))))

    def to_text(self, basis_name: str = "v") -> str:
        """Render as a signed term list, e.g. ``v[1] - 2*v[3]``."""
        if not self.entries:
            return "0"
        field = self.field
        parts = []
        for pos, (idx, coeff) in enumerate(self.items()):
            text = field.to_str(coeff)
            negative = text.startswith("-")
            mag = text[1:] if negative else text
            body = f"{basis_name}[{idx}]" if mag == "1" else f"{mag}*{basis_name}[{idx}]"
            if pos == 0:
                parts.append(f"-{body}" if negative else body)
            else:
                parts.append(f"- {body}" if negative else f"+ {body}")
        return " ".join(parts)

    def __repr__(self):
        return f"SparseVector({self.to_text()})"
