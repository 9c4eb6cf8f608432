"""Rule-defined linear operators on the countable-basis space.

An operator is described by finitely many exceptional rules (explicit images
for individual indices) plus family rules covering residue classes
``i = m*k + r`` for ``k >= k0``. Construction validates that the rules
partition {1, 2, 3, ...}, that index expressions stay integral and >= 1, and
that the declared reach (upper band width) is respected wherever that is
statically checkable; evaluation re-checks reach on every image.

Sums, compositions, re-indexed restrictions, and finite-matrix embeddings are
lazy views sharing the same application interface.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from .fields import require_same_field
from .spans import NotInvariantError
from .matrices import FiniteMatrix
from .vectors import SparseVector

GUARD = 16  # index expressions are checked for k in {k0, ..., k0 + GUARD}


class UncoveredIndexError(ValueError):
    """No rule matches a basis index (unreachable after the partition check)."""


class ReachViolationError(ValueError):
    """An evaluated image exceeds the operator's declared reach."""


class BasisMismatchError(ValueError):
    """Two operators written in different bases were combined."""


class OverlapError(ValueError):
    """Two rules match the same basis index."""


class GapError(ValueError):
    """Some basis index is matched by no rule."""


class NonIntegerIndexError(ValueError):
    """An index expression is non-integral or < 1 for an admissible k."""


class BadReachError(ValueError):
    """A rule's own terms statically violate the declared reach."""


class LinearForm:
    """Affine form a*j + b*k + c with exact rational coefficients."""

    __slots__ = ("j", "k", "const")

    def __init__(self, j=0, k=0, const=0):
        self.j = Fraction(j)
        self.k = Fraction(k)
        self.const = Fraction(const)

    @classmethod
    def constant(cls, value) -> "LinearForm":
        return cls(0, 0, value)

    def evaluate(self, j=0, k=0) -> Fraction:
        return self.j * j + self.k * k + self.const

    def eval_int(self, j=0, k=0) -> int:
        value = self.evaluate(j=j, k=k)
        if value.denominator != 1:
            raise NonIntegerIndexError(f"expression evaluates to non-integer {value}")
        return value.numerator

    @property
    def is_constant(self) -> bool:
        return self.j == 0 and self.k == 0

    @property
    def uses_j(self) -> bool:
        return self.j != 0

    def substitute_j(self, form: "LinearForm") -> "LinearForm":
        """Replace j by another (j-free) affine form in k."""
        return LinearForm(0, self.j * form.k + self.k, self.j * form.const + self.const)

    def __eq__(self, other):
        if not isinstance(other, LinearForm):
            return NotImplemented
        return (self.j, self.k, self.const) == (other.j, other.k, other.const)

    def __hash__(self):
        return hash((self.j, self.k, self.const))

    def __repr__(self):
        return f"LinearForm({self.j}, {self.k}, {self.const})"


def _normalize_sign(coeff: Fraction, sign_form):
    """Fold (-1)^(form) into the coefficient when possible; reduce mod 2."""
    if sign_form is None:
        return coeff, None
    j, k, const = sign_form.j, sign_form.k, sign_form.const
    if j.denominator != 1 or k.denominator != 1 or const.denominator != 1:
        raise NonIntegerIndexError("sign exponent must have integer coefficients")
    j, k, const = j.numerator % 2, k.numerator % 2, const.numerator % 2
    if j == 0 and k == 0:
        return (-coeff if const else coeff), None
    if const:
        coeff = -coeff
        const = 0
    return coeff, LinearForm(j, k, const)


class Term:
    """coefficient × (-1)^(sign form) × basis[index form], index affine in k."""

    __slots__ = ("coeff", "sign", "index")

    def __init__(self, coeff, sign, index: LinearForm):
        if index.uses_j:
            raise NonIntegerIndexError("index of a non-sum term cannot involve j")
        self.coeff, self.sign = _normalize_sign(Fraction(coeff), sign)
        self.index = index

    def evaluate(self, field, k):
        idx = self.index.eval_int(k=k)
        value = self.coeff
        if self.sign is not None and self.sign.eval_int(k=k) % 2:
            value = -value
        return [(idx, field.from_fraction(value))]

    def _key(self):
        return ("term", self.coeff, self.sign, self.index)

    def __eq__(self, other):
        return isinstance(other, Term) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


class SumTerm:
    """sum over j from lo(k) to hi(k) of coeff × (-1)^(sign) × basis[index]."""

    __slots__ = ("lo", "hi", "coeff", "sign", "index")

    def __init__(self, lo: LinearForm, hi: LinearForm, coeff, sign, index: LinearForm):
        if lo.uses_j or hi.uses_j:
            raise NonIntegerIndexError("summation bounds cannot involve j")
        self.lo = lo
        self.hi = hi
        self.coeff, self.sign = _normalize_sign(Fraction(coeff), sign)
        self.index = index

    def evaluate(self, field, k):
        lo = self.lo.eval_int(k=k)
        hi = self.hi.eval_int(k=k)
        pairs = []
        for j in range(lo, hi + 1):
            idx = self.index.eval_int(j=j, k=k)
            value = self.coeff
            if self.sign is not None and self.sign.eval_int(j=j, k=k) % 2:
                value = -value
            pairs.append((idx, field.from_fraction(value)))
        return pairs

    def _key(self):
        return ("sum", self.lo, self.hi, self.coeff, self.sign, self.index)

    def __eq__(self, other):
        return isinstance(other, SumTerm) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


def _term_sort_key(term):
    """Order terms by their leading (smallest-index-at-large-k) affine form."""
    if isinstance(term, SumTerm):
        lead = term.index.substitute_j(term.lo if term.index.j >= 0 else term.hi)
    else:
        lead = term.index
    return (lead.k, lead.const)


class FamilyRule:
    """Images for the residue class i = modulus*k + offset, k >= k_min."""

    __slots__ = ("modulus", "offset", "k_min", "terms")

    def __init__(self, modulus: int, offset: int, k_min: int, terms):
        if modulus < 1:
            raise ValueError("family modulus must be >= 1")
        self.modulus = modulus
        self.offset = offset
        self.k_min = k_min
        self.terms = tuple(sorted(terms, key=_term_sort_key))

    @property
    def start_index(self) -> int:
        return self.modulus * self.k_min + self.offset

    def match(self, i: int):
        """The unique k >= k_min with i = modulus*k + offset, else None."""
        delta = i - self.offset
        if delta % self.modulus:
            return None
        k = delta // self.modulus
        return k if k >= self.k_min else None

    def describe(self) -> str:
        return f"i = {self.modulus}*k + {self.offset}, k >= {self.k_min}"

    def _key(self):
        return (self.modulus, self.offset, self.k_min, self.terms)

    def __eq__(self, other):
        return isinstance(other, FamilyRule) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


class OperatorBase:
    """Shared application interface: apply_basis(i) plus its linear extension."""

    __slots__ = ()

    def apply_basis(self, i: int) -> SparseVector:  # pragma: no cover - abstract
        raise NotImplementedError

    @property
    def family_moduli(self):
        """Moduli of the residue-class rules involved (probe-size heuristic)."""
        return []

    def apply(self, x: SparseVector) -> SparseVector:
        require_same_field(self.field, x.field)
        field = self.field
        acc = {}
        for i, c in x.items():
            for idx, value in self.apply_basis(i).items():
                total = field.add(acc.get(idx, field.zero), field.mul(c, value))
                if total == field.zero:
                    acc.pop(idx, None)
                else:
                    acc[idx] = total
        return SparseVector(field, acc)


class RuleOperator(OperatorBase):
    __slots__ = ("name", "basis_name", "field", "reach", "exceptional_rules", "family_rules", "_cache")

    def __init__(self, name, basis_name, field, reach, exceptional_rules, family_rules):
        self.name = name
        self.basis_name = basis_name
        self.field = field
        if not isinstance(reach, int) or reach < 0:
            raise BadReachError(f"reach must be an integer >= 0, got {reach!r}")
        self.reach = reach
        self.exceptional_rules = dict(sorted(exceptional_rules.items()))
        self.family_rules = tuple(
            sorted(family_rules, key=lambda fr: (fr.modulus, fr.offset % fr.modulus, fr.k_min))
        )
        self._cache = {}
        self._validate()

    # -- construction-time validation -------------------------------------

    def _validate(self):
        for i, image in self.exceptional_rules.items():
            if not isinstance(i, int) or i < 1:
                raise NonIntegerIndexError(f"exceptional index {i!r} is not a positive integer")
            require_same_field(self.field, image.field)
            top = image.max_index()
            if top is not None and top > i + self.reach:
                raise BadReachError(
                    f"image of index {i} reaches {top} > {i} + reach {self.reach}"
                )
        for rule in self.family_rules:
            if rule.start_index < 1:
                raise NonIntegerIndexError(
                    f"family '{rule.describe()}' starts at non-positive index {rule.start_index}"
                )
            self._validate_family_terms(rule)
        self._check_partition()

    def _validate_family_terms(self, rule: FamilyRule):
        m, k0 = rule.modulus, rule.k_min
        for term in rule.terms:
            if isinstance(term, Term):
                # Integrality and positivity, symbolically: an affine index
                # with negative k-slope eventually drops below 1.
                if term.index.k.denominator != 1 or term.index.const.denominator != 1:
                    for k in range(k0, k0 + GUARD + 1):
                        term.index.eval_int(k=k)
                if term.index.k < 0:
                    raise NonIntegerIndexError(
                        f"index {self._form_text(term.index)} in '{rule.describe()}' "
                        "is eventually non-positive"
                    )
                first = term.index.eval_int(k=k0)
                if first < 1:
                    raise NonIntegerIndexError(
                        f"index {self._form_text(term.index)} in '{rule.describe()}' "
                        f"evaluates to {first} < 1 at k = {k0}"
                    )
                # Static reach check: index(k) - (m*k + offset) grows with
                # slope index.k - m; positive slope means eventual violation.
                slope = term.index.k - m
                if slope > 0 or term.index.eval_int(k=k0) > rule.start_index + self.reach:
                    raise BadReachError(
                        f"term index {self._form_text(term.index)} violates reach "
                        f"{self.reach} for family '{rule.describe()}'"
                    )
            else:
                for k in range(k0, k0 + GUARD + 1):
                    lo = term.lo.eval_int(k=k)
                    hi = term.hi.eval_int(k=k)
                    for j in range(lo, hi + 1):
                        idx = term.index.eval_int(j=j, k=k)
                        if idx < 1:
                            raise NonIntegerIndexError(
                                f"sum index evaluates to {idx} < 1 at k = {k}, j = {j} "
                                f"in '{rule.describe()}'"
                            )

    @staticmethod
    def _form_text(form: LinearForm) -> str:
        parts = []
        if form.k:
            parts.append(f"{form.k}*k" if form.k != 1 else "k")
        if form.const or not parts:
            parts.append(str(form.const))
        return " + ".join(parts)

    def _check_partition(self):
        moduli = [rule.modulus for rule in self.family_rules]
        period = 1
        for m in moduli:
            period = period * m // gcd(period, m)
        threshold = max(
            [i for i in self.exceptional_rules] + [r.start_index for r in self.family_rules],
            default=0,
        )
        for i in range(1, threshold + 2 * period + 1):
            owners = []
            if i in self.exceptional_rules:
                owners.append(f"exceptional i = {i}")
            for rule in self.family_rules:
                if rule.match(i) is not None:
                    owners.append(f"family '{rule.describe()}'")
            if not owners:
                raise GapError(f"index {i} is covered by no rule")
            if len(owners) > 1:
                raise OverlapError(f"index {i} is covered by {owners[0]} and {owners[1]}")

    # -- evaluation --------------------------------------------------------

    @property
    def family_moduli(self):
        return sorted({rule.modulus for rule in self.family_rules})

    def apply_basis(self, i: int) -> SparseVector:
        cached = self._cache.get(i)
        if cached is not None:
            return cached
        if not isinstance(i, int) or i < 1:
            raise NonIntegerIndexError(f"basis index {i!r} is not a positive integer")
        image = self.exceptional_rules.get(i)
        if image is None:
            image = self._evaluate_family(i)
        top = image.max_index()
        if top is not None and top > i + self.reach:
            raise ReachViolationError(
                f"{self.name}: image of index {i} reaches {top} > {i} + reach {self.reach}"
            )
        self._cache[i] = image
        return image

    def _evaluate_family(self, i: int) -> SparseVector:
        field = self.field
        for rule in self.family_rules:
            k = rule.match(i)
            if k is None:
                continue
            acc = {}
            for term in rule.terms:
                for idx, value in term.evaluate(field, k):
                    if idx < 1:
                        raise NonIntegerIndexError(
                            f"{self.name}: rule for index {i} produced index {idx} < 1"
                        )
                    total = field.add(acc.get(idx, field.zero), value)
                    if total == field.zero:
                        acc.pop(idx, None)
                    else:
                        acc[idx] = total
            return SparseVector(field, acc)
        raise UncoveredIndexError(f"{self.name}: no rule matches index {i}")

    def _key(self):
        return (
            self.basis_name,
            self.field,
            self.reach,
            tuple(self.exceptional_rules.items()),
            self.family_rules,
        )

    def __eq__(self, other):
        if not isinstance(other, RuleOperator):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (
            f"RuleOperator({self.name!r}, basis={self.basis_name!r}, reach={self.reach}, "
            f"{len(self.exceptional_rules)} exceptional + {len(self.family_rules)} family rules)"
        )


class SumOperator(OperatorBase):
    """Lazy pointwise sum of two operators over the same basis."""

    __slots__ = ("left", "right", "name", "basis_name", "field", "reach", "_cache")

    def __init__(self, left, right, name=None):
        if left.basis_name != right.basis_name:
            raise BasisMismatchError(
                f"cannot add operators over bases {left.basis_name!r} and {right.basis_name!r}"
            )
        require_same_field(left.field, right.field)
        self.left = left
        self.right = right
        self.name = name or f"({left.name} + {right.name})"
        self.basis_name = left.basis_name
        self.field = left.field
        self.reach = max(left.reach, right.reach)
        self._cache = {}

    def apply_basis(self, i: int) -> SparseVector:
        cached = self._cache.get(i)
        if cached is None:
            cached = self._cache[i] = self.left.apply_basis(i) + self.right.apply_basis(i)
        return cached

    @property
    def family_moduli(self):
        return sorted(set(self.left.family_moduli) | set(self.right.family_moduli))


class ComposedOperator(OperatorBase):
    """Lazy composition outer∘inner over the same basis."""

    __slots__ = ("outer", "inner", "name", "basis_name", "field", "reach", "_cache")

    def __init__(self, outer, inner, name=None):
        if outer.basis_name != inner.basis_name:
            raise BasisMismatchError(
                f"cannot compose operators over bases {outer.basis_name!r} and {inner.basis_name!r}"
            )
        require_same_field(outer.field, inner.field)
        self.outer = outer
        self.inner = inner
        self.name = name or f"({outer.name} . {inner.name})"
        self.basis_name = outer.basis_name
        self.field = outer.field
        self.reach = outer.reach + inner.reach
        self._cache = {}

    def apply_basis(self, i: int) -> SparseVector:
        cached = self._cache.get(i)
        if cached is None:
            cached = self._cache[i] = self.outer.apply(self.inner.apply_basis(i))
        return cached

    @property
    def family_moduli(self):
        return sorted(set(self.outer.family_moduli) | set(self.inner.family_moduli))


class ShiftedRestriction(OperatorBase):
    """An operator restricted to span{basis_(offset+1), ...}, re-indexed to 1.

    Basis vector i of the view corresponds to basis vector i + offset of the
    underlying operator; images must stay inside the restricted span.
    """

    __slots__ = ("inner", "offset", "name", "basis_name", "field", "reach", "_cache")

    def __init__(self, inner, offset: int, basis_name, name=None):
        if offset < 0:
            raise ValueError("offset must be >= 0")
        self.inner = inner
        self.offset = offset
        self.name = name or f"{inner.name}|[{offset + 1}..]"
        self.basis_name = basis_name
        self.field = inner.field
        self.reach = inner.reach
        self._cache = {}

    def apply_basis(self, i: int) -> SparseVector:
        cached = self._cache.get(i)
        if cached is not None:
            return cached
        image = self.inner.apply_basis(i + self.offset)
        low = image.min_index()
        if low is not None and low <= self.offset:
            raise NotInvariantError(
                f"{self.inner.name}: image of index {i + self.offset} has a component on "
                f"index {low} <= {self.offset}, outside the restricted span"
            )
        cached = self._cache[i] = image.shift(-self.offset)
        return cached

    @property
    def family_moduli(self):
        return self.inner.family_moduli


class FunctionOperator(OperatorBase):
    """Operator view given directly by a basis-image function (plumbing)."""

    __slots__ = ("fn", "name", "basis_name", "field", "reach", "_cache")

    def __init__(self, field, basis_name, reach, fn, name):
        self.field = field
        self.basis_name = basis_name
        self.reach = reach
        self.fn = fn
        self.name = name
        self._cache = {}

    def apply_basis(self, i: int) -> SparseVector:
        cached = self._cache.get(i)
        if cached is None:
            cached = self._cache[i] = self.fn(i)
        return cached


def op_add(a, b, name=None) -> SumOperator:
    return SumOperator(a, b, name=name)


def op_compose(outer, inner, name=None) -> ComposedOperator:
    return ComposedOperator(outer, inner, name=name)


def power_apply(op, p: int, x: SparseVector) -> SparseVector:
    if p < 0:
        raise ValueError("power must be >= 0")
    result = x
    for _ in range(p):
        result = op.apply(result)
    return result


def window_matrix(op, rows: int, cols: int) -> FiniteMatrix:
    """Dense (rows × cols) block: entry (r, c) = coeff of r in apply_basis(c)."""
    if rows < 1 or cols < 1:
        raise ValueError("window dimensions must be >= 1")
    field = op.field
    grid = [[field.zero] * cols for _ in range(rows)]
    for c in range(1, cols + 1):
        for r, value in op.apply_basis(c).items():
            if r <= rows:
                grid[r - 1][c - 1] = value
    return FiniteMatrix(field, grid, ncols=cols)


def identity_operator(field, basis_name="v") -> FunctionOperator:
    return FunctionOperator(
        field, basis_name, 0, lambda i: SparseVector.basis(field, i), "identity"
    )


def zero_operator(field, basis_name="v") -> FunctionOperator:
    return FunctionOperator(field, basis_name, 0, lambda i: SparseVector.zero(field), "zero")


def finite_operator(matrix: FiniteMatrix, basis_name="v", name="embedded") -> RuleOperator:
    """Embed a d×d matrix as an operator acting by 0 on basis indices > d.

    The result is a genuine rule operator: d exceptional rules (the columns)
    plus a single zero family covering the cofinite tail.
    """
    if not matrix.is_square:
        raise ValueError("only square matrices embed as endomorphisms")
    d = matrix.nrows
    exceptional = {i: matrix.column(i) for i in range(1, d + 1)}
    reach = 0
    for i, image in exceptional.items():
        top = image.max_index()
        if top is not None:
            reach = max(reach, top - i)
    tail = FamilyRule(1, d, 1, ())
    return RuleOperator(name, basis_name, matrix.field, reach, exceptional, [tail])
