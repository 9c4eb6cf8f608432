"""The e↔v basis change and conjugation of e-basis operators into v-coordinates.

Forward direction (each v_j as a combination of e's) is itself a rule
operator:

    v_1 = e_2,   v_{2k} = e_{2k} + e_{2k+2},   v_{2k+1} = e_{2k-1} + e_{2k+2}

Backward direction (each e_j as a combination of v's) is the finite recursion

    e_2 = v_1,   e_{2k+2} = v_{2k} - e_{2k},   e_{2k-1} = v_{2k+1} - e_{2k+2}

computed iteratively with a cache (the support of e_j grows linearly with j,
but is always finite and exact).
"""

from __future__ import annotations

from .fields import require_same_field
from .operators import FamilyRule, LinearForm, OperatorBase, RuleOperator, Term
from .vectors import SparseVector

_DIRECTIONS = ("e->v", "v->e")


class BasisChange:
    __slots__ = ("field", "forward", "_e_in_v")

    def __init__(self, field):
        self.field = field
        one = 1
        self.forward = RuleOperator(
            "v_in_e",
            "v",
            field,
            2,
            {1: SparseVector.basis(field, 2)},
            [
                FamilyRule(
                    2, 0, 1,
                    [Term(one, None, LinearForm(k=2)), Term(one, None, LinearForm(k=2, const=2))],
                ),
                FamilyRule(
                    2, 1, 1,
                    [Term(one, None, LinearForm(k=2, const=-1)),
                     Term(one, None, LinearForm(k=2, const=2))],
                ),
            ],
        )
        self._e_in_v = {}

    def v_in_e(self, j: int) -> SparseVector:
        """Coordinates of v_j in the e-basis."""
        return self.forward.apply_basis(j)

    def e_in_v(self, j: int) -> SparseVector:
        """Coordinates of e_j in the v-basis."""
        cached = self._e_in_v.get(j)
        if cached is not None:
            return cached
        if j < 1:
            raise ValueError(f"basis index {j} must be >= 1")
        field = self.field
        if j % 2 == 0:
            # Fill the even chain e_2, e_4, ..., e_j iteratively.
            top = max((m for m in self._e_in_v if m % 2 == 0), default=0)
            if top == 0:
                self._e_in_v[2] = SparseVector.basis(field, 1)
                top = 2
            for even in range(top + 2, j + 1, 2):
                self._e_in_v[even] = (
                    SparseVector.basis(field, even - 2) - self._e_in_v[even - 2]
                )
            return self._e_in_v[j]
        if j == 1:
            result = SparseVector.basis(field, 3) - self.e_in_v(4)
        else:
            # e_{2k-1} = v_{2k+1} - e_{2k+2} with 2k+1 = j+2.
            result = SparseVector.basis(field, j + 2) - self.e_in_v(j + 3)
        self._e_in_v[j] = result
        return result

    def change_basis_vector(self, x: SparseVector, direction: str) -> SparseVector:
        """Re-express x; direction "e->v" or "v->e" names source -> target."""
        require_same_field(self.field, x.field)
        if direction not in _DIRECTIONS:
            raise ValueError(f"direction must be one of {_DIRECTIONS}, got {direction!r}")
        image_of = self.e_in_v if direction == "e->v" else self.v_in_e
        field = self.field
        acc = {}
        for j, c in x.items():
            for idx, value in image_of(j).items():
                total = field.add(acc.get(idx, field.zero), field.mul(c, value))
                if total == field.zero:
                    acc.pop(idx, None)
                else:
                    acc[idx] = total
        return SparseVector(field, acc)


class ConjugatedOperator(OperatorBase):
    """View of an e-basis operator in v-coordinates: (e->v) ∘ op ∘ (v->e)."""

    __slots__ = ("inner", "bc", "name", "basis_name", "field", "reach", "_cache")

    def __init__(self, inner, bc: BasisChange, name=None, basis_name="v"):
        if inner.basis_name != "e":
            raise ValueError(f"conjugation expects an e-basis operator, got {inner.basis_name!r}")
        require_same_field(inner.field, bc.field)
        self.inner = inner
        self.bc = bc
        self.name = name or f"conj({inner.name})"
        self.basis_name = basis_name
        self.field = inner.field
        # Forward and backward basis changes each widen support by at most 2.
        self.reach = inner.reach + 4
        self._cache = {}

    def apply_basis(self, i: int) -> SparseVector:
        cached = self._cache.get(i)
        if cached is None:
            in_e = self.bc.v_in_e(i)
            cached = self._cache[i] = self.bc.change_basis_vector(
                self.inner.apply(in_e), "e->v"
            )
        return cached

    @property
    def family_moduli(self):
        inner = getattr(self.inner, "family_moduli", [])
        return sorted(set(inner) | {2})


def conjugate(op, bc: BasisChange, name=None) -> ConjugatedOperator:
    return ConjugatedOperator(op, bc, name=name)
