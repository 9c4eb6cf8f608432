"""Rule-defined operators: evaluation, validation, and lazy combinations."""

from fractions import Fraction

import pytest

from fpt.fields import GF, QQ, FieldMismatchError
from fpt.matrices import FiniteMatrix
from fpt.operators import (
    BadReachError,
    BasisMismatchError,
    FamilyRule,
    FunctionOperator,
    GapError,
    LinearForm,
    NonIntegerIndexError,
    OverlapError,
    ReachViolationError,
    RuleOperator,
    ShiftedRestriction,
    SumTerm,
    Term,
    finite_operator,
    identity_operator,
    op_add,
    op_compose,
    power_apply,
    window_matrix,
    zero_operator,
)
from fpt.spans import NotInvariantError
from fpt.vectors import SparseVector


def lf(j=0, k=0, const=0):
    return LinearForm(j=j, k=k, const=const)


def qvec(pairs):
    return SparseVector(QQ, {i: Fraction(c) for i, c in pairs})


def shift_up(field=QQ, amount=1):
    """v_i -> v_{i+amount}: total single-family operator."""
    return RuleOperator(
        name=f"up{amount}", basis_name="v", field=field, reach=amount,
        exceptional_rules={},
        family_rules=[FamilyRule(1, 0, 1, [Term(1, None, lf(k=1, const=amount))])],
    )


def down_shift(field=QQ):
    """v_1 -> 0, v_i -> v_{i-1}: exceptional head plus one family."""
    return RuleOperator(
        name="down", basis_name="v", field=field, reach=0,
        exceptional_rules={1: SparseVector.zero(field)},
        family_rules=[FamilyRule(1, 1, 1, [Term(1, None, lf(k=1))])],
    )


class TestEvaluation:
    def test_family_and_exceptional_dispatch(self):
        op = down_shift()
        assert op.apply_basis(1).is_zero
        assert op.apply_basis(2) == qvec([(1, 1)])
        assert op.apply_basis(100) == qvec([(99, 1)])

    def test_apply_is_linear(self):
        op = down_shift()
        x = qvec([(2, 3), (5, -7)])
        assert op.apply(x) == qvec([(1, 3), (4, -7)])

    def test_apply_on_zero_vector(self):
        assert down_shift().apply(SparseVector.zero(QQ)).is_zero

    def test_sum_term_evaluation_and_alternating_sign(self):
        # i = k -> sum(j = 1 .. k, (-1)^(j), v[j])
        op = RuleOperator(
            name="alt", basis_name="v", field=QQ, reach=0,
            exceptional_rules={},
            family_rules=[FamilyRule(1, 0, 1, [SumTerm(lf(const=1), lf(k=1), 1, lf(j=1), lf(j=1))])],
        )
        assert op.apply_basis(3) == qvec([(1, -1), (2, 1), (3, -1)])

    def test_empty_sum_range_contributes_nothing(self):
        # sum(j = 2 .. 1, 1, v[j]) is empty at k = 1
        op = RuleOperator(
            name="empty", basis_name="v", field=QQ, reach=0,
            exceptional_rules={},
            family_rules=[FamilyRule(1, 0, 1, [SumTerm(lf(const=2), lf(k=1), 1, None, lf(j=1))])],
        )
        assert op.apply_basis(1).is_zero
        assert op.apply_basis(3) == qvec([(2, 1), (3, 1)])

    def test_coefficients_cancel_to_zero_image(self):
        op = RuleOperator(
            name="cancel", basis_name="v", field=QQ, reach=0,
            exceptional_rules={},
            family_rules=[FamilyRule(1, 0, 1, [
                Term(1, None, lf(k=1)),
                Term(-1, None, lf(k=1)),
            ])],
        )
        assert op.apply_basis(5).is_zero

    def test_bad_basis_index(self):
        op = down_shift()
        with pytest.raises(NonIntegerIndexError):
            op.apply_basis(0)

    def test_cache_returns_equal_images(self):
        op = shift_up()
        first = op.apply_basis(3)
        assert op.apply_basis(3) is first

    def test_equality_ignores_name(self):
        a = shift_up()
        b = shift_up()
        b.name = "renamed"
        assert a == b
        assert hash(a) == hash(b)
        assert a != down_shift()


class TestValidation:
    def test_gap_detected(self):
        with pytest.raises(GapError, match="index 1"):
            RuleOperator("gappy", "v", QQ, 1, {},
                         [FamilyRule(2, 0, 1, [Term(1, None, lf(k=2, const=1))])])

    def test_overlap_between_family_and_exceptional(self):
        with pytest.raises(OverlapError, match="exceptional i = 2"):
            RuleOperator("clash", "v", QQ, 1, {2: qvec([(1, 1)])},
                         [FamilyRule(1, 0, 1, [Term(1, None, lf(k=1))])])

    def test_overlap_between_families(self):
        with pytest.raises(OverlapError):
            RuleOperator("clash2", "v", QQ, 1, {},
                         [FamilyRule(1, 0, 1, [Term(1, None, lf(k=1))]),
                          FamilyRule(2, 0, 1, [Term(1, None, lf(k=2))])])

    def test_negative_or_fractional_reach_rejected(self):
        with pytest.raises(BadReachError):
            RuleOperator("bad", "v", QQ, -1, {}, [FamilyRule(1, 0, 1, [])])
        with pytest.raises(BadReachError):
            RuleOperator("bad", "v", QQ, Fraction(1, 2), {}, [FamilyRule(1, 0, 1, [])])

    def test_exceptional_reach_enforced_statically(self):
        with pytest.raises(BadReachError, match="reaches 5"):
            RuleOperator("far", "v", QQ, 1, {1: qvec([(5, 1)])},
                         [FamilyRule(1, 1, 1, [])])

    def test_family_reach_enforced_statically(self):
        # index k+2 against reach 1 fails at every k
        with pytest.raises(BadReachError):
            RuleOperator("far2", "v", QQ, 1, {},
                         [FamilyRule(1, 0, 1, [Term(1, None, lf(k=1, const=2))])])
        # slope violation: index 2k against family 1k grows without bound
        with pytest.raises(BadReachError):
            RuleOperator("slope", "v", QQ, 3, {},
                         [FamilyRule(1, 0, 1, [Term(1, None, lf(k=2))])])

    def test_fractional_index_rejected(self):
        # index k/2 is fractional at odd k
        with pytest.raises(NonIntegerIndexError):
            RuleOperator("halves", "v", QQ, 0, {},
                         [FamilyRule(1, 0, 1, [Term(1, None, LinearForm(k=Fraction(1, 2)))])])

    def test_eventually_nonpositive_index_rejected(self):
        with pytest.raises(NonIntegerIndexError, match="non-positive"):
            RuleOperator("fall", "v", QQ, 0, {},
                         [FamilyRule(1, 0, 1, [Term(1, None, lf(k=-1, const=100))])])

    def test_index_below_one_at_start_rejected(self):
        # k - 1 evaluates to 0 at k = 1
        with pytest.raises(NonIntegerIndexError):
            RuleOperator("low", "v", QQ, 0, {},
                         [FamilyRule(1, 0, 1, [Term(1, None, lf(k=1, const=-1))])])

    def test_sum_index_below_one_rejected(self):
        # sum(j = 1 .. k, 1, v[j - 5]) dips below 1 within the guard range
        with pytest.raises(NonIntegerIndexError, match="sum index"):
            RuleOperator("dip", "v", QQ, 0, {},
                         [FamilyRule(1, 0, 1, [SumTerm(lf(const=1), lf(k=1), 1, None,
                                                       lf(j=1, const=-5))])])

    def test_runtime_reach_violation_through_sum(self):
        # sums bypass the static reach check; the evaluator catches the breach
        op = RuleOperator(
            "sneaky", "v", QQ, 0, {},
            [FamilyRule(1, 0, 1, [SumTerm(lf(k=1, const=1), lf(k=1, const=1), 1, None, lf(j=1))])],
        )
        with pytest.raises(ReachViolationError):
            op.apply_basis(1)

    def test_exceptional_index_must_be_positive_integer(self):
        with pytest.raises(NonIntegerIndexError):
            RuleOperator("neg", "v", QQ, 0, {0: qvec([(1, 1)])},
                         [FamilyRule(1, 1, 1, [Term(1, None, lf(k=1))])])

    def test_family_start_below_one_rejected(self):
        with pytest.raises(NonIntegerIndexError, match="starts at"):
            RuleOperator("zero-start", "v", QQ, 0, {},
                         [FamilyRule(1, 0, 0, [Term(1, None, lf(k=1, const=1))])])

    def test_exceptional_image_field_checked(self):
        with pytest.raises(FieldMismatchError):
            RuleOperator("mix", "v", QQ, 0,
                         {1: SparseVector.basis(GF(2), 1)},
                         [FamilyRule(1, 1, 1, [Term(1, None, lf(k=1))])])


class TestCombinations:
    def test_sum_is_pointwise(self):
        a, b = shift_up(), down_shift()
        s = op_add(a, b)
        # (up + down)(v_3) = v_4 + v_2
        assert s.apply_basis(3) == qvec([(2, 1), (4, 1)])
        assert s.reach == 1

    def test_composition_order(self):
        up, down = shift_up(), down_shift()
        # down ∘ up = identity on every basis vector
        assert op_compose(down, up).apply_basis(1) == qvec([(1, 1)])
        # up ∘ down kills v_1
        assert op_compose(up, down).apply_basis(1).is_zero
        assert op_compose(up, down).reach == 1

    def test_basis_mismatch_rejected(self):
        e_op = RuleOperator("e-side", "e", QQ, 0, {},
                            [FamilyRule(1, 0, 1, [Term(1, None, lf(k=1))])])
        with pytest.raises(BasisMismatchError):
            op_add(e_op, shift_up())
        with pytest.raises(BasisMismatchError):
            op_compose(e_op, shift_up())

    def test_field_mismatch_rejected(self):
        with pytest.raises(FieldMismatchError):
            op_add(shift_up(QQ), shift_up(GF(2)))

    def test_power_apply(self):
        up = shift_up()
        x = qvec([(1, 1)])
        assert power_apply(up, 0, x) == x
        assert power_apply(up, 3, x) == qvec([(4, 1)])
        with pytest.raises(ValueError):
            power_apply(up, -1, x)

    def test_identity_and_zero(self):
        ident = identity_operator(QQ)
        zero = zero_operator(QQ)
        x = qvec([(2, 5)])
        assert ident.apply(x) == x
        assert zero.apply(x).is_zero


class TestShiftedRestriction:
    def test_reindexing(self):
        up = shift_up()
        view = ShiftedRestriction(up, 2, "u")
        # u_1 = v_3 maps to v_4 = u_2
        assert view.apply_basis(1) == qvec([(2, 1)])
        assert view.basis_name == "u"

    def test_invariance_enforced(self):
        down = down_shift()
        view = ShiftedRestriction(down, 2, "u")
        # u_1 = v_3 maps to v_2, outside span{v_3, ...}
        with pytest.raises(NotInvariantError):
            view.apply_basis(1)

    def test_negative_offset_rejected(self):
        with pytest.raises(ValueError):
            ShiftedRestriction(shift_up(), -1, "u")

    def test_zero_offset_is_transparent(self):
        view = ShiftedRestriction(down_shift(), 0, "w")
        assert view.apply_basis(5) == qvec([(4, 1)])


class TestWindowsAndEmbeddings:
    def test_window_matrix_columns_are_images(self):
        m = window_matrix(down_shift(), 4, 4)
        assert m == FiniteMatrix.from_rows(QQ, [
            [0, 1, 0, 0],
            [0, 0, 1, 0],
            [0, 0, 0, 1],
            [0, 0, 0, 0],
        ])

    def test_window_matrix_truncates_high_components(self):
        m = window_matrix(shift_up(), 3, 3)
        # v_3 -> v_4 falls outside a 3-row window
        assert m.column(3).is_zero

    def test_finite_operator_embedding(self):
        block = FiniteMatrix.from_rows(QQ, [[2, 1], [-1, -1]])
        op = finite_operator(block)
        assert op.apply_basis(1) == qvec([(1, 2), (2, -1)])
        assert op.apply_basis(2) == qvec([(1, 1), (2, -1)])
        assert op.apply_basis(3).is_zero
        assert op.apply_basis(50).is_zero
        assert window_matrix(op, 2, 2) == block

    def test_function_operator_wraps_callable(self):
        op = FunctionOperator(QQ, "v", 1, lambda i: qvec([(i + 1, 1)]), "fn-up")
        assert op.apply_basis(4) == qvec([(5, 1)])


class TestFamilyRule:
    def test_match_and_start(self):
        rule = FamilyRule(4, 3, 1, [])
        assert rule.start_index == 7
        assert rule.match(7) == 1
        assert rule.match(11) == 2
        assert rule.match(8) is None
        assert rule.match(3) is None  # below k_min

    def test_describe_mentions_pattern(self):
        text = FamilyRule(4, 3, 1, []).describe()
        assert "4" in text and "3" in text

    def test_bad_modulus(self):
        with pytest.raises(ValueError):
            FamilyRule(0, 0, 1, [])

    def test_sign_normalization_collapses_parity(self):
        # (-1)^(2k + 3) is the constant -1
        t1 = Term(1, lf(k=2, const=3), lf(k=1))
        t2 = Term(-1, None, lf(k=1))
        assert t1 == t2
        # (-1)^(3k + 1) == -(-1)^(k)
        t3 = Term(1, lf(k=3, const=1), lf(k=1))
        t4 = Term(-1, lf(k=1), lf(k=1))
        assert t3 == t4

    def test_plain_term_cannot_bind_j(self):
        with pytest.raises(NonIntegerIndexError):
            Term(1, None, lf(j=1))
