"""Tests for the stabilized-image trace engine and the randomized trace axioms."""

import pytest

from fpt.dsl import parse
from fpt.fields import GF, QQ
from fpt.matrices import FiniteMatrix
from fpt.operators import (
    FunctionOperator,
    ShiftedRestriction,
    finite_operator,
    op_add,
    zero_operator,
)
from fpt.repro import build_theta1_e, build_theta1_v, build_theta2
from fpt.tate import (
    ASTClaim,
    NotStabilizedError,
    axiom_suite,
    check_nilpotent,
    default_probe,
    find_trace,
    image_chain,
    verify_ast,
)
from fpt.vectors import SparseVector


def parse_one(text, field=QQ):
    (op,) = parse(text, field)
    return op


SHIFT_UP = (
    "operator shift over v {\n"
    "  reach 1;\n"
    "  case i = k, k >= 1: v[k + 1];\n"
    "}\n"
)


@pytest.fixture(scope="module")
def theta1_v():
    return build_theta1_v(QQ)


@pytest.fixture(scope="module")
def theta2():
    return build_theta2(QQ)


@pytest.fixture(scope="module")
def phi(theta1_v, theta2):
    return op_add(theta1_v, theta2, name="phi")


class TestDefaultProbe:
    def test_bundled_operators(self, theta1_v, theta2, phi):
        assert default_probe(build_theta1_e(QQ)) == 4
        assert default_probe(theta1_v) == 16
        assert default_probe(theta2) == 32
        assert default_probe(phi) == 32

    def test_grows_with_reach_and_period(self):
        shift = parse_one(SHIFT_UP)
        assert default_probe(shift) == 4
        wide = parse_one(
            "operator wide over v {\n"
            "  reach 7;\n"
            "  case i = 3*k, k >= 1: v[3*k - 2];\n"
            "  case i = 3*k + 1, k >= 0: 0;\n"
            "  case i = 3*k + 2, k >= 0: 0;\n"
            "}\n"
        )
        assert default_probe(wide) == 2 * 3 * 8


class TestImageChain:
    def test_known_dimension_profiles(self, theta1_v, theta2, phi):
        assert [s.dim for s in image_chain(phi, 4, 64)] == [48, 33, 17, 2]
        assert [s.dim for s in image_chain(theta1_v, 2, 64)] == [33, 0]
        assert [s.dim for s in image_chain(theta2, 4, 64)] == [48, 32, 17, 2]

    def test_shift_never_shrinks(self):
        shift = parse_one(SHIFT_UP)
        assert [s.dim for s in image_chain(shift, 3, 8)] == [8, 8, 8]

    def test_rejects_non_positive_arguments(self, theta1_v):
        with pytest.raises(ValueError):
            image_chain(theta1_v, 0, 8)
        with pytest.raises(ValueError):
            image_chain(theta1_v, 2, 0)


class TestFindTrace:
    def test_phi_certificate(self, phi):
        cert = find_trace(phi)
        assert cert.operator_name == "phi"
        assert cert.window == 64
        assert cert.probe == 32
        assert cert.power == 4
        assert cert.chain_dims == [48, 33, 17, 2]
        assert cert.core.dim == 2
        assert cert.core_matrix.to_str_rows() == [["2", "1"], ["-1", "-1"]]
        assert cert.core_matrix.det() == QQ.from_int(-1)
        assert cert.trace == QQ.one
        assert cert.status == "window-verified"

    def test_theta1_certificate(self, theta1_v):
        cert = find_trace(theta1_v)
        assert cert.probe == 16
        assert cert.power == 2
        assert cert.chain_dims == [33, 0]
        assert cert.core.dim == 0
        assert cert.trace == QQ.zero

    def test_theta2_certificate(self, theta2):
        cert = find_trace(theta2)
        assert cert.probe == 32
        assert cert.power == 4
        assert cert.chain_dims == [48, 32, 17, 2]
        assert cert.core.dim == 0
        assert cert.trace == QQ.zero

    @pytest.mark.parametrize("p", [2, 5])
    def test_traces_reduce_mod_p(self, p):
        field = GF(p)
        phi_p = op_add(build_theta1_v(field), build_theta2(field), name="phi")
        assert find_trace(build_theta1_v(field)).trace == field.zero
        assert find_trace(build_theta2(field)).trace == field.zero
        cert = find_trace(phi_p)
        assert cert.trace == field.one
        assert cert.power == 4

    def test_certificates_cohere_under_doubled_parameters(self, theta1_v, theta2, phi):
        for op in (theta1_v, theta2, phi):
            base = find_trace(op)
            doubled = find_trace(op, window=2 * base.window, probe=2 * base.probe)
            assert doubled.trace == base.trace
            assert doubled.power == base.power
            assert doubled.core.dim == base.core.dim

    def test_zero_operator(self):
        cert = find_trace(zero_operator(QQ), window=8, probe=4)
        assert cert.power == 1
        assert cert.chain_dims == [0]
        assert cert.core.dim == 0
        assert cert.trace == QQ.zero
        assert cert.core_matrix.nrows == 0

    def test_embedded_matrix_recovers_ordinary_trace(self):
        matrix = FiniteMatrix.from_rows(QQ, [[3, 1, 0], [0, 2, 0], [5, 5, 7]])
        op = finite_operator(matrix)
        cert = find_trace(op, max_power=5, window=7, probe=4)
        assert cert.trace == QQ.from_int(12)
        assert cert.core.dim == 3

    def test_json_shape(self, phi):
        data = find_trace(phi).to_json_dict()
        assert data == {
            "operator": "phi",
            "field": "rationals",
            "window": 64,
            "probe": 32,
            "power": 4,
            "chain_dims": [48, 33, 17, 2],
            "core_basis": [[[1, "1"]], [[2, "1"]]],
            "core_matrix": [["2", "1"], ["-1", "-1"]],
            "trace": "1",
            "status": "window-verified",
            "failures": [],
        }

    def test_rejects_non_positive_arguments(self, theta1_v):
        with pytest.raises(ValueError):
            find_trace(theta1_v, max_power=0)
        with pytest.raises(ValueError):
            find_trace(theta1_v, window=0)
        with pytest.raises(ValueError):
            find_trace(theta1_v, probe=0)


class TestNotStabilized:
    def test_shift_fails_condition_a_at_every_power(self):
        shift = parse_one(SHIFT_UP)
        with pytest.raises(NotStabilizedError) as excinfo:
            find_trace(shift, max_power=3, window=8, probe=4)
        err = excinfo.value
        assert err.operator_name == "shift"
        assert err.max_power == 3
        assert err.window == 8
        assert err.probe == 4
        assert err.attempts == tuple(
            (n, "window span (dim 8) != probe span (dim 12); condition (a) failed")
            for n in (1, 2, 3)
        )
        assert str(err).startswith(
            "shift: image chain did not certify within max power 3 "
            "(window 8, probe 4): n=1: window span (dim 8) != probe span (dim 12)"
        )

    def test_condition_b_rejects_a_deceptive_window(self):
        # A long-range operator whose images look stable inside the window at
        # power 1 but whose span is not yet invariant: v1 -> v1 + v_far,
        # v_far -> v2, everything else -> 0, with v_far outside window+probe.
        window, probe = 8, 4
        far = window + probe + 7

        def rule(i):
            field = QQ
            if i == 1:
                return SparseVector(field, {1: field.one, far: field.one})
            if i == far:
                return SparseVector.basis(field, 2)
            return SparseVector(field, {})

        op = FunctionOperator(QQ, "v", far, rule, "longrange")
        with pytest.raises(NotStabilizedError) as excinfo:
            find_trace(op, max_power=1, window=window, probe=probe)
        assert excinfo.value.attempts == (
            (1, f"image of a span vector (pivot {far}) leaves the span; "
                "condition (b) failed"),
        )

        cert = find_trace(op, max_power=3, window=window, probe=probe)
        assert cert.power == 2
        assert cert.chain_dims == [1, 1]
        assert cert.trace == QQ.one


class TestCheckNilpotent:
    def test_theta1_v_order_two(self, theta1_v):
        report = check_nilpotent(theta1_v, 8, 512)
        assert report.ok
        assert report.order == 2
        assert report.witness_index == 1
        assert report.witness == SparseVector.basis(QQ, 1)
        assert not theta1_v.apply(report.witness).is_zero
        assert report.failure_index is None

    def test_theta1_e_order_two(self):
        report = check_nilpotent(build_theta1_e(QQ), 8, 512)
        assert report.ok
        assert report.order == 2
        assert report.witness_index == 2

    def test_theta2_order_six(self, theta2):
        report = check_nilpotent(theta2, 8, 512)
        assert report.ok
        assert report.order == 6
        assert report.witness_index == 7
        chain = [report.witness]
        while not chain[-1].is_zero:
            chain.append(theta2.apply(chain[-1]))
        assert len(chain) - 1 == 6

    def test_phi_restricted_to_tail_order_four(self, phi):
        phi_u = ShiftedRestriction(phi, 2, "u", name="phi_u")
        report = check_nilpotent(phi_u, 8, 512)
        assert report.ok
        assert report.order == 4
        assert report.witness_index == 4

    def test_zero_operator_order_one(self):
        # op^0(v1) = v1 != 0, so v1 witnesses that the order is exactly 1.
        report = check_nilpotent(zero_operator(QQ), 4, 16)
        assert report.ok
        assert report.order == 1
        assert report.witness_index == 1
        assert report.witness == SparseVector.basis(QQ, 1)

    def test_shift_is_not_nilpotent(self):
        report = check_nilpotent(parse_one(SHIFT_UP), 6, 16)
        assert not report.ok
        assert report.order is None
        assert report.witness is None
        assert report.failure_index == 1

    def test_json_shape(self, theta1_v):
        data = check_nilpotent(theta1_v, 8, 16).to_json_dict()
        assert data == {
            "operator": "theta1_v",
            "field": "rationals",
            "max_power": 8,
            "window": 16,
            "nilpotent_within_window": True,
            "order": 2,
            "witness_index": 1,
            "witness": [[1, "1"]],
            "failure_index": None,
        }

    def test_rejects_non_positive_arguments(self, theta1_v):
        with pytest.raises(ValueError):
            check_nilpotent(theta1_v, 0, 16)
        with pytest.raises(ValueError):
            check_nilpotent(theta1_v, 8, 0)


CHECK_NAMES = [
    "w_invariant_isomorphism",
    "u_invariant",
    "u_nilpotent",
    "direct_sum",
    "w_trace",
]


class TestVerifyAST:
    def test_phi_decomposition_passes(self, phi):
        claim = ASTClaim(
            (SparseVector.basis(QQ, 1), SparseVector.basis(QQ, 2)),
            u_threshold=3,
            nilpotency_order=4,
        )
        report = verify_ast(phi, claim)
        assert [name for name, _, _ in report.checks] == CHECK_NAMES
        assert report.all_passed
        assert report.failures() == []
        assert report.trace == QQ.one
        assert report.core_matrix.det() == QQ.from_int(-1)
        data = report.to_json_dict()
        assert data["verdict"] == "PASS"
        assert data["trace"] == "1"
        assert data["core_matrix"] == [["2", "1"], ["-1", "-1"]]

    def test_w_not_invariant(self):
        claim = ASTClaim((SparseVector.basis(QQ, 1),), 2, 1)
        report = verify_ast(parse_one(SHIFT_UP), claim, window=8)
        failed = dict((name, detail) for name, detail in report.failures())
        assert "w_invariant_isomorphism" in failed
        assert "w_trace" in failed
        assert report.to_json_dict()["verdict"] == "FAIL"

    def test_w_restriction_singular(self):
        op = parse_one(
            "operator a over v { reach 0; case i = k, k >= 1: 0; }"
        )
        claim = ASTClaim((SparseVector.basis(QQ, 1),), 2, 1)
        report = verify_ast(op, claim, window=8)
        failed = dict(report.failures())
        assert failed["w_invariant_isomorphism"] == "det(op|_W) = 0"
        assert ("w_trace", True) in [(n, p) for n, p, _ in report.checks]

    def test_u_image_leaks_into_w(self):
        op = parse_one(
            "operator a over v {\n"
            "  reach 1;\n"
            "  case i = 1: v[1];\n"
            "  case i = k, k >= 2: v[k - 1];\n"
            "}\n"
        )
        claim = ASTClaim((SparseVector.basis(QQ, 1),), 2, 1)
        report = verify_ast(op, claim, window=8)
        failed = dict(report.failures())
        assert failed["u_invariant"] == "op(v[2]) has a component on W pivot 1"

    def test_u_nilpotency_order_mismatch(self):
        op = parse_one(
            "operator a over v {\n"
            "  reach 0;\n"
            "  case i = 1: v[1];\n"
            "  case i = k, k >= 2: 0;\n"
            "}\n"
        )
        claim = ASTClaim((SparseVector.basis(QQ, 1),), 2, 2)
        report = verify_ast(op, claim, window=8)
        failed = dict(report.failures())
        assert failed == {"u_nilpotent": "order 1 on the window (claimed 2)"}

    def test_u_not_nilpotent_at_claimed_order(self):
        op = parse_one(
            "operator a over v {\n"
            "  reach 1;\n"
            "  case i = 1: v[1];\n"
            "  case i = 2*k, k >= 1: 0;\n"
            "  case i = 2*k + 1, k >= 1: v[2*k];\n"
            "}\n"
        )
        claim = ASTClaim((SparseVector.basis(QQ, 1),), 2, 1)
        report = verify_ast(op, claim, window=8)
        failed = dict(report.failures())
        assert failed == {"u_nilpotent": "op^1(v[3]) != 0"}

    def test_direct_sum_gap_detected(self):
        op = parse_one(
            "operator a over v {\n"
            "  reach 0;\n"
            "  case i = 1: v[1];\n"
            "  case i = k, k >= 2: 0;\n"
            "}\n"
        )
        claim = ASTClaim((SparseVector.basis(QQ, 1),), 3, 1)
        report = verify_ast(op, claim, window=8)
        failed = dict(report.failures())
        assert set(failed) == {"direct_sum"}
        assert "spans window: False" in failed["direct_sum"]

    def test_direct_sum_overlap_detected(self):
        op = parse_one(
            "operator a over v {\n"
            "  reach 0;\n"
            "  case i = 1: v[1];\n"
            "  case i = k, k >= 2: 0;\n"
            "}\n"
        )
        claim = ASTClaim(
            (SparseVector.basis(QQ, 1),), 2, 1,
            u_extra=(SparseVector.basis(QQ, 1),),
        )
        report = verify_ast(op, claim, window=8)
        failed = dict(report.failures())
        assert "direct_sum" in failed
        assert "dim(W + U) = 8, expected 9" in failed["direct_sum"]

    def test_dependent_w_basis_is_malformed(self, phi):
        v1 = SparseVector.basis(QQ, 1)
        claim = ASTClaim((v1, v1.scale(QQ.from_int(2))), 3, 4)
        with pytest.raises(ValueError, match="linearly dependent"):
            verify_ast(phi, claim)

    def test_claim_validation(self):
        with pytest.raises(ValueError, match="u_threshold"):
            ASTClaim((), 0, 1)
        with pytest.raises(ValueError, match="nilpotency_order"):
            ASTClaim((), 1, 0)


class TestAxiomSuite:
    def test_deterministic_for_fixed_seed(self):
        a = axiom_suite(QQ, seed=7, trials=5, max_dim=5)
        b = axiom_suite(QQ, seed=7, trials=5, max_dim=5)
        assert a.to_json_dict() == b.to_json_dict()

    @pytest.mark.parametrize("field", [QQ, GF(2)], ids=["rationals", "gf2"])
    def test_no_failures_on_modest_run(self, field):
        report = axiom_suite(field, seed=0, trials=25, max_dim=6)
        assert report.total_failures == 0
        data = report.to_json_dict()
        assert data["verdict"] == "PASS"
        assert [p["name"] for p in data["properties"]] == [
            "finite_dimensional_agreement",
            "subspace_additivity",
            "nilpotent_zero",
            "finite_rank_linearity",
            "commutation_invariance",
        ]
        assert all(p["failures"] == [] for p in data["properties"])

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            axiom_suite(QQ, seed=0, trials=0, max_dim=4)
        with pytest.raises(ValueError):
            axiom_suite(QQ, seed=0, trials=1, max_dim=1)
