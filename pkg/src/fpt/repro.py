"""Bundled counterexample to additivity of the stabilized-image trace.

This module ships three rule-defined operators — ``theta1_e`` (order-two
nilpotent, e-basis), its change-of-basis twin ``theta1_v``, and a second
nilpotent ``theta2_v`` — whose sum ``phi`` is finite potent with trace 1,
while both summands have trace 0.  ``build_paper_bundle`` loads the golden
rule files, ``verify_paper`` replays every claimed identity (window
matrices, nilpotency orders, core/nilpotent decomposition, traces) and
reports the first divergence, and ``linearity_counterexample_report``
packages the resulting trace triple (0, 0, 1) with its evidence.
"""

from __future__ import annotations

import hashlib
from importlib import resources
import json

from .basis import BasisChange, conjugate
from .fields import QQ
from .matrices import FiniteMatrix
from .operators import (
    FamilyRule,
    LinearForm,
    OperatorBase,
    RuleOperator,
    ShiftedRestriction,
    SumTerm,
    Term,
    op_add,
    window_matrix,
)
from .spans import restrict_operator, span
from .tate import (
    ASTClaim,
    DEFAULT_MAX_POWER,
    DEFAULT_NILPOTENCY_WINDOW,
    DEFAULT_TRACE_WINDOW,
    NotStabilizedError,
    check_nilpotent,
    find_trace,
    verify_ast,
)
from .vectors import SparseVector

__all__ = [
    "BundleError",
    "PaperBundle",
    "PaperReport",
    "StepResult",
    "PAPER_OPERATOR_KEYS",
    "build_theta1_e",
    "build_theta1_v",
    "build_theta2",
    "build_paper_bundle",
    "paper_ast_claim",
    "paper_operator",
    "verify_paper",
    "linearity_counterexample_report",
]


class BundleError(RuntimeError):
    """A bundled golden file is unusable or an end-to-end check failed."""


# SHA-256 digests of the golden data files.  The files are normalized rule
# text / matrix literals; the digests pin them byte-for-byte so silent edits
# or corruption surface as BundleError rather than as wrong mathematics.
_GOLDEN_SHA256 = {
    "theta1_e.op": "5edf941b448bba67faf6dcec024b1d75eeec69fc4e56da973c92c3f081ef327d",
    "theta1_v.op": "6f76c3e09c3a6d58542bbc942ed46ca739b8e3cf867404db6a501e47e64dac00",
    "theta2_v.op": "ccd0a493cfd60d2f1b9139c0c9a81ce9caa9537b3729dd1132901c64c66a6bd4",
    "expected_matrices.json": "1b29a9e948fcf1626a7ebf7562b8ae61e9274629206014f4f542a0ee34f2387a",
}

_WINDOW_BLOCK_SIZE = 9


def _read_golden(name: str) -> str:
    try:
        data = resources.files("fpt").joinpath("data", "paper", name).read_bytes()
    except (FileNotFoundError, ModuleNotFoundError) as exc:
        raise BundleError(f"golden file {name!r} is missing: {exc}") from exc
    digest = hashlib.sha256(data).hexdigest()
    expected = _GOLDEN_SHA256[name]
    if digest != expected:
        raise BundleError(
            f"golden file corruption: {name} has sha256 {digest}, expected {expected}"
        )
    return data.decode("utf-8")


# ---------------------------------------------------------------------------
# Programmatic builders.
#
# These construct the three operators rule-by-rule in code, independently of
# the rule-text parser.  The shipped ``.op`` files are the canonical inputs;
# the builders exist so the test suite can cross-check file against code on
# hundreds of basis vectors (a transcription error would have to appear in
# both, in the same way, to go unnoticed).
# ---------------------------------------------------------------------------


def _lf(j=0, k=0, const=0) -> LinearForm:
    return LinearForm(j=j, k=k, const=const)


def build_theta1_e(field=QQ) -> RuleOperator:
    """e-basis square-zero operator: e_i -> 0 (i odd), e_i -> e_{i-1} (i even)."""
    return RuleOperator(
        name="theta1_e",
        basis_name="e",
        field=field,
        reach=0,
        exceptional_rules={},
        family_rules=[
            FamilyRule(2, 0, 1, [Term(1, None, _lf(k=2, const=-1))]),
            FamilyRule(2, 1, 0, []),
        ],
    )


def build_theta1_v(field=QQ) -> RuleOperator:
    """The same operator written out explicitly on the v-basis."""

    def vec(*pairs):
        return SparseVector(field, {i: field.from_int(c) for i, c in pairs})

    return RuleOperator(
        name="theta1_v",
        basis_name="v",
        field=field,
        reach=3,
        exceptional_rules={
            1: vec((1, 1), (2, -1), (3, 1)),
            2: vec((3, 1), (4, -1), (5, 1)),
            3: vec((1, -1), (2, 1), (4, -1), (5, 1)),
        },
        family_rules=[
            # i = 2k (k >= 2):  v_{2k+1} - v_{2k+2} + v_{2k+3}
            FamilyRule(2, 0, 2, [
                Term(1, None, _lf(k=2, const=1)),
                Term(-1, None, _lf(k=2, const=2)),
                Term(1, None, _lf(k=2, const=3)),
            ]),
            # i = 2k+1 (k >= 2):
            #   (-1)^k v_1 + (-1)^{k+1} v_2 + sum_{j=2}^{k} (-1)^{j+k} v_{2j}
            #   - v_{2k+2} + v_{2k+3}
            FamilyRule(2, 1, 2, [
                Term(1, _lf(k=1), _lf(const=1)),
                Term(1, _lf(k=1, const=1), _lf(const=2)),
                SumTerm(_lf(const=2), _lf(k=1), 1, _lf(j=1, k=1), _lf(j=2)),
                Term(-1, None, _lf(k=2, const=2)),
                Term(1, None, _lf(k=2, const=3)),
            ]),
        ],
    )


def build_theta2(field=QQ) -> RuleOperator:
    """Second nilpotent v-basis operator of the counterexample pair."""

    def vec(*pairs):
        return SparseVector(field, {i: field.from_int(c) for i, c in pairs})

    return RuleOperator(
        name="theta2_v",
        basis_name="v",
        field=field,
        reach=3,
        exceptional_rules={
            1: vec((1, 1), (3, -1)),
            2: vec((1, 1), (2, -1), (3, -1), (4, 1), (5, -1)),
            3: vec((1, 1), (2, -1), (4, 1)),
        },
        family_rules=[
            # i = 4k: v_{4k+2}
            FamilyRule(4, 0, 1, [Term(1, None, _lf(k=4, const=2))]),
            # i = 4k+1: -v_1 + v_2 + sum_{j=2}^{2k+1} (-1)^{j+1} v_{2j}
            FamilyRule(4, 1, 1, [
                Term(-1, None, _lf(const=1)),
                Term(1, None, _lf(const=2)),
                SumTerm(_lf(const=2), _lf(k=2, const=1), 1, _lf(j=1, const=1), _lf(j=2)),
            ]),
            # i = 4k+2: 0
            FamilyRule(4, 2, 1, []),
            # i = 4k+3: v_1 - v_2 + sum_{j=2}^{2k+2} (-1)^j v_{2j} - v_{4k+5}
            FamilyRule(4, 3, 1, [
                Term(1, None, _lf(const=1)),
                Term(-1, None, _lf(const=2)),
                SumTerm(_lf(const=2), _lf(k=2, const=2), 1, _lf(j=1), _lf(j=2)),
                Term(-1, None, _lf(k=4, const=5)),
            ]),
        ],
    )


def paper_ast_claim(field=QQ) -> ASTClaim:
    """Claimed decomposition for phi: core span{v_1, v_2}, nilpotent tail v_{>=3}."""
    return ASTClaim(
        w_basis=(SparseVector.basis(field, 1), SparseVector.basis(field, 2)),
        u_threshold=3,
        nilpotency_order=4,
    )


class PaperBundle:
    """All bundled operators plus the expected matrices, over one field."""

    __slots__ = (
        "field", "theta1_e", "theta1_v", "theta2", "basis_change", "phi",
        "phi_u", "expected_window_theta1", "expected_window_theta2",
        "expected_window_phi_u", "expected_core_block", "expected_trace",
        "theta2_overridden",
    )

    def __init__(self, field, theta1_e, theta1_v, theta2, basis_change, phi,
                 phi_u, expected_window_theta1, expected_window_theta2,
                 expected_window_phi_u, expected_core_block, expected_trace,
                 theta2_overridden):
        self.field = field
        self.theta1_e = theta1_e
        self.theta1_v = theta1_v
        self.theta2 = theta2
        self.basis_change = basis_change
        self.phi = phi
        self.phi_u = phi_u
        self.expected_window_theta1 = expected_window_theta1
        self.expected_window_theta2 = expected_window_theta2
        self.expected_window_phi_u = expected_window_phi_u
        self.expected_core_block = expected_core_block
        self.expected_trace = expected_trace
        self.theta2_overridden = theta2_overridden


def _select_operator(ops, wanted_name, source):
    if len(ops) == 1:
        return ops[0]
    for op in ops:
        if op.name == wanted_name:
            return op
    names = ", ".join(op.name for op in ops) or "none"
    raise BundleError(
        f"{source}: expected a single operator or one named {wanted_name!r}; found: {names}"
    )


def build_paper_bundle(field=QQ, *, theta2_text=None) -> PaperBundle:
    """Load the golden rule files and expected matrices over ``field``.

    ``theta2_text`` substitutes alternative rule text for ``theta2_v``
    (bypassing that file's checksum only); the returned bundle records the
    substitution in ``theta2_overridden``.
    """
    from .dsl import parse  # local import: dsl imports operators, not repro

    theta1_e = _select_operator(
        parse(_read_golden("theta1_e.op"), field), "theta1_e", "theta1_e.op")
    theta1_v = _select_operator(
        parse(_read_golden("theta1_v.op"), field), "theta1_v", "theta1_v.op")
    if theta2_text is None:
        theta2 = _select_operator(
            parse(_read_golden("theta2_v.op"), field), "theta2_v", "theta2_v.op")
        overridden = False
    else:
        theta2 = _select_operator(
            parse(theta2_text, field), "theta2_v", "theta2 override")
        overridden = True
    for op, basis_name in ((theta1_e, "e"), (theta1_v, "v"), (theta2, "v")):
        if op.basis_name != basis_name:
            raise BundleError(
                f"operator {op.name!r} is over basis {op.basis_name!r}, expected {basis_name!r}"
            )

    expected = json.loads(_read_golden("expected_matrices.json"))
    blocks = {}
    for key in ("window_theta1_v", "window_theta2_v", "window_phi_u", "core_block_phi"):
        try:
            rows = expected[key]
        except KeyError:
            raise BundleError(f"expected_matrices.json is missing {key!r}") from None
        blocks[key] = FiniteMatrix.from_rows(field, rows)

    basis_change = BasisChange(field)
    phi = op_add(theta1_v, theta2, name="phi")
    phi_u = ShiftedRestriction(phi, 2, "u", name="phi_u")
    return PaperBundle(
        field=field,
        theta1_e=theta1_e,
        theta1_v=theta1_v,
        theta2=theta2,
        basis_change=basis_change,
        phi=phi,
        phi_u=phi_u,
        expected_window_theta1=blocks["window_theta1_v"],
        expected_window_theta2=blocks["window_theta2_v"],
        expected_window_phi_u=blocks["window_phi_u"],
        expected_core_block=blocks["core_block_phi"],
        expected_trace=field.one,
        theta2_overridden=overridden,
    )


PAPER_OPERATOR_KEYS = ("theta1_e", "theta1_v", "theta1", "theta2", "theta2_v", "phi", "phi_u")


def paper_operator(key: str, field=QQ) -> OperatorBase:
    """Resolve a bundled operator by short name (``theta1`` means ``theta1_v``)."""
    bundle = build_paper_bundle(field)
    table = {
        "theta1_e": bundle.theta1_e,
        "theta1_v": bundle.theta1_v,
        "theta1": bundle.theta1_v,
        "theta2": bundle.theta2,
        "theta2_v": bundle.theta2,
        "phi": bundle.phi,
        "phi_u": bundle.phi_u,
    }
    try:
        return table[key]
    except KeyError:
        known = ", ".join(PAPER_OPERATOR_KEYS)
        raise KeyError(f"unknown bundled operator {key!r} (known: {known})") from None


class StepResult:
    __slots__ = ("stage", "name", "passed", "detail")

    def __init__(self, stage: int, name: str, passed: bool, detail: str):
        self.stage = stage
        self.name = name
        self.passed = passed
        self.detail = detail

    def to_json_dict(self):
        return {
            "stage": self.stage,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
        }

    def __repr__(self):
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] stage {self.stage} {self.name}: {self.detail}"


class PaperReport:
    """Ordered step results for one full verification run."""

    __slots__ = (
        "field", "window", "nilpotency_window", "max_power", "probe",
        "steps", "traces", "certificates", "theta2_overridden",
        "reduced_confidence_reasons", "uncertified", "uncertified_steps",
    )

    def __init__(self, field, window, nilpotency_window, max_power, probe,
                 theta2_overridden):
        self.field = field
        self.window = window
        self.nilpotency_window = nilpotency_window
        self.max_power = max_power
        self.probe = probe
        self.steps = []
        self.traces = {"theta1": None, "theta2": None, "phi": None}
        self.certificates = {"theta1": None, "theta2": None, "phi": None}
        self.theta2_overridden = theta2_overridden
        reasons = []
        if window < DEFAULT_TRACE_WINDOW:
            reasons.append(
                f"trace window {window} below default {DEFAULT_TRACE_WINDOW}")
        if nilpotency_window < DEFAULT_NILPOTENCY_WINDOW:
            reasons.append(
                f"nilpotency window {nilpotency_window} below default {DEFAULT_NILPOTENCY_WINDOW}")
        if max_power < DEFAULT_MAX_POWER:
            reasons.append(f"max power {max_power} below default {DEFAULT_MAX_POWER}")
        self.reduced_confidence_reasons = reasons
        self.uncertified = False
        self.uncertified_steps = []

    def add(self, stage: int, name: str, passed: bool, detail: str) -> None:
        self.steps.append(StepResult(stage, name, passed, detail))

    @property
    def reduced_confidence(self) -> bool:
        return bool(self.reduced_confidence_reasons)

    @property
    def all_passed(self) -> bool:
        return all(step.passed for step in self.steps)

    @property
    def verdict(self) -> str:
        return "PASS" if self.all_passed else "FAIL"

    @property
    def first_failure(self):
        for step in self.steps:
            if not step.passed:
                return step
        return None

    def failures(self):
        return [step for step in self.steps if not step.passed]

    def definite_failures(self):
        """Failed steps that are actual refutations, not certification gaps.

        A step lands in ``uncertified_steps`` when it could not be decided
        (stabilization ran out of power, or a prerequisite trace was missing);
        every other failed step definitely contradicts a bundled claim.
        """
        return [step for step in self.failures()
                if step.name not in self.uncertified_steps]

    def to_json_dict(self):
        first = self.first_failure
        return {
            "field": self.field.selector,
            "window": self.window,
            "nilpotency_window": self.nilpotency_window,
            "max_power": self.max_power,
            "probe": self.probe,
            "steps": [step.to_json_dict() for step in self.steps],
            "traces": dict(self.traces),
            "certificates": dict(self.certificates),
            "theta2_overridden": self.theta2_overridden,
            "reduced_confidence": self.reduced_confidence,
            "reduced_confidence_reasons": list(self.reduced_confidence_reasons),
            "uncertified": self.uncertified,
            "uncertified_steps": list(self.uncertified_steps),
            "first_failure": None if first is None else first.to_json_dict(),
            "verdict": self.verdict,
        }


def _first_matrix_divergence(got: FiniteMatrix, expected: FiniteMatrix):
    for r in range(1, expected.nrows + 1):
        for c in range(1, expected.ncols + 1):
            g = got.entry(r, c)
            e = expected.entry(r, c)
            if g != e:
                return r, c, e, g
    return None


def _check_window_block(report, stage, name, op, expected, label):
    field = report.field
    got = window_matrix(op, _WINDOW_BLOCK_SIZE, _WINDOW_BLOCK_SIZE)
    diff = _first_matrix_divergence(got, expected)
    if diff is None:
        report.add(stage, name, True,
                   f"{label}: 9x9 window matrix matches the expected block entrywise")
    else:
        r, c, e, g = diff
        report.add(
            stage, name, False,
            f"{label}: 9x9 window matrix diverges first at entry ({r}, {c}): "
            f"expected {field.to_str(e)}, got {field.to_str(g)}")


def _check_nilpotency_step(report, stage, name, op, expected_order, window,
                           max_power, label, witness_note=None):
    result = check_nilpotent(op, max_power, window)
    if not result.ok:
        # Only a refutation when the power cap covers the claimed order:
        # op^q = 0 forces op^m = 0 for every m >= q.
        if max_power < expected_order:
            report.uncertified_steps.append(name)
        report.add(
            stage, name, False,
            f"{label}: power {max_power} still nonzero on index {result.failure_index} "
            f"(window {window})")
        return
    if result.order != expected_order:
        # A larger observed order exhibits a refuting witness; a smaller one
        # may just mean the witness lies beyond this window.
        if result.order < expected_order:
            report.uncertified_steps.append(name)
        report.add(
            stage, name, False,
            f"{label}: nilpotency order {result.order} on window {window}, "
            f"expected {expected_order} (witness index {result.witness_index})")
        return
    witness = f"{op.basis_name}[{result.witness_index}]"
    if witness_note:
        witness = f"{witness} ({witness_note.format(index=result.witness_index)})"
    report.add(
        stage, name, True,
        f"{label}: nilpotent of order exactly {expected_order} on v_1..v_{window}, "
        f"witness {witness}")


def _trace_step(report, bundle, stage, name, key, op, expected_value, label,
                probe):
    field = bundle.field
    try:
        cert = find_trace(op, max_power=report.max_power, window=report.window,
                          probe=probe)
    except NotStabilizedError as exc:
        report.uncertified = True
        report.uncertified_steps.append(name)
        # The exception text already names the operator.
        report.add(stage, name, False, str(exc))
        return None
    report.traces[key] = field.to_str(cert.trace)
    report.certificates[key] = cert.to_json_dict()
    if cert.trace != expected_value:
        report.add(
            stage, name, False,
            f"{label}: trace {field.to_str(cert.trace)}, "
            f"expected {field.to_str(expected_value)}")
        return cert
    report.add(
        stage, name, True,
        f"{label}: trace {field.to_str(cert.trace)} "
        f"(stabilized at power {cert.power}, core dimension {cert.core.dim})")
    return cert


def verify_paper(bundle: PaperBundle,
                 window: int = DEFAULT_TRACE_WINDOW,
                 *,
                 nilpotency_window: int = DEFAULT_NILPOTENCY_WINDOW,
                 max_power: int = DEFAULT_MAX_POWER,
                 probe=None) -> PaperReport:
    """Replay every bundled claim in canonical stage order (1-9).

    Stages: (1) basis round trip, (2) conjugation agreement, (3) the three
    9x9 window matrices, (4) the three nilpotency orders, (5) the
    core/nilpotent decomposition of phi, (6) the core block and its
    determinant, (7) trace of phi, (8) traces of the two summands,
    (9) the additivity gap.  Every stage runs even after a failure; the
    report keeps canonical order and exposes the first failure.
    """
    field = bundle.field
    report = PaperReport(field, window, nilpotency_window, max_power, probe,
                         bundle.theta2_overridden)
    bc = bundle.basis_change

    # Stage 1: the two change-of-basis directions invert each other.
    bad = None
    for i in range(1, nilpotency_window + 1):
        unit = SparseVector.basis(field, i)
        back_v = bc.change_basis_vector(bc.change_basis_vector(unit, "v->e"), "e->v")
        back_e = bc.change_basis_vector(bc.change_basis_vector(unit, "e->v"), "v->e")
        if back_v != unit or back_e != unit:
            bad = i
            break
    if bad is None:
        report.add(1, "basis_roundtrip", True,
                   f"e<->v coordinate changes invert each other on indices 1..{nilpotency_window}")
    else:
        report.add(1, "basis_roundtrip", False,
                   f"round trip fails first at index {bad}")

    # Stage 2: the explicit v-basis rules agree with conjugating the e-basis
    # rules.  Conjugation is ground truth: a mismatch means the explicit
    # v-basis transcription is wrong.
    conj = conjugate(bundle.theta1_e, bc, name="theta1_e_conjugated")
    bad = None
    for i in range(1, nilpotency_window + 1):
        expected_img = conj.apply_basis(i)
        got_img = bundle.theta1_v.apply_basis(i)
        if expected_img != got_img:
            bad = (i, expected_img, got_img)
            break
    if bad is None:
        report.add(2, "conjugation_agreement", True,
                   f"conjugated e-basis rules match the explicit v-basis rules on v_1..v_{nilpotency_window}")
    else:
        i, expected_img, got_img = bad
        report.add(
            2, "conjugation_agreement", False,
            f"explicit v-basis rule diverges from conjugation (ground truth) first at v_{i}: "
            f"expected {expected_img.to_text()}, got {got_img.to_text()}")

    # Stage 3: printed 9x9 blocks.
    _check_window_block(report, 3, "window_theta1", bundle.theta1_v,
                        bundle.expected_window_theta1, "theta1_v")
    _check_window_block(report, 3, "window_theta2", bundle.theta2,
                        bundle.expected_window_theta2, "theta2_v")
    _check_window_block(report, 3, "window_phi_u", bundle.phi_u,
                        bundle.expected_window_phi_u, "phi|_U (u-basis)")

    # Stage 4: nilpotency orders.
    _check_nilpotency_step(report, 4, "nilpotency_theta1", bundle.theta1_v, 2,
                           nilpotency_window, max_power, "theta1_v")
    _check_nilpotency_step(report, 4, "nilpotency_theta2", bundle.theta2, 6,
                           nilpotency_window, max_power, "theta2_v")
    _check_nilpotency_step(report, 4, "nilpotency_phi_u", bundle.phi_u, 4,
                           nilpotency_window, max_power, "phi|_U",
                           witness_note="v[{index}] shifted by 2")

    # Stage 5: core/nilpotent decomposition of phi.
    claim = paper_ast_claim(field)
    ast = verify_ast(bundle.phi, claim, window=window)
    if ast.all_passed:
        report.add(5, "ast_decomposition", True,
                   f"span{{v_1, v_2}} (+) span{{v_i : i >= 3}} splits phi on v_1..v_{window}: "
                   f"core isomorphism, invariant tail nilpotent of order 4, direct sum")
    else:
        name, detail = ast.failures()[0]
        report.add(5, "ast_decomposition", False, f"check {name}: {detail}")

    # Stage 6: the core block and its determinant.
    w = span(field, claim.w_basis)
    try:
        core_matrix = restrict_operator(bundle.phi.apply, w)
    except Exception as exc:  # noqa: BLE001 - report any restriction failure
        report.add(6, "core_block", False, f"phi does not restrict to the claimed core: {exc}")
    else:
        diff = _first_matrix_divergence(core_matrix, bundle.expected_core_block)
        det = core_matrix.det()
        expected_det = field.from_int(-1)
        if diff is not None:
            r, c, e, g = diff
            report.add(6, "core_block", False,
                       f"phi on span{{v_1, v_2}} diverges at entry ({r}, {c}): "
                       f"expected {field.to_str(e)}, got {field.to_str(g)}")
        elif det != expected_det:
            report.add(6, "core_block", False,
                       f"core block determinant {field.to_str(det)}, "
                       f"expected {field.to_str(expected_det)}")
        else:
            report.add(6, "core_block", True,
                       f"phi on span{{v_1, v_2}} equals the expected 2x2 block; "
                       f"determinant {field.to_str(det)} confirms an isomorphism")

    # Stage 7: trace of phi via image-chain stabilization.
    cert = _trace_step(report, bundle, 7, "trace_phi", "phi", bundle.phi,
                       bundle.expected_trace, "phi", probe)
    if cert is not None and cert.trace == bundle.expected_trace:
        if cert.core.dim != 2 or cert.power > 4:
            # The chain should reach the two-dimensional core by the fourth power.
            last = report.steps[-1]
            report.steps[-1] = StepResult(
                last.stage, last.name, False,
                f"phi: trace correct but chain stabilized at power {cert.power} "
                f"with core dimension {cert.core.dim} (expected dimension 2 by power 4)")

    # Stage 8: the two summands have trace 0.
    zero = field.zero
    _trace_step(report, bundle, 8, "trace_theta1", "theta1", bundle.theta1_v,
                zero, "theta1_v", probe)
    _trace_step(report, bundle, 8, "trace_theta2", "theta2", bundle.theta2,
                zero, "theta2_v", probe)

    # Stage 9: the additivity gap.
    t1, t2, tp = (report.traces[k] for k in ("theta1", "theta2", "phi"))
    if None in (t1, t2, tp):
        # Not a refutation: the gap simply could not be evaluated.
        report.uncertified_steps.append("linearity_gap")
        report.add(9, "linearity_gap", False,
                   "prerequisite traces unavailable; cannot evaluate the gap")
    else:
        s1 = field.parse(t1)
        s2 = field.parse(t2)
        sp = field.parse(tp)
        total = field.add(s1, s2)
        if total != sp:
            report.add(
                9, "linearity_gap", True,
                f"tr(theta1) + tr(theta2) = {field.to_str(total)} differs from "
                f"tr(theta1 + theta2) = {field.to_str(sp)}: the trace is not additive")
        else:
            report.add(
                9, "linearity_gap", False,
                f"tr(theta1) + tr(theta2) = {field.to_str(total)} equals "
                f"tr(theta1 + theta2) = {field.to_str(sp)}; no additivity gap")
    return report


def linearity_counterexample_report(field=QQ,
                                    *,
                                    window: int = DEFAULT_TRACE_WINDOW,
                                    nilpotency_window: int = DEFAULT_NILPOTENCY_WINDOW,
                                    max_power: int = DEFAULT_MAX_POWER):
    """Trace triple (0, 0, 1) with full evidence; raises BundleError on any failure."""
    bundle = build_paper_bundle(field)
    report = verify_paper(bundle, window, nilpotency_window=nilpotency_window,
                          max_power=max_power)
    if report.verdict != "PASS":
        first = report.first_failure
        raise BundleError(
            f"sub-check failed at stage {first.stage} ({first.name}): {first.detail}")
    zero = field.to_str(field.zero)
    return {
        "field": field.selector,
        "traces": dict(report.traces),
        "sum_of_traces": zero,
        "trace_of_sum": report.traces["phi"],
        "additive": False,
        "statement": (
            "tr(theta1) = tr(theta2) = 0 but tr(theta1 + theta2) = "
            f"{report.traces['phi']}; the stabilized-image trace is not additive"
        ),
        "evidence": report.to_json_dict(),
    }
