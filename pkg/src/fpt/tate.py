"""Finite-potency detection and exact traces via image-chain stabilization.

For a finite-potent operator the subspace spanned by n-th images of a large
window of basis vectors eventually stops growing when the window is extended
(condition (a)) and becomes invariant (condition (b)); iterating the operator
on that subspace then descends to the stable core W with op(W) = W, and the
trace is the ordinary matrix trace of the restriction to W. All statements
are verified on an explicit window and certified as "window-verified",
never "proved".
"""

from __future__ import annotations

from math import gcd

from .matrices import FiniteMatrix
from .operators import finite_operator, window_matrix
from .spans import NotInvariantError, Subspace, matrix_apply, quotient_operator, restrict_operator, span
from .vectors import SparseVector

DEFAULT_TRACE_WINDOW = 64
DEFAULT_NILPOTENCY_WINDOW = 512
DEFAULT_MAX_POWER = 8
STATUS_WINDOW_VERIFIED = "window-verified"


class NotStabilizedError(Exception):
    """No power up to the cap yielded a stable, invariant image span.

    The operator may not be finite potent, or the window/probe/max-power
    parameters are too small; ``attempts`` records why each power failed.
    """

    def __init__(self, operator_name, max_power, window, probe, attempts):
        self.operator_name = operator_name
        self.max_power = max_power
        self.window = window
        self.probe = probe
        self.attempts = tuple(attempts)
        detail = "; ".join(f"n={n}: {reason}" for n, reason in self.attempts)
        super().__init__(
            f"{operator_name}: image chain did not certify within max power "
            f"{max_power} (window {window}, probe {probe}): {detail}"
        )


def default_probe(op) -> int:
    """Probe extension: two full rule periods beyond the window, reach-scaled."""
    period = 1
    for m in op.family_moduli:
        period = period * m // gcd(period, m)
    return max(4, 2 * period * (op.reach + 1))


class TraceCertificate:
    __slots__ = (
        "operator_name", "field", "window", "probe", "power",
        "chain_dims", "core", "core_matrix", "trace", "status",
    )

    def __init__(self, operator_name, field, window, probe, power, chain_dims,
                 core, core_matrix, trace):
        self.operator_name = operator_name
        self.field = field
        self.window = window
        self.probe = probe
        self.power = power
        self.chain_dims = list(chain_dims)
        self.core = core
        self.core_matrix = core_matrix
        self.trace = trace
        self.status = STATUS_WINDOW_VERIFIED

    def to_json_dict(self):
        return {
            "operator": self.operator_name,
            "field": self.field.selector,
            "window": self.window,
            "probe": self.probe,
            "power": self.power,
            "chain_dims": self.chain_dims,
            "core_basis": [row.to_pairs() for row in self.core.rows],
            "core_matrix": self.core_matrix.to_str_rows(),
            "trace": self.field.to_str(self.trace),
            "status": self.status,
            "failures": [],
        }


def image_chain(op, max_power: int, window: int):
    """Subspaces span{op^n(v_i) : i <= window} for n = 1..max_power."""
    if max_power < 1 or window < 1:
        raise ValueError("max_power and window must be >= 1")
    field = op.field
    images = [op.apply_basis(i) for i in range(1, window + 1)]
    chain = [span(field, images)]
    for _ in range(2, max_power + 1):
        images = [op.apply(x) for x in images]
        chain.append(span(field, images))
    return chain


def _stable_core(op, start: Subspace) -> Subspace:
    """Iterate T -> span(op(T)) until the dimension stops dropping.

    The chain nests (T_{j+1} ⊆ T_j once op(T_0) ⊆ T_0), so equal consecutive
    dimensions mean equality; at most dim(start) strict drops can occur.
    """
    current = start
    for _ in range(start.dim + 1):
        nxt = span(op.field, [op.apply(row) for row in current.rows])
        if nxt.dim == current.dim:
            return current
        current = nxt
    raise AssertionError("core iteration failed to stabilize within the dimension bound")


def find_trace(op, max_power: int = DEFAULT_MAX_POWER,
               window: int = DEFAULT_TRACE_WINDOW, probe: int | None = None) -> TraceCertificate:
    """Certified stabilized-image trace of a window-verified finite-potent operator."""
    if probe is None:
        probe = default_probe(op)
    if max_power < 1 or window < 1 or probe < 1:
        raise ValueError("max_power, window and probe must be >= 1")
    field = op.field
    images = [op.apply_basis(i) for i in range(1, window + probe + 1)]
    attempts = []
    chain_dims = []
    for n in range(1, max_power + 1):
        if n > 1:
            images = [op.apply(x) for x in images]
        small = span(field, images[:window])
        chain_dims.append(small.dim)
        big = span(field, images)
        if small != big:
            attempts.append(
                (n, f"window span (dim {small.dim}) != probe span (dim {big.dim}); "
                    "condition (a) failed")
            )
            continue
        escape = next((row for row in small.rows if not small.contains(op.apply(row))), None)
        if escape is not None:
            attempts.append(
                (n, f"image of a span vector (pivot {escape.max_index()}) leaves the span; "
                    "condition (b) failed")
            )
            continue
        core = _stable_core(op, small)
        core_matrix = restrict_operator(op.apply, core)
        return TraceCertificate(
            op.name, field, window, probe, n, chain_dims, core, core_matrix,
            core_matrix.trace(),
        )
    raise NotStabilizedError(op.name, max_power, window, probe, attempts)


class NilpotencyReport:
    __slots__ = (
        "operator_name", "field", "max_power", "window", "ok", "order",
        "witness_index", "witness", "failure_index",
    )

    def __init__(self, operator_name, field, max_power, window, ok, order,
                 witness_index, witness, failure_index):
        self.operator_name = operator_name
        self.field = field
        self.max_power = max_power
        self.window = window
        self.ok = ok
        self.order = order
        self.witness_index = witness_index
        self.witness = witness
        self.failure_index = failure_index

    def to_json_dict(self):
        return {
            "operator": self.operator_name,
            "field": self.field.selector,
            "max_power": self.max_power,
            "window": self.window,
            "nilpotent_within_window": self.ok,
            "order": self.order,
            "witness_index": self.witness_index,
            "witness": None if self.witness is None else self.witness.to_pairs(),
            "failure_index": self.failure_index,
        }


def check_nilpotent(op, max_power: int, window: int) -> NilpotencyReport:
    """Least q <= max_power with op^q = 0 on v_1..v_window, with a witness.

    The witness is the smallest-index basis vector x with op^(q-1)(x) != 0.
    If some op^max_power(v_i) != 0 the report carries that failure index
    instead (failure is a result, not an error).
    """
    if max_power < 1 or window < 1:
        raise ValueError("max_power and window must be >= 1")
    order = 0
    witness_index = None
    for i in range(1, window + 1):
        current = op.apply_basis(i)
        steps = 1
        while not current.is_zero and steps < max_power:
            current = op.apply(current)
            steps += 1
        if not current.is_zero:
            return NilpotencyReport(
                op.name, op.field, max_power, window, False, None, None, None, i
            )
        if steps > order:
            order = steps
            witness_index = i
    witness = SparseVector.basis(op.field, witness_index)
    return NilpotencyReport(
        op.name, op.field, max_power, window, True, order, witness_index, witness, None
    )


class ASTClaim:
    """Claimed core/nilpotent split: W spanned explicitly, U a cofinite tail.

    U = span{v_i : i >= u_threshold} plus optional extra vectors; the
    operator should restrict to an isomorphism on W and be nilpotent of
    exactly ``nilpotency_order`` on U.
    """

    __slots__ = ("w_basis", "u_threshold", "nilpotency_order", "u_extra")

    def __init__(self, w_basis, u_threshold: int, nilpotency_order: int, u_extra=()):
        self.w_basis = tuple(w_basis)
        self.u_threshold = u_threshold
        self.nilpotency_order = nilpotency_order
        self.u_extra = tuple(u_extra)
        if u_threshold < 1:
            raise ValueError("u_threshold must be >= 1")
        if nilpotency_order < 1:
            raise ValueError("nilpotency_order must be >= 1")


class ASTReport:
    __slots__ = ("operator_name", "field", "window", "checks", "core_matrix", "trace")

    def __init__(self, operator_name, field, window, checks, core_matrix, trace):
        self.operator_name = operator_name
        self.field = field
        self.window = window
        self.checks = checks  # list of (name, passed, detail)
        self.core_matrix = core_matrix
        self.trace = trace

    @property
    def all_passed(self) -> bool:
        return all(passed for _, passed, _ in self.checks)

    def failures(self):
        return [(name, detail) for name, passed, detail in self.checks if not passed]

    def to_json_dict(self):
        return {
            "operator": self.operator_name,
            "field": self.field.selector,
            "window": self.window,
            "checks": [
                {"name": name, "passed": passed, "detail": detail}
                for name, passed, detail in self.checks
            ],
            "core_matrix": None if self.core_matrix is None else self.core_matrix.to_str_rows(),
            "trace": None if self.trace is None else self.field.to_str(self.trace),
            "verdict": "PASS" if self.all_passed else "FAIL",
        }


def verify_ast(op, claim: ASTClaim, window: int = DEFAULT_TRACE_WINDOW) -> ASTReport:
    """Check a claimed W ⊕ U core/nilpotent decomposition on a window."""
    field = op.field
    checks = []
    w_span = span(field, claim.w_basis)
    if w_span.dim != len(claim.w_basis):
        raise ValueError("malformed claim: W basis is linearly dependent")

    # (1) W invariant and op|_W an isomorphism.
    core_matrix = None
    det = None
    try:
        core_matrix = restrict_operator(op.apply, w_span)
        det = core_matrix.det()
        passed = det != field.zero
        detail = f"det(op|_W) = {field.to_str(det)}" if passed else "det(op|_W) = 0"
        checks.append(("w_invariant_isomorphism", passed, detail))
    except NotInvariantError as err:
        checks.append(("w_invariant_isomorphism", False, str(err)))

    # (2) U invariant: images of U vectors have no component on W pivots.
    u_vectors = list(claim.u_extra) + [
        SparseVector.basis(field, i) for i in range(claim.u_threshold, window + 1)
    ]
    bad = None
    for x in u_vectors:
        image = op.apply(x)
        hit = next((p for p in w_span.pivots if image.coeff(p) != field.zero), None)
        if hit is not None:
            bad = (x, hit)
            break
    checks.append(
        ("u_invariant", bad is None,
         "all U images clear of W coordinates" if bad is None else
         f"op({bad[0].to_text(op.basis_name)}) has a component on W pivot {bad[1]}")
    )

    # (3) op|_U nilpotent of exactly the claimed order on the window.
    order = 0
    failure = None
    for x in u_vectors:
        current = x
        steps = 0
        while not current.is_zero and steps < claim.nilpotency_order:
            current = op.apply(current)
            steps += 1
        if not current.is_zero:
            failure = x
            break
        order = max(order, steps)
    if failure is not None:
        checks.append(
            ("u_nilpotent", False,
             f"op^{claim.nilpotency_order}({failure.to_text(op.basis_name)}) != 0")
        )
    else:
        passed = order == claim.nilpotency_order or not u_vectors
        checks.append(
            ("u_nilpotent", passed,
             f"order {order} on the window (claimed {claim.nilpotency_order})")
        )

    # (4) W ⊕ U is direct and spans v_1..v_window.
    u_window = [x for x in u_vectors if x.max_index() is not None and x.max_index() <= window]
    total = span(field, list(claim.w_basis) + u_window)
    expected_dim = w_span.dim + len(u_window)
    full = span(field, [SparseVector.basis(field, i) for i in range(1, window + 1)])
    direct = total.dim == expected_dim
    complete = total == full
    checks.append(
        ("direct_sum", direct and complete,
         f"dim(W + U) = {total.dim}, expected {expected_dim}; "
         f"spans window: {complete}")
    )

    # (5) trace of op|_W.
    trace = core_matrix.trace() if core_matrix is not None else None
    checks.append(
        ("w_trace", trace is not None,
         "trace undefined (restriction failed)" if trace is None
         else f"trace(op|_W) = {field.to_str(trace)}")
    )
    return ASTReport(op.name, field, window, checks, core_matrix, trace)


# -- randomized axiom suite -------------------------------------------------


def _random_matrix(field, rng, rows, cols):
    return FiniteMatrix(
        field, [[field.random(rng) for _ in range(cols)] for _ in range(rows)], ncols=cols
    )


def _random_unimodular(field, rng, n):
    """L·U with unit diagonals: determinant 1, exactly invertible."""
    lower = [[field.one if r == c else (field.random(rng) if r > c else field.zero)
              for c in range(n)] for r in range(n)]
    upper = [[field.one if r == c else (field.random(rng) if r < c else field.zero)
              for c in range(n)] for r in range(n)]
    return FiniteMatrix(field, lower, ncols=n) @ FiniteMatrix(field, upper, ncols=n)


def _find_trace_of_matrix(matrix: FiniteMatrix):
    """Stabilized-image trace of a finite matrix embedded with cofinite zero action."""
    op = finite_operator(matrix, basis_name="v", name="embedded")
    cert = find_trace(op, max_power=matrix.nrows + 2, window=matrix.nrows + 4, probe=4)
    return cert.trace


class AxiomReport:
    __slots__ = ("field", "seed", "trials", "max_dim", "properties")

    PROPERTY_NAMES = (
        "finite_dimensional_agreement",
        "subspace_additivity",
        "nilpotent_zero",
        "finite_rank_linearity",
        "commutation_invariance",
    )

    def __init__(self, field, seed, trials, max_dim):
        self.field = field
        self.seed = seed
        self.trials = trials
        self.max_dim = max_dim
        self.properties = {name: [] for name in self.PROPERTY_NAMES}

    def record_failure(self, name, trial, detail):
        self.properties[name].append({"trial": trial, "detail": detail})

    @property
    def total_failures(self) -> int:
        return sum(len(failures) for failures in self.properties.values())

    def to_json_dict(self):
        return {
            "field": self.field.selector,
            "seed": self.seed,
            "trials": self.trials,
            "max_dim": self.max_dim,
            "properties": [
                {"name": name, "failures": self.properties[name]}
                for name in self.PROPERTY_NAMES
            ],
            "total_failures": self.total_failures,
            "verdict": "PASS" if self.total_failures == 0 else "FAIL",
        }


def axiom_suite(field, seed: int, trials: int, max_dim: int) -> AxiomReport:
    """Randomized exact checks of the five trace properties; failures listed."""
    import random

    if trials < 1 or max_dim < 2:
        raise ValueError("trials must be >= 1 and max_dim >= 2")
    rng = random.Random(seed)
    report = AxiomReport(field, seed, trials, max_dim)
    to_str = field.to_str

    for trial in range(trials):
        # (P1) engine trace of an embedded finite matrix = ordinary trace.
        d = rng.randint(1, max_dim)
        matrix = _random_matrix(field, rng, d, d)
        expected = matrix.trace()
        got = _find_trace_of_matrix(matrix)
        if got != expected:
            report.record_failure(
                "finite_dimensional_agreement", trial,
                f"matrix {matrix.to_str_rows()}: ordinary trace {to_str(expected)}, "
                f"engine trace {to_str(got)}",
            )

        # (P2) trace = trace on an invariant subspace + trace on the quotient.
        d1 = rng.randint(1, max_dim - 1)
        d2 = rng.randint(1, max_dim - d1)
        n = d1 + d2
        block = [
            [field.zero if r >= d1 and c < d1 else field.random(rng) for c in range(n)]
            for r in range(n)
        ]
        upper = FiniteMatrix(field, block, ncols=n)
        q = _random_unimodular(field, rng, n)
        conjugated = q @ upper @ q.inverse()
        w = span(field, [q.column(c) for c in range(1, d1 + 1)])
        try:
            restricted = restrict_operator(lambda x: matrix_apply(conjugated, x), w)
            quotient = quotient_operator(conjugated, w)
            lhs = conjugated.trace()
            rhs = field.add(restricted.trace(), quotient.trace())
            if lhs != rhs:
                report.record_failure(
                    "subspace_additivity", trial,
                    f"matrix {conjugated.to_str_rows()}: total {to_str(lhs)}, "
                    f"restricted+quotient {to_str(rhs)}",
                )
        except NotInvariantError as err:
            report.record_failure("subspace_additivity", trial, f"invariance lost: {err}")

        # (P3) nilpotent operators have trace 0.
        d = rng.randint(2, max_dim)
        strictly_upper = FiniteMatrix(
            field,
            [[field.random(rng) if c > r else field.zero for c in range(d)] for r in range(d)],
            ncols=d,
        )
        q = _random_unimodular(field, rng, d)
        nilpotent = q @ strictly_upper @ q.inverse()
        got = _find_trace_of_matrix(nilpotent)
        if got != field.zero:
            report.record_failure(
                "nilpotent_zero", trial,
                f"nilpotent {nilpotent.to_str_rows()}: engine trace {to_str(got)}",
            )

        # (P4) linearity on finite-rank operators.
        d = rng.randint(1, max_dim)
        f_mat = _random_matrix(field, rng, d, d)
        g_mat = _random_matrix(field, rng, d, d)
        a = field.random(rng)
        b = field.random(rng)
        combo = f_mat.scale(a) + g_mat.scale(b)
        lhs = _find_trace_of_matrix(combo)
        rhs = field.add(
            field.mul(a, _find_trace_of_matrix(f_mat)),
            field.mul(b, _find_trace_of_matrix(g_mat)),
        )
        if lhs != rhs:
            report.record_failure(
                "finite_rank_linearity", trial,
                f"a={to_str(a)}, b={to_str(b)}, f={f_mat.to_str_rows()}, "
                f"g={g_mat.to_str_rows()}: tr(af+bg)={to_str(lhs)}, "
                f"a·tr f + b·tr g={to_str(rhs)}",
            )

        # (P5) tr(f∘g) = tr(g∘f) for maps between different spaces.
        rows = rng.randint(1, max_dim)
        cols = rng.randint(1, max_dim)
        f_rect = _random_matrix(field, rng, rows, cols)
        g_rect = _random_matrix(field, rng, cols, rows)
        lhs = (f_rect @ g_rect).trace()
        rhs = (g_rect @ f_rect).trace()
        if lhs != rhs:
            report.record_failure(
                "commutation_invariance", trial,
                f"f={f_rect.to_str_rows()}, g={g_rect.to_str_rows()}: "
                f"tr(fg)={to_str(lhs)}, tr(gf)={to_str(rhs)}",
            )
    return report
