"""Textual format for rule operators: tokenizer, parser, canonical printer.

An operator block looks like

    operator theta2 over v {
      reach 3;
      case i = 1: v[1] - v[3];
      case i = 4*k, k >= 1: v[4*k + 2];
      case i = 4*k + 1, k >= 1: -v[1] + v[2] + sum(j = 2 .. 2*k + 1, (-1)^(j + 1), v[2*j]);
    }

Whitespace is insignificant, ``#`` starts a line comment, identifiers are
case-sensitive, rationals are ``p/q`` or integers (no decimals). The printer
emits a normalized form (one case per line, exceptional cases first in index
order, family cases by (modulus, residue), terms in increasing index order)
which is a fixed point of parse-then-print.
"""

from __future__ import annotations

from fractions import Fraction

from .fields import QQ
from .operators import (
    FamilyRule,
    LinearForm,
    NonIntegerIndexError,
    OverlapError,
    RuleOperator,
    SumTerm,
    Term,
)
from .vectors import SparseVector


class OpSyntaxError(ValueError):
    """Malformed operator text, with 1-based line/column position."""

    def __init__(self, message, line, col):
        super().__init__(f"syntax error at {line}:{col}: {message}")
        self.line = line
        self.col = col


class NotSerializableError(TypeError):
    """Only rule operators have a textual form; lazy views do not."""


_SYMBOLS_2 = (">=", "..")
_SYMBOLS_1 = "{}[]();:,=+-*/^"


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind  # "name" | "int" | "sym" | "eof"
        self.value = value
        self.line = line
        self.col = col

    def __repr__(self):
        return f"_Token({self.kind}, {self.value!r}, {self.line}:{self.col})"


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    pos, end = 0, len(text)
    while pos < end:
        ch = text[pos]
        if ch == "\n":
            line += 1
            col = 1
            pos += 1
            continue
        if ch in " \t\r":
            pos += 1
            col += 1
            continue
        if ch == "#":
            while pos < end and text[pos] != "\n":
                pos += 1
            continue
        if ch.isdigit():
            start = pos
            while pos < end and text[pos].isdigit():
                pos += 1
            tokens.append(_Token("int", int(text[start:pos]), line, col))
            col += pos - start
            continue
        if ch.isalpha() or ch == "_":
            start = pos
            while pos < end and (text[pos].isalnum() or text[pos] == "_"):
                pos += 1
            tokens.append(_Token("name", text[start:pos], line, col))
            col += pos - start
            continue
        if text[pos : pos + 2] in _SYMBOLS_2:
            tokens.append(_Token("sym", text[pos : pos + 2], line, col))
            pos += 2
            col += 2
            continue
        if ch in _SYMBOLS_1:
            tokens.append(_Token("sym", ch, line, col))
            pos += 1
            col += 1
            continue
        raise OpSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", None, line, col))
    return tokens


class _Parser:
    def __init__(self, text, field):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.field = field

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead=0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def fail(self, message, token=None):
        token = token or self.peek()
        raise OpSyntaxError(message, token.line, token.col)

    def expect_sym(self, value) -> _Token:
        token = self.peek()
        if token.kind != "sym" or token.value != value:
            self.fail(f"expected {value!r}", token)
        return self.next()

    def expect_name(self, value=None) -> _Token:
        token = self.peek()
        if token.kind != "name" or (value is not None and token.value != value):
            want = repr(value) if value is not None else "an identifier"
            self.fail(f"expected {want}", token)
        return self.next()

    def expect_int(self) -> int:
        sign = 1
        token = self.peek()
        if token.kind == "sym" and token.value in "+-":
            sign = -1 if token.value == "-" else 1
            self.next()
            token = self.peek()
        if token.kind != "int":
            self.fail("expected an integer", token)
        self.next()
        return sign * token.value

    def at_sym(self, value, ahead=0) -> bool:
        token = self.peek(ahead)
        return token.kind == "sym" and token.value == value

    # -- grammar -----------------------------------------------------------

    def parse_file(self):
        operators = []
        names = set()
        while self.peek().kind != "eof":
            token = self.peek()
            op = self.parse_operator_block()
            if op.name in names:
                self.fail(f"duplicate operator name {op.name!r}", token)
            names.add(op.name)
            operators.append(op)
        return operators

    def parse_operator_block(self) -> RuleOperator:
        self.expect_name("operator")
        name = self.expect_name().value
        self.expect_name("over")
        basis = self.expect_name().value
        self.expect_sym("{")
        self.expect_name("reach")
        reach_token = self.peek()
        reach = self.expect_int()
        if reach < 0:
            self.fail("reach must be >= 0", reach_token)
        self.expect_sym(";")
        exceptional = {}
        families = []
        saw_case = False
        while not self.at_sym("}"):
            self.parse_case(basis, exceptional, families)
            saw_case = True
        if not saw_case:
            self.fail("operator needs at least one case")
        self.expect_sym("}")
        return RuleOperator(name, basis, self.field, reach, exceptional, families)

    def parse_case(self, basis, exceptional, families):
        self.expect_name("case")
        self.expect_name("i")
        self.expect_sym("=")
        pattern_token = self.peek()
        form = self.parse_affine(allowed=("k",))
        if form.k == 0:
            if form.const.denominator != 1 or form.const < 1:
                self.fail("exceptional index must be a positive integer", pattern_token)
            index = form.const.numerator
            if self.at_sym(","):
                self.fail("an exceptional case takes no k constraint")
            self.expect_sym(":")
            image = self.parse_exceptional_image(basis)
            self.expect_sym(";")
            if index in exceptional:
                raise OverlapError(f"two exceptional rules for index {index}")
            exceptional[index] = image
        else:
            if form.k.denominator != 1 or form.k < 1:
                self.fail("family modulus must be a positive integer", pattern_token)
            if form.const.denominator != 1:
                self.fail("family offset must be an integer", pattern_token)
            self.expect_sym(",")
            self.expect_name("k")
            self.expect_sym(">=")
            k_min = self.expect_int()
            self.expect_sym(":")
            terms = self.parse_terms(basis, allowed=("k",))
            self.expect_sym(";")
            families.append(FamilyRule(form.k.numerator, form.const.numerator, k_min, terms))

    def parse_exceptional_image(self, basis) -> SparseVector:
        terms = self.parse_terms(basis, allowed=())
        field = self.field
        acc = {}
        for term in terms:
            for idx, value in term.evaluate(field, 0):
                if idx < 1:
                    raise NonIntegerIndexError(f"image index {idx} < 1 in exceptional case")
                total = field.add(acc.get(idx, field.zero), value)
                if total == field.zero:
                    acc.pop(idx, None)
                else:
                    acc[idx] = total
        return SparseVector(field, acc)

    def parse_terms(self, basis, allowed):
        """± separated term list; a bare ``0`` denotes the empty list."""
        if self.peek().kind == "int" and self.peek().value == 0 and self.at_sym(";", 1):
            self.next()
            return []
        terms = []
        first = True
        while True:
            sign = 1
            if self.at_sym("+") or self.at_sym("-"):
                if self.at_sym("-"):
                    sign = -1
                self.next()
            elif not first:
                break
            terms.append(self.parse_term(basis, allowed, sign))
            first = False
        return terms

    def parse_term(self, basis, allowed, sign):
        token = self.peek()
        if token.kind == "name" and token.value == "sum":
            return self.parse_sum(basis, allowed, sign)
        if token.kind == "name":
            if token.value != basis:
                self.fail(f"unknown basis {token.value!r} (operator is over {basis!r})", token)
            index = self.parse_atom_index(basis, allowed)
            return Term(Fraction(sign), None, index)
        coeff, sign_form = self.parse_coeff(allowed)
        self.expect_sym("*")
        name_token = self.peek()
        if name_token.kind != "name" or name_token.value != basis:
            self.fail(f"expected basis {basis!r} after coefficient", name_token)
        index = self.parse_atom_index(basis, allowed)
        return Term(sign * coeff, sign_form, index)

    def parse_sum(self, basis, allowed, sign) -> SumTerm:
        self.expect_name("sum")
        self.expect_sym("(")
        self.expect_name("j")
        self.expect_sym("=")
        lo = self.parse_affine(allowed=allowed)
        self.expect_sym("..")
        hi = self.parse_affine(allowed=allowed)
        self.expect_sym(",")
        inner_allowed = tuple(allowed) + ("j",)
        coeff_sign = 1
        while self.at_sym("+") or self.at_sym("-"):
            if self.at_sym("-"):
                coeff_sign = -coeff_sign
            self.next()
        coeff, sign_form = self.parse_coeff(inner_allowed)
        self.expect_sym(",")
        name_token = self.peek()
        if name_token.kind != "name" or name_token.value != basis:
            self.fail(f"expected basis {basis!r} inside sum", name_token)
        index = self.parse_atom_index(basis, inner_allowed)
        self.expect_sym(")")
        return SumTerm(lo, hi, sign * coeff_sign * coeff, sign_form, index)

    def parse_atom_index(self, basis, allowed) -> LinearForm:
        self.expect_name(basis)
        self.expect_sym("[")
        index = self.parse_affine(allowed=allowed)
        self.expect_sym("]")
        return index

    def parse_coeff(self, allowed):
        """Rational, (-1)^(L), or rational*(-1)^(L); sign handled by caller."""
        if self.at_sym("("):
            return Fraction(1), self.parse_sign_pow(allowed)
        rational = self.parse_rational()
        if self.at_sym("*") and self.at_sym("(", 1):
            self.next()
            return rational, self.parse_sign_pow(allowed)
        return rational, None

    def parse_rational(self) -> Fraction:
        token = self.peek()
        if token.kind != "int":
            self.fail("expected a rational literal", token)
        self.next()
        value = Fraction(token.value)
        if self.at_sym("/"):
            self.next()
            denom_token = self.peek()
            if denom_token.kind != "int" or denom_token.value == 0:
                self.fail("expected a nonzero integer denominator", denom_token)
            self.next()
            value /= denom_token.value
        return value

    def parse_sign_pow(self, allowed) -> LinearForm:
        self.expect_sym("(")
        self.expect_sym("-")
        one = self.peek()
        if one.kind != "int" or one.value != 1:
            self.fail("expected (-1)^(...)", one)
        self.next()
        self.expect_sym(")")
        self.expect_sym("^")
        self.expect_sym("(")
        form = self.parse_affine(allowed=allowed)
        self.expect_sym(")")
        if form.j.denominator != 1 or form.k.denominator != 1 or form.const.denominator != 1:
            self.fail("sign exponent must have integer coefficients")
        return form

    def parse_affine(self, allowed) -> LinearForm:
        """Sum of terms coeff, coeff*var, coeff var, var, var/INT over + and -."""
        j = k = const = Fraction(0)
        first = True
        while True:
            sign = 1
            saw_sign = False
            while self.at_sym("+") or self.at_sym("-"):
                if self.at_sym("-"):
                    sign = -sign
                self.next()
                saw_sign = True
            if not first and not saw_sign:
                break
            token = self.peek()
            if token.kind == "int":
                value = self.parse_rational()
                var = None
                if self.at_sym("*") and self.peek(1).kind == "name":
                    self.next()
                    var = self.next()
                elif self.peek().kind == "name":
                    var = self.next()
                if var is None:
                    const += sign * value
                else:
                    j, k = self._add_var(var, allowed, sign * value, j, k)
            elif token.kind == "name":
                var = self.next()
                value = Fraction(1)
                if self.at_sym("/"):
                    self.next()
                    denom_token = self.peek()
                    if denom_token.kind != "int" or denom_token.value == 0:
                        self.fail("expected a nonzero integer denominator", denom_token)
                    self.next()
                    value /= denom_token.value
                j, k = self._add_var(var, allowed, sign * value, j, k)
            else:
                self.fail("expected an affine expression", token)
            first = False
        return LinearForm(j, k, const)

    def _add_var(self, token, allowed, value, j, k):
        if token.value not in allowed:
            scope = ", ".join(allowed) if allowed else "none"
            self.fail(
                f"symbol {token.value!r} not allowed here (in scope: {scope})", token
            )
        if token.value == "j":
            return j + value, k
        return j, k + value


def parse(text: str, field=QQ):
    """Parse operator definitions; returns the list of operators in file order."""
    return _Parser(text, field).parse_file()


def parse_path(path, field=QQ):
    with open(path, "r", encoding="utf-8") as handle:
        return parse(handle.read(), field)


# -- printing ---------------------------------------------------------------


def _format_affine(form: LinearForm) -> str:
    parts = []
    for coeff, symbol in ((form.j, "j"), (form.k, "k")):
        if coeff == 0:
            continue
        magnitude = abs(coeff)
        body = symbol if magnitude == 1 else f"{magnitude}*{symbol}"
        parts.append(("-" if coeff < 0 else "+", body))
    if form.const != 0 or not parts:
        parts.append(("-" if form.const < 0 else "+", str(abs(form.const))))
    head_sign, head = parts[0]
    text = (head_sign if head_sign == "-" else "") + head
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def _format_signed_coeff(coeff: Fraction, sign_form, atom: str):
    """Return (joiner_sign, rendered term text) for a term of a ± list."""
    if sign_form is not None:
        exponent = sign_form
        if coeff < 0:
            exponent = LinearForm(sign_form.j, sign_form.k, sign_form.const + 1)
            coeff = -coeff
        power = f"(-1)^({_format_affine(exponent)})"
        if coeff == 1:
            return "+", f"{power}*{atom}"
        return "+", f"{coeff}*{power}*{atom}"
    joiner = "-" if coeff < 0 else "+"
    magnitude = abs(coeff)
    if magnitude == 1:
        return joiner, atom
    return joiner, f"{magnitude}*{atom}"


def _format_bare_coeff(coeff: Fraction, sign_form) -> str:
    """Coefficient argument inside sum(...), sign carried inside."""
    if sign_form is None:
        return str(coeff)
    exponent = sign_form
    if coeff < 0:
        exponent = LinearForm(sign_form.j, sign_form.k, sign_form.const + 1)
        coeff = -coeff
    power = f"(-1)^({_format_affine(exponent)})"
    if coeff == 1:
        return power
    return f"{coeff}*{power}"


def _format_terms(parts) -> str:
    """Join (joiner_sign, text) pairs into a ± separated expression."""
    if not parts:
        return "0"
    sign, text = parts[0]
    out = ("-" if sign == "-" else "") + text
    for sign, text in parts[1:]:
        out += f" {sign} {text}"
    return out


def _format_term(term, basis: str):
    if isinstance(term, SumTerm):
        atom = f"{basis}[{_format_affine(term.index)}]"
        inner = _format_bare_coeff(term.coeff, term.sign)
        text = (
            f"sum(j = {_format_affine(term.lo)} .. {_format_affine(term.hi)}, {inner}, {atom})"
        )
        return "+", text
    atom = f"{basis}[{_format_affine(term.index)}]"
    return _format_signed_coeff(term.coeff, term.sign, atom)


def print_operator(op) -> str:
    """Canonical text for a rule operator (fixed point of parse-then-print)."""
    if not isinstance(op, RuleOperator):
        raise NotSerializableError(
            f"{getattr(op, 'name', op)!r} is a lazy view, not a rule set; only rule "
            "operators serialize"
        )
    basis = op.basis_name
    to_str = op.field.to_str
    lines = [f"operator {op.name} over {basis} {{", f"  reach {op.reach};"]
    for index, image in op.exceptional_rules.items():
        parts = []
        for idx, value in image.items():
            text = to_str(value)
            if text.startswith("-"):
                joiner, magnitude = "-", text[1:]
            else:
                joiner, magnitude = "+", text
            atom = f"{basis}[{idx}]"
            parts.append((joiner, atom if magnitude == "1" else f"{magnitude}*{atom}"))
        lines.append(f"  case i = {index}: {_format_terms(parts)};")
    for rule in op.family_rules:
        pattern = _format_affine(LinearForm(0, rule.modulus, rule.offset))
        body = _format_terms([_format_term(term, basis) for term in rule.terms])
        lines.append(f"  case i = {pattern}, k >= {rule.k_min}: {body};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_operators(ops) -> str:
    return "\n".join(print_operator(op) for op in ops)


# -- vector literals (CLI input) -------------------------------------------


def parse_vector(text: str, field, basis: str) -> SparseVector:
    """Parse a literal like ``v[1] - 2*v[3] + 1/2*v[5]`` (or ``0``)."""
    parser = _Parser(text, field)
    if parser.peek().kind == "int" and parser.peek().value == 0 and parser.peek(1).kind == "eof":
        return SparseVector.zero(field)
    acc = {}
    first = True
    while parser.peek().kind != "eof":
        sign = 1
        saw_sign = False
        while parser.at_sym("+") or parser.at_sym("-"):
            if parser.at_sym("-"):
                sign = -sign
            parser.next()
            saw_sign = True
        if not first and not saw_sign:
            parser.fail("expected + or - between terms")
        token = parser.peek()
        if token.kind == "int":
            coeff = parser.parse_rational()
            parser.expect_sym("*")
        else:
            coeff = Fraction(1)
        name_token = parser.peek()
        if name_token.kind != "name" or name_token.value != basis:
            parser.fail(f"expected basis {basis!r}", name_token)
        parser.next()
        parser.expect_sym("[")
        index_token = parser.peek()
        index = parser.expect_int()
        if index < 1:
            parser.fail("basis index must be >= 1", index_token)
        parser.expect_sym("]")
        value = field.from_fraction(sign * coeff)
        total = field.add(acc.get(index, field.zero), value)
        if total == field.zero:
            acc.pop(index, None)
        else:
            acc[index] = total
        first = False
    if first:
        parser.fail("empty vector expression")
    return SparseVector(field, acc)
