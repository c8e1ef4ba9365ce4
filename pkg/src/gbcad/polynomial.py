"""Sparse multivariate polynomials with exact rational coefficients.

Exponent vectors are stored in CAD variable order (first variable lowest).
The monomial ordering is pure lex with the *last* variable most significant,
so for the order ``[x, y, z]`` we have ``z > y > x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple, Union

Monomial = Tuple[int, ...]
Rational = Union[int, Fraction]

MAX_EXPONENT = 10_000


class PolynomialError(ValueError):
    pass


class OrderMismatchError(PolynomialError):
    pass


class ParseError(PolynomialError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.text = text


@dataclass(frozen=True)
class VariableOrder:
    """Variables in CAD order, lowest first."""

    names: Tuple[str, ...]

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if not names:
            raise ValueError("variable order must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variables in {names}")
        object.__setattr__(self, "names", names)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)


DEFAULT_ORDER = VariableOrder(("x", "y", "z"))


def lex_key(m: Monomial) -> Monomial:
    """Sort key realising the lex order: compare from the last variable down."""
    return m[::-1]


def lex_greater(a: Monomial, b: Monomial) -> bool:
    return a[::-1] > b[::-1]


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(i + j for i, j in zip(a, b))


def mono_divides(a: Monomial, b: Monomial) -> bool:
    """True if ``a`` divides ``b``."""
    return all(i <= j for i, j in zip(a, b))


def mono_div(a: Monomial, b: Monomial) -> Monomial:
    return tuple(i - j for i, j in zip(a, b))


def mono_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(max(i, j) for i, j in zip(a, b))


class Polynomial:
    """Immutable polynomial: a map from exponent tuples to non-zero Fractions."""

    __slots__ = ("_terms", "order", "_hash")

    def __init__(self, terms: Mapping[Monomial, Rational], order: VariableOrder = DEFAULT_ORDER):
        n = len(order)
        clean: Dict[Monomial, Fraction] = {}
        for mono, coeff in terms.items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != n:
                raise PolynomialError(f"monomial {mono} has wrong length for {order.names}")
            if any(e < 0 for e in mono):
                raise PolynomialError(f"negative exponent in {mono}")
            c = Fraction(coeff)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self._terms = clean
        self.order = order
        self._hash = None

    @classmethod
    def _raw(cls, terms: Dict[Monomial, Fraction], order: VariableOrder) -> "Polynomial":
        # trusted constructor: terms already canonical
        p = cls.__new__(cls)
        p._terms = terms
        p.order = order
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Rational, order: VariableOrder = DEFAULT_ORDER) -> "Polynomial":
        return cls({(0,) * len(order): c}, order)

    @classmethod
    def variable(cls, name: str, order: VariableOrder = DEFAULT_ORDER) -> "Polynomial":
        e = [0] * len(order)
        e[order.index(name)] = 1
        return cls({tuple(e): 1}, order)

    @classmethod
    def zero(cls, order: VariableOrder = DEFAULT_ORDER) -> "Polynomial":
        return cls._raw({}, order)

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        """Terms in descending lex order."""
        for m in sorted(self._terms, key=lex_key, reverse=True):
            yield m, self._terms[m]

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.order == other.order and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.order, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)

    def _check(self, other: "Polynomial") -> None:
        if self.order != other.order:
            raise OrderMismatchError(f"{self.order.names} != {other.order.names}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return add(self, other)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return subtract(self, other)

    def __mul__(self, other: Union["Polynomial", Rational]) -> "Polynomial":
        if isinstance(other, Polynomial):
            return multiply(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return scale(self, -1)


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    p._check(q)
    out = dict(p._terms)
    for m, c in q._terms.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)
    return Polynomial._raw(out, p.order)


def subtract(p: Polynomial, q: Polynomial) -> Polynomial:
    return add(p, scale(q, -1))


def scale(p: Polynomial, c: Rational) -> Polynomial:
    c = Fraction(c)
    if not c:
        return Polynomial.zero(p.order)
    return Polynomial._raw({m: v * c for m, v in p._terms.items()}, p.order)


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    p._check(q)
    out: Dict[Monomial, Fraction] = {}
    for m1, c1 in p._terms.items():
        for m2, c2 in q._terms.items():
            m = mono_mul(m1, m2)
            s = out.get(m, 0) + c1 * c2
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return Polynomial._raw(out, p.order)


def leading_term(p: Polynomial) -> Tuple[Monomial, Fraction]:
    if p.is_zero():
        raise PolynomialError("zero polynomial has no leading term")
    m = max(p._terms, key=lex_key)
    return m, p._terms[m]


def total_degree(p: Polynomial) -> int:
    if p.is_zero():
        raise PolynomialError("total degree of the zero polynomial is undefined")
    return max(sum(m) for m in p._terms)


def noi(p: Polynomial) -> int:
    """Number of distinct variables occurring in ``p``."""
    return sum(1 for i in range(len(p.order)) if any(m[i] for m in p._terms))


def monomial_count(p: Polynomial) -> int:
    return len(p._terms)


def contains_variable(p: Polynomial, v: str) -> bool:
    i = p.order.index(v)
    return any(m[i] for m in p._terms)


def max_degree_in(p: Polynomial, v: str) -> int:
    i = p.order.index(v)
    return max((m[i] for m in p._terms), default=0)


# --- text I/O ---------------------------------------------------------------

def _format_monomial(m: Monomial, names: Sequence[str]) -> str:
    parts = []
    # highest variable first, as in "y*z" and "x*z"
    for i in range(len(m)):
        e = m[i]
        if e == 1:
            parts.append(names[i])
        elif e > 1:
            parts.append(f"{names[i]}^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    out = []
    for k, (m, c) in enumerate(p.items()):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        mono = _format_monomial(m, p.order.names)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        if k == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


class _Parser:
    # recursive descent over the grammar in the README
    def __init__(self, text: str, order: VariableOrder):
        self.text = text
        self.order = order
        self.pos = 0

    def error(self, msg: str, pos: int = None):
        raise ParseError(msg, self.pos if pos is None else pos, self.text)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def nat(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected a number")
        return int(self.text[start:self.pos])

    def var(self) -> int:
        self.skip()
        start = self.pos
        if not (self.pos < len(self.text) and self.text[self.pos].isalpha()):
            self.error("expected a variable")
        while self.pos < len(self.text) and self.text[self.pos].isalnum():
            self.pos += 1
        name = self.text[start:self.pos]
        try:
            return self.order.index(name)
        except ValueError:
            self.error(f"unknown variable {name!r}", start)

    def factors(self, exps: list) -> None:
        while True:
            i = self.var()
            e = 1
            if self.peek() == "^":
                self.pos += 1
                at = self.pos
                e = self.nat()
                if e > MAX_EXPONENT:
                    self.error(f"exponent {e} exceeds {MAX_EXPONENT}", at)
            exps[i] += e
            if exps[i] > MAX_EXPONENT:
                self.error(f"exponent exceeds {MAX_EXPONENT}")
            if self.peek() != "*":
                return
            self.pos += 1

    def term(self) -> Tuple[Monomial, Fraction]:
        exps = [0] * len(self.order)
        coeff = Fraction(1)
        ch = self.peek()
        if ch.isdigit():
            num = self.nat()
            if self.peek() == "/":
                self.pos += 1
                at = self.pos
                den = self.nat()
                if den == 0:
                    self.error("zero denominator", at)
                coeff = Fraction(num, den)
            else:
                coeff = Fraction(num)
            if self.peek() == "*":
                self.pos += 1
                self.factors(exps)
        elif ch.isalpha():
            self.factors(exps)
        else:
            self.error("expected a term")
        return tuple(exps), coeff

    def parse(self) -> Polynomial:
        terms: Dict[Monomial, Fraction] = {}

        def push(sign: int) -> None:
            m, c = self.term()
            terms[m] = terms.get(m, Fraction(0)) + sign * c

        sign = 1
        if self.peek() == "-":
            self.pos += 1
            sign = -1
        push(sign)
        while True:
            ch = self.peek()
            if ch == "":
                break
            if ch not in "+-":
                self.error(f"unexpected character {ch!r}")
            self.pos += 1
            push(1 if ch == "+" else -1)
        return Polynomial(terms, self.order)


def parse_polynomial(text: str, order: VariableOrder = DEFAULT_ORDER) -> Polynomial:
    """Parse e.g. ``"-12*y*z - 3*z"``."""
    return _Parser(text, order).parse()
