"""Expression trees for a restricted class of meromorphic functions.

The working class is built from the variable z and complex constants by
+, -, *, /, nonzero integer powers and exp of entire subexpressions.
sin, cos and tan are accepted by the parser and rewritten through the
exponential (Euler) form, so every function handled downstream is a
quotient of entire expressions involving only polynomials and exponentials.

Trees are immutable; structural equality and hashing come from the frozen
dataclasses, which lets the heavier modules memoise compiled evaluators and
derivative chains.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Add", "Mul", "Neg", "Div", "IntPow", "Exp",
    "PoleSignal", "QuotientForm", "ParseError", "InvalidExpressionError",
    "const", "add", "sub", "mul", "neg", "div", "intpow", "exp_e",
    "Z", "ONE", "ZERO",
    "parse_expr", "differentiate", "evaluate", "compile_expr",
    "to_quotient", "to_grammar",
]


class InvalidExpressionError(ValueError):
    """Raised for structurally invalid expressions (e.g. a literal 0 denominator)."""


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True)
class Expr:
    def __str__(self) -> str:
        return to_grammar(self)


@dataclass(frozen=True)
class Const(Expr):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class Var(Expr):
    pass


@dataclass(frozen=True)
class Add(Expr):
    terms: tuple[Expr, ...]


@dataclass(frozen=True)
class Mul(Expr):
    factors: tuple[Expr, ...]


@dataclass(frozen=True)
class Neg(Expr):
    child: Expr


@dataclass(frozen=True)
class Div(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True)
class IntPow(Expr):
    base: Expr
    power: int


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True)
class PoleSignal:
    """Returned by evaluate() where the expression has (or overflows into) a pole."""
    overflow: bool = False


Z = Var()
ZERO = Const(0.0)
ONE = Const(1.0)


# ---------------------------------------------------------------------------
# smart constructors
#
# These keep derivative trees small: they flatten nested sums/products, drop
# additive zeros and multiplicative ones, and fold constant subtrees.  They
# never reorder non-constant operands, so construction stays deterministic.

def const(c) -> Const:
    return Const(complex(c))


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        if isinstance(t, Add):
            flat.extend(t.terms)
        else:
            flat.append(t)
    kept = [t for t in flat if not (isinstance(t, Const) and t.value == 0)]
    if not kept:
        return ZERO
    if len(kept) == 1:
        return kept[0]
    return Add(tuple(kept))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    for f in factors:
        if isinstance(f, Mul):
            flat.extend(f.factors)
        else:
            flat.append(f)
    coeff = complex(1.0)
    kept: list[Expr] = []
    for f in flat:
        if isinstance(f, Const):
            coeff *= f.value
        else:
            kept.append(f)
    if coeff == 0:
        return ZERO
    if coeff != 1:
        kept.insert(0, Const(coeff))
    if not kept:
        return ONE
    if len(kept) == 1:
        return kept[0]
    return Mul(tuple(kept))


def neg(x: Expr) -> Expr:
    if isinstance(x, Neg):
        return x.child
    return Neg(x)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


def intpow(base: Expr, power: int) -> Expr:
    if power == 0:
        return ONE
    if power == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0:
            if power > 0:
                return ZERO
            raise InvalidExpressionError("0 raised to a negative power")
        return Const(base.value ** power)
    if isinstance(base, IntPow):
        return intpow(base.base, base.power * power)
    return IntPow(base, power)


def div(num: Expr, den: Expr) -> Expr:
    if isinstance(den, Const):
        if den.value == 0:
            raise InvalidExpressionError("denominator is the literal constant 0")
        if den.value == 1:
            return num
        return mul(Const(1.0 / den.value), num)
    if isinstance(num, Const) and num.value == 0:
        return ZERO
    return Div(num, den)


def exp_e(arg: Expr) -> Expr:
    if isinstance(arg, Const):
        return Const(cmath.exp(arg.value))
    return Exp(arg)


# ---------------------------------------------------------------------------
# parser

_I = Const(1j)
_NEG_I = Const(-1j)
_FUNCS = ("exp", "sin", "cos", "tan")


def _desugar_call(name: str, w: Expr) -> Expr:
    if name == "exp":
        return exp_e(w)
    plus = exp_e(mul(_I, w))
    minus = exp_e(mul(_NEG_I, w))
    if name == "sin":
        return div(sub(plus, minus), Const(2j))
    if name == "cos":
        return div(add(plus, minus), Const(2.0))
    # tan = sin/cos in exponential form
    return div(div(sub(plus, minus), Const(2j)), div(add(plus, minus), Const(2.0)))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str):
        raise ParseError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> bool:
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str):
        if not self.take(ch):
            self.error(f"expected '{ch}'")

    def parse(self) -> Expr:
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("unexpected trailing input")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while True:
            c = self.peek()
            if c == "+":
                self.pos += 1
                terms.append(self.term())
            elif c == "-":
                self.pos += 1
                terms.append(neg(self.term()))
            else:
                break
        return add(*terms) if len(terms) > 1 else terms[0]

    def term(self) -> Expr:
        e = self.factor()
        while True:
            c = self.peek()
            if c == "*":
                self.pos += 1
                e = mul(e, self.factor())
            elif c == "/":
                self.pos += 1
                e = div(e, self.factor())
            else:
                break
        return e

    def factor(self) -> Expr:
        # '^' binds tighter than unary minus: -z^2 reads as -(z^2)
        if self.peek() == "-":
            self.pos += 1
            return neg(self.factor())
        base = self.base()
        if self.peek() == "^":
            self.pos += 1
            return intpow(base, self.signed_int())
        return base

    def signed_int(self) -> int:
        self.skip_ws()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        digits = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == digits:
            self.error("expected an integer exponent")
        return int(self.text[start:self.pos])

    def base(self) -> Expr:
        c = self.peek()
        if c == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if c.isdigit() or c == ".":
            return self.number()
        if c.isalpha():
            return self.ident()
        self.error("expected a number, identifier or '('")

    def number(self) -> Expr:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == ".":
            self.pos += 1
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
        lit = self.text[start:self.pos]
        if lit in ("", "."):
            self.error("malformed number")
        return Const(float(lit))

    def ident(self) -> Expr:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isalpha():
            self.pos += 1
        name = self.text[start:self.pos]
        if name == "z":
            return Z
        if name == "i":
            return _I
        if name in _FUNCS:
            self.expect("(")
            w = self.expr()
            self.expect(")")
            return _desugar_call(name, w)
        self.pos = start
        self.error(f"unknown identifier '{name}'")


def parse_expr(text: str) -> Expr:
    """Parse the grammar (z, i, decimal numbers, + - * / ^int, exp/sin/cos/tan)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# differentiation

@functools.cache
def differentiate(e: Expr) -> Expr:
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Add):
        return add(*(differentiate(t) for t in e.terms))
    if isinstance(e, Neg):
        return neg(differentiate(e.child))
    if isinstance(e, Mul):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            parts.append(mul(*fs[:i], differentiate(f), *fs[i + 1:]))
        return add(*parts)
    if isinstance(e, Div):
        n, d = e.num, e.den
        return div(sub(mul(differentiate(n), d), mul(n, differentiate(d))),
                   intpow(d, 2))
    if isinstance(e, IntPow):
        return mul(Const(e.power), intpow(e.base, e.power - 1),
                   differentiate(e.base))
    if isinstance(e, Exp):
        return mul(differentiate(e.arg), e)
    raise TypeError(f"cannot differentiate {type(e).__name__}")


# ---------------------------------------------------------------------------
# pointwise evaluation

_HUGE = 1e300


def evaluate(e: Expr, z: complex):
    """Evaluate at a point.  Returns a complex value, or a PoleSignal when a
    denominator vanishes (overflow is reported as a PoleSignal with the
    magnitude flag set)."""
    try:
        v = _eval(e, complex(z))
    except (ZeroDivisionError, OverflowError):
        return PoleSignal(overflow=True)
    if isinstance(v, PoleSignal):
        return v
    if not (math.isfinite(v.real) and math.isfinite(v.imag)):
        return PoleSignal(overflow=True)
    return v


def _eval(e: Expr, z: complex):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return z
    if isinstance(e, Add):
        acc = complex(0)
        for t in e.terms:
            v = _eval(t, z)
            if isinstance(v, PoleSignal):
                return v
            acc += v
        return acc
    if isinstance(e, Neg):
        v = _eval(e.child, z)
        return v if isinstance(v, PoleSignal) else -v
    if isinstance(e, Mul):
        acc = complex(1)
        for f in e.factors:
            v = _eval(f, z)
            if isinstance(v, PoleSignal):
                return v
            acc *= v
        return acc
    if isinstance(e, Div):
        n = _eval(e.num, z)
        if isinstance(n, PoleSignal):
            return n
        d = _eval(e.den, z)
        if isinstance(d, PoleSignal):
            return d
        if d == 0:
            return PoleSignal()
        return n / d
    if isinstance(e, IntPow):
        b = _eval(e.base, z)
        if isinstance(b, PoleSignal):
            return b
        if b == 0 and e.power < 0:
            return PoleSignal()
        return b ** e.power
    if isinstance(e, Exp):
        a = _eval(e.arg, z)
        if isinstance(a, PoleSignal):
            return a
        if a.real > 709.0:
            return PoleSignal(overflow=True)
        return cmath.exp(a)
    raise TypeError(f"cannot evaluate {type(e).__name__}")


# ---------------------------------------------------------------------------
# vectorised evaluation
#
# The locator and the quadratures evaluate expressions on thousands of grid
# points, which is far too slow through the tree walker above.  compile_expr
# builds a closure over numpy operations once per (structurally distinct)
# tree; poles and overflow surface as inf/nan in the output array and are
# handled by the callers.

@functools.cache
def compile_expr(e: Expr):
    """Vectorised evaluator; overflow and division produce inf/nan silently."""
    fn = _compile(e)

    def run(z, fn=fn):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return fn(z)
    return run


@functools.cache
def _compile(e: Expr):
    if isinstance(e, Const):
        v = e.value
        return lambda z: np.broadcast_to(v, np.shape(z)).copy() if np.ndim(z) else v
    if isinstance(e, Var):
        return lambda z: z
    if isinstance(e, Add):
        fns = tuple(_compile(t) for t in e.terms)
        def _add(z, fns=fns):
            acc = fns[0](z)
            for fn in fns[1:]:
                acc = acc + fn(z)
            return acc
        return _add
    if isinstance(e, Neg):
        fn = _compile(e.child)
        return lambda z: -fn(z)
    if isinstance(e, Mul):
        fns = tuple(_compile(f) for f in e.factors)
        def _mul(z, fns=fns):
            acc = fns[0](z)
            for fn in fns[1:]:
                acc = acc * fn(z)
            return acc
        return _mul
    if isinstance(e, Div):
        fn, fd = _compile(e.num), _compile(e.den)
        return lambda z: fn(z) / fd(z)
    if isinstance(e, IntPow):
        fb, p = _compile(e.base), e.power
        return lambda z: fb(z) ** p
    if isinstance(e, Exp):
        fa = _compile(e.arg)
        return lambda z: np.exp(fa(z))
    raise TypeError(f"cannot compile {type(e).__name__}")


# ---------------------------------------------------------------------------
# quotient form

@dataclass(frozen=True)
class QuotientForm:
    """A meromorphic expression as a quotient of two entire expressions."""
    num: Expr
    den: Expr


def _q(e: Expr) -> tuple[Expr, Expr]:
    if isinstance(e, (Const, Var, Exp)):
        return e, ONE
    if isinstance(e, Neg):
        n, d = _q(e.child)
        return neg(n), d
    if isinstance(e, Add):
        acc_n, acc_d = _q(e.terms[0])
        for t in e.terms[1:]:
            n, d = _q(t)
            if d == acc_d:
                acc_n = add(acc_n, n)
            else:
                acc_n = add(mul(acc_n, d), mul(n, acc_d))
                acc_d = mul(acc_d, d)
        return acc_n, acc_d
    if isinstance(e, Mul):
        ns, ds = [], []
        for f in e.factors:
            n, d = _q(f)
            ns.append(n)
            ds.append(d)
        return mul(*ns), mul(*ds)
    if isinstance(e, Div):
        nn, nd = _q(e.num)
        dn, dd = _q(e.den)
        return mul(nn, dd), mul(nd, dn)
    if isinstance(e, IntPow):
        n, d = _q(e.base)
        if e.power > 0:
            return intpow(n, e.power), intpow(d, e.power)
        return intpow(d, -e.power), intpow(n, -e.power)
    raise TypeError(f"cannot form quotient of {type(e).__name__}")


def to_quotient(e: Expr, check: bool = True) -> QuotientForm:
    """Rewrite as num/den with entire num and den.

    Exp factors stay atomic (their arguments are required to be entire by the
    class definition).  With check=True the denominator is rejected when the
    identity test finds it to vanish identically.
    """
    n, d = _q(e)
    if check and not isinstance(d, Const):
        from .exppoly import ZeroVerdict, is_identically_zero
        v = is_identically_zero(d)
        if v in (ZeroVerdict.ZERO, ZeroVerdict.PROBABLY_ZERO):
            raise InvalidExpressionError("denominator vanishes identically")
    return QuotientForm(n, d)


# ---------------------------------------------------------------------------
# unparser

def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".12g")


def format_complex(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0:
        return _fmt_real(re) if re >= 0 else f"(0-{_fmt_real(-re)})"
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "(0-i)"
        if im > 0:
            return f"({_fmt_real(im)}*i)"
        return f"(0-{_fmt_real(-im)}*i)"
    im_part = "i" if im == 1 else f"{_fmt_real(abs(im))}*i" if im > 0 else None
    if im > 0:
        return f"({_fmt_real(re) if re > 0 else '0-' + _fmt_real(-re)}+{im_part})"
    im_abs = "i" if im == -1 else f"{_fmt_real(-im)}*i"
    return f"({_fmt_real(re) if re > 0 else '0-' + _fmt_real(-re)}-{im_abs})"


def to_grammar(e: Expr) -> str:
    """Serialise back to the input grammar; parse_expr(to_grammar(e)) evaluates
    identically to e."""
    if isinstance(e, Const):
        return format_complex(e.value)
    if isinstance(e, Var):
        return "z"
    if isinstance(e, Add):
        parts = [to_grammar(e.terms[0])]
        for t in e.terms[1:]:
            if isinstance(t, Neg):
                parts.append(f"-{_wrap_term(t.child)}")
            else:
                parts.append(f"+{_wrap_term(t)}")
        return "".join(parts)
    if isinstance(e, Neg):
        return f"-{_wrap_term(e.child)}"
    if isinstance(e, Mul):
        return "*".join(_wrap_factor(f) for f in e.factors)
    if isinstance(e, Div):
        return f"{_wrap_factor(e.num)}/{_wrap_factor(e.den)}"
    if isinstance(e, IntPow):
        return f"{_wrap_base(e.base)}^{e.power}"
    if isinstance(e, Exp):
        return f"exp({to_grammar(e.arg)})"
    raise TypeError(f"cannot serialise {type(e).__name__}")


def _wrap_term(e: Expr) -> str:
    if isinstance(e, Add):
        return f"({to_grammar(e)})"
    return to_grammar(e)


def _wrap_factor(e: Expr) -> str:
    if isinstance(e, (Add, Neg, Div, Mul)):
        return f"({to_grammar(e)})"
    return to_grammar(e)


def _wrap_base(e: Expr) -> str:
    if isinstance(e, (Add, Neg, Div, Mul, IntPow)):
        return f"({to_grammar(e)})"
    return to_grammar(e)
