"""Canonical exponential polynomials and decidable identity tests.

An ExpPoly is a finite sum  sum_k  p_k(z) * exp(lambda_k * z)  with complex
frequencies and polynomial coefficients, kept in a canonical form (frequencies
sorted and merged, coefficient lists stripped).  The class is closed under
addition, multiplication and differentiation, and has a decidable zero test:
an ExpPoly is the zero function iff its canonical form is empty.

Expressions that stay inside this class (everything the parser produces from
polynomials, exp of linear arguments and the trig desugarings) therefore get
exact Zero/NonZero verdicts; everything else falls back to a seeded
probabilistic sample.
"""

from __future__ import annotations

import cmath
import enum
import functools
import random

from .expr import (
    Add, Const, Div, Exp, Expr, IntPow, Mul, Neg, PoleSignal, QuotientForm,
    Var, Z,
    add, differentiate, div, evaluate, exp_e, intpow, mul, neg, sub,
    to_quotient,
)

__all__ = [
    "ExpPoly", "to_exp_poly", "exp_poly_to_expr", "compact",
    "canonical", "canonical_quotient",
    "ZeroVerdict", "Constancy", "is_identically_zero", "is_constant",
    "derivative_chain", "set_probabilistic_seed",
]

FREQ_TOL = 1e-12       # frequencies closer than this are merged
COEFF_TOL = 1e-12      # relative prune threshold for coefficients

_DEFAULT_PROB_SEED = 0x5EED
_prob_seed = _DEFAULT_PROB_SEED


def set_probabilistic_seed(seed: int | None):
    """Override the seed of the probabilistic identity fallback (None resets)."""
    global _prob_seed
    _prob_seed = _DEFAULT_PROB_SEED if seed is None else int(seed)


class ExpPoly:
    """Canonical form; terms is a list of (frequency, coefficient list)."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = _normalise(terms)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "ExpPoly":
        return ExpPoly([])

    @staticmethod
    def constant(c: complex) -> "ExpPoly":
        return ExpPoly([(0j, [complex(c)])])

    @staticmethod
    def variable() -> "ExpPoly":
        return ExpPoly([(0j, [0j, 1 + 0j])])

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "ExpPoly") -> "ExpPoly":
        return ExpPoly(list(self.terms) + list(other.terms))

    def __neg__(self) -> "ExpPoly":
        return ExpPoly([(f, [-c for c in cs]) for f, cs in self.terms])

    def __sub__(self, other: "ExpPoly") -> "ExpPoly":
        return self + (-other)

    def __mul__(self, other: "ExpPoly") -> "ExpPoly":
        out = []
        for f1, c1 in self.terms:
            for f2, c2 in other.terms:
                conv = [0j] * (len(c1) + len(c2) - 1)
                for i, a in enumerate(c1):
                    for j, b in enumerate(c2):
                        conv[i + j] += a * b
                out.append((f1 + f2, conv))
        return ExpPoly(out)

    def scale(self, c: complex) -> "ExpPoly":
        c = complex(c)
        return ExpPoly([(f, [c * x for x in cs]) for f, cs in self.terms])

    def diff(self) -> "ExpPoly":
        out = []
        for f, cs in self.terms:
            d = [(i + 1) * cs[i + 1] for i in range(len(cs) - 1)] + [0j]
            out.append((f, [d[i] + f * cs[i] for i in range(len(cs))]))
        return ExpPoly(out)

    def pow(self, n: int) -> "ExpPoly":
        if n < 0:
            raise ValueError("negative power of a general ExpPoly")
        acc = ExpPoly.constant(1)
        base = self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base if n > 1 else base
            n >>= 1
        return acc

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def eval(self, z: complex) -> complex:
        acc = 0j
        for f, cs in self.terms:
            p = 0j
            for c in reversed(cs):
                p = p * z + c
            acc += p * cmath.exp(f * z)
        return acc

    def approx_eq(self, other: "ExpPoly", tol: float = 1e-9) -> bool:
        return (self - other)._max_coeff() <= tol * max(
            1.0, self._max_coeff(), other._max_coeff())

    def _max_coeff(self) -> float:
        return max((abs(c) for _, cs in self.terms for c in cs), default=0.0)

    def __repr__(self):
        return f"ExpPoly({self.terms!r})"


def _normalise(raw):
    groups: list[tuple[complex, list[complex]]] = []
    for f, cs in sorted(raw, key=lambda t: (t[0].real, t[0].imag)):
        if groups and abs(f - groups[-1][0]) <= FREQ_TOL:
            g = groups[-1][1]
            if len(cs) > len(g):
                g.extend([0j] * (len(cs) - len(g)))
            for i, c in enumerate(cs):
                g[i] += c
        else:
            groups.append((f, list(cs)))
    big = max((abs(c) for _, cs in groups for c in cs), default=0.0)
    cut = COEFF_TOL * big
    out = []
    for f, cs in groups:
        cs = [c if abs(c) > cut else 0j for c in cs]
        while cs and cs[-1] == 0:
            cs.pop()
        if cs:
            out.append((f, cs))
    return out


# ---------------------------------------------------------------------------
# conversion from expression trees

def to_exp_poly(e: Expr) -> ExpPoly | None:
    """Canonical ExpPoly of an entire expression, or None when the expression
    leaves the class (exp of a non-linear argument, division by a
    non-constant, negative powers of sums, ...)."""
    if isinstance(e, Const):
        return ExpPoly.zero() if e.value == 0 else ExpPoly.constant(e.value)
    if isinstance(e, Var):
        return ExpPoly.variable()
    if isinstance(e, Neg):
        ep = to_exp_poly(e.child)
        return None if ep is None else -ep
    if isinstance(e, Add):
        acc = ExpPoly.zero()
        for t in e.terms:
            ep = to_exp_poly(t)
            if ep is None:
                return None
            acc = acc + ep
        return acc
    if isinstance(e, Mul):
        acc = ExpPoly.constant(1)
        for f in e.factors:
            ep = to_exp_poly(f)
            if ep is None:
                return None
            acc = acc * ep
        return acc
    if isinstance(e, Div):
        nep = to_exp_poly(e.num)
        dep = to_exp_poly(e.den)
        if nep is None or dep is None:
            return None
        single = _single_exponential(dep)
        if single is None:
            return None
        lam, c = single
        return ExpPoly([(f - lam, [x / c for x in cs]) for f, cs in nep.terms])
    if isinstance(e, IntPow):
        bep = to_exp_poly(e.base)
        if bep is None:
            return None
        single = _single_exponential(bep)
        if single is not None:
            lam, c = single
            return ExpPoly([(e.power * lam, [c ** e.power])])
        if e.power < 0:
            return None
        return bep.pow(e.power)
    if isinstance(e, Exp):
        aep = to_exp_poly(e.arg)
        if aep is None or not _is_linear(aep):
            return None
        c0 = 0j
        lam = 0j
        for f, cs in aep.terms:
            c0 = cs[0]
            lam = cs[1] if len(cs) > 1 else 0j
        return ExpPoly([(lam, [cmath.exp(c0)])])
    return None


def _single_exponential(ep: ExpPoly):
    """(lambda, c) if ep is exactly c*exp(lambda z) with c != 0, else None."""
    if len(ep.terms) != 1:
        return None
    f, cs = ep.terms[0]
    if len(cs) != 1:
        return None
    return f, cs[0]


def _is_linear(ep: ExpPoly) -> bool:
    if ep.is_zero:
        return True
    if len(ep.terms) != 1:
        return False
    f, cs = ep.terms[0]
    return f == 0 and len(cs) <= 2


def exp_poly_to_expr(ep: ExpPoly) -> Expr:
    parts = []
    for f, cs in ep.terms:
        poly = add(*(mul(Const(c), intpow(Z, j))
                     for j, c in enumerate(cs) if c != 0))
        if f == 0:
            parts.append(poly)
        else:
            parts.append(mul(poly, exp_e(mul(Const(f), Z))))
    return add(*parts)


def compact(e: Expr) -> Expr:
    """Canonical rewrite when e is in the ExpPoly class, otherwise e itself."""
    ep = to_exp_poly(e)
    return e if ep is None else exp_poly_to_expr(ep)


def canonical(e: Expr) -> Expr:
    """Collapse exponential sums that are secretly a single product term.

    A sum like sin(z) - i*cos(z) is mathematically one exponential
    -i*exp(i*z), but evaluated term by term the surviving part is absorbed
    below the rounding error of the cancelling pair once the circle radius
    passes ~18, and the sum collapses to an exact float zero.  Merging the
    frequencies exposes the cancellation and the single surviving term
    evaluates with small relative error at every point.

    Only that total collapse is adopted.  A merged form that is still a sum
    trades the tree's product structure for expanded coefficients, and near
    a multiple zero the expanded sum drowns in its own rounding noise while
    the factored original stays accurate, so anything short of a single
    low-degree term is returned as written."""
    if isinstance(e, Neg):
        return neg(canonical(e.child))
    if isinstance(e, Mul):
        return mul(*(canonical(f) for f in e.factors))
    if isinstance(e, IntPow):
        return intpow(canonical(e.base), e.power)
    if isinstance(e, Div):
        return div(canonical(e.num), canonical(e.den))
    if isinstance(e, Add):
        rebuilt = add(*(canonical(t) for t in e.terms))
        if not isinstance(rebuilt, Add):
            return rebuilt
        ep = to_exp_poly(rebuilt)
        if ep is not None and (ep.is_zero or (
                len(ep.terms) == 1 and len(ep.terms[0][1]) <= 2)):
            return exp_poly_to_expr(ep)
        return rebuilt
    return e


@functools.cache
def canonical_quotient(e: Expr) -> QuotientForm:
    """to_quotient with both parts passed through canonical()."""
    q = to_quotient(e)
    return QuotientForm(canonical(q.num), canonical(q.den))


# ---------------------------------------------------------------------------
# identity verdicts

class ZeroVerdict(enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    PROBABLY_ZERO = "ProbablyZero"
    PROBABLY_NONZERO = "ProbablyNonZero"


class Constancy(enum.Enum):
    CONSTANT = "Constant"
    NON_CONSTANT = "NonConstant"
    UNKNOWN = "Unknown"


def _sample_points() -> list[complex]:
    rng = random.Random(_prob_seed)
    pts = []
    for r in (0.7, 1.3):
        for _ in range(8):
            theta = rng.uniform(0.0, 2.0 * cmath.pi)
            pts.append(r * cmath.exp(1j * theta))
    return pts


def is_identically_zero(e: Expr) -> ZeroVerdict:
    """Exact Zero/NonZero via the canonical form when possible; otherwise a
    probabilistic verdict from 16 seeded sample points (|z| in {0.7, 1.3},
    threshold 1e-9)."""
    q = to_quotient(e, check=False)
    ep = to_exp_poly(q.num)
    if ep is not None:
        return ZeroVerdict.ZERO if ep.is_zero else ZeroVerdict.NONZERO
    worst = 0.0
    seen = 0
    for p in _sample_points():
        v = evaluate(e, p)
        if isinstance(v, PoleSignal):
            continue
        seen += 1
        worst = max(worst, abs(v))
    if seen == 0:
        return ZeroVerdict.PROBABLY_NONZERO
    if worst <= 1e-9:
        return ZeroVerdict.PROBABLY_ZERO
    return ZeroVerdict.PROBABLY_NONZERO


def is_constant(e: Expr) -> tuple[Constancy, complex | None]:
    """Decide constancy.  Inside the ExpPoly quotient class this is exact:
    num/den is constant iff num'*den - num*den' vanishes identically."""
    q = to_quotient(e, check=False)
    nep = to_exp_poly(q.num)
    dep = to_exp_poly(q.den)
    if nep is not None and dep is not None and not dep.is_zero:
        if nep.is_zero:
            return Constancy.CONSTANT, 0j
        w = nep.diff() * dep - nep * dep.diff()
        if not w.is_zero:
            return Constancy.NON_CONSTANT, None
        for p in _sample_points():
            dv = dep.eval(p)
            if abs(dv) > 1e-9:
                return Constancy.CONSTANT, nep.eval(p) / dv
        return Constancy.CONSTANT, None
    vals = []
    for p in _sample_points():
        v = evaluate(e, p)
        if not isinstance(v, PoleSignal):
            vals.append(v)
    if len(vals) < 2:
        return Constancy.UNKNOWN, None
    scale = max(1.0, max(abs(v) for v in vals))
    spread = max(abs(v - vals[0]) for v in vals)
    if spread <= 1e-9 * scale:
        # numerically flat, but agreement at 16 points proves nothing
        return Constancy.UNKNOWN, None
    return Constancy.NON_CONSTANT, None


# ---------------------------------------------------------------------------
# derivative chains
#
# Repeated quotient differentiation normally doubles the denominator and lets
# the numerator pile up cancelling terms; near a multiple zero those cancel
# catastrophically in floating point.  Differentiating n/d^p as
# (n' d - p n d')/d^(p+1) keeps the denominator a structural power of the
# original entire part, and compacting the numerator through its canonical
# ExpPoly removes the cancellations exactly.

def derivative_chain(f: Expr, k: int) -> list[Expr]:
    """[f, f', ..., f^(k)] with compacted numerators and structural
    denominator powers."""
    if k < 0:
        raise ValueError("negative derivative order")
    out = [f]
    q = to_quotient(f, check=False)
    if isinstance(q.den, Const):
        cur = f
        for _ in range(k):
            cur = compact(differentiate(cur))
            out.append(cur)
        return out
    num, den = q.num, q.den
    dden = compact(differentiate(den))
    p = 1
    for _ in range(k):
        num = compact(sub(mul(differentiate(num), den),
                          mul(Const(p), num, dden)))
        p += 1
        out.append(div(num, intpow(den, p)))
    return out
