"""Differential monomials and polynomials in a function and its derivatives.

A monomial is  c(z) * prod_i (f^(i))^(q_i)  with a rational coefficient and
non-negative integer exponents; a polynomial is a finite sum of monomials.
The statistics collected here (degrees, weight, weight excess, extremal
exponents) are exactly the quantities the inequality checks are phrased in.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Const, Exp, Expr, ONE, add, intpow, mul, parse_expr, to_grammar
from .exppoly import Constancy, derivative_chain, is_constant

__all__ = [
    "DiffMonomial", "DiffPolynomial", "PolyStats", "poly_stats",
    "validate_hypotheses", "contains_exponential", "HYPOTHESIS_CHECKS",
]


def contains_exponential(e: Expr) -> bool:
    """True if any exp node appears; rational expressions have none."""
    if isinstance(e, Exp):
        return True
    if isinstance(e, Const):
        return False
    return any(contains_exponential(c) for c in _children(e))


def _children(e: Expr):
    from .expr import Add, Div, IntPow, Mul, Neg
    if isinstance(e, Add):
        return e.terms
    if isinstance(e, Mul):
        return e.factors
    if isinstance(e, Neg):
        return (e.child,)
    if isinstance(e, Div):
        return (e.num, e.den)
    if isinstance(e, IntPow):
        return (e.base,)
    return ()


@dataclass(frozen=True)
class DiffMonomial:
    """coeff * f^(q0) * (f')^(q1) * ... ; exponents are q_0..q_k."""
    coeff: Expr
    exponents: tuple[int, ...]

    def __post_init__(self):
        ex = tuple(int(q) for q in self.exponents)
        object.__setattr__(self, "exponents", ex)
        if not ex or all(q == 0 for q in ex):
            raise ValueError("monomial needs at least one positive exponent")
        if any(q < 0 for q in ex):
            raise ValueError("monomial exponents must be non-negative")
        if contains_exponential(self.coeff):
            raise ValueError("monomial coefficient must be rational in z")

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def weight(self) -> int:
        return sum((i + 1) * q for i, q in enumerate(self.exponents))

    @property
    def weight_excess(self) -> int:
        """weight - degree, i.e. sum_i i * q_i."""
        return self.weight - self.degree

    @property
    def order(self) -> int:
        return max(i for i, q in enumerate(self.exponents) if q > 0)

    def exponent(self, i: int) -> int:
        return self.exponents[i] if i < len(self.exponents) else 0

    def apply(self, derivatives: list[Expr]) -> Expr:
        return mul(self.coeff,
                   *(intpow(derivatives[i], q)
                     for i, q in enumerate(self.exponents) if q > 0))

    def to_dict(self) -> dict:
        return {"coeff": to_grammar(self.coeff),
                "exponents": list(self.exponents)}


@dataclass(frozen=True)
class PolyStats:
    max_degree: int      # largest monomial degree
    min_degree: int      # smallest monomial degree
    max_weight: int      # largest monomial weight
    weight_excess: int   # max over monomials of (weight - degree)
    min_base_power: int  # min over monomials of q_0
    min_top_power: int   # min over monomials of q_k at the polynomial order
    order: int
    homogeneous: bool

    def to_dict(self) -> dict:
        out = {
            "nu": self.weight_excess,
            "qstar": self.min_base_power,
            "k": self.order,
            "homogeneous": self.homogeneous,
            "d_upper": self.max_degree,
            "d_lower": self.min_degree,
            "gamma": self.max_weight,
            "qkstar": self.min_top_power,
        }
        if self.homogeneous:
            out["d"] = self.max_degree
        return out


@dataclass(frozen=True)
class DiffPolynomial:
    monomials: tuple[DiffMonomial, ...]

    def __post_init__(self):
        if not self.monomials:
            raise ValueError("differential polynomial needs monomials")
        object.__setattr__(self, "monomials", tuple(self.monomials))

    @staticmethod
    def from_exponents(*monos) -> "DiffPolynomial":
        """Build from (coeff, exponents) pairs; coeff may be a number, a
        grammar string or an expression."""
        out = []
        for coeff, exponents in monos:
            if isinstance(coeff, str):
                coeff = parse_expr(coeff)
            elif not isinstance(coeff, Expr):
                coeff = Const(coeff)
            out.append(DiffMonomial(coeff, tuple(exponents)))
        return DiffPolynomial(tuple(out))

    @property
    def order(self) -> int:
        return max(m.order for m in self.monomials)

    def stats(self) -> PolyStats:
        ms = self.monomials
        k = self.order
        degrees = [m.degree for m in ms]
        return PolyStats(
            max_degree=max(degrees),
            min_degree=min(degrees),
            max_weight=max(m.weight for m in ms),
            weight_excess=max(m.weight_excess for m in ms),
            min_base_power=min(m.exponent(0) for m in ms),
            min_top_power=min(m.exponent(k) for m in ms),
            order=k,
            homogeneous=min(degrees) == max(degrees),
        )

    def apply(self, f: Expr, derivatives: list[Expr] | None = None) -> Expr:
        """Substitute f; the derivative chain is computed once and shared."""
        if derivatives is None:
            derivatives = derivative_chain(f, self.order)
        if len(derivatives) <= self.order:
            raise ValueError("derivative chain shorter than polynomial order")
        return add(*(m.apply(derivatives) for m in self.monomials))

    def to_dict(self) -> dict:
        return {"monomials": [m.to_dict() for m in self.monomials]}


def poly_stats(p: DiffPolynomial) -> PolyStats:
    return p.stats()


# ---------------------------------------------------------------------------
# hypothesis validation for the named checks

def _constant_coeffs(p: DiffPolynomial, out: list[str]):
    for m in p.monomials:
        kind, value = is_constant(m.coeff)
        if kind is not Constancy.CONSTANT or (value is not None and value == 0):
            out.append("monomial coefficient must be a nonzero constant")
            return


def _common(p: DiffPolynomial, s: PolyStats, *, min_k: int, min_q0: int,
            min_qk: int, homogeneous: bool = True) -> list[str]:
    out = []
    if homogeneous and not s.homogeneous:
        out.append("polynomial is not homogeneous")
    if s.order < min_k:
        out.append(f"order k={s.order} but k >= {min_k} is required")
    if s.min_base_power < min_q0:
        out.append(f"some monomial has q_0={s.min_base_power} < {min_q0}")
    if min_qk > 0 and s.min_top_power < min_qk:
        out.append(f"some monomial has q_k={s.min_top_power} < {min_qk}")
    return out


def _check_thm_1(p, s):
    return _common(p, s, min_k=2, min_q0=2, min_qk=2)


def _check_thm_2(p, s):
    out = _common(p, s, min_k=1, min_q0=1, min_qk=1)
    if s.max_degree - s.weight_excess <= 2:
        out.append(f"needs d - nu > 2 (got {s.max_degree - s.weight_excess})")
    return out


def _check_thm_3(p, s):
    out = _common(p, s, min_k=1, min_q0=1, min_qk=1)
    lhs = s.max_degree + s.order * s.min_base_power
    rhs = 2 * (s.order + 1) + s.weight_excess
    if lhs <= rhs:
        out.append(f"needs d + k*qstar > 2(k+1) + nu (got {lhs} <= {rhs})")
    return out


def _single(p, s, out):
    if len(p.monomials) != 1:
        out.append("check applies to a single monomial")
        return False
    return True


def _check_thm_e(p, s):
    out = []
    if _single(p, s, out):
        out += _common(p, s, min_k=2, min_q0=2, min_qk=2)
        _constant_coeffs(p, out)
    return out


def _check_thm_f(p, s):
    out = []
    if _single(p, s, out):
        out += _common(p, s, min_k=1, min_q0=1, min_qk=1)
        _constant_coeffs(p, out)
        if s.max_degree - s.weight_excess < 3:
            out.append("needs degree minus weight excess >= 3")
    return out


def _check_thm_g(p, s):
    out = []
    if _single(p, s, out):
        out += _common(p, s, min_k=1, min_q0=1, min_qk=1)
        _constant_coeffs(p, out)
        q0 = p.monomials[0].exponent(0)
        if s.max_degree - s.weight_excess < 5 - q0:
            out.append("needs degree minus weight excess >= 5 - q_0")
    return out


def _check_lem_33(p, s):
    return []


def _check_lem_35(p, s):
    return _common(p, s, min_k=0, min_q0=1, min_qk=0)


def _check_lem_36(p, s):
    return _common(p, s, min_k=0, min_q0=1, min_qk=1)


HYPOTHESIS_CHECKS = {
    "thm_1": _check_thm_1,
    "thm_2": _check_thm_2,
    "thm_3": _check_thm_3,
    "thm_e": _check_thm_e,
    "thm_f": _check_thm_f,
    "thm_g": _check_thm_g,
    "lem_33": _check_lem_33,
    "lem_35": _check_lem_35,
    "lem_36": _check_lem_36,
}


def validate_hypotheses(p: DiffPolynomial, check_id: str) -> list[str]:
    """Structural hypotheses of the named check; empty list means admissible."""
    try:
        fn = HYPOTHESIS_CHECKS[check_id]
    except KeyError:
        raise ValueError(f"unknown check id '{check_id}'") from None
    return fn(p, p.stats())
