"""Acceptance gate: one test per release criterion, each printing a verdict
line.  Tolerances and budgets are part of the criteria and are asserted
as stated, not loosened."""

import json
import math
import random
import time

import numpy as np
import pytest

from nevlab.cli import main
from nevlab.diffpoly import DiffPolynomial, poly_stats, validate_hypotheses
from nevlab.expr import Const, parse_expr, to_quotient
from nevlab.exppoly import ZeroVerdict, is_identically_zero
from nevlab.locator import (Divisor, DivisorPoint, divisor_of, find_zeros,
                            winding_number)
from nevlab.nevanlinna import (CountingMode, characteristic, counting,
                               nevanlinna_rows, proximity, radial_grid)
from nevlab.theorems import default_radii, run_check

E = math.e

P_A = DiffPolynomial.from_exponents((1, (2, 1, 2, 2)), (-1, (2, 2, 1, 2)))
P_B = DiffPolynomial.from_exponents((1, (6, 1, 0, 1)), (1, (6, 0, 1, 1)))
P_C = DiffPolynomial.from_exponents((1, (5, 3)), (-1, (3, 5)))


def report(n, label, ok):
    print(f"[acceptance] criterion {n} ({label}): {'PASS' if ok else 'FAIL'}")


def poly_expr(coeffs):
    terms = []
    for j, c in enumerate(coeffs):
        if c:
            terms.append(f"({c})" + ("" if j == 0 else
                                     "*z" if j == 1 else f"*z^{j}"))
    return parse_expr(" + ".join(terms))


def test_criterion_1_symbolic_vacuity():
    t0 = time.perf_counter()
    verdicts = [
        is_identically_zero(P_A.apply(parse_expr("exp(z)"))),
        is_identically_zero(P_B.apply(parse_expr("exp(-z)"))),
        is_identically_zero(P_C.apply(parse_expr("exp(z)"))),
    ]
    elapsed = time.perf_counter() - t0
    ok = all(v is ZeroVerdict.ZERO for v in verdicts) and elapsed < 1.0
    report(1, "symbolic vacuity", ok)
    assert ok, (verdicts, elapsed)


def test_criterion_2_statistics_oracle():
    cases = [(P_A, "thm_1", (7, 11, 2, 3)),
             (P_B, "thm_2", (8, 5, 6, 3)),
             (P_C, "thm_3", (8, 5, 3, 1))]
    ok = True
    for poly, cid, (d, nu, qstar, k) in cases:
        s = poly_stats(poly)
        ok &= (s.max_degree, s.weight_excess, s.min_base_power, s.order) \
            == (d, nu, qstar, k)
        ok &= s.homogeneous and validate_hypotheses(poly, cid) == []
    report(2, "statistics oracle", bool(ok))
    assert ok


def test_criterion_3_proximity_oracle():
    t0 = time.perf_counter()
    parts = [
        abs(proximity(parse_expr("exp(z)"), math.pi) - 1.0) <= 1e-8,
        abs(proximity(parse_expr("z"), E) - 1.0) <= 1e-9,
        abs(proximity(parse_expr("z"), E ** 2) - 2.0) <= 1e-9,
    ]
    origin = Divisor(10.0, (DivisorPoint(0.0, 0.0, 1),))
    recip = parse_expr("1/z")
    for r in (E, E ** 2):
        parts.append(abs(characteristic(recip, r, origin) - math.log(r))
                     <= 1e-9)
    elapsed = time.perf_counter() - t0
    ok = all(parts) and elapsed < 5.0
    report(3, "proximity oracle", ok)
    assert ok, (parts, elapsed)


def test_criterion_4_counting_oracle():
    zeros, _ = divisor_of(parse_expr("exp(z) - 1"), 10.0, 0)
    n = counting(zeros, 10.0)
    ok = abs(n - 3.2320) <= 1e-3

    cubic = Divisor(10.0, (DivisorPoint(0.0, 0.0, 3),
                           DivisorPoint(1.0, 0.0, 1)))
    for r in (7.5, E ** 2):
        ok &= abs(counting(cubic, r, CountingMode.capped(2))
                  - 3 * math.log(r)) <= 1e-12
        ok &= abs(counting(cubic, r, CountingMode.trunc_le(1))
                  - math.log(r)) <= 1e-12
    report(4, "counting oracle", bool(ok))
    assert ok, n


def test_criterion_5_locator_conservation():
    t0 = time.perf_counter()
    suite = [("exp(3*z) - 1", (3.0, 10.0)),
             ("tan(z)", (5.0, 40.0)),
             ("cos(z)", (10.0, 40.0)),
             ("(z - 1)*exp(z)/z", (3.0, 10.0)),
             ("sin(z)*(z^2 + 4)", (5.0, 20.0))]
    ok = True
    for src, radii in suite:
        q = to_quotient(parse_expr(src))
        parts = [q.num]
        if not isinstance(q.den, Const):
            parts.append(q.den)
        for part in parts:
            for r in radii:
                d = find_zeros(part, r)
                ok &= d.degree == winding_number(part, r)

    rng = random.Random(20260823)
    worst = 0.0
    for _ in range(100):
        deg = rng.randint(2, 8)
        while True:
            coeffs = [rng.randint(-9, 9) for _ in range(deg + 1)]
            if coeffs[0] == 0 or coeffs[-1] == 0:
                continue
            roots = np.roots(coeffs[::-1])
            sep = np.min(np.abs(roots[:, None] - roots[None, :])
                         + np.eye(deg) * 1e9)
            if sep > 1e-3:
                break
        r = float(np.max(np.abs(roots))) * 1.3 + 0.5
        d = find_zeros(poly_expr(coeffs), r)
        ok &= d.degree == deg
        remaining = list(map(complex, roots))
        for g in d.locations:
            best = min(remaining, key=lambda w: abs(g - w))
            worst = max(worst, abs(g - best))
            remaining.remove(best)
    elapsed = time.perf_counter() - t0
    ok = bool(ok) and worst <= 1e-8 and elapsed < 60.0
    report(5, "locator conservation", ok)
    assert ok, (worst, elapsed)


def test_criterion_6_first_fundamental_theorem():
    grid = radial_grid(2.0, 40.0, 32)
    bound = math.log(2) + 0.5          # log+|a| = 0 for a in {1, i}
    ok = True
    worst = 0.0
    for f_src in ("exp(z)", "tan(z)", "(z - 1)*exp(z)/z"):
        base = nevanlinna_rows(parse_expr(f_src), grid)
        ok &= all(w.error is None for w in base)
        for a_src in ("1", "i"):
            shifted = parse_expr(f"1/({f_src} - ({a_src}))")
            rows = nevanlinna_rows(shifted, grid)
            ok &= all(w.error is None for w in rows)
            gap = max(abs(b.T - w.T) for b, w in zip(base, rows))
            worst = max(worst, gap)
    ok = bool(ok) and worst <= bound
    report(6, "first fundamental theorem", ok)
    assert ok, worst


def test_criterion_7_log_derivative_identity():
    ok = True
    for g_src in ("(z - 1)*exp(z)", "sin(z)", "(z^2 - 1)/(z^2 + 1)"):
        rep = run_check("lem_31", parse_expr(g_src), radii=default_radii())
        ok &= rep.verdict == "pass"
        ok &= all(w.error is None and abs(w.lhs - w.rhs) <= 5e-3
                  for w in rep.rows)
    report(7, "log-derivative identity", bool(ok))
    assert ok


# --- criteria 8 and 9 share one full suite run ------------------------------

def _suite_specs():
    radii = {"start": 2, "stop": 40, "count": 32}
    return [
        ("ez_core", {
            "function": "exp(z)", "radii": radii,
            "checks": ["thm_a",
                       {"id": "thm_b", "params": {"k": 2}},
                       {"id": "thm_d", "params": {"l": 3, "n": 1, "k": 1}}],
        }),
        ("ez_thm1", {
            "function": "exp(z)", "radii": radii, "checks": ["thm_1"],
            "polynomial": {"monomials": [{"coeff": 1,
                                          "exponents": [2, 0, 2]}]},
        }),
        ("ez_thm2", {
            "function": "exp(z)", "radii": radii, "checks": ["thm_2"],
            "polynomial": {"monomials": [
                {"coeff": 1, "exponents": [6, 1, 0, 1]},
                {"coeff": 2, "exponents": [6, 0, 1, 1]}]},
        }),
        ("ez_thm3", {
            "function": "exp(z)", "radii": radii, "checks": ["thm_3"],
            "polynomial": {"monomials": [
                {"coeff": 1, "exponents": [5, 3]},
                {"coeff": 1, "exponents": [3, 5]}]},
        }),
        ("ez_lem33", {
            "function": "exp(z)", "radii": radii, "checks": ["lem_33"],
            "polynomial": {"monomials": [{"coeff": 1,
                                          "exponents": [2, 0, 2]}]},
        }),
        ("tan_lem32", {
            "function": "tan(z)", "radii": radii,
            "checks": [{"id": "lem_32", "params": {"k": 2}},
                       {"id": "lem_32", "params": {"k": 3}}],
        }),
        ("tan_threshold", {
            "function": "tan(z)", "radii": radii,
            "checks": ["lem_35", "lem_36"],
            "polynomial": {"monomials": [{"coeff": 1,
                                          "exponents": [1, 0, 1]}]},
        }),
    ]


def _run_suite(base, tag):
    outputs = {}
    for name, spec in _suite_specs():
        spec_path = base / f"{name}.json"
        spec_path.write_text(json.dumps(spec))
        out_path = base / f"{name}_{tag}.json"
        code = main(["check", "--spec", str(spec_path),
                     "--out", str(out_path), "--reproducible",
                     "--threads", "2"])
        sidecars = sorted(base.glob(f"{name}_{tag}.*.dat"))
        outputs[name] = (code, out_path, sidecars)
    return outputs


@pytest.fixture(scope="module")
def suite_run(tmp_path_factory):
    base = tmp_path_factory.mktemp("suite")
    t0 = time.perf_counter()
    outputs = _run_suite(base, "one")
    elapsed = time.perf_counter() - t0
    return base, outputs, elapsed


def test_criterion_8_inequality_suite(suite_run):
    _, outputs, elapsed = suite_run
    ok = elapsed < 300.0
    verdicts = []
    for name, (code, out_path, _) in outputs.items():
        ok &= code == 0
        got = json.loads(out_path.read_text())
        verdicts += [c["verdict"] for c in got["checks"]]
    ok = bool(ok) and len(verdicts) == 11 and \
        all(v == "pass" for v in verdicts)
    report(8, f"inequality suite, {len(verdicts)} checks in {elapsed:.1f} s",
           ok)
    assert ok, (verdicts, elapsed)


def test_criterion_9_determinism(suite_run):
    base, first, _ = suite_run
    second = _run_suite(base, "two")
    ok = True
    for name in first:
        _, out1, side1 = first[name]
        _, out2, side2 = second[name]
        ok &= out1.read_bytes() == out2.read_bytes()
        ok &= [p.read_bytes() for p in side1] == \
            [p.read_bytes() for p in side2]
    report(9, "byte-identical reruns", bool(ok))
    assert ok
