"""Acceptance criteria 1-15, one result line each.

Two checks assert the four-crossing trace relation exactly as printed.
That printed relation is false (it lacks a -tr(AC)tr(BD) term), so those
checks are strict xfails; the corrected relation is checked alongside.
"""

import math
import time

import numpy as np
import pytest

from helpers import random_diagram, random_env, report, scalar
from tracediagrams import catalog, dsl, oracles
from tracediagrams.core import (
    Environment,
    basis_vector,
    rotate_ciliation,
    shuffle_ids,
    structural_key,
)
from tracediagrams.evaluator import (
    EnumerationGuardError,
    evaluate,
    evaluate_contracted,
    evaluate_enumerative,
    evaluate_expression,
    node_tensor,
)
from tracediagrams.fingerprint import normalize, parse_decomposition, read_off_identity
from tracediagrams.identities import (
    char_coeff_constant,
    char_coeff_ratios,
    pfaffian_experiment,
    read_char_coeff_golden,
    verify_case,
)
from tracediagrams.sampling import random_antisymmetric, random_matrix, random_vector, trial_rng
from tracediagrams.wiring import binor_alternatives, binor_expand, compile_wiring, ladder

PRINTED_TR3 = "tr(ABC) + tr(ACB) - tr(AB)tr(C) - tr(A)tr(BC) - tr(B)tr(CA) + tr(A)tr(B)tr(C)"
PRINTED_TR4 = ("2tr(ABCD) - tr(A)tr(BCD) - tr(B)tr(ACD) - tr(C)tr(ABD) - tr(D)tr(ABC)"
               " - tr(AB)tr(CD) - tr(AD)tr(BC) - tr(A)tr(B)tr(C)tr(D)"
               " + tr(A)tr(B)tr(CD) + tr(B)tr(C)tr(AD) + tr(C)tr(D)tr(AB) + tr(A)tr(D)tr(BC)")
CORRECTED_TR4 = PRINTED_TR4 + " + tr(AC)tr(BD)"


def _case(name):
    (case,) = catalog.find_cases(name)
    return case


def test_criterion_01_ciliation_sign():
    value = node_tensor(4)[2, 4, 1, 3]
    ok = value == -1
    report(1, f"node_tensor(4)[2,4,1,3] = {value}", ok)
    assert ok


def test_criterion_02_circle_values():
    got = {}
    for n in range(1, 7):
        env = Environment(n)
        g = catalog.circle(n)
        got[n] = (scalar(evaluate_enumerative(g, env)), scalar(evaluate_contracted(g, env)))
    ok = all(a == b == n for n, (a, b) in got.items())
    report(2, f"circle = n for n = 1..6 by both evaluators: {[int(a) for a, _ in got.values()]}", ok)
    assert ok


def _det_n2_coefficients(evaluate_fn):
    # Mobius inversion over 0/1 matrices recovers every monomial coefficient
    cells = [(0, 0), (0, 1), (1, 0), (1, 1)]
    values = {}
    for mask in range(16):
        a = [[0, 0], [0, 0]]
        for bit, (i, j) in enumerate(cells):
            if mask >> bit & 1:
                a[i][j] = 1
        values[mask] = evaluate_fn(a)
    coeffs = {}
    for mask in range(16):
        c = sum((-1) ** bin(mask ^ sub).count("1") * values[sub]
                for sub in range(16) if sub & mask == sub)
        if c:
            coeffs[frozenset(f"a{i + 1}{j + 1}" for bit, (i, j) in enumerate(cells) if mask >> bit & 1)] = c
    return coeffs


def test_criterion_03_determinant_agreement():
    start = time.perf_counter()
    mismatches = 0
    for n in (2, 3, 4):
        node, expansion = catalog.det_node(n), catalog.det_permutation_sum(n)
        for t in range(25):
            a = random_matrix(trial_rng(3, 100 * n + t), n)
            env = Environment(n, {"A": a})
            values = {scalar(evaluate(node, env)), scalar(evaluate_expression(expansion, env)), oracles.det(a)}
            mismatches += len(values) != 1
    g2 = catalog.det_node(2)
    coeffs = _det_n2_coefficients(lambda a: scalar(evaluate(g2, Environment(2, {"A": a}))))
    expected = {frozenset({"a11", "a22"}): 1, frozenset({"a12", "a21"}): -1}
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and coeffs == expected and elapsed < 5
    report(3, f"det builders vs cofactor oracle, 75 matrices, {mismatches} mismatches; "
              f"n=2 polynomial a11a22 - a12a21 recovered: {coeffs == expected}; {elapsed:.2f}s", ok)
    assert ok


def test_criterion_04_vector_identities_on_basis():
    start = time.perf_counter()
    names = ["quad-cross", "bac-cab"] + [c.name for c in catalog.find_cases("triple-product-chain")]
    reports = [verify_case(_case(name)) for name in names]
    elapsed = time.perf_counter() - start
    quad = reports[0]
    ok = all(r.holds for r in reports) and quad.trials == 81 and elapsed < 5
    report(4, f"{len(reports)} basis-exhaustion checks hold (quad-cross on {quad.trials} tuples); {elapsed:.2f}s", ok)
    assert ok


def test_criterion_05_cross_product_components():
    g = catalog.cross_diagram(3)
    pairs = [(basis_vector(3, i), basis_vector(3, j)) for i in range(1, 4) for j in range(1, 4)]
    rng = trial_rng(5, 0)
    pairs += [(random_vector(rng, 3), random_vector(rng, 3)) for _ in range(10)]
    bad = 0
    for u, v in pairs:
        w = evaluate(g, Environment(3, vectors={"u": u, "v": v}))
        expected = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
        bad += tuple(w[k] for k in (1, 2, 3)) != expected
    ok = bad == 0
    report(5, f"cross diagram = u x v on 9 basis pairs and 10 random pairs ({bad} mismatches)", ok)
    assert ok


def test_criterion_06_closed_full_determinant():
    bad = 0
    for n in (2, 3, 4):
        g = catalog.char_coeff_diagram(n, n)
        for t in range(25):
            a = random_matrix(trial_rng(6, 100 * n + t), n)
            expected = (-1) ** (n // 2) * math.factorial(n) * oracles.det(a)
            bad += scalar(evaluate(g, Environment(n, {"A": a}))) != expected
    ok = bad == 0
    report(6, f"closed full diagram = (-1)^floor(n/2) n! det(A), n = 2,3,4 x 25 ({bad} mismatches)", ok)
    assert ok


def test_criterion_07_det_factors_node():
    r = verify_case(_case("det-factors-node"))
    a = random_matrix(trial_rng(7, 0), 3)
    t = evaluate(catalog.det_factors_node(3), Environment(3, {"A": a}))
    entries = len(list(t.items()))
    ok = r.holds and r.trials == 25 and entries == 27
    report(7, f"marked node = det(A) x plain node on all {entries} entries, {r.trials} trials: {r.status}", ok)
    assert ok


def test_criterion_08_char_coeff_constants():
    start = time.perf_counter()
    golden = read_char_coeff_golden()
    measured, sample_counts = {}, {}
    for n in (2, 3, 4):
        for k in range(n + 1):
            ratios = char_coeff_ratios(n, k, trials=12)
            sample_counts[(n, k)] = len(ratios)
            measured[(n, k)] = char_coeff_constant(n, k, trials=12)
    elapsed = time.perf_counter() - start
    ok = (min(sample_counts.values()) >= 10 and measured[(2, 2)] == -2 and measured[(3, 3)] == -6
          and measured == golden and elapsed < 20)
    shown = " ".join(f"({n},{k})={c}" for (n, k), c in sorted(measured.items()))
    report(8, f"ratios constant on >= {min(sample_counts.values())} samples; {shown}; matches golden; "
              f"{elapsed:.2f}s", ok)
    assert ok


def test_criterion_09_binor_family():
    reports = [verify_case(_case(name)) for name in
               ("binor", "double-ciliation-same", "double-ciliation-opposite", "detnode")]
    binor = _case("binor")
    env = Environment(2)
    entries = len(list(evaluate_expression(binor.lhs, env).items()))
    ok = all(r.holds and r.trials == 25 for r in reports) and entries == 16
    report(9, f"binor ({entries} entries), doubly ciliated strand signs, detnode: "
              f"{', '.join(r.status for r in reports)}", ok)
    assert ok


def test_criterion_10_trace_relations():
    names = ["ch2tr", "cayley-hamilton", "det-sum", "tr-cyclic", "tr3", "tr4", "tautology"]
    reports = [verify_case(_case(name)) for name in names]
    ch = _case("cayley-hamilton")
    ok = all(r.holds and r.trials == 100 for r in reports) and ch.lhs.arity == 2
    report(10, "ch2tr, Cayley-Hamilton (arity 2), det(A+B), tr(AB)=tr(BA), tr3, "
               f"tr4 corrected, tautology; 100 trials each: {[r.status for r in reports]}", ok)
    assert ok


@pytest.mark.xfail(strict=True, reason="the printed four-crossing relation omits -tr(AC)tr(BD)")
def test_criterion_10_tr4_as_printed():
    r = verify_case(_case("tr4-as-printed"))
    report(10, f"tr4 exactly as printed, 100 trials: {r.status} (known erratum)", r.holds)
    assert r.holds


def test_criterion_11_binor_expansion():
    start = time.perf_counter()
    counts = {}
    preserved = True
    symbols = "ABCD"
    for k in range(1, 5):
        for closed in (True, False):
            t = ladder(list(symbols[:k]), closed=closed)
            counts[(k, closed)] = len(binor_alternatives(t))
            original, expansion = compile_wiring(t), binor_expand(t)
            for trial in range(10):
                rng = trial_rng(11, 10 * k + trial)
                env = Environment(2, {s: random_matrix(rng, 2) for s in symbols[:k]})
                preserved &= evaluate(original, env) == evaluate_expression(expansion, env)
    tr3 = read_off_identity(ladder(list("ABC")))
    tr4 = read_off_identity(ladder(list("ABCD")))
    elapsed = time.perf_counter() - start
    terms_ok = all(c == 2 ** k for (k, _), c in counts.items())
    tr3_ok = tr3 == normalize(parse_decomposition(PRINTED_TR3))
    tr4_ok = tr4 == normalize(parse_decomposition(CORRECTED_TR4))
    ok = terms_ok and preserved and tr3_ok and tr4_ok and elapsed < 30
    report(11, f"2^k terms for k=1..4: {terms_ok}; values preserved: {preserved}; tr3 as printed: {tr3_ok}; "
               f"tr4 corrected: {tr4_ok}; {elapsed:.2f}s", ok)
    assert ok


@pytest.mark.xfail(strict=True, reason="the printed four-crossing relation omits -tr(AC)tr(BD)")
def test_criterion_11_tr4_coefficients_as_printed():
    tr4 = read_off_identity(ladder(list("ABCD")))
    ok = tr4 == normalize(parse_decomposition(PRINTED_TR4))
    report(11, f"tr4 coefficient vector exactly as printed: {ok} (known erratum)", ok)
    assert ok


def _equivalence_graphs():
    seen = {}
    for n in range(1, 5):
        for name, g in catalog.catalog_graphs(n).items():
            seen.setdefault(structural_key(g), (f"{name}@{n}", g))
    for case in catalog.identity_suite():
        if case.dim > 4:
            continue
        for expr in (case.lhs, case.rhs):
            for _, g in expr.terms:
                seen.setdefault(structural_key(g), (case.name, g))
    return list(seen.values())


def test_criterion_12_evaluator_equivalence():
    graphs = _equivalence_graphs()
    bad = []
    for idx, (name, g) in enumerate(graphs):
        env = random_env(g, 12, idx)
        if evaluate_enumerative(g, env) != evaluate_contracted(g, env):
            bad.append(name)
    rng = np.random.default_rng(1212)
    random_bad = 0
    for i in range(50):
        g = random_diagram(rng, int(rng.integers(2, 4)))
        parsed = dsl.parse_diagram(dsl.serialize_diagram(g))
        env = random_env(parsed, 1212, i)
        random_bad += evaluate_enumerative(parsed, env) != evaluate_contracted(parsed, env)
    g6 = catalog.det_node(6)
    env6 = Environment(6, {"A": random_matrix(trial_rng(12, 6), 6)})
    start = time.perf_counter()
    value = scalar(evaluate_contracted(g6, env6))
    elapsed = time.perf_counter() - start
    try:
        evaluate_enumerative(g6, env6)
        refused = False
    except EnumerationGuardError:
        refused = True
    ok = not bad and random_bad == 0 and value == oracles.det(env6.matrices["A"]) and elapsed < 5 and refused
    report(12, f"{len(graphs)} catalog diagrams and 50 random DSL diagrams agree ({len(bad) + random_bad} "
               f"mismatches); det-node n=6 contracted in {elapsed:.3f}s, enumeration refused: {refused}", ok)
    assert ok


def test_criterion_13_structural_invariances():
    pool = [catalog.cross_diagram(3), catalog.det_node(2), catalog.det_node(3), catalog.det_node(4),
            catalog.char_coeff_diagram(3, 2), catalog.char_coeff_diagram(4, 1),
            catalog.vector_det_node(3), catalog.vector_det_node(4), catalog.double_ciliation_strand(True),
            catalog.pfaffian_candidate(4)]
    shuffle_bad = rotate_bad = 0
    for seed in range(20):
        g = pool[seed % len(pool)]
        env = random_env(g, 13, seed)
        base = evaluate(g, env)
        shuffle_bad += evaluate(shuffle_ids(g, seed), env) != base
        node = g.nodes[seed % len(g.nodes)].id
        sign = (-1) ** (g.dim - 1)
        rotate_bad += evaluate(rotate_ciliation(g, node, 1), env) != base * sign
    ok = shuffle_bad == 0 and rotate_bad == 0
    report(13, f"shuffle_ids invariance and single-step rotation sign (-1)^(n-1) on 20 seeded cases "
               f"({shuffle_bad + rotate_bad} violations)", ok)
    assert ok


DET_DOCUMENT = """
dim 3
matrix A = [[{a}]]
diagram det {{
  node v (a, b, c)
  basis 1 -> a
  basis 2 -> b
  basis 3 -> c
  mark A on a dir fwd
  mark A on b dir fwd
  mark A on c dir fwd
}}
"""


def test_criterion_14_dsl_round_trip():
    bad = []
    total = 0
    for n in range(1, 5):
        for name, g in catalog.catalog_graphs(n).items():
            total += 1
            text = dsl.serialize_diagram(g)
            again = dsl.parse_diagram(text)
            env = random_env(g, 14, total)
            if dsl.serialize_diagram(again) != text or structural_key(again) != structural_key(g) \
                    or evaluate(again, env) != evaluate(g, env):
                bad.append(f"{name}@{n}")
    a = random_matrix(trial_rng(14, 0), 3)
    doc = dsl.parse(DET_DOCUMENT.format(a="], [".join(", ".join(str(x) for x in r) for r in a)))
    fig = scalar(evaluate(doc.diagrams["det"], doc.environment()))
    ok = not bad and fig == oracles.det(a)
    report(14, f"{total} catalog diagrams round-trip to a fixed point with equal values ({len(bad)} failures); "
               f"three-leg det document = det(A) = {fig}", ok)
    assert ok


def test_criterion_15_pfaffian_experiment():
    r2 = pfaffian_experiment(2, trials=20)
    r4 = pfaffian_experiment(4, trials=20)
    squares_ok = True
    for n in (2, 4, 6):
        for t in range(10):
            m = random_antisymmetric(trial_rng(15, 10 * n + t), n)
            squares_ok &= oracles.pfaffian(m) ** 2 == oracles.det(m)
    ok = r2.fits and r2.kappa == 1 and len(r2.samples) == 20 and bool(r4.summary()) and squares_ok
    report(15, f"n=2 candidate = Pf(A - A^T) on 20 samples: {r2.fits and r2.kappa == 1}; "
               f"n=4 report: {r4.summary()}; Pf^2 = det for n = 2,4,6: {squares_ok}", ok)
    assert ok
