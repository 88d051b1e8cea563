import math
from fractions import Fraction

import pytest

from tracediagrams import catalog, evaluator
from tracediagrams.core import BindingError, DiagramError, DiagramExpression, Environment
from tracediagrams.fingerprint import parse_decomposition
from tracediagrams.identities import (
    FAILS,
    HOLDS,
    RatioNotConstant,
    cdabb_experiment,
    char_coeff_constant,
    fingerprint_records,
    pfaffian_experiment,
    predicted_pfaffian_ratio,
    read_char_coeff_golden,
    read_fingerprint_golden,
    run_paper_suite,
    verify_case,
    verify_on_basis,
    verify_randomized,
    write_char_coeff_golden,
)


def test_whole_suite_holds():
    reports = run_paper_suite()
    failing = [r.name for r in reports if not r.holds]
    assert failing == []


@pytest.mark.parametrize("seed", range(5))
def test_seed_sweep(seed):
    # fewer trials per seed; the default seed runs the full counts above
    reports = run_paper_suite(seed=seed, trials=10)
    assert all(r.holds for r in reports)


def test_printed_tr4_fails_with_counterexample():
    r = verify_case(catalog.find_cases("tr4-as-printed")[0])
    assert r.status == FAILS
    assert set(r.counterexample) >= {"trial", "matrices", "lhs", "rhs"}
    assert r.counterexample["lhs"] != r.counterexample["rhs"]


@pytest.fixture
def broken_sign(monkeypatch):
    # every permutation counts as even
    monkeypatch.setattr(evaluator, "permutation_sign", lambda seq: 0 if len(set(seq)) < len(seq) else 1)
    evaluator.clear_caches()
    yield
    monkeypatch.undo()
    evaluator.clear_caches()


def test_mutation_canary(broken_sign):
    reports = run_paper_suite(trials=5)
    failing = {r.name for r in reports if not r.holds}
    assert "det-node-vs-sum-3" in failing
    assert "quad-cross" in failing
    assert len(failing) >= 5


def test_canary_cleanup_restores_suite():
    assert verify_case(catalog.find_cases("det-node-vs-sum-3")[0]).holds


def test_basis_strategy_reports_counterexample():
    case = catalog.find_cases("bac-cab")[0]
    wrong = -1 * case.rhs
    r = verify_on_basis(case.lhs, wrong, case.vector_slots, Environment(3), "negated")
    assert r.status == FAILS
    assert set(r.counterexample["vectors"]) == set(case.vector_slots)
    with pytest.raises(DiagramError, match="slot"):
        verify_on_basis(case.lhs, case.rhs, ("q",), Environment(3))


def test_randomized_checks_symbols_and_arity():
    det2 = DiagramExpression.of(catalog.det_node(2))
    with pytest.raises(BindingError, match="'A'"):
        verify_randomized(det2, det2, ["B"])
    with pytest.raises(DiagramError, match="arity"):
        verify_randomized(det2, DiagramExpression.of(catalog.word_strand(["A"], 2)), ["A"])


def test_workers_agree_with_serial():
    case = catalog.find_cases("det-sum")[0]
    serial = verify_case(case, trials=8)
    parallel = verify_case(case, trials=8, workers=2)
    assert serial.status == parallel.status == HOLDS


def test_report_row():
    r = verify_case(catalog.find_cases("tr-cyclic")[0], trials=3)
    assert "tr-cyclic" in r.row() and "holds" in r.row()


def test_char_coeff_constant_edges():
    assert char_coeff_constant(2, 2) == -2
    with pytest.raises(DiagramError):
        char_coeff_constant(5, 1)
    assert issubclass(RatioNotConstant, DiagramError)


def test_char_coeff_golden_is_stable(tmp_path):
    fresh = write_char_coeff_golden(tmp_path / "cc.txt")
    assert read_char_coeff_golden(tmp_path / "cc.txt") == fresh == read_char_coeff_golden()


def test_char_coeff_constants_at_k_equal_n_are_signed_factorials():
    golden = read_char_coeff_golden()
    for n in (2, 3, 4):
        assert golden[(n, n)] == (-1) ** (n // 2) * math.factorial(n)


def test_fingerprint_golden_is_stable():
    assert fingerprint_records() == read_fingerprint_golden()


def test_fingerprint_golden_tr4_has_missing_term():
    dec = dict(parse_decomposition(read_fingerprint_golden()["ladder-ABCD"]))
    terms = {str(m): c for m, c in dec.items()}
    assert terms["tr(AC)tr(BD)"] == Fraction(1, 2)
    assert terms["tr(AB)tr(CD)"] == Fraction(-1, 2)


def test_pfaffian_report_and_prediction():
    r2 = pfaffian_experiment(2)
    assert r2.fits and r2.kappa == 1 == predicted_pfaffian_ratio(2)
    r4 = pfaffian_experiment(4)
    assert r4.fits and r4.kappa == predicted_pfaffian_ratio(4) == 2
    assert "2 * Pf" in r4.summary()
    sym = pfaffian_experiment(2, symmetric=True)
    assert sym.fits and all(v == 0 for v, _ in sym.samples)
    with pytest.raises(DiagramError):
        pfaffian_experiment(3)


def test_pfaffian_reverse_flips_sign():
    assert pfaffian_experiment(2, reverse=True).kappa == -1


def test_pfaffian_ratio_at_six():
    r6 = pfaffian_experiment(6, trials=4)
    assert r6.fits and r6.kappa == predicted_pfaffian_ratio(6) == 6


def test_cdabb_matches_closed_form():
    report = cdabb_experiment()
    assert report.agrees and report.checked == 10
    assert "det(AB)tr(DCA^-1)" in report.summary()
