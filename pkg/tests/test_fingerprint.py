from fractions import Fraction

import pytest

from tracediagrams import catalog
from tracediagrams.core import DiagramError
from tracediagrams.fingerprint import (
    FingerprintError,
    TraceMonomial,
    canonical_word,
    check_decomposition,
    collect,
    fingerprint_basis,
    fingerprint_decompose,
    format_decomposition,
    format_identity,
    normalize,
    parse_decomposition,
    read_off_identity,
    solve_exact,
)
from tracediagrams.wiring import binor_expand, ladder


def test_canonical_word_is_cyclic_minimum():
    assert canonical_word("CAB") == ("A", "B", "C")
    assert canonical_word("BA") == ("A", "B")
    with pytest.raises(ValueError):
        canonical_word("")


def test_monomial_parse_and_print():
    m = TraceMonomial.parse("det(B)tr(CA)tr(B)")
    assert str(m) == "tr(B)tr(AC)det(B)"
    assert TraceMonomial.parse("1") == TraceMonomial(())
    assert m.degree() == 5
    with pytest.raises(ValueError):
        TraceMonomial.parse("sin(A)")


def test_monomial_evaluate():
    mats = {"A": [[1, 2], [3, 4]], "B": [[0, 1], [1, 0]]}
    assert TraceMonomial.parse("tr(A)det(A)").evaluate(mats) == 5 * -2
    assert TraceMonomial.parse("tr(AB)").evaluate(mats) == 5


def test_basis_has_distinct_monomials():
    basis = fingerprint_basis("AB", 3)
    assert len(set(basis)) == len(basis)
    # tr(AB) and tr(BA) are one monomial
    assert sum(1 for m in basis if str(m) == "tr(AB)") == 1


def test_solve_exact():
    cols = [[Fraction(1), Fraction(0), Fraction(1)], [Fraction(0), Fraction(1), Fraction(1)]]
    assert solve_exact(cols, [Fraction(2), Fraction(3), Fraction(5)]) == [2, 3]
    assert solve_exact(cols, [Fraction(2), Fraction(3), Fraction(4)]) is None
    with pytest.raises(FingerprintError, match="insufficient samples"):
        solve_exact([cols[0], cols[0]], [Fraction(1)] * 3)


def test_trace_circle_reads_off_itself():
    dec = fingerprint_decompose(catalog.trace_word_circle(["A", "B"]), "AB")
    assert dec == [(TraceMonomial.parse("tr(AB)"), 1)]
    assert check_decomposition(catalog.trace_word_circle(["A", "B"]), dec, "AB")


def test_closed_full_det_at_two():
    dec = fingerprint_decompose(catalog.char_coeff_diagram(2, 2), "A")
    assert format_decomposition(dec) == "-2det(A)"


def test_tr3_expansion():
    t = ladder(list("ABC"))
    dec = read_off_identity(t)
    printed = "tr(ABC) + tr(ACB) - tr(AB)tr(C) - tr(A)tr(BC) - tr(B)tr(CA) + tr(A)tr(B)tr(C)"
    assert dec == normalize(parse_decomposition(printed))
    assert check_decomposition(binor_expand(t), fingerprint_decompose(binor_expand(t), "ABC"), "ABC")


def test_two_matrix_ladder_is_tautology():
    assert read_off_identity(ladder(["A", "B"])) == []
    assert format_identity([]) == "0 = 0"


def test_format_parse_round_trip():
    text = "tr(A)tr(B) - 1/2tr(AB)det(C) + 3"
    dec = parse_decomposition(text)
    assert parse_decomposition(format_decomposition(dec)) == dec


def test_collect_drops_cancelled_terms():
    m = TraceMonomial.parse("tr(A)")
    assert collect([(m, 1), (m, -1)]) == []


def test_errors():
    with pytest.raises(DiagramError, match="closed"):
        fingerprint_decompose(catalog.word_strand(["A"], 2), "A")
    with pytest.raises(DiagramError, match="dimension 2"):
        fingerprint_decompose(catalog.trace_word_circle(["A"], dim=3), "A")
    with pytest.raises(FingerprintError, match="insufficient samples"):
        fingerprint_decompose(catalog.trace_word_circle(["A"]), "A", trials=2)
    with pytest.raises(FingerprintError, match="basis deficient"):
        fingerprint_decompose(catalog.trace_word_circle(["A", "B"]), "AB", degree_bound=1)


def test_cdabb_closure_needs_tie_break():
    from tracediagrams.wiring import compile_wiring

    g = compile_wiring(catalog.CDABB_TERM)
    with pytest.raises(FingerprintError, match="basis deficient"):
        fingerprint_decompose(g, "ABCD")
    dec = fingerprint_decompose(g, "ABCD", prefer_simplest=True)
    assert format_decomposition(dec) == "-tr(ADC)det(B) + tr(A)tr(CD)det(B)"
    assert check_decomposition(g, dec, "ABCD")
