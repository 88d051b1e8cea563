import pytest

from helpers import scalar
from tracediagrams import oracles
from tracediagrams.core import Environment, validate
from tracediagrams.evaluator import evaluate, evaluate_expression
from tracediagrams.sampling import random_matrix, trial_rng
from tracediagrams.wiring import (
    Cap,
    Cup,
    Mat,
    Swap,
    WiringError,
    WiringTerm,
    binor_alternatives,
    binor_convention,
    binor_expand,
    compile_wiring,
    ladder,
    parse_wiring,
)


def test_calibrated_convention():
    assert binor_convention() == ("first", "second")


def test_widths_and_check():
    t = WiringTerm(2, (Cap(0, "first"), Cup(0, "first"), Swap(0)))
    assert t.widths() == [2, 0, 2, 2]
    with pytest.raises(WiringError):
        WiringTerm(1, (Swap(0),)).check()
    with pytest.raises(WiringError, match="cannot close"):
        WiringTerm(2, (Cap(0, "first"),), closed=True).check()
    with pytest.raises(WiringError, match="dimension 2"):
        WiringTerm(2, (), dim=3).check()


def test_ladder_shape():
    t = ladder(["A", "B", "C"])
    assert t.swap_count == 3
    # layers read bottom to top, so the last symbol comes first
    assert t.matrix_names() == ["C", "B", "A"]
    assert validate(compile_wiring(t)).ok


def test_closed_ladder_without_swaps_is_trace_product():
    # one matrix per strand, closed: tr(A) tr(B)
    t = WiringTerm(2, (Mat("A", 0), Mat("B", 1)), closed=True)
    rng = trial_rng(0, 0)
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    env = Environment(2, {"A": a, "B": b})
    assert scalar(evaluate(compile_wiring(t), env)) == oracles.trace(a) * oracles.trace(b)


def test_single_swap_closure_is_trace_of_product():
    t = ladder(["A", "B"])
    rng = trial_rng(1, 0)
    a, b = random_matrix(rng, 2), random_matrix(rng, 2)
    env = Environment(2, {"A": a, "B": b})
    value = scalar(evaluate(compile_wiring(WiringTerm(2, (Swap(0), Mat("A", 0), Mat("B", 1)), True)), env))
    assert value == oracles.trace(oracles.matmul(a, b)) or value == oracles.trace(oracles.matmul(b, a))
    assert len(binor_alternatives(t)) == 4


def test_expansion_preserves_open_terms():
    t = ladder(["A", "B"], closed=False)
    rng = trial_rng(2, 0)
    env = Environment(2, {"A": random_matrix(rng, 2), "B": random_matrix(rng, 2)})
    assert evaluate(compile_wiring(t), env) == evaluate_expression(binor_expand(t), env)
    assert binor_expand(t).arity == 4


def test_expansion_requires_dimension_two():
    with pytest.raises(WiringError):
        binor_expand(WiringTerm(2, (Swap(0),), dim=3))


def test_text_round_trip():
    t = WiringTerm(2, (Cup(0, "second"), Swap(1), Mat("A", 2, False), Cap(0, None)))
    again = parse_wiring(t.to_text())
    assert again == t


def test_parse_errors_name_the_line():
    with pytest.raises(WiringError, match="line 2"):
        parse_wiring("width 2\nfrobnicate 0\n")
    with pytest.raises(WiringError, match="width"):
        parse_wiring("swap 0\n")
    with pytest.raises(WiringError, match="bad side"):
        parse_wiring("width 2\ncap 0 left\n")
