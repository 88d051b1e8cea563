"""Property tests over generated diagrams, wiring terms and matrices."""

from dataclasses import replace

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_diagram, random_env
from tracediagrams import dsl, oracles
from tracediagrams.catalog import det_node
from tracediagrams.core import Edge, Environment, canonicalize, rotate_ciliation, shuffle_ids, structural_key
from tracediagrams.evaluator import evaluate, evaluate_contracted, evaluate_enumerative, evaluate_expression
from tracediagrams.wiring import Mat, Swap, WiringTerm, binor_expand, compile_wiring

SETTINGS = settings(max_examples=60, deadline=None)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.integers(min_value=1, max_value=3)


def _diagram(seed, n):
    return random_diagram(np.random.default_rng(seed), n)


@SETTINGS
@given(seeds, dims)
def test_evaluators_agree(seed, n):
    g = _diagram(seed, n)
    env = random_env(g, seed)
    assert evaluate_enumerative(g, env) == evaluate_contracted(g, env)


@SETTINGS
@given(seeds, dims)
def test_serialize_parse_fixed_point(seed, n):
    g = _diagram(seed, n)
    text = dsl.serialize_diagram(g)
    again = dsl.parse_diagram(text)
    assert dsl.serialize_diagram(again) == text
    env = random_env(g, seed)
    assert evaluate(again, env) == evaluate(g, env)


@SETTINGS
@given(seeds, dims, st.integers(min_value=0, max_value=1000))
def test_shuffle_preserves_value(seed, n, shuffle_seed):
    g = _diagram(seed, n)
    env = random_env(g, seed)
    once = shuffle_ids(g, shuffle_seed)
    assert evaluate(once, env) == evaluate(g, env)
    assert evaluate(shuffle_ids(once, shuffle_seed + 1), env) == evaluate(g, env)


@SETTINGS
@given(seeds, dims)
def test_canonical_form_is_idempotent(seed, n):
    g = _diagram(seed, n)
    c = canonicalize(g)
    assert canonicalize(c) == c
    assert structural_key(c) == structural_key(g)


@SETTINGS
@given(seeds, st.integers(min_value=2, max_value=3), st.integers(min_value=-3, max_value=3))
def test_rotation_sign(seed, n, steps):
    g = _diagram(seed, n)
    if not g.nodes:
        return
    env = random_env(g, seed)
    node = g.nodes[seed % len(g.nodes)].id
    sign = (-1) ** ((n - 1) * steps)
    assert evaluate(rotate_ciliation(g, node, steps), env) == evaluate(g, env) * sign


@SETTINGS
@given(seeds, dims)
def test_flipping_a_marking_transposes_the_matrix(seed, n):
    g = _diagram(seed, n)
    if "A" not in g.matrix_names():
        return
    env = random_env(g, seed)
    flipped = replace(g, edges=tuple(
        Edge(e.end1, e.end2, tuple(m.flipped() if m.matrix == "A" else m for m in e.markings))
        for e in g.edges))
    transposed = env.bind({"A": oracles.transpose(env.matrices["A"])})
    assert evaluate(flipped, transposed) == evaluate(g, env)


wiring_layers = st.lists(
    st.one_of(st.just(Swap(0)), st.builds(Mat, st.sampled_from("ABC"), st.integers(0, 1), st.booleans())),
    min_size=1, max_size=6)


@SETTINGS
@given(wiring_layers, st.booleans(), seeds)
def test_binor_expansion_preserves_value(layers, closed, seed):
    t = WiringTerm(2, tuple(layers), closed)
    g = compile_wiring(t)
    env = random_env(g, seed)
    assert evaluate_expression(binor_expand(t), env) == evaluate(g, env)
    assert len(binor_expand(t)) == 2 ** t.swap_count


@SETTINGS
@given(st.sampled_from([2, 4, 6]), seeds)
def test_pfaffian_squares_to_det(n, seed):
    rng = np.random.default_rng(seed)
    upper = rng.integers(-4, 5, size=(n, n))
    m = [[int(upper[i][j]) if i < j else (-int(upper[j][i]) if i > j else 0) for j in range(n)] for i in range(n)]
    assert oracles.pfaffian(m) ** 2 == oracles.det(m)


@SETTINGS
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=3, max_size=3),
       st.integers(-4, 4))
def test_det_node_is_homogeneous(a, c):
    g = det_node(3)
    scaled = [[c * x for x in row] for row in a]
    assert evaluate(g, Environment(3, {"A": scaled})).scalar == c ** 3 * evaluate(g, Environment(3, {"A": a})).scalar
