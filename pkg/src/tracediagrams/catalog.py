"""Builders for the standard diagram shapes and the named identity suite.

Port order at every node follows the drawings: inputs left to right are
the ports counter-clockwise after the cilium.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from .core import (
    BasisLabel,
    DiagramError,
    DiagramExpression,
    DiagramGraph,
    Edge,
    FreeOutput,
    Marking,
    Node,
    NodePort,
    VectorInput,
    disjoint_union,
    strand,
    union_all,
    validate,
)
from .evaluator import permutation_sign
from . import oracles
from .wiring import Cap, Cup, Mat, Swap, WiringTerm, binor_alternatives, binor_expand, compile_wiring, ladder

VECTOR_NAMES = ("u", "v", "w", "x", "y", "z")
MAX_PERMUTATION_N = 6


def _checked(g: DiagramGraph) -> DiagramGraph:
    report = validate(g)
    if not report.ok:
        raise DiagramError(f"builder produced an invalid diagram: {report}")
    return g


# -- basic shapes ------------------------------------------------------------

def circle(dim: int) -> DiagramGraph:
    return DiagramGraph(dim, (), (Edge(None, None, ()),))


def dot_diagram(u: str = "u", v: str = "v", dim: int = 3) -> DiagramGraph:
    """u . v as one edge between two vector terminals."""
    return _checked(DiagramGraph(dim, (), (Edge(VectorInput(u, 1), VectorInput(v, 2)),)))


def cross_diagram(n: int, names: Optional[Sequence[str]] = None) -> DiagramGraph:
    """Generalized cross product: one node, ``n - 1`` vector legs, one free edge."""
    names = list(VECTOR_NAMES[:n - 1] if names is None else names)
    if len(names) != n - 1:
        raise DiagramError(f"cross diagram in dimension {n} needs {n - 1} vectors, got {len(names)}")
    edges = [Edge(VectorInput(name, k + 1), NodePort(0, k)) for k, name in enumerate(names)]
    edges.append(Edge(NodePort(0, n - 1), FreeOutput(1)))
    return _checked(DiagramGraph(n, (Node(0, n),), tuple(edges)))


def vector_det_node(n: int, names: Optional[Sequence[str]] = None) -> DiagramGraph:
    """One node with every port fed by a vector: det of the column matrix."""
    names = list(VECTOR_NAMES[:n] if names is None else names)
    if len(names) != n:
        raise DiagramError(f"vector determinant node in dimension {n} needs {n} vectors, got {len(names)}")
    edges = [Edge(VectorInput(name, k + 1), NodePort(0, k)) for k, name in enumerate(names)]
    return _checked(DiagramGraph(n, (Node(0, n),), tuple(edges)))


def det_node(n: int, matrix: str = "A") -> DiagramGraph:
    """Node whose k-th port is fed by basis label k through the matrix."""
    edges = [Edge(BasisLabel(k), NodePort(0, k - 1), (Marking(matrix, True),)) for k in range(1, n + 1)]
    return _checked(DiagramGraph(n, (Node(0, n),), tuple(edges)))


def det_permutation_sum(n: int, matrix: str = "A") -> DiagramExpression:
    """Sum over permutations of signed bundles of marked strands."""
    if not 1 <= n <= MAX_PERMUTATION_N:
        raise DiagramError(f"permutation expansion limited to 1 <= n <= {MAX_PERMUTATION_N}, got {n}")
    terms = []
    for sigma in itertools.permutations(range(1, n + 1)):
        strands = [strand(n, (Marking(matrix, True),), BasisLabel(k), BasisLabel(sigma[k - 1]))
                   for k in range(1, n + 1)]
        # strand k reads a_{sigma(k), k}; the product over k is the same sum
        terms.append((permutation_sign(sigma), union_all(strands)))
    return DiagramExpression(tuple(terms), dim=n, arity_hint=0)


def trace_word_circle(names: Sequence[str] = (), directions: Optional[Sequence[bool]] = None,
                      dim: int = 2) -> DiagramGraph:
    """Closed loop evaluating to tr(names[0] names[1] ...).

    A ``False`` direction transposes that factor.
    """
    names = list(names)
    directions = [True] * len(names) if directions is None else list(directions)
    if len(directions) != len(names):
        raise DiagramError("one direction per matrix is required")
    # markings act in flow order, so the word is laid out back to front
    marks = tuple(Marking(name, fwd) for name, fwd in zip(reversed(names), reversed(directions)))
    return _checked(DiagramGraph(dim, (), (Edge(None, None, marks),)))


def word_strand(names: Sequence[str], dim: int) -> DiagramGraph:
    """Open strand from output 1 to output 2 carrying the matrix product.

    The first name is applied last, so entry ``(j, i)`` is ``(A1 A2 ...)_{ij}``.
    """
    marks = tuple(Marking(name, True) for name in reversed(list(names)))
    return strand(dim, marks)


def matrix_entry_strand(matrix: str, i: int, j: int, dim: int = 2) -> DiagramGraph:
    """Strand from basis label j through the matrix to basis label i."""
    return DiagramGraph(dim, (), (Edge(BasisLabel(j), BasisLabel(i), (Marking(matrix, True),)),))


def char_coeff_diagram(n: int, k: int, matrix: str = "A") -> DiagramGraph:
    """Two nodes joined by ``n`` parallel edges, the first ``k`` marked.

    Bottom port ``i`` meets top port ``n - 1 - i`` so the strands do not
    cross when both nodes are drawn with their cilia outside.
    """
    if not 0 <= k <= n:
        raise DiagramError(f"need 0 <= k <= n, got k={k}, n={n}")
    bottom, top = 0, 1
    edges = []
    for i in range(n):
        marks = (Marking(matrix, True),) if i < k else ()
        edges.append(Edge(NodePort(bottom, i), NodePort(top, n - 1 - i), marks))
    return _checked(DiagramGraph(n, (Node(bottom, n), Node(top, n)), tuple(edges)))


def pfaffian_pairs(n: int, pairing: Union[str, Sequence[tuple[int, int]]] = "nested") -> list[tuple[int, int]]:
    if n % 2:
        raise DiagramError(f"a perfect pairing of ports needs even n, got {n}")
    if pairing == "nested":
        return [(i, n - 1 - i) for i in range(n // 2)]
    if pairing == "adjacent":
        return [(2 * i, 2 * i + 1) for i in range(n // 2)]
    if isinstance(pairing, str):
        raise DiagramError(f"unknown pairing {pairing!r}")
    pairs = [tuple(p) for p in pairing]
    if sorted(x for p in pairs for x in p) != list(range(n)):
        raise DiagramError(f"pairing {pairs} is not a perfect matching of 0..{n - 1}")
    return pairs


def pfaffian_candidate(n: int, matrix: str = "A",
                       pairing: Union[str, Sequence[tuple[int, int]]] = "nested",
                       reverse: bool = False) -> DiagramGraph:
    """One node with its ports joined in pairs by singly marked loops.

    By default each marking takes its input from the later port of its
    pair; ``reverse`` flips every marking.
    """
    if n % 2:
        raise DiagramError(f"a closed one-node diagram needs even n, got {n}")
    edges = []
    for a, b in pfaffian_pairs(n, pairing):
        lo, hi = min(a, b), max(a, b)
        edges.append(Edge(NodePort(0, lo), NodePort(0, hi), (Marking(matrix, reverse),)))
    return _checked(DiagramGraph(n, (Node(0, n),), tuple(edges)))


def det_factors_node(n: int, matrix: str = "A") -> DiagramGraph:
    """Node whose every leg passes through the matrix to a free end."""
    edges = [Edge(FreeOutput(k + 1), NodePort(0, k), (Marking(matrix, True),)) for k in range(n)]
    return _checked(DiagramGraph(n, (Node(0, n),), tuple(edges)))


def free_node(n: int) -> DiagramGraph:
    edges = [Edge(FreeOutput(k + 1), NodePort(0, k)) for k in range(n)]
    return _checked(DiagramGraph(n, (Node(0, n),), tuple(edges)))


def double_ciliation_strand(same_side: bool) -> DiagramGraph:
    """Vertical strand through two 2-valent nodes.

    With both cilia on the same side each node meets the lower strand
    first; otherwise the upper node meets the upper strand first.
    """
    upper_in, upper_out = (0, 1) if same_side else (1, 0)
    edges = (
        Edge(FreeOutput(1), NodePort(0, 0)),
        Edge(NodePort(0, 1), NodePort(1, upper_in)),
        Edge(NodePort(1, upper_out), FreeOutput(2)),
    )
    return _checked(DiagramGraph(2, (Node(0, 2), Node(1, 2)), edges))


def tr_product(words: Sequence[Sequence[str]], dim: int = 2) -> DiagramGraph:
    """Disjoint union of trace circles, one per word."""
    return union_all([trace_word_circle(w, dim=dim) for w in words], dim=dim)


# -- derived bindings ------------------------------------------------------

@dataclass(frozen=True)
class MatrixProduct:
    """Derived binding: the product of bound matrices in the given order."""

    names: tuple[str, ...]

    def __call__(self, mats):
        return oracles.word_product([mats[x] for x in self.names], len(mats[self.names[0]]))


@dataclass(frozen=True)
class MatrixSum:
    names: tuple[str, ...]

    def __call__(self, mats):
        out = mats[self.names[0]]
        for x in self.names[1:]:
            out = oracles.mat_add(out, mats[x])
        return out


def _product(*names):
    return MatrixProduct(tuple(names))


def _sum(*names):
    return MatrixSum(tuple(names))


# -- identity suite --------------------------------------------------------

@dataclass
class IdentityCase:
    name: str
    dim: int
    lhs: DiagramExpression
    rhs: DiagramExpression
    strategy: str = "randomized"  # or "basis"
    vector_slots: tuple[str, ...] = ()
    matrix_symbols: tuple[str, ...] = ()
    derive: Mapping[str, Callable] = field(default_factory=dict)
    trials: int = 25
    note: str = ""


def _expr(*pairs, dim: int, arity: int = 0) -> DiagramExpression:
    return DiagramExpression(tuple(pairs), dim=dim, arity_hint=arity)


def _zero(dim: int, arity: int = 0) -> DiagramExpression:
    return DiagramExpression.zero(dim, arity)


def _quad_cross() -> IdentityCase:
    n = 3
    lhs = DiagramGraph(n, (Node(0, n), Node(1, n)), (
        Edge(VectorInput("u", 1), NodePort(0, 0)),
        Edge(VectorInput("v", 2), NodePort(0, 1)),
        Edge(NodePort(0, 2), NodePort(1, 2)),
        Edge(VectorInput("w", 3), NodePort(1, 0)),
        Edge(VectorInput("x", 4), NodePort(1, 1)),
    ))
    uw_vx = disjoint_union(dot_diagram("u", "w", n), dot_diagram("v", "x", n))
    ux_vw = disjoint_union(dot_diagram("u", "x", n), dot_diagram("v", "w", n))
    return IdentityCase("quad-cross", n, DiagramExpression.of(lhs),
                        _expr((1, uw_vx), (-1, ux_vw), dim=n),
                        strategy="basis", vector_slots=("u", "v", "w", "x"),
                        note="(u x v).(w x x) = (u.w)(v.x) - (u.x)(v.w)")


def _bac_cab() -> IdentityCase:
    n = 3
    lhs = DiagramGraph(n, (Node(0, n), Node(1, n)), (
        Edge(VectorInput("u", 1), NodePort(0, 0)),
        Edge(VectorInput("v", 2), NodePort(0, 1)),
        Edge(NodePort(0, 2), NodePort(1, 0)),
        Edge(VectorInput("w", 3), NodePort(1, 1)),
        Edge(NodePort(1, 2), FreeOutput(1)),
    ))
    v_out = DiagramGraph(n, (), (Edge(VectorInput("v", 1), FreeOutput(1)),))
    u_out = DiagramGraph(n, (), (Edge(VectorInput("u", 1), FreeOutput(1)),))
    rhs = _expr((1, disjoint_union(dot_diagram("u", "w", n), v_out)),
                (-1, disjoint_union(dot_diagram("v", "w", n), u_out)), dim=n, arity=1)
    return IdentityCase("bac-cab", n, DiagramExpression.of(lhs), rhs, strategy="basis",
                        vector_slots=("u", "v", "w"), note="(u x v) x w = (u.w)v - (v.w)u")


TRIPLE_PRODUCT_FORMS = (("u", "v", "w"), ("v", "w", "u"), ("w", "u", "v"), ("u", "v", "w"))


def _triple_chain() -> list[IdentityCase]:
    forms = [vector_det_node(3, names) for names in TRIPLE_PRODUCT_FORMS]
    cases = []
    for i, j in itertools.combinations(range(len(forms)), 2):
        cases.append(IdentityCase(
            f"triple-product-chain-{i + 1}{j + 1}", 3,
            DiagramExpression.of(forms[i]), DiagramExpression.of(forms[j]),
            strategy="basis", vector_slots=("u", "v", "w"),
            note=f"form {i + 1} = form {j + 1} of the triple product chain"))
    return cases


def _marking_fusion(n: int = 3) -> IdentityCase:
    lhs = strand(n, (Marking("B", True), Marking("A", True)))
    rhs = strand(n, (Marking("AB", True),))
    return IdentityCase("marking-fusion", n, DiagramExpression.of(lhs), DiagramExpression.of(rhs),
                        matrix_symbols=("A", "B"), derive={"AB": _product("A", "B")},
                        note="B then A along a strand equals AB")


def _char_sign(n: int) -> int:
    return (-1) ** (n // 2)


def _gadget_terms(t: WiringTerm) -> list[DiagramGraph]:
    """Crossing diagram followed by its parallel and gadget resolutions."""
    alternatives = binor_alternatives(t)
    return [compile_wiring(t)] + [compile_wiring(a) for a in alternatives]


def _trprod(*words):
    return tr_product(words, dim=2)


# right-hand side of the four-matrix relation as it is usually displayed,
# without the tr(AC)tr(BD) term
TR4_PRINTED_RHS = (
    (1, _trprod("A", "BCD")), (1, _trprod("B", "ACD")), (1, _trprod("C", "ABD")), (1, _trprod("D", "ABC")),
    (1, _trprod("AB", "CD")), (1, _trprod("AD", "BC")), (1, _trprod("A", "B", "C", "D")),
    (-1, _trprod("A", "B", "CD")), (-1, _trprod("B", "C", "AD")),
    (-1, _trprod("C", "D", "AB")), (-1, _trprod("A", "D", "BC")),
)


def erratum_cases() -> list[IdentityCase]:
    """Relations as displayed that do not hold; kept so the failure is visible."""
    return [IdentityCase(
        "tr4-as-printed", 2, _expr((2, trace_word_circle("ABCD", dim=2)), dim=2),
        _expr(*TR4_PRINTED_RHS, dim=2), matrix_symbols=("A", "B", "C", "D"), trials=100,
        note="displayed form lacks -tr(AC)tr(BD); expected to fail")]


CH2A = WiringTerm(1, (Cup(1, None), Swap(0), Mat("A", 0, True), Mat("A", 1, True), Cap(1, None)))
CH2B = WiringTerm(1, (Cup(1, None), Swap(0), Mat("B", 0, True), Mat("A", 1, True), Cap(1, None)))

# the closed C,D,A,B,B diagram: two cups, one crossing, two caps; every
# marking points up the page, the same reading as the marked circles
CDABB_TERM = WiringTerm(0, (
    Cup(0, "first"), Cup(2, "first"),
    Mat("C", 0, True), Mat("B", 3, True),
    Swap(1),
    Mat("D", 0, True), Mat("A", 1, True), Mat("B", 2, True),
    Cap(0, "first"), Cap(0, "first"),
))


def _trace_relations() -> list[IdentityCase]:
    n = 2
    circ = lambda *w: trace_word_circle(w, dim=n)
    prod = lambda *ws: tr_product(ws, dim=n)
    dets = lambda m: det_node(n, m)
    cases = []

    cases.append(IdentityCase(
        "ch2tr", n,
        _expr((1, circ("A", "A")), (-1, prod(["A"], ["A"])), (2, dets("A")), dim=n), _zero(n),
        matrix_symbols=("A",), trials=100, note="tr(A^2) - tr(A)^2 + 2 det(A) = 0"))

    ch = _expr((1, word_strand(["A", "A"], n)),
               (-1, disjoint_union(word_strand(["A"], n), circ("A"))),
               (1, disjoint_union(word_strand([], n), dets("A"))), dim=n, arity=2)
    cases.append(IdentityCase("cayley-hamilton", n, ch, _zero(n, 2), matrix_symbols=("A",), trials=100,
                              note="A^2 - tr(A) A + det(A) I = 0 as a 2-tensor"))

    crossing, parallel, gadget = _gadget_terms(CH2A)
    cases.append(IdentityCase(
        "cayley-hamilton-diagram", n,
        _expr((1, crossing), (-1, parallel), (-1, gadget), dim=n, arity=2), _zero(n, 2),
        matrix_symbols=("A",), trials=100,
        note="crossing - parallel - gadget with both strands marked by A"))
    cases.append(IdentityCase(
        "cayley-hamilton-gadget", n, DiagramExpression.of(gadget),
        _expr((-1, disjoint_union(word_strand([], n), dets("A"))), dim=n, arity=2),
        matrix_symbols=("A",), trials=100, note="the gadget term equals -det(A) I"))

    cases.append(IdentityCase(
        "det-sum", n, DiagramExpression.of(det_node(n, "A+B")),
        _expr((1, dets("A")), (1, dets("B")), (1, prod(["A"], ["B"])), (-1, circ("A", "B")), dim=n),
        matrix_symbols=("A", "B"), derive={"A+B": _sum("A", "B")}, trials=100,
        note="det(A+B) = det A + det B + tr A tr B - tr(AB)"))

    lv = _expr((1, word_strand(["B", "A", "A"], n)),
               (-1, disjoint_union(word_strand(["B", "A"], n), circ("A"))),
               (1, disjoint_union(word_strand(["B"], n), dets("A"))), dim=n, arity=2)
    cases.append(IdentityCase("label-variant", n, lv, _zero(n, 2), matrix_symbols=("A", "B"), trials=100,
                              note="B A^2 - tr(A) B A + det(A) B = 0"))
    crossing, parallel, gadget = _gadget_terms(CH2B)
    cases.append(IdentityCase(
        "label-variant-diagram", n,
        _expr((1, crossing), (-1, parallel), (-1, gadget), dim=n, arity=2), _zero(n, 2),
        matrix_symbols=("A", "B"), trials=100,
        note="crossing - parallel - gadget with labels A and B"))

    cases.append(IdentityCase("tr-cyclic", n, DiagramExpression.of(circ("A", "B")),
                              DiagramExpression.of(circ("B", "A")), matrix_symbols=("A", "B"), trials=100,
                              note="tr(AB) = tr(BA)"))

    cases.append(IdentityCase(
        "tautology", n, DiagramExpression.of(prod(["A"], ["B"])),
        _expr((2, circ("A", "B")), (-1, circ("B", "A")), (-1, circ("A", "B")), (1, prod(["A"], ["B"])), dim=n),
        matrix_symbols=("A", "B"), trials=100,
        note="tr(A)tr(B) = 2tr(AB) - tr(BA) - tr(AB) + tr(A)tr(B)"))

    cases.append(IdentityCase(
        "tr3", n, _expr((1, circ("A", "B", "C")), (1, circ("A", "C", "B")), dim=n),
        _expr((1, prod("AB", "C")), (1, prod("A", "BC")), (1, prod("B", "CA")), (-1, prod("A", "B", "C")), dim=n),
        matrix_symbols=("A", "B", "C"), trials=100, note="three-matrix trace relation"))

    cases.append(IdentityCase(
        "tr4", n, _expr((2, circ("A", "B", "C", "D")), dim=n),
        _expr(*TR4_PRINTED_RHS, (-1, prod("AC", "BD")), dim=n),
        matrix_symbols=("A", "B", "C", "D"), trials=100,
        note="four-matrix trace relation, including the -tr(AC)tr(BD) term"))

    for name, word in (("tautology", "AB"), ("tr3", "ABC"), ("tr4", "ABCD")):
        t = ladder(list(word))
        cases.append(IdentityCase(
            f"{name}-expansion", n, DiagramExpression.of(compile_wiring(t)), binor_expand(t),
            matrix_symbols=tuple(word), trials=100,
            note=f"{len(word)}-crossing ladder equals its {2 ** len(word)}-term binor expansion"))
    return cases


def _binor_family() -> list[IdentityCase]:
    n = 2
    crossing = compile_wiring(WiringTerm(2, (Swap(0),)))
    parallel = compile_wiring(WiringTerm(2, ()))
    from .wiring import binor_convention
    capside, cupside = binor_convention()
    gadget = compile_wiring(WiringTerm(2, (Cap(0, capside), Cup(0, cupside))))
    plain = strand(n)
    return [
        IdentityCase("binor", n, DiagramExpression.of(crossing), _expr((1, parallel), (1, gadget), dim=n, arity=4),
                     note=f"crossing = parallel + gadget (cap {capside}, cup {cupside})"),
        IdentityCase("double-ciliation-same", n, DiagramExpression.of(double_ciliation_strand(True)),
                     _expr((-1, plain), dim=n, arity=2), note="two cilia on one side give -strand"),
        IdentityCase("double-ciliation-opposite", n, DiagramExpression.of(double_ciliation_strand(False)),
                     _expr((1, plain), dim=n, arity=2), note="opposite cilia give +strand"),
        IdentityCase("detnode", n, DiagramExpression.of(det_factors_node(2)),
                     DiagramExpression.of(disjoint_union(det_node(2), free_node(2))),
                     matrix_symbols=("A",), note="cap with both legs marked A = det(A) cap"),
    ]


def identity_suite() -> list[IdentityCase]:
    cases = [_quad_cross(), _bac_cab()]
    cases += _triple_chain()
    cases.append(_marking_fusion())
    for n in (2, 3, 4):
        cases.append(IdentityCase(f"det-node-vs-sum-{n}", n, DiagramExpression.of(det_node(n)),
                                  det_permutation_sum(n), matrix_symbols=("A",),
                                  note="node form and permutation form of det agree"))
    cases.append(IdentityCase("det-factors-node", 3, DiagramExpression.of(det_factors_node(3)),
                              DiagramExpression.of(disjoint_union(det_node(3), free_node(3))),
                              matrix_symbols=("A",), note="all legs marked A = det(A) times the node"))
    for n in (2, 3, 4):
        cases.append(IdentityCase(
            f"closed-full-det-{n}", n, DiagramExpression.of(char_coeff_diagram(n, n)),
            _expr((_char_sign(n) * math.factorial(n), det_node(n)), dim=n),
            matrix_symbols=("A",), note="closed two-node diagram = (-1)^floor(n/2) n! det(A)"))
    cases += _binor_family()
    cases += _trace_relations()
    return cases


def find_cases(name: str) -> list[IdentityCase]:
    """Cases called ``name`` or, failing that, the group ``name-*``."""
    cases = identity_suite() + erratum_cases()
    exact = [c for c in cases if c.name == name]
    if exact:
        return exact
    return [c for c in cases if c.name.startswith(name + "-")]


# -- named builtin diagrams -------------------------------------------------

BUILTIN_NAMES = ("circle", "trace-A", "dot", "cross", "vector-det", "det-node", "det-sum",
                 "closed-full-det", "char-coeff-K", "pfaffian", "entry-I-J", "det-factors-node")


def builtin(name: str, dim: int) -> Union[DiagramGraph, DiagramExpression]:
    """Resolve a catalog name at a given dimension."""
    simple = {
        "circle": lambda: circle(dim),
        "trace-A": lambda: trace_word_circle(["A"], dim=dim),
        "dot": lambda: dot_diagram("u", "v", dim),
        "cross": lambda: cross_diagram(dim),
        "vector-det": lambda: vector_det_node(dim),
        "det-node": lambda: det_node(dim),
        "det-sum": lambda: det_permutation_sum(dim),
        "closed-full-det": lambda: char_coeff_diagram(dim, dim),
        "pfaffian": lambda: pfaffian_candidate(dim),
        "det-factors-node": lambda: det_factors_node(dim),
    }
    if name in simple:
        return simple[name]()
    m = re.fullmatch(r"char-coeff-(\d+)", name)
    if m:
        return char_coeff_diagram(dim, int(m.group(1)))
    m = re.fullmatch(r"entry-(\d+)-(\d+)", name)
    if m:
        return matrix_entry_strand("A", int(m.group(1)), int(m.group(2)), dim)
    raise DiagramError(f"unknown builtin diagram {name!r}")


def catalog_graphs(n: int) -> dict[str, DiagramGraph]:
    """Every single-graph catalog shape that exists in dimension ``n``."""
    out = {
        "circle": circle(n),
        "trace-A": trace_word_circle(["A"], dim=n),
        "trace-AB": trace_word_circle(["A", "B"], dim=n),
        "trace-ABC": trace_word_circle(["A", "B", "C"], dim=n),
        "dot": dot_diagram("u", "v", n),
        "vector-det": vector_det_node(n),
        "det-node": det_node(n),
        "det-factors-node": det_factors_node(n),
        "entry-1-2": matrix_entry_strand("A", 1, min(2, n), n),
        "strand-AB": word_strand(["A", "B"], n),
    }
    if n >= 2:
        out["cross"] = cross_diagram(n)
    for k in range(n + 1):
        out[f"char-coeff-{k}"] = char_coeff_diagram(n, k)
    if n % 2 == 0:
        out["pfaffian"] = pfaffian_candidate(n)
        out["pfaffian-adjacent"] = pfaffian_candidate(n, pairing="adjacent")
    if n == 2:
        out["double-ciliation-same"] = double_ciliation_strand(True)
        out["double-ciliation-opposite"] = double_ciliation_strand(False)
        out["cayley-hamilton-crossing"] = compile_wiring(CH2A)
        out["ladder-ABC"] = compile_wiring(ladder(["A", "B", "C"]))
    return out
