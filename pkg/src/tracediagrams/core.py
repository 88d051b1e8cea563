"""Combinatorial trace diagrams.

A diagram over an ``n``-dimensional space is a graph whose internal nodes
have degree exactly ``n``.  Each node's ports are listed counter-clockwise
starting at the cilium, so slot 0 is the first edge after the cilium.
Edges are undirected strands; matrix markings sit along an edge in order
from ``end1`` to ``end2`` and carry their own direction.  An edge whose two
ends are both ``None`` is a closed loop with no attachments.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

__all__ = [
    "DiagramError",
    "BindingError",
    "NodePort",
    "VectorInput",
    "BasisLabel",
    "FreeOutput",
    "Marking",
    "Edge",
    "Node",
    "DiagramGraph",
    "DiagramExpression",
    "Environment",
    "Fault",
    "ValidationReport",
    "validate",
    "disjoint_union",
    "shuffle_ids",
    "rotate_ciliation",
    "canonicalize",
    "structural_key",
    "to_scalar",
]


class DiagramError(ValueError):
    """Raised for malformed diagrams, expressions or incompatible operands."""


class BindingError(DiagramError):
    """A matrix or vector symbol is unbound or has the wrong shape."""


@dataclass(frozen=True, order=True)
class NodePort:
    node: int
    slot: int


@dataclass(frozen=True, order=True)
class VectorInput:
    name: str
    order: int


@dataclass(frozen=True, order=True)
class BasisLabel:
    k: int


@dataclass(frozen=True, order=True)
class FreeOutput:
    slot: int


Terminal = Union[VectorInput, BasisLabel, FreeOutput]
Attachment = Union[NodePort, VectorInput, BasisLabel, FreeOutput]


@dataclass(frozen=True, order=True)
class Marking:
    """A matrix on a strand.

    ``forward`` means the matrix input faces the edge's ``end1`` side, i.e.
    the matrix maps the label on the end1 side to the label on the end2 side.
    """

    matrix: str
    forward: bool = True

    def flipped(self) -> "Marking":
        return Marking(self.matrix, not self.forward)


@dataclass(frozen=True)
class Edge:
    end1: Optional[Attachment]
    end2: Optional[Attachment]
    markings: tuple[Marking, ...] = ()

    @property
    def is_loop(self) -> bool:
        return self.end1 is None and self.end2 is None

    def flipped(self) -> "Edge":
        return Edge(self.end2, self.end1,
                    tuple(m.flipped() for m in reversed(self.markings)))


@dataclass(frozen=True)
class Node:
    id: int
    degree: int


@dataclass(frozen=True)
class DiagramGraph:
    dim: int
    nodes: tuple[Node, ...] = ()
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    def ends(self):
        for e in self.edges:
            for end in (e.end1, e.end2):
                if end is not None:
                    yield end

    @property
    def arity(self) -> int:
        return sum(1 for a in self.ends() if isinstance(a, FreeOutput))

    @property
    def input_count(self) -> int:
        return sum(1 for a in self.ends() if isinstance(a, VectorInput))

    def matrix_names(self) -> set[str]:
        return {m.matrix for e in self.edges for m in e.markings}

    def vector_names(self) -> set[str]:
        return {a.name for a in self.ends() if isinstance(a, VectorInput)}

    def node(self, node_id: int) -> Node:
        for nd in self.nodes:
            if nd.id == node_id:
                return nd
        raise DiagramError(f"unknown node id {node_id}")

    def degree_in(self, matrix: str) -> int:
        return sum(1 for e in self.edges for m in e.markings if m.matrix == matrix)


@dataclass(frozen=True)
class Fault:
    kind: str
    where: str


@dataclass(frozen=True)
class ValidationReport:
    faults: tuple[Fault, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.faults

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{f.kind} at {f.where}" for f in self.faults)


def validate(g: DiagramGraph) -> ValidationReport:
    """Check every structural invariant; never raises."""
    faults: list[Fault] = []
    add = lambda kind, where: faults.append(Fault(kind, where))

    dim = getattr(g, "dim", None)
    if not isinstance(dim, int) or dim < 1:
        add("bad dimension", f"dim={dim!r}")
        dim = None

    degrees: dict[int, int] = {}
    for i, nd in enumerate(getattr(g, "nodes", ()) or ()):
        if not isinstance(nd, Node):
            add("bad node", f"nodes[{i}]")
            continue
        if nd.id in degrees:
            add("duplicate node id", f"node {nd.id}")
        degrees[nd.id] = nd.degree
        if dim is not None and nd.degree != dim:
            add("degree mismatch", f"node {nd.id} (degree {nd.degree}, n={dim})")

    used_ports: dict[tuple[int, int], int] = {}
    outputs: list[int] = []
    inputs: list[int] = []
    for ei, e in enumerate(getattr(g, "edges", ()) or ()):
        if not isinstance(e, Edge):
            add("bad edge", f"edges[{ei}]")
            continue
        if (e.end1 is None) != (e.end2 is None):
            add("half-open edge", f"edge {ei}")
        for m in e.markings:
            if not isinstance(m, Marking) or not m.matrix:
                add("bad marking", f"edge {ei}")
        for end in (e.end1, e.end2):
            if end is None:
                continue
            if isinstance(end, NodePort):
                if end.node not in degrees:
                    add("unknown node", f"edge {ei} -> node {end.node}")
                elif not 0 <= end.slot < degrees[end.node]:
                    add("slot out of range", f"edge {ei} -> node {end.node} slot {end.slot}")
                key = (end.node, end.slot)
                if key in used_ports:
                    add("port reused", f"node {end.node} slot {end.slot} (edges {used_ports[key]}, {ei})")
                used_ports[key] = ei
            elif isinstance(end, BasisLabel):
                if dim is not None and not 1 <= end.k <= dim:
                    add("basis label out of range", f"edge {ei} label {end.k}")
            elif isinstance(end, FreeOutput):
                outputs.append(end.slot)
            elif isinstance(end, VectorInput):
                if not end.name:
                    add("bad vector name", f"edge {ei}")
                inputs.append(end.order)
            else:
                add("bad attachment", f"edge {ei}: {end!r}")

    for node_id, degree in degrees.items():
        for slot in range(max(degree, 0)):
            if (node_id, slot) not in used_ports:
                add("dangling port", f"node {node_id} slot {slot}")

    if sorted(outputs) != list(range(1, len(outputs) + 1)):
        add("output slots not contiguous", f"slots {sorted(outputs)}")
    if sorted(inputs) != list(range(1, len(inputs) + 1)):
        add("input slots not contiguous", f"orders {sorted(inputs)}")
    return ValidationReport(tuple(faults))


def _require_valid(g: DiagramGraph) -> None:
    report = validate(g)
    if not report.ok:
        raise DiagramError(f"invalid diagram: {report}")


def _remap_end(end, node_map=None, out_offset=0, in_offset=0):
    if isinstance(end, NodePort) and node_map is not None:
        return NodePort(node_map[end.node], end.slot)
    if isinstance(end, FreeOutput):
        return FreeOutput(end.slot + out_offset)
    if isinstance(end, VectorInput):
        return VectorInput(end.name, end.order + in_offset)
    return end


def disjoint_union(g1: DiagramGraph, g2: DiagramGraph) -> DiagramGraph:
    """Place ``g2`` beside ``g1``; ``g2``'s outputs and inputs follow ``g1``'s."""
    if g1.dim != g2.dim:
        raise DiagramError(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    offset = max((nd.id for nd in g1.nodes), default=-1) + 1
    node_map = {nd.id: nd.id + offset for nd in g2.nodes}
    d1, i1 = g1.arity, g1.input_count
    edges = tuple(
        Edge(_remap_end(e.end1, node_map, d1, i1), _remap_end(e.end2, node_map, d1, i1), e.markings)
        for e in g2.edges
    )
    nodes = tuple(Node(node_map[nd.id], nd.degree) for nd in g2.nodes)
    return DiagramGraph(g1.dim, g1.nodes + nodes, g1.edges + edges)


def shuffle_ids(g: DiagramGraph, seed: int) -> DiagramGraph:
    """Relabel nodes, reorder edges and randomly swap edge ends.

    Slot orders at nodes and terminal slot orders are untouched, so the
    result evaluates exactly like ``g``.
    """
    rng = random.Random(seed)
    ids = [nd.id for nd in g.nodes]
    new_ids = list(range(len(ids)))
    rng.shuffle(new_ids)
    node_map = dict(zip(ids, new_ids))
    nodes = [Node(node_map[nd.id], nd.degree) for nd in g.nodes]
    rng.shuffle(nodes)
    edges = []
    for e in g.edges:
        e = Edge(_remap_end(e.end1, node_map), _remap_end(e.end2, node_map), e.markings)
        if rng.random() < 0.5:
            e = e.flipped()
        edges.append(e)
    rng.shuffle(edges)
    return DiagramGraph(g.dim, tuple(nodes), tuple(edges))


def rotate_ciliation(g: DiagramGraph, node_id: int, steps: int) -> DiagramGraph:
    """Move a node's cilium forward by ``steps`` ports.

    The value changes by the sign of an ``n``-cycle raised to ``steps``,
    i.e. ``(-1) ** ((n - 1) * steps)``.
    """
    degree = g.node(node_id).degree

    def move(end):
        if isinstance(end, NodePort) and end.node == node_id:
            return NodePort(node_id, (end.slot - steps) % degree)
        return end

    edges = tuple(Edge(move(e.end1), move(e.end2), e.markings) for e in g.edges)
    return DiagramGraph(g.dim, g.nodes, edges)


# -- canonical renumbering ---------------------------------------------------

def _end_rank(end, node_index):
    if isinstance(end, FreeOutput):
        return (0, end.slot)
    if isinstance(end, VectorInput):
        return (1, end.order, end.name)
    if isinstance(end, BasisLabel):
        return (2, end.k)
    return (3, node_index.get(end.node, 0), end.slot)


def _marking_key(ms):
    return tuple((m.matrix, not m.forward) for m in ms)


def _canonical_loop(markings: tuple[Marking, ...]) -> tuple[Marking, ...]:
    if not markings:
        return markings
    candidates = []
    for seq in (markings, tuple(m.flipped() for m in reversed(markings))):
        for r in range(len(seq)):
            candidates.append(seq[r:] + seq[:r])
    return min(candidates, key=_marking_key)


def canonicalize(g: DiagramGraph) -> DiagramGraph:
    """Renumber nodes and edges by a deterministic traversal.

    Traversal starts from output slots in order, then input slots, then
    closed components in node declaration order; loops and edges between
    two basis labels come last, sorted.  Every edge is oriented away from
    the side it was reached from.
    """
    node_index = {nd.id: i for i, nd in enumerate(g.nodes)}
    degree = {nd.id: nd.degree for nd in g.nodes}
    ports: dict[tuple[int, int], tuple[int, int]] = {}
    for ei, e in enumerate(g.edges):
        for side, end in ((1, e.end1), (2, e.end2)):
            if isinstance(end, NodePort):
                ports[(end.node, end.slot)] = (ei, side)

    visited_edges: list[bool] = [False] * len(g.edges)
    new_node: dict[int, int] = {}
    out_edges: list[Edge] = []
    queue: deque[int] = deque()

    def discover(node_id):
        if node_id not in new_node:
            new_node[node_id] = len(new_node)
            queue.append(node_id)

    def visit(ei, side):
        if visited_edges[ei]:
            return
        visited_edges[ei] = True
        e = g.edges[ei]
        if side == 2:
            e = e.flipped()
        for end in (e.end1, e.end2):
            if isinstance(end, NodePort):
                discover(end.node)
        out_edges.append(e)

    def drain():
        while queue:
            node_id = queue.popleft()
            for slot in range(degree[node_id]):
                hit = ports.get((node_id, slot))
                if hit is not None:
                    visit(*hit)

    starts = []
    for ei, e in enumerate(g.edges):
        for side, end in ((1, e.end1), (2, e.end2)):
            if isinstance(end, (FreeOutput, VectorInput)):
                starts.append((_end_rank(end, node_index), ei, side))
    for _, ei, side in sorted(starts):
        visit(ei, side)
        drain()

    # closed components start at their first node in declaration order
    for nd in g.nodes:
        if nd.id not in new_node and any((nd.id, s) in ports for s in range(nd.degree)):
            discover(nd.id)
            drain()

    rest = []
    for ei, e in enumerate(g.edges):
        if visited_edges[ei]:
            continue
        if e.is_loop:
            rest.append(((0, _marking_key(_canonical_loop(e.markings))), ei, 0))
            continue
        r1, r2 = _end_rank(e.end1, node_index), _end_rank(e.end2, node_index)
        if r1 == r2:
            side = 1 if _marking_key(e.markings) <= _marking_key(e.flipped().markings) else 2
        else:
            side = 1 if r1 < r2 else 2
        oriented = e if side == 1 else e.flipped()
        key = (_end_rank(oriented.end1, node_index), _end_rank(oriented.end2, node_index),
               _marking_key(oriented.markings))
        rest.append(((1, key), ei, side))
    for _, ei, side in sorted(rest, key=lambda r: r[0]):
        if side == 0:
            visited_edges[ei] = True
            out_edges.append(Edge(None, None, _canonical_loop(g.edges[ei].markings)))
        else:
            visit(ei, side)

    # nodes with no edges (only possible for invalid graphs) keep their order
    for nd in g.nodes:
        discover(nd.id)
    queue.clear()

    nodes = sorted((Node(new_node[nd.id], nd.degree) for nd in g.nodes), key=lambda nd: nd.id)
    edges = tuple(
        Edge(_remap_end(e.end1, new_node), _remap_end(e.end2, new_node), e.markings)
        for e in out_edges
    )
    return DiagramGraph(g.dim, tuple(nodes), edges)


def structural_key(g: DiagramGraph):
    """Hashable key; equal keys mean structurally identical diagrams."""
    c = canonicalize(g)
    return (c.dim, c.nodes, c.edges)


# -- scalars, expressions, environments ------------------------------------

def to_scalar(value) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not value.is_integer():
            raise TypeError(f"inexact scalar {value!r}; use a string 'p/q'")
        return Fraction(int(value))
    try:
        return Fraction(int(value))  # numpy integers
    except (TypeError, ValueError):
        raise TypeError(f"not a scalar: {value!r}") from None


@dataclass(frozen=True)
class DiagramExpression:
    """A formal linear combination of diagrams."""

    terms: tuple[tuple[Fraction, DiagramGraph], ...] = ()
    dim: Optional[int] = None
    arity_hint: Optional[int] = None

    def __post_init__(self):
        terms = tuple((to_scalar(c), g) for c, g in self.terms)
        object.__setattr__(self, "terms", terms)
        if self.dim is None and terms:
            object.__setattr__(self, "dim", terms[0][1].dim)

    @classmethod
    def of(cls, g: DiagramGraph, coefficient=1) -> "DiagramExpression":
        return cls(((coefficient, g),))

    @classmethod
    def zero(cls, dim: int, arity: int = 0) -> "DiagramExpression":
        return cls((), dim=dim, arity_hint=arity)

    @property
    def arity(self) -> int:
        arities = {g.arity for _, g in self.terms}
        if len(arities) > 1:
            raise DiagramError(f"mixed arity expression: {sorted(arities)}")
        if arities:
            return arities.pop()
        return self.arity_hint or 0

    def check(self) -> None:
        dims = {g.dim for _, g in self.terms}
        if len(dims) > 1 or (dims and self.dim not in dims):
            raise DiagramError(f"mixed dimensions in expression: {sorted(dims)}")
        self.arity  # noqa: B018  raises on mixed arity
        for _, g in self.terms:
            _require_valid(g)

    def _coerce(self, other) -> "DiagramExpression":
        if isinstance(other, DiagramGraph):
            return DiagramExpression.of(other)
        if isinstance(other, DiagramExpression):
            return other
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return DiagramExpression(self.terms + other.terms, dim=self.dim or other.dim,
                                 arity_hint=self.arity_hint if self.arity_hint is not None else other.arity_hint)

    __radd__ = __add__

    def __neg__(self):
        return DiagramExpression(tuple((-c, g) for c, g in self.terms), self.dim, self.arity_hint)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        s = to_scalar(scalar)
        return DiagramExpression(tuple((s * c, g) for c, g in self.terms), self.dim, self.arity_hint)

    __rmul__ = __mul__

    def __len__(self):
        return len(self.terms)

    def collect(self) -> "DiagramExpression":
        """Merge structurally identical terms and drop zero coefficients."""
        merged: dict = {}
        order = []
        for c, g in self.terms:
            key = structural_key(g)
            if key not in merged:
                merged[key] = [Fraction(0), canonicalize(g)]
                order.append(key)
            merged[key][0] += c
        terms = tuple((merged[k][0], merged[k][1]) for k in order if merged[k][0] != 0)
        return DiagramExpression(terms, dim=self.dim, arity_hint=self.arity if self.terms else self.arity_hint)


FIELDS = ("rat", "f64")


def _convert(value, field_name):
    if field_name == "f64":
        return float(to_scalar(value)) if not isinstance(value, float) else value
    return to_scalar(value)


@dataclass(frozen=True)
class Environment:
    """Dimension, scalar field and named matrix/vector bindings."""

    dim: int
    matrices: Mapping[str, tuple] = field(default_factory=dict)
    vectors: Mapping[str, tuple] = field(default_factory=dict)
    field: str = "rat"

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 1:
            raise DiagramError(f"dimension must be a positive integer, got {self.dim!r}")
        if self.field not in FIELDS:
            raise DiagramError(f"unknown field {self.field!r}; expected one of {FIELDS}")
        n = self.dim
        mats = {}
        for name, rows in dict(self.matrices).items():
            rows = [list(r) for r in rows]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise BindingError(f"matrix {name!r} is not {n}x{n}")
            mats[name] = tuple(tuple(_convert(x, self.field) for x in r) for r in rows)
        vecs = {}
        for name, entries in dict(self.vectors).items():
            entries = list(entries)
            if len(entries) != n:
                raise BindingError(f"vector {name!r} does not have {n} entries")
            vecs[name] = tuple(_convert(x, self.field) for x in entries)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "vectors", vecs)

    def bind(self, matrices: Optional[Mapping] = None, vectors: Optional[Mapping] = None) -> "Environment":
        return Environment(self.dim, {**self.matrices, **(matrices or {})},
                           {**self.vectors, **(vectors or {})}, self.field)

    def with_field(self, field_name: str) -> "Environment":
        return Environment(self.dim, self.matrices, self.vectors, field_name)

    def check(self, g: DiagramGraph) -> None:
        if g.dim != self.dim:
            raise DiagramError(f"dimension mismatch: diagram n={g.dim}, environment n={self.dim}")
        for name in sorted(g.matrix_names()):
            if name not in self.matrices:
                raise BindingError(f"unbound matrix symbol {name!r}")
        for name in sorted(g.vector_names()):
            if name not in self.vectors:
                raise BindingError(f"unbound vector symbol {name!r}")


def basis_vector(n: int, i: int) -> tuple[int, ...]:
    """The standard basis vector with a 1 in position ``i`` (1-based)."""
    return tuple(1 if k == i else 0 for k in range(1, n + 1))


def identity_matrix(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(basis_vector(n, i) for i in range(1, n + 1))


def strand(dim: int, markings: Sequence[Marking] = (), end1: Optional[Attachment] = None,
           end2: Optional[Attachment] = None) -> DiagramGraph:
    """A single node-free edge; defaults to an open strand with outputs 1 and 2."""
    end1 = FreeOutput(1) if end1 is None else end1
    end2 = FreeOutput(2) if end2 is None else end2
    return DiagramGraph(dim, (), (Edge(end1, end2, tuple(markings)),))


def union_all(graphs: Iterable[DiagramGraph], dim: Optional[int] = None) -> DiagramGraph:
    graphs = list(graphs)
    if not graphs:
        if dim is None:
            raise DiagramError("empty union needs an explicit dimension")
        return DiagramGraph(dim)
    out = graphs[0]
    for g in graphs[1:]:
        out = disjoint_union(out, g)
    return out


def replace_dim(g: DiagramGraph, dim: int) -> DiagramGraph:
    return replace(g, dim=dim)
