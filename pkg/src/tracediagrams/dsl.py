"""The ``.td`` text format: parser, serializer, dot and JSON renderers.

A document declares one dimension, matrix and vector bindings, named
diagrams and named linear combinations of diagrams::

    dim 3
    matrix A = [[1, 2, 0], [0, 1, 0], [1, 0, 1]]
    diagram det {
      node v (a, b, c)          # ports counter-clockwise from the cilium
      basis 1 -> a
      basis 2 -> b
      basis 3 -> c
      mark A on a dir fwd       # fwd: matrix input on the first-mentioned end
      mark A on b dir fwd
      mark A on c dir fwd
    }
    expr twice = 2 * det

Edges are named and declared by use.  The first attachment that mentions
an edge becomes its ``end1``.  ``loop NAME`` declares a closed strand with
no attachments, which cannot otherwise be written.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (
    BasisLabel,
    DiagramError,
    DiagramExpression,
    DiagramGraph,
    Edge,
    Environment,
    FreeOutput,
    Marking,
    Node,
    NodePort,
    VectorInput,
    canonicalize,
    validate,
)


class DslError(DiagramError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.message, self.line, self.column = message, line, column
        super().__init__(f"{line}:{column}: {message}" if line else message)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<arrow>->) | (?P<int>\d+) | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[=\[\],{}()/*+\-])
""", re.VERBOSE)

KEYWORDS = {"dim", "matrix", "vector", "diagram", "expr"}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            value = m.group()
            out.append(Token("sym" if kind == "arrow" else kind, value, line, pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


@dataclass
class Document:
    dim: int
    matrices: dict = field(default_factory=dict)
    vectors: dict = field(default_factory=dict)
    diagrams: dict = field(default_factory=dict)
    exprs: dict = field(default_factory=dict)  # name -> tuple of (coefficient, diagram name)

    def environment(self, field_name: str = "rat") -> Environment:
        return Environment(self.dim, self.matrices, self.vectors, field_name)

    def expression(self, name: str) -> DiagramExpression:
        if name in self.diagrams:
            return DiagramExpression.of(self.diagrams[name])
        if name not in self.exprs:
            raise DslError(f"unknown name {name!r}")
        terms = tuple((c, self.diagrams[d]) for c, d in self.exprs[name])
        return DiagramExpression(terms, dim=self.dim)

    def names(self) -> list[str]:
        return list(self.diagrams) + list(self.exprs)


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise DslError(message, tok.line, tok.column)

    def next(self) -> Token:
        tok = self.tok
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind in ("sym", "name") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {shown!r}")
        return self.next()

    def name(self, what: str = "name") -> Token:
        if self.tok.kind != "name":
            self.fail(f"expected {what}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def integer(self) -> int:
        sign = -1 if self.at("-") and self.next() else 1
        if self.tok.kind != "int":
            self.fail(f"expected an integer, found {self.tok.text or 'end of input'!r}")
        return sign * int(self.next().text)

    def scalar(self) -> Fraction:
        tok = self.tok
        p = self.integer()
        if self.at("/"):
            self.next()
            q = self.integer()
            if q == 0:
                self.fail("zero denominator", tok)
            return Fraction(p, q)
        return Fraction(p)

    def scalar_list(self) -> list[Fraction]:
        self.expect("[")
        out = [self.scalar()]
        while self.at(","):
            self.next()
            out.append(self.scalar())
        self.expect("]")
        return out

    # -- statements --

    def document(self) -> Document:
        dim_tok = None
        dim = None
        mats, vecs, diagrams, exprs = {}, {}, {}, {}
        pending = []
        while self.tok.kind != "eof":
            head = self.tok
            if head.kind != "name" or head.text not in KEYWORDS:
                self.fail(f"expected a statement, found {head.text!r}")
            self.next()
            if head.text == "dim":
                if dim_tok is not None:
                    self.fail("duplicate 'dim' declaration", head)
                dim_tok = head
                dim = self.integer()
                if dim < 1:
                    self.fail(f"dimension must be positive, got {dim}", head)
            elif head.text in ("matrix", "vector"):
                name = self.name()
                table = mats if head.text == "matrix" else vecs
                if name.text in table:
                    self.fail(f"duplicate {head.text} {name.text!r}", name)
                self.expect("=")
                if head.text == "matrix":
                    self.expect("[")
                    rows = [self.scalar_list()]
                    while self.at(","):
                        self.next()
                        rows.append(self.scalar_list())
                    self.expect("]")
                    table[name.text] = (rows, name)
                else:
                    table[name.text] = (self.scalar_list(), name)
            elif head.text == "diagram":
                name = self.name()
                if name.text in diagrams or name.text in exprs:
                    self.fail(f"duplicate name {name.text!r}", name)
                diagrams[name.text] = self.diagram_body(name)
            else:
                name = self.name()
                if name.text in diagrams or name.text in exprs:
                    self.fail(f"duplicate name {name.text!r}", name)
                self.expect("=")
                exprs[name.text] = self.linear()
                pending.append(name.text)
        if dim is None:
            raise DslError("missing 'dim' declaration", 1, 1)
        for table, what in ((mats, "matrix"), (vecs, "vector")):
            for key, (value, tok) in table.items():
                rows = value if what == "matrix" else [value]
                if what == "matrix" and (len(rows) != dim or any(len(r) != dim for r in rows)):
                    self.fail(f"matrix {key!r} is not {dim}x{dim}", tok)
                if what == "vector" and len(value) != dim:
                    self.fail(f"vector {key!r} does not have {dim} entries", tok)
        graphs = {}
        for key, builder in diagrams.items():
            graphs[key] = builder(dim)
        resolved = {}
        for key in pending:
            terms = []
            for coef, tok in exprs[key]:
                if tok.text in graphs:
                    terms.append((coef, tok.text))
                elif tok.text in resolved:
                    terms += [(coef * c, d) for c, d in resolved[tok.text]]
                else:
                    self.fail(f"unknown name {tok.text!r} in expr", tok)
            resolved[key] = tuple(terms)
        return Document(dim, {k: v for k, (v, _) in mats.items()}, {k: v for k, (v, _) in vecs.items()},
                        graphs, resolved)

    def linear(self):
        terms = []
        sign = 1
        if self.at("-") or self.at("+"):
            sign = -1 if self.next().text == "-" else 1
        while True:
            coef = Fraction(1)
            if self.tok.kind == "int" or self.at("-"):
                coef = self.scalar()
                self.expect("*")
            terms.append((sign * coef, self.name("diagram name")))
            if self.at("+") or self.at("-"):
                sign = -1 if self.next().text == "-" else 1
            else:
                return terms

    def diagram_body(self, title: Token):
        self.expect("{")
        nodes = []  # (name token, edge tokens)
        attachments = []  # (edge token, kind, payload)
        marks = []  # (edge token, matrix, forward)
        loops = []
        node_names = set()
        outputs = {}
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.fail(f"unterminated diagram {title.text!r}")
            head = self.name("diagram item")
            if head.text == "node":
                name = self.name("node name")
                if name.text in node_names:
                    self.fail(f"duplicate node {name.text!r}", name)
                node_names.add(name.text)
                self.expect("(")
                ports = [self.name("edge name")]
                while self.at(","):
                    self.next()
                    ports.append(self.name("edge name"))
                self.expect(")")
                nodes.append((name, ports))
                attachments += [(e, "port", (len(nodes) - 1, s)) for s, e in enumerate(ports)]
            elif head.text == "input":
                vec = self.name("vector name")
                self.expect("->")
                attachments.append((self.name("edge name"), "input", vec.text))
            elif head.text == "basis":
                k = self.integer()
                self.expect("->")
                attachments.append((self.name("edge name"), "basis", k))
            elif head.text == "output":
                slot_tok = self.tok
                slot = self.integer()
                if slot in outputs:
                    self.fail(f"duplicate output slot {slot}", slot_tok)
                outputs[slot] = slot_tok
                self.expect("->")
                attachments.append((self.name("edge name"), "output", slot))
            elif head.text == "mark":
                matrix = self.name("matrix name")
                self.expect("on")
                edge = self.name("edge name")
                self.expect("dir")
                d = self.name("'fwd' or 'rev'")
                if d.text not in ("fwd", "rev"):
                    self.fail(f"expected 'fwd' or 'rev', found {d.text!r}", d)
                marks.append((edge, matrix.text, d.text == "fwd"))
            elif head.text == "loop":
                loops.append(self.name("edge name"))
            else:
                self.fail(f"unknown diagram item {head.text!r}", head)
        self.expect("}")

        def build(dim: int) -> DiagramGraph:
            seen: dict[str, list] = {}
            order: list[str] = []
            inputs = 0
            for edge, kind, payload in attachments:
                if kind == "port":
                    end = NodePort(*payload)
                elif kind == "input":
                    inputs += 1
                    end = VectorInput(payload, inputs)
                elif kind == "basis":
                    end = BasisLabel(payload)
                else:
                    end = FreeOutput(payload)
                if edge.text not in seen:
                    seen[edge.text] = []
                    order.append(edge.text)
                seen[edge.text].append((end, edge))
            for tok in loops:
                if tok.text in seen:
                    self.fail(f"edge arity: loop {tok.text!r} is also attached", tok)
                seen[tok.text] = [(None, tok), (None, tok)]
                order.append(tok.text)
            for name in order:
                if len(seen[name]) != 2:
                    where = seen[name][-1][1]
                    self.fail(f"edge arity: edge {name!r} is used {len(seen[name])} times, expected 2", where)
            stacks: dict[str, list[Marking]] = {name: [] for name in order}
            for tok, matrix, fwd in marks:
                if tok.text not in stacks:
                    self.fail(f"mark on unknown edge {tok.text!r}", tok)
                stacks[tok.text].append(Marking(matrix, fwd))
            edges = tuple(Edge(seen[n][0][0], seen[n][1][0], tuple(stacks[n])) for n in order)
            g = DiagramGraph(dim, tuple(Node(i, len(p)) for i, (_, p) in enumerate(nodes)), edges)
            report = validate(g)
            if not report.ok:
                self.fail(f"invalid diagram {title.text!r}: {report}", title)
            return g

        return build


def parse(text: str) -> Document:
    """Parse a ``.td`` document; every error is a :class:`DslError` with a position."""
    return _Parser(text).document()


def parse_diagram(text: str, name: Optional[str] = None) -> DiagramGraph:
    doc = parse(text)
    if not doc.diagrams:
        raise DslError("document defines no diagram")
    return doc.diagrams[name] if name else next(iter(doc.diagrams.values()))


# -- serialization -----------------------------------------------------------

def _fmt(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def diagram_items(g: DiagramGraph) -> list[str]:
    """Body lines for ``g`` after canonical renumbering."""
    c = canonicalize(g)
    names = [f"e{i + 1}" for i in range(len(c.edges))]
    port_edge = {}
    for i, e in enumerate(c.edges):
        for end in (e.end1, e.end2):
            if isinstance(end, NodePort):
                port_edge[(end.node, end.slot)] = i
    lines = []
    mentions: list[tuple[int, object]] = []  # (edge index, attachment) in textual order
    for nd in c.nodes:
        ports = [port_edge[(nd.id, s)] for s in range(nd.degree)]
        lines.append(f"node v{nd.id + 1} ({', '.join(names[p] for p in ports)})")
        mentions += [(p, NodePort(nd.id, s)) for s, p in enumerate(ports)]
    terminals = []
    for i, e in enumerate(c.edges):
        for end in (e.end1, e.end2):
            if isinstance(end, (VectorInput, BasisLabel, FreeOutput)):
                terminals.append((end, i))

    def rank(item):
        end, i = item
        if isinstance(end, VectorInput):
            return (0, end.order)
        if isinstance(end, FreeOutput):
            return (1, end.slot)
        return (2, i, end.k)

    for end, i in sorted(terminals, key=rank):
        if isinstance(end, VectorInput):
            lines.append(f"input {end.name} -> {names[i]}")
        elif isinstance(end, FreeOutput):
            lines.append(f"output {end.slot} -> {names[i]}")
        else:
            lines.append(f"basis {end.k} -> {names[i]}")
        mentions.append((i, end))
    first = {}
    for i, end in mentions:
        first.setdefault(i, end)
    for i, e in enumerate(c.edges):
        if e.is_loop:
            lines.append(f"loop {names[i]}")
    for i, e in enumerate(c.edges):
        marks = e.markings
        if not e.is_loop and first[i] != e.end1:
            marks = e.flipped().markings
        for m in marks:
            lines.append(f"mark {m.matrix} on {names[i]} dir {'fwd' if m.forward else 'rev'}")
    return lines


def serialize(doc: Document) -> str:
    out = [f"dim {doc.dim}"]
    for name, rows in doc.matrices.items():
        body = ", ".join("[" + ", ".join(_fmt(x) for x in r) + "]" for r in rows)
        out.append(f"matrix {name} = [{body}]")
    for name, entries in doc.vectors.items():
        out.append(f"vector {name} = [{', '.join(_fmt(x) for x in entries)}]")
    for name, g in doc.diagrams.items():
        out.append(f"diagram {name} {{")
        out += [f"  {line}" for line in diagram_items(g)]
        out.append("}")
    for name, terms in doc.exprs.items():
        parts = []
        for k, (c, d) in enumerate(terms):
            c = Fraction(c)
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            term = d if mag == 1 else f"{_fmt(mag)} * {d}"
            parts.append((f"-{term}" if sign == "-" else term) if k == 0 else f"{sign} {term}")
        out.append(f"expr {name} = {' '.join(parts)}" if parts else f"expr {name} = 0 * {next(iter(doc.diagrams))}")
    return "\n".join(out) + "\n"


def document_of(graphs: dict, dim: Optional[int] = None, matrices=None, vectors=None) -> Document:
    graphs = dict(graphs)
    if dim is None:
        dim = next(iter(graphs.values())).dim
    return Document(dim, dict(matrices or {}), dict(vectors or {}), graphs, {})


def serialize_diagram(g: DiagramGraph, name: str = "d") -> str:
    return serialize(document_of({name: g}))


# -- renderers ---------------------------------------------------------------

def to_dot(g: DiagramGraph, name: str = "diagram") -> str:
    """Graphviz text for the canonical form of ``g``."""
    c = canonicalize(g)
    lines = [f"graph {json.dumps(name)} {{", "  node [fontsize=10];"]
    for nd in c.nodes:
        lines.append(f'  v{nd.id} [shape=circle, style=filled, fillcolor=black, width=0.15, '
                     f'label="", xlabel="v{nd.id}"];')
    terminals = 0
    marks = 0

    def point(end, i, side):
        nonlocal terminals
        if isinstance(end, NodePort):
            return f"v{end.node}", end.slot
        if end is None:
            return None, None
        terminals += 1
        tid = f"t{terminals}"
        if isinstance(end, VectorInput):
            label = f"{end.name} (in {end.order})"
        elif isinstance(end, BasisLabel):
            label = f"e{end.k}"
        else:
            label = f"out {end.slot}"
        lines.append(f'  {tid} [shape=box, label="{label}"];')
        return tid, None

    for i, e in enumerate(c.edges):
        if e.is_loop:
            a = f"loop{i}"
            lines.append(f'  {a} [shape=point, label=""];')
            b = a
            s1 = s2 = None
        else:
            a, s1 = point(e.end1, i, 1)
            b, s2 = point(e.end2, i, 2)
        chain = [a]
        for m in e.markings:
            marks += 1
            mid = f"m{marks}"
            arrow = ">" if m.forward else "<"
            lines.append(f'  {mid} [shape=triangle, orientation={-90 if m.forward else 90}, '
                         f'width=0.2, label="", xlabel="{m.matrix}{arrow}"];')
            chain.append(mid)
        chain.append(b)
        for k in range(len(chain) - 1):
            attrs = []
            if k == 0 and s1 is not None:
                attrs.append(f'taillabel="{s1}{"*" if s1 == 0 else ""}"')
            if k == len(chain) - 2 and s2 is not None:
                attrs.append(f'headlabel="{s2}{"*" if s2 == 0 else ""}"')
            attr = f" [{', '.join(attrs)}]" if attrs else ""
            lines.append(f"  {chain[k]} -- {chain[k + 1]}{attr};")
    lines.append('  label="ports counter-clockwise from the cilium; * marks slot 0";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _value_text(v) -> str:
    if isinstance(v, Fraction):
        return _fmt(v)
    if isinstance(v, float):
        return repr(float(v))  # numpy 2 reprs np.float64 with its type name
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def tensor_to_json(t) -> str:
    entries = [{"index": list(idx), "value": _value_text(v)} for idx, v in t.items()]
    return json.dumps({"dim": t.dim, "arity": t.arity, "entries": entries}, separators=(",", ":"))


def tensor_from_json(text: str):
    from .evaluator import Tensor

    data = json.loads(text)
    values = [e["value"] for e in data["entries"]]
    if any("." in v or "e" in v or "n" in v for v in values):
        return Tensor(data["dim"], data["arity"], [float(v) for v in values], "f64")
    return Tensor(data["dim"], data["arity"], [Fraction(v) for v in values])
