"""Sliced presentations of 2-dimensional diagrams and the binor expansion.

A :class:`WiringTerm` is read bottom to top.  Each layer is one generator:

``Swap(i)``
    strands ``i`` and ``i+1`` cross (pure wiring, no node);
``Cap(i, side)``
    strands ``i`` and ``i+1`` end at a 2-valent node (a local maximum);
``Cup(i, side)``
    two new strands start at a 2-valent node and are inserted at ``i, i+1``;
``Mat(name, i, up)``
    a matrix marking on strand ``i``, input below when ``up``.

``side`` says which strand sits first after the cilium: ``"first"`` puts
the left strand in slot 0, ``"second"`` the right one.  ``side=None``
gives a plain arc without a node.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .core import (
    DiagramError,
    DiagramExpression,
    DiagramGraph,
    Edge,
    Environment,
    FreeOutput,
    Marking,
    Node,
    NodePort,
    validate,
)

SIDES = ("first", "second")


class WiringError(DiagramError):
    pass


@dataclass(frozen=True)
class Id:
    def __str__(self):
        return "id"


@dataclass(frozen=True)
class Swap:
    i: int

    def __str__(self):
        return f"swap {self.i}"


@dataclass(frozen=True)
class Cap:
    i: int
    side: Optional[str] = "first"

    def __str__(self):
        return f"cap {self.i} {self.side or 'plain'}"


@dataclass(frozen=True)
class Cup:
    i: int
    side: Optional[str] = "first"

    def __str__(self):
        return f"cup {self.i} {self.side or 'plain'}"


@dataclass(frozen=True)
class Mat:
    name: str
    i: int
    up: bool = True

    def __str__(self):
        return f"mat {self.name} {self.i} {'up' if self.up else 'down'}"


Generator = Union[Id, Swap, Cap, Cup, Mat]


@dataclass(frozen=True)
class WiringTerm:
    width: int  # bottom boundary width
    layers: tuple = ()
    closed: bool = False
    dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    def widths(self) -> list[int]:
        """Boundary widths from bottom to top (one more entry than layers)."""
        out = [self.width]
        w = self.width
        for layer in self.layers:
            if isinstance(layer, Swap):
                if not 0 <= layer.i < w - 1:
                    raise WiringError(f"swap {layer.i} outside width {w}")
            elif isinstance(layer, Cap):
                if not 0 <= layer.i < w - 1:
                    raise WiringError(f"cap {layer.i} outside width {w}")
                w -= 2
            elif isinstance(layer, Cup):
                if not 0 <= layer.i <= w:
                    raise WiringError(f"cup {layer.i} outside width {w}")
                w += 2
            elif isinstance(layer, Mat):
                if not 0 <= layer.i < w:
                    raise WiringError(f"mat on strand {layer.i} outside width {w}")
            elif not isinstance(layer, Id):
                raise WiringError(f"unknown generator {layer!r}")
            if isinstance(layer, (Cap, Cup)) and layer.side not in SIDES + (None,):
                raise WiringError(f"bad cilium side {layer.side!r}")
            out.append(w)
        return out

    @property
    def top_width(self) -> int:
        return self.widths()[-1]

    def check(self) -> None:
        if self.dim != 2:
            raise WiringError(f"wiring terms live in dimension 2, not {self.dim}")
        if self.width < 0:
            raise WiringError("negative width")
        widths = self.widths()
        if self.closed and widths[-1] != widths[0]:
            raise WiringError(f"cannot close: bottom width {widths[0]} != top width {widths[-1]}")

    @property
    def swap_count(self) -> int:
        return sum(isinstance(layer, Swap) for layer in self.layers)

    def matrix_names(self) -> list[str]:
        seen = []
        for layer in self.layers:
            if isinstance(layer, Mat) and layer.name not in seen:
                seen.append(layer.name)
        return seen

    def to_text(self) -> str:
        lines = [f"width {self.width}"]
        if self.closed:
            lines.append("closed")
        lines += [str(layer) for layer in self.layers]
        return "\n".join(lines) + "\n"


# -- compilation -------------------------------------------------------------

def _slots(side):
    # (slot of left strand, slot of right strand)
    return (0, 1) if side == "first" else (1, 0)


def _glue(pieces: list[Edge], pairs: Iterable[tuple]) -> list[Edge]:
    """Join pieces at placeholder ends; a piece glued to itself becomes a loop."""
    pieces = list(pieces)
    for p, q in pairs:
        ip = next(k for k, e in enumerate(pieces) if p in (e.end1, e.end2))
        x = pieces[ip]
        if x.end1 == p:
            x = x.flipped()  # now p is at end2
        if q in (x.end1,):
            # both placeholders on the same piece: it closes up
            pieces[ip] = Edge(None, None, x.markings)
            continue
        iq = next(k for k, e in enumerate(pieces) if k != ip and q in (e.end1, e.end2))
        y = pieces[iq]
        if y.end2 == q:
            y = y.flipped()  # now q is at end1
        merged = Edge(x.end1, y.end2, x.markings + y.markings)
        for k in sorted((ip, iq), reverse=True):
            del pieces[k]
        pieces.append(merged)
    return pieces


def compile_wiring(t: WiringTerm) -> DiagramGraph:
    """Turn a sliced term into a combinatorial diagram."""
    t.check()
    widths = t.widths()
    wb = widths[0]
    nodes: list[Node] = []
    pieces: list[Edge] = []
    pairs: list[tuple] = []
    # each live strand: [start attachment, markings laid from start upward]
    strands = [[("bottom", j), []] for j in range(wb)]

    for li, layer in enumerate(t.layers):
        if isinstance(layer, Swap):
            i = layer.i
            strands[i], strands[i + 1] = strands[i + 1], strands[i]
        elif isinstance(layer, Mat):
            strands[layer.i][1].append(Marking(layer.name, layer.up))
        elif isinstance(layer, Cap):
            i = layer.i
            left, right = strands[i], strands[i + 1]
            if layer.side is None:
                ends = (("cap", li, 0), ("cap", li, 1))
                pairs.append(ends)
            else:
                nid = len(nodes)
                nodes.append(Node(nid, 2))
                sl, sr = _slots(layer.side)
                ends = (NodePort(nid, sl), NodePort(nid, sr))
            pieces.append(Edge(left[0], ends[0], tuple(left[1])))
            pieces.append(Edge(right[0], ends[1], tuple(right[1])))
            del strands[i:i + 2]
        elif isinstance(layer, Cup):
            i = layer.i
            if layer.side is None:
                starts = (("cup", li, 0), ("cup", li, 1))
                pairs.append(starts)
            else:
                nid = len(nodes)
                nodes.append(Node(nid, 2))
                sl, sr = _slots(layer.side)
                starts = (NodePort(nid, sl), NodePort(nid, sr))
            strands[i:i] = [[starts[0], []], [starts[1], []]]

    for j, (start, marks) in enumerate(strands):
        pieces.append(Edge(start, ("top", j), tuple(marks)))

    if t.closed:
        pairs += [(("top", j), ("bottom", j)) for j in range(wb)]
    pieces = _glue(pieces, pairs)

    def finish(end):
        if isinstance(end, tuple):
            kind, j = end
            return FreeOutput(j + 1 if kind == "bottom" else wb + j + 1)
        return end

    edges = tuple(Edge(finish(e.end1), finish(e.end2), e.markings) for e in pieces)
    g = DiagramGraph(2, tuple(nodes), edges)
    report = validate(g)
    if not report.ok:
        raise WiringError(f"compiled diagram is invalid: {report}")
    return g


# -- calibration and expansion ---------------------------------------------

def _gadget(capside, cupside, i=0):
    return (Cap(i, capside), Cup(i, cupside))


def _calibrate() -> tuple[str, str]:
    from .evaluator import evaluate_contracted

    env = Environment(2)
    crossing = evaluate_contracted(compile_wiring(WiringTerm(2, (Swap(0),))), env)
    parallel = evaluate_contracted(compile_wiring(WiringTerm(2, ())), env)
    for capside, cupside in itertools.product(SIDES, SIDES):
        gadget = evaluate_contracted(compile_wiring(WiringTerm(2, _gadget(capside, cupside))), env)
        if crossing == parallel + gadget:
            return capside, cupside
    raise WiringError("no cilium convention satisfies the binor identity")


_CONVENTION: Optional[tuple[str, str]] = None


def binor_convention() -> tuple[str, str]:
    """(cap side, cup side) under which crossing = parallel + cap-cup gadget."""
    global _CONVENTION
    if _CONVENTION is None:
        _CONVENTION = _calibrate()
    return _CONVENTION


def binor_alternatives(t: WiringTerm) -> list[WiringTerm]:
    """The ``2**k`` crossing-free terms, in binary order over the swaps."""
    t.check()
    capside, cupside = binor_convention()
    choices = []
    for layer in t.layers:
        if isinstance(layer, Swap):
            choices.append([(), _gadget(capside, cupside, layer.i)])
        else:
            choices.append([(layer,)])
    out = []
    for pick in itertools.product(*choices):
        layers = tuple(g for part in pick for g in part)
        out.append(WiringTerm(t.width, layers, t.closed, t.dim))
    return out


def binor_expand(t: WiringTerm) -> DiagramExpression:
    """Replace every crossing by parallel strands plus a ciliated cap-cup pair."""
    if t.dim != 2:
        raise WiringError(f"binor expansion needs dimension 2, got {t.dim}")
    terms = tuple((1, compile_wiring(alt)) for alt in binor_alternatives(t))
    top = t.top_width
    return DiagramExpression(terms, dim=2, arity_hint=0 if t.closed else t.width + top)


def ladder(symbols: Sequence[str], closed: bool = True, up: bool = True) -> WiringTerm:
    """Two strands; a crossing below each matrix, matrices on the left strand.

    Read bottom to top the layers are swap, last symbol, swap, ..., swap,
    first symbol.
    """
    layers = []
    for name in reversed(list(symbols)):
        layers += [Swap(0), Mat(name, 0, up)]
    return WiringTerm(2, tuple(layers), closed)


def parse_wiring(text: str) -> WiringTerm:
    """Read the line format produced by :meth:`WiringTerm.to_text`."""
    width = None
    closed = False
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        head = words[0].lower()
        try:
            if head == "width":
                width = int(words[1])
            elif head == "closed":
                closed = True
            elif head == "id":
                layers.append(Id())
            elif head == "swap":
                layers.append(Swap(int(words[1])))
            elif head in ("cap", "cup"):
                side = words[2] if len(words) > 2 else "first"
                side = None if side == "plain" else side
                if side not in SIDES + (None,):
                    raise ValueError(f"bad side {side!r}")
                layers.append((Cap if head == "cap" else Cup)(int(words[1]), side))
            elif head == "mat":
                direction = words[3] if len(words) > 3 else "up"
                if direction not in ("up", "down"):
                    raise ValueError(f"bad direction {direction!r}")
                layers.append(Mat(words[1], int(words[2]), direction == "up"))
            else:
                raise ValueError(f"unknown generator {head!r}")
        except (IndexError, ValueError) as exc:
            raise WiringError(f"line {lineno}: {exc}") from None
    if width is None:
        raise WiringError("missing 'width' line")
    t = WiringTerm(width, tuple(layers), closed)
    t.check()
    return t
