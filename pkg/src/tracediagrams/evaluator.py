"""Evaluation of trace diagrams to tensors of coefficients.

Two independent routes compute the same value:

* :func:`evaluate_enumerative` sums signed products over every basis
  labeling of the edge segments (the defining rule, slow but obvious);
* :func:`evaluate_contracted` builds one small dense tensor per node,
  marking and terminal and contracts them along a greedy plan.

Segments are the labeling variables.  An edge with ``m`` markings is cut
into ``m + 1`` segments (a closed loop into ``max(m, 1)``), and each
marking couples the two segments on either side of it.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from .core import (
    BasisLabel,
    DiagramError,
    DiagramExpression,
    DiagramGraph,
    Environment,
    FreeOutput,
    NodePort,
    VectorInput,
    canonicalize,
    validate,
)

__all__ = [
    "EnumerationGuardError",
    "Tensor",
    "permutation_sign",
    "node_tensor",
    "clear_caches",
    "SegmentLayout",
    "segment_layout",
    "segment_count",
    "ContractionStep",
    "ContractionPlan",
    "contraction_plan",
    "evaluate_enumerative",
    "evaluate_contracted",
    "evaluate",
    "evaluate_expression",
    "DEFAULT_GUARD",
    "FLOAT_ATOL",
]

DEFAULT_GUARD = 10 ** 8
FLOAT_ATOL = 1e-9


class EnumerationGuardError(DiagramError):
    """The labeling space n**S is too large for brute-force enumeration."""


# -- tensors -----------------------------------------------------------------

class Tensor:
    """Dense array of coefficients indexed by output labels in ``1..n``."""

    __slots__ = ("dim", "arity", "entries", "field")

    def __init__(self, dim: int, arity: int, entries, field: str = "rat"):
        self.dim = dim
        self.arity = arity
        self.field = field
        arr = np.asarray(entries, dtype=float if field == "f64" else object)
        if arr.shape != (dim,) * arity:
            arr = arr.reshape((dim,) * arity)
        if field == "rat":
            arr = _to_fraction_array(arr)
        self.entries = arr

    @classmethod
    def zeros(cls, dim: int, arity: int, field: str = "rat") -> "Tensor":
        if field == "f64":
            return cls(dim, arity, np.zeros((dim,) * arity), field)
        return cls(dim, arity, np.full((dim,) * arity, Fraction(0), dtype=object), field)

    @classmethod
    def scalar_of(cls, dim: int, value, field: str = "rat") -> "Tensor":
        return cls(dim, 0, np.array(value, dtype=float if field == "f64" else object), field)

    @property
    def scalar(self):
        if self.arity != 0:
            raise DiagramError(f"tensor has arity {self.arity}, not a scalar")
        return self.entries[()]

    def __getitem__(self, index):
        if not isinstance(index, tuple):
            index = (index,)
        if len(index) != self.arity:
            raise IndexError(f"expected {self.arity} indices, got {len(index)}")
        if any(not 1 <= i <= self.dim for i in index):
            raise IndexError(f"index {index} outside 1..{self.dim}")
        return self.entries[tuple(i - 1 for i in index)]

    def items(self) -> Iterator[tuple[tuple[int, ...], object]]:
        """Entries in lexicographic index order with 1-based indices."""
        for idx in itertools.product(range(1, self.dim + 1), repeat=self.arity):
            yield idx, self.entries[tuple(i - 1 for i in idx)]

    def _check(self, other: "Tensor"):
        if not isinstance(other, Tensor):
            raise TypeError(f"cannot combine Tensor with {type(other).__name__}")
        if (self.dim, self.arity) != (other.dim, other.arity):
            raise DiagramError(
                f"shape mismatch: (n={self.dim}, d={self.arity}) vs (n={other.dim}, d={other.arity})")

    def __add__(self, other):
        self._check(other)
        return Tensor(self.dim, self.arity, self.entries + other.entries, _join(self, other))

    def __sub__(self, other):
        self._check(other)
        return Tensor(self.dim, self.arity, self.entries - other.entries, _join(self, other))

    def __neg__(self):
        return Tensor(self.dim, self.arity, -self.entries, self.field)

    def __mul__(self, scalar):
        if isinstance(scalar, Tensor):
            return NotImplemented
        if self.field == "f64":
            return Tensor(self.dim, self.arity, self.entries * float(scalar), "f64")
        return Tensor(self.dim, self.arity, self.entries * Fraction(scalar), "rat")

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Tensor):
            return NotImplemented
        if (self.dim, self.arity) != (other.dim, other.arity):
            return False
        return bool(np.all(self.entries == other.entries))

    __hash__ = None

    def is_zero(self) -> bool:
        return bool(np.all(self.entries == 0))

    def allclose(self, other: "Tensor", atol: float = FLOAT_ATOL) -> bool:
        self._check(other)
        a = np.asarray(self.entries, dtype=float)
        b = np.asarray(other.entries, dtype=float)
        return bool(np.all(np.abs(a - b) <= atol))

    def to_float(self) -> "Tensor":
        return Tensor(self.dim, self.arity, np.asarray(self.entries, dtype=float), "f64")

    def tolist(self):
        return self.entries.tolist()

    def __repr__(self):
        if self.arity == 0:
            return f"Tensor(n={self.dim}, scalar={self.scalar})"
        return f"Tensor(n={self.dim}, arity={self.arity}, entries={self.entries.tolist()})"


def _join(a: Tensor, b: Tensor) -> str:
    return "f64" if "f64" in (a.field, b.field) else "rat"


def _to_fraction_array(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=object)
    flat_in = arr.reshape(-1)
    flat_out = out.reshape(-1)
    for i, x in enumerate(flat_in):
        flat_out[i] = x if isinstance(x, Fraction) else Fraction(x)
    return out


# -- the node rule -----------------------------------------------------------

def permutation_sign(seq) -> int:
    """Sign of ``i -> seq[i]`` on ``1..n`` where ``n = len(seq)``; 0 on repeats."""
    seq = list(seq)
    n = len(seq)
    for x in seq:
        if not isinstance(x, (int, np.integer)) or not 1 <= x <= n:
            raise ValueError(f"entry {x!r} outside 1..{n}")
    if len(set(seq)) != n:
        return 0
    inversions = sum(1 for i in range(n) for j in range(i + 1, n) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def _levi_civita(n: int) -> tuple[np.ndarray, dict]:
    arr = np.zeros((n,) * n, dtype=object)
    arr[...] = 0
    nonzero = {}
    for perm in itertools.permutations(range(1, n + 1)):
        s = permutation_sign(perm)
        arr[tuple(p - 1 for p in perm)] = s
        nonzero[tuple(p - 1 for p in perm)] = s
    arr.setflags(write=False)
    return arr, nonzero


def node_tensor(n: int) -> Tensor:
    """Levi-Civita symbol of order ``n`` with indices in port order."""
    if n < 1:
        raise DiagramError("node degree must be positive")
    return Tensor(n, n, _levi_civita(n)[0].copy())


def clear_caches() -> None:
    """Drop memoised node tensors and plans (used after patching the sign rule)."""
    _levi_civita.cache_clear()
    _plan_cached.cache_clear()
    _layout_cached.cache_clear()


# -- segments ----------------------------------------------------------------

@dataclass(frozen=True)
class SegmentLayout:
    """Labeling variables of a diagram and the factors coupling them."""

    dim: int
    count: int
    nodes: tuple[tuple[int, tuple[int, ...]], ...]  # (node id, segment per slot)
    marks: tuple[tuple[str, int, int], ...]  # (matrix, output segment, input segment)
    vectors: tuple[tuple[str, int], ...]
    basis: tuple[tuple[int, int], ...]  # (k, segment)
    outputs: tuple[int, ...]  # segment of output slot 1..d
    empty_loops: int = 0


def _segments_of_edge(e, start):
    m = len(e.markings)
    if e.is_loop:
        if m == 0:
            return [start], [], 1
        segs = list(range(start, start + m))
        pairs = [(segs[j], segs[(j + 1) % m]) for j in range(m)]
        return segs, pairs, m
    segs = list(range(start, start + m + 1))
    pairs = [(segs[j], segs[j + 1]) for j in range(m)]
    return segs, pairs, m + 1


def segment_layout(g: DiagramGraph) -> SegmentLayout:
    return _layout_cached(g)


@lru_cache(maxsize=4096)
def _layout_cached(g: DiagramGraph) -> SegmentLayout:
    ports: dict[int, list] = {nd.id: [None] * nd.degree for nd in g.nodes}
    marks, vectors, basis, outputs = [], [], [], {}
    count = 0
    empty_loops = 0
    for e in g.edges:
        segs, pairs, used = _segments_of_edge(e, count)
        count += used
        if e.is_loop and not e.markings:
            empty_loops += 1
        for mk, (a, b) in zip(e.markings, pairs):
            # forward: input faces end1, so the end1-side segment is the input
            marks.append((mk.matrix, b, a) if mk.forward else (mk.matrix, a, b))
        for end, seg in ((e.end1, segs[0]), (e.end2, segs[-1])):
            if isinstance(end, NodePort):
                ports[end.node][end.slot] = seg
            elif isinstance(end, VectorInput):
                vectors.append((end.order, end.name, seg))
            elif isinstance(end, BasisLabel):
                basis.append((end.k, seg))
            elif isinstance(end, FreeOutput):
                outputs[end.slot] = seg
    vectors.sort()
    return SegmentLayout(
        dim=g.dim,
        count=count,
        nodes=tuple((nid, tuple(slots)) for nid, slots in ports.items()),
        marks=tuple(marks),
        vectors=tuple((name, seg) for _, name, seg in vectors),
        basis=tuple(basis),
        outputs=tuple(outputs[s] for s in sorted(outputs)),
        empty_loops=empty_loops,
    )


def segment_count(g: DiagramGraph) -> int:
    return segment_layout(g).count


# -- binding -----------------------------------------------------------------

def _prepare(g: DiagramGraph, env: Environment):
    report = validate(g)
    if not report.ok:
        raise DiagramError(f"invalid diagram: {report}")
    env.check(g)


def _numeric_bindings(env: Environment):
    """Matrices and vectors as Python ints when possible, else Fractions/floats."""
    if env.field == "f64":
        mats = {k: np.array(v, dtype=float) for k, v in env.matrices.items()}
        vecs = {k: np.array(v, dtype=float) for k, v in env.vectors.items()}
        return mats, vecs, "f64"
    integral = all(x.denominator == 1 for m in env.matrices.values() for r in m for x in r) and \
        all(x.denominator == 1 for v in env.vectors.values() for x in v)
    conv = (lambda x: int(x)) if integral else (lambda x: x)
    mats = {}
    for k, rows in env.matrices.items():
        arr = np.empty((env.dim, env.dim), dtype=object)
        for i, r in enumerate(rows):
            for j, x in enumerate(r):
                arr[i, j] = conv(x)
        mats[k] = arr
    vecs = {}
    for k, entries in env.vectors.items():
        arr = np.empty(env.dim, dtype=object)
        for i, x in enumerate(entries):
            arr[i] = conv(x)
        vecs[k] = arr
    return mats, vecs, "int" if integral else "rat"


def _finish(dim, arity, arr, kind) -> Tensor:
    return Tensor(dim, arity, arr, "f64" if kind == "f64" else "rat")


# -- enumerative evaluation ------------------------------------------------

def _enum_factors(layout: SegmentLayout, mats, vecs):
    """Factors as (segments, lookup) with lookup taking a label tuple."""
    n = layout.dim
    factors = []
    nonzero = _levi_civita(n)[1] if layout.nodes else {}
    for _, segs in layout.nodes:
        factors.append(("node", segs, nonzero))
    for name, out_seg, in_seg in layout.marks:
        factors.append(("mat", (out_seg, in_seg), mats[name]))
    for name, seg in layout.vectors:
        factors.append(("vec", (seg,), vecs[name]))
    return factors


def _enumerate_sum(layout: SegmentLayout, factors, fixed: dict, one, zero):
    """Sum over all labelings of the segments not in ``fixed``."""
    n = layout.dim
    free = [s for s in range(layout.count) if s not in fixed]
    position = {s: i for i, s in enumerate(free)}
    # a factor is evaluated at the step where its last free segment is assigned
    ready: list[list] = [[] for _ in range(len(free) + 1)]
    for kind, segs, table in factors:
        last = max((position[s] for s in segs if s in position), default=-1)
        ready[last + 1].append((kind, segs, table))

    labels = dict(fixed)

    def value(kind, segs, table):
        if kind == "node":
            return table.get(tuple(labels[s] for s in segs), 0)
        if kind == "mat":
            return table[labels[segs[0]], labels[segs[1]]]
        return table[labels[segs[0]]]

    base = one
    for f in ready[0]:
        base = base * value(*f)
        if base == 0:
            return zero

    def rec(depth, acc):
        if depth == len(free):
            return acc
        seg = free[depth]
        total = zero
        for lab in range(n):
            labels[seg] = lab
            prod = acc
            for f in ready[depth + 1]:
                prod = prod * value(*f)
                if prod == 0:
                    break
            if prod != 0:
                total = total + rec(depth + 1, prod)
        del labels[seg]
        return total

    return rec(0, base)


def _cell_fixings(layout: SegmentLayout, cell: tuple[int, ...]) -> Optional[dict]:
    fixed: dict[int, int] = {}
    for k, seg in layout.basis:
        if fixed.setdefault(seg, k - 1) != k - 1:
            return None
    for lab, seg in zip(cell, layout.outputs):
        if fixed.setdefault(seg, lab) != lab:
            return None
    return fixed


def _enum_cells(args):
    layout, mats, vecs, kind, cells, split = args
    one, zero = (1.0, 0.0) if kind == "f64" else (1, 0)
    factors = _enum_factors(layout, mats, vecs)
    out = []
    for cell in cells:
        fixed = _cell_fixings(layout, cell)
        if fixed is None:
            out.append(zero)
            continue
        if split is not None:
            seg, lab = split
            if fixed.setdefault(seg, lab) != lab:
                out.append(zero)
                continue
        out.append(_enumerate_sum(layout, factors, fixed, one, zero))
    return out


def evaluate_enumerative(g: DiagramGraph, env: Environment, workers: int = 1,
                         max_labelings: int = DEFAULT_GUARD) -> Tensor:
    """Brute-force labeling sum; the reference semantics.

    Refuses when ``n ** S`` exceeds ``max_labelings``, ``S`` being the
    total number of segments of ``g``.
    """
    _prepare(g, env)
    layout = segment_layout(g)
    n = g.dim
    if n ** layout.count > max_labelings:
        raise EnumerationGuardError(
            f"enumeration refused: {n}^{layout.count} labelings exceed guard {max_labelings}")
    mats, vecs, kind = _numeric_bindings(env)
    d = len(layout.outputs)
    cells = list(itertools.product(range(n), repeat=d))

    if workers <= 1:
        values = _enum_cells((layout, mats, vecs, kind, cells, None))
    else:
        # split the first unfixed segment's labels across workers
        pinned = {seg for _, seg in layout.basis} | set(layout.outputs)
        candidates = [s for s in range(layout.count) if s not in pinned]
        if candidates:
            seg = candidates[0]
            jobs = [(layout, mats, vecs, kind, cells, (seg, lab)) for lab in range(n)]
        else:
            jobs = [(layout, mats, vecs, kind, cells, None)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_enum_cells, jobs))
        values = [sum(col[i] for col in parts[1:]) + parts[0][i] if len(parts) > 1 else parts[0][i]
                  for i in range(len(cells))]
    arr = np.empty((n,) * d, dtype=float if kind == "f64" else object)
    for cell, val in zip(cells, values):
        arr[cell] = val
    return _finish(n, d, arr, kind)


# -- contraction plan --------------------------------------------------------

@dataclass(frozen=True)
class ContractionStep:
    """One step: ``contract`` two tensors over a label, ``trace`` a repeated
    label inside one tensor, or ``outer`` product of two tensors."""

    kind: str
    left: int
    right: Optional[int]
    label: Optional[int]
    result: int
    arity: int


@dataclass(frozen=True)
class ContractionPlan:
    graph: DiagramGraph  # canonical form the plan refers to
    tensors: tuple[tuple[str, object, tuple[int, ...]], ...]  # (kind, payload, labels)
    steps: tuple[ContractionStep, ...]
    output_labels: tuple[int, ...]
    scalar_factor: int = 1
    final: Optional[int] = None
    final_labels: tuple[int, ...] = ()

    @property
    def max_arity(self) -> int:
        start = max((len(t[2]) for t in self.tensors), default=0)
        return max([start] + [s.arity for s in self.steps])

    def __len__(self):
        return len(self.steps)


def contraction_plan(g: DiagramGraph) -> ContractionPlan:
    """Greedy plan: always take the step with the smallest resulting arity."""
    return _plan_cached(g)


@lru_cache(maxsize=4096)
def _plan_cached(g: DiagramGraph) -> ContractionPlan:
    c = canonicalize(g)
    layout = segment_layout(c)
    tensors: list[tuple[str, object, tuple[int, ...]]] = []
    for _, segs in layout.nodes:
        tensors.append(("node", None, segs))
    for name, out_seg, in_seg in layout.marks:
        tensors.append(("mat", name, (out_seg, in_seg)))
    for name, seg in layout.vectors:
        tensors.append(("vec", name, (seg,)))
    for k, seg in layout.basis:
        tensors.append(("basis", k, (seg,)))

    output_labels = list(layout.outputs)
    fresh = layout.count
    seen = set()
    for i, seg in enumerate(output_labels):
        if seg in seen:
            # both ends of a bare segment are outputs: route through a delta
            tensors.append(("delta", None, (seg, fresh)))
            output_labels[i] = fresh
            fresh += 1
        seen.add(seg)

    open_labels = set(output_labels)
    live: dict[int, tuple[int, ...]] = {i: t[2] for i, t in enumerate(tensors)}
    next_id = len(tensors)
    steps = []
    while True:
        best = None
        holders: dict[int, list[int]] = {}
        for tid in sorted(live):
            for lab in live[tid]:
                if lab not in open_labels:
                    holders.setdefault(lab, []).append(tid)
        for lab in sorted(holders):
            ts = holders[lab]
            if len(ts) == 2 and ts[0] == ts[1]:
                cand = (len(live[ts[0]]) - 2, lab, "trace", ts[0], None)
            elif len(ts) == 2:
                cand = (len(live[ts[0]]) + len(live[ts[1]]) - 2, lab, "contract", ts[0], ts[1])
            else:
                raise DiagramError(f"segment {lab} has {len(ts)} incidences")
            if best is None or cand[:2] < best[:2]:
                best = cand
        if best is None:
            if len(live) <= 1:
                break
            a, b = sorted(live)[:2]
            best = (len(live[a]) + len(live[b]), None, "outer", a, b)
        arity, lab, kind, a, b = best
        if kind == "trace":
            labels = list(live[a])
            i = labels.index(lab)
            j = labels.index(lab, i + 1)
            new = tuple(x for k, x in enumerate(labels) if k not in (i, j))
            del live[a]
        elif kind == "contract":
            new = tuple(x for x in live[a] if x != lab) + tuple(x for x in live[b] if x != lab)
            if lab in new:
                # the pair shares a second copy only if malformed
                raise DiagramError(f"segment {lab} over-used")
            del live[a], live[b]
        else:
            new = live[a] + live[b]
            del live[a], live[b]
        live[next_id] = new
        steps.append(ContractionStep(kind, a, b, lab, next_id, arity))
        next_id += 1

    final = next(iter(live)) if live else None
    return ContractionPlan(
        graph=c,
        tensors=tuple(tensors),
        steps=tuple(steps),
        output_labels=tuple(output_labels),
        scalar_factor=g.dim ** layout.empty_loops,
        final=final,
        final_labels=live[final] if final is not None else (),
    )


def _component(kind, payload, n, mats, vecs, dtype):
    if kind == "node":
        return np.asarray(_levi_civita(n)[0], dtype=dtype)
    if kind == "mat":
        return mats[payload]
    if kind == "vec":
        return vecs[payload]
    if kind == "basis":
        v = np.zeros(n, dtype=dtype)
        v[...] = 0
        v[payload - 1] = 1
        return v
    if kind == "delta":
        m = np.zeros((n, n), dtype=dtype)
        m[...] = 0
        for i in range(n):
            m[i, i] = 1
        return m
    raise ValueError(kind)


def evaluate_contracted(g: DiagramGraph, env: Environment) -> Tensor:
    """Evaluate by executing :func:`contraction_plan` on dense tensors."""
    _prepare(g, env)
    plan = contraction_plan(g)
    n = g.dim
    mats, vecs, kind = _numeric_bindings(env)
    dtype = float if kind == "f64" else object
    arrays: dict[int, np.ndarray] = {}
    labels: dict[int, tuple[int, ...]] = {}
    for i, (k, payload, labs) in enumerate(plan.tensors):
        arrays[i] = _component(k, payload, n, mats, vecs, dtype)
        labels[i] = labs
    for st in plan.steps:
        if st.kind == "trace":
            labs = list(labels.pop(st.left))
            arr = arrays.pop(st.left)
            i = labs.index(st.label)
            j = labs.index(st.label, i + 1)
            res = np.trace(arr, axis1=i, axis2=j)
            new = tuple(x for k, x in enumerate(labs) if k not in (i, j))
        elif st.kind == "contract":
            la, lb = labels.pop(st.left), labels.pop(st.right)
            a, b = arrays.pop(st.left), arrays.pop(st.right)
            res = np.tensordot(a, b, axes=([la.index(st.label)], [lb.index(st.label)]))
            new = tuple(x for x in la if x != st.label) + tuple(x for x in lb if x != st.label)
        else:
            la, lb = labels.pop(st.left), labels.pop(st.right)
            res = np.multiply.outer(arrays.pop(st.left), arrays.pop(st.right))
            new = la + lb
        arrays[st.result] = np.asarray(res, dtype=dtype)
        labels[st.result] = new

    d = len(plan.output_labels)
    if plan.final is None:
        result = np.asarray(1, dtype=dtype)
    else:
        result = arrays[plan.final]
        perm = [labels[plan.final].index(lab) for lab in plan.output_labels]
        result = np.transpose(result, perm) if d else result
    if plan.scalar_factor != 1:
        result = result * plan.scalar_factor
    return _finish(n, d, np.asarray(result, dtype=dtype), kind)


EVALUATORS = {
    "enum": evaluate_enumerative,
    "enumerative": evaluate_enumerative,
    "contract": evaluate_contracted,
    "contracted": evaluate_contracted,
}


def evaluate(g: DiagramGraph, env: Environment, which: str = "contract") -> Tensor:
    try:
        fn = EVALUATORS[which]
    except KeyError:
        raise DiagramError(f"unknown evaluator {which!r}") from None
    return fn(g, env)


def evaluate_expression(e: DiagramExpression, env: Environment, which: str = "contract",
                        arity: Optional[int] = None) -> Tensor:
    """Coefficient-weighted sum of the term values."""
    e.check()
    if e.terms and e.dim != env.dim:
        raise DiagramError(f"dimension mismatch: expression n={e.dim}, environment n={env.dim}")
    d = e.arity if e.terms else (arity if arity is not None else e.arity)
    total = Tensor.zeros(env.dim, d, env.field)
    for coeff, g in e.terms:
        if coeff == 0:
            continue
        total = total + evaluate(g, env, which) * coeff
    return total
