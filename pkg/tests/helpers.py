"""Shared test utilities: a random diagram generator and result lines."""

import sys
from fractions import Fraction

from tracediagrams.core import (
    BasisLabel,
    DiagramGraph,
    Edge,
    Environment,
    FreeOutput,
    Marking,
    Node,
    NodePort,
    VectorInput,
    validate,
)
from tracediagrams.sampling import random_matrix, random_vector, trial_rng


def segments(g):
    # independent count: marked edges split into len+1 pieces, loops into max(len, 1)
    total = 0
    for e in g.edges:
        total += max(len(e.markings), 1) if e.is_loop else len(e.markings) + 1
    return total


def random_diagram(rng, n, max_segments=8, matrices="AB"):
    """Random valid diagram with at most ``max_segments`` segments."""
    while True:
        count = int(rng.integers(0, 3))
        ends = [NodePort(i, s) for i in range(count) for s in range(n)]
        extra = int(rng.integers(0, 4))
        if (len(ends) + extra) % 2:
            extra += 1
        inputs = outputs = 0
        for _ in range(extra):
            kind = int(rng.integers(0, 3))
            if kind == 0:
                inputs += 1
                ends.append(VectorInput(f"x{inputs}", inputs))
            elif kind == 1:
                ends.append(BasisLabel(int(rng.integers(1, n + 1))))
            else:
                outputs += 1
                ends.append(FreeOutput(outputs))
        order = rng.permutation(len(ends))
        ends = [ends[i] for i in order]
        edges = []
        for a, b in zip(ends[::2], ends[1::2]):
            marks = tuple(Marking(matrices[int(rng.integers(0, len(matrices)))], bool(rng.integers(0, 2)))
                          for _ in range(int(rng.integers(0, 3))))
            edges.append(Edge(a, b, marks))
        if rng.random() < 0.3:
            marks = tuple(Marking(matrices[int(rng.integers(0, len(matrices)))], bool(rng.integers(0, 2)))
                          for _ in range(int(rng.integers(0, 3))))
            edges.append(Edge(None, None, marks))
        g = DiagramGraph(n, tuple(Node(i, n) for i in range(count)), tuple(edges))
        if validate(g).ok and segments(g) <= max_segments:
            return g


def random_env(g, seed, trial=0):
    rng = trial_rng(seed, trial)
    n = g.dim
    mats = {m: random_matrix(rng, n) for m in sorted(g.matrix_names())}
    vecs = {v: random_vector(rng, n) for v in sorted(g.vector_names())}
    return Environment(n, mats, vecs)


def scalar(t):
    return Fraction(t.scalar)


def report(number, text, ok):
    """One result line per acceptance criterion, shown even under capture."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}\n"
    sys.__stdout__.write(line)
    sys.__stdout__.flush()
    return ok
