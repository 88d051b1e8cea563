"""Read closed 2-dimensional diagrams as polynomials in traces and determinants.

Each crossing-free diagram evaluates to a signed product of traces of
words and determinants.  We recover that product numerically: evaluate the
diagram and every candidate monomial on seeded integer samples and look
for the smallest exact linear fit.  Traces are stored with cyclically
minimal words, so tr(AB) and tr(BA) are the same monomial.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import oracles
from .core import DiagramError, DiagramExpression, DiagramGraph, Environment
from .evaluator import evaluate
from .sampling import DEFAULT_RANGE, FRESH_OFFSET, random_bindings, trial_rng


class FingerprintError(DiagramError):
    """Raised with reason "insufficient samples" or "basis deficient"."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


def canonical_word(word: Sequence[str]) -> tuple[str, ...]:
    word = tuple(word)
    if not word:
        raise ValueError("empty trace word")
    return min(word[r:] + word[:r] for r in range(len(word)))


@dataclass(frozen=True, order=True)
class TraceMonomial:
    """Product of ``("tr", word)`` and ``("det", symbol)`` factors."""

    factors: tuple = ()

    @classmethod
    def of(cls, *factors) -> "TraceMonomial":
        norm = []
        for kind, arg in factors:
            if kind == "tr":
                norm.append(("tr", canonical_word(arg)))
            elif kind == "det":
                norm.append(("det", arg))
            else:
                raise ValueError(f"unknown factor kind {kind!r}")
        return cls(tuple(sorted(norm, key=_factor_key)))

    @classmethod
    def parse(cls, text: str) -> "TraceMonomial":
        """Read ``tr(AB)tr(C)det(D)``; ``1`` is the empty monomial."""
        text = text.replace(" ", "").replace("*", "")
        if text in ("", "1"):
            return cls(())
        factors = []
        pos = 0
        while pos < len(text):
            for kind in ("tr", "det"):
                if text.startswith(kind + "(", pos):
                    end = text.index(")", pos)
                    arg = text[pos + len(kind) + 1:end]
                    factors.append((kind, tuple(arg) if kind == "tr" else arg))
                    pos = end + 1
                    break
            else:
                raise ValueError(f"cannot parse monomial {text!r} at {pos}")
        return cls.of(*factors)

    def multidegree(self, dim: int = 2) -> Counter:
        deg: Counter = Counter()
        for kind, arg in self.factors:
            if kind == "tr":
                deg.update(arg)
            else:
                deg[arg] += dim
        return deg

    def degree(self, dim: int = 2) -> int:
        return sum(self.multidegree(dim).values())

    def evaluate(self, mats: dict) -> Fraction:
        value = Fraction(1)
        for kind, arg in self.factors:
            if kind == "tr":
                n = len(mats[arg[0]])
                value *= oracles.trace(oracles.word_product([mats[x] for x in arg], n))
            else:
                value *= oracles.det(mats[arg])
        return value

    def __str__(self):
        if not self.factors:
            return "1"
        return "".join(f"{kind}({''.join(arg)})" for kind, arg in self.factors)


def _factor_key(f):
    kind, arg = f
    # traces before determinants, shorter words first
    return (kind != "tr", len(arg) if kind == "tr" else 0, tuple(arg))


def _words(symbols: Sequence[str], max_len: int, limits: Counter) -> list[tuple[str, ...]]:
    seen = set()
    out = []
    for length in range(1, max_len + 1):
        for word in itertools.product(symbols, repeat=length):
            if any(c > limits[s] for s, c in Counter(word).items()):
                continue
            w = canonical_word(word)
            if w not in seen:
                seen.add(w)
                out.append(w)
    return out


def fingerprint_basis(symbols: Sequence[str], degree_bound: int, dim: int = 2,
                      multidegree: Optional[Counter] = None) -> list[TraceMonomial]:
    """Monomials of total degree at most ``degree_bound``.

    With ``multidegree`` given only monomials with exactly that degree in
    each symbol are kept (this is the only case the read-off needs).
    """
    symbols = list(symbols)
    limits = Counter(multidegree) if multidegree is not None else Counter({s: degree_bound for s in symbols})
    factors = [("tr", w) for w in _words(symbols, degree_bound, limits)]
    factors += [("det", s) for s in symbols if limits[s] >= dim]
    fdeg = [TraceMonomial.of(f).multidegree(dim) for f in factors]

    out = []
    seen = set()

    def extend(start, current, deg):
        if current:
            mono = TraceMonomial.of(*current)
            ok = (deg == limits) if multidegree is not None else True
            if ok and mono not in seen:
                seen.add(mono)
                out.append(mono)
        for i in range(start, len(factors)):
            nd = deg + fdeg[i]
            if sum(nd.values()) > degree_bound or any(nd[s] > limits[s] for s in nd):
                continue
            extend(i, current + [factors[i]], nd)

    extend(0, [], Counter())
    if multidegree is not None and not any(multidegree.values()):
        out.insert(0, TraceMonomial(()))
    return out


# -- exact linear algebra -----------------------------------------------------

def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def solve_exact(columns: list[list[Fraction]], target: list[Fraction]) -> Optional[list[Fraction]]:
    """Unique x with sum_j x_j columns[j] == target, or None.

    Raises FingerprintError when the columns are dependent on the samples.
    """
    rows = [[col[i] for col in columns] + [target[i]] for i in range(len(target))]
    k = len(columns)
    if _rank([r[:k] for r in rows]) < k:
        raise FingerprintError("insufficient samples", f"{k} columns are dependent on {len(target)} samples")
    m = [list(r) for r in rows]
    piv_row = 0
    pivots = []
    for c in range(k):
        pivot = next(r for r in range(piv_row, len(m)) if m[r][c] != 0)
        m[piv_row], m[pivot] = m[pivot], m[piv_row]
        pv = m[piv_row][c]
        m[piv_row] = [a / pv for a in m[piv_row]]
        for r in range(len(m)):
            if r != piv_row and m[r][c] != 0:
                f = m[r][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[piv_row])]
        pivots.append(c)
        piv_row += 1
    if any(m[r][k] != 0 for r in range(piv_row, len(m))):
        return None
    return [m[i][k] for i in range(k)]


# -- decomposition -----------------------------------------------------------

Decomposition = list  # list of (TraceMonomial, Fraction)


def _samples(symbols, trials, seed, entry_range, offset=0):
    return [random_bindings(symbols, 2, trial_rng(seed, offset + t), entry_range) for t in range(trials)]


def _values(g_or_e, samples, which):
    out = []
    for mats in samples:
        env = Environment(2, mats)
        if isinstance(g_or_e, DiagramGraph):
            out.append(Fraction(evaluate(g_or_e, env, which).scalar))
        else:
            from .evaluator import evaluate_expression
            out.append(Fraction(evaluate_expression(g_or_e, env, which).scalar))
    return out


def _fit_complexity(fit):
    monos = [m for m, _ in fit]
    longest = max((len(a) for m in monos for k, a in m.factors if k == "tr"), default=0)
    return (longest, sum(len(m.factors) for m in monos), [_mono_key(m) for m in monos])


def _sparse_fit(values, basis, samples, max_support, recheck=None):
    """Smallest support that fits exactly; must be unique at that size.

    When ``recheck`` is given, ties between fits that all survive it are
    broken by preferring short words, then few factors.
    """
    if all(v == 0 for v in values):
        return []
    cols = {}
    for mono in basis:
        cols[mono] = [mono.evaluate(mats) for mats in samples]
    # float screen first; only near-fits go to the exact solver
    scale = float(max(abs(v) for v in values))
    y = np.array([float(v) for v in values]) / scale
    fcols = {m: np.array([float(x) for x in c]) / scale for m, c in cols.items()}
    for size in range(1, max_support + 1):
        fits = []
        for support in itertools.combinations(basis, size):
            a = np.stack([fcols[m] for m in support], axis=1)
            x, *_ = np.linalg.lstsq(a, y, rcond=None)
            if np.linalg.norm(a @ x - y) > 1e-6 * (1 + np.linalg.norm(y)):
                continue
            try:
                x = solve_exact([cols[m] for m in support], values)
            except FingerprintError:
                continue
            if x is not None and all(c != 0 for c in x):
                fits.append(list(zip(support, x)))
        if len(fits) == 1:
            return fits[0]
        if len(fits) > 1 and recheck is not None:
            held = [f for f in fits if recheck(f)]
            if held:
                return min(held, key=_fit_complexity)
        if len(fits) > 1:
            raise FingerprintError("basis deficient",
                                   f"{len(fits)} distinct fits of size {size} on the samples")
    raise FingerprintError("basis deficient", f"no fit with at most {max_support} monomials")


def _term_multidegree(g: DiagramGraph) -> Counter:
    return Counter(m.matrix for e in g.edges for m in e.markings)


def collect(pairs: Iterable) -> Decomposition:
    acc: dict = {}
    for mono, c in pairs:
        acc[mono] = acc.get(mono, Fraction(0)) + Fraction(c)
    return sorted(((m, c) for m, c in acc.items() if c != 0), key=lambda mc: _mono_key(mc[0]))


def _mono_key(m: TraceMonomial):
    return (len(m.factors), [_factor_key(f) for f in m.factors])


def fingerprint_decompose(e, symbols: Sequence[str], degree_bound: Optional[int] = None,
                          trials: int = 12, seed: int = 0, entry_range=DEFAULT_RANGE,
                          max_support: int = 3, which: str = "contract",
                          prefer_simplest: bool = False) -> Decomposition:
    """Write a closed 2-dimensional diagram or expression in tr/det monomials.

    Expressions are decomposed term by term (each term is crossing-free)
    and like monomials are collected.  Several minimal fits normally raise
    "basis deficient"; with ``prefer_simplest`` each is checked on fresh
    samples and the simplest survivor is returned instead.
    """
    if isinstance(e, DiagramGraph):
        e = DiagramExpression.of(e)
    if e.dim != 2:
        raise DiagramError(f"fingerprinting works in dimension 2, got {e.dim}")
    if e.terms and e.arity != 0:
        raise DiagramError("fingerprinting needs a closed diagram (arity 0)")
    if trials <= max_support:
        # any max_support columns would fit this many samples
        raise FingerprintError("insufficient samples", f"{trials} samples for supports up to {max_support}")
    samples = _samples(symbols, trials, seed, entry_range)
    out = []
    cache: dict = {}
    for coeff, g in e.terms:
        deg = _term_multidegree(g)
        bound = sum(deg.values()) if degree_bound is None else degree_bound
        if sum(deg.values()) > bound:
            raise FingerprintError("basis deficient", f"term degree exceeds bound {bound}")
        key = (g, bound)
        if key not in cache:
            basis = fingerprint_basis(symbols, bound, 2, deg)
            values = _values(g, samples, which)
            recheck = None
            if prefer_simplest:
                fresh = _samples(symbols, trials, seed, entry_range, offset=FRESH_OFFSET)
                fresh_values = _values(g, fresh, which)
                recheck = lambda fit: all(v == evaluate_decomposition(fit, mats)
                                          for v, mats in zip(fresh_values, fresh))
            cache[key] = _sparse_fit(values, basis, samples, max_support, recheck)
        out += [(m, coeff * c) for m, c in cache[key]]
    return collect(out)


def evaluate_decomposition(dec: Decomposition, mats: dict) -> Fraction:
    return sum((c * m.evaluate(mats) for m, c in dec), Fraction(0))


def check_decomposition(e, dec: Decomposition, symbols: Sequence[str], trials: int = 10, seed: int = 0,
                        entry_range=DEFAULT_RANGE, which: str = "contract") -> bool:
    """Re-evaluate on hold-out samples disjoint from the solve set."""
    if isinstance(e, DiagramGraph):
        e = DiagramExpression.of(e)
    samples = _samples(symbols, trials, seed, entry_range, offset=FRESH_OFFSET)
    values = _values(e, samples, which)
    return all(v == evaluate_decomposition(dec, mats) for v, mats in zip(values, samples))


def normalize(dec: Decomposition) -> Decomposition:
    """Scale so the first monomial (fewest factors) has coefficient 1."""
    if not dec:
        return []
    lead = dec[0][1]
    return [(m, c / lead) for m, c in dec]


def read_off_identity(t, symbols: Optional[Sequence[str]] = None, trials: int = 12, seed: int = 0) -> Decomposition:
    """Relation ``original - sum of binor terms = 0`` in tr/det monomials.

    An empty result means the relation is the tautology ``0 = 0``.
    """
    from .wiring import binor_expand, compile_wiring

    symbols = list(symbols or t.matrix_names())
    original = fingerprint_decompose(compile_wiring(t), symbols, trials=trials, seed=seed)
    expansion = fingerprint_decompose(binor_expand(t), symbols, trials=trials, seed=seed)
    return normalize(collect(original + [(m, -c) for m, c in expansion]))


def format_decomposition(dec: Decomposition) -> str:
    if not dec:
        return "0"
    parts = []
    for i, (m, c) in enumerate(dec):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else f"{mag}"
        body = f"{coef}{m}" if str(m) != "1" else f"{mag}"
        parts.append((sign, body))
    text = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        text += f" {sign} {body}"
    return text


def format_identity(dec: Decomposition) -> str:
    return f"{format_decomposition(dec)} = 0"


def parse_decomposition(text: str) -> Decomposition:
    """Inverse of :func:`format_decomposition` (used for golden files)."""
    text = text.strip()
    if text.endswith("= 0"):
        text = text[:-3].strip()
    if text == "0":
        return []
    tokens = text.replace(" - ", " -").replace(" + ", " +").split()
    out = []
    for tok in tokens:
        sign = -1 if tok.startswith("-") else 1
        tok = tok.lstrip("+-")
        idx = next((i for i, ch in enumerate(tok) if ch.isalpha()), len(tok))
        coef = Fraction(tok[:idx]) if idx else Fraction(1)
        out.append((TraceMonomial.parse(tok[idx:]), sign * coef))
    return collect(out)
