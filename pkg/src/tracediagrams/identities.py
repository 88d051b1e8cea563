"""Checking diagram identities and the experiments built on them."""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import oracles
from .catalog import IdentityCase, char_coeff_diagram, identity_suite, pfaffian_candidate
from .core import BindingError, DiagramError, DiagramExpression, Environment, basis_vector
from .evaluator import Tensor, evaluate, evaluate_expression
from .sampling import DEFAULT_RANGE, random_bindings, random_matrix, random_vector, trial_rng

HOLDS, FAILS = "holds", "fails"


@dataclass
class IdentityReport:
    name: str
    strategy: str
    trials: int
    seed: Optional[int]
    status: str
    counterexample: Optional[dict] = None
    elapsed: float = 0.0
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    def row(self) -> str:
        seed = "-" if self.seed is None else str(self.seed)
        return f"{self.name:<28} {self.strategy:<10} {self.trials:>6} {seed:>5} {self.status:<6} {self.elapsed:7.3f}s"


def _as_expr(x) -> DiagramExpression:
    return x if isinstance(x, DiagramExpression) else DiagramExpression.of(x)


def _arity(lhs: DiagramExpression, rhs: DiagramExpression) -> int:
    la = lhs.arity
    ra = rhs.arity if rhs.terms else (rhs.arity_hint if rhs.arity_hint is not None else la)
    if not lhs.terms and lhs.arity_hint is None:
        la = ra
    if la != ra:
        raise DiagramError(f"arity mismatch: lhs has {la} outputs, rhs has {ra}")
    return la


def _vector_names(e: DiagramExpression) -> set[str]:
    return {name for _, g in e.terms for name in g.vector_names()}


def _matrix_names(e: DiagramExpression) -> set[str]:
    return {name for _, g in e.terms for name in g.matrix_names()}


def _compare(lhs, rhs, env, arity, which):
    a = evaluate_expression(lhs, env, which, arity)
    b = evaluate_expression(rhs, env, which, arity)
    return a, b


def _tensor_text(t: Tensor):
    if t.arity == 0:
        return str(t.scalar)
    return [[*idx, str(v)] for idx, v in t.items() if v != 0]


def verify_on_basis(lhs, rhs, vector_slots: Sequence[str], env0: Environment, name: str = "identity",
                    which: str = "contract") -> IdentityReport:
    """Compare on every tuple of standard basis vectors for the listed slots."""
    lhs, rhs = _as_expr(lhs), _as_expr(rhs)
    arity = _arity(lhs, rhs)
    present = _vector_names(lhs) | _vector_names(rhs)
    for slot in vector_slots:
        if slot not in present:
            raise DiagramError(f"slot {slot!r} not found in either side")
    n = env0.dim
    start = time.perf_counter()
    count = 0
    for labels in itertools.product(range(1, n + 1), repeat=len(vector_slots)):
        vecs = {s: basis_vector(n, i) for s, i in zip(vector_slots, labels)}
        env = env0.bind(vectors=vecs)
        a, b = _compare(lhs, rhs, env, arity, which)
        count += 1
        if a != b:
            return IdentityReport(name, "basis", count, None, FAILS,
                                  {"vectors": {s: list(v) for s, v in vecs.items()},
                                   "lhs": _tensor_text(a), "rhs": _tensor_text(b)},
                                  time.perf_counter() - start)
    return IdentityReport(name, "basis", count, None, HOLDS, None, time.perf_counter() - start)


def _trial(args):
    lhs, rhs, arity, n, symbols, vector_symbols, derive, seed, t, entry_range, which = args
    rng = trial_rng(seed, t)
    mats = random_bindings(symbols, n, rng, entry_range)
    vecs = {name: random_vector(rng, n, entry_range) for name in sorted(vector_symbols)}
    frac = {k: [[Fraction(x) for x in r] for r in m] for k, m in mats.items()}
    all_mats = dict(mats)
    for name, fn in (derive or {}).items():
        all_mats[name] = fn(frac)
    env = Environment(n, all_mats, vecs)
    a, b = _compare(lhs, rhs, env, arity, which)
    if a == b:
        return None
    return {"trial": t, "matrices": mats, "vectors": vecs, "lhs": _tensor_text(a), "rhs": _tensor_text(b)}


def verify_randomized(lhs, rhs, matrix_symbols: Sequence[str], trials: int = 25, seed: int = 0,
                      entry_range=DEFAULT_RANGE, vector_symbols: Sequence[str] = (),
                      derive: Optional[Mapping] = None, dim: Optional[int] = None,
                      name: str = "identity", workers: int = 1, which: str = "contract") -> IdentityReport:
    """Compare on seeded random integer bindings, exactly."""
    lhs, rhs = _as_expr(lhs), _as_expr(rhs)
    arity = _arity(lhs, rhs)
    n = dim or lhs.dim or rhs.dim
    if n is None:
        raise DiagramError("cannot infer the dimension of an empty identity")
    known = set(matrix_symbols) | set(derive or {})
    for sym in sorted(_matrix_names(lhs) | _matrix_names(rhs)):
        if sym not in known:
            raise BindingError(f"unknown matrix symbol {sym!r}")
    for sym in sorted(_vector_names(lhs) | _vector_names(rhs)):
        if sym not in vector_symbols:
            raise BindingError(f"unknown vector symbol {sym!r}")
    jobs = [(lhs, rhs, arity, n, tuple(matrix_symbols), tuple(vector_symbols), derive, seed, t,
             tuple(entry_range), which) for t in range(trials)]
    start = time.perf_counter()
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_trial(job))
            if results[-1] is not None:
                break
    failure = next((r for r in results if r is not None), None)
    return IdentityReport(name, "randomized", trials, seed, FAILS if failure else HOLDS, failure,
                          time.perf_counter() - start)


def verify_case(case: IdentityCase, seed: int = 0, trials: Optional[int] = None, workers: int = 1,
                which: str = "contract") -> IdentityReport:
    if case.strategy == "basis":
        report = verify_on_basis(case.lhs, case.rhs, case.vector_slots, Environment(case.dim), case.name, which)
    else:
        report = verify_randomized(case.lhs, case.rhs, case.matrix_symbols, trials or case.trials, seed,
                                   vector_symbols=case.vector_slots, derive=case.derive, dim=case.dim,
                                   name=case.name, workers=workers, which=which)
    report.note = case.note
    return report


def run_paper_suite(seed: int = 0, workers: int = 1, cases: Optional[Sequence[IdentityCase]] = None,
                    trials: Optional[int] = None) -> list[IdentityReport]:
    cases = identity_suite() if cases is None else cases
    return [verify_case(c, seed, trials, workers) for c in cases]


# -- characteristic coefficients ----------------------------------------------

class RatioNotConstant(DiagramError):
    pass


def char_coeff_ratios(n: int, k: int, trials: int = 12, seed: int = 0, entry_range=DEFAULT_RANGE,
                      which: str = "contract") -> list[Fraction]:
    g = char_coeff_diagram(n, k)
    ratios = []
    for t in range(trials):
        a = random_matrix(trial_rng(seed, t), n, entry_range)
        ck = oracles.char_poly_coeffs(a)[k]
        if ck == 0:
            continue
        value = Fraction(evaluate(g, Environment(n, {"A": a}), which).scalar)
        ratios.append(value / ck)
    return ratios


def char_coeff_constant(n: int, k: int, trials: int = 12, seed: int = 0, entry_range=DEFAULT_RANGE,
                        which: str = "contract") -> Fraction:
    """The constant c with diagram(n, k) = c * (sum of principal k-minors)."""
    if not 0 <= k <= n <= 4:
        raise DiagramError(f"need 0 <= k <= n <= 4, got n={n}, k={k}")
    ratios = char_coeff_ratios(n, k, trials, seed, entry_range, which)
    if not ratios:
        raise DiagramError(f"all samples degenerate for n={n}, k={k}")
    if len(set(ratios)) != 1:
        raise RatioNotConstant(f"ratio not constant for n={n}, k={k}: {sorted(set(ratios))}")
    return ratios[0]


GOLDEN_DIR = Path(__file__).resolve().parent / "golden"
CHAR_COEFF_FILE = "char_coeff_constants.txt"
FINGERPRINT_FILE = "fingerprints.txt"


def golden_path(name: str) -> Path:
    return GOLDEN_DIR / name


def read_char_coeff_golden(path: Optional[Path] = None) -> dict[tuple[int, int], Fraction]:
    path = path or golden_path(CHAR_COEFF_FILE)
    out = {}
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            n, k, c = line.split()
            out[(int(n), int(k))] = Fraction(c)
    return out


def write_char_coeff_golden(path: Optional[Path] = None, trials: int = 12, seed: int = 0) -> dict:
    path = path or golden_path(CHAR_COEFF_FILE)
    values = {(n, k): char_coeff_constant(n, k, trials, seed) for n in (2, 3, 4) for k in range(n + 1)}
    lines = ["# n k constant: closed two-node diagram with k marked edges = constant * c_k(A)"]
    lines += [f"{n} {k} {c}" for (n, k), c in sorted(values.items())]
    path.write_text("\n".join(lines) + "\n")
    return values


# -- Pfaffian experiment ------------------------------------------------------

@dataclass
class PfaffianReport:
    n: int
    pairing: object
    reverse: bool
    samples: list = field(default_factory=list)  # (candidate value, Pf(A - A^T))
    kappa: Optional[Fraction] = None
    fits: bool = False

    def summary(self) -> str:
        if self.fits:
            verdict = f"candidate = {self.kappa} * Pf(A - A^T) on all {len(self.samples)} samples"
        else:
            ratios = sorted({v / p for v, p in self.samples if p != 0})
            verdict = f"no constant fits; observed ratios {[str(r) for r in ratios[:6]]}"
        return f"n={self.n} pairing={self.pairing} reverse={self.reverse}: {verdict}"


def pfaffian_experiment(n: int, trials: int = 20, seed: int = 0, pairing="nested", reverse: bool = False,
                        symmetric: bool = False, entry_range=DEFAULT_RANGE) -> PfaffianReport:
    """Test whether the one-node diagram is a constant multiple of Pf(A - A^T)."""
    if n % 2 or n > 6:
        raise DiagramError(f"experiment needs even n <= 6, got {n}")
    g = pfaffian_candidate(n, pairing=pairing, reverse=reverse)
    report = PfaffianReport(n, pairing, reverse)
    for t in range(trials):
        a = random_matrix(trial_rng(seed, t), n, entry_range)
        if symmetric:
            a = [[a[min(i, j)][max(i, j)] for j in range(n)] for i in range(n)]
        value = Fraction(evaluate(g, Environment(n, {"A": a})).scalar)
        skew = [[Fraction(a[i][j] - a[j][i]) for j in range(n)] for i in range(n)]
        report.samples.append((value, oracles.pfaffian(skew)))
    ratios = {v / p for v, p in report.samples if p != 0}
    zeros_ok = all(v == 0 for v, p in report.samples if p == 0)
    if zeros_ok and len(ratios) == 1:
        report.kappa = ratios.pop()
        report.fits = True
    elif zeros_ok and not ratios:
        report.kappa = None
        report.fits = all(v == 0 for v, _ in report.samples)
    return report


def predicted_pfaffian_ratio(n: int) -> int:
    """(n/2)! times the sign of reading the nested pairing in port order."""
    m = n // 2
    seq = [x for i in range(m) for x in (i, n - 1 - i)]
    inv = sum(1 for i in range(n) for j in range(i + 1, n) if seq[i] > seq[j])
    return math.factorial(m) * (-1) ** inv


# -- the closed C,D,A,B,B diagram ---------------------------------------------

@dataclass
class TraceDetReport:
    decomposition: list
    closed_form: str
    checked: int
    agrees: bool

    def summary(self) -> str:
        from .fingerprint import format_decomposition

        verdict = "agrees" if self.agrees else "DISAGREES"
        return (f"solver: {format_decomposition(self.decomposition)}\n"
                f"closed form: {self.closed_form} ({verdict} on {self.checked} fresh samples)")


def _inverse2(m):
    d = oracles.det(m)
    return [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]


def cdabb_closed_form(mats) -> Fraction:
    """det(AB) * tr(D C A^-1) for 2x2 bindings with A invertible."""
    a = [[Fraction(x) for x in r] for r in mats["A"]]
    ab = oracles.matmul(a, mats["B"])
    word = oracles.word_product([mats["D"], mats["C"], _inverse2(a)], 2)
    return oracles.det(ab) * oracles.trace(word)


def cdabb_experiment(trials: int = 12, seed: int = 0, checks: int = 10) -> TraceDetReport:
    """Decompose the C,D,A,B,B closure and compare with det(AB) tr(DCA^-1)."""
    from .catalog import CDABB_TERM
    from .fingerprint import fingerprint_decompose
    from .sampling import FRESH_OFFSET
    from .wiring import compile_wiring

    g = compile_wiring(CDABB_TERM)
    dec = fingerprint_decompose(g, "ABCD", trials=trials, seed=seed, prefer_simplest=True)
    agrees, checked, t = True, 0, 0
    while checked < checks:
        mats = random_bindings("ABCD", 2, trial_rng(seed, 2 * FRESH_OFFSET + t))
        t += 1
        if oracles.det(mats["A"]) == 0:
            continue
        checked += 1
        value = Fraction(evaluate(g, Environment(2, mats)).scalar)
        agrees &= value == cdabb_closed_form(mats)
    return TraceDetReport(dec, "det(AB)tr(DCA^-1)", checked, agrees)


# -- golden files ---------------------------------------------------------------

def fingerprint_records(seed: int = 0) -> dict[str, str]:
    """Read-off identities and decompositions stored in the golden file."""
    from .catalog import CDABB_TERM
    from .fingerprint import fingerprint_decompose, format_decomposition, format_identity, read_off_identity
    from .wiring import compile_wiring, ladder

    records = {}
    for name, symbols in (("ladder-AB", "AB"), ("ladder-ABC", "ABC"), ("ladder-ABCD", "ABCD")):
        records[name] = format_identity(read_off_identity(ladder(list(symbols)), seed=seed))
    g = compile_wiring(CDABB_TERM)
    records["closure-CDABB"] = format_decomposition(
        fingerprint_decompose(g, "ABCD", seed=seed, prefer_simplest=True))
    return records


def read_fingerprint_golden(path: Optional[Path] = None) -> dict[str, str]:
    path = path or golden_path(FINGERPRINT_FILE)
    out = {}
    for line in path.read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            name, _, text = line.partition(":")
            out[name.strip()] = text.strip()
    return out


def write_fingerprint_golden(path: Optional[Path] = None, seed: int = 0) -> dict[str, str]:
    path = path or golden_path(FINGERPRINT_FILE)
    records = fingerprint_records(seed)
    lines = ["# name: relation read off by the fingerprint solver (exact rationals)"]
    lines += [f"{k}: {v}" for k, v in records.items()]
    path.write_text("\n".join(lines) + "\n")
    return records


def regenerate_golden() -> list[Path]:
    GOLDEN_DIR.mkdir(exist_ok=True)
    write_char_coeff_golden()
    write_fingerprint_golden()
    return [golden_path(CHAR_COEFF_FILE), golden_path(FINGERPRINT_FILE)]
