"""Locally constant functions on the Cantor set and the GICAR embedding certificate.

A cylinder function is stored on a finite partition of {0,1}^N into
cylinders, given as a complete prefix code of binary words. A value on the
cylinder of a word with a zeros and b ones is admissible iff it is an
integer multiple of 1/(2^a 3^b); these per-cylinder lattices make up the
ordered K_0-group of the infinite tensor product of M_2 + M_3.

``build_embedding(N)`` chooses g_0 = 1, g_1, ..., g_N cylinder by cylinder
so that (g_0(x), ..., g_n(x)) is an interior moment vector for every x and
every n, refining a cylinder only when its lattice misses the required
open interval. ``verify_embedding`` re-derives every claim from scratch.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .arith import fmt, nearest_numerator, to_fraction
from .errors import DepthCapExceeded, RecurrenceError
from .moments import InteriorCertificate, extension_interval, hankel_forms, leading_pivots
from .pascal import PascalTable, build_table

DEFAULT_DEPTH_CAP = 40


def depth_cap_from_env(default: int = DEFAULT_DEPTH_CAP) -> int:
    raw = os.environ.get("MOMENTLAB_DEPTH_CAP")
    return int(raw) if raw else default


def _check_word(w: str) -> None:
    if any(c not in "01" for c in w):
        raise ValueError(f"cylinder word {w!r} is not binary")


def is_complete_prefix_code(words: Iterable[str]) -> bool:
    words = list(words)
    if len(set(words)) != len(words):
        return False
    kraft = sum(Fraction(1, 1 << len(w)) for w in words)
    if kraft != 1:
        return False
    ws = set(words)
    return not any(w[:i] in ws for w in words for i in range(len(w)))


def common_partition(*partitions: Iterable[str]) -> list[str]:
    """Coarsest common refinement of complete prefix codes."""
    words = set()
    for p in partitions:
        words.update(p)
    inner = {w[:i] for w in words for i in range(len(w))}
    return sorted(w for w in words if w not in inner)


class CylinderFunction:
    """Locally constant rational function on the Cantor set."""

    __slots__ = ("_leaves",)

    def __init__(self, leaves: Mapping[str, Fraction], validate: bool = True):
        vals = {w: to_fraction(v) for w, v in leaves.items()}
        if validate:
            for w in vals:
                _check_word(w)
            if not is_complete_prefix_code(vals):
                raise ValueError("cylinder words do not partition the Cantor set")
        self._leaves = vals

    @classmethod
    def constant(cls, v) -> "CylinderFunction":
        return cls({"": v})

    @property
    def depth(self) -> int:
        return max(len(w) for w in self._leaves)

    @property
    def partition(self) -> list[str]:
        return sorted(self._leaves)

    def leaves(self) -> dict[str, Fraction]:
        return dict(self._leaves)

    def values(self) -> list[Fraction]:
        return list(self._leaves.values())

    def __call__(self, word: str) -> Fraction:
        """Value on the cylinder of ``word`` (which must lie inside one leaf)."""
        for i in range(len(word) + 1):
            v = self._leaves.get(word[:i])
            if v is not None:
                return v
        raise ValueError(f"function is not constant on cylinder {word!r}")

    def refine(self, partition: Iterable[str]) -> "CylinderFunction":
        return CylinderFunction({w: self(w) for w in partition}, validate=False)

    def at_depth(self, d: int) -> dict[str, Fraction]:
        """Values on all 2^d words of length d."""
        if d < self.depth:
            raise ValueError(f"depth {d} is coarser than the function's depth {self.depth}")
        words = [""]
        for _ in range(d):
            words = [w + c for w in words for c in "01"]
        return {w: self(w) for w in words}

    def _combine(self, other, op) -> "CylinderFunction":
        if not isinstance(other, CylinderFunction):
            other = CylinderFunction.constant(other)
        part = common_partition(self._leaves, other._leaves)
        return CylinderFunction({w: op(self(w), other(w)) for w in part}, validate=False)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return CylinderFunction.constant(other) - self

    def __neg__(self):
        return CylinderFunction({w: -v for w, v in self._leaves.items()}, validate=False)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CylinderFunction.constant(other)
        if not isinstance(other, CylinderFunction):
            return NotImplemented
        part = common_partition(self._leaves, other._leaves)
        return all(self(w) == other(w) for w in part)

    __hash__ = None

    def to_json(self) -> list[dict]:
        return [{"w": w, "value": fmt(v)} for w, v in sorted(self._leaves.items())]

    @classmethod
    def from_json(cls, items: list[dict]) -> "CylinderFunction":
        return cls({it["w"]: Fraction(it["value"]) for it in items})

    def __repr__(self):
        return f"CylinderFunction({len(self._leaves)} cylinders, depth {self.depth})"


# --------------------------------------------------------------------------
# lattices and selection


def lattice_spacing(word: str) -> Fraction:
    a = word.count("0")
    b = len(word) - a
    return Fraction(1, 2**a * 3**b)


def in_lattice(value, word: str) -> bool:
    a = word.count("0")
    return (2**a * 3 ** (len(word) - a)) % to_fraction(value).denominator == 0


def select_in_intervals(intervals: Mapping[str, tuple], depth_cap: int | None = None) -> CylinderFunction:
    """Lattice-admissible function strictly inside each cylinder's interval.

    A cylinder is split only when its lattice has no point strictly inside
    the interval; the point nearest the interval midpoint is taken, ties
    toward the smaller value.
    """
    cap = depth_cap_from_env() if depth_cap is None else depth_cap
    out: dict[str, Fraction] = {}
    stack = [(w, to_fraction(lo), to_fraction(hi)) for w, (lo, hi) in intervals.items()]
    while stack:
        w, lo, hi = stack.pop()
        if not lo < hi:
            raise ValueError(f"empty interval on cylinder {w!r}")
        a = w.count("0")
        q = 2**a * 3 ** (len(w) - a)
        p = nearest_numerator(q, lo, hi, (lo + hi) / 2)
        if p is not None:
            out[w] = Fraction(p, q)
            continue
        if len(w) >= cap:
            raise DepthCapExceeded(f"cylinder {w!r} reached depth cap {cap}")
        stack.append((w + "1", lo, hi))
        stack.append((w + "0", lo, hi))
    return CylinderFunction(out, validate=False)


# --------------------------------------------------------------------------
# the embedding certificate


def _key(vals) -> tuple:
    # Fraction hashing is slow; integer pairs make cheap memo keys
    return tuple((x.numerator, x.denominator) for x in vals)


def _walk(maps, max_depth: int, required: int | None = None) -> dict[str, tuple]:
    """Words of the common partition of the first ``required`` prefix-keyed
    maps, with one value per map (None where a map has no entry on or above
    the word; the remaining maps are looked up but never force a split)."""
    required = len(maps) if required is None else required
    out: dict[str, tuple] = {}
    stack = [("", [None] * len(maps))]
    while stack:
        w, known = stack.pop()
        vals = [v if v is not None else m.get(w) for v, m in zip(known, maps)]
        if len(w) >= max_depth or all(v is not None for v in vals[:required]):
            out[w] = tuple(vals)
        else:
            stack.append((w + "1", vals))
            stack.append((w + "0", vals))
    return out


def leaf_vectors(functions) -> dict[str, tuple]:
    """Map each word of the common partition to (f(w) for f in functions)."""
    return _walk([f._leaves for f in functions], max(f.depth for f in functions))


def _certificate(vals: tuple) -> InteriorCertificate | None:
    A, B = hankel_forms(vals)
    pa, pb = leading_pivots(A), leading_pivots(B)
    if len(pa) == len(A) and len(pb) == len(B) and all(p > 0 for p in pa + pb):
        return InteriorCertificate(tuple(pa), tuple(pb))
    return None


@dataclass(frozen=True)
class EmbeddingCertificate:
    """Functions g_0..g_N with per-cylinder interiority certificates.

    ``certificates[n]`` maps each cylinder of g_n's partition to the
    certificate of (g_0, ..., g_n) there; deeper cylinders inherit the
    certificate of their ancestor.
    """

    N: int
    functions: tuple[CylinderFunction, ...]
    certificates: tuple[dict, ...] = field(default=(), compare=False)

    @property
    def partition(self) -> list[str]:
        return common_partition(*(f.partition for f in self.functions))

    @property
    def depth(self) -> int:
        return max(f.depth for f in self.functions)

    def vectors(self) -> dict[str, tuple]:
        return leaf_vectors(self.functions)

    def vector(self, word: str) -> tuple[Fraction, ...]:
        return tuple(f(word) for f in self.functions)

    def table(self, word: str) -> PascalTable:
        return build_table(self.vector(word), self.N)

    def certificate(self, word: str, n: int) -> InteriorCertificate | None:
        level = self.certificates[n] if n < len(self.certificates) else {}
        for i in range(len(word) + 1):
            c = level.get(word[:i])
            if c is not None:
                return c
        return None

    def to_json(self, violations: list | None = None) -> dict:
        return {
            "N": self.N,
            "depth": self.depth,
            "functions": [{"n": n, "cylinders": f.to_json()} for n, f in enumerate(self.functions)],
            "violations": violations or [],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EmbeddingCertificate":
        funcs = tuple(CylinderFunction.from_json(f["cylinders"]) for f in obj["functions"])
        N = int(obj["N"])
        if len(funcs) != N + 1:
            raise ValueError(f"expected {N + 1} functions, found {len(funcs)}")
        return cls(N, funcs)


def build_embedding(N: int, depth_cap: int | None = None) -> EmbeddingCertificate:
    """Choose g_0..g_N level by level; every cylinder carries an interior vector."""
    if N < 0:
        raise ValueError("N must be non-negative")
    funcs = [CylinderFunction.constant(1)]
    levels: list[dict] = []
    for n in range(N + 1):
        memo: dict[tuple, tuple] = {}
        certs, intervals = {}, {}
        for w, vals in leaf_vectors(funcs).items():
            key = _key(vals)
            if key not in memo:
                cert = _certificate(vals)
                if cert is None:
                    raise AssertionError(f"cylinder {w!r} lost interiority at level {n}")
                ext = extension_interval(vals, check=False) if n < N else None
                memo[key] = (cert, ext)
            cert, ext = memo[key]
            certs[w] = cert
            if ext is not None:
                intervals[w] = (ext.lo, ext.hi)
        levels.append(certs)
        if n < N:
            funcs.append(select_in_intervals(intervals, depth_cap))
    return EmbeddingCertificate(N, tuple(funcs), tuple(levels))


@dataclass
class EmbeddingReport:
    ok: bool
    violations: list[dict]

    def __bool__(self):
        return self.ok


def verify_embedding(cert: EmbeddingCertificate, max_violations: int = 100) -> EmbeddingReport:
    """Re-check every invariant of an embedding certificate.

    unit: g_0 is the constant 1; lattice: each value is a multiple of its
    cylinder's spacing; interior: every prefix of every cylinder vector has
    strictly positive pivots; non-trivial: g_2 < g_1; recurrence/positivity:
    the cylinder's Pascal table is exact and strictly positive; certificate:
    stored pivots (when present) match the recomputed ones.

    Checking stops once ``max_violations`` have been collected, so
    ``max_violations=1`` gives a fail-fast yes/no answer.
    """
    violations: list[dict] = []

    class _Full(Exception):
        pass

    def report(kind, **where):
        violations.append({"kind": kind, **where})
        if len(violations) >= max_violations:
            raise _Full

    try:
        _verify(cert, report)
    except _Full:
        pass
    return EmbeddingReport(not violations, violations)


def _verify(cert: EmbeddingCertificate, report) -> None:
    funcs = cert.functions
    N = cert.N
    if len(funcs) != N + 1:
        report("shape", detail=f"{len(funcs)} functions for N={N}")
        return
    if any(v != 1 for v in funcs[0].values()):
        report("unit", n=0)
    for n, f in enumerate(funcs):
        for w, v in sorted(f.leaves().items()):
            if not in_lattice(v, w):
                report("lattice", n=n, w=w, value=fmt(v))

    levels = list(cert.certificates[: N + 1])
    levels += [{}] * (N + 1 - len(levels))
    maps = [f._leaves for f in funcs] + levels
    depth = max(f.depth for f in funcs)
    prefix_memo: dict[tuple, InteriorCertificate | None] = {}
    memo: dict[tuple, list] = {}

    for w, row in sorted(_walk(maps, depth, N + 1).items()):
        vals, stored = row[: N + 1], row[N + 1 :]
        key = (_key(vals), tuple(map(id, stored)))
        if key not in memo:
            memo[key] = _vector_problems(vals, stored, prefix_memo)
        for kind, n in memo[key]:
            report(kind, n=n, w=w)


def _vector_problems(vals: tuple, stored: tuple, prefix_memo: dict) -> list[tuple[str, int]]:
    N = len(vals) - 1
    problems = []
    fresh = {}
    for n in range(1, N + 1):
        k = _key(vals[: n + 1])
        if k not in prefix_memo:
            prefix_memo[k] = _certificate(vals[: n + 1])
        fresh[n] = prefix_memo[k]
        if fresh[n] is None:
            problems.append(("interior", n))
    if N >= 2 and not vals[2] < vals[1]:
        problems.append(("non-trivial", 2))
    try:
        table = build_table(vals, N)
        if not all(x > 0 for _, _, x in table.entries()):
            problems.append(("positivity", N))
    except RecurrenceError:
        problems.append(("recurrence", N))
    for n in range(1, N + 1):
        if stored[n] is not None and stored[n] != fresh[n]:
            problems.append(("certificate", n))
    return problems
