"""Truncated Hausdorff moment vectors: differences, membership, extension.

Membership in the moment body uses the classical pair of Hankel-type forms
on [0, 1]. For a vector (t_0, ..., t_N):

    N = 2m:    A = (t_{i+j})_{i,j<=m},    B = (t_{i+j+1} - t_{i+j+2})_{i,j<m}
    N = 2m+1:  A = (t_{i+j+1})_{i,j<=m},  B = (t_{i+j} - t_{i+j+1})_{i,j<=m}

The vector is interior iff both forms are positive definite, and a member
iff both are positive semidefinite. Rational inputs are decided exactly;
vectors holding irrational group elements are decided by interval
elimination on refining enclosures.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .arith import (
    DEFAULT_SIGN_BITS,
    Enclosure,
    GroupElement,
    enclose_bits,
    fmt,
    sign,
    simplify,
    to_fraction,
)
from .errors import NotAMomentVector, NotInterior, OutOfRange, PrecisionExhausted, TooShort


class MomentVector:
    """Immutable finite sequence (t_0, ..., t_N) with t_0 = 1."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Sequence):
        vals = tuple(simplify(to_fraction(e) if isinstance(e, str) else e) for e in entries)
        if not vals:
            raise TooShort("a moment vector needs at least one entry")
        if vals[0] != 1:
            raise NotAMomentVector(f"t(0) must be 1, got {vals[0]!r}")
        self._entries = vals

    @classmethod
    def parse(cls, text: str) -> "MomentVector":
        return cls([Fraction(tok.strip()) for tok in text.split(",") if tok.strip()])

    @property
    def entries(self) -> tuple:
        return self._entries

    @property
    def N(self) -> int:
        return len(self._entries) - 1

    @property
    def is_rational(self) -> bool:
        return all(isinstance(e, Fraction) for e in self._entries)

    def truncate(self, N: int) -> "MomentVector":
        return MomentVector(self._entries[: N + 1])

    def append(self, x) -> "MomentVector":
        return MomentVector(self._entries + (x,))

    def to_json(self) -> list:
        return [fmt(e) if isinstance(e, Fraction) else e.to_json() for e in self._entries]

    def __len__(self):
        return len(self._entries)

    def __getitem__(self, i):
        return self._entries[i]

    def __iter__(self):
        return iter(self._entries)

    def __eq__(self, other):
        if isinstance(other, MomentVector):
            return self._entries == other._entries
        return NotImplemented

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        return "MomentVector(" + ", ".join(map(str, self._entries)) + ")"


def as_moments(t) -> MomentVector:
    return t if isinstance(t, MomentVector) else MomentVector(t)


# --------------------------------------------------------------------------
# differences


def derivative(t) -> list:
    """Discrete derivative t'(k) = t(k) - t(k+1)."""
    vals = list(t)
    if len(vals) < 2:
        raise TooShort("derivative needs at least two entries")
    return [a - b for a, b in zip(vals, vals[1:])]


def iterated_difference(t, j: int, k: int):
    """t^{(j)}(k), computed by j rounds of differencing."""
    vals = list(t)
    if j < 0 or k < 0 or j + k >= len(vals):
        raise OutOfRange(f"t^({j})({k}) needs {j + k + 1} entries, have {len(vals)}")
    window = vals[k : k + j + 1]
    for _ in range(j):
        window = [a - b for a, b in zip(window, window[1:])]
    return window[0]


def difference_rows(t) -> list[list]:
    """rows[j][k] = t^{(j)}(k) for all j + k <= N."""
    rows = [list(t)]
    while len(rows[-1]) > 1:
        prev = rows[-1]
        rows.append([a - b for a, b in zip(prev, prev[1:])])
    return rows


def completely_monotone_prefix(t) -> bool:
    return all(sign(x) >= 0 for row in difference_rows(t) for x in row)


# --------------------------------------------------------------------------
# Hankel forms and exact pivots


def hankel_forms(entries: Sequence) -> tuple[list[list], list[list]]:
    """The (lower, upper) forms A and B for the given entries."""
    N = len(entries) - 1
    t = entries
    if N % 2 == 0:
        m = N // 2
        A = [[t[i + j] for j in range(m + 1)] for i in range(m + 1)]
        B = [[t[i + j + 1] - t[i + j + 2] for j in range(m)] for i in range(m)]
    else:
        m = (N - 1) // 2
        A = [[t[i + j + 1] for j in range(m + 1)] for i in range(m + 1)]
        B = [[t[i + j] - t[i + j + 1] for j in range(m + 1)] for i in range(m + 1)]
    return A, B


def leading_pivots(M: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """LDL pivots d_k/d_{k-1} of the leading principal minors.

    Fraction-free (Bareiss) elimination on the integer-scaled matrix;
    stops after the first zero minor, so a short list means singular.
    """
    n = len(M)
    if n == 0:
        return []
    D = 1
    for row in M:
        for x in row:
            D = math.lcm(D, Fraction(x).denominator)
    A = [[int(Fraction(x) * D) for x in row] for row in M]
    pivots = []
    prev = 1
    for k in range(n):
        akk = A[k][k]
        pivots.append(Fraction(akk, D * prev))
        if akk == 0:
            break
        for i in range(k + 1, n):
            aik = A[i][k]
            row_i, row_k = A[i], A[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return pivots


def interval_pivots(M: Sequence[Sequence[Enclosure]], bits: int) -> list[Enclosure]:
    """LDL pivots of an interval matrix; stops after a pivot not certified positive."""
    n = len(M)
    S = [list(row) for row in M]
    pivots = []
    for k in range(n):
        p = S[k][k]
        pivots.append(p)
        if not p.lo > 0:
            break
        for i in range(k + 1, n):
            f = (S[i][k] / p).rounded(bits)
            for j in range(k + 1, n):
                S[i][j] = (S[i][j] - f * S[k][j]).rounded(bits)
    return pivots


def _solve(M: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(M)
    aug = [list(M[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c] / aug[c][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


@dataclass(frozen=True)
class Witness:
    """A vector w with w^T M w < 0 for one of the two forms.

    ``violation`` is -w^T M w / |w|_1^2, a lower bound on how far the
    entries of the form must move (entrywise) to restore semidefiniteness.
    """

    form: str
    index: int
    value: object
    vector: tuple | None = None
    violation: Fraction | None = None


def psd_witness(M: Sequence[Sequence[Fraction]], form: str = "") -> Witness | None:
    """None if M is positive semidefinite, else a negative-direction witness."""
    n = len(M)
    M = [[Fraction(x) for x in row] for row in M]
    S = [row[:] for row in M]
    rest = list(range(n))
    done: list[int] = []

    def lift(u: dict[int, Fraction], index: int) -> Witness:
        w = [Fraction(0)] * n
        for i, c in u.items():
            w[i] = c
        if done:
            rhs = [-sum(M[p][r] * c for r, c in u.items()) for p in done]
            sol = _solve([[M[p][q] for q in done] for p in done], rhs)
            for p, v in zip(done, sol):
                w[p] = v
        value = sum(w[i] * M[i][j] * w[j] for i in range(n) for j in range(n))
        norm = sum(abs(x) for x in w)
        return Witness(form, index, value, tuple(w), -value / (norm * norm))

    while rest:
        neg = [i for i in rest if S[i][i] < 0]
        if neg:
            i = min(neg, key=lambda r: (S[r][r], r))
            return lift({i: Fraction(1)}, i)
        i = max(rest, key=lambda r: (S[r][r], -r))
        if S[i][i] == 0:
            for a in rest:
                for b in rest:
                    if a != b and S[a][b] != 0:
                        x = Fraction(-1 if S[a][b] > 0 else 1)
                        return lift({a: x, b: Fraction(1)}, a)
            return None
        rest.remove(i)
        for a in rest:
            f = S[a][i] / S[i][i]
            for b in rest:
                S[a][b] -= f * S[i][b]
        done.append(i)
    return None


# --------------------------------------------------------------------------
# verdicts


class Kind(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class InteriorCertificate:
    """Strictly positive pivots of both forms (Fractions or Enclosures)."""

    pivots_lower: tuple
    pivots_upper: tuple

    @property
    def margin(self) -> Fraction:
        vals = [p.lo if isinstance(p, Enclosure) else p for p in self.pivots_lower + self.pivots_upper]
        return min(vals)

    def to_json(self) -> dict:
        def enc(p):
            if isinstance(p, Enclosure):
                return {"lo": fmt(p.lo), "hi": fmt(p.hi)}
            return fmt(p)

        return {
            "pivots_lower": [enc(p) for p in self.pivots_lower],
            "pivots_upper": [enc(p) for p in self.pivots_upper],
        }


@dataclass(frozen=True)
class Verdict:
    kind: Kind
    certificate: InteriorCertificate | None = None
    witness: Witness | None = None

    @property
    def is_interior(self) -> bool:
        return self.kind is Kind.INTERIOR

    @property
    def is_outside(self) -> bool:
        return self.kind is Kind.OUTSIDE


def membership(t, max_bits: int = DEFAULT_SIGN_BITS) -> Verdict:
    """Decide whether t lies in the interior, on the boundary, or outside."""
    t = as_moments(t)
    if t.is_rational:
        return _membership_exact(t.entries)
    return _membership_enclosed(t.entries, max_bits)


def _membership_exact(entries) -> Verdict:
    A, B = hankel_forms(entries)
    pa, pb = leading_pivots(A), leading_pivots(B)
    if len(pa) == len(A) and len(pb) == len(B) and all(p > 0 for p in pa + pb):
        return Verdict(Kind.INTERIOR, InteriorCertificate(tuple(pa), tuple(pb)))
    wits = [w for w in (psd_witness(A, "lower"), psd_witness(B, "upper")) if w is not None]
    if wits:
        return Verdict(Kind.OUTSIDE, witness=max(wits, key=lambda w: w.violation))
    return Verdict(Kind.BOUNDARY)


def _enclosed_forms(entries, bits):
    encs = [enclose_bits(e, bits + 4) for e in entries]
    return hankel_forms(encs)


def _membership_enclosed(entries, max_bits) -> Verdict:
    bits = 32
    while bits <= max_bits:
        A, B = _enclosed_forms(entries, bits)
        pa = interval_pivots(A, bits + 16)
        pb = interval_pivots(B, bits + 16)
        if len(pa) == len(A) and len(pb) == len(B) and all(p.lo > 0 for p in pa + pb):
            return Verdict(Kind.INTERIOR, InteriorCertificate(tuple(pa), tuple(pb)))
        for form, piv in (("lower", pa), ("upper", pb)):
            last = piv[-1] if piv else None
            if last is not None and last.hi < 0:
                return Verdict(Kind.OUTSIDE, witness=Witness(form, len(piv) - 1, last))
        bits *= 2
    raise PrecisionExhausted(f"membership undecided at {max_bits} bits (boundary point?)")


# --------------------------------------------------------------------------
# extension intervals


@dataclass(frozen=True)
class ExtensionInterval:
    """Open interval of values s keeping (t, s) interior.

    Endpoints are exact Fractions for rational vectors and Enclosures of
    the (irrational) endpoints otherwise.
    """

    lo: object
    hi: object

    def inner(self) -> tuple[Fraction, Fraction]:
        """A rational open interval contained in the true one."""
        lo = self.lo.hi if isinstance(self.lo, Enclosure) else self.lo
        hi = self.hi.lo if isinstance(self.hi, Enclosure) else self.hi
        return lo, hi

    @property
    def midpoint(self) -> Fraction:
        lo, hi = self.inner()
        return (lo + hi) / 2

    def __contains__(self, s) -> bool:
        lo, hi = self.inner()
        return lo < s < hi


def extension_interval(t, max_bits: int = DEFAULT_SIGN_BITS, check: bool = True) -> ExtensionInterval:
    """Exact interval of next terms s with (t_0..t_N, s) interior.

    The new term only enters the bottom-right corner of each form, so the
    bounds are Schur complements against the leading blocks: computed as
    the last LDL pivot with the new term set to zero. ``check=False``
    skips the interiority test for callers that already hold a certificate.
    """
    t = as_moments(t)
    if check and not membership(t, max_bits).is_interior:
        raise NotInterior(f"{t!r} is not interior")
    ext = list(t.entries) + [Fraction(0)]
    if t.is_rational:
        A, B = hankel_forms(ext)
        return ExtensionInterval(-leading_pivots(A)[-1], leading_pivots(B)[-1])
    bits = 32
    while bits <= max_bits:
        A, B = _enclosed_forms(ext, bits)
        pa = interval_pivots(A, bits + 16)
        pb = interval_pivots(B, bits + 16)
        if len(pa) == len(A) and len(pb) == len(B):
            lo, hi = -pa[-1], pb[-1]
            gap = hi.lo - lo.hi
            if gap > 0 and max(lo.width, hi.width) * 16 <= gap:
                return ExtensionInterval(lo, hi)
        bits *= 2
    raise PrecisionExhausted(f"extension interval unresolved at {max_bits} bits")


class Classification(str, enum.Enum):
    TRIVIAL = "trivial"
    NONTRIVIAL = "nontrivial"


def classify(t) -> Classification:
    """Non-trivial iff t(2) < t(1); trivial sequences live on {0, 1}."""
    t = as_moments(t)
    if len(t) < 3:
        raise TooShort("classification needs t(0), t(1), t(2)")
    if membership(t.truncate(2)).is_outside or membership(t).is_outside:
        raise NotAMomentVector(f"{t!r} is not a moment vector")
    return Classification.NONTRIVIAL if sign(t[1] - t[2]) > 0 else Classification.TRIVIAL
