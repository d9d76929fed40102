"""The Pascal-triangle dimension group: tables g(n, k), homomorphism checks, traces.

A sequence g with g(0) = 1 determines the triangular array

    g(n, k) = g^{(n-k)}(k),        0 <= k <= n,

which satisfies g(n+1, k) + g(n+1, k+1) = g(n, k) and g(n, n) = g(n).
Entries may be Fractions, GroupElements or CylinderFunctions; anything
with exact + and - works.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .arith import GroupElement, rational_rank, sign
from .errors import NotAMomentVector, OutOfRange, RecurrenceError, TooShort
from .moments import as_moments, membership


@dataclass(frozen=True)
class PascalTable:
    depth: int
    rows: tuple[tuple, ...]  # rows[n][k] = g(n, k)

    def __call__(self, n: int, k: int):
        if not 0 <= k <= n <= self.depth:
            raise OutOfRange(f"g({n},{k}) outside a depth-{self.depth} table")
        return self.rows[n][k]

    @property
    def diagonal(self) -> list:
        return [self.rows[n][n] for n in range(self.depth + 1)]

    def entries(self):
        for n, row in enumerate(self.rows):
            for k, x in enumerate(row):
                yield n, k, x

    def check_recurrence(self) -> None:
        for n in range(self.depth):
            for k in range(n + 1):
                if self.rows[n + 1][k] + self.rows[n + 1][k + 1] != self.rows[n][k]:
                    raise RecurrenceError(f"g({n + 1},{k}) + g({n + 1},{k + 1}) != g({n},{k})")


def build_table(g: Sequence, N: int) -> PascalTable:
    """Tabulate g(n, k) = g^{(n-k)}(k) for n <= N and assert the recurrence."""
    vals = list(g)
    if len(vals) < N + 1:
        raise TooShort(f"need {N + 1} terms, have {len(vals)}")
    vals = vals[: N + 1]
    # diffs[j][k] = g^{(j)}(k)
    diffs = [vals]
    for _ in range(N):
        prev = diffs[-1]
        diffs.append([a - b for a, b in zip(prev, prev[1:])])
    rows = tuple(tuple(diffs[n - k][k] for k in range(n + 1)) for n in range(N + 1))
    table = PascalTable(N, rows)
    table.check_recurrence()
    return table


def _sign_summary(x) -> tuple[bool, bool, bool]:
    """(nonnegative, strictly positive, nonzero) for one entry."""
    values = getattr(x, "values", None)
    if values is not None and not isinstance(x, (Fraction, GroupElement)):
        signs = [sign(v) for v in values()]
        return all(s >= 0 for s in signs), all(s > 0 for s in signs), any(s != 0 for s in signs)
    s = sign(x)
    return s >= 0, s > 0, s != 0


@dataclass(frozen=True)
class HomomorphismReport:
    positive: bool
    strictly_positive: bool
    faithful: bool
    injective_prefix_ranks: tuple[int, ...] | None = None

    @property
    def injective(self) -> bool:
        ranks = self.injective_prefix_ranks
        return ranks is not None and all(r == n + 1 for n, r in enumerate(ranks))


def verify_hom(table: PascalTable) -> HomomorphismReport:
    """Positivity, faithfulness, and (for group elements) prefix ranks over Q."""
    summaries = [_sign_summary(x) for _, _, x in table.entries()]
    positive = all(s[0] for s in summaries)
    strictly = all(s[1] for s in summaries)
    # a positive map is faithful iff no generator [e(n,k)] is sent to zero
    faithful = positive and all(s[2] for s in summaries)
    ranks = None
    diag = table.diagonal
    if any(isinstance(x, GroupElement) for x in diag):
        ranks = tuple(rational_rank(diag[: n + 1]) for n in range(len(diag)))
    return HomomorphismReport(positive, strictly, faithful, ranks)


def gicar_trace(t, n: int) -> list:
    """Values (tau(e(n,0)), ..., tau(e(n,n))) of the trace attached to t.

    Since e(n,k) occurs with multiplicity C(n,k) in the unit, the values
    satisfy sum_k C(n,k) * tau(e(n,k)) = 1; this is asserted.
    """
    t = as_moments(t)
    if n > t.N or n < 0:
        raise OutOfRange(f"trace level {n} needs {n + 1} moments")
    if membership(t.truncate(n)).is_outside:
        raise NotAMomentVector(f"{t!r} is not a moment vector")
    row = list(build_table(t.entries, n).rows[n])
    total = sum((comb(n, k) * x for k, x in enumerate(row)), Fraction(0))
    if total != 1:
        raise RecurrenceError(f"trace weights at level {n} sum to {total}")
    return row
