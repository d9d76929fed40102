"""Phase-1 simplex over the rationals.

Entering columns follow Dantzig's most-negative reduced cost while the
objective strictly decreases; after a degenerate pivot the choice falls
back to Bland's smallest-index rule until progress resumes, which rules
out cycling.

Only feasibility is needed: find x >= 0 with A x = b, or prove there is
none. The tableau is kept in integers with Edmonds-style fraction-free
pivoting: every entry is a subdeterminant of the scaled input and the
common denominator is the last pivot, so each update is an exact integer
division.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


def phase_one(A: Sequence[Sequence], b: Sequence):
    """Return a feasible x (list of Fractions) or None if A x = b, x >= 0 is infeasible."""
    m = len(A)
    n = len(A[0]) if m else 0
    total = n + m
    rows = []
    for i in range(m):
        vals = [Fraction(x) for x in A[i]] + [Fraction(b[i])]
        scale = 1
        for v in vals:
            scale = math.lcm(scale, v.denominator)
        ints = [int(v * scale) for v in vals]
        if ints[-1] < 0:
            ints = [-v for v in ints]
        # artificial for row i gets coefficient 1
        row = ints[:n] + [0] * m + [ints[-1]]
        row[n + i] = 1
        rows.append(row)
    # phase-1 objective row: minimise the sum of artificials, in reduced form
    cost = [0] * (total + 1)
    for row in rows:
        for j in range(n):
            cost[j] -= row[j]
        cost[total] -= row[total]
    head = [n + i for i in range(m)]
    det = 1
    bland = False

    while True:
        if bland:
            enter = next((j for j in range(total) if cost[j] < 0), None)
        else:
            enter = min(range(total), key=lambda j: (cost[j], j))
            if cost[enter] >= 0:
                enter = None
        if enter is None:
            break
        leave = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                if leave is None:
                    leave = i
                    continue
                # compare rhs_i / a against rhs_leave / a_leave
                lhs = rows[i][total] * rows[leave][enter]
                rhs = rows[leave][total] * a
                if lhs < rhs or (lhs == rhs and head[i] < head[leave]):
                    leave = i
        if leave is None:
            raise RuntimeError("phase-1 objective unbounded")
        # Bland's rule governs every pivot that follows a degenerate one
        bland = rows[leave][total] == 0
        det = _pivot(rows, cost, leave, enter, det)
        head[leave] = enter

    if cost[total] != 0:
        return None
    x = [Fraction(0)] * n
    for i in range(m):
        if head[i] < n:
            x[head[i]] = Fraction(rows[i][total], det)
    return x


def _pivot(rows, cost, r, c, det):
    prow = rows[r]
    p = prow[c]
    for row in rows + [cost]:
        if row is prow:
            continue
        f = row[c]
        if f:
            row[:] = [(x * p - f * y) // det for x, y in zip(row, prow)]
        else:
            row[:] = [(x * p) // det for x in row]
    return p
