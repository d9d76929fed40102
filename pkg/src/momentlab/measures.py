"""Probability measures on [0, 1] with exact moments, and the grid LP oracle."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .arith import fmt, to_fraction
from .errors import OutOfRange, SpecError
from .moments import MomentVector, as_moments
from .simplex import phase_one


def rising(a, n: int) -> Fraction:
    """Rising factorial a (a+1) ... (a+n-1)."""
    out = Fraction(1)
    for i in range(n):
        out *= a + i
    return out


@dataclass(frozen=True)
class Measure:
    """Atomic, Lebesgue or integer-parameter Beta probability measure."""

    kind: str  # "atomic" | "lebesgue" | "beta"
    atoms: tuple[tuple[Fraction, Fraction], ...] = ()
    a: int = 1
    b: int = 1

    def __post_init__(self):
        if self.kind == "atomic":
            if not self.atoms:
                raise SpecError("atomic measure needs at least one atom")
            locs = [x for x, _ in self.atoms]
            if len(set(locs)) != len(locs):
                raise SpecError("atom locations must be distinct")
            if any(not 0 <= x <= 1 for x in locs):
                raise SpecError("atoms must lie in [0, 1]")
            if any(w <= 0 for _, w in self.atoms):
                raise SpecError("atom weights must be positive")
            if sum(w for _, w in self.atoms) != 1:
                raise SpecError("atom weights must sum to 1")
        elif self.kind == "beta":
            if not (isinstance(self.a, int) and isinstance(self.b, int)) or self.a < 1 or self.b < 1:
                raise SpecError("beta parameters must be positive integers")
        elif self.kind != "lebesgue":
            raise SpecError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def lebesgue(cls) -> "Measure":
        return cls("lebesgue")

    @classmethod
    def beta(cls, a: int, b: int) -> "Measure":
        return cls("beta", a=a, b=b)

    @classmethod
    def atomic(cls, atoms) -> "Measure":
        """``atoms`` is an iterable of (location, weight) pairs."""
        pairs = sorted((to_fraction(x), to_fraction(w)) for x, w in atoms)
        return cls("atomic", atoms=tuple(pairs))

    @classmethod
    def delta(cls, x) -> "Measure":
        return cls.atomic([(x, 1)])

    @classmethod
    def parse(cls, text: str) -> "Measure":
        """``lebesgue``, ``beta:2,3``, ``delta:1/2`` or ``atomic:1/2@1/4,1/2@3/4`` (weight@location)."""
        t = text.strip()
        try:
            if t == "lebesgue":
                return cls.lebesgue()
            if t.startswith("beta:"):
                a, b = t[5:].split(",")
                return cls.beta(int(a), int(b))
            if t.startswith("delta:"):
                return cls.delta(Fraction(t[6:]))
            if t.startswith("atomic:"):
                atoms = []
                for part in t[7:].split(","):
                    w, x = part.split("@")
                    atoms.append((Fraction(x), Fraction(w)))
                return cls.atomic(atoms)
        except (ValueError, ZeroDivisionError) as exc:
            raise SpecError(f"cannot parse measure {text!r}: {exc}") from None
        raise SpecError(f"cannot parse measure {text!r}")

    def __str__(self):
        if self.kind == "lebesgue":
            return "lebesgue"
        if self.kind == "beta":
            return f"beta:{self.a},{self.b}"
        return "atomic:" + ",".join(f"{fmt(w)}@{fmt(x)}" for x, w in self.atoms)

    def moment(self, n: int) -> Fraction:
        if self.kind == "atomic":
            return sum((w * x**n for x, w in self.atoms), Fraction(0))
        a, b = (1, 1) if self.kind == "lebesgue" else (self.a, self.b)
        return rising(a, n) / rising(a + b, n)


def moments_of(mu: Measure, N: int) -> MomentVector:
    """Exact moments (t(0), ..., t(N)) of mu."""
    if N < 0:
        raise OutOfRange("N must be non-negative")
    return MomentVector([mu.moment(n) for n in range(N + 1)])


def mixed_moment(mu: Measure, n: int, k: int) -> Fraction:
    """Integral of x^k (1-x)^(n-k) against mu."""
    if not 0 <= k <= n:
        raise OutOfRange(f"need 0 <= k <= n, got n={n}, k={k}")
    if mu.kind == "atomic":
        return sum((w * x**k * (1 - x) ** (n - k) for x, w in mu.atoms), Fraction(0))
    a, b = (1, 1) if mu.kind == "lebesgue" else (mu.a, mu.b)
    return rising(a, k) * rising(b, n - k) / rising(a + b, n)


def random_atomic(rng: random.Random, max_atoms: int = 4, denom: int = 64) -> Measure:
    """A random atomic measure with rational atoms and weights."""
    count = rng.randint(1, max_atoms)
    locs = rng.sample(range(denom + 1), count)
    raw = [rng.randint(1, 16) for _ in range(count)]
    total = sum(raw)
    return Measure.atomic([(Fraction(x, denom), Fraction(r, total)) for x, r in zip(locs, raw)])


def random_vector(rng: random.Random, max_len: int = 7, denom: int = 64) -> MomentVector:
    """A random rational vector (1, t_1, ..., t_N) with entries in [0, 1].

    Half of the draws are jittered moments of a random atomic measure (these
    land near the moment body, on either side); the rest are sorted uniform
    draws, which are mostly outside it.
    """
    N = rng.randint(1, max_len - 1)
    if rng.random() < 0.5:
        t = moments_of(random_atomic(rng, 4, denom), N)
        vals = [Fraction(1)]
        for x in t.entries[1:]:
            x += Fraction(rng.randint(-4, 4), 1024)
            vals.append(min(max(x, Fraction(0)), Fraction(1)))
        return MomentVector(vals)
    draws = sorted((Fraction(rng.randint(0, denom), denom) for _ in range(N)), reverse=True)
    return MomentVector([Fraction(1)] + draws)


# --------------------------------------------------------------------------
# grid LP oracle


@dataclass(frozen=True)
class GridWitness:
    grid_size: int
    weights: tuple[Fraction, ...]
    tolerance: Fraction

    def moments(self, N: int) -> list[Fraction]:
        g = self.grid_size
        return [
            sum((w * Fraction(i, g) ** n for i, w in enumerate(self.weights) if w), Fraction(0))
            for n in range(N + 1)
        ]

    def check(self, t) -> bool:
        t = as_moments(t)
        if any(w < 0 for w in self.weights) or sum(self.weights) != 1:
            return False
        return all(abs(m - x) <= self.tolerance for m, x in zip(self.moments(t.N), t))

    def to_json(self) -> dict:
        return {
            "grid_size": self.grid_size,
            "tolerance": fmt(self.tolerance),
            "weights": [fmt(w) for w in self.weights],
        }


def lp_feasible(t, grid_size: int, tolerance) -> tuple[bool, GridWitness | None]:
    """Is there a probability vector on {0, 1/g, ..., 1} matching t within tolerance?

    Decided by an exact phase-1 simplex; the n = 0 row is the equality
    sum(w) = 1 and every n >= 1 contributes a lower and an upper row.
    """
    t = as_moments(t)
    if not t.is_rational:
        raise TypeError("the LP oracle needs rational moments")
    tol = to_fraction(tolerance)
    N = t.N
    if grid_size < N + 1:
        raise ValueError("grid_size must be at least N + 1")
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    g = grid_size
    npts = g + 1
    pts = [Fraction(i, g) for i in range(npts)]
    # columns: w_0..w_g | s_1..s_N (surplus) | r_1..r_N (slack of the upper row)
    ncol = npts + 2 * N
    A, b = [], []
    A.append([Fraction(1)] * npts + [Fraction(0)] * (2 * N))
    b.append(Fraction(1))
    for n in range(1, N + 1):
        row = [x**n for x in pts] + [Fraction(0)] * (2 * N)
        row[npts + n - 1] = Fraction(-1)
        A.append(row)
        b.append(t[n] - tol)
    for n in range(1, N + 1):
        row = [Fraction(0)] * ncol
        row[npts + n - 1] = Fraction(1)
        row[npts + N + n - 1] = Fraction(1)
        A.append(row)
        b.append(2 * tol)
    x = phase_one(A, b)
    if x is None:
        return False, None
    witness = GridWitness(g, tuple(x[:npts]), tol)
    if not witness.check(t):
        raise AssertionError("simplex returned a witness that does not check")
    return True, witness
