"""Exact scalars: dense subgroups of the reals, their elements, and enclosures.

Three kinds of subgroup are supported:

* ``Z[1/p, ...]``  rationals whose denominators only involve the listed primes
* ``Q``            all rationals
* ``gen:sqrt2,..`` the Q-linear span of 1 and square roots of squarefree integers

Elements of the generated kind are kept as exact coordinate maps
``{radicand: coefficient}`` with radicand 1 standing for the constant 1.
Distinct squarefree radicands give Q-independent square roots, so the
coordinate rank is the true rank over Q.
"""
from __future__ import annotations

import heapq
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import DepthExhausted, MixedDescriptors, PrecisionExhausted, SpecError

DEFAULT_SIGN_BITS = 256


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, GroupElement) and x.is_rational:
        return x.rational_part
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def fmt(x: Fraction) -> str:
    """Serialize a rational as a decimal-free ``p/q`` string."""
    return str(Fraction(x))


# --------------------------------------------------------------------------
# square roots


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (c, s) with n == c*c*s and s squarefree."""
    if n <= 0:
        raise ValueError("radicand must be positive")
    c, s, p = 1, 1, 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        c *= p ** (e // 2)
        if e % 2:
            s *= p
        p += 1
    return c, s * n


def _canonical_radicand(r: Fraction) -> tuple[Fraction, int]:
    """sqrt(r) == coeff * sqrt(s) with s squarefree."""
    r = Fraction(r)
    if r <= 0:
        raise ValueError("square roots of non-positive numbers are not supported")
    c, s = squarefree_decompose(r.numerator * r.denominator)
    return Fraction(c, r.denominator), s


def generator_name(radicand: int) -> str:
    return "1" if radicand == 1 else f"sqrt{radicand}"


_GEN_RE = re.compile(r"^sqrt\(?\s*([0-9]+(?:/[0-9]+)?)\s*\)?$")


def parse_generator(token: str) -> tuple[Fraction, int]:
    """Parse ``1``, ``sqrt2`` or ``sqrt(3/2)`` into (coefficient, radicand)."""
    token = token.strip()
    if token == "1":
        return Fraction(1), 1
    m = _GEN_RE.match(token)
    if not m:
        raise SpecError(f"bad generator {token!r}")
    return _canonical_radicand(Fraction(m.group(1)))


def _sqrt_bounds(s: int, bits: int) -> tuple[Fraction, Fraction]:
    scaled = s << (2 * bits)
    a = math.isqrt(scaled)
    if a * a == scaled:
        v = Fraction(a, 1 << bits)
        return v, v
    return Fraction(a, 1 << bits), Fraction(a + 1, 1 << bits)


# --------------------------------------------------------------------------
# subgroups


@dataclass(frozen=True)
class Subgroup:
    """A dense subgroup of the reals that contains 1."""

    kind: str  # "primes" | "rationals" | "generated"
    primes: tuple[int, ...] = ()
    generators: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind == "primes":
            if not self.primes or len(set(self.primes)) != len(self.primes):
                raise SpecError("prime list must be non-empty and distinct")
            for p in self.primes:
                if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
                    raise SpecError(f"{p} is not prime")
        elif self.kind == "generated":
            if not self.generators or self.generators[0] != 1:
                raise SpecError("the constant 1 must be the first generator")
            if len(set(self.generators)) != len(self.generators):
                raise SpecError("generators must be pairwise distinct")
            for s in self.generators:
                if squarefree_decompose(s) != (1, s):
                    raise SpecError(f"radicand {s} is not squarefree")
        elif self.kind != "rationals":
            raise SpecError(f"unknown subgroup kind {self.kind!r}")

    @classmethod
    def prime_power_ring(cls, primes: Iterable[int]) -> "Subgroup":
        return cls("primes", primes=tuple(sorted(primes)))

    @classmethod
    def rationals(cls) -> "Subgroup":
        return cls("rationals")

    @classmethod
    def generated(cls, radicands: Iterable[int]) -> "Subgroup":
        gens = [1] + [s for s in radicands if s != 1]
        return cls("generated", generators=tuple(gens))

    @classmethod
    def parse(cls, text: str) -> "Subgroup":
        """Parse ``Z[1/2]``, ``Z[1/2,1/3]``, ``Q`` or ``gen:sqrt2,sqrt3``."""
        t = text.strip()
        if t in ("Q", "QQ"):
            return cls.rationals()
        m = re.fullmatch(r"Z\[(.*)\]", t)
        if m:
            primes = []
            for part in m.group(1).split(","):
                pm = re.fullmatch(r"\s*1/([0-9]+)\s*", part)
                if not pm:
                    raise SpecError(f"bad ring generator {part!r} in {text!r}")
                primes.append(int(pm.group(1)))
            return cls.prime_power_ring(primes)
        if t.startswith("gen:"):
            radicands = []
            for tok in t[4:].split(","):
                if not tok.strip():
                    continue
                _, s = parse_generator(tok)
                if s == 1 and tok.strip() != "1":
                    raise SpecError(f"{tok!r} is rational and duplicates the generator 1")
                if s in radicands:
                    raise SpecError(f"{tok!r} duplicates another generator")
                radicands.append(s)
            return cls.generated(radicands)
        raise SpecError(f"cannot parse subgroup {text!r}")

    def __str__(self):
        if self.kind == "rationals":
            return "Q"
        if self.kind == "primes":
            return "Z[" + ",".join(f"1/{p}" for p in self.primes) + "]"
        return "gen:" + ",".join(generator_name(s) for s in self.generators)

    @property
    def is_rational(self) -> bool:
        return self.kind != "generated"


# --------------------------------------------------------------------------
# group elements


class GroupElement:
    """Exact element sum(c_s * sqrt(s)) of a generated group (s=1 is the unit).

    Immutable; supports addition, subtraction, rational scaling and exact
    ordering (decided by enclosure refinement for irrational differences).
    """

    __slots__ = ("_items",)

    def __init__(self, coords: Mapping[int, Fraction] | None = None):
        items = {}
        for s, c in (coords or {}).items():
            c = to_fraction(c)
            if c:
                items[int(s)] = items.get(int(s), Fraction(0)) + c
        self._items = tuple(sorted((s, c) for s, c in items.items() if c))

    @classmethod
    def rational(cls, x) -> "GroupElement":
        return cls({1: to_fraction(x)})

    @classmethod
    def sqrt(cls, radicand, coeff=1) -> "GroupElement":
        c, s = _canonical_radicand(to_fraction(radicand))
        return cls({s: c * to_fraction(coeff)})

    @classmethod
    def from_json(cls, obj: Mapping) -> "GroupElement":
        coords = obj["coords"] if "coords" in obj else obj
        out: dict[int, Fraction] = {}
        for name, val in coords.items():
            c, s = parse_generator(name)
            out[s] = out.get(s, Fraction(0)) + c * Fraction(val)
        return cls(out)

    def to_json(self) -> dict:
        items = self._items or ((1, Fraction(0)),)
        return {"coords": {generator_name(s): fmt(c) for s, c in items}}

    @property
    def coords(self) -> dict[int, Fraction]:
        return dict(self._items)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(s for s, _ in self._items)

    @property
    def is_rational(self) -> bool:
        return all(s == 1 for s, _ in self._items)

    @property
    def rational_part(self) -> Fraction:
        for s, c in self._items:
            if s == 1:
                return c
        return Fraction(0)

    def __add__(self, other):
        other = _as_element(other)
        if other is None:
            return NotImplemented
        d = dict(self._items)
        for s, c in other._items:
            d[s] = d.get(s, Fraction(0)) + c
        return GroupElement(d)

    __radd__ = __add__

    def __neg__(self):
        return GroupElement({s: -c for s, c in self._items})

    def __sub__(self, other):
        other = _as_element(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_element(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, k):
        if isinstance(k, (int, Fraction)):
            return GroupElement({s: c * k for s, c in self._items})
        if isinstance(k, GroupElement) and k.is_rational:
            return self * k.rational_part
        if isinstance(k, GroupElement) and self.is_rational:
            return k * self.rational_part
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, k):
        if isinstance(k, (int, Fraction)):
            return GroupElement({s: c / k for s, c in self._items})
        return NotImplemented

    def __eq__(self, other):
        other = _as_element(other)
        if other is None:
            return NotImplemented
        return self._items == other._items

    def __hash__(self):
        if self.is_rational:
            return hash(self.rational_part)
        return hash(self._items)

    def _cmp(self, other) -> int:
        other = _as_element(other)
        if other is None:
            raise TypeError("unorderable")
        return sign(self - other)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return bool(self._items)

    def __abs__(self):
        return -self if sign(self) < 0 else self

    def __float__(self):
        e = evaluate(self, Fraction(1, 1 << 60))
        return float((e.lo + e.hi) / 2)

    def __repr__(self):
        if not self._items:
            return "GroupElement(0)"
        terms = [fmt(c) if s == 1 else f"{fmt(c)}*sqrt{s}" for s, c in self._items]
        return "GroupElement(" + " + ".join(terms) + ")"


def _as_element(x) -> GroupElement | None:
    if isinstance(x, GroupElement):
        return x
    if isinstance(x, (int, Fraction)):
        return GroupElement.rational(x)
    return None


Scalar = Union[Fraction, GroupElement]


def simplify(x):
    """Collapse a purely rational GroupElement to a Fraction."""
    if isinstance(x, GroupElement) and x.is_rational:
        return x.rational_part
    if isinstance(x, int):
        return Fraction(x)
    return x


# --------------------------------------------------------------------------
# enclosures


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval [lo, hi] known to contain a real number."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("enclosure with lo > hi")

    @classmethod
    def point(cls, x) -> "Enclosure":
        x = to_fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def is_positive(self) -> bool:
        return self.lo > 0

    def is_negative(self) -> bool:
        return self.hi < 0

    def rounded(self, bits: int) -> "Enclosure":
        """Outward rounding of both endpoints to the dyadic grid 2**-bits."""
        scale = 1 << bits
        lo = Fraction(math.floor(self.lo * scale), scale)
        hi = Fraction(math.ceil(self.hi * scale), scale)
        return Enclosure(lo, hi)

    def __add__(self, other):
        o = _as_enclosure(other)
        return Enclosure(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        o = _as_enclosure(other)
        return Enclosure(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return _as_enclosure(other) - self

    def __mul__(self, other):
        o = _as_enclosure(other)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Enclosure(min(ps), max(ps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _as_enclosure(other)
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError("enclosure divisor contains zero")
        return self * Enclosure(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, other):
        return _as_enclosure(other) / self


def _as_enclosure(x) -> Enclosure:
    if isinstance(x, Enclosure):
        return x
    return Enclosure.point(x)


def evaluate(x, width) -> Enclosure:
    """Enclose the real value of ``x`` in an interval of width <= ``width``."""
    width = to_fraction(width)
    if width <= 0:
        raise ValueError("width must be positive")
    x = simplify(x)
    if isinstance(x, Fraction):
        return Enclosure.point(x)
    if not isinstance(x, GroupElement):
        raise TypeError(f"cannot evaluate {x!r}")
    irr = [(s, c) for s, c in x.coords.items() if s != 1]
    total = sum(abs(c) for _, c in irr)
    bits = max(1, math.ceil(math.log2(total / width)) + 1) if total > width else 1
    while True:
        lo = hi = x.rational_part
        for s, c in irr:
            a, b = _sqrt_bounds(s, bits)
            if c > 0:
                lo, hi = lo + c * a, hi + c * b
            else:
                lo, hi = lo + c * b, hi + c * a
        if hi - lo <= width:
            return Enclosure(lo, hi)
        bits += 1


def enclose_bits(x, bits: int) -> Enclosure:
    return evaluate(x, Fraction(1, 1 << bits))


def sign(x, max_bits: int = DEFAULT_SIGN_BITS) -> int:
    """Exact sign of a rational or group element.

    Irrational elements are refined by width halving; raises
    PrecisionExhausted past ``max_bits`` of precision.
    """
    x = simplify(x)
    if isinstance(x, Fraction):
        return (x > 0) - (x < 0)
    if not x:
        return 0
    bits = 8
    while bits <= max_bits:
        e = enclose_bits(x, bits)
        if e.lo > 0:
            return 1
        if e.hi < 0:
            return -1
        bits *= 2
    raise PrecisionExhausted(f"sign of {x!r} undecided at {max_bits} bits")


# --------------------------------------------------------------------------
# group operations


def _strip(n: int, primes: Sequence[int]) -> int:
    for p in primes:
        while n % p == 0:
            n //= p
    return n


def contains(G: Subgroup, x) -> bool:
    """Membership of a rational (or group element) in G."""
    if isinstance(x, GroupElement):
        if G.kind == "generated":
            return all(s in G.generators for s in x.support)
        if not x.is_rational:
            return False
        x = x.rational_part
    x = to_fraction(x)
    if G.kind == "primes":
        return _strip(x.denominator, G.primes) == 1
    return True


def smooth_numbers(primes: Sequence[int], max_bits: int):
    """Yield products of powers of ``primes`` in increasing order."""
    seen = {1}
    heap = [1]
    limit = 1 << max_bits
    while heap:
        q = heapq.heappop(heap)
        yield q
        for p in primes:
            n = q * p
            if n <= limit and n not in seen:
                seen.add(n)
                heapq.heappush(heap, n)


def nearest_numerator(q: int, lo: Fraction, hi: Fraction, target: Fraction) -> int | None:
    pmin = math.floor(lo * q) + 1
    pmax = math.ceil(hi * q) - 1
    if pmin > pmax:
        return None
    t = target * q
    cands = {min(max(math.floor(t), pmin), pmax), min(max(math.ceil(t), pmin), pmax)}
    return min(cands, key=lambda p: (abs(Fraction(p, q) - target), p))


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational of least denominator in the open interval (lo, hi)."""
    fl = math.floor(lo)
    if fl + 1 < hi:
        # an integer lies inside; the one nearest lo is returned
        return Fraction(fl + 1)
    if lo == fl:
        z = Fraction(math.floor(1 / (hi - fl)) + 1)
    else:
        z = simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / z


def round_into(G: Subgroup, target, interval, max_bits: int = 512) -> GroupElement:
    """Pick an element of G strictly inside ``interval``.

    The target itself is returned when it already qualifies. Otherwise the
    least admissible denominator wins (smooth denominators in increasing
    order for Z[1/p,..]; the Stern-Brocot simplest denominator for Q and
    generated groups), ties broken by distance to target, then by the
    smaller numerator. Only rational elements are produced.
    """
    lo, hi = (to_fraction(v) for v in interval)
    target = to_fraction(target)
    if not lo < hi:
        raise ValueError("empty interval")
    if lo < target < hi and contains(G, target):
        return GroupElement.rational(target)
    if G.kind == "primes":
        for q in smooth_numbers(G.primes, max_bits):
            p = nearest_numerator(q, lo, hi, target)
            if p is not None:
                return GroupElement.rational(Fraction(p, q))
        raise DepthExhausted(f"no element of {G} in ({lo}, {hi}) below 2^{max_bits}")
    q = simplest_between(lo, hi).denominator
    if q.bit_length() > max_bits:
        raise DepthExhausted(f"no element of {G} in ({lo}, {hi}) below 2^{max_bits}")
    return GroupElement.rational(Fraction(nearest_numerator(q, lo, hi, target), q))


def rational_rank(xs: Sequence, group: Subgroup | None = None) -> int:
    """Rank over Q of the coordinate vectors of ``xs`` (exact elimination)."""
    elems = []
    for x in xs:
        e = _as_element(x)
        if e is None:
            raise TypeError(f"not a group element: {x!r}")
        if group is not None and not contains(group, e):
            raise MixedDescriptors(f"{e!r} is not an element of {group}")
        elems.append(e)
    keys = sorted({s for e in elems for s in e.support})
    rows = [[e.coords.get(s, Fraction(0)) for s in keys] for e in elems]
    rank = 0
    for col in range(len(keys)):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank
