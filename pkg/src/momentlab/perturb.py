"""Moment sequences with every term in a prescribed dense subgroup G.

Construction, for a source sequence s, a prefix length m and tolerances
eps_1..eps_m:

1. interiorize: mix s toward the Lebesgue moments until it is interior,
   moving each coordinate by at most eps_j / 2;
2. round the prefix coordinate by coordinate into G, inside both the
   current extension interval and a radius r_j <= eps_j / 2 around the
   interior point; if some interval comes out empty, halve every r_j and
   start over;
3. extend past m by rounding the midpoint of each extension interval.

In independent mode each new term is r + 2^-k * sqrt(a) with a fresh
generator a, so the terms are Q-independent by construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .arith import GroupElement, Subgroup, contains, fmt, rational_rank, round_into, sign, simplify, to_fraction
from .errors import NotAMomentVector, PrecisionExhausted, SpecError, TooShort
from .measures import Measure, moments_of
from .moments import InteriorCertificate, MomentVector, as_moments, extension_interval, membership

REFINEMENT_CAP = 512


@dataclass(frozen=True)
class PerturbationRequest:
    source: Measure | MomentVector
    m: int
    epsilons: tuple
    subgroup: Subgroup
    N: int
    independent: bool = False

    def __post_init__(self):
        eps = self.epsilons
        if isinstance(eps, (int, Fraction, str)):
            eps = (eps,) * self.m
        eps = tuple(to_fraction(e) for e in eps)
        object.__setattr__(self, "epsilons", eps)
        if not isinstance(self.source, Measure):
            object.__setattr__(self, "source", as_moments(self.source))
            if len(self.source) < self.m + 1:
                raise TooShort(f"source has {len(self.source)} terms, m = {self.m}")
        if self.m < 0 or self.N < self.m:
            raise SpecError("need 0 <= m <= N")
        if len(eps) != self.m or any(e <= 0 for e in eps):
            raise SpecError("need m strictly positive epsilons")
        if self.independent:
            if self.subgroup.kind != "generated":
                raise SpecError("independent mode needs a generated group")
            if len(self.subgroup.generators) < self.N + 1:
                raise SpecError(f"independent mode needs {self.N + 1} generators including 1")

    def source_moments(self) -> MomentVector:
        if isinstance(self.source, Measure):
            return moments_of(self.source, self.m)
        return self.source.truncate(self.m)


@dataclass(frozen=True)
class PerturbationResult:
    request: PerturbationRequest
    sequence: MomentVector
    certificates: tuple[InteriorCertificate, ...]
    deviations: tuple
    checks: dict = field(default_factory=dict, compare=False)

    @property
    def elements(self) -> list[GroupElement]:
        return [x if isinstance(x, GroupElement) else GroupElement.rational(x) for x in self.sequence]

    def to_json(self) -> dict:
        req = self.request
        return {
            "source": str(req.source) if isinstance(req.source, Measure) else req.source.to_json(),
            "m": req.m,
            "N": req.N,
            "epsilons": [fmt(e) for e in req.epsilons],
            "group": str(req.subgroup),
            "independent": req.independent,
            "sequence": [e.to_json() for e in self.elements],
            "deviations": [fmt(d) if isinstance(d, Fraction) else d.to_json() for d in self.deviations],
            "certificates": [
                dict(length=n + 2, **c.to_json()) for n, c in enumerate(self.certificates)
            ],
            "checks": self.checks,
        }


def _lebesgue(N: int) -> list[Fraction]:
    return [Fraction(1, n + 1) for n in range(N + 1)]


def interiorize(s, m: int, epsilons=None) -> tuple[MomentVector, Fraction]:
    """Push s[0..m] into the interior along the segment toward Lebesgue moments.

    Uses the largest theta in {1/2, 1/4, ...} with theta * |L_j - s_j| <= eps_j / 2.
    Interior inputs come back unchanged. Returns (vector, minimum pivot).
    """
    s = as_moments(s).truncate(m)
    verdict = membership(s)
    if verdict.is_outside:
        raise NotAMomentVector(f"{s!r} is outside the moment body")
    if verdict.is_interior:
        return s, verdict.certificate.margin
    L = _lebesgue(m)
    if epsilons is None:
        epsilons = [Fraction(1)] * m
    eps = [to_fraction(e) for e in epsilons]
    theta = Fraction(1, 2)
    while any(theta * abs(L[j] - s[j]) > eps[j - 1] / 2 for j in range(1, m + 1)):
        theta /= 2
    mixed = MomentVector([(1 - theta) * s[j] + theta * L[j] for j in range(m + 1)])
    verdict = membership(mixed)
    if not verdict.is_interior:
        raise AssertionError(f"mixing with theta={theta} did not reach the interior")
    return mixed, verdict.certificate.margin


Chooser = Callable[[int, Fraction, Fraction, Fraction], object]


def _rational_chooser(G: Subgroup) -> Chooser:
    def choose(n, lo, hi, target):
        return simplify(round_into(G, target, (lo, hi)))

    return choose


def _fresh_generator_chooser(G: Subgroup) -> Chooser:
    """t_n = r + 2^-k sqrt(a_n): r rational in the middle half, k minimal."""
    radicands = G.generators[1:]

    def choose(n, lo, hi, target):
        alpha = radicands[n - 1]
        w = hi - lo
        r = round_into(Subgroup.rationals(), target, (lo + w / 4, hi - w / 4)).rational_part
        gap = hi - r
        for k in range(1, REFINEMENT_CAP + 1):
            c = Fraction(1, 1 << k)
            # c*sqrt(alpha) < gap, decided exactly by squaring
            if c * c * alpha < gap * gap:
                return GroupElement({1: r, alpha: c})
        raise PrecisionExhausted(f"no coefficient 2^-k fits term {n}")

    return choose


def _round_prefix(s_star: MomentVector, eps, choose: Chooser) -> list:
    m = s_star.N
    radius = [e / 2 for e in eps]
    for _ in range(REFINEMENT_CAP):
        t = [Fraction(1)]
        for j in range(1, m + 1):
            lo, hi = extension_interval(MomentVector(t)).inner()
            lo = max(lo, s_star[j] - radius[j - 1])
            hi = min(hi, s_star[j] + radius[j - 1])
            if lo >= hi:
                break
            t.append(choose(j, lo, hi, s_star[j]))
        else:
            return t
        radius = [r / 2 for r in radius]
    raise PrecisionExhausted("prefix rounding did not settle within the refinement cap")


def perturb_prefix(req: PerturbationRequest) -> MomentVector:
    """Interior vector (t_0..t_m) with entries in G and |t_j - s_j| < eps_j."""
    s_star, _ = interiorize(req.source_moments(), req.m, req.epsilons)
    choose = _fresh_generator_chooser(req.subgroup) if req.independent else _rational_chooser(req.subgroup)
    return MomentVector(_round_prefix(s_star, req.epsilons, choose))


def extend(t, G: Subgroup, upto: int, chooser: Chooser | None = None) -> MomentVector:
    """Append terms up to index ``upto``, each rounded from its interval midpoint."""
    t = as_moments(t)
    if not membership(t).is_interior:
        raise NotAMomentVector(f"{t!r} is not interior")
    choose = chooser or _rational_chooser(G)
    vals = list(t.entries)
    for n in range(len(vals), upto + 1):
        ext = extension_interval(MomentVector(vals))
        lo, hi = ext.inner()
        vals.append(choose(n, lo, hi, ext.midpoint))
    return MomentVector(vals)


def perturb(req: PerturbationRequest) -> PerturbationResult:
    """Full construction: prefix near the source, then extension to length N+1."""
    if req.independent:
        return perturb_independent(req)
    prefix = perturb_prefix(req)
    seq = extend(prefix, req.subgroup, req.N)
    return _finish(req, seq)


def perturb_independent(req: PerturbationRequest) -> PerturbationResult:
    """As ``perturb``, with t_0..t_N independent over Q."""
    if not req.independent:
        raise SpecError("request is not in independent mode")
    prefix = perturb_prefix(req)
    choose = _fresh_generator_chooser(req.subgroup)
    seq = extend(prefix, req.subgroup, req.N, chooser=choose)
    return _finish(req, seq)


def _finish(req: PerturbationRequest, seq: MomentVector) -> PerturbationResult:
    certs = []
    for n in range(1, seq.N + 1):
        v = membership(seq.truncate(n))
        if not v.is_interior:
            raise AssertionError(f"prefix of length {n + 1} is not interior")
        certs.append(v.certificate)
    s = req.source_moments()
    devs = tuple(simplify(abs(seq[j] - s[j])) for j in range(1, req.m + 1))
    result = PerturbationResult(req, seq, tuple(certs), devs)
    result.checks.update(check_result(result))
    return result


def check_result(result: PerturbationResult) -> dict[str, bool]:
    """Re-derive the output contract from scratch.

    subgroup: every term lies in G; interior: every prefix of length >= 2
    is interior; nontrivial: t(2) < t(1); deviation: |t_j - s_j| < eps_j
    for j <= m; rank (independent mode only): each prefix has full Q-rank.
    """
    req = result.request
    seq = result.sequence
    G = req.subgroup
    out = {
        "subgroup": all(contains(G, x) for x in seq),
        "interior": all(membership(seq.truncate(n)).is_interior for n in range(1, seq.N + 1)),
        "nontrivial": seq.N < 2 or sign(seq[1] - seq[2]) > 0,
    }
    s = req.source_moments()
    out["deviation"] = all(
        sign(req.epsilons[j - 1] - abs(seq[j] - s[j])) > 0 for j in range(1, req.m + 1)
    )
    if req.independent:
        elems = result.elements
        out["rank"] = all(rational_rank(elems[: n + 1], G) == n + 1 for n in range(len(elems)))
    return out
