"""Specialization searches driven by almost-prime and square-free values of polynomials."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial
from typing import Iterable, Iterator

from .arith import (
    Factorization,
    IntPoly,
    big_omega,
    factorize,
    has_repeated_roots,
    is_prime,
    primes,
    squarefree_kernel,
)
from .families import (
    KUBERT,
    TORSION4,
    TORSION5,
    CurveFamily,
    check_split_at_parameter_prime,
    specialize,
)
from .localdata import GOOD, NONSPLIT, SPLIT, LocalData, global_tamagawa
from .parallel import ordered_map

log = logging.getLogger(__name__)

PROP31_TOTALS = frozenset({4, 8, 12})
PROP32_MAX = 30


@dataclass(frozen=True)
class SearchReport:
    family: str
    parameter: Fraction
    c: int
    breakdown: tuple[LocalData, ...]
    evidence: dict | None = None  # {"value": int, "factorization": {...}} for the sieved value
    bounds: dict = field(default_factory=dict)  # name -> {"bound": int, "satisfied": bool}
    checks: dict = field(default_factory=dict)  # name -> bool

    @property
    def ok(self) -> bool:
        return all(self.checks.values()) and all(b["satisfied"] for b in self.bounds.values())

    def local(self, p: int) -> LocalData | None:
        for ld in self.breakdown:
            if ld.p == p:
                return ld
        return None

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "parameter": str(self.parameter),
            "c": self.c,
            "breakdown": [ld.to_json() for ld in self.breakdown],
            "evidence": self.evidence,
            "bounds": self.bounds,
            "checks": self.checks,
            "ok": self.ok,
        }


def _evidence(value: int, f: Factorization) -> dict:
    return {"value": value, "factorization": f.to_json()}


def _analyse(family: CurveFamily, t) -> tuple[int, list[LocalData]]:
    rec = specialize(family, t)
    if not rec.admissible:
        raise ValueError(rec.reason)
    return global_tamagawa(rec.model)


# ---------------------------------------------------------------------------
# almost primes


@dataclass(frozen=True)
class AlmostPrimeHit:
    n: int
    value: int
    factorization: Factorization

    @property
    def omega(self) -> int:
        return big_omega(self.factorization)


def _omega_or_none(value: int) -> tuple[int | None, Factorization | None]:
    if value == 0:
        return None, None
    f = factorize(value)
    if not f.complete:
        return None, f
    return big_omega(f), f


def almost_prime_scan(F: IntPoly, r: int, domain: Iterable[int], limit: int | None = None) -> Iterator[AlmostPrimeHit]:
    """n in domain (n <= limit) with Omega(|F(n)|) <= r; F(n) = 0 never counts."""
    if F.is_zero():
        raise ValueError("F must be nonzero")
    if r < 1:
        raise ValueError("r must be positive")
    for n in domain:
        if limit is not None and n > limit:
            return
        v = F(n)
        om, f = _omega_or_none(v)
        if om is None:
            if f is not None:
                log.warning("skipping n=%d: factorization of F(n)=%d incomplete", n, v)
            continue
        if om <= r:
            yield AlmostPrimeHit(n, v, f)


def prime_domain(start: int = 2) -> Iterator[int]:
    return primes(start)


def integer_domain(start: int = 1, stop: int | None = None) -> Iterator[int]:
    return itertools.count(start) if stop is None else iter(range(start, stop))


# ---------------------------------------------------------------------------
# X1(4) and X1(5) hunts

SIEVE31 = 16 * IntPoly.x() + 1
SIEVE32 = IntPoly.x() ** 2 - 11 * IntPoly.x() - 1


def _prop31_eval(p: int) -> SearchReport | None:
    v = SIEVE31(p)
    om, f = _omega_or_none(v)
    if om is None or om > 3:
        if om is None and f is not None:
            log.warning("skipping p=%d: 16p+1 not fully factored", p)
        return None
    c, bd = _analyse(TORSION4, p)
    ld = next(x for x in bd if x.p == p)
    checks = {}
    if p > 2:
        checks = {
            "total_in_4_8_12": c in PROP31_TOTALS,
            "cp_is_4": ld.cp == 4,
            "split_at_p": ld.kind == SPLIT,
        }
    return SearchReport(TORSION4.id, Fraction(p), c, tuple(bd), _evidence(v, f), {}, checks)


def prop31_check(prime_budget: int, include_p2: bool = False, jobs: int = 1) -> list[SearchReport]:
    """Reports for the first prime_budget primes p > 2 with 16p + 1 in P_3 (plus p = 2 on request).

    The p = 2 report carries no checks: the statement only concerns p > 2.
    """
    if prime_budget < 1:
        raise ValueError("budget must be at least 1")
    out: list[SearchReport] = []
    if include_p2:
        rep = _prop31_eval(2)
        if rep:
            out.append(rep)
    hits = (r for r in ordered_map(_prop31_eval, primes(3), jobs) if r is not None)
    out.extend(itertools.islice(hits, prime_budget))
    return out


def _prop32_eval(p: int) -> SearchReport | None:
    v = SIEVE32(p)
    om, f = _omega_or_none(v)
    if om is None or om > 5:
        if om is None and f is not None:
            log.warning("skipping p=%d: p^2-11p-1 not fully factored", p)
        return None
    c, bd = _analyse(TORSION5, p)
    ld = next(x for x in bd if x.p == p)
    checks = {
        "semistable": all(x.kind in (SPLIT, NONSPLIT, GOOD) for x in bd),
        "good_at_5": all(x.p != 5 for x in bd),
        "cp_is_5": ld.cp == 5,
        "split_at_p": ld.kind == SPLIT,
        "total_at_most_30": c <= PROP32_MAX,
    }
    return SearchReport(TORSION5.id, Fraction(p), c, tuple(bd), _evidence(v, f), {}, checks)


def prop32_check(prime_budget: int, jobs: int = 1) -> list[SearchReport]:
    """Reports for the first prime_budget primes p > 5 with |p^2 - 11p - 1| in P_5."""
    if prime_budget < 1:
        raise ValueError("budget must be at least 1")
    hits = (r for r in ordered_map(_prop32_eval, primes(7), jobs) if r is not None)
    return list(itertools.islice(hits, prime_budget))


# ---------------------------------------------------------------------------
# bounds


def ceil_log2(m: int) -> int:
    m = abs(m)
    if m == 0:
        raise ValueError("log2 of 0")
    return (m - 1).bit_length()


def tamagawa_bound(m: int, s: int, deg_delta: int) -> int:
    """16 * (log2|m| + s deg(Delta))^(d(m) + s), with log2 rounded up to an integer."""
    if m == 0:
        raise ValueError("m must be nonzero")
    if s < 1 or deg_delta < 1:
        raise ValueError("s and deg(Delta) must be positive")
    f = factorize(abs(m))
    if not f.complete:
        raise ArithmeticError(f"cannot count the prime divisors of {m}")
    return 16 * (ceil_log2(m) + s * deg_delta) ** (len(f.factors) + s)


def refined_tamagawa_bound(m: int) -> int:
    """16 * (log2|m| + 1)^d(m), the quadratic/cubic case."""
    if m == 0:
        raise ValueError("m must be nonzero")
    f = factorize(abs(m))
    if not f.complete:
        raise ArithmeticError(f"cannot count the prime divisors of {m}")
    return 16 * (ceil_log2(m) + 1) ** len(f.factors)


# ---------------------------------------------------------------------------
# square-free specializations


class FamilyHypothesisError(ValueError):
    pass


def polynomial_discriminant(family: CurveFamily) -> IntPoly:
    D = family.discriminant()
    if not D.is_polynomial:
        raise FamilyHypothesisError(f"{family.id}: discriminant is not a polynomial in T")
    return D.num


def fixed_divisor(D: IntPoly) -> int:
    """gcd of D(0), ..., D(deg D + 1); this equals gcd over all integers."""
    g = 0
    for s in range(D.degree + 2):
        g = math.gcd(g, D(s))
    return g


def is_isotrivial(family: CurveFamily) -> bool:
    j = family.j()
    return j.num.degree <= 0 and j.den.degree <= 0


def squarefree_eligibility(family: CurveFamily) -> list[str]:
    """Reasons the square-free specialization hypotheses fail (empty if eligible)."""
    try:
        D = polynomial_discriminant(family)
    except FamilyHypothesisError as exc:
        return [str(exc)]
    problems = []
    if is_isotrivial(family):
        problems.append("family is isotrivial (j constant)")
    if has_repeated_roots(D):
        problems.append(f"discriminant {D} has repeated roots")
    fd = fixed_divisor(D)
    ffd = factorize(fd)
    if not ffd.complete or any(e > 1 for _, e in ffd.factors):
        problems.append(f"fixed divisor {fd} of the discriminant is not square-free")
    return problems


def _squarefree_eval(family: CurveFamily, D: IntPoly, n: int) -> SearchReport | None:
    v = D(n)
    if v == 0:
        return None
    f = factorize(v)
    if not f.complete:
        log.warning("skipping n=%d: discriminant value not fully factored", n)
        return None
    if any(e > 1 for _, e in f.factors):
        return None
    c, bd = _analyse(family, n)
    checks = {"c_equals_1": c == 1, "all_v_delta_at_most_1": all(x.v_delta <= 1 for x in bd)}
    return SearchReport(family.id, Fraction(n), c, tuple(bd), _evidence(v, f), {}, checks)


def squarefree_scan(family: CurveFamily, limit: int, start: int = 1, jobs: int = 1) -> Iterator[SearchReport]:
    """Reports for start <= n <= limit with Delta(n) square-free; refuses ineligible families.

    """
    problems = squarefree_eligibility(family)
    if problems:
        raise FamilyHypothesisError(f"{family.id}: " + "; ".join(problems))
    D = polynomial_discriminant(family)
    fn = partial(_squarefree_eval, family, D)
    for rep in ordered_map(fn, range(start, limit + 1), jobs):
        if rep is not None:
            yield rep


@dataclass(frozen=True)
class DiscriminantShape:
    """Delta(T) = m * prod F_i^{m_i}: m is the content, F the square-free kernel."""

    m: int
    F: IntPoly
    degree: int


def discriminant_shape(family: CurveFamily) -> DiscriminantShape:
    D = polynomial_discriminant(family)
    m = D.content() * (1 if D.lc > 0 else -1)
    return DiscriminantShape(m, squarefree_kernel(D), D.degree)


def default_sieve_s(F: IntPoly) -> int:
    return 2 * F.degree + 1


def _bound_eval(family: CurveFamily, F: IntPoly, s: int, bound: int, n: int) -> SearchReport | None:
    v = F(n)
    om, f = _omega_or_none(v)
    if om is None or om > s:
        if om is None and f is not None:
            log.warning("skipping n=%d: F(n) not fully factored", n)
        return None
    try:
        c, bd = _analyse(family, n)
    except ValueError:
        return None
    bounds = {"general": {"bound": bound, "satisfied": c <= bound}}
    return SearchReport(family.id, Fraction(n), c, tuple(bd), _evidence(v, f), bounds, {})


def bound_scan(family: CurveFamily, limit: int, s: int | None = None, start: int = 1, jobs: int = 1) -> Iterator[SearchReport]:
    """n with F(n) in P_s (F the square-free kernel of Delta), each checked against the general bound."""
    if is_isotrivial(family):
        raise FamilyHypothesisError(f"{family.id}: family is isotrivial")
    shape = discriminant_shape(family)
    s = default_sieve_s(shape.F) if s is None else s
    bound = tamagawa_bound(shape.m, s, shape.degree)
    fn = partial(_bound_eval, family, shape.F, s, bound)
    for rep in ordered_map(fn, range(start, limit + 1), jobs):
        if rep is not None:
            yield rep


def _refined_eval(family: CurveFamily, g: IntPoly, bound: int, n: int) -> SearchReport | None:
    v = g(n)
    if v == 0:
        return None
    f = factorize(v)
    if not f.complete:
        log.warning("skipping n=%d: g(n) not fully factored", n)
        return None
    if any(e > 1 for _, e in f.factors):
        return None
    c, bd = _analyse(family, n)
    bounds = {"refined": {"bound": bound, "satisfied": c <= bound}}
    return SearchReport(family.id, Fraction(n), c, tuple(bd), _evidence(v, f), bounds, {})


def _divisors(n: int) -> list[int]:
    f = factorize(abs(n))
    out = [1]
    for p, e in f.factors:
        out = [d * p**k for d in out for k in range(e + 1)]
    return out


def _has_rational_root(g: IntPoly) -> bool:
    """Rational root test; for degree 2 or 3 this decides reducibility over Q."""
    if g.coeffs[0] == 0:
        return True
    for a in _divisors(g.coeffs[0]):
        for b in _divisors(g.lc):
            for x in (Fraction(a, b), Fraction(-a, b)):
                if sum(c * x**i for i, c in enumerate(g.coeffs)) == 0:
                    return True
    return False


def refined_bound_scan(family: CurveFamily, limit: int, start: int = 1, jobs: int = 1) -> Iterator[SearchReport]:
    """Delta = m g(T) with g quadratic or cubic: n with g(n) square-free against 16 (log2 m + 1)^d(m)."""
    D = polynomial_discriminant(family)
    if is_isotrivial(family):
        raise FamilyHypothesisError(f"{family.id}: family is isotrivial")
    m = D.content() * (1 if D.lc > 0 else -1)
    g = D.exact_div_scalar(m)
    if g.degree not in (2, 3):
        raise FamilyHypothesisError(f"{family.id}: Delta/m has degree {g.degree}, need 2 or 3")
    if has_repeated_roots(g):
        raise FamilyHypothesisError(f"{family.id}: g(T) = {g} has a repeated factor")
    if _has_rational_root(g):
        raise FamilyHypothesisError(f"{family.id}: g(T) = {g} is reducible")
    bound = refined_tamagawa_bound(m)
    fn = partial(_refined_eval, family, g, bound)
    for rep in ordered_map(fn, range(start, limit + 1), jobs):
        if rep is not None:
            yield rep


# ---------------------------------------------------------------------------
# p | c(E) on Kubert curves


def _divisibility_eval(order: int, p: int, q: int) -> SearchReport | None:
    fam = KUBERT[order]
    v = check_split_at_parameter_prime(fam, q, p)
    if v.local is None:
        return None
    c, bd = _analyse(fam, v.lam)
    checks = {
        "split_at_q": v.split,
        "p_divides_cq": v.divisible,
        "cq_equals_order_times_p": v.matches_claim,
        "p_divides_c": c % p == 0,
    }
    return SearchReport(fam.id, v.lam, c, tuple(bd), None, {}, checks)


def torsion_divisibility_search(order: int, p: int, count: int, jobs: int = 1) -> list[SearchReport]:
    """E_{N', q^p} for the first `count` primes q (degenerate parameters skipped)."""
    if order not in KUBERT:
        raise ValueError(f"N' must be one of {sorted(KUBERT)}")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    fn = partial(_divisibility_eval, order, p)
    reps = (r for r in ordered_map(fn, primes(2), jobs) if r is not None)
    return list(itertools.islice(reps, count))
