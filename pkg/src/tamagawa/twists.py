"""How reduction types move under quadratic twist, and the twist search for extra 2-power in c(E)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import partial
from typing import Iterator

from .arith import factorize, is_squarefree
from .curve import WeierstrassModel, global_minimal_model, quadratic_twist
from .localdata import (
    ADDITIVE,
    GOOD,
    I0,
    II,
    III,
    IIIs,
    IIs,
    IV,
    IVs,
    I,
    Istar,
    KodairaType,
    LocalData,
    global_tamagawa,
)
from .parallel import ordered_map

CTX_ODD_DIVIDES = "p odd, p | d"
CTX_TWO = "p = 2"
CTX_ODD_GOOD = "p odd, p not dividing d, good reduction"


@dataclass(frozen=True)
class TwistRule:
    source: KodairaType | str
    target: KodairaType | str
    context: str


# I_n <-> I_n* holds for every n >= 1; "I_n" stands for that whole row.
TABLE2: tuple[TwistRule, ...] = (
    TwistRule(I0, Istar(0), CTX_ODD_DIVIDES),
    TwistRule("I_n", "I_n*", CTX_ODD_DIVIDES),
    TwistRule(II, IVs, CTX_ODD_DIVIDES),
    TwistRule(III, IIIs, CTX_ODD_DIVIDES),
    TwistRule(IV, IIs, CTX_ODD_DIVIDES),
    TwistRule(Istar(0), I0, CTX_ODD_DIVIDES),
    TwistRule(IIs, IV, CTX_ODD_DIVIDES),
    TwistRule(IIIs, III, CTX_ODD_DIVIDES),
    TwistRule(IVs, II, CTX_ODD_DIVIDES),
)

_TABLE2_FIXED = {r.source: r.target for r in TABLE2 if isinstance(r.source, KodairaType)}

GOOD_AT_2_TWISTS = frozenset({I0, Istar(4), Istar(8), II, IIs})


class _Unconstrained:
    """Verdict for (type, p, d) contexts the lemmas say nothing about."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNCONSTRAINED"

    def __bool__(self) -> bool:
        return False


UNCONSTRAINED = _Unconstrained()


def table2_image(k: KodairaType) -> KodairaType:
    """Image of k under the p | d (p odd) correspondence."""
    if k.symbol == "I" and k.n > 0:
        return Istar(k.n)
    if k.symbol == "I*" and k.n > 0:
        return I(k.n)
    return _TABLE2_FIXED[k]


def predict_twist_type(src: KodairaType, p: int, d: int) -> frozenset[KodairaType] | _Unconstrained:
    if d == 0 or not is_squarefree(d):
        raise ValueError(f"twist parameter {d} must be a nonzero square-free integer")
    if p != 2:
        if d % p == 0:
            return frozenset({table2_image(src)})
        if src == I0:
            return frozenset({I0})
        return UNCONSTRAINED
    if src == I0:
        return GOOD_AT_2_TWISTS
    if src.symbol == "I":
        # the ramified twists shift the subscript: I_n -> I*_{n+4} (d = 3 mod 4) or I*_{n+8} (d even)
        if d % 4 == 1:
            return frozenset({src})
        return frozenset({Istar(src.n + (4 if d % 4 == 3 else 8))})
    return UNCONSTRAINED


# ---------------------------------------------------------------------------
# twist search


class TwistHypothesisError(ValueError):
    pass


@dataclass(frozen=True)
class TwistConstraints:
    max_abs_d: int = 10_000
    positive_only: bool = False
    num_prime_factors: int | None = None  # exact number of primes dividing d
    include_trivial: bool = False  # also report d = 1
    limit: int | None = None  # stop after this many results


@dataclass(frozen=True)
class TwistHit:
    d: int
    c: int
    c_base: int
    c2: int
    local_factors: dict[int, int]
    breakdown: tuple[LocalData, ...] = field(repr=False)

    @property
    def predicted(self) -> int:
        prod = self.c2 * self.c_base
        for v in self.local_factors.values():
            prod *= v
        return prod

    @property
    def identity_holds(self) -> bool:
        return self.predicted == self.c

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "c": self.c,
            "c_base": self.c_base,
            "c2": self.c2,
            "local_factors": {str(q): v for q, v in self.local_factors.items()},
            "identity_holds": self.identity_holds,
            "breakdown": [ld.to_json() for ld in self.breakdown],
        }


def check_twist_hypotheses(E: WeierstrassModel) -> tuple[int, list[LocalData]]:
    """c(E) and its breakdown, or TwistHypothesisError explaining which hypothesis fails."""
    c, breakdown = global_tamagawa(E)
    problems = []
    for ld in breakdown:
        if ld.p in (2, 3) and ld.kind != GOOD:
            problems.append(f"bad reduction at {ld.p} ({ld.kodaira})")
        elif ld.kind not in (GOOD, ADDITIVE):
            problems.append(f"multiplicative reduction at {ld.p} ({ld.kodaira})")
    if problems:
        raise TwistHypothesisError("; ".join(problems))
    return c, breakdown


def admissible_twist_parameters(disc: int, constraints: TwistConstraints) -> Iterator[int]:
    """Square-free d = 1 mod 4, coprime to 6*disc, by increasing |d| (positive first on ties)."""
    if constraints.include_trivial:
        yield 1
    for a in range(2, constraints.max_abs_d + 1):
        for d in (a,) if constraints.positive_only else (a, -a):
            if d % 4 != 1 or d % 3 == 0 or (disc % 2 == 0 and d % 2 == 0):
                continue
            f = factorize(d)
            if any(e > 1 for _, e in f.factors):
                continue
            if any(disc % q == 0 for q, _ in f.factors):
                continue
            if constraints.num_prime_factors is not None and len(f.factors) != constraints.num_prime_factors:
                continue
            yield d


def _evaluate_twist(ainvs: tuple[int, ...], c_base: int, d: int) -> TwistHit:
    E = WeierstrassModel.from_ainvs(ainvs)
    Ed = quadratic_twist(E, d)
    c, breakdown = global_tamagawa(Ed)
    by_p = {ld.p: ld for ld in breakdown}
    c2 = by_p[2].cp if 2 in by_p else 1
    qs = [q for q, _ in factorize(d).factors]
    local = {q: (by_p[q].cp if q in by_p else 1) for q in qs}
    return TwistHit(d, c, c_base, c2, local, tuple(breakdown))


def twist_search(E: WeierstrassModel, constraints: TwistConstraints = TwistConstraints(), jobs: int = 1) -> Iterator[TwistHit]:
    """Twists E^d over admissible d with c(E^d), checked against c2(E^d) * prod_q c_q(E^d) * c(E)."""
    M, _ = global_minimal_model(E)
    c_base, _ = check_twist_hypotheses(M)
    ds = admissible_twist_parameters(int(M.discriminant), constraints)
    hits = ordered_map(partial(_evaluate_twist, M.int_ainvs(), c_base), ds, jobs)
    if constraints.limit is not None:
        hits = itertools.islice(hits, constraints.limit)
    yield from hits
