"""Allowed factorization shapes of c(E) for curves with a rational cyclic N-isogeny."""

from __future__ import annotations

from dataclasses import dataclass

from .arith import factorize


@dataclass(frozen=True)
class Shape:
    """c = prod p^e over `primes`, with exponent ranges (lo, hi); hi None means unbounded."""

    degrees: frozenset[int]
    exponents: tuple[tuple[int, int, int | None], ...]  # (prime, lo, hi)

    def describe(self) -> str:
        parts = []
        for p, lo, hi in self.exponents:
            if hi is None:
                parts.append(f"{p}^n (n >= {lo})")
            else:
                parts.append(f"{p}^e (e in {lo}..{hi})")
        return " * ".join(parts)


SHAPES: tuple[Shape, ...] = (
    Shape(frozenset({14, 19, 43, 67, 163}), ((2, 1, None),)),
    Shape(frozenset({11, 27, 37}), ((2, 0, None), (3, 0, 1))),
    Shape(frozenset({17}), ((2, 1, None), (3, 0, 1), (17, 0, 1))),
    Shape(frozenset({15}), ((2, 1, None), (3, 0, 2), (5, 0, 1))),
    Shape(frozenset({21}), ((2, 1, None), (3, 0, 2), (7, 0, 1))),
)


def shape_for(N: int) -> Shape | None:
    for s in SHAPES:
        if N in s.degrees:
            return s
    return None


@dataclass(frozen=True)
class ShapeVerdict:
    N: int
    c: int
    support_ok: bool  # only the allowed primes, each within its upper cap
    lower_ok: bool  # each lower bound on exponents met (n >= 1 where required)
    shape: str

    @property
    def ok(self) -> bool:
        return self.support_ok and self.lower_ok


def check_shape(N: int, c: int) -> ShapeVerdict:
    s = shape_for(N)
    if s is None:
        raise ValueError(f"no shape is known for isogeny degree {N}")
    f = factorize(c).as_dict()
    allowed = {p: (lo, hi) for p, lo, hi in s.exponents}
    support_ok = all(p in allowed and (allowed[p][1] is None or e <= allowed[p][1]) for p, e in f.items())
    lower_ok = all(f.get(p, 0) >= lo for p, (lo, _) in allowed.items())
    return ShapeVerdict(N, c, support_ok, lower_ok, s.describe())
