"""Weierstrass models over Q: invariants, coordinate changes, minimal models, twists, group law."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

from .arith import factorize, is_squarefree, val

Rational = Union[int, Fraction]

TORSION_CAP = 16


class SingularCurveError(ValueError):
    pass


class NotOnCurveError(ValueError):
    pass


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class WeierstrassModel:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with exact rational coefficients."""

    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    a6: Fraction

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        if self.discriminant == 0:
            raise SingularCurveError(f"singular model {self.ainvs_str()}")

    @classmethod
    def from_ainvs(cls, ainvs: Iterable[Rational | str]) -> "WeierstrassModel":
        a = [_q(x) for x in ainvs]
        if len(a) == 2:
            a = [Fraction(0)] * 3 + a
        if len(a) != 5:
            raise ValueError("expected 5 a-invariants (or 2 for a short model)")
        return cls(*a)

    @classmethod
    def parse(cls, text: str) -> "WeierstrassModel":
        """Parse "[a1,a2,a3,a4,a6]"; entries may be integers, decimals or p/q."""
        body = text.strip()
        if not re.fullmatch(r"\[[^\[\]]*\]", body):
            raise ValueError(f"curve literal must look like [a1,a2,a3,a4,a6], got {text!r}")
        parts = [p for p in body[1:-1].split(",")]
        try:
            return cls.from_ainvs(parts)
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, SingularCurveError):
                raise
            raise ValueError(f"bad curve literal {text!r}: {exc}") from exc

    @property
    def ainvs(self) -> tuple[Fraction, ...]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def ainvs_str(self) -> str:
        return "[" + ",".join(str(a) for a in self.ainvs) + "]"

    def int_ainvs(self) -> tuple[int, ...]:
        if not self.is_integral():
            raise ValueError("model is not integral")
        return tuple(int(a) for a in self.ainvs)

    def is_integral(self) -> bool:
        return all(a.denominator == 1 for a in self.ainvs)

    # b and c invariants
    @property
    def b2(self) -> Fraction:
        return self.a1**2 + 4 * self.a2

    @property
    def b4(self) -> Fraction:
        return 2 * self.a4 + self.a1 * self.a3

    @property
    def b6(self) -> Fraction:
        return self.a3**2 + 4 * self.a6

    @property
    def b8(self) -> Fraction:
        a1, a2, a3, a4, a6 = self.ainvs
        return a1**2 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3**2 - a4**2

    @property
    def c4(self) -> Fraction:
        return self.b2**2 - 24 * self.b4

    @property
    def c6(self) -> Fraction:
        return -self.b2**3 + 36 * self.b2 * self.b4 - 216 * self.b6

    @property
    def discriminant(self) -> Fraction:
        b2, b4, b6, b8 = self.b2, self.b4, self.b6, self.b8
        return -(b2**2) * b8 - 8 * b4**3 - 27 * b6**2 + 9 * b2 * b4 * b6

    @property
    def j(self) -> Fraction:
        return self.c4**3 / self.discriminant

    def contains(self, x: Rational, y: Rational) -> bool:
        a1, a2, a3, a4, a6 = self.ainvs
        return y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6

    def __str__(self) -> str:
        return self.ainvs_str()

    def to_json(self) -> list[str]:
        return [str(a) for a in self.ainvs]


def invariants(E: WeierstrassModel) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    """(c4, c6, discriminant, j)."""
    return E.c4, E.c6, E.discriminant, E.j


# ---------------------------------------------------------------------------
# coordinate changes


@dataclass(frozen=True)
class ModelMap:
    """x = u^2 x' + r, y = u^3 y' + s u^2 x' + t, taking a source model to a target model."""

    u: Fraction = Fraction(1)
    r: Fraction = Fraction(0)
    s: Fraction = Fraction(0)
    t: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("u", "r", "s", "t"):
            object.__setattr__(self, name, _q(getattr(self, name)))
        if self.u == 0:
            raise ValueError("u must be nonzero")

    def apply(self, E: WeierstrassModel) -> WeierstrassModel:
        u, r, s, t = self.u, self.r, self.s, self.t
        a1, a2, a3, a4, a6 = E.ainvs
        return WeierstrassModel(
            (a1 + 2 * s) / u,
            (a2 - s * a1 + 3 * r - s * s) / u**2,
            (a3 + r * a1 + 2 * t) / u**3,
            (a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t) / u**4,
            (a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1) / u**6,
        )

    def compose(self, then: "ModelMap") -> "ModelMap":
        """The map equal to applying ``self`` first and ``then`` second."""
        u1, r1, s1, t1 = self.u, self.r, self.s, self.t
        u2, r2, s2, t2 = then.u, then.r, then.s, then.t
        return ModelMap(
            u1 * u2,
            r1 + u1**2 * r2,
            s1 + u1 * s2,
            t1 + s1 * u1**2 * r2 + u1**3 * t2,
        )

    def inverse(self) -> "ModelMap":
        u, r, s, t = self.u, self.r, self.s, self.t
        return ModelMap(1 / u, -r / u**2, -s / u, (r * s - t) / u**3)

    def map_point(self, P: "CurvePoint") -> "CurvePoint":
        """Image on the target model of a point on the source model."""
        if P.is_infinity:
            return P
        x1 = (P.x - self.r) / self.u**2
        y1 = (P.y - self.s * self.u**2 * x1 - self.t) / self.u**3
        return CurvePoint(x1, y1)

    def is_identity(self) -> bool:
        return (self.u, self.r, self.s, self.t) == (1, 0, 0, 0)


IDENTITY = ModelMap()


def isomorphism(E: WeierstrassModel, F: WeierstrassModel, u: Fraction) -> ModelMap:
    """The map E -> F with the given scaling u (F must be isomorphic to E with that u)."""
    u = _q(u)
    s = (u * F.a1 - E.a1) / 2
    r = (u**2 * F.a2 - E.a2 + s * E.a1 + s * s) / 3
    t = (u**3 * F.a3 - E.a3 - r * E.a1) / 2
    m = ModelMap(u, r, s, t)
    if m.apply(E) != F:
        raise ValueError("models are not isomorphic with this scaling")
    return m


def integral_model(E: WeierstrassModel) -> tuple[WeierstrassModel, ModelMap]:
    """An isomorphic model with integer coefficients, obtained by u-scaling only."""
    if E.is_integral():
        return E, IDENTITY
    dens = [a.denominator for a in E.ainvs]
    scale = 1
    for p in sorted({p for d in dens for p, _ in factorize(d).factors}):
        e = max(-(-val(d, p) // i) for d, i in zip(dens, (1, 2, 3, 4, 6)) if d % p == 0)
        scale *= p**e
    m = ModelMap(Fraction(1, scale))
    return m.apply(E), m


def _kraus_ok_at_2(c4: int, c6: int) -> bool:
    return c6 % 4 == 3 or (c4 % 16 == 0 and c6 % 32 in (0, 8))


def _kraus_ok_at_3(c6: int) -> bool:
    return c6 == 0 or val(c6, 3) != 2


def reduced_model_from_c4c6(c4: int, c6: int) -> WeierstrassModel:
    """The reduced integral model (a1, a3 in {0,1}, a2 in {-1,0,1}) with invariants c4, c6."""
    b2 = (-c6) % 12
    if b2 > 6:
        b2 -= 12
    b4 = (b2 * b2 - c4) // 24
    b6 = (-(b2**3) + 36 * b2 * b4 - c6) // 216
    a1 = b2 % 2
    a3 = b6 % 2
    a2 = (b2 - a1) // 4
    a4 = (b4 - a1 * a3) // 2
    a6 = (b6 - a3) // 4
    E = WeierstrassModel(a1, a2, a3, a4, a6)
    if E.c4 != c4 or E.c6 != c6:
        raise ArithmeticError(f"c4={c4}, c6={c6} are not invariants of an integral model")
    return E


def minimal_scaling(E: WeierstrassModel) -> int:
    """Largest u (as a positive integer) such that scaling the integral model E by u stays integral.

    Uses Kraus' conditions prime by prime (the Laska-Kraus-Connell algorithm).
    """
    c4, c6, disc = int(E.c4), int(E.c6), int(E.discriminant)
    g = math.gcd(c6 * c6, disc)
    u = 1
    if g == 1:
        return 1
    for p, e in factorize(g).factors:
        if e < 12:
            continue
        d = val(disc, p) // 12
        if c4:
            d = min(d, val(c4, p) // 4)
        if c6:
            d = min(d, val(c6, p) // 6)
        while d > 0:
            a, b = c4 // p ** (4 * d), c6 // p ** (6 * d)
            if p == 2 and not _kraus_ok_at_2(a, b):
                d -= 1
            elif p == 3 and not _kraus_ok_at_3(b):
                d -= 1
            else:
                break
        u *= p**d
    return u


def global_minimal_model(E: WeierstrassModel) -> tuple[WeierstrassModel, ModelMap]:
    """The reduced global minimal model of E and the map from E to it."""
    F, to_integral = integral_model(E)
    u = minimal_scaling(F)
    c4, c6 = int(F.c4) // u**4, int(F.c6) // u**6
    M = reduced_model_from_c4c6(c4, c6)
    return M, to_integral.compose(isomorphism(F, M, u))


def is_minimal_at(E: WeierstrassModel, p: int) -> bool:
    """Kraus criterion for integral models: v(c4) < 4 or v(disc) < 12 (with the usual p=2,3 care)."""
    if not E.is_integral():
        return False
    return minimal_scaling_at(E, p) == 0


def minimal_scaling_at(E: WeierstrassModel, p: int) -> int:
    u = minimal_scaling(E)
    return val(u, p) if u > 1 else 0


# ---------------------------------------------------------------------------
# twists


def quadratic_twist(E: WeierstrassModel, d: int) -> WeierstrassModel:
    """E^d, via the completed-square model (not re-minimalized)."""
    if d == 0:
        raise ValueError("twist by 0")
    if not is_squarefree(d):
        raise ValueError(f"twist parameter {d} is not square-free")
    if d == 1:
        return E
    return WeierstrassModel(0, d * E.b2 / 4, 0, d * d * E.b4 / 2, d**3 * E.b6 / 4)


def short_model(E: WeierstrassModel) -> WeierstrassModel:
    """y^2 = x^3 - 27 c4 x - 54 c6 (isomorphic over Q, u = 1/6)."""
    return WeierstrassModel(0, 0, 0, -27 * E.c4, -54 * E.c6)


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class CurvePoint:
    """An affine point (x, y), or the point at infinity when x is None."""

    x: Fraction | None = None
    y: Fraction | None = None

    def __post_init__(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("both coordinates or neither")
        if self.x is not None:
            object.__setattr__(self, "x", _q(self.x))
            object.__setattr__(self, "y", _q(self.y))

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def __str__(self) -> str:
        return "O" if self.is_infinity else f"({self.x}, {self.y})"


INFINITY = CurvePoint()


def _check(E: WeierstrassModel, P: CurvePoint) -> None:
    if not P.is_infinity and not E.contains(P.x, P.y):
        raise NotOnCurveError(f"{P} is not on {E}")


def negate(E: WeierstrassModel, P: CurvePoint) -> CurvePoint:
    if P.is_infinity:
        return P
    _check(E, P)
    return CurvePoint(P.x, -P.y - E.a1 * P.x - E.a3)


def add(E: WeierstrassModel, P: CurvePoint, Q: CurvePoint) -> CurvePoint:
    _check(E, P)
    _check(E, Q)
    if P.is_infinity:
        return Q
    if Q.is_infinity:
        return P
    a1, a2, a3, a4, a6 = E.ainvs
    x1, y1, x2, y2 = P.x, P.y, Q.x, Q.y
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return INFINITY
        lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
    else:
        lam = (y2 - y1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return CurvePoint(x3, y3)


def multiply(E: WeierstrassModel, P: CurvePoint, n: int) -> CurvePoint:
    if n < 0:
        return multiply(E, negate(E, P), -n)
    R, B = INFINITY, P
    while n:
        if n & 1:
            R = add(E, R, B)
        B = add(E, B, B)
        n >>= 1
    return R


def point_order(E: WeierstrassModel, P: CurvePoint) -> int | None:
    """Order of P if at most 16, else None (no rational torsion exceeds order 12)."""
    _check(E, P)
    Q = P
    for k in range(1, TORSION_CAP + 1):
        if Q.is_infinity:
            return k
        Q = add(E, Q, P)
    return None
