"""One-parameter families E/Q(T) and their specializations."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from .arith import IntPoly, is_prime, poly_exact_div, poly_gcd, val_q
from .curve import CurvePoint, SingularCurveError, WeierstrassModel, point_order
from .localdata import SPLIT, LocalData, tate_algorithm

T = IntPoly.x()
ONE = IntPoly.const(1)
ZERO = IntPoly()

_WEIGHTS = (1, 2, 3, 4, 6)


@dataclass(frozen=True)
class RationalFunction:
    num: IntPoly
    den: IntPoly = ONE

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        d = self.den(t)
        if d == 0:
            raise ZeroDivisionError(f"pole at T = {t}")
        return Fraction(self.num(t)) / d

    def reduced(self) -> "RationalFunction":
        g = poly_gcd(self.num, self.den)
        num, den = self.num, self.den
        if g.degree > 0:
            num, den = poly_exact_div(num, g), poly_exact_div(den, g)
        c = math.gcd(num.content(), den.content())
        if den.lc < 0:
            c = -c
        num, den = num.exact_div_scalar(c), den.exact_div_scalar(c)
        if den.lc < 0:
            num, den = -num, -den
        return RationalFunction(num, den)

    @property
    def is_polynomial(self) -> bool:
        return self.den == ONE

    def __str__(self) -> str:
        return str(self.num) if self.is_polynomial else f"({self.num}) / ({self.den})"


@dataclass(frozen=True)
class CurveFamily:
    """a_i(T) = nums[i] / den for i in (1, 2, 3, 4, 6)."""

    id: str
    nums: tuple[IntPoly, IntPoly, IntPoly, IntPoly, IntPoly]
    den: IntPoly = ONE
    torsion_order: int | None = None
    stated_discriminant: IntPoly | None = None
    stated_c4: IntPoly | None = None
    j_function: RationalFunction | None = None
    description: str = ""
    point: tuple[int, int] | None = (0, 0)  # the advertised torsion point, if any

    def __hash__(self) -> int:
        return hash(self.id)

    @cached_property
    def _scaled(self) -> tuple[IntPoly, ...]:
        # u = 1/den clears denominators: a_i' = nums[i] * den^(w_i - 1)
        return tuple(n * self.den ** (w - 1) for n, w in zip(self.nums, _WEIGHTS))

    @cached_property
    def _symbolic(self) -> dict[str, IntPoly]:
        a1, a2, a3, a4, a6 = self._scaled
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        disc = -(b2 * b2 * b8) - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        c4 = b2 * b2 - 24 * b4
        return {"disc": disc, "c4": c4}

    @property
    def is_polynomial(self) -> bool:
        return self.den == ONE

    def discriminant(self) -> RationalFunction:
        return RationalFunction(self._symbolic["disc"], self.den**12).reduced()

    def c4(self) -> RationalFunction:
        return RationalFunction(self._symbolic["c4"], self.den**4).reduced()

    def j(self) -> RationalFunction:
        c4 = self._symbolic["c4"]
        return RationalFunction(c4**3, self._symbolic["disc"]).reduced()

    def ainvs_str(self) -> str:
        parts = [str(n) if self.is_polynomial else f"({n})/({self.den})" for n in self.nums]
        return "[" + ", ".join(parts) + "]"


@dataclass(frozen=True)
class SpecializationRecord:
    family_id: str
    t: Fraction
    model: WeierstrassModel | None
    admissible: bool
    reason: str = ""

    def to_json(self) -> dict:
        return {
            "family": self.family_id,
            "t": str(self.t),
            "admissible": self.admissible,
            "model": self.model.to_json() if self.model else None,
            "reason": self.reason,
        }


def specialize(family: CurveFamily, t) -> SpecializationRecord:
    t = Fraction(t)
    d = family.den(t)
    if d == 0:
        return SpecializationRecord(family.id, t, None, False, f"coefficient pole at T = {t}")
    ainvs = [Fraction(n(t)) / d for n in family.nums]
    try:
        E = WeierstrassModel.from_ainvs(ainvs)
    except SingularCurveError:
        return SpecializationRecord(family.id, t, None, False, f"discriminant vanishes at T = {t}")
    return SpecializationRecord(family.id, t, E, True)


def family_discriminant(family: CurveFamily) -> IntPoly | RationalFunction:
    """The stated discriminant when the family carries one, else the one computed from the a_i(T)."""
    if family.stated_discriminant is not None:
        return family.stated_discriminant
    D = family.discriminant()
    return D.num if D.is_polynomial else D


def family_c4(family: CurveFamily) -> IntPoly | RationalFunction:
    if family.stated_c4 is not None:
        return family.stated_c4
    c = family.c4()
    return c.num if c.is_polynomial else c


# ---------------------------------------------------------------------------
# the concrete families


def _tate_normal(id_: str, b: IntPoly, c: IntPoly, den: IntPoly, order: int, **kw) -> CurveFamily:
    """y^2 + (1 - c) xy - b y = x^3 - b x^2 with b = b/den, c = c/den."""
    return CurveFamily(id_, (den - c, -b, -b, ZERO, ZERO), den, order, **kw)


TORSION4 = _tate_normal(
    "Torsion4", T, ZERO, ONE, 4,
    stated_discriminant=T**4 * (16 * T + 1),
    stated_c4=16 * T**2 + 16 * T + 1,
    description="y^2 + xy - Ty = x^3 - Tx^2, a point of order 4 at (0,0)",
)

TORSION5 = _tate_normal(
    "Torsion5", T, T, ONE, 5,
    stated_discriminant=T**5 * (T**2 - 11 * T - 1),
    stated_c4=T**4 - 12 * T**3 + 14 * T**2 + 12 * T + 1,
    description="y^2 + (1 - T)xy - Ty = x^3 - Tx^2, a point of order 5 at (0,0)",
)


def _kubert_families() -> dict[int, CurveFamily]:
    t = T
    fams = {}
    fams[4] = _tate_normal("Kubert4", t, ZERO, ONE, 4)
    fams[5] = _tate_normal("Kubert5", t, t, ONE, 5)
    fams[6] = _tate_normal("Kubert6", t + t**2, t, ONE, 6)
    fams[7] = _tate_normal("Kubert7", t**3 - t**2, t**2 - t, ONE, 7)
    f8 = (2 * t - 1) * (t - 1)
    fams[8] = _tate_normal("Kubert8", f8 * t, f8, t, 8)
    c9 = t**2 * (t - 1)
    fams[9] = _tate_normal("Kubert9", c9 * (t**2 - t + 1), c9, ONE, 9)
    d10 = t**2 - 3 * t + 1
    f10 = t * (t - 1) * (2 * t - 1)
    fams[10] = _tate_normal("Kubert10", t**2 * f10, -f10 * d10, d10**2, 10)
    g12 = t * (2 * t - 1) * (3 * t**2 - 3 * t + 1)
    fams[12] = _tate_normal("Kubert12", g12 * (2 * t**2 - 2 * t + 1), -g12 * (t - 1), (t - 1) ** 4, 12)
    return fams


KUBERT = _kubert_families()
KUBERT_ORDERS = tuple(sorted(KUBERT))

# Isogeny families y^2 = x^3 + a4(t) x + a6(t) with j = F_l(t)
_ISOGENY_DATA = {
    5: (
        -3 * (T**2 + 10 * T + 5) * (T**2 + 22 * T + 125),
        -2 * (T**2 + 22 * T + 125) ** 2 * (T**2 + 4 * T - 1),
        RationalFunction((T**2 + 10 * T + 5) ** 3, T),
    ),
    7: (
        -3 * (T**2 + 5 * T + 1) * (T**2 + 13 * T + 49),
        -2 * (T**2 + 13 * T + 49) * (T**4 + 14 * T**3 + 63 * T**2 + 70 * T - 7),
        RationalFunction((T**2 + 13 * T + 49) * (T**2 + 5 * T + 1) ** 3, T),
    ),
    13: (
        -3 * (T**2 + 5 * T + 13) * (T**2 + 6 * T + 13) * (T**4 + 7 * T**3 + 20 * T**2 + 19 * T + 1),
        -2
        * (T**2 + 5 * T + 13)
        * (T**2 + 6 * T + 13) ** 2
        * (T**6 + 10 * T**5 + 46 * T**4 + 108 * T**3 + 122 * T**2 + 38 * T - 1),
        RationalFunction((T**2 + 5 * T + 13) * (T**4 + 7 * T**3 + 20 * T**2 + 19 * T + 1) ** 3, T),
    ),
}

ISOGENY = {
    ell: CurveFamily(
        f"Isogeny{ell}",
        (ZERO, ZERO, ZERO, a4, a6),
        ONE,
        None,
        j_function=F,
        description=f"y^2 = x^3 + a4(t) x + a6(t) with a rational {ell}-isogeny, j = F_{ell}(t)",
        point=None,
    )
    for ell, (a4, a6, F) in _ISOGENY_DATA.items()
}

_REGISTRY: dict[str, CurveFamily] = {}


def register_family(family: CurveFamily, *, replace: bool = False) -> CurveFamily:
    if family.id in _REGISTRY and not replace and _REGISTRY[family.id] != family:
        raise ValueError(f"family {family.id!r} already registered")
    _REGISTRY[family.id] = family
    return family


def get_family(family_id: str) -> CurveFamily:
    try:
        return _REGISTRY[family_id]
    except KeyError:
        raise KeyError(f"unknown family {family_id!r}; known: {', '.join(sorted(_REGISTRY))}") from None


def list_families() -> list[str]:
    return sorted(_REGISTRY)


for _f in (TORSION4, TORSION5, *KUBERT.values(), *ISOGENY.values()):
    register_family(_f)


# ---------------------------------------------------------------------------
# user families from text

_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(T(?:\s*\^\s*(\d+))?)?")


def parse_poly(text: str) -> IntPoly:
    """Parse an integer polynomial in T such as "3*T^2 - T + 5"."""
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos or (not m.group(2) and not m.group(3)):
            raise ValueError(f"cannot parse polynomial {text!r} at position {pos}")
        sign, digits, tpart, exp = m.groups()
        c = int(digits) if digits else 1
        if sign == "-":
            c = -c
        e = (int(exp) if exp else 1) if tpart else 0
        coeffs[e] = coeffs.get(e, 0) + c
        pos = m.end()
        if pos < len(s) and s[pos] not in "+-":
            raise ValueError(f"cannot parse polynomial {text!r} at position {pos}")
    n = max(coeffs) + 1
    return IntPoly([coeffs.get(i, 0) for i in range(n)])


def family_from_text(family_id: str, text: str, **kw) -> CurveFamily:
    """A family from "[a1,a2,a3,a4,a6]" with integer polynomials in T as entries."""
    body = text.strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise ValueError("family literal must look like [a1,a2,a3,a4,a6]")
    parts = body[1:-1].split(",")
    if len(parts) != 5:
        raise ValueError("family literal needs 5 entries")
    kw.setdefault("point", None)
    fam = CurveFamily(family_id, tuple(parse_poly(p) for p in parts), ONE, **kw)
    if fam._symbolic["disc"].is_zero():
        raise ValueError("family is singular over Q(T)")
    return fam


# ---------------------------------------------------------------------------
# specific constructions


def isogeny_family_curve(ell: int, t) -> SpecializationRecord:
    if ell not in ISOGENY:
        raise ValueError(f"isogeny family only for l in {sorted(ISOGENY)}")
    t = Fraction(t)
    if t == 0:
        return SpecializationRecord(ISOGENY[ell].id, t, None, False, "F_l has a pole at t = 0")
    return specialize(ISOGENY[ell], t)


def isogeny_j(ell: int, t) -> Fraction:
    return ISOGENY[ell].j_function(t)


def kubert_curve(order: int, lam) -> SpecializationRecord:
    if order not in KUBERT:
        raise ValueError(f"Kubert families exist for N' in {KUBERT_ORDERS}")
    return specialize(KUBERT[order], lam)


def torsion_point_order(rec: SpecializationRecord) -> int | None:
    return point_order(rec.model, CurvePoint(0, 0))


@dataclass(frozen=True)
class SplitVerdict:
    family_id: str
    lam: Fraction
    q: int
    p: int
    local: LocalData | None
    split: bool
    divisible: bool
    claimed_cq: int | None
    matches_claim: bool
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.split and self.divisible and self.matches_claim

    def to_json(self) -> dict:
        return {
            "family": self.family_id,
            "lambda": str(self.lam),
            "q": self.q,
            "p": self.p,
            "local": self.local.to_json() if self.local else None,
            "split": self.split,
            "p_divides_cq": self.divisible,
            "claimed_cq": self.claimed_cq,
            "matches_claim": self.matches_claim,
            "reason": self.reason,
        }


def check_split_at_parameter_prime(family: CurveFamily, q: int, p: int, lam=None, claimed_cq: int | None = None) -> SplitVerdict:
    """At lambda with v_q(lambda) = p: split multiplicative at q, p | c_q, and c_q = N' p when claimed.

    claimed_cq defaults to torsion_order * p; pass 0 to skip the exact-value comparison.
    """
    if not is_prime(q) or not is_prime(p):
        raise ValueError("q and p must be prime")
    lam = Fraction(q**p) if lam is None else Fraction(lam)
    if val_q(lam, q) != p:
        raise ValueError(f"v_{q}({lam}) != {p}")
    if claimed_cq is None and family.torsion_order:
        claimed_cq = family.torsion_order * p
    rec = specialize(family, lam)
    if not rec.admissible:
        return SplitVerdict(family.id, lam, q, p, None, False, False, claimed_cq, False, rec.reason)
    ld = tate_algorithm(rec.model, q)
    split = ld.kind == SPLIT
    divisible = ld.cp % p == 0
    matches = not claimed_cq or ld.cp == claimed_cq
    return SplitVerdict(family.id, lam, q, p, ld, split, divisible, claimed_cq or None, matches)
