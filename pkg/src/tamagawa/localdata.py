"""Tate's algorithm: Kodaira symbols, local Tamagawa numbers, conductor exponents."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .arith import count_roots_mod, factorize, has_root_mod, is_prime, val
from .curve import WeierstrassModel, global_minimal_model, integral_model

GOOD = "good"
SPLIT = "split-multiplicative"
NONSPLIT = "nonsplit-multiplicative"
ADDITIVE = "additive"
KINDS = (GOOD, SPLIT, NONSPLIT, ADDITIVE)

_SYMBOLS = ("I", "II", "III", "IV", "I*", "IV*", "III*", "II*")
_KODAIRA_RE = re.compile(r"^(I|II|III|IV)(\d*)(\*?)$")


class ContractError(ValueError):
    """Raised when an operation is called outside its precondition."""


@dataclass(frozen=True, order=True)
class KodairaType:
    symbol: str
    n: int = 0

    def __post_init__(self):
        if self.symbol not in _SYMBOLS:
            raise ValueError(f"unknown Kodaira symbol {self.symbol!r}")
        if self.symbol in ("I", "I*"):
            if self.n < 0:
                raise ValueError("I_n needs n >= 0")
        elif self.n != 0:
            raise ValueError(f"{self.symbol} takes no multiplicity")

    @classmethod
    def parse(cls, text: str) -> "KodairaType":
        m = _KODAIRA_RE.match(text.strip())
        if not m:
            raise ValueError(f"bad Kodaira symbol {text!r}")
        base, digits, star = m.groups()
        if base == "I":
            if not digits:
                raise ValueError(f"I needs a subscript: {text!r}")
            return cls("I*" if star else "I", int(digits))
        if digits:
            raise ValueError(f"{base} takes no subscript: {text!r}")
        return cls(base + star)

    @property
    def is_starred(self) -> bool:
        return self.symbol.endswith("*")

    @property
    def components(self) -> int:
        """Number of irreducible components of the special fibre (over the algebraic closure)."""
        return {
            "I": max(self.n, 1),
            "II": 1,
            "III": 2,
            "IV": 3,
            "I*": self.n + 5,
            "IV*": 7,
            "III*": 8,
            "II*": 9,
        }[self.symbol]

    def __str__(self) -> str:
        if self.symbol == "I":
            return f"I{self.n}"
        if self.symbol == "I*":
            return f"I{self.n}*"
        return self.symbol


I0 = KodairaType("I", 0)


def I(n: int) -> KodairaType:  # noqa: E743
    return KodairaType("I", n)


def Istar(n: int) -> KodairaType:
    return KodairaType("I*", n)


II, III, IV = KodairaType("II"), KodairaType("III"), KodairaType("IV")
IIs, IIIs, IVs = KodairaType("II*"), KodairaType("III*"), KodairaType("IV*")


@dataclass(frozen=True)
class LocalData:
    p: int
    kodaira: KodairaType
    cp: int
    fp: int
    v_delta: int
    kind: str

    @property
    def n(self) -> int:
        return self.kodaira.n

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "kodaira": str(self.kodaira),
            "n": self.kodaira.n,
            "cp": self.cp,
            "fp": self.fp,
            "v_delta": self.v_delta,
            "kind": self.kind,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LocalData":
        k = KodairaType.parse(data["kodaira"])
        if k.n != data["n"]:
            raise ValueError("kodaira/n mismatch")
        return cls(int(data["p"]), k, int(data["cp"]), int(data["fp"]), int(data["v_delta"]), data["kind"])


# Every LocalData produced is passed to these callbacks (used to audit Kodaira type and c_p consistency).
_observers: list[Callable[[LocalData], None]] = []


def add_observer(fn: Callable[[LocalData], None]) -> None:
    _observers.append(fn)


def remove_observer(fn: Callable[[LocalData], None]) -> None:
    _observers.remove(fn)


def _emit(ld: LocalData) -> LocalData:
    for fn in _observers:
        fn(ld)
    return ld


# ---------------------------------------------------------------------------


class _Model:
    """Mutable integral a-invariants for the inner loop; mirrors ModelMap.apply with u = 1."""

    __slots__ = ("a1", "a2", "a3", "a4", "a6")

    def __init__(self, a):
        self.a1, self.a2, self.a3, self.a4, self.a6 = a

    def shift(self, r: int = 0, s: int = 0, t: int = 0) -> None:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        self.a6 = a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1
        self.a4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t
        self.a3 = a3 + r * a1 + 2 * t
        self.a2 = a2 - s * a1 + 3 * r - s * s
        self.a1 = a1 + 2 * s

    def scale_down(self, p: int) -> None:
        self.a1 //= p
        self.a2 //= p**2
        self.a3 //= p**3
        self.a4 //= p**4
        self.a6 //= p**6

    @property
    def b(self) -> tuple[int, int, int, int]:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8


def _singular_point(M: _Model, p: int) -> tuple[int, int]:
    """A singular point of the reduction mod p (p = 2, 3: exhaustive search)."""
    a1, a2, a3, a4, a6 = M.a1, M.a2, M.a3, M.a4, M.a6
    for x in range(p):
        for y in range(p):
            f = y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6
            fy = 2 * y + a1 * x + a3
            fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
            if f % p == 0 and fy % p == 0 and fx % p == 0:
                return x, y
    raise ArithmeticError("no singular point found although p divides the discriminant")


def _move_singular_point_to_origin(M: _Model, p: int) -> None:
    b2, b4, b6, _ = M.b
    if p in (2, 3):
        r, y0 = _singular_point(M, p)
        M.shift(r=r, t=y0)
        return
    c4 = b2 * b2 - 24 * b4
    c6 = -(b2**3) + 36 * b2 * b4 - 216 * b6
    if c4 % p == 0:
        r = -b2 * pow(12, -1, p) % p
    else:
        r = -(c6 + b2 * c4) * pow(12 * c4, -1, p) % p
    t = -(M.a1 * r + M.a3) * pow(2, -1, p) % p
    M.shift(r=r, t=t)


def _tate(a: tuple[int, ...], p: int) -> LocalData:
    M = _Model(a)
    while True:
        b2, b4, b6, b8 = M.b
        disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        n = val(disc, p)
        if n == 0:
            return LocalData(p, I0, 1, 0, 0, GOOD)
        _move_singular_point_to_origin(M, p)
        b2, b4, b6, b8 = M.b
        c4 = b2 * b2 - 24 * b4
        if c4 % p:
            # node at the origin; tangents y^2 + a1 xy - a2 x^2
            if has_root_mod([-M.a2, M.a1, 1], p):
                return LocalData(p, I(n), n, 1, n, SPLIT)
            return LocalData(p, I(n), 2 if n % 2 == 0 else 1, 1, n, NONSPLIT)
        if M.a6 % p**2:
            return LocalData(p, II, 1, n, n, ADDITIVE)
        if b8 % p**3:
            return LocalData(p, III, 2, n - 1, n, ADDITIVE)
        if b6 % p**3:
            cp = 3 if has_root_mod([-(M.a6 // p**2), M.a3 // p, 1], p) else 1
            return LocalData(p, IV, cp, n - 2, n, ADDITIVE)
        # arrange p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p == 2:
            s = M.a2 % 2
            t = 2 * ((M.a6 // 4) % 2)
        else:
            half = pow(2, -1, p)
            s = -M.a1 * half % p
            t = p * (-(M.a3 // p) * half % p)
        M.shift(s=s, t=t)
        b, c, d = M.a2 // p, M.a4 // p**2, M.a6 // p**3
        w = 27 * d * d - b * b * c * c + 4 * b**3 * d - 18 * b * c * d + 4 * c**3
        x = 3 * c - b * b
        if w % p:
            cp = 1 + count_roots_mod([d, c, b, 1], p)
            return LocalData(p, Istar(0), cp, n - 4, n, ADDITIVE)
        if x % p:
            return _tate_in_star(M, p, n, b, c, d, x)
        # triple root
        r = -d if p == 3 else -b * pow(3, -1, p)
        M.shift(r=p * (r % p))
        x3, x6 = M.a3 // p**2, M.a6 // p**4
        if (x3 * x3 + 4 * x6) % p:
            cp = 3 if has_root_mod([-x6, x3, 1], p) else 1
            return LocalData(p, IVs, cp, n - 6, n, ADDITIVE)
        t = x6 if p == 2 else x3 * ((p + 1) // 2)
        M.shift(t=-(p**2) * (t % p))
        if M.a4 % p**4:
            return LocalData(p, IIIs, 2, n - 7, n, ADDITIVE)
        if M.a6 % p**6:
            return LocalData(p, IIs, 1, n - 8, n, ADDITIVE)
        M.scale_down(p)


def _tate_in_star(M: _Model, p: int, n: int, b: int, c: int, d: int, x: int) -> LocalData:
    if p == 2:
        r = c
    elif p == 3:
        r = b * c
    else:
        r = (b * c - 9 * d) * pow(2 * x, -1, p)
    M.shift(r=p * (r % p))
    ix = iy = 3
    mx = my = p * p
    cp = 0
    while not cp:
        xa2, xa3 = M.a2 // p, M.a3 // my
        xa4, xa6 = M.a4 // (p * mx), M.a6 // (mx * my)
        if (xa3 * xa3 + 4 * xa6) % p:
            cp = 4 if has_root_mod([-xa6, xa3, 1], p) else 2
            break
        t = xa6 % 2 if p == 2 else (-xa3 * pow(2, -1, p)) % p
        M.shift(t=my * t)
        my *= p
        iy += 1
        xa2, xa3 = M.a2 // p, M.a3 // my
        xa4, xa6 = M.a4 // (p * mx), M.a6 // (mx * my)
        if (xa4 * xa4 - 4 * xa2 * xa6) % p:
            cp = 4 if has_root_mod([xa6, xa4, xa2], p) else 2
            break
        r = (xa6 * xa2) % 2 if p == 2 else (-xa4 * pow(2 * xa2, -1, p)) % p
        M.shift(r=mx * r)
        mx *= p
        ix += 1
    m = ix + iy - 5
    return LocalData(p, Istar(m), cp, n - m - 4, n, ADDITIVE)


def tate_algorithm(E: WeierstrassModel, p: int) -> LocalData:
    """Local data of E at p, computed on a p-minimal model obtained inside the algorithm."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    F, _ = integral_model(E)
    return _emit(_tate(F.int_ainvs(), p))


def is_split_multiplicative(E: WeierstrassModel, p: int) -> bool:
    ld = tate_algorithm(E, p)
    if ld.kind not in (SPLIT, NONSPLIT):
        raise ContractError(f"reduction at {p} is {ld.kind}, not multiplicative")
    return ld.kind == SPLIT


def bad_primes(E: WeierstrassModel) -> list[int]:
    """Primes dividing the minimal discriminant."""
    M, _ = global_minimal_model(E)
    f = factorize(int(M.discriminant))
    if not f.complete:
        raise ArithmeticError(f"could not factor the discriminant of {M}")
    return [p for p, _ in f.factors]


def global_tamagawa(E: WeierstrassModel) -> tuple[int, list[LocalData]]:
    M, _ = global_minimal_model(E)
    f = factorize(int(M.discriminant))
    if not f.complete:
        raise ArithmeticError(f"could not factor the discriminant of {M}")
    a = M.int_ainvs()
    breakdown = [_emit(_tate(a, p)) for p, _ in f.factors]
    c = 1
    for ld in breakdown:
        c *= ld.cp
    return c, breakdown


def conductor(E: WeierstrassModel) -> int:
    N = 1
    for ld in global_tamagawa(E)[1]:
        N *= ld.p**ld.fp
    return N


_ADMISSIBLE_CP = {
    "II": {1},
    "II*": {1},
    "III": {2},
    "III*": {2},
    "IV": {1, 3},
    "IV*": {1, 3},
}


def check_table1(ld: LocalData) -> bool:
    """Is (kodaira, cp) an admissible pair, and are kind, fp, v_delta consistent with it?"""
    k, cp = ld.kodaira, ld.cp
    if k == I0:
        return cp == 1 and ld.fp == 0 and ld.v_delta == 0 and ld.kind == GOOD
    if k.symbol == "I":
        if ld.fp != 1 or ld.v_delta != k.n:
            return False
        if ld.kind == SPLIT:
            return cp == k.n
        if ld.kind == NONSPLIT:
            return cp == (2 if k.n % 2 == 0 else 1)
        return False
    if ld.kind != ADDITIVE or ld.fp < 2:
        return False
    if k.symbol == "I*":
        return cp in ({1, 2, 4} if k.n == 0 else {2, 4})
    return cp in _ADMISSIBLE_CP[k.symbol]


def check_table1_pair(kodaira: KodairaType | str, cp: int) -> bool:
    """The bare (kodaira, cp) admissibility of the Kodaira type and local factor (with I0* in {1, 2, 4})."""
    k = KodairaType.parse(kodaira) if isinstance(kodaira, str) else kodaira
    if k == I0:
        return cp == 1
    if k.symbol == "I":
        return cp == k.n or cp == (2 if k.n % 2 == 0 else 1)
    if k.symbol == "I*":
        return cp in ({1, 2, 4} if k.n == 0 else {2, 4})
    return cp in _ADMISSIBLE_CP[k.symbol]


def ogg_holds(ld: LocalData) -> bool:
    """fp = v_delta - (components - 1); valid for p >= 5."""
    if ld.kodaira == I0:
        return ld.fp == 0 and ld.v_delta == 0
    return ld.fp == ld.v_delta - (ld.kodaira.components - 1)
