"""Exact integer arithmetic: valuations, primality, factorization, integer polynomials.

Everything here operates on Python ints (and ``Fraction`` where noted) and is
pure, so it is safe to call from worker processes.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

TRIAL_BOUND = 10**6
RHO_MAX_ITERATIONS = 200_000
RHO_ATTEMPTS = 8

# Deterministic for n < 3.3e24 (first 13 primes as bases).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981


class IncompleteFactorization(ArithmeticError):
    """Raised when a quantity needs a complete factorization that is not available."""


# ---------------------------------------------------------------------------
# primality and primes


def _small_primes(bound: int) -> list[int]:
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(bound) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(range(i * i, bound + 1, i)))
    return [i for i, flag in enumerate(sieve) if flag]


SMALL_PRIMES = _small_primes(TRIAL_BOUND)
_SMALL_PRIME_SET = frozenset(SMALL_PRIMES[:2000])


def is_prime(n: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, extra seeded bases above."""
    if n < 2:
        return False
    if n in _SMALL_PRIME_SET:
        return True
    for p in SMALL_PRIMES[:50]:
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases: Iterable[int] = _MR_BASES
    if n >= _MR_DETERMINISTIC_LIMIT:
        rng = random.Random(n)
        bases = _MR_BASES + tuple(rng.randrange(2, n - 1) for _ in range(16))
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes(start: int = 2) -> Iterator[int]:
    """All primes >= start, in increasing order (segmented sieve)."""
    if start <= TRIAL_BOUND:
        for p in SMALL_PRIMES:
            if p >= start:
                yield p
        low = TRIAL_BOUND + 1
    else:
        low = start
    width = 1 << 16
    while True:
        high = low + width
        seg = bytearray([1]) * width
        root = math.isqrt(high) + 1
        for p in primes_upto(root):
            first = max(p * p, (low + p - 1) // p * p)
            if first >= high:
                continue
            seg[first - low :: p] = bytearray(len(range(first - low, width, p)))
        for i, flag in enumerate(seg):
            if flag and low + i >= 2:
                yield low + i
        low = high


def primes_upto(bound: int) -> list[int]:
    if bound <= TRIAL_BOUND:
        import bisect

        return SMALL_PRIMES[: bisect.bisect_right(SMALL_PRIMES, bound)]
    return _small_primes(bound)


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


# ---------------------------------------------------------------------------
# valuations


def vp(n: int, p: int) -> int:
    """Exponent of the prime ``p`` in the nonzero integer ``n``."""
    if n == 0:
        raise ValueError("valuation of 0 is infinite")
    _require_prime(p)
    return val(n, p)


def val(n: int, p: int) -> int:
    # unchecked; n != 0 and p prime are the caller's job
    n = abs(n)
    if n % p:
        return 0
    if p == 2:
        return (n & -n).bit_length() - 1
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def val_q(x: Fraction | int, p: int) -> int:
    """Valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of 0 is infinite")
    return val(x.numerator, p) - val(x.denominator, p)


# ---------------------------------------------------------------------------
# factorization


@dataclass(frozen=True)
class Factorization:
    """|n| = cofactor * prod(p**e); ``cofactor == 1`` means the factorization is complete."""

    n: int
    factors: tuple[tuple[int, int], ...]
    cofactor: int = 1

    @property
    def complete(self) -> bool:
        return self.cofactor == 1

    def as_dict(self) -> dict[int, int]:
        return dict(self.factors)

    def value(self) -> int:
        out = self.cofactor
        for p, e in self.factors:
            out *= p**e
        return out

    def to_json(self) -> dict:
        return {
            "n": str(self.n),
            "factors": [[str(p), e] for p, e in self.factors],
            "cofactor": str(self.cofactor),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Factorization":
        return cls(
            int(data["n"]),
            tuple((int(p), int(e)) for p, e in data["factors"]),
            int(data["cofactor"]),
        )


def _rho_brent(n: int, seed: int) -> int | None:
    """One Pollard-rho run (Brent's cycle detection). Returns a nontrivial factor or None."""
    rng = random.Random(seed)
    y = rng.randrange(1, n)
    c = rng.randrange(1, n)
    m = 128
    g = r = q = 1
    x = ys = y
    steps = 0
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = math.gcd(q, n)
            k += m
        r *= 2
        steps += r
        if steps > RHO_MAX_ITERATIONS:
            return None
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = math.gcd(abs(x - ys), n)
    return g if g != n else None


def _split(n: int, out: dict[int, int], leftovers: list[int]) -> None:
    if n == 1:
        return
    if is_prime(n):
        out[n] = out.get(n, 0) + 1
        return
    r = math.isqrt(n)
    if r * r == n:
        _split(r, out, leftovers)
        _split(r, out, leftovers)
        return
    for attempt in range(RHO_ATTEMPTS):
        d = _rho_brent(n, seed=n + 7919 * attempt)
        if d:
            _split(d, out, leftovers)
            _split(n // d, out, leftovers)
            return
    leftovers.append(n)


def factorize(n: int) -> Factorization:
    """Factor |n| by trial division up to 1e6, then Pollard-rho.

    On a budget overrun the unfactored composite part is kept as ``cofactor``.
    """
    if n == 0:
        raise ValueError("cannot factor 0")
    m = abs(n)
    found: dict[int, int] = {}
    for p in SMALL_PRIMES:
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            found[p] = e
    leftovers: list[int] = []
    if m > 1:
        if m < TRIAL_BOUND * TRIAL_BOUND:
            found[m] = found.get(m, 0) + 1
        else:
            _split(m, found, leftovers)
    cofactor = reduce(lambda a, b: a * b, leftovers, 1)
    if cofactor != 1:
        log.warning("factorization of %d incomplete; composite cofactor %d", n, cofactor)
    return Factorization(n, tuple(sorted(found.items())), cofactor)


def big_omega(n: int | Factorization) -> int:
    """Number of prime factors of n counted with multiplicity."""
    f = n if isinstance(n, Factorization) else factorize(n)
    if f.n == 0:
        raise ValueError("Omega(0) undefined")
    if not f.complete:
        raise IncompleteFactorization(f"cofactor {f.cofactor} of {f.n} not factored")
    return sum(e for _, e in f.factors)


def omega(n: int | Factorization) -> int:
    """Number of distinct prime factors."""
    f = n if isinstance(n, Factorization) else factorize(n)
    if not f.complete:
        raise IncompleteFactorization(f"cofactor {f.cofactor} of {f.n} not factored")
    return len(f.factors)


def is_squarefree(n: int | Factorization) -> bool:
    f = n if isinstance(n, Factorization) else factorize(n)
    if f.n == 0:
        raise ValueError("0 is not squarefree")
    if not f.complete:
        raise IncompleteFactorization(f"cofactor {f.cofactor} of {f.n} not factored")
    return all(e == 1 for _, e in f.factors)


def prime_divisors(n: int) -> list[int]:
    f = factorize(n)
    if not f.complete:
        raise IncompleteFactorization(f"cofactor {f.cofactor} of {n} not factored")
    return [p for p, _ in f.factors]


def legendre(a: int, p: int) -> int:
    """Quadratic residue symbol (a/p) for an odd prime p."""
    if p == 2:
        raise ValueError("Legendre symbol needs an odd prime")
    _require_prime(p)
    return _legendre(a, p)


def _legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def squarefree_part(d: int) -> int:
    """Signed square-free kernel: d = squarefree_part(d) * k**2."""
    f = factorize(d)
    if not f.complete:
        raise IncompleteFactorization(f"cofactor {f.cofactor} of {d} not factored")
    out = -1 if d < 0 else 1
    for p, e in f.factors:
        if e % 2:
            out *= p
    return out


# ---------------------------------------------------------------------------
# integer polynomials


class IntPoly:
    """Polynomial with integer coefficients, stored low degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[int] = ()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[int, ...] = tuple(cs)

    # construction helpers
    @classmethod
    def x(cls) -> "IntPoly":
        return cls((0, 1))

    @classmethod
    def const(cls, c: int) -> "IntPoly":
        return cls((c,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def content(self) -> int:
        return reduce(math.gcd, self.coeffs, 0)

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = IntPoly.const(other)
        return isinstance(other, IntPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _coerce(self, other) -> "IntPoly":
        return other if isinstance(other, IntPoly) else IntPoly.const(other)

    def __add__(self, other) -> "IntPoly":
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self) -> "IntPoly":
        return IntPoly([-c for c in self.coeffs])

    def __sub__(self, other) -> "IntPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "IntPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "IntPoly":
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return IntPoly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntPoly":
        out = IntPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def derivative(self) -> "IntPoly":
        return IntPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def exact_div_scalar(self, d: int) -> "IntPoly":
        if any(c % d for c in self.coeffs):
            raise ArithmeticError(f"{self} not divisible by {d}")
        return IntPoly([c // d for c in self.coeffs])

    def primitive_part(self) -> "IntPoly":
        c = self.content()
        if c == 0:
            return self
        if self.lc < 0:
            c = -c
        return self.exact_div_scalar(c)

    def __repr__(self) -> str:
        return f"IntPoly({list(self.coeffs)})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mag = abs(c)
            body = "" if (mag == 1 and i) else str(mag)
            if i:
                body += ("*" if body else "") + ("T" if i == 1 else f"T^{i}")
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return head + "".join(f" {s} {b}" for s, b in terms[1:])


def prem(a: IntPoly, b: IntPoly) -> IntPoly:
    """Pseudo-remainder: lc(b)**(deg a - deg b + 1) * a mod b."""
    if b.is_zero():
        raise ZeroDivisionError("pseudo-remainder by zero polynomial")
    r = list(a.coeffs)
    db, lb = b.degree, b.lc
    e = a.degree - db + 1
    if e <= 0:
        return a
    for _ in range(e):
        if len(r) - 1 < db:
            r = [c * lb for c in r]
            continue
        top = r[-1]
        shift = len(r) - 1 - db
        r = [c * lb for c in r]
        for j, c in enumerate(b.coeffs):
            r[shift + j] -= top * c
        r.pop()
    return IntPoly(r)


def _sylvester_resultant(a: IntPoly, b: IntPoly) -> int:
    """Res(a, b) = lc(a)^deg b * prod b(alpha) via the subresultant PRS."""
    if a.is_zero() or b.is_zero():
        raise ValueError("resultant of the zero polynomial")
    s = 1
    if a.degree < b.degree:
        a, b = b, a
        if a.degree % 2 and b.degree % 2:
            s = -1
    if b.degree == 0:
        return s * b.lc ** a.degree
    ca, cb = a.content(), b.content()
    a, b = a.exact_div_scalar(ca), b.exact_div_scalar(cb)
    t = ca ** b.degree * cb ** a.degree
    g = h = 1
    while True:
        delta = a.degree - b.degree
        if a.degree % 2 and b.degree % 2:
            s = -s
        r = prem(a, b)
        if r.is_zero():
            return 0
        a = b
        b = r.exact_div_scalar(g * h**delta)
        g = a.lc
        # h = h^(1-delta) * g^delta, exact
        h = g**delta // h ** (delta - 1) if delta else h
        if b.degree == 0:
            return s * t * (b.lc ** a.degree // h ** (a.degree - 1))


def resultant(f: IntPoly, g: IntPoly) -> int:
    """Res(f, g) = lc(g)**deg(f) * prod over roots beta of g of f(beta)."""
    return (-1) ** (f.degree * g.degree) * _sylvester_resultant(f, g)


def poly_gcd_degree(f: IntPoly, g: IntPoly) -> int:
    """Degree of gcd(f, g) over Q, via primitive PRS."""
    a, b = f.primitive_part(), g.primitive_part()
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        a, b = b, prem(a, b).primitive_part()
    return a.degree


def has_repeated_roots(f: IntPoly) -> bool:
    return f.degree >= 1 and poly_gcd_degree(f, f.derivative()) > 0


# polynomials over F_p, coefficient lists low -> high


def _trim_mod(f: Sequence[int], p: int) -> list[int]:
    g = [c % p for c in f]
    while g and g[-1] == 0:
        g.pop()
    return g


def _polymod(a: list[int], m: list[int], p: int) -> list[int]:
    a = a[:]
    inv = pow(m[-1], -1, p)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        q = a[-1] * inv % p
        shift = len(a) - 1 - dm
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - q * c) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _polymulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _polymod(out, m, p)


def _polygcd_mod(a: list[int], b: list[int], p: int) -> list[int]:
    while b:
        a, b = b, _polymod(a, b, p)
    return a


def count_roots_mod(f: Sequence[int], p: int) -> int:
    """Number of distinct roots in F_p of the integer polynomial f (coefficients low -> high)."""
    g = _trim_mod(f, p)
    if not g:
        return p
    if len(g) == 1:
        return 0
    if p < 500:
        return sum(1 for x in range(p) if sum(c * pow(x, i, p) for i, c in enumerate(g)) % p == 0)
    # gcd(g, x^p - x) has one linear factor per distinct root
    power, base, e = [1], [0, 1], p
    while e:
        if e & 1:
            power = _polymulmod(power, base, g, p)
        base = _polymulmod(base, base, g, p)
        e >>= 1
    xp = power + [0] * max(0, 2 - len(power))
    xp[1] = (xp[1] - 1) % p
    h = _polygcd_mod(g, _trim_mod(xp, p), p)
    return len(h) - 1


def has_root_mod(f: Sequence[int], p: int) -> bool:
    return count_roots_mod(f, p) > 0


def poly_divmod(a: IntPoly, b: IntPoly) -> tuple[list[Fraction], list[Fraction]]:
    """Quotient and remainder of a by b over Q (coefficients low -> high)."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    r = [Fraction(c) for c in a.coeffs]
    db = b.degree
    q = [Fraction(0)] * max(0, a.degree - db + 1)
    lb = b.lc
    for k in range(a.degree - db, -1, -1):
        coef = r[k + db] / lb
        q[k] = coef
        if coef:
            for i, c in enumerate(b.coeffs):
                r[k + i] -= coef * c
    r = r[:db] if db > 0 else []
    while r and r[-1] == 0:
        r.pop()
    return q, r


def poly_exact_div(a: IntPoly, b: IntPoly) -> IntPoly:
    q, r = poly_divmod(a, b)
    if r or any(c.denominator != 1 for c in q):
        raise ValueError(f"{b} does not divide {a} in Z[T]")
    return IntPoly([int(c) for c in q])


def poly_gcd(f: IntPoly, g: IntPoly) -> IntPoly:
    """gcd of f and g in Q[T], returned primitive with positive leading coefficient."""
    a, b = f.primitive_part(), g.primitive_part()
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        a, b = b, prem(a, b).primitive_part()
    a = a.primitive_part()
    return -a if a.lc < 0 else a


def squarefree_kernel(f: IntPoly) -> IntPoly:
    """The product of the distinct irreducible factors of f, primitive, positive leading coefficient."""
    g = poly_gcd(f, f.derivative())
    k = poly_exact_div(f.primitive_part(), g) if g.degree > 0 else f.primitive_part()
    k = k.primitive_part()
    return -k if k.lc < 0 else k


__all__ = [
    "poly_divmod",
    "poly_exact_div",
    "poly_gcd",
    "squarefree_kernel",
    "count_roots_mod",
    "has_root_mod",
    "Factorization",
    "IncompleteFactorization",
    "IntPoly",
    "big_omega",
    "factorize",
    "has_repeated_roots",
    "is_prime",
    "is_squarefree",
    "legendre",
    "omega",
    "prem",
    "primes",
    "resultant",
    "squarefree_part",
    "val",
    "val_q",
    "vp",
]
