"""Polynomials over GF(2) packed into Python ints.

Bit ``i`` of the integer is the coefficient of ``T**i``, so ``0b11`` is ``1 + T``.
Addition and subtraction are both XOR.
"""

from __future__ import annotations


def degree(a: int) -> int:
    """Degree of ``a``; the zero polynomial has degree -1."""
    return a.bit_length() - 1


def mul(a: int, b: int) -> int:
    if a < b:
        a, b = b, a
    c = 0
    while b:
        if b & 1:
            c ^= a
        a <<= 1
        b >>= 1
    return c


def divmod_(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("division by zero polynomial")
    q = 0
    db = degree(b)
    while a and degree(a) >= db:
        shift = degree(a) - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def mod(a: int, b: int) -> int:
    return divmod_(a, b)[1]


def divides(b: int, a: int) -> bool:
    """True iff ``b`` divides ``a``."""
    return mod(a, b) == 0


def power(a: int, n: int) -> int:
    result = 1
    while n:
        if n & 1:
            result = mul(result, a)
        a = mul(a, a)
        n >>= 1
    return result


def gcd(a: int, b: int) -> int:
    while b:
        a, b = b, mod(a, b)
    return a


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(d, x, y)`` with ``d = gcd(a, b) = x*a + y*b``."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod_(a, b)
        a, b = b, r
        x0, x1 = x1, x0 ^ mul(q, x1)
        y0, y1 = y1, y0 ^ mul(q, y1)
    return a, x0, y0


def crt(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int] | None:
    """Solve ``f = r1 mod m1``, ``f = r2 mod m2``.

    Returns ``(f, lcm(m1, m2))`` with ``deg f < deg lcm``, or None when the
    system is inconsistent, i.e. ``r1 - r2`` is not divisible by ``gcd(m1, m2)``.
    """
    d, x, _ = xgcd(m1, m2)
    diff = r1 ^ r2
    q, rem = divmod_(diff, d)
    if rem:
        return None
    lcm = mul(m1, divmod_(m2, d)[0])
    # f = r1 + m1 * x * (r2 - r1) / d
    f = r1 ^ mul(m1, mul(x, q))
    return mod(f, lcm), lcm


def shift_power(x: int, y: int) -> int:
    """The modulus ``T**x * (1 + T)**y`` cutting out the subgroup G_{x,y}."""
    return power(0b11, y) << x


def to_hex(a: int) -> str:
    return format(a, "x")


def from_hex(text: str) -> int:
    return int(text, 16)


def to_str(a: int) -> str:
    """Human readable form such as ``1+T+T^3``."""
    if a == 0:
        return "0"
    terms = []
    for i in range(a.bit_length()):
        if (a >> i) & 1:
            terms.append("1" if i == 0 else "T" if i == 1 else f"T^{i}")
    return "+".join(terms)
