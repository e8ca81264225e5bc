"""Right LCM monoids with decidable normal forms.

Every family stores elements as plain tuples in normal form, so equality of
elements is tuple equality and elements can be used as dict keys.

==============  ===========================  ==========================
family          element                      text form
==============  ===========================  ==========================
free            tuple of letter indices      ``"abba"`` (``"e"`` = empty)
free_abelian    exponent vector              ``"(1,0,2)"``
axb             ``(c, n)``, c >= 0, n >= 1    ``"(c,n)"``
c3              ``(a, b, k)``                 ``"(a,b,k)"``
lamplighter     ``(g, x, y)``, g in GF(2)[T]  ``"(hex(g),x,y)"``
==============  ===========================  ==========================

All families here have trivial unit group except the lamplighter monoid,
whose units are the elements ``(g, 0, 0)``.  ``right_lcm`` returns a
canonical generator of ``sS ∩ tS``; in general it is only unique up to right
multiplication by units.
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from functools import lru_cache
from typing import Any

from . import gf2
from .errors import FamilyMismatch

Element = tuple


class Monoid(ABC):
    """A left cancellative monoid with right LCMs and a declared generating set."""

    family: str = ""

    @abstractmethod
    def identity(self) -> Element: ...

    @abstractmethod
    def generators(self) -> dict[str, Element]:
        """Declared generating set, in a fixed order; used by ``enumerate``."""

    @abstractmethod
    def _mul(self, s: Element, t: Element) -> Element: ...

    @abstractmethod
    def _ldiv(self, s: Element, t: Element) -> Element | None: ...

    @abstractmethod
    def _lcm(self, s: Element, t: Element) -> Element | None: ...

    @abstractmethod
    def is_element(self, s: Any) -> bool: ...

    @abstractmethod
    def render(self, s: Element) -> str: ...

    @abstractmethod
    def parse(self, text: str) -> Element: ...

    def params(self) -> dict[str, Any]:
        return {}

    def descriptor(self) -> dict[str, Any]:
        return {"family": self.family, **self.params()}

    def check(self, *elements: Element) -> None:
        for s in elements:
            if not self.is_element(s):
                raise FamilyMismatch(f"{s!r} is not an element of {self.family}")

    def multiply(self, s: Element, t: Element) -> Element:
        self.check(s, t)
        return self._mul(s, t)

    def left_divide(self, s: Element, t: Element) -> Element | None:
        """The unique ``u`` with ``s*u == t``, or None if ``t`` is not in ``sS``."""
        self.check(s, t)
        return self._ldiv(s, t)

    def right_lcm(self, s: Element, t: Element) -> Element | None:
        """Canonical ``r`` with ``sS ∩ tS = rS``, or None if the ideals are disjoint."""
        self.check(s, t)
        return self._lcm(s, t)

    def product(self, *elements: Element) -> Element:
        result = self.identity()
        for s in elements:
            result = self.multiply(result, s)
        return result

    def normalize_pair(self, s: Element, t: Element) -> tuple[Element, Element]:
        """Canonical (su, tu) over units u; v_{su} v_{tu}* = v_s v_t*."""
        return s, t

    def enumerate(self, depth: int) -> list[Element]:
        """Elements of generator-word length <= depth, in breadth-first order."""
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        gens = list(self.generators().values())
        seen = {self.identity(): None}
        frontier = [self.identity()]
        for _ in range(depth):
            nxt = []
            for s in frontier:
                for g in gens:
                    u = self._mul(s, g)
                    if u not in seen:
                        seen[u] = None
                        nxt.append(u)
            frontier = nxt
        return list(seen)

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self.params() == other.params()

    def __hash__(self) -> int:
        return hash((self.family, tuple(sorted(self.params().items()))))

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"


def _parse_tuple(text: str, size: int) -> tuple[str, ...]:
    m = re.fullmatch(r"\s*\((.*)\)\s*", text)
    if not m:
        raise ValueError(f"expected a parenthesised tuple, got {text!r}")
    parts = tuple(p.strip() for p in m.group(1).split(","))
    if len(parts) != size:
        raise ValueError(f"expected {size} components, got {text!r}")
    return parts


class FreeMonoid(Monoid):
    family = "free"

    def __init__(self, k: int = 2):
        if not 1 <= k <= 26:
            raise ValueError("alphabet size must be between 1 and 26")
        self.k = k

    def params(self):
        return {"k": self.k}

    def identity(self):
        return ()

    def generators(self):
        return {chr(ord("a") + i): (i,) for i in range(self.k)}

    def is_element(self, s):
        return isinstance(s, tuple) and all(
            isinstance(i, int) and 0 <= i < self.k for i in s
        )

    def _mul(self, s, t):
        return s + t

    def _ldiv(self, s, t):
        if t[: len(s)] == s:
            return t[len(s):]
        return None

    def _lcm(self, s, t):
        if len(s) < len(t):
            s, t = t, s
        return s if s[: len(t)] == t else None

    def render(self, s):
        return "".join(chr(ord("a") + i) for i in s) or "e"

    def parse(self, text):
        text = text.strip()
        if text in ("e", ""):
            return ()
        s = tuple(ord(ch) - ord("a") for ch in text)
        if not self.is_element(s):
            raise ValueError(f"bad word {text!r} for alphabet of size {self.k}")
        return s


class FreeAbelian(Monoid):
    family = "free_abelian"

    def __init__(self, k: int = 2):
        if k < 1:
            raise ValueError("rank must be positive")
        self.k = k

    def params(self):
        return {"k": self.k}

    def identity(self):
        return (0,) * self.k

    def generators(self):
        return {
            f"x{i + 1}": tuple(int(i == j) for j in range(self.k)) for i in range(self.k)
        }

    def is_element(self, s):
        return (
            isinstance(s, tuple)
            and len(s) == self.k
            and all(isinstance(i, int) and i >= 0 for i in s)
        )

    def _mul(self, s, t):
        return tuple(a + b for a, b in zip(s, t))

    def _ldiv(self, s, t):
        if all(a <= b for a, b in zip(s, t)):
            return tuple(b - a for a, b in zip(s, t))
        return None

    def _lcm(self, s, t):
        return tuple(max(a, b) for a, b in zip(s, t))

    def render(self, s):
        return "(" + ",".join(map(str, s)) + ")"

    def parse(self, text):
        s = tuple(int(p) for p in _parse_tuple(text, self.k))
        if not self.is_element(s):
            raise ValueError(f"bad element {text!r}")
        return s


class AxB(Monoid):
    """The ax+b monoid: pairs (c, n) with (c, n)(d, m) = (c + n*d, n*m)."""

    family = "axb"

    def __init__(self, primes: tuple[int, ...] = (2, 3, 5, 7)):
        primes = tuple(primes)
        if not primes or any(p < 2 for p in primes):
            raise ValueError("primes must be integers >= 2")
        self.primes = primes

    def params(self):
        return {"primes": list(self.primes)}

    def identity(self):
        return (0, 1)

    def generators(self):
        gens = {"x": (1, 1)}
        gens.update({f"p{p}": (0, p) for p in self.primes})
        return gens

    def is_element(self, s):
        return (
            isinstance(s, tuple)
            and len(s) == 2
            and isinstance(s[0], int)
            and isinstance(s[1], int)
            and s[0] >= 0
            and s[1] >= 1
        )

    def _mul(self, s, t):
        return (s[0] + s[1] * t[0], s[1] * t[1])

    def _ldiv(self, s, t):
        c, n = s
        d, m = t
        if m % n or d < c or (d - c) % n:
            return None
        return ((d - c) // n, m // n)

    def _lcm(self, s, t):
        c, n = s
        d, m = t
        g = math.gcd(n, m)
        if (c - d) % g:
            return None
        n1, m1 = n // g, m // g
        L = n * m1
        # r = c + n*k with n*k = d - c (mod m)  <=>  n1*k = (d - c)/g (mod m1)
        k = ((d - c) // g * pow(n1, -1, m1)) % m1 if m1 > 1 else 0
        r = c + n * k
        lo = max(c, d)
        if r < lo:
            r += L * (-(-(lo - r) // L))
        else:
            r -= L * ((r - lo) // L)
        return (r, L)

    def render(self, s):
        return f"({s[0]},{s[1]})"

    def parse(self, text):
        s = tuple(int(p) for p in _parse_tuple(text, 2))
        if not self.is_element(s):
            raise ValueError(f"bad element {text!r}")
        return s


class C3(Monoid):
    """Z_+^2 ⋊ Z_+ where the generator of Z_+ flips the two coordinates.

    Generators x1 = (1,0,0), x2 = (0,1,0), x3 = (0,0,1) satisfy
    x1 x2 = x2 x1, x3 x1 = x2 x3, x3 x2 = x1 x3.
    """

    family = "c3"

    def identity(self):
        return (0, 0, 0)

    def generators(self):
        return {"x1": (1, 0, 0), "x2": (0, 1, 0), "x3": (0, 0, 1)}

    def is_element(self, s):
        return (
            isinstance(s, tuple)
            and len(s) == 3
            and all(isinstance(i, int) and i >= 0 for i in s)
        )

    def _mul(self, s, t):
        a, b, k = s
        c, d, j = t
        if k & 1:
            c, d = d, c
        return (a + c, b + d, k + j)

    def _ldiv(self, s, t):
        a, b, k = s
        c, d, j = t
        if c < a or d < b or j < k:
            return None
        u, v = c - a, d - b
        if k & 1:
            u, v = v, u
        return (u, v, j - k)

    def _lcm(self, s, t):
        # principal right ideals are upward closed boxes
        return (max(s[0], t[0]), max(s[1], t[1]), max(s[2], t[2]))

    def render(self, s):
        return "(" + ",".join(map(str, s)) + ")"

    def parse(self, text):
        s = tuple(int(p) for p in _parse_tuple(text, 3))
        if not self.is_element(s):
            raise ValueError(f"bad element {text!r}")
        return s


@lru_cache(maxsize=None)
def lamp_modulus(x: int, y: int) -> int:
    """``T**x (1+T)**y``; its multiples form the subgroup G_{x,y}."""
    return gf2.shift_power(x, y)


class Lamplighter(Monoid):
    """(⊕_{Z_+} Z/2) ⋊ Z_+^2 with (x, y) acting as multiplication by T^x (1+T)^y.

    The group ⊕ Z/2 is identified with GF(2)[T] so the shift becomes
    multiplication by T.
    """

    family = "lamplighter"

    def identity(self):
        return (0, 0, 0)

    def generators(self):
        return {"g": (1, 0, 0), "x": (0, 1, 0), "y": (0, 0, 1)}

    def is_element(self, s):
        return (
            isinstance(s, tuple)
            and len(s) == 3
            and all(isinstance(i, int) and i >= 0 for i in s)
        )

    def _mul(self, s, t):
        g, x, y = s
        h, u, v = t
        return (g ^ gf2.mul(lamp_modulus(x, y), h), x + u, y + v)

    def _ldiv(self, s, t):
        g, x, y = s
        f, p, q = t
        if p < x or q < y:
            return None
        h, rem = gf2.divmod_(f ^ g, lamp_modulus(x, y))
        if rem:
            return None
        return (h, p - x, q - y)

    def _lcm(self, s, t):
        g, x, y = s
        h, u, v = t
        sol = gf2.crt(g, lamp_modulus(x, y), h, lamp_modulus(u, v))
        if sol is None:
            return None
        return (sol[0], max(x, u), max(y, v))

    def normalize_pair(self, s, t):
        # Units act freely on the right; pick u with t u reduced mod T^x (1+T)^y.
        h, _ = gf2.divmod_(t[0], lamp_modulus(t[1], t[2]))
        if not h:
            return s, t
        u = (h, 0, 0)
        return self._mul(s, u), self._mul(t, u)

    def render(self, s):
        return f"({gf2.to_hex(s[0])},{s[1]},{s[2]})"

    def parse(self, text):
        g, x, y = _parse_tuple(text, 3)
        s = (gf2.from_hex(g), int(x), int(y))
        if not self.is_element(s):
            raise ValueError(f"bad element {text!r}")
        return s


FAMILIES: dict[str, type[Monoid]] = {
    cls.family: cls for cls in (FreeMonoid, FreeAbelian, AxB, C3, Lamplighter)
}


def make_monoid(family: str, **params: Any) -> Monoid:
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(
            f"unknown family {family!r}; choose from {sorted(FAMILIES)}"
        ) from None
    if "primes" in params:
        params["primes"] = tuple(params["primes"])
    return cls(**params)
