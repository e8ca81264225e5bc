"""Scales N: S -> [1, inf) and the quotient quasi-lattice S/~N.

``s ~N t`` iff ``s a = t b`` for kernel elements a, b.  Classes are stored by
a canonical representative (a closed form per family) together with the exact
value of N on the class.  Joins that do not exist are returned as ``None``,
which plays the role of the symbol infinity (with ``N(inf)^-beta = 0``).

Families whose kernel is abelian and acts transitively on the classes of each
"level" are *graded*: AxB (level = n) and the lamplighter monoid
(level = (x, y)).  Their levels are exposed so that sums over huge numbers of
classes can be done level by level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Hashable, Iterable, Iterator

from . import gf2
from .errors import CertificateFailure, InvalidScale, NotSupported
from .monoids import AxB, C3, Element, FreeAbelian, FreeMonoid, Lamplighter, Monoid, lamp_modulus


@dataclass(frozen=True, order=True)
class NClass:
    """A class of S/~N: exact N-value and canonical representative."""

    n: Fraction
    rep: Element


JoinResult = NClass | None


@dataclass
class Verdict:
    """Outcome of a depth-bounded check; ``witness`` is the first violation."""

    ok: bool
    witness: tuple | None = None
    checked: int = 0
    note: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _frac(w: Any) -> Fraction:
    if isinstance(w, str):
        return Fraction(w.strip())
    if isinstance(w, float):
        return Fraction(w).limit_denominator(10**12)
    return Fraction(w)


class Scale:
    """A scale on a monoid, given by exact generator weights."""

    graded = False
    default_weights: dict[str, Any] = {}

    def __init__(self, monoid: Monoid, weights: dict[str, Any] | None = None):
        self.monoid = monoid
        names = list(monoid.generators())
        given = dict(self.default_weights_for(monoid))
        if weights:
            unknown = set(weights) - set(names)
            if unknown:
                raise InvalidScale(f"unknown generators {sorted(unknown)}; expected {names}")
            given.update(weights)
        self.weights = {name: _frac(given[name]) for name in names}
        for name, w in self.weights.items():
            if w < 1:
                raise InvalidScale(f"weight of {name} is {w} < 1")
        self._validate()
        self._join_cache: dict[tuple[NClass, NClass], JoinResult] = {}

    # -- hooks ------------------------------------------------------------
    def default_weights_for(self, monoid: Monoid) -> dict[str, Any]:
        return {}

    def _validate(self) -> None:
        """Check the weights respect the defining relations."""

    def n_value(self, s: Element) -> Fraction:
        raise NotImplementedError

    def class_rep(self, s: Element) -> Element:
        raise NotImplementedError

    def _iter_classes(self, max_n: Fraction) -> Iterable[NClass]:
        raise NotSupported(f"no complete class enumerator for {self.describe()}")

    def zeta_closed(self, beta: float) -> float | None:
        """Closed form of the partition function (inf when divergent)."""
        return None

    def kernel_index(self, k: Element) -> Any:
        """Coordinate identifying a kernel element, used by traces."""
        raise NotSupported(f"kernel coordinates not available for {self.describe()}")

    # -- basics -----------------------------------------------------------
    def describe(self) -> str:
        ws = ",".join(f"{k}={v}" for k, v in self.weights.items())
        return f"{self.monoid.family}[{ws}]"

    def ker_contains(self, s: Element) -> bool:
        return self.n_value(s) == 1

    def is_trivial(self) -> bool:
        return all(w == 1 for w in self.weights.values())

    def kernel_elements(self, depth: int) -> list[Element]:
        return [s for s in self.monoid.enumerate(depth) if self.ker_contains(s)]

    # -- quotient ---------------------------------------------------------
    def n_class(self, s: Element) -> NClass:
        rep = self.class_rep(s)
        return NClass(self.n_value(rep), rep)

    @property
    def unit_class(self) -> NClass:
        return self.n_class(self.monoid.identity())

    def class_leq(self, a: NClass, b: NClass) -> bool:
        r = self.monoid._lcm(a.rep, b.rep)
        return r is not None and self.n_value(r) == b.n

    def class_join(self, a: NClass, b: NClass) -> JoinResult:
        key = (a, b) if a <= b else (b, a)
        try:
            return self._join_cache[key]
        except KeyError:
            pass
        r = self.monoid._lcm(a.rep, b.rep)
        out = None if r is None else self.n_class(r)
        if len(self._join_cache) > 2_000_000:
            self._join_cache.clear()
        self._join_cache[key] = out
        return out

    def join_of_set(self, classes: Iterable[NClass]) -> JoinResult:
        it = iter(classes)
        try:
            acc = next(it)
        except StopIteration:
            raise ValueError("join of an empty set") from None
        for c in it:
            acc = self.class_join(acc, c)
            if acc is None:
                return None
        return acc

    def class_act(self, s: Element, a: NClass) -> NClass:
        """``s[t] = [st]``."""
        return self.n_class(self.monoid._mul(s, a.rep))

    def class_preimage(self, a: Element, cls: NClass) -> NClass:
        """``a^{-1}[s]`` for ``[a] <= [s]``: the class [t] with a[t] = [s]."""
        r = self.monoid._lcm(a, cls.rep)
        if r is None or self.n_value(r) != cls.n:
            raise CertificateFailure(
                f"{self.monoid.render(a)}^-1 applied to class of "
                f"{self.monoid.render(cls.rep)} is undefined"
            )
        return self.n_class(self.monoid._ldiv(a, r))

    def class_act_inv(self, a: Element, cls: NClass) -> NClass:
        """Inverse of the bijection ``[t] -> [a t]`` for a kernel element a."""
        if not self.ker_contains(a):
            raise ValueError(f"{self.monoid.render(a)} is not in ker N")
        return self.class_preimage(a, cls)

    def enumerate_classes(self, max_n: Any) -> list[NClass]:
        """All classes with N <= max_n, sorted by (N, representative)."""
        return sorted(self._iter_classes(_frac(max_n)))

    def level_counts(self, max_n: Any) -> list[tuple[Fraction, int]]:
        """``(N-value, number of classes)`` for each N-value <= max_n."""
        counts: dict[Fraction, int] = {}
        for c in self._iter_classes(_frac(max_n)):
            counts[c.n] = counts.get(c.n, 0) + 1
        return sorted(counts.items())

    def kms_terms(self, s: Element, t: Element, max_n: Any) -> Iterator[tuple[Element, int]]:
        """Class representatives x (with multiplicity) to feed the KMS sum.

        The default yields every class once; graded families yield one
        representative per level, since the summand is constant on a level.
        """
        for c in self._iter_classes(_frac(max_n)):
            yield c.rep, 1

    # -- certificates -----------------------------------------------------
    def check_kernel_directed(self, depth: int) -> Verdict:
        kernel = self.kernel_elements(depth)
        checked = 0
        for i, t1 in enumerate(kernel):
            for t2 in kernel[i + 1:]:
                checked += 1
                r = self.monoid._lcm(t1, t2)
                if r is None or not self.ker_contains(r):
                    return Verdict(False, (t1, t2), checked)
        return Verdict(True, None, checked, note=f"certificate at depth {depth}")

    def check_admissibility(self, depth: int) -> Verdict:
        """Look for s, t (t in ker N) with sS ∩ tS not generated inside s(ker N)."""
        elements = self.monoid.enumerate(depth)
        kernel = [t for t in elements if self.ker_contains(t)]
        checked = 0
        for s in elements:
            ns = self.n_value(s)
            for t in kernel:
                checked += 1
                r = self.monoid._lcm(s, t)
                if r is None or self.n_value(r) != ns:
                    return Verdict(False, (s, t), checked)
        return Verdict(True, None, checked, note=f"certificate at depth {depth}")


class GradedScale(Scale):
    """Scale whose classes split into levels permuted transitively by ker N."""

    graded = True

    def level_of(self, rep: Element) -> Hashable: ...
    def level_n(self, level) -> Fraction: ...
    def level_count(self, level) -> int: ...
    def level_leq(self, a, b) -> bool: ...
    def level_join(self, a, b): ...
    def level_rep(self, level) -> Element: ...
    def level_classes(self, level) -> Iterator[NClass]: ...
    def levels(self, max_n: Any) -> list: ...

    def _iter_classes(self, max_n):
        for level in self.levels(max_n):
            yield from self.level_classes(level)

    def level_counts(self, max_n):
        counts: dict[Fraction, int] = {}
        for level in self.levels(max_n):
            n = self.level_n(level)
            counts[n] = counts.get(n, 0) + self.level_count(level)
        return sorted(counts.items())

    def kms_terms(self, s, t, max_n):
        ns, nt = self.n_value(s), self.n_value(t)
        if ns != nt:
            return
        for level in self.levels(max_n):
            yield self.level_rep(level), self.level_count(level)


class FreeMonoidScale(Scale):
    def default_weights_for(self, monoid):
        return {name: 2 for name in monoid.generators()}

    def _validate(self):
        self._w = [self.weights[name] for name in self.monoid.generators()]
        self._kernel_letters = [i for i, w in enumerate(self._w) if w == 1]

    def n_value(self, s):
        out = Fraction(1)
        for i in s:
            out *= self._w[i]
        return out

    def class_rep(self, s):
        if not self._kernel_letters:
            return s
        if len(self._kernel_letters) > 1:
            raise NotSupported("ker N is not directed: ~N is undefined")
        k = self._kernel_letters[0]
        end = len(s)
        while end and s[end - 1] == k:
            end -= 1
        return s[:end]

    def _iter_classes(self, max_n):
        if self._kernel_letters:
            raise NotSupported("infinitely many classes per N-value when letters have weight 1")
        stack = [((), Fraction(1))]
        while stack:
            s, n = stack.pop()
            yield NClass(n, s)
            for i, w in enumerate(self._w):
                if n * w <= max_n:
                    stack.append((s + (i,), n * w))

    def zeta_closed(self, beta):
        if self._kernel_letters:
            return None
        q = sum(float(w) ** -beta for w in self._w)
        return 1.0 / (1.0 - q) if q < 1 else math.inf

    def kernel_index(self, k):
        if len(self._kernel_letters) != 1:
            raise NotSupported("kernel coordinates need exactly one weight-1 letter")
        return len(k)


class FreeAbelianScale(Scale):
    def default_weights_for(self, monoid):
        return {name: 2 for name in monoid.generators()}

    def _validate(self):
        self._w = [self.weights[name] for name in self.monoid.generators()]
        self._kernel_coords = [i for i, w in enumerate(self._w) if w == 1]

    def n_value(self, s):
        out = Fraction(1)
        for e, w in zip(s, self._w):
            if e and w != 1:
                out *= w**e
        return out

    def class_rep(self, s):
        if not self._kernel_coords:
            return s
        return tuple(0 if w == 1 else e for e, w in zip(s, self._w))

    def _iter_classes(self, max_n):
        k = len(self._w)

        def rec(i, prefix, n):
            if i == k:
                yield NClass(n, tuple(prefix))
                return
            w = self._w[i]
            if w == 1:
                yield from rec(i + 1, prefix + [0], n)
                return
            e, m = 0, n
            while m <= max_n:
                yield from rec(i + 1, prefix + [e], m)
                e += 1
                m *= w

        yield from rec(0, [], Fraction(1))

    def zeta_closed(self, beta):
        out = 1.0
        for w in self._w:
            if w != 1:
                q = float(w) ** -beta
                if q >= 1:
                    return math.inf
                out /= 1.0 - q
        return out

    def kernel_index(self, k):
        if len(self._kernel_coords) != 1:
            raise NotSupported("kernel coordinates need exactly one weight-1 generator")
        return k[self._kernel_coords[0]]


class AxBScale(GradedScale):
    """The scale N(c, n) = n; the only scale on AxB supported here."""

    def default_weights_for(self, monoid):
        return {"x": 1, **{f"p{p}": p for p in monoid.primes}}

    def _validate(self):
        expected = self.default_weights_for(self.monoid)
        if any(self.weights[k] != v for k, v in expected.items()):
            raise InvalidScale("AxB supports only the scale N(c, n) = n")

    def n_value(self, s):
        return Fraction(s[1])

    def class_rep(self, s):
        return (s[0] % s[1], s[1])

    def level_of(self, rep):
        return rep[1]

    def level_n(self, level):
        return Fraction(level)

    def level_count(self, level):
        return level

    def level_leq(self, a, b):
        return b % a == 0

    def level_join(self, a, b):
        return a * b // math.gcd(a, b)

    def level_rep(self, level):
        return (0, level)

    def level_classes(self, level):
        n = Fraction(level)
        for c in range(level):
            yield NClass(n, (c, level))

    def levels(self, max_n):
        return list(range(1, math.floor(_frac(max_n)) + 1))

    def zeta_closed(self, beta):
        if beta <= 2:
            return math.inf
        from scipy.special import zeta

        return float(zeta(beta - 1))

    def kernel_index(self, k):
        return k[0]

    def kernel_elements(self, depth):
        return [(i, 1) for i in range(depth + 1)]

    def kms_terms(self, s, t, max_n):
        # For x = (j, m): s x = (n j, 1) s (0, m) and likewise for t, so the
        # summand only depends on the level m.
        (c, n), (d, n2) = s, t
        if n != n2:
            return
        for m in self.levels(max_n):
            if (c - d) % (n * m) == 0:
                yield (0, m), m


class C3Scale(Scale):
    def default_weights_for(self, monoid):
        return {"x1": 2, "x2": 2, "x3": 1}

    def _validate(self):
        if self.weights["x1"] != self.weights["x2"]:
            raise InvalidScale("C3 relations force N(x1) = N(x2)")
        self._lam = self.weights["x1"]
        self._mu = self.weights["x3"]

    def n_value(self, s):
        a, b, k = s
        out = Fraction(1)
        if self._lam != 1 and a + b:
            out *= self._lam ** (a + b)
        if self._mu != 1 and k:
            out *= self._mu**k
        return out

    def class_rep(self, s):
        a, b, k = s
        if self._lam == 1:
            a = b = 0
        if self._mu == 1:
            k = 0
        return (a, b, k)

    def _iter_classes(self, max_n):
        lam, mu = self._lam, self._mu
        ab_range = [0]
        if lam != 1:
            ab_range = []
            d, n = 0, Fraction(1)
            while n <= max_n:
                ab_range.append(d)
                d += 1
                n *= lam
        k_range = [0]
        if mu != 1:
            k_range = []
            j, n = 0, Fraction(1)
            while n <= max_n:
                k_range.append(j)
                j += 1
                n *= mu
        for d in ab_range:
            for k in k_range:
                n = (lam**d) * (mu**k)
                if n > max_n:
                    continue
                pairs = [(0, 0)] if lam == 1 else [(a, d - a) for a in range(d + 1)]
                for a, b in pairs:
                    yield NClass(n, (a, b, k))

    def zeta_closed(self, beta):
        out = 1.0
        if self._lam != 1:
            q = float(self._lam) ** -beta
            if q >= 1:
                return math.inf
            out /= (1.0 - q) ** 2
        if self._mu != 1:
            q = float(self._mu) ** -beta
            if q >= 1:
                return math.inf
            out /= 1.0 - q
        return out

    def kernel_index(self, k):
        if self._lam == 1 or self._mu != 1:
            raise NotSupported("kernel coordinates need N(x1) > 1 = N(x3)")
        return k[2]


class LamplighterScale(GradedScale):
    """N(g, x, y) = wx^x wy^y; the default is wx = wy = 2."""

    def default_weights_for(self, monoid):
        return {"g": 1, "x": 2, "y": 2}

    def _validate(self):
        if self.weights["g"] != 1:
            raise InvalidScale("the lamplighter group G consists of units: N(g) must be 1")
        if self.weights["x"] == 1 or self.weights["y"] == 1:
            raise NotSupported("lamplighter scales need N(x) > 1 and N(y) > 1")
        self._wx = self.weights["x"]
        self._wy = self.weights["y"]

    def n_value(self, s):
        return self._wx ** s[1] * self._wy ** s[2]

    def class_rep(self, s):
        g, x, y = s
        return (gf2.mod(g, lamp_modulus(x, y)), x, y)

    def level_of(self, rep):
        return (rep[1], rep[2])

    def level_n(self, level):
        return self._wx ** level[0] * self._wy ** level[1]

    def level_count(self, level):
        return 1 << (level[0] + level[1])

    def level_leq(self, a, b):
        return a[0] <= b[0] and a[1] <= b[1]

    def level_join(self, a, b):
        return (max(a[0], b[0]), max(a[1], b[1]))

    def level_rep(self, level):
        return (0, level[0], level[1])

    def level_classes(self, level):
        n = self.level_n(level)
        x, y = level
        for g in range(1 << (x + y)):
            yield NClass(n, (g, x, y))

    def levels(self, max_n):
        max_n = _frac(max_n)
        out = []
        x, nx = 0, Fraction(1)
        while nx <= max_n:
            y, n = 0, nx
            while n <= max_n:
                out.append((x, y))
                y += 1
                n *= self._wy
            x += 1
            nx *= self._wx
        return sorted(out, key=lambda L: (self.level_n(L), L))

    def zeta_closed(self, beta):
        qx = 2.0 * float(self._wx) ** -beta
        qy = 2.0 * float(self._wy) ** -beta
        if qx >= 1 or qy >= 1:
            return math.inf
        return 1.0 / ((1.0 - qx) * (1.0 - qy))

    def kernel_index(self, k):
        return k[0]

    def kernel_elements(self, depth):
        """G is not finitely generated; sample the polynomials of degree < depth."""
        return [(g, 0, 0) for g in range(1 << depth)]


_SCALES: dict[type[Monoid], type[Scale]] = {
    FreeMonoid: FreeMonoidScale,
    FreeAbelian: FreeAbelianScale,
    AxB: AxBScale,
    C3: C3Scale,
    Lamplighter: LamplighterScale,
}


def make_scale(monoid: Monoid, weights: dict[str, Any] | None = None) -> Scale:
    return _SCALES[type(monoid)](monoid, weights)
