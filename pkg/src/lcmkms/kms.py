"""Spanning elements v_s v_t*, the dynamics sigma^N, and KMS state values.

Finite-type states are evaluated by summing over classes [x] with
[sx] = [tx]:

    phi(v_s v_t*) = N(s)^-beta / zeta * sum_x N(x)^-beta tau(q_x, p_x),

where ``s x p_x = t x q_x`` is read off the right LCM of sx and tx.  The
numerator and zeta use the same class cutoff so that leading truncation
errors cancel.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InconsistencyError
from .measure import zeta_partial
from .monoids import Element, Monoid
from .numeric import npow
from .scale import Scale, _frac

Key = tuple[Element, Element]


class SpanElement:
    """Finite linear combination of monomials v_s v_t*."""

    __slots__ = ("monoid", "terms")

    def __init__(self, monoid: Monoid, terms: Mapping[Key, complex] | Iterable[tuple[complex, Element, Element]] = ()):
        self.monoid = monoid
        acc: dict[Key, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else (((s, t), c) for c, s, t in terms)
        for key, c in items:
            key = monoid.normalize_pair(*key)
            acc[key] = acc.get(key, 0) + complex(c)
        self.terms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def monomial(cls, monoid: Monoid, s: Element, t: Element, coeff: complex = 1) -> "SpanElement":
        monoid.check(s, t)
        return cls(monoid, {(s, t): coeff})

    @classmethod
    def one(cls, monoid: Monoid) -> "SpanElement":
        e = monoid.identity()
        return cls(monoid, {(e, e): 1})

    def __add__(self, other: "SpanElement") -> "SpanElement":
        return SpanElement(self.monoid, [(c, s, t) for (s, t), c in [*self.terms.items(), *other.terms.items()]])

    def __sub__(self, other: "SpanElement") -> "SpanElement":
        return self + other.scaled(-1)

    def scaled(self, c: complex) -> "SpanElement":
        return SpanElement(self.monoid, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, SpanElement):
            return span_product(self, other)
        return self.scaled(other)

    __rmul__ = scaled

    def adjoint(self) -> "SpanElement":
        return SpanElement(self.monoid, {(t, s): c.conjugate() for (s, t), c in self.terms.items()})

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SpanElement) and self.terms == other.terms

    def __repr__(self) -> str:
        r = self.monoid.render
        body = " + ".join(f"{c}·v{r(s)}v{r(t)}*" for (s, t), c in self.terms.items())
        return f"SpanElement({body or '0'})"


def mul_spanning(monoid: Monoid, s: Element, t: Element, a: Element, b: Element) -> Key | None:
    """(v_s v_t*)(v_a v_b*) as a single monomial, or None when it is zero."""
    r = monoid._lcm(t, a)
    if r is None:
        return None
    return monoid._mul(s, monoid._ldiv(t, r)), monoid._mul(b, monoid._ldiv(a, r))


def span_product(x: SpanElement, y: SpanElement) -> SpanElement:
    m = x.monoid
    acc: dict[Key, complex] = {}
    for (s, t), c in x.terms.items():
        for (a, b), d in y.terms.items():
            key = mul_spanning(m, s, t, a, b)
            if key is not None:
                acc[key] = acc.get(key, 0) + c * d
    return SpanElement(m, acc)


def apply_dynamics(scale: Scale, x: SpanElement, beta: float) -> SpanElement:
    """sigma_{i beta}: v_s v_t* -> N(s)^-beta N(t)^beta v_s v_t*."""
    return SpanElement(
        x.monoid,
        {(s, t): c * float(npow(scale.n_value(s), beta)) / float(npow(scale.n_value(t), beta)) for (s, t), c in x.terms.items()},
    )


def conditional_expectation(scale: Scale, x: SpanElement) -> SpanElement:
    """Keep the terms with both legs in ker N."""
    return SpanElement(x.monoid, {(s, t): c for (s, t), c in x.terms.items() if scale.ker_contains(s) and scale.ker_contains(t)})


def evaluate(state: Callable[[Element, Element], complex], x: SpanElement) -> complex:
    return sum((c * state(s, t) for (s, t), c in x.terms.items()), 0j)


# -- traces on C*(ker N) -----------------------------------------------------

class Trace(ABC):
    """tau(v_q v_p*) for kernel elements q, p."""

    @abstractmethod
    def __call__(self, scale: Scale, q: Element, p: Element) -> complex: ...

    def spec(self) -> dict[str, Any]:
        return {}


class CharacterTrace(Trace):
    """z^(k - l) on a kernel isomorphic to Z_+, |z| = 1."""

    def __init__(self, z: complex = 1):
        z = complex(z)
        if abs(abs(z) - 1) > 1e-12:
            raise ValueError(f"character value must have modulus 1, got {z}")
        self.z = z

    def __call__(self, scale, q, p):
        k = scale.kernel_index(q) - scale.kernel_index(p)
        if self.z == 1:
            return 1 + 0j
        return self.z**k

    def spec(self):
        return {"type": "character", "z": [self.z.real, self.z.imag]}


class FourierTrace(Trace):
    """The measure on the circle with moments c_k; c_{-k} = conj(c_k).

    ``coeffs`` is a list (entries past the end are 0) or a callable on k >= 0.
    """

    def __init__(self, coeffs: Sequence[complex] | Callable[[int], complex]):
        if callable(coeffs):
            self._f = coeffs
            self._list = None
        else:
            self._list = [complex(c) for c in coeffs]
            if not self._list or abs(self._list[0] - 1) > 1e-12:
                raise ValueError("c_0 must be 1")
            self._f = lambda k: self._list[k] if k < len(self._list) else 0j

    def coeff(self, k: int) -> complex:
        return complex(self._f(k)) if k >= 0 else complex(self._f(-k)).conjugate()

    def __call__(self, scale, q, p):
        return self.coeff(scale.kernel_index(q) - scale.kernel_index(p))

    def spec(self):
        if self._list is None:
            return {"type": "fourier", "coeffs": "callable"}
        return {"type": "fourier", "coeffs": [[c.real, c.imag] for c in self._list]}


class LampCharacter(Trace):
    """Character of G = GF(2)[T]: chi(g) = prod over set bits i of signs[i]."""

    def __init__(self, signs: Sequence[int] = ()):
        if any(s not in (1, -1) for s in signs):
            raise ValueError("signs must be +1 or -1")
        self.mask = sum(1 << i for i, s in enumerate(signs) if s == -1)
        self.signs = list(signs)

    def __call__(self, scale, q, p):
        g = scale.kernel_index(q) ^ scale.kernel_index(p)
        return -1 + 0j if bin(g & self.mask).count("1") % 2 else 1 + 0j

    def spec(self):
        return {"type": "lamp_character", "signs": self.signs}


def trace_from_spec(spec: Mapping[str, Any]) -> Trace:
    kind = spec.get("type")
    if kind == "character":
        z = spec.get("z", [1, 0])
        return CharacterTrace(complex(z[0], z[1]) if isinstance(z, (list, tuple)) else complex(z))
    if kind == "fourier":
        coeffs = [complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in spec["coeffs"]]
        return FourierTrace(coeffs)
    if kind == "lamp_character":
        return LampCharacter(spec.get("signs", []))
    raise ValueError(f"unknown trace type {kind!r}")


def is_positive_semidefinite(scale: Scale, trace: Trace, kernel: Sequence[Element], tol: float = 1e-10) -> bool:
    """Gram matrix [tau(k_i, k_j)] on a kernel sample is PSD up to tol."""
    n = len(kernel)
    g = np.empty((n, n), dtype=complex)
    for i, q in enumerate(kernel):
        for j, p in enumerate(kernel):
            g[i, j] = trace(scale, q, p)
    g = (g + g.conj().T) / 2
    return bool(np.linalg.eigvalsh(g).min() >= -tol)


# -- KMS_beta states of finite type -------------------------------------------

@dataclass
class KmsValue:
    value: complex
    tail_bound: float
    heuristic_tail: bool
    cutoff: Any
    terms: int


class FiniteTypeState:
    """phi_{tau,beta} evaluated with a class cutoff; caches zeta."""

    def __init__(self, scale: Scale, beta: float, trace: Trace, class_cutoff: Any):
        self.scale = scale
        self.beta = float(beta)
        self.trace = trace
        self.cutoff = _frac(class_cutoff)
        z = zeta_partial(scale, self.beta, self.cutoff)
        if z.partial <= 0:
            raise ValueError("empty partition function")
        self.zeta_hat = z.partial
        self.zeta_closed = z.closed_form
        self._last_level = self._last_level_weight()
        self._cache: dict[Key, KmsValue] = {}

    def _last_level_weight(self) -> float:
        counts = self.scale.level_counts(self.cutoff)
        n, c = counts[-1]
        return c * float(npow(n, self.beta))

    def _tail(self, ns: float) -> tuple[float, bool]:
        if self.zeta_closed is not None and math.isfinite(self.zeta_closed):
            return ns * abs(self.zeta_closed - self.zeta_hat) / self.zeta_hat, False
        return ns * self._last_level / self.zeta_hat, True

    def evaluate(self, s: Element, t: Element) -> KmsValue:
        key = (s, t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        out = self._compute(s, t)
        self._cache[key] = out
        return out

    def __call__(self, s: Element, t: Element) -> complex:
        return self.evaluate(s, t).value

    def _compute(self, s, t) -> KmsValue:
        sc, m, beta = self.scale, self.scale.monoid, self.beta
        ns, nt = sc.n_value(s), sc.n_value(t)
        w = float(npow(ns, beta))
        tail, heuristic = self._tail(w)
        if ns != nt:
            return KmsValue(0j, 0.0, False, self.cutoff, 0)
        if s == t:
            return KmsValue(complex(w), 0.0, False, self.cutoff, 0)
        acc = 0j
        used = 0
        for x, mult in sc.kms_terms(s, t, self.cutoff):
            sx, tx = m._mul(s, x), m._mul(t, x)
            if sc.n_class(sx) != sc.n_class(tx):
                continue
            r = m._lcm(sx, tx)
            p = None if r is None else m._ldiv(sx, r)
            q = None if r is None else m._ldiv(tx, r)
            if p is None or q is None or not (sc.ker_contains(p) and sc.ker_contains(q)):
                raise InconsistencyError(
                    f"no kernel elements p, q with s x p = t x q for s={m.render(s)}, "
                    f"t={m.render(t)}, x={m.render(x)}"
                )
            acc += mult * float(npow(sc.n_value(x), beta)) * self.trace(sc, q, p)
            used += 1
        return KmsValue(w * acc / self.zeta_hat, tail, heuristic, self.cutoff, used)


def phi_finite_type(scale: Scale, beta: float, trace: Trace, s: Element, t: Element, class_cutoff: Any) -> tuple[complex, float]:
    v = FiniteTypeState(scale, beta, trace, class_cutoff).evaluate(s, t)
    return v.value, v.tail_bound


def axb_state_direct(beta: float, fourier: Callable[[int], complex] | FourierTrace | CharacterTrace, a: Element, b: Element) -> complex:
    """phi(v_(c,n) v_(d,n)*) = n^-beta/zeta(beta-1) sum_{m: nm | c-d} m^(1-beta) c_{(c-d)/(nm)}."""
    from scipy.special import zeta

    (c, n), (d, n2) = a, b
    if n != n2:
        return 0j
    if c == d:
        return complex(n**-beta)
    coeff = _coeff_fn(fourier)
    k = c - d
    total = 0j
    for m in range(1, abs(k) // n + 1):
        if k % (n * m) == 0:
            total += m ** (1 - beta) * coeff(k // (n * m))
    return n**-beta / float(zeta(beta - 1)) * total


def axb_tilde_measure(beta: float, fourier, k: int) -> complex:
    """k-th moment of the measure 1/zeta(beta-1) sum_{m | k} m^(1-beta) c_{k/m}."""
    from scipy.special import zeta

    if k == 0:
        return 1 + 0j
    coeff = _coeff_fn(fourier)
    k = abs(k)
    total = sum(m ** (1 - beta) * coeff(k // m) for m in range(1, k + 1) if k % m == 0)
    return total / float(zeta(beta - 1))


def _coeff_fn(f):
    if isinstance(f, FourierTrace):
        return f.coeff
    if isinstance(f, CharacterTrace):
        return lambda k: f.z**k
    return lambda k: complex(f(k)) if k >= 0 else complex(f(-k)).conjugate()


# -- beta = infinity and ground states ------------------------------------

def phi_kms_infty(scale: Scale, trace: Trace, s: Element, t: Element) -> complex:
    if scale.ker_contains(s) and scale.ker_contains(t):
        return trace(scale, s, t)
    return 0j


def ground_state(scale: Scale, psi: Callable[[Element, Element], complex], x: SpanElement) -> complex:
    """psi o E."""
    return evaluate(psi, conditional_expectation(scale, x))


def kms_residual(scale: Scale, beta: float, state: Callable[[Element, Element], complex], x: SpanElement, y: SpanElement) -> float:
    """|phi(xy) - phi(y sigma_{i beta}(x))|."""
    lhs = evaluate(state, span_product(x, y))
    rhs = evaluate(state, span_product(y, apply_dynamics(scale, x, beta)))
    return abs(lhs - rhs)


def sample_pool(scale: Scale, depth: int = 2, kernel_depth: int = 3) -> list[Element]:
    """Elements k·w with k from the kernel sample and w of length <= depth."""
    m = scale.monoid
    pool = {m._mul(k, w) for k in scale.kernel_elements(kernel_depth) for w in m.enumerate(depth)}
    return sorted(pool)


def random_monomial_pairs(scale: Scale, rng, count: int, pool: Sequence[Element] | None = None):
    """Random pairs (v_s v_t*, v_a v_b*) for KMS residual tests.

    Two thirds are built as a = t w, b = s w k (or with k on a), k in ker N,
    so that xy is a nonzero off-diagonal monomial; the rest are random with
    N(s)N(a) = N(t)N(b) whenever such b exists in the pool.
    """
    m = scale.monoid
    pool = list(pool if pool is not None else sample_pool(scale))
    kernel = scale.kernel_elements(3)
    short = m.enumerate(1)
    by_n: dict = {}
    for u in pool:
        by_n.setdefault(scale.n_value(u), []).append(u)
    pick = lambda seq: seq[rng.randrange(len(seq))]
    out = []
    while len(out) < count:
        s, t = pick(pool), pick(pool)
        mode = rng.randrange(3)
        if mode < 2:
            w, k = pick(short), pick(kernel)
            a, b = m._mul(t, w), m._mul(m._mul(s, w), k)
            if mode == 1:
                a, b = m._mul(a, k), m._mul(s, w)
        else:
            a = pick(pool)
            options = by_n.get(scale.n_value(s) * scale.n_value(a) / scale.n_value(t))
            if not options:
                continue
            b = pick(options)
        out.append((SpanElement.monomial(m, s, t), SpanElement.monomial(m, a, b)))
    return out
