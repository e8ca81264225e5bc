"""The measure mu_{N,beta} on cylinder sets, existence and partition functions.

Every evaluation works on classes: a cylinder ``Z_{s,F}`` only depends on
[s] and the image [F] in S/~N.  For a finite ∨-closed family G of classes
the "atoms" ``mu(Z_{r, G_r})`` (G_r = members strictly above r) come from the
Möbius recursion ``atom(r) = N(r)^-beta - sum_{g > r} atom(g)``; any
inclusion-exclusion value over a subset of G is a sum of atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

from .errors import NotSupported
from .monoids import Element
from .numeric import Number, as_float, is_exact, npow
from .scale import GradedScale, NClass, Scale, Verdict, _frac

FLOAT_TOL = 1e-12


@dataclass(frozen=True)
class Cylinder:
    """``Z_{s,F}``: characters that are 1 on e_s and 0 on e_t for t in F."""

    s: Element
    F: tuple[Element, ...] = ()


def class_image(scale: Scale, elements: Iterable[Element]) -> list[NClass]:
    """[F] with duplicates removed, in canonical order."""
    return sorted({scale.n_class(f) for f in elements})


def minimal_classes(scale: Scale, classes: Sequence[NClass]) -> list[NClass]:
    """Drop classes above another member; Z_t ⊆ Z_s when [s] <= [t]."""
    out = []
    for c in classes:
        if not any(d != c and scale.class_leq(d, c) for d in classes):
            out.append(c)
    return out


def inclusion_exclusion(scale: Scale, beta: Any, base: NClass, classes: Sequence[NClass]) -> Number:
    """``N(base)^-beta + sum_{K} (-1)^|K| N(q_K)^-beta`` over nonempty K ⊆ classes.

    Subsets are walked depth first; once a partial join is infinite every
    extension is too, so that branch is pruned.
    """
    items = minimal_classes(scale, list(classes))
    total = [npow(base.n, beta)]

    def walk(start: int, acc: NClass, sign: int) -> None:
        for i in range(start, len(items)):
            j = scale.class_join(acc, items[i])
            if j is None:
                continue
            total.append(-sign * npow(j.n, beta))
            walk(i + 1, j, -sign)

    walk(0, base, 1)
    return math.fsum(total) if not is_exact(beta) else sum(total, Fraction(0))


def mu_cylinder(scale: Scale, beta: Any, cyl: Cylinder | Element, F: Iterable[Element] = ()) -> Number:
    """mu_{N,beta}(Z_{s,F}); negative values mean the measure does not exist."""
    if not isinstance(cyl, Cylinder):
        cyl = Cylinder(cyl, tuple(F))
    m = scale.monoid
    for f in cyl.F:
        if m.left_divide(cyl.s, f) is None:
            raise ValueError(f"{m.render(f)} is not in {m.render(cyl.s)}S")
    base = scale.n_class(cyl.s)
    return inclusion_exclusion(scale, beta, base, class_image(scale, cyl.F))


# -- ∨-closed families and atoms -------------------------------------------

def join_closure(scale: Scale, classes: Iterable[NClass], limit: int | None = None) -> list[NClass] | None:
    """Smallest ∨-closed set containing ``classes``; None if it exceeds ``limit``."""
    items = set(classes)
    frontier = list(items)
    while frontier:
        new = []
        current = list(items)
        for x in frontier:
            for y in current:
                j = scale.class_join(x, y)
                if j is not None and j not in items:
                    items.add(j)
                    new.append(j)
                    if limit is not None and len(items) > limit:
                        return None
        frontier = new
    return sorted(items)


def is_join_closed(scale: Scale, classes: Sequence[NClass]) -> bool:
    members = set(classes)
    for i, x in enumerate(classes):
        for y in classes[i + 1:]:
            j = scale.class_join(x, y)
            if j is not None and j not in members:
                return False
    return True


def atoms(scale: Scale, beta: Any, closed: Sequence[NClass], mass: Callable[[NClass], Number] | None = None) -> dict[NClass, Number]:
    """``mu(Z_{r, G_r})`` for every r in a ∨-closed family G.

    ``mass(r)`` is mu(Z_r); the default is N(r)^-beta.
    """
    order = sorted(closed, key=lambda c: c.n, reverse=True)
    out: dict[NClass, Number] = {}
    for i, r in enumerate(order):
        acc = npow(r.n, beta) if mass is None else mass(r)
        for g in order[:i]:
            if g.n > r.n and scale.class_leq(r, g):
                acc -= out[g]
        out[r] = acc
    return out


def level_closure(scale: GradedScale, levels: Iterable, limit: int | None = None) -> list | None:
    items = set(levels)
    frontier = list(items)
    while frontier:
        new = []
        current = list(items)
        for x in frontier:
            for y in current:
                j = scale.level_join(x, y)
                if j not in items:
                    items.add(j)
                    new.append(j)
                    if limit is not None and len(items) > limit:
                        return None
        frontier = new
    return sorted(items, key=lambda L: (scale.level_n(L), L))


def level_atoms(scale: GradedScale, beta: Any, levels: Sequence, mass: Callable[[Any], Number] | None = None) -> dict[Any, Number]:
    """Per-class atom value on each level of a ∨-closed union of whole levels.

    A class at level L lies below exactly count(L')/count(L) classes of any
    level L' >= L, and ker N permutes each level, so atoms are constant on
    levels.  ``mass(L)`` is mu(Z_r) for r on level L (default N^-beta).
    """
    order = sorted(levels, key=lambda L: scale.level_n(L), reverse=True)
    out: dict[Any, Number] = {}
    for i, L in enumerate(order):
        acc = npow(scale.level_n(L), beta) if mass is None else mass(L)
        cL = scale.level_count(L)
        for M in order[:i]:
            if M != L and scale.level_leq(L, M):
                acc -= (scale.level_count(M) // cL) * out[M]
        out[L] = acc
    return out


# -- existence ---------------------------------------------------------------

@dataclass
class ExistenceVerdict:
    ok: bool
    beta: Any
    cutoff: Fraction
    witness: list[NClass] | None = None
    value: Number | None = None
    certificate: str = ""
    checked: int = 0
    partial: bool = False
    exact: bool = True
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def _candidates(scale: Scale, cutoff: Fraction) -> list[NClass]:
    unit = scale.unit_class
    return [c for c in scale.enumerate_classes(cutoff) if c != unit]


def _atom_certificate(scale: Scale, beta: Any, cutoff: Fraction, closure_limit: int):
    """Return (min atom, where, size) over the closure, or None if too large."""
    if isinstance(scale, GradedScale):
        levels = level_closure(scale, scale.levels(cutoff), limit=closure_limit)
        if levels is None:
            return None
        vals = level_atoms(scale, beta, levels)
        where = min(vals, key=lambda L: (vals[L], scale.level_n(L), L))
        return vals[where], scale.level_rep(where), sum(scale.level_count(L) for L in levels)
    closed = join_closure(scale, scale.enumerate_classes(cutoff), limit=closure_limit)
    if closed is None:
        return None
    vals = atoms(scale, beta, closed)
    where = min(vals, key=lambda c: (vals[c], c))
    return vals[where], where.rep, len(closed)


def existence_check(
    scale: Scale,
    beta: Any,
    class_cutoff: Any = 16,
    max_size: int = 6,
    budget: int = 200_000,
    closure_limit: int = 5000,
) -> ExistenceVerdict:
    """Test mu(Z_{e,F}) >= 0 for finite sets F of classes with N <= class_cutoff.

    A pass is a certificate at the cutoff.  A fail is a proof that no measure
    with mu(Z_s) = N(s)^-beta exists.
    """
    cutoff = _frac(class_cutoff)
    exact = is_exact(beta)
    tol = 0 if exact else -FLOAT_TOL
    verdict = ExistenceVerdict(True, beta, cutoff, exact=exact)
    if beta < 0:
        verdict.notes.append("beta < 0: KMS states need beta >= 0")

    cert = _atom_certificate(scale, beta, cutoff, closure_limit)
    if cert is not None:
        low, where, size = cert
        if low >= tol:
            verdict.certificate = (
                f"all atoms of the ∨-closure ({size} classes) of the classes with N <= {cutoff} "
                f"are >= 0; this covers every finite F in that range"
            )
            return verdict
        verdict.notes.append(f"negative atom {as_float(low):.17g} at {scale.monoid.render(where)}")

    unit = scale.unit_class
    cands = _candidates(scale, cutoff)
    checked = 0
    for size in range(1, max_size + 1):
        for F in _antichains(scale, cands, size):
            checked += 1
            v = inclusion_exclusion(scale, beta, unit, F)
            if v < tol:
                verdict.ok = False
                verdict.witness = list(F)
                verdict.value = v
                verdict.checked = checked
                verdict.certificate = "witness"
                return verdict
            if checked >= budget:
                verdict.partial = True
                verdict.checked = checked
                verdict.ok = cert is None
                verdict.certificate = "budget exhausted"
                if cert is not None:
                    verdict.notes.append("negative atom proves failure but no small witness was found")
                return verdict
    verdict.checked = checked
    if cert is not None:
        # A negative atom is itself a failure.
        verdict.ok = False
        verdict.certificate = "negative atom"
        verdict.value = cert[0]
        return verdict
    verdict.certificate = f"all antichains of size <= {max_size} with N <= {cutoff}"
    verdict.partial = True
    return verdict


def _antichains(scale: Scale, items: Sequence[NClass], size: int):
    n = len(items)

    def rec(start: int, chosen: list[NClass]):
        if len(chosen) == size:
            yield tuple(chosen)
            return
        for i in range(start, n):
            c = items[i]
            if all(not scale.class_leq(d, c) and not scale.class_leq(c, d) for d in chosen):
                chosen.append(c)
                yield from rec(i + 1, chosen)
                chosen.pop()

    yield from rec(0, [])


# -- partition function ----------------------------------------------------

@dataclass
class ZetaResult:
    partial: float
    closed_form: float | None
    cutoff: Fraction
    classes: int

    @property
    def tail(self) -> float | None:
        if self.closed_form is None or math.isinf(self.closed_form):
            return None
        return self.closed_form - self.partial


def zeta_partial(scale: Scale, beta: Any, class_cutoff: Any) -> ZetaResult:
    """Sum of N^-beta over the classes with N <= class_cutoff."""
    cutoff = _frac(class_cutoff)
    counts = scale.level_counts(cutoff)
    partial = math.fsum(c * npow(n, float(beta)) for n, c in counts)
    closed = scale.zeta_closed(float(beta))
    return ZetaResult(partial, closed, cutoff, sum(c for _, c in counts))


# -- foundation sets and the boundary quotient ---------------------------

def foundation_candidate_check(scale: Scale, F: Iterable[Element], probe_cutoff: Any = 64, depth: int = 4) -> Verdict:
    """Does every s (up to the probe) meet some t in F?"""
    F = list(F)
    if not F:
        raise ValueError("F must be nonempty")
    m = scale.monoid
    try:
        probes = scale.enumerate_classes(probe_cutoff)
        targets = class_image(scale, F)
        for i, c in enumerate(probes):
            if not any(scale.class_join(c, t) is not None for t in targets):
                return Verdict(False, (c.rep,), i + 1, note="class probe")
        return Verdict(True, None, len(probes), note=f"classes with N <= {probe_cutoff}")
    except NotSupported:
        pass
    elems = m.enumerate(depth)
    for i, s in enumerate(elems):
        if not any(m._lcm(s, t) is not None for t in F):
            return Verdict(False, (s,), i + 1, note="element probe")
    return Verdict(True, None, len(elems), note=f"elements of length <= {depth}")


def boundary_factor_check(scale: Scale, beta: Any, F: Iterable[Element]) -> Number:
    """``1 + sum_K (-1)^|K| N(q_K)^-beta``; zero iff the state kills prod(1 - v_s v_s*)."""
    return inclusion_exclusion(scale, beta, scale.unit_class, class_image(scale, F))
