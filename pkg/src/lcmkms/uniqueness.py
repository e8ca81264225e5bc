"""Extreme KMS values phi' <= phi'' and the uniqueness criterion.

For a pair (a, b) the two values are the measures of the trivially fixed
and the fixed points of lambda_a lambda_b^-1:

* ``mu_triv`` uses the class set B^{a,b} (classes of elements at = bt);
* ``mu_fix`` is a limit over finite ∨-closed class sets [F] of the atom
  masses sum_{[s] in T_[F]} mu(Z_{s, F_s}).

A KMS state is unique iff the two agree for all pairs a != b with N(a) =
N(b) and aS ∩ bS nonempty; when 1 is isolated in N(S), kernel pairs suffice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .errors import NotSupported
from .measure import atoms, inclusion_exclusion, is_join_closed, join_closure, level_atoms, zeta_partial
from .monoids import Element
from .numeric import Number, as_float, is_exact, npow, zero
from .scale import GradedScale, NClass, Scale, Verdict, _frac


# -- B^{a,b} -------------------------------------------------------------------

def b_set(scale: Scale, a: Element, b: Element, class_cutoff: Any, depth: int = 4) -> set[NClass]:
    """Classes [at] with at = bt and N <= cutoff.

    For a = b this is every class above [a].  Otherwise t is scanned over
    the elements of length <= depth; all built-in families are right
    cancellative, so the scan comes back empty.
    """
    m = scale.monoid
    cutoff = _frac(class_cutoff)
    if a == b:
        base = scale.n_class(a)
        return {c for c in scale.enumerate_classes(cutoff) if scale.class_leq(base, c)}
    out = set()
    for t in m.enumerate(depth):
        at = m._mul(a, t)
        if at == m._mul(b, t) and scale.n_value(at) <= cutoff:
            out.add(scale.n_class(at))
    return out


def mu_omega_triv(scale: Scale, beta: Any, a: Element, b: Element, class_cutoff: Any, depth: int = 4) -> Number:
    """mu(union of Z_s over [s] in B) = sum_K (-1)^(|K|+1) N(q_K)^-beta."""
    if a == b:
        # B is everything above [a]; its union is Z_a.
        return npow(scale.n_value(a), beta)
    B = sorted(b_set(scale, a, b, class_cutoff, depth))
    if not B:
        return zero(beta)
    return npow(Fraction(1), beta) - inclusion_exclusion(scale, beta, scale.unit_class, B)


# -- T^{a,b}_[F] ---------------------------------------------------------------

def _fast_member(scale: Scale, a: Element, b: Element, c: NClass) -> bool:
    return scale.class_act_inv(a, c) == scale.class_act_inv(b, c)


def _is_invariant(scale: Scale, a: Element, b: Element, F: Sequence[NClass]) -> bool:
    members = set(F)
    return scale.unit_class in members and all(
        scale.class_act(a, c) in members and scale.class_act(b, c) in members for c in F
    )


def t_set_for_F(scale: Scale, a: Element, b: Element, F: Sequence[NClass], path: str = "auto") -> list[NClass]:
    """T^{a,b}_[F]: the classes of F whose atom can meet its image under lambda_a lambda_b^-1.

    ``path="fast"`` uses a^-1[s] = b^-1[s] (a, b in ker N, F invariant and
    containing [e]); ``"general"`` applies the defining conditions; ``"auto"``
    picks the fast path when it applies.
    """
    F = sorted(set(F))
    kernel_pair = scale.ker_contains(a) and scale.ker_contains(b)
    if path == "auto":
        path = "fast" if kernel_pair and _is_invariant(scale, a, b, F) else "general"
    if path == "fast":
        if not kernel_pair:
            raise ValueError("fast path needs a, b in ker N")
        if not _is_invariant(scale, a, b, F):
            raise ValueError("fast path needs F to contain [e] and be invariant under a and b")
        return [c for c in F if _fast_member(scale, a, b, c)]
    if path != "general":
        raise ValueError(f"unknown path {path!r}")
    m = scale.monoid
    r = m._lcm(a, b)
    if r is None:
        raise ValueError("aS ∩ bS is empty")
    top = scale.n_class(r)
    for c in F:
        if not scale.class_leq(top, c):
            raise ValueError(f"class of {m.render(c.rep)} is not above [a] ∨ [b]")
    pre = {c: (scale.class_preimage(a, c), scale.class_preimage(b, c)) for c in F}
    out = []
    for s in F:
        pa, pb = pre[s]
        j = scale.class_join(pa, pb)
        if j is None:
            continue
        ok = True
        for r_ in F:
            if r_ != s and scale.class_leq(s, r_):
                ra, rb = pre[r_]
                if scale.class_leq(ra, j) or scale.class_leq(rb, j):
                    ok = False
                    break
        if ok:
            out.append(s)
    return out


# -- ladders -------------------------------------------------------------------

@dataclass
class TruncationLadder:
    """Increasing ∨-closed class sets; graded ladders list whole levels."""

    scale: Scale
    rungs: list[list]
    graded: bool = False
    label: str = ""

    def classes(self, i: int) -> list[NClass]:
        if not self.graded:
            return list(self.rungs[i])
        out: list[NClass] = []
        for L in self.rungs[i]:
            out.extend(self.scale.level_classes(L))
        return sorted(out)

    def size(self, i: int) -> int:
        if self.graded:
            return sum(self.scale.level_count(L) for L in self.rungs[i])
        return len(self.rungs[i])

    def verify(self, a: Element | None = None, b: Element | None = None) -> Verdict:
        sc = self.scale
        prev: set = set()
        for i, rung in enumerate(self.rungs):
            items = set(rung)
            if not prev <= items:
                return Verdict(False, (i, "not increasing"))
            if self.graded:
                if any(sc.level_join(x, y) not in items for x in rung for y in rung):
                    return Verdict(False, (i, "not ∨-closed"))
            elif not is_join_closed(sc, list(rung)):
                return Verdict(False, (i, "not ∨-closed"))
            if a is not None and sc.ker_contains(a) and sc.ker_contains(b):
                if not self.graded and not _is_invariant(sc, a, b, list(rung)):
                    return Verdict(False, (i, "not invariant"))
            prev = items
        return Verdict(True, None, len(self.rungs))


def _divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def default_ladder(scale: Scale, height: int | None = None, base: NClass | None = None, closure_limit: int = 20000) -> TruncationLadder:
    """AxB: levels dividing n!; lamplighter: boxes x, y <= n; otherwise the
    ∨-closure of the classes with N <= 2^k (all above ``base`` if given)."""
    unit = scale.unit_class
    if base is None or base == unit:
        if scale.monoid.family == "axb":
            h = height or 8
            return TruncationLadder(scale, [_divisors(math.factorial(n)) for n in range(1, h + 1)], True, "levels dividing n!")
        if scale.monoid.family == "lamplighter":
            h = height or 6
            rungs = [sorted(((x, y) for x in range(n + 1) for y in range(n + 1)), key=lambda L: (scale.level_n(L), L)) for n in range(1, h + 1)]
            return TruncationLadder(scale, rungs, True, "levels x, y <= n")
    h = height or 10
    base = base or unit
    rungs = []
    for k in range(1, h + 1):
        limit = base.n * 2**k
        if isinstance(scale, GradedScale):
            seed = [c for L in scale.levels(limit) for c in scale.level_classes(L) if scale.class_leq(base, c)]
        else:
            seed = [c for c in scale.enumerate_classes(limit) if scale.class_leq(base, c)]
        closed = join_closure(scale, seed, limit=closure_limit)
        if closed is None:
            break
        rungs.append(closed)
    return TruncationLadder(scale, rungs, False, "∨-closure of classes above base with N <= N(base)·2^k")


# -- mu(Omega_fix) ---------------------------------------------------------------

def mu_omega_fix(scale: Scale, beta: Any, a: Element, b: Element, ladder: TruncationLadder | None = None) -> list[Number]:
    """Raw rung values of the limit defining mu(Omega_fix^{a,b})."""
    m = scale.monoid
    r = m._lcm(a, b)
    if r is None or scale.n_value(a) != scale.n_value(b):
        return [zero(beta)] * (len(ladder.rungs) if ladder else 1)
    if ladder is None:
        ladder = default_ladder(scale, base=scale.n_class(r))
    kernel_pair = scale.ker_contains(a) and scale.ker_contains(b)
    out = []
    for i, rung in enumerate(ladder.rungs):
        if ladder.graded:
            if not kernel_pair:
                raise ValueError("graded ladders need a kernel pair")
            vals = level_atoms(scale, beta, rung)
            total = zero(beta)
            for L in rung:
                if a == b or _fast_member(scale, a, b, scale.n_class(scale.level_rep(L))):
                    total += scale.level_count(L) * vals[L]
            out.append(total)
        else:
            vals = atoms(scale, beta, rung)
            T = list(rung) if a == b else t_set_for_F(scale, a, b, rung)
            out.append(sum((vals[c] for c in T), zero(beta)))
    return out


def mu_omega_fix_truncated(scale: Scale, beta: Any, a: Element, b: Element, class_cutoff: Any) -> Number:
    """The rung over all classes with N <= cutoff, with atoms taken under the
    truncated class measure zeta_hat^-1 sum_{N(x) <= cutoff} N(x)^-beta delta_[x].

    The family is the ∨-closure of those classes; classes beyond the cutoff
    carry no mass.  Graded scales skip the closure: classes sharing a level
    are pairwise disjoint, so the extra classes never change T.  T is found
    by the general path, an independent route to ``finite_type_values(...).fix``.
    """
    cutoff = _frac(class_cutoff)
    if isinstance(scale, GradedScale):
        levels = scale.levels(cutoff)
        weight = {L: scale.level_count(L) * npow(scale.level_n(L), beta) for L in levels}
        zhat = sum(weight.values(), zero(beta))

        def level_mass(L):
            c = scale.level_count(L)
            return sum((weight[M] / c for M in levels if scale.level_leq(L, M)), zero(beta)) / zhat

        per_level = level_atoms(scale, beta, levels, level_mass)
        F = [c for L in levels for c in scale.level_classes(L)]
        vals = {c: per_level[scale.level_of(c.rep)] for c in F}
    else:
        low = scale.enumerate_classes(cutoff)
        zhat = sum((npow(c.n, beta) for c in low), zero(beta))
        F = join_closure(scale, low)
        vals = atoms(scale, beta, F, lambda r: sum((npow(x.n, beta) for x in low if scale.class_leq(r, x)), zero(beta)) / zhat)
    T = list(F) if a == b else t_set_for_F(scale, a, b, F, path="general")
    return sum((vals[c] for c in T), zero(beta))


# -- finite type: the measure lives on the classes --------------------------------

def _class_counts(scale: Scale, a: Element, b: Element, cutoff: Fraction):
    """Per N-value: (number of classes, |B_n|, |T_n|) for a kernel pair."""
    rows: dict[Fraction, list[int]] = {}
    base = scale.n_class(a)
    if isinstance(scale, GradedScale):
        for L in scale.levels(cutoff):
            n, c = scale.level_n(L), scale.level_count(L)
            rep = scale.n_class(scale.level_rep(L))
            row = rows.setdefault(n, [0, 0, 0])
            row[0] += c
            if a == b:
                row[1] += c if scale.class_leq(base, rep) else 0
                row[2] += c
            elif _fast_member(scale, a, b, rep):
                row[2] += c
        return rows
    for cl in scale.enumerate_classes(cutoff):
        row = rows.setdefault(cl.n, [0, 0, 0])
        row[0] += 1
        if a == b:
            row[1] += scale.class_leq(base, cl)
            row[2] += 1
        elif _fast_member(scale, a, b, cl):
            row[2] += 1
    if a != b:
        for cl in b_set(scale, a, b, cutoff):
            rows[cl.n][1] += 1
    return rows


@dataclass
class FiniteTypeValues:
    triv: Number
    fix: Number
    fix_lower: float | None
    zeta_hat: Number
    cutoff: Fraction


def finite_type_values(scale: Scale, beta: Any, a: Element, b: Element, class_cutoff: Any, exact: bool = False) -> FiniteTypeValues:
    """zeta^-1 sum N^-beta |B_n| and zeta^-1 sum N^-beta |T_n| for a kernel pair.

    In the finite-type regime mu_{N,beta} is the class measure
    zeta^-1 sum N(x)^-beta delta_[x], on which Omega_fix becomes
    {[x]: a^-1[x] = b^-1[x]}.  ``fix_lower`` divides by the closed-form zeta
    and is a lower bound for the limit.
    """
    if not (scale.ker_contains(a) and scale.ker_contains(b)):
        raise ValueError("finite-type values are computed for kernel pairs")
    cutoff = _frac(class_cutoff)
    rows = _class_counts(scale, a, b, cutoff)
    if exact and is_exact(beta):
        # Exact rationals; only practical for small cutoffs.
        zhat = sum((r[0] * npow(n, beta) for n, r in rows.items()), Fraction(0))
        sb = sum((r[1] * npow(n, beta) for n, r in rows.items()), Fraction(0))
        st = sum((r[2] * npow(n, beta) for n, r in rows.items()), Fraction(0))
        return FiniteTypeValues(sb / zhat, st / zhat, None, zhat, cutoff)
    z = zeta_partial(scale, beta, cutoff)
    sb = math.fsum(r[1] * float(npow(n, float(beta))) for n, r in rows.items())
    st = math.fsum(r[2] * float(npow(n, float(beta))) for n, r in rows.items())
    lower = None
    if z.closed_form is not None and math.isfinite(z.closed_form):
        lower = st / z.closed_form
    return FiniteTypeValues(sb / z.partial, st / z.partial, lower, z.partial, cutoff)


# -- generalized scales -------------------------------------------------------------

@dataclass
class GsVerdict:
    ok: bool
    axioms: dict[str, Verdict]
    cutoff: Fraction

    def __bool__(self) -> bool:
        return self.ok


def gs_check(scale: Scale, cutoff: Any = 20, depth: int = 3) -> GsVerdict:
    """Axioms of a generalized scale, each checked up to the cutoff.

    (1) ker N is the core (elements meeting every principal ideal);
    (2) N^-1(n)/~N has n classes; (3) equal N means equal or disjoint;
    (4) every s meets some t with N(t) = n, for every n in N(S).
    """
    cutoff = _frac(cutoff)
    m = scale.monoid
    res: dict[str, Verdict] = {}
    if any(w.denominator != 1 for w in scale.weights.values()) or scale.is_trivial():
        bad = Verdict(False, None, 0, "scale is trivial or not integer valued")
        return GsVerdict(False, {k: bad for k in ("1", "2", "3", "4")}, cutoff)

    elems = m.enumerate(depth)
    v1 = Verdict(True, None, 0)
    for s in elems:
        meets_all = all(m._lcm(s, t) is not None for t in elems)
        v1.checked += 1
        if scale.ker_contains(s) != meets_all:
            v1 = Verdict(False, (s,), v1.checked)
            break
    res["1"] = v1

    classes = scale.enumerate_classes(cutoff)
    by_n: dict[Fraction, list[NClass]] = {}
    for c in classes:
        by_n.setdefault(c.n, []).append(c)
    v2 = Verdict(True, None, 0)
    for n, cs in sorted(by_n.items()):
        v2.checked += 1
        if len(cs) != n:
            v2 = Verdict(False, (n, len(cs)), v2.checked)
            break
    res["2"] = v2

    v3 = Verdict(True, None, 0)
    for n, cs in sorted(by_n.items()):
        for i, x in enumerate(cs):
            for y in cs[i + 1:]:
                v3.checked += 1
                if scale.class_join(x, y) is not None:
                    v3 = Verdict(False, (x.rep, y.rep), v3.checked)
                    break
            if not v3.ok:
                break
        if not v3.ok:
            break
    res["3"] = v3

    v4 = Verdict(True, None, 0)
    for c in classes:
        for n, cs in by_n.items():
            v4.checked += 1
            if not any(scale.class_join(c, d) is not None for d in cs):
                v4 = Verdict(False, (c.rep, n), v4.checked)
                break
        if not v4.ok:
            break
    res["4"] = v4
    return GsVerdict(all(v.ok for v in res.values()), res, cutoff)


_GS_CACHE: dict[int, GsVerdict] = {}


def _require_gs(scale: Scale) -> None:
    key = id(scale)
    if key not in _GS_CACHE:
        _GS_CACHE[key] = gs_check(scale)
    if not _GS_CACHE[key]:
        raise NotSupported(f"{scale.describe()} is not a generalized scale")


def gs_ratios(scale: Scale, a: Element, b: Element, n: int) -> tuple[Fraction, Fraction]:
    """(|B_n| / n, |T_n| / n) for a kernel pair."""
    _require_gs(scale)
    if not (scale.ker_contains(a) and scale.ker_contains(b)):
        raise ValueError("ratios are defined for kernel pairs")
    row = _class_counts(scale, a, b, Fraction(n)).get(Fraction(n), [0, 0, 0])
    return Fraction(row[1], n), Fraction(row[2], n)


# -- phi' and phi'' for arbitrary pairs ----------------------------------------------

@dataclass
class ExtremeValues:
    triv: float
    fix: float
    method: str
    factor: float = 1.0


def extreme_values(scale: Scale, beta: float, a: Element, b: Element, class_cutoff: Any = 10**4, ladder_height: int | None = None) -> ExtremeValues:
    """phi'(v_a v_b*) and phi''(v_a v_b*).

    Non-kernel pairs are reduced with phi(v_a v_b*) = N(a)^-beta phi(v_a1 v_b1*),
    a1 = b^-1 c, b1 = a^-1 c, aS ∩ bS = cS, which holds for every KMS state.
    """
    m = scale.monoid
    factor = 1.0
    for _ in range(64):
        if scale.n_value(a) != scale.n_value(b):
            return ExtremeValues(0.0, 0.0, "unequal N")
        if a == b:
            w = factor * float(npow(scale.n_value(a), beta))
            return ExtremeValues(w, w, "diagonal", factor)
        c = m._lcm(a, b)
        if c is None:
            return ExtremeValues(0.0, 0.0, "disjoint")
        if scale.ker_contains(a) and scale.ker_contains(b):
            break
        factor *= float(npow(scale.n_value(a), beta))
        a, b = m._ldiv(b, c), m._ldiv(a, c)
    else:
        return ExtremeValues(0.0, factor, "reduction did not terminate", factor)
    closed = scale.zeta_closed(float(beta))
    if closed is not None and math.isfinite(closed):
        v = finite_type_values(scale, beta, a, b, class_cutoff)
        return ExtremeValues(factor * v.triv, factor * v.fix, "finite type", factor)
    triv = mu_omega_triv(scale, beta, a, b, class_cutoff)
    fix = mu_omega_fix(scale, beta, a, b, default_ladder(scale, ladder_height))
    return ExtremeValues(factor * float(triv), factor * float(fix[-1]), "ladder", factor)


# -- verdict ---------------------------------------------------------------------------

@dataclass
class Rung:
    F_size: int
    mu_triv: Number
    mu_fix: Number


@dataclass
class PairReport:
    a: Element
    b: Element
    rungs: list[Rung]
    verdict: str
    stabilized: bool
    gap: float
    fix_lower: float | None = None

    def to_json(self, render) -> dict:
        return {
            "a": render(self.a),
            "b": render(self.b),
            "rungs": [
                {"F_size": r.F_size, "mu_triv": as_float(r.mu_triv), "mu_fix": as_float(r.mu_fix)} for r in self.rungs
            ],
            "verdict": self.verdict,
            "stabilized": self.stabilized,
            "gap": self.gap,
            "fix_lower": self.fix_lower,
        }


@dataclass
class UniquenessReport:
    beta: Any
    verdict: str
    pairs: list[PairReport]
    witness: PairReport | None
    caveat: str
    tolerance: float
    exact: bool
    notes: list[str] = field(default_factory=list)
    cutoff: Fraction | None = None
    ladder: str = ""


def pair_report(scale: Scale, beta: Any, a: Element, b: Element, ladder: TruncationLadder, tolerance: float, class_cutoff: Any = 10**4) -> PairReport:
    fix = mu_omega_fix(scale, beta, a, b, ladder)
    triv = mu_omega_triv(scale, beta, a, b, ladder_cutoff(scale, ladder))
    rungs = [Rung(ladder.size(i), triv, f) for i, f in enumerate(fix)]
    gap = as_float(fix[-1] - triv)
    stabilized = len(fix) >= 2 and abs(as_float(fix[-1] - fix[-2])) <= tolerance
    lower = None
    if gap > tolerance and not stabilized and scale.ker_contains(a) and scale.ker_contains(b):
        # Rung values only bound the limit from above; in the finite-type
        # regime the class measure gives a lower bound too.
        closed = scale.zeta_closed(float(beta))
        if closed is not None and math.isfinite(closed):
            lower = finite_type_values(scale, float(beta), a, b, class_cutoff).fix_lower
    if gap <= tolerance:
        verdict = "equal-at-tolerance"
    elif stabilized or (lower is not None and lower - as_float(triv) > tolerance):
        verdict = "separated"
    else:
        verdict = "inconclusive"
    return PairReport(a, b, rungs, verdict, stabilized, gap, lower)


def ladder_cutoff(scale: Scale, ladder: TruncationLadder) -> Fraction:
    last = ladder.rungs[-1]
    if ladder.graded:
        return max(scale.level_n(L) for L in last)
    return max(c.n for c in last)


def kernel_pairs(scale: Scale, depth: int) -> list[tuple[Element, Element]]:
    """Unordered pairs a != b of kernel elements with aS ∩ bS nonempty."""
    ker = scale.kernel_elements(depth)
    m = scale.monoid
    return [(a, b) for i, a in enumerate(ker) for b in ker[i + 1:] if m._lcm(a, b) is not None]


def uniqueness_verdict(
    scale: Scale,
    beta: Any,
    depth: int = 10,
    ladder_height: int | None = None,
    tolerance: float | None = None,
    pairs: Sequence[tuple[Element, Element]] | None = None,
    class_cutoff: Any = 10**4,
) -> UniquenessReport:
    """Compare phi' and phi'' on kernel pairs along the default ladder."""
    exact = is_exact(beta)
    tol = tolerance if tolerance is not None else (1e-9 if exact else 1e-6)
    notes = []
    if pairs is None:
        pairs = kernel_pairs(scale, depth)
        notes.append(f"kernel pairs from the kernel sample at depth {depth}")
    ladder = default_ladder(scale, ladder_height)
    check = ladder.verify()
    if not check:
        notes.append(f"ladder check failed: {check.witness}")
    reports = [pair_report(scale, beta, a, b, ladder, tol, class_cutoff) for a, b in pairs]
    witness = None
    if not reports:
        verdict = "unique"
        notes.append("no kernel pairs: the state is determined by the measure")
    elif all(r.verdict == "equal-at-tolerance" for r in reports):
        verdict = "unique"
    elif any(r.verdict == "separated" for r in reports):
        verdict = "not unique"
        witness = max((r for r in reports if r.verdict == "separated"), key=lambda r: r.gap)
    else:
        verdict = "inconclusive"
    caveat = "certificate, not proof"
    if all(r.stabilized for r in reports):
        caveat = "certificate at tolerance and depth"
    return UniquenessReport(beta, verdict, reports, witness, caveat, tol, exact, notes, ladder_cutoff(scale, ladder), ladder.label)
