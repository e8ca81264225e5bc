"""Acceptance criteria; each prints a PASS/FAIL line in the terminal summary."""

import cmath
import math
import random
import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations
from pathlib import Path

import pytest
from hypothesis import settings

from lcmkms.kms import (
    CharacterTrace,
    FiniteTypeState,
    FourierTrace,
    LampCharacter,
    axb_state_direct,
    kms_residual,
    phi_finite_type,
    random_monomial_pairs,
)
from lcmkms.measure import boundary_factor_check, existence_check, inclusion_exclusion, mu_cylinder, zeta_partial
from lcmkms.monoids import AxB, C3, FreeMonoid, Lamplighter
from lcmkms.scale import make_scale
from lcmkms.uniqueness import default_ladder, extreme_values, uniqueness_verdict

AXB = make_scale(AxB())
C3S = make_scale(C3())
LAMP = make_scale(Lamplighter())
FREE = make_scale(FreeMonoid(2), {"a": 2, "b": 2})


@pytest.mark.criterion(1, "AxB class counts and order predicate")
def test_axb_structure():
    start = time.perf_counter()
    counts = dict(AXB.level_counts(50))
    assert all(counts[Fraction(n)] == n for n in range(1, 51))
    classes = AXB.enumerate_classes(12)
    assert len(classes) == 78
    for x in classes:
        for y in classes:
            (c, n), (d, m) = x.rep, y.rep
            assert AXB.class_leq(x, y) == (m % n == 0 and (c - d) % n == 0)
    assert time.perf_counter() - start < 5


@pytest.mark.criterion(2, "partition function partial sums")
def test_zeta_reproduction():
    start = time.perf_counter()
    assert abs(zeta_partial(AXB, 3, 10_000).partial - math.pi**2 / 6) <= 2e-4
    assert abs(zeta_partial(LAMP, 2, 2**20).partial - 4) <= 1e-3
    c3 = zeta_partial(C3S, 2, 2**16)
    assert abs(c3.partial - (1 - 2**-2) ** -2) <= 1e-6
    assert time.perf_counter() - start < 10


@pytest.mark.criterion(3, "existence boundary at beta = 1")
def test_existence_boundary():
    v = existence_check(LAMP, 0.9)
    assert not v
    assert len(v.witness) == 2 and v.witness[0].n == v.witness[1].n == 2
    assert abs(v.value - (1 - 2 * 2**-0.9)) <= 1e-15
    assert inclusion_exclusion(LAMP, 0.9, LAMP.unit_class, v.witness) == v.value
    ok = existence_check(LAMP, 1, class_cutoff=16)
    assert ok and ok.certificate.startswith("all atoms")
    # spot check the certificate against direct inclusion-exclusion
    cands = [c for c in LAMP.enumerate_classes(16) if c != LAMP.unit_class]
    rng = random.Random(0)
    for _ in range(3000):
        F = rng.sample(cands, rng.randint(1, 4))
        assert inclusion_exclusion(LAMP, 1, LAMP.unit_class, F) >= 0
    # the two classes at a level of N = 2 exhaust the measure
    assert mu_cylinder(LAMP, 1, (0, 0, 0), [(0, 0, 1), (1, 0, 1)]) == 0
    assert not existence_check(FREE, Fraction(999, 1000))
    assert not existence_check(FREE, 0.999)
    exact = existence_check(FREE, 1)
    assert exact and exact.exact


def _point_characters(scale):
    if scale is LAMP:
        return [LampCharacter([1, -1, 1, -1, -1]), LampCharacter([-1])]
    return [CharacterTrace(1), CharacterTrace(cmath.exp(2j * math.pi / 3))]


@pytest.mark.criterion(4, "KMS condition on sampled monomial pairs")
def test_kms_condition():
    start = time.perf_counter()
    for scale, beta, cutoff in [(AXB, 3, 10_000), (C3S, 1, 2**28), (LAMP, 2, 2**30)]:
        for trace in _point_characters(scale):
            state = FiniteTypeState(scale, beta, trace, cutoff)
            rng = random.Random(2024)
            pairs = random_monomial_pairs(scale, rng, 100)
            worst = max(kms_residual(scale, beta, state, x, y) for x, y in pairs)
            assert worst <= 1e-6, (scale.describe(), worst)
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(5, "finite-type state against the direct ax+b formula")
def test_oracle_equivalence():
    families = [FourierTrace(lambda k: 1), FourierTrace(lambda k: (-1) ** k), FourierTrace([1])]
    for fourier in families:
        state = FiniteTypeState(AXB, 3, fourier, 10_000)
        for n in range(1, 7):
            for d in range(n):
                for k in range(-12, 13):
                    c = d + k
                    if c < 0:
                        continue
                    v = state.evaluate((c, n), (d, n))
                    want = axb_state_direct(3, fourier, (c, n), (d, n))
                    assert abs(v.value - want) <= 1e-8 + v.tail_bound
    value, tail = phi_finite_type(AXB, 3, families[0], (2, 2), (0, 2), 10_000)
    assert abs(value - axb_state_direct(3, families[0], (2, 2), (0, 2))) <= 1e-8 + tail


@pytest.mark.criterion(6, "uniqueness verdicts")
def test_uniqueness_axb():
    start = time.perf_counter()
    rep = uniqueness_verdict(AXB, 1, depth=10, ladder_height=8)
    assert rep.verdict == "unique"
    assert len(rep.pairs) == 55 and all(abs(p.a[0] - p.b[0]) <= 10 for p in rep.pairs)
    assert all(p.gap <= 1e-9 for p in rep.pairs)
    rep = uniqueness_verdict(AXB, 3, depth=10, ladder_height=8)
    assert rep.verdict == "not unique" and rep.witness.gap >= 0.05
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(6, "uniqueness verdicts")
def test_uniqueness_lamplighter():
    start = time.perf_counter()
    pairs = [((b ^ d, 0, 0), (b, 0, 0)) for b in (0, 1, 3) for d in range(1, 32)]
    ladder = default_ladder(LAMP, 6)
    assert len(ladder.rungs) == 6
    rep = uniqueness_verdict(LAMP, 1, pairs=pairs, ladder_height=6)
    assert rep.verdict == "unique"
    for p in rep.pairs:
        assert p.rungs[-1].mu_fix == 0 and isinstance(p.rungs[-1].mu_fix, Fraction)
        assert p.rungs[-1].mu_triv == 0
    assert time.perf_counter() - start < 60


@pytest.mark.criterion(7, "sandwich inequality")
def test_sandwich():
    rng = random.Random(7)
    pairs = []
    while len(pairs) < 50:
        n = rng.choice([1, 2, 3, 4, 6])
        m = rng.choice([n, n, n, 2 * n])
        pairs.append(((rng.randrange(4 * n), n), (rng.randrange(4 * m), m)))
    extremes = [extreme_values(AXB, 3, a, b) for a, b in pairs]
    zs = [1, -1, 1j, cmath.exp(0.7j), cmath.exp(2j * math.pi / 5)]
    for z in zs:
        state = FiniteTypeState(AXB, 3, CharacterTrace(z), 10_000)
        for (a, b), ev in zip(pairs, extremes):
            assert abs(state(a, b) - ev.triv) <= ev.fix - ev.triv + 1e-8


@pytest.mark.criterion(8, "boundary factorization")
def test_boundary():
    for n in range(2, 7):
        F = [(c, n) for c in range(n)]
        r1 = boundary_factor_check(AXB, 1, F)
        assert r1 == 0 and isinstance(r1, Fraction)
        r2 = boundary_factor_check(AXB, 2, F)
        assert r2 == 1 - n * Fraction(1, n * n) and r2 > 0


@pytest.mark.criterion(9, "negative admissibility for a weight-1 letter")
def test_negative_admissibility():
    scale = make_scale(FreeMonoid(2), {"a": 1, "b": 2})
    v = scale.check_admissibility(2)
    assert not v
    s, t = v.witness
    assert scale.monoid.render(s) == "b" and scale.monoid.render(t) == "a"
    assert scale.monoid.right_lcm(s, t) is None


@pytest.mark.criterion(10, "property suites: fixed seed, >= 500 cases, < 5 min")
def test_property_suites():
    profile = settings.get_profile("laws")
    assert profile.max_examples >= 500 and profile.derandomize
    tests = Path(__file__).resolve().parent
    files = sorted(str(p) for p in tests.glob("test_*.py") if p.name != "test_acceptance.py")
    start = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *files],
        capture_output=True,
        text=True,
        cwd=tests.parent,
    )
    elapsed = time.perf_counter() - start
    assert proc.returncode == 0, proc.stdout[-3000:]
    assert elapsed < 300
