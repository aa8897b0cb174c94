import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from rigidlab.cf_arith import (
    Irrational,
    NormInterval,
    bohr_enumerate,
    circle_norm,
    convergents,
    enclose_alpha,
    fold_scaled,
    min_norm_up_to,
    parse_alpha,
    return_times,
)
from rigidlab.errors import PrecisionExhausted


def test_convergents_golden_fibonacci(golden):
    assert [c.q for c in convergents(golden, 5)] == [1, 1, 2, 3, 5]


def test_convergents_sqrt2(sqrt2):
    assert [c.q for c in convergents(sqrt2, 4)] == [1, 2, 5, 12]


def test_convergents_finite_too_short():
    with pytest.raises(PrecisionExhausted):
        convergents(Irrational.finite([0, 1, 2]), 5)


@pytest.mark.parametrize("label", ["golden", "sqrt2", "e"])
def test_determinant_identity(label):
    alpha = parse_alpha(label)
    cs = convergents(alpha, 60)
    for n in range(len(cs) - 1):
        assert cs[n + 1].p * cs[n].q - cs[n].p * cs[n + 1].q == (-1) ** n
    assert all(cs[n].q < cs[n + 1].q for n in range(1, len(cs) - 1))


def test_e_quotient_pattern():
    e = Irrational.e()
    assert [e.quotient(n) for n in range(10)] == [0, 1, 2, 1, 1, 4, 1, 1, 6, 1]


def test_enclose_alpha_examples(golden):
    assert enclose_alpha(golden, Fraction(1, 10)) == (Fraction(3, 5), Fraction(2, 3))
    lo, hi = enclose_alpha(golden, Fraction(1, 100))
    assert hi - lo <= Fraction(1, 100)
    assert oracles.to_mpf(lo) < oracles.value("golden") < oracles.to_mpf(hi)
    lo, hi = enclose_alpha(golden, 1)
    assert lo < hi


def test_enclose_alpha_finite_exhausts():
    with pytest.raises(PrecisionExhausted):
        enclose_alpha(Irrational.finite([0, 1]), Fraction(1, 10**6))


def test_circle_norm_examples(golden):
    assert circle_norm(golden, 0, 1) == NormInterval(Fraction(0), Fraction(0))
    for k, approx in [(1, 0.3819660), (8, 0.0557280), (13, 0.0344418)]:
        iv = circle_norm(golden, k, Fraction(1, 10**6))
        assert iv.width <= Fraction(1, 10**6)
        true = oracles.norm_k("golden", k)
        assert oracles.to_mpf(iv.lower) <= true <= oracles.to_mpf(iv.upper)
        assert abs(float(true) - approx) < 1e-7


def test_fold_scaled_half_straddle():
    bits = 4  # M = 16, half = 8
    assert fold_scaled(7, 9, bits) == (7, 8)
    assert fold_scaled(15, 17, bits) == (0, 1)
    assert fold_scaled(-1, 1, bits) == (0, 1)


@pytest.mark.parametrize("label", ["golden", "sqrt2", "e"])
@settings(max_examples=60, deadline=None)
@given(k=st.integers(-10**6, 10**6), tol_exp=st.integers(1, 60))
def test_circle_norm_contains_oracle(label, k, tol_exp):
    alpha = parse_alpha(label)
    tol = Fraction(1, 2 ** tol_exp)
    iv = circle_norm(alpha, k, tol)
    assert iv.width <= tol
    true = oracles.norm_k(label, k)
    assert oracles.to_mpf(iv.lower) <= true <= oracles.to_mpf(iv.upper)


@settings(max_examples=100, deadline=None)
@given(k1=st.integers(1, 10**6), k2=st.integers(1, 10**6))
def test_subadditivity(k1, k2):
    alpha = Irrational.golden()
    tol = Fraction(1, 10**12)
    a, b, c = (circle_norm(alpha, k, tol) for k in (k1 + k2, k1, k2))
    assert a.upper <= b.upper + c.upper + a.width + b.width + c.width


@settings(max_examples=100, deadline=None)
@given(k=st.integers(1, 10**5), m=st.integers(1, 1000))
def test_integer_multiple_bound(k, m):
    alpha = Irrational.sqrt2()
    tol = Fraction(1, 10**15)
    assert circle_norm(alpha, m * k, tol).upper <= m * circle_norm(alpha, k, tol).upper + tol


def test_min_norm_examples(golden, sqrt2):
    k, iv = min_norm_up_to(golden, 10, Fraction(1, 10**9))
    assert k == 8 and abs(float(iv.lower) - 0.05573) < 1e-5
    k, iv = min_norm_up_to(golden, 1, Fraction(1, 10**9))
    assert k == 1 and abs(float(iv.lower) - 0.38197) < 1e-5
    k, iv = min_norm_up_to(sqrt2, 100, Fraction(1, 10**9))
    assert k == 70
    assert oracles.brute_min_norm("sqrt2", 100)[0] == 70
    assert abs(float(iv.lower) - 0.00505) < 1e-5


@pytest.mark.parametrize("label", ["golden", "sqrt2", "e"])
def test_min_norm_matches_brute_force_small(label):
    alpha = parse_alpha(label)
    best_k, best = None, None
    a = oracles.value(label)
    for K in range(1, 400):
        v = oracles.norm(K * a)
        if best is None or v < best:
            best_k, best = K, v
        assert min_norm_up_to(alpha, K, Fraction(1, 10**20))[0] == best_k


def test_bohr_examples(golden):
    assert bohr_enumerate(golden, Fraction(1, 10), 0, 40) == [0, 5, 8, 13, 21, 26, 29, 34]
    assert bohr_enumerate(golden, Fraction(4, 10), 0, 5) == oracles.brute_bohr("golden", Fraction(4, 10), 0, 5)
    assert bohr_enumerate(golden, Fraction(1, 10), 7, 7) == []


@pytest.mark.parametrize("label", ["golden", "sqrt2", "e"])
@pytest.mark.parametrize("eps", [Fraction(4, 10), Fraction(1, 10), Fraction(1, 100), Fraction(1, 7)])
def test_bohr_stepping_matches_scan(label, eps):
    alpha = parse_alpha(label)
    rng = random.Random(f"{label}-{eps}")
    for _ in range(3):
        A = rng.randrange(0, 3000)
        B = A + rng.randrange(1, 3000)
        stepped = bohr_enumerate(alpha, eps, A, B, brute_threshold=0)
        assert stepped == oracles.brute_bohr(label, eps, A, B)


@pytest.mark.parametrize("label", ["golden", "sqrt2", "e"])
@pytest.mark.parametrize("length", [Fraction(1, 3), Fraction(1, 50), Fraction(2, 1000), Fraction(9, 10)])
def test_return_times_brute(label, length):
    alpha = parse_alpha(label)
    a = oracles.value(label)
    t1, t2 = return_times(alpha, length)
    L = oracles.to_mpf(length)
    n1 = next(n for n in range(1, 10**5) if oracles.frac(n * a) < L)
    n2 = next(n for n in range(1, 10**5) if oracles.frac(n * a) > 1 - L)
    assert (t1, t2) == (n1, n2)


def test_bohr_rejects_bad_eps(golden):
    with pytest.raises(ValueError):
        bohr_enumerate(golden, Fraction(1, 2), 0, 10)


def test_parse_alpha_grammar():
    assert parse_alpha("golden").quotient(5) == 1
    assert parse_alpha("sqrt2").quotient(3) == 2
    a = parse_alpha("percf:1;2,3|4,5")
    assert [a.quotient(n) for n in range(8)] == [1, 2, 3, 4, 5, 4, 5, 4]
    b = parse_alpha("cf:0,1,1")
    assert b.length == 3
    with pytest.raises(ValueError):
        parse_alpha("pi")


def test_periodic_matches_builtin():
    p = parse_alpha("percf:0;|1")
    g = Irrational.golden()
    for k in (1, 7, 1000, 123456):
        assert circle_norm(p, k, Fraction(1, 10**9)) == circle_norm(g, k, Fraction(1, 10**9))
