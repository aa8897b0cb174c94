import json
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from rigidlab.cf_arith import AffinePoint, Irrational, RationalPoint, bohr_enumerate
from rigidlab.trig_poly import (
    TrigPoly,
    birkhoff_direct,
    birkhoff_fourier,
    birkhoff_prefix_max,
    build_phi_eps,
    build_varphi_l,
    certify,
    effective_Nprime,
    fejer,
    rational_proxy,
    resonance_bound,
    resonance_witness,
    scan_A_membership,
    smoothed_indicator,
)


@pytest.fixture(scope="module")
def phi8():
    return build_phi_eps(Fraction(1, 8))


@pytest.fixture(scope="module")
def var2():
    return build_varphi_l(2)


def _mp_eval(poly, x):
    ks, c = poly.full()
    return sum(mpmath.mpc(z.real, z.imag) * mpmath.expjpi(2 * int(k) * x) for k, z in zip(ks, c)).real


def test_fejer_examples():
    assert fejer(1).eval(0)[0] == pytest.approx(2.0)
    for M in (1, 4, 17):
        assert fejer(M).eval(0)[0] == pytest.approx(M + 1)
    vals, err = fejer(3).grid(1024)
    assert vals.min() >= -1e-12
    assert fejer(5).coeffs[0] == 1


def test_fejer_rejects_zero():
    with pytest.raises(ValueError):
        fejer(0)


def test_smoothed_indicator_examples():
    g = smoothed_indicator([0, Fraction(1, 2)], 9)
    assert g.coeffs[0] == 0.5
    g = smoothed_indicator([0, Fraction(1, 5)], 64)
    assert g.eval(0.1)[0] >= 0.9
    for a, b in [(Fraction(1, 10), Fraction(3, 10)), (Fraction(-1, 4), Fraction(1, 3))]:
        v = smoothed_indicator([a, b], 16).eval(float((a + b) / 2))[0]
        assert 0 <= v <= 1


def test_smoothed_indicator_against_convolution():
    # independent oracle: integrate the Fejer kernel over the arc
    a, b, M = Fraction(1, 10), Fraction(2, 5), 6
    g = smoothed_indicator([a, b], M)

    def kern(t):
        s = mpmath.sin(mpmath.pi * (M + 1) * t)
        d = mpmath.sin(mpmath.pi * t)
        return (s / d) ** 2 / (M + 1) if abs(d) > 1e-20 else M + 1

    for x in (0.0, 0.25, 0.6, 0.9):
        val = mpmath.quad(lambda t: kern(x - t), [float(a), 0.25, float(b)])
        assert abs(g.eval(x)[0] - float(val)) < 1e-10


def test_smoothed_indicator_rejects_bad_arc():
    with pytest.raises(ValueError):
        smoothed_indicator([0, 1], 4)


def test_real_valued_and_json_roundtrip(var2):
    ks, c = var2.poly.full()
    assert np.allclose(c, np.conj(c[::-1]))
    d = json.loads(var2.poly.to_json())
    assert d["tag"] == "varphi_l" and d["degree"] == var2.degree
    assert len(d["coeffs"]) == 2 * var2.degree + 1
    back = TrigPoly.from_dict(d)
    assert np.array_equal(back.coeffs, var2.poly.coeffs)


@pytest.mark.parametrize("eps", [Fraction(1, 8), Fraction(1, 18), Fraction(1, 32)])
def test_phi_eps_certificates(eps):
    built = build_phi_eps(eps)
    assert built.passed
    window, floor = built.certificates
    assert window.kind == "min" and window.bound > 1
    assert floor.bound > -float(eps) ** 3
    c0 = float(Fraction(11, 10) * 2 * 4 * eps)
    assert abs(built.poly.coeffs[0].real - c0) <= built.poly.coef_err + 1e-15
    # dense independent sampling never undercuts the certified bound
    xs = np.linspace(-float(eps), float(eps), 20001)
    assert built.poly.eval(xs).min() >= window.bound
    vals = built.poly.eval(np.linspace(0, 1, 20001))
    assert vals.min() > -1e-12


@pytest.mark.parametrize("l", [2, 3, 5])
def test_varphi_l_certificates(l):
    built = build_varphi_l(l)
    assert built.passed
    assert built.poly.coeffs[0] == 0
    off, top = built.certificates
    assert off.bound > 1 and top.bound < l * l
    ys = np.linspace(1 / l, 1, 20001)
    assert built.poly.eval(ys).min() >= off.bound
    assert np.abs(built.poly.eval(np.linspace(0, 1, 40001))).max() <= top.bound
    # zero mean, numerically
    vals, _ = built.poly.grid(1 << 12)
    assert abs(vals.mean()) < 1e-12


def test_certificate_refinement_is_stable(var2):
    poly = var2.poly
    arc = (Fraction(1, 2), Fraction(1))
    bounds = []
    for G in (1 << 10, 1 << 12, 1 << 14):
        c = certify(poly, "min", arc, 1.0, G)
        assert c.passed
        bounds.append(c.bound)
    # finer grids shrink the Bernstein correction
    assert bounds[0] <= bounds[2] + 1e-9


def test_certify_catches_false_claim(var2):
    c = certify(var2.poly, "min", (0, Fraction(1, 2)), 1.0)
    assert not c.passed
    c = certify(var2.poly, "max_abs", None, 1.0)
    assert not c.passed


def test_phi_eps_rejects_bad_eps():
    with pytest.raises(ValueError):
        build_phi_eps(Fraction(1, 3))
    with pytest.raises(ValueError):
        build_varphi_l(1)


def test_birkhoff_trivial_cases(phi8, var2):
    g, s2 = Irrational.golden(), Irrational.sqrt2()
    assert birkhoff_direct(phi8.poly, var2.poly, 0, g, s2, 0).value == 0
    assert birkhoff_fourier(phi8.poly, var2.poly, 0, g, s2, 0).value == 0
    y0 = Fraction(1, 7)
    want = phi8.poly.eval(0.0)[0] * var2.poly.eval(-1 / 7)[0]
    assert birkhoff_direct(phi8.poly, var2.poly, y0, g, s2, 1).value == pytest.approx(want, rel=1e-12)
    assert birkhoff_fourier(phi8.poly, var2.poly, y0, g, s2, 1).value == pytest.approx(want, rel=1e-12)
    zero = TrigPoly([0.0])
    assert birkhoff_fourier(zero, zero, 0, g, s2, 50).value == 0


def test_birkhoff_small_against_mpmath(phi8, var2):
    al, th = Fraction(21, 34), Fraction(12, 29)
    y0, x0 = Fraction(1, 3), Fraction(1, 5)
    ref = sum(_mp_eval(phi8.poly, x0 + i * al) * _mp_eval(var2.poly, i * th - y0) for i in range(40))
    d = birkhoff_direct(phi8.poly, var2.poly, y0, al, th, 40, start=(x0, 0))
    f = birkhoff_fourier(phi8.poly, var2.poly, y0, al, th, 40, start=(x0, 0))
    assert abs(d.value - float(ref)) <= d.err + 1e-12
    assert abs(f.value - float(ref)) <= f.err + 1e-12


def test_birkhoff_golden_sqrt2_10k(phi8, var2):
    g, s2 = Irrational.golden(), Irrational.sqrt2()
    d = birkhoff_direct(phi8.poly, var2.poly, 0, g, s2, 10**4)
    f = birkhoff_fourier(phi8.poly, var2.poly, 0, g, s2, 10**4)
    assert abs(d.value - f.value) <= 1e-8 * max(abs(d.value), 1.0)


def test_birkhoff_resonant(phi8, var2):
    a = rational_proxy(Irrational.golden(), 1000)
    d = birkhoff_direct(phi8.poly, var2.poly, Fraction(1, 3), a, a, 10**5)
    f = birkhoff_fourier(phi8.poly, var2.poly, Fraction(1, 3), a, a, 10**5)
    assert f.resonant_terms > 0
    assert abs(d.value - f.value) <= 1e-8 * max(abs(d.value), 1.0)


@settings(max_examples=25, deadline=None)
@given(
    an=st.integers(1, 10**6), ad=st.integers(2, 10**6),
    tn=st.integers(0, 10**6), td=st.integers(1, 10**6),
    N=st.integers(1, 20000), M=st.sampled_from([1, 4, 16, 64]),
)
def test_birkhoff_identity_random(an, ad, tn, td, N, M):
    phi = smoothed_indicator([Fraction(-1, 9), Fraction(1, 9)], M)
    var = build_varphi_l(3).poly
    a, t = Fraction(an, ad), Fraction(tn, td)
    d = birkhoff_direct(phi, var, Fraction(1, 4), a, t, N)
    f = birkhoff_fourier(phi, var, Fraction(1, 4), a, t, N)
    assert abs(d.value - f.value) <= 1e-8 * max(abs(d.value), 1.0)


def test_prefix_max_matches_totals(phi8, var2):
    g, s2 = Irrational.golden(), Irrational.sqrt2()
    m = birkhoff_prefix_max(phi8.poly, var2.poly, 0, g, s2, 300).value
    totals = [abs(birkhoff_direct(phi8.poly, var2.poly, 0, g, s2, n).value) for n in range(301)]
    assert m == pytest.approx(max(totals), rel=1e-12)


def test_resonance_bound_examples(phi8, var2):
    zero = TrigPoly([0.0])
    assert resonance_bound(phi8.poly, zero, Fraction(1, 100)) == 0
    b1 = resonance_bound(phi8.poly, var2.poly, Fraction(1, 100))
    b2 = resonance_bound(phi8.poly, var2.poly, Fraction(2, 100))
    assert b2 == pytest.approx(b1 / 2, rel=1e-12)


def test_resonance_bound_holds_empirically(phi8, var2):
    nu = Fraction(1, 1000)
    B = resonance_bound(phi8.poly, var2.poly, nu)
    a = rational_proxy(Irrational.golden(), 1 << 20)
    rng = random.Random("bound")
    checked = 0
    while checked < 10:
        th = Fraction(rng.randrange(1, 1 << 20), 1 << 20)
        if resonance_witness(RationalPoint(th), phi8.degree, var2.degree, nu, RationalPoint(a)) is not None:
            continue
        m = birkhoff_prefix_max(phi8.poly, var2.poly, 0, a, th, 20000)
        assert m.value <= B
        checked += 1


def test_effective_nprime_example(phi8, var2):
    g = Irrational.golden()
    eps = Fraction(1, 8)
    r = effective_Nprime(2, eps, Fraction(1, 100), 0, g, phi=phi8, varphi=var2)
    assert r.Nprime <= 10**6
    count = len(bohr_enumerate(g, eps, 0, r.Nprime))
    assert count >= r.count_lower > eps * eps * r.Nprime
    assert r.B < eps * eps * r.Nprime / 2
    # minimality: one less fails one of the two conditions
    Np = r.Nprime - 1
    assert not ((Np - r.N) // r.gap > eps * eps * Np and r.B < eps * eps * Np / 2)


def test_effective_nprime_monotone_in_nu(phi8, var2):
    g = Irrational.golden()
    vals = [effective_Nprime(2, Fraction(1, 8), nu, 10, g, phi=phi8, varphi=var2).Nprime
            for nu in (Fraction(1, 1000), Fraction(1, 100), Fraction(1, 10))]
    assert vals[0] >= vals[1] >= vals[2]


def test_effective_nprime_huge_is_closed_form(phi8, var2):
    r = effective_Nprime(2, Fraction(1, 8), Fraction(1, 10**40), 10**30, Irrational.golden(),
                         phi=phi8, varphi=var2)
    assert r.Nprime > 10**40


def test_effective_nprime_precondition():
    with pytest.raises(ValueError):
        effective_Nprime(2, Fraction(1, 4), Fraction(1, 100), 0, Irrational.golden())


def test_scan_A_examples():
    g = Irrational.golden()
    I = (Fraction(2, 5), Fraction(9, 10))
    assert scan_A_membership(g, 7, 7, I, Fraction(1, 10), g) == (True, None)
    assert scan_A_membership(RationalPoint(0), 0, 100, I, Fraction(1, 10), g) == (True, None)
    ok, m = scan_A_membership(g, 0, 40, I, Fraction(1, 10), g)
    a = oracles.value("golden")
    brute = [n for n in [0, 5, 8, 13, 21, 26, 29, 34] if 0.4 <= oracles.frac(n * a) <= 0.9]
    assert ok == (not brute) and m == (brute[0] if brute else None)


def test_scan_A_finds_witness():
    g = Irrational.golden()
    ok, m = scan_A_membership(Irrational.sqrt2(), 0, 2000, (Fraction(0), Fraction(1, 2)), Fraction(1, 10), g)
    assert not ok
    assert oracles.norm_k("golden", m) < 0.1 and oracles.frac(m * oracles.value("sqrt2")) <= 0.5


def test_resonance_witness_examples():
    g = Irrational.golden()
    assert resonance_witness(g, 3, 2, Fraction(1, 10**6), g) == (1, 1)
    assert resonance_witness(AffinePoint(g, 3, -1), 5, 2, Fraction(1, 10**9), g) == (3, 1)
    half = RationalPoint(Fraction(1, 2))
    a = oracles.value("golden")
    # with s = 2 the point 2*theta is 0, so L = 1 keeps the example meaningful
    m = float(min(oracles.norm(k * a - mpmath.mpf(1) / 2) for k in range(-5, 6)))
    assert resonance_witness(half, 5, 1, Fraction(m * 0.999).limit_denominator(10**9), g) is None
    assert resonance_witness(half, 5, 1, Fraction(m * 1.001).limit_denominator(10**9), g) is not None
