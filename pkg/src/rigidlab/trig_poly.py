"""Trigonometric polynomials for the two-torus counting argument.

Two test functions drive the argument: a bump ``phi_eps`` that exceeds 1 near
0 on the circle and is non-negative, and a zero-mean ``varphi_l`` that exceeds
1 off an arc of length 1/l and is bounded by l**2.  Both are built from
Fejer-smoothed indicators so their Fourier coefficients have closed forms.

A ``TrigPoly`` *is* its stored double-precision coefficients; certificates
are statements about that exact polynomial.  ``coef_err`` records how far the
stored coefficients are from the ideal recipe, for the few facts (such as
non-negativity of the recipe) that are proved analytically.

Inequalities are certified on uniform grids with the Bernstein inequality
``max|P'| <= 2*pi*D*max|P - c_0|``.  Grid values come from an FFT whose
rounding error is bounded by the standard ``O(log G * u)`` relative estimate
with a generous constant.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from .cf_arith import (
    Irrational,
    RationalLike,
    as_fraction,
    bits_for_tolerance,
    bohr_enumerate,
    decide_less,
    fold_scaled,
    return_times,
)
from .errors import CertificationFailed, PrecisionExhausted

U = 2.0 ** -53
FFT_SAFETY = 10.0
MAX_DEGREE = 1 << 14
MAX_GRID = 1 << 22
PHI_MARGIN = Fraction(1, 10)


@dataclass
class TrigPoly:
    """Real trigonometric polynomial ``sum_{|k|<=D} c_k e(kx)``.

    Only ``c_0..c_D`` are stored; ``c_{-k}`` is the conjugate of ``c_k``, so
    real-valuedness holds by construction.
    """

    coeffs: np.ndarray
    tag: str = "poly"
    coef_err: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).copy()
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a non-empty vector")
        c[0] = complex(c[0].real, 0.0)
        self.coeffs = c

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def full(self) -> tuple[np.ndarray, np.ndarray]:
        """Frequencies ``-D..D`` and the matching coefficients."""
        D = self.degree
        ks = np.arange(-D, D + 1)
        c = np.concatenate([np.conj(self.coeffs[:0:-1]), self.coeffs])
        return ks, c

    def abs_sum(self, include_zero: bool = True) -> float:
        s = 2.0 * float(np.sum(np.abs(self.coeffs[1:])))
        if include_zero:
            s += abs(float(self.coeffs[0].real))
        return s * (1 + 4 * U * (len(self.coeffs) + 2))

    def point_err(self) -> float:
        """Rounding bound for evaluating at one point by direct summation."""
        return 8 * U * (self.degree + 4) * self.abs_sum()

    def __call__(self, x) -> np.ndarray:
        return self.eval(x)

    def eval(self, x) -> np.ndarray:
        """Direct evaluation at float points (real part; see ``point_err``)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        ks = np.arange(1, self.degree + 1)
        out = np.empty(x.shape)
        for i in range(0, len(x), 4096):
            xs = x[i:i + 4096]
            ph = np.exp(2j * np.pi * np.outer(xs, ks))
            out[i:i + 4096] = self.coeffs[0].real + 2.0 * (ph @ self.coeffs[1:]).real
        return out

    def eval_rational(self, nums: np.ndarray, den: int) -> np.ndarray:
        """Values at the exact points ``nums/den`` (integer phases)."""
        D = self.degree
        if D * den >= 1 << 62:
            raise ValueError("denominator too large for exact integer phases")
        nums = np.asarray(nums, dtype=np.int64) % den
        out = np.empty(len(nums))
        ks = np.arange(1, D + 1, dtype=np.int64)
        table = np.exp(2j * np.pi * np.arange(den) / den) if den <= 1 << 20 else None
        for i in range(0, len(nums), 2048):
            ph = np.outer(nums[i:i + 2048], ks) % den
            e = table[ph] if table is not None else np.exp(2j * np.pi * (ph / den))
            out[i:i + 2048] = self.coeffs[0].real + 2.0 * (e @ self.coeffs[1:]).real
        return out

    def grid(self, G: int) -> tuple[np.ndarray, float]:
        """Values at ``j/G`` for j < G via one inverse FFT, plus an error bound."""
        if G < 2 * self.degree + 2 or G & (G - 1):
            raise ValueError("grid size must be a power of two above twice the degree")
        half = np.zeros(G // 2 + 1, dtype=np.complex128)
        half[: self.degree + 1] = self.coeffs
        vals = np.fft.irfft(half, n=G) * G
        l2 = math.sqrt(abs(self.coeffs[0].real) ** 2 + 2 * float(np.sum(np.abs(self.coeffs[1:]) ** 2)))
        err = FFT_SAFETY * (math.log2(G) + 1) * U * math.sqrt(G) * l2 + 4 * U * self.abs_sum()
        return vals, err

    def to_dict(self) -> dict:
        ks, c = self.full()
        return {
            "tag": self.tag,
            "degree": self.degree,
            "coeffs": [[int(k), repr(float(z.real)), repr(float(z.imag))] for k, z in zip(ks, c)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        D = int(d["degree"])
        c = np.zeros(D + 1, dtype=np.complex128)
        for k, re, im in d["coeffs"]:
            if int(k) >= 0:
                c[int(k)] = complex(float(re), float(im))
        return cls(c, tag=d.get("tag", "poly"))


@dataclass
class BoundCertificate:
    """A certified lower bound (``kind='min'``) or upper bound (``'max_abs'``)."""

    region: str
    kind: str
    bound: float
    target: float
    passed: bool
    grid_step: float = 0.0
    grid_value: float = 0.0
    derivative_bound: float = 0.0
    eval_err: float = 0.0
    method: str = "bernstein-grid"

    @property
    def margin(self) -> float:
        return self.bound - self.target if self.kind == "min" else self.target - self.bound

    def to_dict(self) -> dict:
        d = asdict(self)
        d["margin"] = self.margin
        return d


# -- building blocks ---------------------------------------------------------------

def fejer(M: int) -> TrigPoly:
    """Fejer kernel of order M: coefficients ``1 - |k|/(M+1)``."""
    if M < 1:
        raise ValueError("M must be positive")
    k = np.arange(M + 1)
    return TrigPoly((M + 1 - k) / (M + 1), tag="fejer")


def _e_mp(t: Fraction):
    t = t - math.floor(t)
    return mpmath.expjpi(2 * mpmath.mpf(t.numerator) / t.denominator)


def _indicator_mp(a: Fraction, b: Fraction, M: int) -> list:
    """Exact-recipe coefficients (mpmath) of the Fejer-smoothed indicator."""
    w = b - a
    out = [mpmath.mpf(w.numerator) / w.denominator]
    for k in range(1, M + 1):
        c = (_e_mp(-k * a) - _e_mp(-k * b)) / (2j * mpmath.pi * k)
        out.append(c * mpmath.mpf(M + 1 - k) / (M + 1))
    return out


def _round_poly(cs: list, tag: str) -> TrigPoly:
    c = np.array([complex(z) for z in cs], dtype=np.complex128)
    err = abs(cs[0] - mpmath.mpf(c[0].real))
    for z, f in zip(cs[1:], c[1:]):
        err += 2 * abs(z - mpmath.mpc(f.real, f.imag))
    return TrigPoly(c, tag=tag, coef_err=float(err) * (1 + 1e-9) + 2.0 ** -200)


def smoothed_indicator(interval: Sequence[RationalLike], M: int) -> TrigPoly:
    """Fejer_M convolved with the indicator of the arc ``[a, b]``."""
    a, b = (as_fraction(v) for v in interval)
    if not 0 < b - a < 1:
        raise ValueError("need 0 < b - a < 1")
    if M < 1:
        raise ValueError("M must be positive")
    with mpmath.workprec(96):
        return _round_poly(_indicator_mp(a, b, M), "smoothed_indicator")


# -- certification -------------------------------------------------------------------

def _arc_indices(lo: Fraction, hi: Fraction, G: int) -> np.ndarray:
    """Grid indices within half a step of the arc ``[lo, hi]``."""
    j0 = math.ceil((lo - Fraction(1, 2 * G)) * G)
    j1 = math.floor((hi + Fraction(1, 2 * G)) * G)
    if j1 - j0 + 1 >= G:
        return np.arange(G)
    return np.arange(j0, j1 + 1) % G


def _deriv_bound(poly: TrigPoly, vals: np.ndarray, err: float, G: int) -> float:
    """Bound on ``max|P'|`` via Bernstein on ``P - c_0``."""
    D = poly.degree
    qmax = poly.abs_sum(include_zero=False)
    s = math.pi * D / G
    if s < 0.5:
        grid_q = float(np.max(np.abs(vals - poly.coeffs[0].real))) + err
        qmax = min(qmax, grid_q / (1 - s) * (1 + 1e-12))
    return 2 * math.pi * D * qmax


def certify(poly: TrigPoly, kind: str, arc: Optional[tuple] = None, target: float = 0.0,
            G: Optional[int] = None, region: str = "") -> BoundCertificate:
    """Certify ``min_arc P > target`` or ``max_circle |P| < target`` on one grid."""
    D = poly.degree
    if G is None:
        G = 1 << max(10, (16 * (D + 1)).bit_length())
    vals, err = poly.grid(G)
    deriv = _deriv_bound(poly, vals, err, G)
    corr = deriv / (2 * G) * (1 + 1e-12)
    if kind == "min":
        lo, hi = arc
        idx = _arc_indices(as_fraction(lo), as_fraction(hi), G)
        gv = float(np.min(vals[idx]))
        bound = gv - err - corr
        bound -= abs(bound) * 4 * U
        passed = bound > target
    elif kind == "max_abs":
        gv = float(np.max(np.abs(vals)))
        bound = gv + err + corr
        bound += abs(bound) * 4 * U
        passed = bound < target
    else:
        raise ValueError(kind)
    return BoundCertificate(region or str(arc), kind, bound, target, passed,
                            1.0 / G, gv, deriv, err)


def certify_refined(poly: TrigPoly, kind: str, arc=None, target: float = 0.0,
                    region: str = "", max_grid: int = MAX_GRID) -> BoundCertificate:
    """Refine the grid until the certificate passes or cannot improve."""
    G = 1 << max(10, (16 * (poly.degree + 1)).bit_length())
    while True:
        cert = certify(poly, kind, arc, target, G, region)
        hopeless = (cert.grid_value <= target) if kind == "min" else (cert.grid_value >= target)
        if cert.passed or hopeless or G >= max_grid:
            return cert
        G *= 2


# -- the two test functions ------------------------------------------------------------

@dataclass
class BuiltPoly:
    poly: TrigPoly
    degree: int
    certificates: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.certificates)


def build_phi_eps(eps: RationalLike, *, max_degree: int = MAX_DEGREE) -> BuiltPoly:
    """``(1 + 1/10) * 2 * smoothed_indicator([-2 eps, 2 eps], M)``, M minimal power of two.

    Certified: minimum over ``[-eps, eps]`` exceeds 1.  The recipe is a
    non-negative kernel against a 0/1 function, so the ideal polynomial is
    >= 0; the stored one is >= ``-coef_err``, which must beat ``-eps**3``.
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 4):
        raise ValueError("eps must lie in (0, 1/4) so that the support arc is proper")
    scale = (1 + PHI_MARGIN) * 2
    M = 1
    while M <= max_degree:
        with mpmath.workprec(96):
            cs = [z * mpmath.mpf(scale.numerator) / scale.denominator
                  for z in _indicator_mp(-2 * eps, 2 * eps, M)]
            poly = _round_poly(cs, "phi_eps")
        cert = certify_refined(poly, "min", (-eps, eps), 1.0, f"[-{eps}, {eps}]")
        if cert.passed:
            floor = BoundCertificate("circle", "min", -poly.coef_err, -float(eps) ** 3,
                                     -poly.coef_err > -float(eps) ** 3, method="analytic")
            return BuiltPoly(poly, M, [cert, floor])
        M *= 2
    raise CertificationFailed(f"phi_eps({eps}) not certified up to degree {max_degree}")


def build_varphi_l(l: int, *, max_degree: int = MAX_DEGREE) -> BuiltPoly:
    """``2l * ((1/l - 2 delta) - smoothed_indicator([delta, 1/l - delta], M))``, delta = 1/(8l).

    c_0 is exactly zero.  Certified: minimum over ``[1/l, 1]`` exceeds 1 and
    ``max |varphi_l| < l**2``.
    """
    if l < 2:
        raise ValueError("l must be at least 2")
    delta = Fraction(1, 8 * l)
    a = 2 * l
    M = 1
    while M <= max_degree:
        with mpmath.workprec(96):
            g = _indicator_mp(delta, Fraction(1, l) - delta, M)
            cs = [mpmath.mpf(0)] + [-a * z for z in g[1:]]
            poly = _round_poly(cs, "varphi_l")
        c1 = certify_refined(poly, "min", (Fraction(1, l), Fraction(1)), 1.0, f"[1/{l}, 1]")
        if c1.passed:
            c2 = certify_refined(poly, "max_abs", None, float(l * l), "circle")
            if c2.passed:
                return BuiltPoly(poly, M, [c1, c2])
        M *= 2
    raise CertificationFailed(f"varphi_l({l}) not certified up to degree {max_degree}")


# -- Birkhoff sums on the two-torus ---------------------------------------------------------

@dataclass
class BirkhoffSum:
    value: float
    err: float
    resonant_terms: int = 0

    def __float__(self):
        return self.value


def rational_proxy(alpha: Irrational, max_den: int) -> Fraction:
    """Largest-denominator convergent of alpha with ``q <= max_den``."""
    n = 0
    while alpha.denominator(n + 1) <= max_den:
        n += 1
    c = alpha.convergent(n)
    return Fraction(c.p, c.q)


def _rat(v, max_den: int = 1 << 20) -> Fraction:
    if isinstance(v, Irrational):
        return rational_proxy(v, max_den)
    return as_fraction(v)


def _orbit_chunks(phi: TrigPoly, varphi: TrigPoly, y0, alpha_val, theta, N: int, start, chunk: int):
    """Yield term arrays ``phi(x_i) * varphi(y_i - y0)`` in order."""
    al, th = _rat(alpha_val), _rat(theta)
    x0, w0 = _rat(start[0]), _rat(start[1]) - _rat(y0)
    Dx = math.lcm(al.denominator, x0.denominator)
    Dy = math.lcm(th.denominator, w0.denominator)
    if N * max(Dx, Dy) >= 1 << 62:
        raise ValueError("N times denominator too large for exact integer phases")
    ax, xs = al.numerator * (Dx // al.denominator) % Dx, x0.numerator * (Dx // x0.denominator) % Dx
    ty, ws = th.numerator * (Dy // th.denominator) % Dy, w0.numerator * (Dy // w0.denominator) % Dy
    for i0 in range(0, N, chunk):
        i = np.arange(i0, min(N, i0 + chunk), dtype=np.int64)
        u = phi.eval_rational((xs + i * ax) % Dx, Dx)
        v = varphi.eval_rational((ws + i * ty) % Dy, Dy)
        yield u * v


def _direct_err(phi: TrigPoly, varphi: TrigPoly, N: int, total: float) -> float:
    A, B = phi.abs_sum(), varphi.abs_sum()
    return N * (phi.point_err() * B + varphi.point_err() * A + 4 * U * A * B) + 4 * U * abs(total)


def birkhoff_direct(phi: TrigPoly, varphi: TrigPoly, y0, alpha_val, theta, N: int,
                    start=(0, 0), *, chunk: int = 1 << 14) -> BirkhoffSum:
    """``sum_{i<N} phi(x + i alpha) * varphi(y + i theta - y0)`` term by term.

    Rotation numbers and points must be rational (Irrational inputs are
    replaced by a convergent); orbit phases are then exact integers.
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if N == 0:
        return BirkhoffSum(0.0, 0.0)
    parts = [float(np.sum(t)) for t in _orbit_chunks(phi, varphi, y0, alpha_val, theta, N, start, chunk)]
    total = math.fsum(parts)
    return BirkhoffSum(total, _direct_err(phi, varphi, N, total))


def birkhoff_prefix_max(phi: TrigPoly, varphi: TrigPoly, y0, alpha_val, theta, N: int,
                        start=(0, 0), *, chunk: int = 1 << 14) -> BirkhoffSum:
    """``max_{n <= N} |S_n|`` along the same orbit, with a rounding bound."""
    best, run = 0.0, 0.0
    for t in _orbit_chunks(phi, varphi, y0, alpha_val, theta, N, start, chunk):
        c = run + np.cumsum(t)
        best = max(best, float(np.max(np.abs(c))))
        run = float(c[-1])
    # sequential cumsum: each partial sum carries at most n*u times the sum of |terms|
    growth = 2 * U * N * N * phi.abs_sum() * varphi.abs_sum()
    return BirkhoffSum(best, _direct_err(phi, varphi, N, best) + growth)


def _sin_e(num: np.ndarray, den: int) -> np.ndarray:
    """``sin(pi t) * e(t/2)`` at ``t = num/den``, with t reduced to (-1/2, 1/2]."""
    r = num % den
    r = np.where(2 * r > den, r - den, r)
    t = r / den
    return np.sin(np.pi * t) * np.exp(1j * np.pi * t)


def birkhoff_fourier(phi: TrigPoly, varphi: TrigPoly, y0, alpha_val, theta, N: int,
                     start=(0, 0)) -> BirkhoffSum:
    """The same sum via ``sum_{k,j} c_k d_j e(k x + j w) G_N(k alpha + j theta)``.

    ``G_N(t) = sin(pi N t) e(Nt/2) / (sin(pi t) e(t/2))`` when t is not an
    integer and N otherwise; both sines are taken at exactly reduced
    arguments, so each factor carries relative error O(u).
    """
    if N < 0:
        raise ValueError("N must be non-negative")
    if N == 0:
        return BirkhoffSum(0.0, 0.0)
    al, th = _rat(alpha_val), _rat(theta)
    x0, w0 = _rat(start[0]), _rat(start[1]) - _rat(y0)
    kk, ck = phi.full()
    jj, dj = varphi.full()
    Dt = math.lcm(al.denominator, th.denominator)
    Dp = math.lcm(x0.denominator, w0.denominator)
    top = max(kk.max(initial=0), jj.max(initial=0)) + 1
    if Dt * top * 4 >= 1 << 62 or N * Dt >= 1 << 62 or Dp * top * 4 >= 1 << 62:
        raise ValueError("denominators too large for exact integer phases")
    a_n = al.numerator * (Dt // al.denominator) % Dt
    t_n = th.numerator * (Dt // th.denominator) % Dt
    x_n = x0.numerator * (Dp // x0.denominator) % Dp
    w_n = w0.numerator * (Dp // w0.denominator) % Dp
    K = kk.astype(np.int64)[:, None]
    J = jj.astype(np.int64)[None, :]
    t = (K * a_n + J * t_n) % Dt
    res = t == 0
    Nt = ((N % Dt) * t) % Dt
    with np.errstate(invalid="ignore", divide="ignore"):
        geo = np.where(res, complex(N), _sin_e(Nt, Dt) / np.where(res, 1.0, _sin_e(t, Dt)))
    phase = np.exp(2j * np.pi * (((K * x_n + J * w_n) % Dp) / Dp))
    terms = (ck[:, None] * dj[None, :]) * phase * geo
    total = complex(np.sum(terms))
    mag = float(np.sum(np.abs(terms)))
    err = 32 * U * mag + 4 * U * (len(kk) * len(jj)) * mag
    return BirkhoffSum(total.real, err, int(np.count_nonzero(res & (ck[:, None] * dj[None, :] != 0))))


def resonance_bound(phi: TrigPoly, varphi: TrigPoly, nu: RationalLike) -> float:
    """``sum_{|k|<=K, 0<|j|<=L} |c_k||d_j| / (2 nu)``, rounded upward."""
    nu = as_fraction(nu)
    if nu <= 0:
        raise ValueError("nu must be positive")
    s = phi.abs_sum() * varphi.abs_sum(include_zero=False)
    return s / float(nu) * 0.5 * (1 + 1e-12)


# -- effective constants ------------------------------------------------------------------------

@dataclass
class NprimeResult:
    """N' together with the quantities that justify it."""

    Nprime: int
    N: int
    count_lower: int
    gap: int
    B: float
    K: int
    L: int

    def __int__(self):
        return self.Nprime


def effective_Nprime(l: int, eps: RationalLike, nu: RationalLike, N: int, alpha: Irrational,
                     *, phi: Optional[BuiltPoly] = None, varphi: Optional[BuiltPoly] = None) -> NprimeResult:
    """Smallest N' > N with (a) a certified Bohr count above ``eps**2 N'`` and (b) ``B < eps**2 N'/2``.

    The count in ``[N, N')`` of ``||i alpha|| < eps`` is bounded below by
    ``floor((N' - N)/T)`` where ``T = t1 + t2`` is the largest three-gap
    return time to an arc of length ``2 eps``.  Both conditions are solved in
    closed form, so astronomically large N' cost nothing.
    """
    eps, nu = as_fraction(eps), as_fraction(nu)
    if eps > Fraction(1, 2 * l * l):
        raise ValueError("precondition eps <= 1/(2 l^2) violated")
    if nu <= 0:
        raise ValueError("nu must be positive")
    phi = phi or build_phi_eps(eps)
    varphi = varphi or build_varphi_l(l)
    B = resonance_bound(phi.poly, varphi.poly, nu)
    t1, t2 = return_times(alpha, 2 * eps)
    T = t1 + t2
    e2 = eps * eps
    if Fraction(1, T) <= e2:
        raise CertificationFailed("three-gap density bound too weak for this eps")
    # (b): N' > 2B / eps^2, with B rounded up to a rational
    Bq = Fraction(B).limit_denominator(1 << 30) + Fraction(1, 1 << 30)
    nb = max(N + 1, math.floor(2 * Bq / e2) + 1)

    def ok(Np):
        return (Np - N) // T > e2 * Np

    c = (nb - N) // T
    if ok(nb):
        Np = nb
    else:
        # least c with N + cT < c/eps^2
        cmin = math.floor(Fraction(N) / (1 / e2 - T)) + 1
        c = max(c + 1, cmin)
        Np = N + c * T
        assert ok(Np)
    return NprimeResult(Np, N, (Np - N) // T, T, B, phi.degree, varphi.degree)


# -- the set A and resonances -------------------------------------------------------------------

def _frac_in(theta, m: int, lo: Fraction, hi: Fraction) -> bool:
    """Certified ``{m theta} in [lo, hi]``."""
    exact = getattr(theta, "value", None)
    if isinstance(exact, Fraction):
        f = m * exact
        f -= math.floor(f)
        return lo <= f <= hi
    cap = getattr(theta, "precision_cap", 1 << 15)
    bits = 64
    while bits <= cap:
        a, b = theta.frac_scaled(m, bits)
        M = 1 << bits
        if b < M:
            if lo * M <= a and b <= hi * M:
                return True
            if b < lo * M or a > hi * M:
                return False
        bits *= 2
    raise PrecisionExhausted(f"cannot place {{{m}*theta}} against [{lo}, {hi}]")


def scan_A_membership(theta, N1: int, N2: int, interval: Sequence[RationalLike],
                      eps: RationalLike, alpha: Irrational) -> tuple[bool, Optional[int]]:
    """Is ``{m theta}`` outside I for every Bohr point m in ``[N1, N2)``?

    Returns ``(True, None)`` or ``(False, m)`` with the first offending m.
    """
    lo, hi = (as_fraction(v) for v in interval)
    for m in bohr_enumerate(alpha, eps, N1, N2):
        if _frac_in(theta, m, lo, hi):
            return False, m
    return True, None


def _combo_norm_scaled(alpha, theta, k: int, s: int, bits: int) -> tuple[int, int]:
    a_lo, a_hi = alpha.frac_scaled(k, bits)
    t_lo, t_hi = theta.frac_scaled(s, bits)
    return fold_scaled(a_lo - t_hi, a_hi - t_lo, bits)


def resonance_witness(theta, K: int, L: int, nu: RationalLike,
                      alpha: Irrational) -> Optional[tuple[int, int]]:
    """First ``(k, s)`` with ``|k| <= K``, ``0 < s <= L`` and ``||k alpha - s theta|| < nu``.

    Signed k with positive s covers every sign pattern.  Search order: s
    ascending, then k = 0, 1, -1, 2, -2, ...
    """
    if K < 1 or L < 1:
        raise ValueError("K and L must be positive")
    nu = as_fraction(nu)
    if nu <= 0:
        raise ValueError("nu must be positive")
    cap = min(getattr(alpha, "precision_cap", 1 << 15), getattr(theta, "precision_cap", 1 << 15))
    start = max(16, bits_for_tolerance(nu, 64))
    for s in range(1, L + 1):
        for k in [0] + [v for j in range(1, K + 1) for v in (j, -j)]:
            if decide_less(lambda b: _combo_norm_scaled(alpha, theta, k, s, b), nu, start, cap,
                           what=f"||{k}*alpha - {s}*theta||"):
                return k, s
    return None
