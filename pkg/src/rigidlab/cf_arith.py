"""Certified continued-fraction arithmetic for irrational rotation numbers.

An irrational alpha is carried as its stream of partial quotients.  Every
quantity derived from it (``k*alpha``, the circle norm ``||k*alpha||``,
fractional parts) is returned as an enclosure with rational or scaled-integer
endpoints.  Most internal routines work in *scaled* form: a pair of integers
``(lo, hi)`` with ``lo <= 2**bits * value <= hi``, which keeps sums of many
enclosures in plain integer arithmetic.
"""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence, Union

from .errors import PrecisionExhausted

RationalLike = Union[Fraction, int, float, str]

#: Default ceiling on fractional bits used by certified refinement loops.
DEFAULT_PRECISION_CAP = 1 << 15


def as_fraction(value: RationalLike) -> Fraction:
    """Convert user input to an exact rational.

    Floats go through their shortest repr, so ``0.1`` becomes ``1/10``.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


def bits_for_tolerance(tol: Fraction, factor: int = 1) -> int:
    """Smallest ``bits`` with ``factor / 2**bits <= tol``."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    need = -((-factor * tol.denominator) // tol.numerator)  # ceil(factor / tol)
    return max(0, (need - 1).bit_length())


def fold_scaled(lo: int, hi: int, bits: int) -> tuple[int, int]:
    """Enclosure of ``||y||`` from an enclosure ``[lo, hi]`` of ``2**bits * y``.

    Requires ``hi - lo < 2**bits / 2``.  When the input straddles a half
    integer the upper end is 1/2 (hull of both folded images).
    """
    M = 1 << bits
    if hi - lo >= M >> 1:
        raise ValueError("enclosure too wide to fold")
    shift = (lo >> bits) << bits
    lo -= shift
    hi -= shift
    half = M >> 1

    def dist(v):
        v %= M
        return v if v <= half else M - v

    d_lo, d_hi = dist(lo), dist(hi)
    lower = min(d_lo, d_hi)
    upper = max(d_lo, d_hi)
    if lo == 0 or hi >= M:
        lower = 0
    if lo <= half <= hi or lo <= M + half <= hi:
        upper = half
    return lower, upper


@dataclass(frozen=True)
class Convergent:
    index: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


@dataclass(frozen=True)
class NormInterval:
    """Closed rational interval ``[lower, upper]`` inside ``[0, 1/2]``."""

    lower: Fraction
    upper: Fraction

    def __post_init__(self):
        if not (0 <= self.lower <= self.upper <= Fraction(1, 2)):
            raise ValueError(f"invalid norm interval [{self.lower}, {self.upper}]")

    @classmethod
    def from_scaled(cls, lo: int, hi: int, bits: int) -> "NormInterval":
        M = 1 << bits
        return cls(Fraction(lo, M), Fraction(hi, M))

    @property
    def width(self) -> Fraction:
        return self.upper - self.lower

    def __contains__(self, x) -> bool:
        return self.lower <= x <= self.upper

    def as_strs(self) -> list[str]:
        return [str(self.lower), str(self.upper)]


def _golden(n: int) -> int:
    return 0 if n == 0 else 1


def _sqrt2(n: int) -> int:
    return 0 if n == 0 else 2


def _e_minus_2(n: int) -> int:
    # e = [2; 1, 2, 1, 1, 4, 1, 1, 6, ...]
    if n == 0:
        return 0
    return 2 * (n + 1) // 3 if n % 3 == 2 else 1


class Irrational:
    """An irrational number given by its partial quotients ``a_0, a_1, ...``.

    Quotients and convergents are generated on demand and cached; extension of
    the cache is guarded by a lock so instances can be shared across threads.
    A finite quotient list is treated as a prefix of an unknown irrational:
    anything needing quotients past its end raises PrecisionExhausted.
    """

    def __init__(
        self,
        label: str,
        quotient: Optional[Callable[[int], int]] = None,
        finite: Optional[Sequence[int]] = None,
        precision_cap: int = DEFAULT_PRECISION_CAP,
    ):
        if (quotient is None) == (finite is None):
            raise ValueError("give exactly one of quotient or finite")
        self.label = label
        self.precision_cap = precision_cap
        self._quotient = quotient
        self._finite = None if finite is None else [int(a) for a in finite]
        if self._finite is not None:
            if not self._finite:
                raise ValueError("empty quotient list")
            if any(a <= 0 for a in self._finite[1:]):
                raise ValueError("partial quotients a_n (n >= 1) must be positive")
        self._lock = threading.RLock()
        # p_{-1} = 1, q_{-1} = 0 are kept implicit.
        self._a: list[int] = []
        self._p: list[int] = []
        self._q: list[int] = []
        self._prods: list[int] = []  # q_n * q_{n+1}

    # -- constructors -----------------------------------------------------
    @classmethod
    def golden(cls) -> "Irrational":
        return cls("golden", quotient=_golden)

    @classmethod
    def sqrt2(cls) -> "Irrational":
        return cls("sqrt2", quotient=_sqrt2)

    @classmethod
    def e(cls) -> "Irrational":
        return cls("e", quotient=_e_minus_2)

    @classmethod
    def periodic(cls, a0: int, pre: Sequence[int], period: Sequence[int],
                 label: Optional[str] = None) -> "Irrational":
        pre = [int(a) for a in pre]
        period = [int(a) for a in period]
        if not period:
            raise ValueError("period must be non-empty")
        if any(a <= 0 for a in pre + period):
            raise ValueError("partial quotients a_n (n >= 1) must be positive")

        def quotient(n):
            if n == 0:
                return a0
            if n <= len(pre):
                return pre[n - 1]
            return period[(n - 1 - len(pre)) % len(period)]

        if label is None:
            label = f"percf:{a0};{','.join(map(str, pre))}|{','.join(map(str, period))}"
        return cls(label, quotient=quotient)

    @classmethod
    def finite(cls, quotients: Sequence[int], label: Optional[str] = None) -> "Irrational":
        if label is None:
            label = "cf:" + ",".join(str(a) for a in quotients)
        return cls(label, finite=quotients)

    # -- quotient stream ----------------------------------------------------
    @property
    def length(self) -> Optional[int]:
        """Number of known quotients, or None for unbounded streams."""
        return None if self._finite is None else len(self._finite)

    def _ensure(self, n: int) -> None:
        """Make convergents 0..n available."""
        if n < len(self._q):
            return
        with self._lock:
            while len(self._q) <= n:
                i = len(self._q)
                if self._finite is not None:
                    if i >= len(self._finite):
                        raise PrecisionExhausted(
                            f"{self.label}: needs quotient a_{i}, only {len(self._finite)} known")
                    a = self._finite[i]
                else:
                    a = int(self._quotient(i))
                    if i >= 1 and a <= 0:
                        raise ValueError(f"non-positive quotient a_{i}={a}")
                p1, q1 = (self._p[-1], self._q[-1]) if i else (1, 0)
                p2, q2 = (self._p[-2], self._q[-2]) if i >= 2 else ((1, 0) if i == 1 else (0, 1))
                self._a.append(a)
                self._p.append(a * p1 + p2)
                self._q.append(a * q1 + q2)
                if i:
                    self._prods.append(self._q[-2] * self._q[-1])

    def quotient(self, n: int) -> int:
        self._ensure(n)
        return self._a[n]

    def convergent(self, n: int) -> Convergent:
        self._ensure(n)
        return Convergent(n, self._p[n], self._q[n])

    def denominator(self, n: int) -> int:
        self._ensure(n)
        return self._q[n]

    def _bracket_index(self, target: int) -> int:
        """Smallest n with q_n * q_{n+1} >= target."""
        while not self._prods or self._prods[-1] < target:
            self._ensure(len(self._q))
        return bisect.bisect_left(self._prods, target)

    # -- enclosures ---------------------------------------------------------
    def enclose(self, tol: RationalLike) -> tuple[Fraction, Fraction]:
        tol = as_fraction(tol)
        if tol <= 0:
            raise ValueError("tol must be positive")
        target = -((-tol.denominator) // tol.numerator)
        n = self._bracket_index(target)
        c0 = Fraction(self._p[n], self._q[n])
        c1 = Fraction(self._p[n + 1], self._q[n + 1])
        return (c0, c1) if c0 < c1 else (c1, c0)

    def enclose_scaled(self, x: int, bits: int) -> tuple[int, int]:
        """Integers ``lo <= 2**bits * x * alpha - R <= hi`` for some integer R.

        The result is reduced so that ``0 <= lo < 2**bits``; ``hi - lo <= 3``.
        """
        if bits > self.precision_cap:
            raise PrecisionExhausted(f"{self.label}: {bits} bits exceeds cap {self.precision_cap}")
        if x == 0:
            return 0, 0
        lo, hi = self.scaled_raw(x, bits)
        shift = (lo >> bits) << bits
        return lo - shift, hi - shift

    def scaled_raw(self, x: int, bits: int) -> tuple[int, int]:
        """Like ``enclose_scaled`` but without reducing modulo 1."""
        if x == 0:
            return 0, 0
        ax = abs(x)
        n = self._bracket_index(ax << bits)
        # even-index convergents lie below alpha, odd ones above
        lo_i, hi_i = (n, n + 1) if n % 2 == 0 else (n + 1, n)
        if x < 0:
            lo_i, hi_i = hi_i, lo_i
        lo = ((x * self._p[lo_i]) << bits) // self._q[lo_i]
        hi = -(((-x * self._p[hi_i]) << bits) // self._q[hi_i])
        return lo, hi

    # duck-typed circle point interface shared with other theta types
    frac_scaled = enclose_scaled

    def norm_scaled(self, x: int, bits: int) -> tuple[int, int]:
        """Scaled enclosure of ``||x * alpha||``."""
        lo, hi = self.enclose_scaled(x, bits + 2)
        lo, hi = fold_scaled(lo, hi, bits + 2)
        return lo >> 2, -((-hi) >> 2)

    def norm_less(self, x: int, bound: RationalLike, start_bits: Optional[int] = None) -> bool:
        """Certified decision of ``||x * alpha|| < bound``."""
        return decide_less(lambda b: self.norm_scaled(x, b), as_fraction(bound),
                           start_bits, self.precision_cap, what=f"||{x}*{self.label}||")

    def __repr__(self):
        return f"Irrational({self.label!r})"


class RationalPoint:
    """A rational circle point, usable wherever a theta is expected."""

    def __init__(self, value: RationalLike):
        self.value = as_fraction(value)
        self.label = str(self.value)

    def frac_scaled(self, x: int, bits: int) -> tuple[int, int]:
        v = x * self.value
        lo = (v.numerator << bits) // v.denominator
        hi = -((-v.numerator << bits) // v.denominator)
        shift = (lo >> bits) << bits
        return lo - shift, hi - shift


class AffinePoint:
    """The circle point ``r*alpha + s`` for rationals r, s.

    Multiples stay exact: ``x*(r*alpha + s)`` is enclosed from an unreduced
    enclosure of ``(x*r.numerator)*alpha`` divided by ``r.denominator``.
    """

    def __init__(self, alpha: Irrational, r: RationalLike, s: RationalLike = 0,
                 label: Optional[str] = None):
        self.alpha = alpha
        self.r = as_fraction(r)
        self.s = as_fraction(s)
        self.label = label or f"({self.r})*{alpha.label}+({self.s})"

    @property
    def precision_cap(self) -> int:
        return self.alpha.precision_cap

    def frac_scaled(self, x: int, bits: int) -> tuple[int, int]:
        extra = self.r.denominator.bit_length() + 2
        lo, hi = self.alpha.scaled_raw(x * self.r.numerator, bits + extra)
        div = self.r.denominator << extra
        lo, hi = lo // div, -((-hi) // div)
        v = x * self.s
        lo += (v.numerator << bits) // v.denominator
        hi += -((-v.numerator << bits) // v.denominator)
        shift = (lo >> bits) << bits
        return lo - shift, hi - shift

    def __repr__(self):
        return f"AffinePoint({self.label!r})"


def decide_less(scaled: Callable[[int], tuple[int, int]], bound: Fraction,
                start_bits: Optional[int] = None, cap: int = DEFAULT_PRECISION_CAP,
                what: str = "quantity") -> bool:
    """Decide ``value < bound`` from a refinable scaled enclosure.

    Precision doubles until the comparison is strict on both sides of the
    enclosure; going past ``cap`` bits raises PrecisionExhausted.
    """
    bits = start_bits if start_bits is not None else bits_for_tolerance(bound, 100) if bound > 0 else 16
    bits = max(bits, 8)
    while True:
        if bits > cap:
            raise PrecisionExhausted(f"cannot decide {what} < {bound} within {cap} bits")
        lo, hi = scaled(bits)
        scaled_bound = bound * (1 << bits)
        if hi < scaled_bound:
            return True
        if lo >= scaled_bound:
            return False
        bits *= 2


# -- spec-level operations ------------------------------------------------------

def convergents(alpha: Irrational, n: int) -> list[Convergent]:
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha._ensure(n - 1)
    return [alpha.convergent(i) for i in range(n)]


def enclose_alpha(alpha: Irrational, tol: RationalLike) -> tuple[Fraction, Fraction]:
    """Rational interval between two consecutive convergents, width <= tol."""
    return alpha.enclose(tol)


def circle_norm(alpha: Irrational, k: int, tol: RationalLike) -> NormInterval:
    """Certified enclosure of ``||k * alpha||`` with width at most ``tol``."""
    tol = as_fraction(tol)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if k == 0:
        return NormInterval(Fraction(0), Fraction(0))
    bits = bits_for_tolerance(tol, 3)
    lo, hi = alpha.norm_scaled(k, bits)
    return NormInterval.from_scaled(lo, hi, bits)


def min_norm_up_to(alpha: Irrational, K: int, tol: RationalLike) -> tuple[int, NormInterval]:
    """Minimiser of ``||k alpha||`` over ``0 < k <= K`` and its enclosure.

    The minimiser is the largest convergent denominator not exceeding K.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n = 0
    while alpha.denominator(n + 1) <= K:
        n += 1
    k_star = alpha.denominator(n)
    return k_star, circle_norm(alpha, k_star, tol)


def semiconvergent_denominators(alpha: Irrational) -> Iterator[int]:
    """Denominators ``q_{k-1} + j q_k`` (1 <= j <= a_{k+1}) in increasing order."""
    k = 0
    while True:
        q_prev = alpha.denominator(k - 1) if k else 0
        q_k = alpha.denominator(k)
        for j in range(1, alpha.quotient(k + 1) + 1):
            yield q_prev + j * q_k
        k += 1


def _frac_less(alpha: Irrational, n: int, bound: Fraction, above: bool) -> bool:
    """Certified ``{n alpha} < bound`` (or ``> 1 - bound`` when ``above``)."""
    bits = max(8, bits_for_tolerance(bound, 100))
    while True:
        if bits > alpha.precision_cap:
            raise PrecisionExhausted(f"cannot place {{{n}*{alpha.label}}}")
        lo, hi = alpha.enclose_scaled(n, bits)
        M = 1 << bits
        if hi < M:
            if above:
                lo, hi = M - hi, M - lo
            b = bound * M
            if hi < b:
                return True
            if lo >= b:
                return False
        bits *= 2


def return_times(alpha: Irrational, length: RationalLike) -> tuple[int, int]:
    """The two basic return times of rotation by alpha to an arc of given length.

    ``t1`` is the least n >= 1 with ``{n alpha} < length`` and ``t2`` the least
    with ``{n alpha} > 1 - length``.  By the three-gap theorem every return time
    to an arc of that length is one of ``t1``, ``t2``, ``t1 + t2``.  Both minima
    are one-sided best approximations, hence semiconvergent denominators.
    """
    length = as_fraction(length)
    if not 0 < length < 1:
        raise ValueError("arc length must lie in (0, 1)")
    t1 = t2 = None
    for n in semiconvergent_denominators(alpha):
        if t1 is None and _frac_less(alpha, n, length, above=False):
            t1 = n
        if t2 is None and _frac_less(alpha, n, length, above=True):
            t2 = n
        if t1 is not None and t2 is not None:
            return t1, t2
    raise AssertionError("unreachable")


def bohr_enumerate(alpha: Irrational, eps: RationalLike, A: int, B: int, *,
                   brute_threshold: int = 10_000) -> list[int]:
    """All ``m`` in ``[A, B)`` with certified ``||m alpha|| < eps``, increasing.

    Ranges shorter than ``brute_threshold`` are scanned; longer ones step from
    one solution to the next through the three possible gaps.
    """
    eps = as_fraction(eps)
    if not 0 < eps < Fraction(1, 2):
        raise ValueError("eps must lie in (0, 1/2)")
    if A >= B:
        return []
    start_bits = max(8, bits_for_tolerance(eps, 100))
    if B - A < brute_threshold:
        return [m for m in range(A, B) if alpha.norm_less(m, eps, start_bits)]

    t1, t2 = return_times(alpha, 2 * eps)
    steps = sorted({t1, t2, t1 + t2})
    m = A
    while m < B and not alpha.norm_less(m, eps, start_bits):
        m += 1
    out = []
    while m < B:
        out.append(m)
        for d in steps:
            if alpha.norm_less(m + d, eps, start_bits):
                m += d
                break
        else:
            raise AssertionError(f"three-gap stepping failed after m={m}")
    return out


# -- alpha specification grammar -----------------------------------------------------

def _int_list(text: str) -> list[int]:
    text = text.strip()
    return [int(t) for t in text.split(",") if t.strip()] if text else []


def parse_alpha(spec: str, precision_cap: int = DEFAULT_PRECISION_CAP) -> Irrational:
    """Parse ``golden | sqrt2 | e | cf:a0,a1,... | percf:a0;a1,...,ak|b1,...,bm``."""
    s = spec.strip()
    named = {"golden": Irrational.golden, "sqrt2": Irrational.sqrt2, "sqrt2-1": Irrational.sqrt2,
             "e": Irrational.e, "e-2": Irrational.e}
    if s in named:
        alpha = named[s]()
    elif s.startswith("cf:"):
        qs = _int_list(s[3:])
        if not qs:
            raise ValueError(f"empty quotient list in {spec!r}")
        alpha = Irrational.finite(qs, label=s)
    elif s.startswith("percf:"):
        body = s[6:]
        if ";" not in body or "|" not in body:
            raise ValueError(f"bad periodic spec {spec!r}")
        a0, rest = body.split(";", 1)
        pre, period = rest.split("|", 1)
        alpha = Irrational.periodic(int(a0), _int_list(pre), _int_list(period), label=s)
    else:
        raise ValueError(f"unknown alpha spec {spec!r}")
    alpha.precision_cap = precision_cap
    return alpha
