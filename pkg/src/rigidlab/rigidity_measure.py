"""Inductive construction of atomic measures rigid along a sequence.

The level-p measure puts mass ``2**-p`` on each point ``k_i * alpha``.  Going
from level p to p+1 adds, one at a time, an atom ``k_s + Q_s`` next to each
existing atom ``k_s``.  Every shift ``Q_s`` is a convergent denominator with
``||Q_s alpha||`` under a budget computed from certified slacks, and after each
addition a checkpoint index is pushed far enough along the sequence that the
envelope ``b_n`` forces the whole measure below the next threshold.

Each level is then re-verified from scratch (``verify_properties``), which is
the authority on whether the construction succeeded.
"""

from __future__ import annotations

import json
import logging
import time
from contextlib import contextmanager
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .cf_arith import Irrational, NormInterval, RationalLike, as_fraction, bits_for_tolerance
from .errors import (
    PrecisionExhausted,
    ResourceLimit,
    RetriesExhausted,
    SequenceTooShort,
    VerificationFailed,
)

log = logging.getLogger(__name__)

#: Extra sequence indices past N_p checked directly for property (3).
FRONTIER_EXTRA = 4


class RigiditySequence:
    """Strictly increasing integers ``m_n`` with envelope ``||m_n alpha|| <= b_n``.

    Builtin sequences are generated from the convergent denominators of alpha
    and carry a tail law (``b_n`` computable for every n).  User sequences are
    finite lists without one.  Indices are 0-based.
    """

    def __init__(self, alpha: Irrational, kind: str, scale: int = 1,
                 terms: Optional[Sequence[int]] = None,
                 envelope: Optional[Sequence[Fraction]] = None):
        self.alpha = alpha
        self.kind = kind
        self.scale = scale
        self._terms = None if terms is None else [int(t) for t in terms]
        self._env = None if envelope is None else [as_fraction(b) for b in envelope]
        # golden has q_0 = q_1 = 1; skip the repeat so terms strictly increase
        self._offset = 0
        if self._terms is None and alpha.denominator(1) == alpha.denominator(0):
            self._offset = 1

    @property
    def has_tail(self) -> bool:
        return self._terms is None

    @property
    def materialized(self) -> Optional[int]:
        return None if self._terms is None else len(self._terms)

    def _check(self, n: int) -> None:
        if n < 0:
            raise IndexError(n)
        if self._terms is not None and n >= len(self._terms):
            raise SequenceTooShort(f"sequence has {len(self._terms)} terms, index {n} needed")

    def term(self, n: int) -> int:
        self._check(n)
        if self._terms is not None:
            return self._terms[n]
        return self.scale * self.alpha.denominator(self._offset + n)

    def envelope(self, n: int) -> Fraction:
        self._check(n)
        if self._env is not None:
            return self._env[n]
        return Fraction(self.scale, self.alpha.denominator(self._offset + n + 1))

    def least_index(self, factor: int, threshold: Fraction, start: int = 0) -> int:
        """Least ``n >= start`` with ``factor * b_n < threshold``.

        By monotonicity of the envelope the inequality then holds for every
        later index as well.
        """
        n = start
        while not factor * self.envelope(n) < threshold:
            n += 1
        return n

    def to_dict(self, count: int) -> dict:
        return {"alpha": self.alpha.label, "kind": self.kind, "scale": self.scale,
                "terms": [str(self.term(n)) for n in range(count)],
                "envelope": [str(self.envelope(n)) for n in range(count)]}


def builtin_rigidity(alpha: Irrational, kind: str = "denominators", count: int = 8,
                     scale: int = 1) -> RigiditySequence:
    """Convergent-denominator sequence ``scale * q_l`` with envelope ``scale / q_{l+1}``.

    The first ``count`` envelopes are checked against certified norms.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if kind == "denominators":
        scale = 1
    elif kind == "scaled":
        if scale < 1:
            raise ValueError("scale must be >= 1")
    else:
        raise ValueError(f"unknown sequence kind {kind!r}")
    seq = RigiditySequence(alpha, kind, scale)
    for n in range(count):
        lo, hi = alpha.norm_scaled(seq.term(n), 96)
        if not Fraction(hi, 1 << 96) <= seq.envelope(n):
            raise VerificationFailed(f"envelope fails at index {n}")
    return seq


def user_sequence(alpha: Irrational, terms: Sequence[int],
                  envelope: Sequence[RationalLike]) -> RigiditySequence:
    """A finite user sequence; the envelope is certified term by term."""
    terms = [int(t) for t in terms]
    env = [as_fraction(b) for b in envelope]
    if len(terms) != len(env) or not terms:
        raise ValueError("terms and envelope must be non-empty and of equal length")
    if any(b <= a for a, b in zip(terms, terms[1:])):
        raise ValueError("terms must be strictly increasing")
    if any(b > a for a, b in zip(env, env[1:])):
        raise ValueError("envelope must be non-increasing")
    for n, (m, b) in enumerate(zip(terms, env)):
        # ||m alpha|| is irrational for m != 0, so "<" and "<=" agree
        if m != 0 and not alpha.norm_less(m, b):
            raise VerificationFailed(f"||m_{n} alpha|| exceeds envelope {b}")
    return RigiditySequence(alpha, "user", terms=terms, envelope=env)


@dataclass(frozen=True)
class AtomicMeasure:
    """Uniform measure on the points ``k_i * alpha``, ``i = 1..2**level``."""

    level: int
    ks: tuple

    def __post_init__(self):
        if len(self.ks) != 1 << self.level:
            raise ValueError("a level-p measure has exactly 2**p atoms")
        if self.ks[0] != 0:
            raise ValueError("the first multiplier is always 0")
        if len(set(self.ks)) != len(self.ks):
            raise ValueError("multipliers must be distinct")

    @property
    def max_abs_k(self) -> int:
        return max(abs(k) for k in self.ks)


@dataclass(frozen=True)
class EtaSeparation:
    """A quarter of the least pairwise distance among the first ``2**p0`` atoms.

    ``lower``/``upper`` are None for p0 = 0 (a single atom has no pairs).
    """

    p0: int
    lower: Optional[Fraction]
    upper: Optional[Fraction]

    @property
    def applicable(self) -> bool:
        return self.lower is not None


@dataclass
class Check:
    kind: str
    indices: tuple
    bound: Fraction
    value: tuple  # (lo, hi)
    margin: Fraction

    def to_dict(self) -> dict:
        return {"kind": self.kind, "indices": [str(i) for i in self.indices],
                "bound": str(self.bound),
                "value_interval": [str(self.value[0]), str(self.value[1])],
                "margin": str(self.margin)}


@dataclass
class CertificateReport:
    level: int
    N: list
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.margin > 0 for c in self.checks)

    def min_margin(self, kind: str) -> Optional[Fraction]:
        ms = [c.margin for c in self.checks if c.kind == kind]
        return min(ms) if ms else None

    def to_dict(self) -> dict:
        return {"level": self.level, "N": self.N, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


@dataclass
class ConstructionState:
    measure: AtomicMeasure
    N: list
    shifts: list = field(default_factory=list)   # per stage: [Q_1, ..., Q_{2^p}]
    budgets: list = field(default_factory=list)  # per stage: closeness budgets delta_s
    certificate: Optional[CertificateReport] = None

    @property
    def level(self) -> int:
        return self.measure.level

    @property
    def verified(self) -> bool:
        return self.certificate is not None and self.certificate.passed


def initial_state() -> ConstructionState:
    return ConstructionState(AtomicMeasure(0, (0,)), [0])


# -- certified mu^n -------------------------------------------------------------

def _mu_scaled(alpha: Irrational, ks: Sequence[int], m: int, bits: int) -> tuple[int, int]:
    """Sums of scaled enclosures of ``||m k alpha||`` over the atoms."""
    lo_sum = hi_sum = 0
    for k in ks:
        if k:
            lo, hi = alpha.norm_scaled(m * k, bits)
            lo_sum += lo
            hi_sum += hi
    return lo_sum, hi_sum


def mu_n(measure: AtomicMeasure, seq: RigiditySequence, n: int, tol: RationalLike) -> NormInterval:
    """Enclosure of ``2**-p * sum_i ||m_n k_i alpha||`` of width at most ``tol``."""
    tol = as_fraction(tol)
    bits = bits_for_tolerance(tol, 3)
    lo, hi = _mu_scaled(seq.alpha, measure.ks, seq.term(n), bits)
    den = len(measure.ks) << bits
    return NormInterval(Fraction(lo, den), Fraction(hi, den))


def _certify_mu_below(alpha, ks, m, bound: Fraction, bits: int, cap: int):
    """Return (lo, hi, margin) with ``hi < bound`` certified, refining as needed."""
    while True:
        lo, hi = _mu_scaled(alpha, ks, m, bits)
        den = len(ks) << bits
        upper = Fraction(hi, den)
        if upper < bound:
            return Fraction(lo, den), upper, bound - upper
        if Fraction(lo, den) >= bound or bits * 2 > cap:
            return Fraction(lo, den), upper, bound - upper
        bits *= 2


# -- Fourier coefficients -------------------------------------------------------

@contextmanager
def _iv_prec(bits: int):
    iv = mpmath.iv
    saved = iv.prec
    iv.prec = bits
    try:
        yield iv
    finally:
        iv.prec = saved


@dataclass(frozen=True)
class ComplexInterval:
    re: tuple
    im: tuple

    def dist_from_one(self) -> tuple:
        """Enclosure of ``|1 - z|`` as a pair of floats rounded outward."""
        iv = mpmath.iv
        re = iv.mpf([self.re[0], self.re[1]])
        im = iv.mpf([self.im[0], self.im[1]])
        d = iv.sqrt((1 - re) ** 2 + im ** 2)
        return mpmath.mpf(d.a), mpmath.mpf(d.b)


def fourier_coeff(measure: AtomicMeasure, alpha: Irrational, m: int,
                  bits: int = 64) -> ComplexInterval:
    """Enclosure of ``2**-p * sum_i exp(2 pi i m k_i alpha)``."""
    if m == 0 or measure.level == 0:
        one = mpmath.mpf(1)
        zero = mpmath.mpf(0)
        return ComplexInterval((one, one), (zero, zero))
    iv = mpmath.iv
    M = 1 << bits
    with _iv_prec(bits + 16):
        re = iv.mpf(0)
        im = iv.mpf(0)
        for k in measure.ks:
            if k == 0:
                re += 1
                continue
            lo, hi = alpha.enclose_scaled(m * k, bits)
            f = iv.mpf([lo, hi]) / M
            t = 2 * iv.pi * f
            re += iv.cos(t)
            im += iv.sin(t)
        n = len(measure.ks)
        re /= n
        im /= n
        return ComplexInterval((mpmath.mpf(re.a), mpmath.mpf(re.b)),
                               (mpmath.mpf(im.a), mpmath.mpf(im.b)))


def fourier_bound_holds(measure, seq, n, bits: int = 64) -> tuple:
    """Check ``|1 - mu_hat(m_n)| <= 2 pi mu^n`` on enclosures.

    Returns ``(holds, dist_lo, dist_hi, mu_lo, mu_hi)``.
    """
    alpha = seq.alpha
    m = seq.term(n)
    c = fourier_coeff(measure, alpha, m, bits)
    d_lo, d_hi = c.dist_from_one()
    mu = mu_n(measure, seq, n, Fraction(1, 1 << (bits - 4)))
    with _iv_prec(bits + 16):
        rhs = mpmath.iv.pi * 2 * mpmath.iv.mpf(mu.upper.numerator) / mu.upper.denominator
        holds = d_hi <= mpmath.mpf(rhs.b)
    return holds, d_lo, d_hi, mu.lower, mu.upper


# -- separation --------------------------------------------------------------------

def _pair_norm(alpha, d: int, bits: int) -> tuple[Fraction, Fraction]:
    lo, hi = alpha.norm_scaled(d, bits)
    M = 1 << bits
    return Fraction(lo, M), Fraction(hi, M)


def eta(measure: AtomicMeasure, alpha: Irrational, p0: int, tol: RationalLike = Fraction(1, 1 << 64)) -> EtaSeparation:
    """Certified bounds for a quarter of the least distance among the first 2**p0 atoms."""
    if (1 << p0) > len(measure.ks):
        raise ValueError("p0 exceeds the measure level")
    if p0 == 0:
        return EtaSeparation(0, None, None)
    bits = max(16, bits_for_tolerance(as_fraction(tol), 3))
    ks = measure.ks[: 1 << p0]
    while True:
        lows, highs = [], []
        for i in range(len(ks)):
            for j in range(i + 1, len(ks)):
                lo, hi = _pair_norm(alpha, ks[i] - ks[j], bits)
                lows.append(lo)
                highs.append(hi)
        lower, upper = min(lows) / 4, min(highs) / 4
        # insist on a tight relative enclosure, not just a positive one
        if lower > 0 and (upper - lower) * 1024 <= lower:
            return EtaSeparation(p0, lower, upper)
        bits *= 2
        if bits > alpha.precision_cap:
            raise PrecisionExhausted("atoms not separated at available precision")


# -- verification ------------------------------------------------------------------

def _window_bound(N: Sequence[int], n: int) -> tuple[int, Fraction]:
    """Tightest property-(1) threshold for index n: the window with largest j."""
    j = max(i for i in range(len(N) - 1) if N[i] <= n)
    return j, Fraction(1, 1 << j)


def verify_properties(state: ConstructionState, seq: RigiditySequence,
                      p0_max: Optional[int] = None, *, raise_on_fail: bool = True,
                      threads: int = 1, frontier_extra: int = FRONTIER_EXTRA) -> CertificateReport:
    """Recompute and certify properties (1), (2), (3) for a state.

    (1): ``mu_p^n < 2**-j`` for ``n in [N_j, N_{j+1}]``, ``0 <= j < p``.
    (2): ``||(k_{l 2^p0 + r} - k_r) alpha|| < eta_p0`` for ``1 <= p0 <= p``.
    (3): ``mu_p^n < 2**-(p+1)`` for ``n >= N_p``: directly on a short frontier,
    and beyond it through ``max|k| * b_{N_p}`` and monotonicity of ``b``.
    """
    measure, N = state.measure, state.N
    p = measure.level
    alpha = seq.alpha
    ks = measure.ks
    cap = alpha.precision_cap
    bits = 64 + 2 * p
    report = CertificateReport(level=p, N=list(N))

    def fail(check):
        if raise_on_fail:
            raise VerificationFailed(
                f"{check.kind} violated at {check.indices}: value {float(check.value[1]):.3g} "
                f"vs bound {float(check.bound):.3g}", check)

    # (1)
    if p >= 1:
        idx = list(range(N[0], N[p] + 1))

        def one(n):
            bound = _window_bound(N[:p + 1], n)[1]
            return n, _certify_mu_below(alpha, ks, seq.term(n), bound, bits, cap)

        if threads > 1:
            with ThreadPoolExecutor(threads) as ex:
                results = list(ex.map(one, idx))
        else:
            results = [one(n) for n in idx]
        cache = {}
        for n, (lo, hi, _) in results:
            cache[n] = (lo, hi)
        for j in range(p):
            bound = Fraction(1, 1 << j)
            for n in range(N[j], N[j + 1] + 1):
                lo, hi = cache[n]
                if hi >= bound:
                    # the tightest bound was used above; a looser one may still pass
                    lo, hi, _ = _certify_mu_below(alpha, ks, seq.term(n), bound, bits, cap)
                chk = Check("P1", (j, n), bound, (lo, hi), bound - hi)
                report.checks.append(chk)
                if chk.margin <= 0:
                    fail(chk)

    # (2)
    top = p if p0_max is None else min(p, p0_max)
    for p0 in range(1, top + 1):
        e = eta(measure, alpha, p0)
        block = 1 << p0
        for l in range(1, (len(ks) >> p0)):
            for r in range(1, block + 1):
                i = l * block + r
                b = bits_for_tolerance(e.lower, 1 << 32)
                d_lo, d_hi = _pair_norm(alpha, ks[i - 1] - ks[r - 1], b)
                while d_hi >= e.lower and b * 2 <= cap:
                    b *= 2
                    d_lo, d_hi = _pair_norm(alpha, ks[i - 1] - ks[r - 1], b)
                chk = Check("P2", (p0, l, r), e.lower, (d_lo, d_hi), e.lower - d_hi)
                report.checks.append(chk)
                if chk.margin <= 0:
                    fail(chk)

    # (3)
    bound = Fraction(1, 1 << (p + 1))
    last = N[p] + frontier_extra
    if seq.materialized is not None:
        last = min(last, seq.materialized - 1)
    for n in range(N[p], last + 1):
        lo, hi, margin = _certify_mu_below(alpha, ks, seq.term(n), bound, bits, cap)
        chk = Check("P3", (n,), bound, (lo, hi), margin)
        report.checks.append(chk)
        if margin <= 0:
            fail(chk)
    tail_n = N[p] if seq.has_tail else last
    tail_val = measure.max_abs_k * seq.envelope(tail_n)
    chk = Check("P3", ("tail", tail_n), bound, (Fraction(0), tail_val), bound - tail_val)
    report.checks.append(chk)
    if chk.margin <= 0:
        fail(chk)

    state.certificate = report
    return report


# -- extension ---------------------------------------------------------------------

class _Deadline:
    def __init__(self, seconds: Optional[float]):
        self.t = None if seconds is None else time.monotonic() + seconds

    def check(self, what: str):
        if self.t is not None and time.monotonic() > self.t:
            raise ResourceLimit(f"time budget exhausted during {what}")


def _smallest_shift(alpha: Irrational, delta: Fraction, floor_q: int) -> int:
    j = 0
    while alpha.denominator(j) <= floor_q:
        j += 1
    while not alpha.norm_less(alpha.denominator(j), delta):
        j += 1
    return alpha.denominator(j)


def _extend_base(state, seq):
    N1 = seq.least_index(1, Fraction(1, 4), start=1)
    return ConstructionState(AtomicMeasure(1, (0, 1)), [0, N1], shifts=[[1]], budgets=[[None]])


def _extend_step(state, seq, shrink: Fraction, deadline: _Deadline):
    alpha = seq.alpha
    p = state.level
    ks = list(state.measure.ks)
    size = len(ks)
    N = state.N
    bits = 64 + 2 * p
    den = (2 * size) << bits  # nu has 2^{p+1} slots

    etas = [eta(state.measure, alpha, p0) for p0 in range(1, p + 1)]

    # per-index data: enclosure sums over the fixed first half and per-slot
    # enclosures of the second half (initially duplicates of k_s)
    fixed = []
    slots = []

    def grow(upto):
        while len(fixed) <= upto:
            m = seq.term(len(fixed))
            lo_f, hi_f = _mu_scaled(alpha, ks, m, bits)
            fixed.append((lo_f, hi_f))
            row = []
            for s in range(size):
                row.append(alpha.norm_scaled(m * new_ks[s], bits) if new_ks[s] else (0, 0))
            slots.append(row)
            deadline.check("extend")

    new_ks = list(ks)
    grow(N[p])
    prev_N = N[p]
    shifts, budgets = [], []
    for s in range(size):  # 0-based slot; paper index s+1
        deadline.check("extend")
        # slack of every tracked index against its final property-(1) bound
        slack = None
        for n in range(prev_N + 1):
            j = max(i for i in range(p + 1) if N[i] <= n)
            hi = fixed[n][1] + sum(h for _, h in slots[n])
            sl = Fraction(1, 1 << j) - Fraction(hi, den)
            slack = sl if slack is None else min(slack, sl)
        if slack <= 0:
            raise VerificationFailed(f"no slack left before adding atom {size + s + 1}")
        m_max = seq.term(prev_N)
        remaining = size - s
        delta = slack * (2 * size) / (2 * remaining * m_max)
        for p0, e in zip(range(1, p + 1), etas):
            r = s % (1 << p0)
            d_bits = bits_for_tolerance(e.lower, 1 << 32)
            d_hi = Fraction(0) if r == s else _pair_norm(alpha, ks[s] - ks[r], d_bits)[1]
            room = e.lower - d_hi
            if room <= 0:
                raise VerificationFailed(f"eta_{p0} budget exhausted for atom {s + 1}")
            delta = min(delta, room / 2)
        delta *= shrink
        floor_q = 2 * max(abs(k) for k in new_ks)
        Q = _smallest_shift(alpha, delta, floor_q)
        k_new = ks[s] + Q
        new_ks[s] = k_new
        for n in range(len(slots)):
            slots[n][s] = alpha.norm_scaled(seq.term(n) * k_new, bits)
        max_k = max(max(abs(k) for k in ks), max(abs(k) for k in new_ks))
        N_s = seq.least_index(max_k, Fraction(1, 1 << (p + 2)), start=prev_N + 1)
        grow(N_s)
        shifts.append(Q)
        budgets.append(delta)
        prev_N = N_s
        log.debug("level %d atom %d: Q bits=%d, N=%d", p + 1, size + s + 1, Q.bit_length(), N_s)

    measure = AtomicMeasure(p + 1, tuple(ks + new_ks))
    return ConstructionState(measure, N + [prev_N], shifts=state.shifts + [shifts],
                             budgets=state.budgets + [budgets])


def extend(state: ConstructionState, seq: RigiditySequence, *, retries: int = 3,
           time_budget: Optional[float] = None, threads: int = 1) -> ConstructionState:
    """Build and verify the level ``p + 1`` state from a verified level-p state."""
    if not state.verified:
        raise ValueError("extend requires a verified state")
    deadline = _Deadline(time_budget)
    shrink = Fraction(1)
    last_err = None
    for attempt in range(retries + 1):
        try:
            if state.level == 0:
                new = _extend_base(state, seq)
            else:
                new = _extend_step(state, seq, shrink, deadline)
            verify_properties(new, seq, threads=threads)
            return new
        except VerificationFailed as exc:
            last_err = exc
            log.warning("level %d attempt %d failed: %s", state.level + 1, attempt + 1, exc)
            shrink /= 2
    raise RetriesExhausted(f"level {state.level + 1} failed after {retries + 1} attempts: {last_err}")


def construct(seq: RigiditySequence, depth: int, *, time_budget: Optional[float] = None,
              threads: int = 1) -> list:
    """Run the construction to ``depth``; returns the verified states for levels 0..depth."""
    state = initial_state()
    verify_properties(state, seq)
    states = [state]
    start = time.monotonic()
    for _ in range(depth):
        left = None if time_budget is None else time_budget - (time.monotonic() - start)
        if left is not None and left <= 0:
            raise ResourceLimit(f"time budget exhausted after level {state.level}")
        state = extend(state, seq, time_budget=left, threads=threads)
        states.append(state)
        log.info("level %d verified: N=%s, max|k| has %d bits", state.level, state.N,
                 state.measure.max_abs_k.bit_length())
    return states


# -- diagnostics -------------------------------------------------------------------

def interval_mass(measure: AtomicMeasure, alpha: Irrational, center_index: int,
                  e: EtaSeparation) -> Fraction:
    """Mass of ``(k_r alpha - eta, k_r alpha + eta)`` by certified atom counting."""
    kr = measure.ks[center_index]
    count = 0
    for k in measure.ks:
        bits = 64
        while True:
            lo, hi = _pair_norm(alpha, k - kr, bits)
            if hi < e.lower:
                count += 1
                break
            if lo >= e.upper:
                break
            bits *= 2
            if bits > alpha.precision_cap:
                raise PrecisionExhausted("cannot place atom relative to eta interval")
    return Fraction(count, len(measure.ks))


def limit_diagnostics(states: Sequence[ConstructionState], seq: RigiditySequence,
                      p0_values: Sequence[int] = (1, 2, 3), extra: int = FRONTIER_EXTRA,
                      fourier: bool = True) -> dict:
    """Rows for plotting plus the atomlessness mass table.

    ``rows`` holds ``(p, n, m_n, mu_lo, mu_hi, fourier_dist_lo, fourier_dist_hi)``
    for each level and each index up to ``N_p + extra``.
    """
    alpha = seq.alpha
    rows, fourier_ok = [], True
    for st in states:
        p = st.level
        for n in range(st.N[-1] + extra + 1):
            if seq.materialized is not None and n >= seq.materialized:
                break
            mu = mu_n(st.measure, seq, n, Fraction(1, 1 << 60))
            if fourier:
                holds, d_lo, d_hi, _, _ = fourier_bound_holds(st.measure, seq, n)
                fourier_ok &= bool(holds)
                d = (mpmath.nstr(d_lo, 17), mpmath.nstr(d_hi, 17))
            else:
                d = ("", "")
            rows.append((p, n, seq.term(n), mu.lower, mu.upper) + d)
    masses, disjoint_ok = [], True
    for p0 in p0_values:
        base = [st for st in states if st.level >= p0]
        if not base:
            continue
        e = eta(base[0].measure, alpha, p0)
        # centers are 4 eta apart, so radius-eta intervals are disjoint
        disjoint_ok &= 4 * e.lower > 2 * e.upper
        for st in base:
            for r in range(1 << p0):
                mass = interval_mass(st.measure, alpha, r, e)
                masses.append({"p0": p0, "p": st.level, "r": r + 1, "mass": str(mass),
                               "expected": str(Fraction(1, 1 << p0)),
                               "ok": mass == Fraction(1, 1 << p0)})
    return {"rows": rows, "fourier_ok": fourier_ok, "masses": masses,
            "masses_ok": all(m["ok"] for m in masses), "disjoint_ok": disjoint_ok,
            "N_table": [{"p": st.level, "N": st.N} for st in states]}
