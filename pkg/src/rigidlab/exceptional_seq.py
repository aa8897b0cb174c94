"""A sequence with ||m alpha|| -> 0 along which m*theta is dense unless theta is in Q*alpha + Q.

Stage n uses ``l_n = n + 1`` and ``eps_n = 1/(2(n+1)^2)``; its block is every
Bohr integer ``m`` in ``[N_n, N_{n+1})`` with ``||m alpha|| < eps_n``.  The
block end comes from ``effective_Nprime`` (faithful mode) or is capped so the
block can be enumerated (demo mode, which forfeits the counting guarantee).

Deciding membership of a numerically given theta in Q*alpha + Q is impossible,
so nothing here classifies theta.  For declared combinations
``(a/b) alpha + c/d`` the clustering near the grid ``Z/lcm(b, d)`` is certified
per element; other thetas only get empirical gap tables.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .cf_arith import (
    AffinePoint,
    Irrational,
    RationalLike,
    RationalPoint,
    as_fraction,
    bits_for_tolerance,
    bohr_enumerate,
    min_norm_up_to,
    parse_alpha,
    return_times,
)
from .errors import BlockTooLarge, PrecisionExhausted
from .trig_poly import BuiltPoly, build_phi_eps, build_varphi_l, effective_Nprime, resonance_witness

DEFAULT_BUDGET = 10**7
NORM_BITS = 96


# -- schedule ---------------------------------------------------------------------------------------

@dataclass
class Stage:
    n: int
    l: int
    eps: Fraction
    K: int
    L: int
    nu: Fraction
    N: int
    N_next: int
    Nprime: int

    def to_dict(self) -> dict:
        return {
            "n": self.n, "l": self.l, "eps": str(self.eps), "K": self.K, "L": self.L,
            "nu": str(self.nu), "N": str(self.N), "N_next": str(self.N_next),
            "Nprime": str(self.Nprime),
        }


@dataclass
class ExceptionalSchedule:
    alpha: Irrational
    mode: str
    stages: list
    cap: Optional[int] = None
    multiplier: Optional[int] = None

    @property
    def guaranteed(self) -> bool:
        """True when every block end reaches the Lemma's N'."""
        return all(s.N_next >= s.Nprime for s in self.stages)

    def to_dict(self) -> dict:
        return {
            "alpha_spec": self.alpha.label,
            "mode": self.mode,
            "cap": None if self.cap is None else str(self.cap),
            "multiplier": "n+1" if self.multiplier is None else str(self.multiplier),
            "guaranteed": self.guaranteed,
            "stages": [s.to_dict() for s in self.stages],
        }


def stage_eps(n: int) -> Fraction:
    return Fraction(1, 2 * (n + 1) ** 2)


def build_schedule(alpha: Irrational, n_max: int, mode: str = "demo", *,
                   cap: Optional[int] = 10**5, multiplier: Optional[int] = None,
                   start: int = 1) -> ExceptionalSchedule:
    """Stage parameters for n = 1..n_max with one stage of lookahead for K_{n+1}.

    ``nu_n = (1/n) * min_{0<k<=mult*K_{n+1}} ||k alpha||`` using the certified
    lower endpoint of the minimum (so nu_n never exceeds the true value);
    ``mult`` defaults to ``n + 1``.  In demo mode ``N_{n+1} = min(N', N_n + cap)``.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if mode not in ("demo", "faithful"):
        raise ValueError("mode must be 'demo' or 'faithful'")
    if mode == "demo" and (cap is None or cap < 1):
        raise ValueError("demo mode needs a positive cap")
    phis: dict[int, BuiltPoly] = {}

    def phi(n):
        if n not in phis:
            phis[n] = build_phi_eps(stage_eps(n))
        return phis[n]

    stages = []
    N = start
    for n in range(1, n_max + 1):
        l, eps = n + 1, stage_eps(n)
        var = build_varphi_l(l)
        mult = n + 1 if multiplier is None else multiplier
        bound = mult * phi(n + 1).degree
        _, iv = min_norm_up_to(alpha, bound, Fraction(1, 2**64))
        nu = iv.lower / n
        r = effective_Nprime(l, eps, nu, N, alpha, phi=phi(n), varphi=var)
        N_next = r.Nprime if mode == "faithful" else min(r.Nprime, N + cap)
        if (N_next - N) // (sum(return_times(alpha, 2 * eps))) < 1:
            raise ValueError(f"stage {n}: block [{N}, {N_next}) may be empty; raise the cap")
        stages.append(Stage(n, l, eps, phi(n).degree, var.degree, nu, N, N_next, r.Nprime))
        N = N_next
    return ExceptionalSchedule(alpha, mode, stages, cap if mode == "demo" else None, multiplier)


# -- sequence ---------------------------------------------------------------------------------------

@dataclass
class Block:
    stage: int
    eps: Fraction
    start: int
    stop: int
    ms: list
    norm_upper: list          # scaled upper bounds of ||m alpha|| at NORM_BITS
    nearest: list             # nearest integer to m*alpha
    truncated_at: Optional[int] = None


@dataclass
class ExceptionalSequence:
    alpha: Irrational
    schedule: ExceptionalSchedule
    blocks: list = field(default_factory=list)

    @property
    def elements(self) -> list:
        return [m for b in self.blocks for m in b.ms]

    def __len__(self):
        return sum(len(b.ms) for b in self.blocks)

    def records(self) -> Iterable[tuple[int, int, int, Fraction]]:
        """``(m, nearest integer, scaled norm upper bound, block eps)`` in order."""
        for b in self.blocks:
            for m, q, u in zip(b.ms, b.nearest, b.norm_upper):
                yield m, q, u, b.eps

    def to_dict(self) -> dict:
        d = self.schedule.to_dict()
        d["blocks"] = [[str(m) for m in b.ms] for b in self.blocks]
        d["truncation"] = [
            {"stage": b.stage, "enumerated_stop": str(b.truncated_at)} for b in self.blocks if b.truncated_at
        ]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)


def _certify_element(alpha: Irrational, m: int, eps: Fraction) -> tuple[int, int]:
    """Nearest integer q to m*alpha and a scaled upper bound of ||m alpha|| (< eps)."""
    bits = max(NORM_BITS, bits_for_tolerance(eps, 1 << 20))
    lo, hi = alpha.scaled_raw(m, bits)
    half = 1 << (bits - 1)
    q = (lo + half) >> bits
    if (hi + half) >> bits != q:
        raise PrecisionExhausted(f"nearest integer to {m}*alpha undecided")
    up = max(abs(lo - (q << bits)), abs(hi - (q << bits)))
    if up >= eps * (1 << bits):
        raise AssertionError(f"element {m} fails its block bound")
    return q, up << (NORM_BITS - bits) if bits <= NORM_BITS else -((-up) >> (bits - NORM_BITS))


def emit_sequence(schedule: ExceptionalSchedule, alpha: Optional[Irrational] = None, *,
                  block_cap: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> ExceptionalSequence:
    """Enumerate every block; wider blocks than ``budget`` need ``block_cap``.

    With ``block_cap`` a block is enumerated only on ``[N_i, N_i + block_cap)``
    and the truncation is recorded.
    """
    alpha = alpha or schedule.alpha
    seq = ExceptionalSequence(alpha, schedule)
    for s in schedule.stages:
        stop = s.N_next
        truncated = None
        width = stop - s.N
        if block_cap is not None and width > block_cap:
            stop = s.N + block_cap
            truncated = stop
        elif width > budget:
            raise BlockTooLarge(f"stage {s.n}: block width {width} exceeds budget {budget}")
        ms = bohr_enumerate(alpha, s.eps, s.N, stop)
        certs = [_certify_element(alpha, m, s.eps) for m in ms]
        seq.blocks.append(Block(s.n, s.eps, s.N, s.N_next, ms,
                                [u for _, u in certs], [q for q, _ in certs], truncated))
    return seq


# -- theta values ---------------------------------------------------------------------------------------

class RationalComboTheta(AffinePoint):
    """``theta = (a/b) alpha + c/d`` with b, d >= 1 and both fractions reduced."""

    def __init__(self, a: int, b: int, c: int, d: int, alpha: Irrational, label: Optional[str] = None):
        if b < 1 or d < 1:
            raise ValueError("b and d must be positive")
        r, s = Fraction(a, b), Fraction(c, d)
        super().__init__(alpha, r, s, label)
        self.a, self.b = r.numerator, r.denominator
        self.c, self.d = s.numerator, s.denominator

    @classmethod
    def from_fractions(cls, r: Fraction, s: Fraction, alpha: Irrational, label=None):
        return cls(r.numerator, r.denominator, s.numerator, s.denominator, alpha, label)


class _Linear(ast.NodeVisitor):
    """Evaluate an expression as ``r*a + s`` with exact rationals."""

    def visit_Expression(self, node):
        return self.visit(node.body)

    def visit_Constant(self, node):
        if isinstance(node.value, int) and not isinstance(node.value, bool):
            return Fraction(0), Fraction(node.value)
        raise ValueError(f"bad constant {node.value!r}")

    def visit_Name(self, node):
        if node.id in ("a", "alpha"):
            return Fraction(1), Fraction(0)
        raise ValueError(f"unknown name {node.id!r}")

    def visit_UnaryOp(self, node):
        r, s = self.visit(node.operand)
        if isinstance(node.op, ast.USub):
            return -r, -s
        if isinstance(node.op, ast.UAdd):
            return r, s
        raise ValueError("bad unary operator")

    def visit_BinOp(self, node):
        (r1, s1), (r2, s2) = self.visit(node.left), self.visit(node.right)
        op = node.op
        if isinstance(op, ast.Add):
            return r1 + r2, s1 + s2
        if isinstance(op, ast.Sub):
            return r1 - r2, s1 - s2
        if isinstance(op, ast.Mult):
            if r1 and r2:
                raise ValueError("theta must be linear in alpha")
            return (r1 * s2 + r2 * s1, s1 * s2)
        if isinstance(op, ast.Div):
            if r2 or not s2:
                raise ValueError("can only divide by a non-zero rational")
            return r1 / s2, s1 / s2
        raise ValueError("unsupported operator")

    def generic_visit(self, node):
        raise ValueError(f"unsupported syntax {type(node).__name__}")


def parse_theta(spec: str, alpha: Irrational):
    """Parse ``p/q*a+r/s``-style combinations, plain rationals, or named irrationals.

    Returns a RationalComboTheta (alpha coefficient non-zero), a RationalPoint,
    or an Irrational for names accepted by ``parse_alpha``.
    """
    spec = spec.strip()
    try:
        tree = ast.parse(spec, mode="eval")
        r, s = _Linear().visit(tree)
    except (SyntaxError, ValueError) as exc:
        try:
            named = parse_alpha(spec, alpha.precision_cap)
            named.label = spec
            return named
        except ValueError:
            raise ValueError(f"cannot parse theta {spec!r}: {exc}") from None
    if r == 0:
        p = RationalPoint(s)
        p.label = spec
        return p
    return RationalComboTheta.from_fractions(r, s, alpha, label=spec)


# -- orbit diagnostics -------------------------------------------------------------------------------

def orbit_points(theta, ms: Sequence[int], bits: int = 64) -> np.ndarray:
    """``{m theta}`` for each m, to within ``3 * 2**-bits`` (lower end, as floats)."""
    exact = getattr(theta, "value", None)
    out = np.empty(len(ms))
    if isinstance(exact, Fraction):
        for i, m in enumerate(ms):
            f = m * exact
            out[i] = float(f - math.floor(f))
        return out
    scale = 2.0 ** -bits
    for i, m in enumerate(ms):
        lo, _ = theta.frac_scaled(m, bits)
        out[i] = lo * scale
    return out


def max_gap(points) -> float:
    """Longest arc of the circle containing no point; 1 for no points."""
    p = np.sort(np.mod(np.asarray(points, dtype=float), 1.0))
    if len(p) == 0:
        return 1.0
    if len(p) == 1:
        return 1.0
    gaps = np.diff(p)
    return float(max(gaps.max(), 1.0 - p[-1] + p[0]))


@dataclass
class ClusterReport:
    theta: str
    grid: int
    checked: int
    failures: int
    eps_star: Fraction
    sub_orbit: int
    gap_bound: Fraction
    observed_gap: float

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.observed_gap >= float(self.gap_bound)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta, "grid": self.grid, "checked": self.checked,
            "failures": self.failures, "eps_star": str(self.eps_star),
            "sub_orbit": self.sub_orbit, "gap_bound": str(self.gap_bound),
            "observed_gap": repr(self.observed_gap), "passed": self.passed,
        }


def grid_cluster_check(theta: RationalComboTheta, sequence: ExceptionalSequence,
                       eps_star: Optional[RationalLike] = None) -> ClusterReport:
    """Certify that each ``m theta`` sits within ``(|a|/b)||m alpha||`` of ``Z/lcm(b, d)``.

    Writing ``m alpha = q + sigma`` with q the nearest integer,
    ``m theta = (a q d + c m b)/(bd) + (a/b) sigma`` exactly, so the grid
    point is known in integers and the distance is ``(|a|/b)|sigma|``.  The
    numerator is divisible by ``gcd(b, d)``, so the grid is ``Z/lcm(b, d)``,
    which sits inside ``Z/(bd)``.  As a
    cross-check, an independent enclosure of ``{m theta}`` must come within
    ``(|a|/b) * (certified bound on ||m alpha||)`` of that grid point.
    Elements with certified ``||m alpha|| < eps_star`` (default: the last
    block's eps) form a sub-orbit whose max gap is at least
    ``1/lcm(b, d) - 2(|a|/b) eps_star``.
    """
    a, b, c, d = theta.a, theta.b, theta.c, theta.d
    # Z*(a/b) + Z*(c/d) lies in Z/lcm(b, d), a subgrid of Z/(bd)
    h = math.gcd(b, d)
    grid = b * d // h
    eps_star = as_fraction(eps_star) if eps_star is not None else sequence.blocks[-1].eps
    ratio = Fraction(abs(a), b)
    bits = NORM_BITS
    M = 1 << bits
    checked = failures = 0
    sub = []
    for m, q, up, _ in sequence.records():
        checked += 1
        j = ((a * q * d + c * m * b) // h) % grid
        lo, hi = theta.frac_scaled(m, bits)
        # distance of [lo, hi]/M from j/grid, circularly, as a scaled lower bound
        g = (j * M) // grid
        dist = min(abs(lo - g), abs(hi - g), M - abs(lo - g), M - abs(hi - g))
        lower = max(0, dist - 2)
        allowed = ratio * up
        if lower > allowed:
            failures += 1
        if up < eps_star * M:
            sub.append(m)
    gap = max_gap(orbit_points(theta, sub)) if sub else 1.0
    bound = Fraction(1, grid) - 2 * ratio * eps_star
    return ClusterReport(theta.label, grid, checked, failures, eps_star, len(sub), bound, gap)


def default_prefixes(n: int) -> list:
    out, k = [], 10
    while k < n:
        out += [v for v in (k, 2 * k, 5 * k) if v < n]
        k *= 10
    return sorted(set(out)) + ([n] if n else [])


def density_scan(thetas: Sequence, ms: Sequence[int],
                 prefixes: Optional[Sequence[int]] = None) -> list:
    """Rows ``(theta_label, prefix_len, max_gap)`` for each theta and prefix."""
    prefixes = sorted(set(prefixes)) if prefixes is not None else default_prefixes(len(ms))
    rows = []
    for th in thetas:
        pts = orbit_points(th, ms)
        for n in prefixes:
            rows.append((th.label, n, max_gap(pts[:n])))
    return rows


def stage_witnesses(theta, schedule: ExceptionalSchedule) -> list:
    """``resonance_witness`` at each stage's (K_n, L_n, nu_n); a demonstration only."""
    out = []
    for s in schedule.stages:
        try:
            w = resonance_witness(theta, s.K, s.L, s.nu, schedule.alpha)
        except PrecisionExhausted:
            w = "undecided"
        out.append((s.n, w))
    return out
