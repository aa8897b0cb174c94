"""Command-line front end.

usage:
  rigidlab [global flags] COMMAND [options]

Commands:
  cf           convergents, certified ||k alpha||, best approximations, Bohr sets
  rigidity     a rigidity sequence with its certified envelope
  measure      build the atomic measures to a given depth; certificates + diagnostics
  lemma        build and certify the two test polynomials; Birkhoff cross-check
  exceptional  schedule + sequence; grid clustering and gap tables for theta lists
  density      gap table only

Global flags (accepted before or after the command):
  --alpha SPEC         golden | sqrt2 | sqrt2-1 | e | e-2 | cf:a0,a1,... | percf:a0;pre|period
  --out-dir DIR        where data files go (default: rigidlab_out)
  --precision-cap B    ceiling on fractional bits in certified loops
  --threads T          worker threads for verification
  --log-level LEVEL    DEBUG, INFO, WARNING, ...
  --config FILE        flat ``key = value`` file; explicit flags win

Exit codes: 0 ok, 1 bad input, 2 precision/resource exhaustion, 3 failed certificate.
Data files are byte-identical across runs with the same config; the wall-clock
timestamp lives only in ``<command>.meta.json``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from datetime import datetime, timezone
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .cf_arith import (
    DEFAULT_PRECISION_CAP,
    Irrational,
    as_fraction,
    bohr_enumerate,
    circle_norm,
    convergents,
    min_norm_up_to,
    parse_alpha,
)
from .errors import (
    BlockTooLarge,
    CertificationFailed,
    PrecisionExhausted,
    ResourceLimit,
    RetriesExhausted,
    RigidLabError,
    SequenceTooShort,
    VerificationFailed,
)

log = logging.getLogger("rigidlab")

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_CERT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- output helpers -------------------------------------------------------------------------

def atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)   # mkstemp creates 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def write_csv(path: str, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    atomic_write(path, buf.getvalue())


def write_meta(args, command: str, started: float, extra: Optional[dict] = None) -> None:
    meta = {
        "command": command,
        "argv": list(args._argv),
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "elapsed_s": round(time.monotonic() - started, 3),
    }
    meta.update(extra or {})
    write_json(os.path.join(args.out_dir, f"{command}.meta.json"), meta)


def f_down(x: Fraction) -> str:
    """Decimal string of a float <= x."""
    v = float(x)
    if Fraction(v) > x:
        v = math.nextafter(v, -math.inf)
    return repr(v)


def f_up(x: Fraction) -> str:
    v = float(x)
    if Fraction(v) < x:
        v = math.nextafter(v, math.inf)
    return repr(v)


def split_list(items) -> list:
    """Flatten comma-separated values, ignoring commas inside parentheses."""
    out = []
    for item in items or []:
        depth, cur = 0, ""
        for ch in item:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch == "," and depth == 0:
                out.append(cur.strip())
                cur = ""
            else:
                cur += ch
        if cur.strip():
            out.append(cur.strip())
    return [s.strip().strip('"').strip("'") for s in out if s.strip()]


def int_list(text: str) -> list:
    return [int(v) for v in split_list([text])] if text else []


def _alpha(args) -> Irrational:
    try:
        return parse_alpha(args.alpha, args.precision_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- cf ---------------------------------------------------------------------------------------

def cmd_cf(args) -> int:
    alpha = _alpha(args)
    tol = as_fraction(args.tol)
    out = {"alpha": alpha.label, "tol": str(tol)}
    print(f"alpha = {alpha.label}")
    if args.convergents:
        cs = convergents(alpha, args.convergents)
        print(f"{'n':>4} {'a_n':>6} {'p_n':>16} {'q_n':>16}")
        for c in cs:
            print(f"{c.index:>4} {alpha.quotient(c.index):>6} {c.p:>16} {c.q:>16}")
        out["convergents"] = [[c.index, str(c.p), str(c.q)] for c in cs]
    if args.norms:
        print(f"{'k':>10}  ||k alpha|| in [lower, upper]")
        rows = []
        for k in int_list(args.norms):
            iv = circle_norm(alpha, k, tol)
            lo, hi = f_down(iv.lower), f_up(iv.upper)
            print(f"{k:>10}  [{lo}, {hi}]")
            rows.append([k] + iv.as_strs())
        out["norms"] = rows
    if args.min_norm:
        rows = []
        print(f"{'K':>10} {'argmin k':>10}  min ||k alpha||")
        for K in int_list(args.min_norm):
            k, iv = min_norm_up_to(alpha, K, tol)
            print(f"{K:>10} {k:>10}  [{f_down(iv.lower)}, {f_up(iv.upper)}]")
            rows.append([K, k] + iv.as_strs())
        out["min_norm"] = rows
    if args.bohr:
        parts = split_list([args.bohr])
        if len(parts) != 3:
            raise UsageError("--bohr takes eps,A,B")
        eps, A, B = as_fraction(parts[0]), int(parts[1]), int(parts[2])
        ms = bohr_enumerate(alpha, eps, A, B)
        print(f"Bohr set ||m alpha|| < {eps} on [{A}, {B}): {len(ms)} elements")
        print(" ".join(str(m) for m in ms[:50]) + (" ..." if len(ms) > 50 else ""))
        out["bohr"] = {"eps": str(eps), "A": A, "B": B, "ms": ms}
    if args.json:
        write_json(os.path.join(args.out_dir, "cf.json"), out)
    return EXIT_OK


# -- rigidity / measure ------------------------------------------------------------------------

def _read_sequence_file(path: str):
    terms, env = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != 2:
                raise UsageError(f"{path}: expected 'm envelope' per line")
            terms.append(int(parts[0]))
            env.append(as_fraction(parts[1]))
    return terms, env


def _sequence(args, alpha: Irrational):
    from .rigidity_measure import builtin_rigidity, user_sequence

    if args.seq.startswith("file:"):
        terms, env = _read_sequence_file(args.seq[5:])
        return user_sequence(alpha, terms, env)
    if args.seq not in ("denominators", "scaled"):
        raise UsageError(f"unknown --seq {args.seq!r}")
    return builtin_rigidity(alpha, args.seq, count=8, scale=args.scale)


def cmd_rigidity(args) -> int:
    alpha = _alpha(args)
    seq = _sequence(args, alpha)
    count = args.count if seq.materialized is None else min(args.count, seq.materialized)
    rows = []
    print(f"{'n':>4} {'m_n':>20} {'envelope b_n':>24} {'||m_n alpha|| upper':>24}")
    for n in range(count):
        m, b = seq.term(n), seq.envelope(n)
        iv = circle_norm(alpha, m, Fraction(1, 1 << 64))
        rows.append([n, m, str(b), f_down(iv.lower), f_up(iv.upper), iv.upper <= b])
        print(f"{n:>4} {m:>20} {str(b):>24} {f_up(iv.upper):>24}")
    write_csv(os.path.join(args.out_dir, "rigidity.csv"),
              ["n", "m_n", "envelope", "norm_lo", "norm_hi", "envelope_ok"], rows)
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_CERT


def cmd_measure(args) -> int:
    from .rigidity_measure import extend, initial_state, limit_diagnostics, verify_properties

    alpha = _alpha(args)
    seq = _sequence(args, alpha)
    state = initial_state()
    verify_properties(state, seq, threads=args.threads)
    states = [state]
    started = time.monotonic()
    status, message = EXIT_OK, "ok"
    for _ in range(args.depth):
        left = None
        if args.time_budget is not None:
            left = args.time_budget - (time.monotonic() - started)
            if left <= 0:
                status, message = EXIT_RESOURCE, f"time budget exhausted after level {state.level}"
                break
        try:
            state = extend(state, seq, time_budget=left, threads=args.threads)
        except (ResourceLimit, PrecisionExhausted, SequenceTooShort) as exc:
            status, message = EXIT_RESOURCE, f"level {state.level + 1}: {exc}"
            break
        except (RetriesExhausted, VerificationFailed) as exc:
            status, message = EXIT_CERT, f"level {state.level + 1}: {exc}"
            break
        states.append(state)
        print(f"level {state.level}: N = {state.N[-1]}, max|k| ~ 2^{state.measure.max_abs_k.bit_length()}, "
              f"certificates {'pass' if state.certificate.passed else 'FAIL'}")

    out = args.out_dir
    for st in states:
        write_json(os.path.join(out, f"certificate_p{st.level}.json"), st.certificate.to_dict())
    p0s = [p for p in int_list(args.p0) if p <= states[-1].level]
    diag = limit_diagnostics(states, seq, p0_values=p0s, fourier=not args.no_fourier)
    write_csv(os.path.join(out, "diagnostics.csv"),
              ["p", "n", "m_n", "mu_lo", "mu_hi", "fourier_dist_lo", "fourier_dist_hi"],
              [(p, n, m, f_down(lo), f_up(hi), dlo, dhi) for p, n, m, lo, hi, dlo, dhi in diag["rows"]])
    write_csv(os.path.join(out, "masses.csv"), ["p0", "p", "r", "mass", "expected", "ok"],
              [(m["p0"], m["p"], m["r"], m["mass"], m["expected"], m["ok"]) for m in diag["masses"]])
    summary = {
        "alpha": alpha.label,
        "sequence": args.seq,
        "depth_requested": args.depth,
        "depth_reached": states[-1].level,
        "status": message,
        "N_table": diag["N_table"],
        "certificates_pass": all(st.certificate.passed for st in states),
        "fourier_ok": diag["fourier_ok"],
        "masses_ok": diag["masses_ok"],
        "disjoint_ok": diag["disjoint_ok"],
        "min_margins": {
            str(st.level): {k: (None if st.certificate.min_margin(k) is None else f_down(st.certificate.min_margin(k)))
                            for k in ("P1", "P2", "P3")}
            for st in states
        },
    }
    if args.dump_atoms:
        summary["atoms"] = [str(k) for k in states[-1].measure.ks]
    write_json(os.path.join(out, "measure.json"), summary)
    ok = summary["certificates_pass"] and diag["fourier_ok"] and diag["masses_ok"] and diag["disjoint_ok"]
    print(f"depth reached {states[-1].level}/{args.depth}; fourier {diag['fourier_ok']}, "
          f"masses {diag['masses_ok']}, disjoint {diag['disjoint_ok']}; {message}")
    if status != EXIT_OK:
        print(f"stopped: {message}", file=sys.stderr)
        return status
    return EXIT_OK if ok else EXIT_CERT


# -- lemma ---------------------------------------------------------------------------------------

def _kv(text: str) -> dict:
    out = {}
    for part in split_list([text]):
        if "=" not in part:
            raise UsageError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_lemma(args) -> int:
    from .exceptional_seq import parse_theta
    from .trig_poly import (
        birkhoff_direct,
        birkhoff_fourier,
        build_phi_eps,
        build_varphi_l,
        effective_Nprime,
        resonance_bound,
        resonance_witness,
    )

    alpha = _alpha(args)
    l = args.l
    if l < 2:
        raise UsageError("--l must be at least 2")
    eps = as_fraction(args.eps) if args.eps else Fraction(1, 2 * l * l)
    if not 0 < eps <= Fraction(1, 2 * l * l):
        raise UsageError(f"eps = {eps} violates eps <= 1/(2 l^2) = {Fraction(1, 2 * l * l)}")
    phi = build_phi_eps(eps)
    var = build_varphi_l(l)
    out = args.out_dir
    write_json(os.path.join(out, "phi_eps.json"), phi.poly.to_dict())
    write_json(os.path.join(out, "varphi_l.json"), var.poly.to_dict())
    report = {
        "alpha": alpha.label, "l": l, "eps": str(eps), "K": phi.degree, "L": var.degree,
        "phi_eps": [c.to_dict() for c in phi.certificates],
        "varphi_l": [c.to_dict() for c in var.certificates],
    }
    ok = phi.passed and var.passed
    print(f"phi_eps: K = {phi.degree}, " + "; ".join(
        f"{c.region} {c.kind} bound {c.bound:.6g} vs {c.target:.6g} {'ok' if c.passed else 'FAIL'}" for c in phi.certificates))
    print(f"varphi_l: L = {var.degree}, " + "; ".join(
        f"{c.region} {c.kind} bound {c.bound:.6g} vs {c.target:.6g} {'ok' if c.passed else 'FAIL'}" for c in var.certificates))

    if args.crosscheck:
        kv = _kv(args.crosscheck)
        N = int(kv.get("N", "10000"))
        theta = parse_theta(kv.get("theta", "sqrt2-1"), alpha)
        y0 = as_fraction(kv.get("y0", "0"))
        d = birkhoff_direct(phi.poly, var.poly, y0, alpha, theta, N)
        f = birkhoff_fourier(phi.poly, var.poly, y0, alpha, theta, N)
        rel = abs(d.value - f.value) / max(abs(d.value), 1.0)
        agree = rel <= 1e-8
        ok &= agree
        report["crosscheck"] = {"N": N, "theta": theta.label, "y0": str(y0), "direct": repr(d.value),
                                "fourier": repr(f.value), "relative_diff": repr(rel), "agree": agree}
        print(f"Birkhoff N={N}: direct {d.value:.12g}, fourier {f.value:.12g}, rel diff {rel:.2e} "
              f"{'ok' if agree else 'FAIL'}")
    if args.nu:
        nu = as_fraction(args.nu)
        B = resonance_bound(phi.poly, var.poly, nu)
        r = effective_Nprime(l, eps, nu, args.N, alpha, phi=phi, varphi=var)
        report["nprime"] = {"nu": str(nu), "N": str(args.N), "B": repr(B), "Nprime": str(r.Nprime),
                            "count_lower": str(r.count_lower), "gap": r.gap}
        print(f"nu = {nu}: B = {B:.6g}, N' = {r.Nprime} (count >= {r.count_lower})")
        wit = []
        for spec in split_list(args.witness_theta):
            w = resonance_witness(parse_theta(spec, alpha), phi.degree, var.degree, nu, alpha)
            wit.append({"theta": spec, "witness": None if w is None else list(w)})
            print(f"  theta {spec}: witness {w}")
        report["witnesses"] = wit
    write_json(os.path.join(out, "lemma_certificates.json"), report)
    return EXIT_OK if ok else EXIT_CERT


# -- exceptional / density ------------------------------------------------------------------------

def _build_sequence(args, alpha):
    from .exceptional_seq import build_schedule, emit_sequence

    sched = build_schedule(alpha, args.stages, args.mode, cap=args.cap if args.mode == "demo" else None,
                           multiplier=args.multiplier)
    try:
        seq = emit_sequence(sched, block_cap=args.block_cap, budget=args.budget)
    except BlockTooLarge as exc:
        log.warning("%s", exc)
        seq = None
    return sched, seq


def cmd_exceptional(args) -> int:
    from .exceptional_seq import RationalComboTheta, density_scan, grid_cluster_check, parse_theta

    alpha = _alpha(args)
    try:
        grid_thetas = [parse_theta(s, alpha) for s in split_list(args.theta_grid)]
        free_thetas = [parse_theta(s, alpha) for s in split_list(args.theta_free)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for t in grid_thetas:
        if not isinstance(t, RationalComboTheta):
            raise UsageError(f"--theta-grid needs (p/q)*a + r/s forms, got {t.label!r}")
    sched, seq = _build_sequence(args, alpha)
    out = args.out_dir
    for s in sched.stages:
        print(f"stage {s.n}: l={s.l} eps={s.eps} K={s.K} L={s.L} nu~{float(s.nu):.6g} "
              f"block [{s.N}, {s.N_next}) N'={s.Nprime}")
    if seq is None:
        d = sched.to_dict()
        d["blocks"] = None
        d["materialized"] = False
        write_json(os.path.join(out, "sequence.json"), d)
        print("blocks too large to enumerate; schedule written, sequence unmaterialized")
        return EXIT_OK
    data = seq.to_dict()
    data["materialized"] = True
    write_json(os.path.join(out, "sequence.json"), data)
    print(f"{len(seq)} elements ({args.mode} mode{'' if sched.guaranteed else ', Lemma guarantee void'})")
    ok = True
    reports = []
    for t in grid_thetas:
        rep = grid_cluster_check(t, seq, args.eps_star)
        reports.append(rep.to_dict())
        ok &= rep.passed
        print(f"theta {t.label}: {rep.checked} checked, {rep.failures} failures, grid 1/{rep.grid}, "
              f"gap {rep.observed_gap:.6g} >= {float(rep.gap_bound):.6g} {'ok' if rep.passed else 'FAIL'}")
    write_json(os.path.join(out, "clusters.json"), reports)
    rows = density_scan(free_thetas + grid_thetas, seq.elements, int_list(args.prefixes) or None)
    write_csv(os.path.join(out, "density.csv"), ["theta_label", "prefix_len", "max_gap"],
              [(a, n, repr(g)) for a, n, g in rows])
    for t in free_thetas:
        last = [r for r in rows if r[0] == t.label][-1]
        print(f"theta {t.label}: max gap {last[2]:.6g} after {last[1]} points")
    return EXIT_OK if ok else EXIT_CERT


def cmd_density(args) -> int:
    from .exceptional_seq import density_scan, parse_theta

    alpha = _alpha(args)
    try:
        thetas = [parse_theta(s, alpha) for s in split_list(args.thetas)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not thetas:
        raise UsageError("--thetas is required")
    _, seq = _build_sequence(args, alpha)
    if seq is None:
        print("sequence too large to enumerate", file=sys.stderr)
        return EXIT_RESOURCE
    rows = density_scan(thetas, seq.elements, int_list(args.prefixes) or None)
    write_csv(os.path.join(args.out_dir, "density.csv"), ["theta_label", "prefix_len", "max_gap"],
              [(a, n, repr(g)) for a, n, g in rows])
    for a, n, g in rows:
        print(f"{a:>16} {n:>8} {g:.6g}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------------------

def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--alpha", default=d("golden"), help="irrational spec (default golden)")
    p.add_argument("--out-dir", default=d("rigidlab_out"), help="output directory")
    p.add_argument("--precision-cap", type=int, default=d(DEFAULT_PRECISION_CAP), help="max fractional bits")
    p.add_argument("--threads", type=int, default=d(1), help="verification threads")
    p.add_argument("--log-level", default=d("WARNING"), help="logging level")
    p.add_argument("--config", default=d(None), help="key = value config file")


def _schedule_flags(p):
    p.add_argument("--stages", type=int, default=3, help="number of stages n_max")
    p.add_argument("--mode", choices=("demo", "faithful"), default="demo")
    p.add_argument("--cap", type=int, default=10**5, help="demo: max block width")
    p.add_argument("--block-cap", type=int, default=None, help="enumerate at most this much of each block")
    p.add_argument("--budget", type=int, default=10**7, help="widest block enumerated without --block-cap")
    p.add_argument("--multiplier", type=int, default=None, help="nu_n range multiplier (default n+1)")
    p.add_argument("--prefixes", default="", help="prefix lengths for gap tables")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="rigidlab", description="Certified rigidity-sequence laboratory.",
                  formatter_class=argparse.RawDescriptionHelpFormatter, epilog=__doc__.split("Commands:")[1])
    top.add_argument("--version", action="version", version=f"rigidlab {__version__}")
    _globals(top, suppress=False)
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("cf", help="continued-fraction facts")
    _globals(p, suppress=True)
    p.add_argument("--convergents", type=int, default=0, help="print this many convergents")
    p.add_argument("--norms", default="", help="comma list of k for ||k alpha||")
    p.add_argument("--min-norm", default="", help="comma list of K for min_{0<k<=K} ||k alpha||")
    p.add_argument("--bohr", default="", help="eps,A,B: Bohr set on [A, B)")
    p.add_argument("--tol", default="1/1000000000", help="width of certified intervals")
    p.add_argument("--json", action="store_true", help="also write cf.json")

    p = sub.add_parser("rigidity", help="rigidity sequence and envelope")
    _globals(p, suppress=True)
    p.add_argument("--seq", default="denominators", help="denominators | scaled | file:PATH")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--count", type=int, default=20)

    p = sub.add_parser("measure", help="atomic measure construction")
    _globals(p, suppress=True)
    p.add_argument("--seq", default="denominators", help="denominators | scaled | file:PATH")
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--time-budget", type=float, default=None, help="seconds for the whole construction")
    p.add_argument("--p0", default="1,2,3", help="levels for the mass/separation table")
    p.add_argument("--no-fourier", action="store_true", help="skip the Fourier columns")
    p.add_argument("--dump-atoms", action="store_true", help="include the final multipliers in measure.json")

    p = sub.add_parser("lemma", help="test polynomials and Birkhoff sums")
    _globals(p, suppress=True)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--eps", default=None, help="default 1/(2 l^2)")
    p.add_argument("--crosscheck", default="", help="N=...,theta=...,y0=...")
    p.add_argument("--nu", default=None, help="compute B(nu) and N' for this nu")
    p.add_argument("--N", type=int, default=0, help="start index for N'")
    p.add_argument("--witness-theta", nargs="*", default=[], help="thetas for resonance witnesses")

    p = sub.add_parser("exceptional", help="exceptional-set sequence")
    _globals(p, suppress=True)
    _schedule_flags(p)
    p.add_argument("--theta-grid", nargs="*", default=[], help="rational combinations p/q*a+r/s")
    p.add_argument("--theta-free", nargs="*", default=[], help="other thetas (named irrationals)")
    p.add_argument("--eps-star", default=None, help="sub-orbit threshold (default: last block eps)")

    p = sub.add_parser("density", help="gap table for a theta list")
    _globals(p, suppress=True)
    _schedule_flags(p)
    p.add_argument("--thetas", nargs="*", default=[])
    return top


def read_config(path: str) -> dict:
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = line.split("=", 1)
            cfg[k.strip().replace("_", "-")] = v.strip()
    return cfg


def _config_tokens(parser: argparse.ArgumentParser, cfg: dict, command: Optional[str]) -> list:
    """Turn config entries into flags understood by the command's parser."""
    target = parser
    if command:
        target = parser._subparsers._group_actions[0].choices[command]
    known = {opt: a for a in target._actions for opt in a.option_strings}
    toks = []
    for k, v in cfg.items():
        flag = f"--{k}"
        if flag not in known or k == "config":
            raise UsageError(f"unknown config key {k!r}")
        action = known[flag]
        if action.nargs == 0:
            if v.lower() in ("1", "true", "yes", "on"):
                toks.append(flag)
        elif action.nargs in ("*", "+"):
            toks += [flag] + split_list([v])
        else:
            toks += [flag, v]
    return toks


def parse(argv: Sequence[str]):
    parser = build_parser()
    argv = list(argv)
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        cmd = args.command
        idx = argv.index(cmd) + 1 if cmd in argv else len(argv)
        # config flags go first after the command so explicit flags override them
        argv2 = argv[:idx] + _config_tokens(parser, cfg, cmd) + argv[idx:]
        args = parser.parse_args(argv2)
    args._argv = argv
    return parser, args


HANDLERS = {
    "cf": cmd_cf, "rigidity": cmd_rigidity, "measure": cmd_measure,
    "lemma": cmd_lemma, "exceptional": cmd_exceptional, "density": cmd_density,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser, args = parse(argv)
    except UsageError as exc:
        print(f"rigidlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.monotonic()
    try:
        code = HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"rigidlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PrecisionExhausted, ResourceLimit, SequenceTooShort, BlockTooLarge) as exc:
        print(f"rigidlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_RESOURCE
    except (VerificationFailed, CertificationFailed, RetriesExhausted) as exc:
        print(f"rigidlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_CERT
    except (ValueError, OSError) as exc:
        print(f"rigidlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RigidLabError as exc:
        print(f"rigidlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        code = EXIT_RESOURCE
    if args.command != "cf" or args.json:
        write_meta(args, args.command, started, {"exit_code": code})
    return code


if __name__ == "__main__":
    sys.exit(main())
