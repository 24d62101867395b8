"""Command-line front end with reproducible JSON/CSV artifacts.

Every run emits one self-describing document: tool version, seed, the full
parameter set (enough to re-run), the results, and the outcomes of the
invariant checks exercised along the way.  Floats are serialized with 17
significant digits so payloads round-trip exactly; no timestamps are ever
embedded, so identical invocations produce identical bytes.

Exit codes: 0 success, 2 input error, 3 invariant failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, is_dataclass
from fractions import Fraction

import numpy as np

from . import __version__, apcount, bdh, majorant, maynard, verify, windows, wtrick
from .arith import floor_power, tree_sum
from .errors import InputError, InvariantError, PrimelabError

LIST_LIMIT = 10000


def _float_repr(o: float) -> str:
    if o != o:
        return "NaN"
    if o == math.inf:
        return "Infinity"
    if o == -math.inf:
        return "-Infinity"
    return format(o, ".17g")


class _Encoder(json.JSONEncoder):
    """JSON encoder printing every float with 17 significant digits."""

    def iterencode(self, o, _one_shot=False):
        markers = {} if self.check_circular else None
        return json.encoder._make_iterencode(
            markers, self.default, json.encoder.encode_basestring_ascii,
            self.indent, _float_repr, self.key_separator,
            self.item_separator, self.sort_keys, self.skipkeys, False,
        )(o, 0)


def to_jsonable(obj):
    """Recursively convert results (dataclasses, numpy, Fractions) to JSON types."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Fraction):
        return {"fraction": f"{obj.numerator}/{obj.denominator}",
                "value": float(obj)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, frozenset):
        return sorted(obj)
    return obj


def dumps_doc(doc: dict) -> str:
    return json.dumps(to_jsonable(doc), cls=_Encoder, sort_keys=True, indent=2) + "\n"


def _window_params(p: dict) -> tuple[int, int, float | None]:
    x = p["x"]
    theta = p.get("theta")
    if theta is not None:
        return x, floor_power(x, theta), theta
    if p.get("H") is None:
        raise InputError("provide either --H or --theta")
    return x, p["H"], None


def _listing(values) -> dict:
    vals = list(values)
    if len(vals) > LIST_LIMIT:
        return {"count": len(vals), "truncated": True,
                "head": to_jsonable(vals[:LIST_LIMIT])}
    return {"count": len(vals), "truncated": False, "items": to_jsonable(vals)}


# ---------------------------------------------------------------------------
# subcommand implementations (params dict -> results/checks dicts)


def _cmd_sieve(p: dict) -> dict:
    x, H, theta = _window_params(p)
    pw = windows.sieve_window(x, H, theta)
    return {
        "results": {
            "x": x, "H": H, "theta": theta,
            "n_primes": pw.n_primes,
            "prime_offsets": _listing(pw.prime_offsets.tolist()),
            "prime_powers": _listing(list(pw.prime_powers)),
            "psi_delta": windows.psi_delta(pw),
            "theta_delta": windows.theta_delta(pw),
        },
        "checks": {},
    }


def _cmd_wtrick(p: dict) -> dict:
    x, H, theta = _window_params(p)
    pw = windows.sieve_window(x, H, theta)
    mod = wtrick.build_modulus(p["w_cut"], p["extra_factor"])
    b, score = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    R = float(block.N) ** p["eta"]
    f = wtrick.prime_weights(block, pw, R, prime_only=p["prime_only"])
    delta = wtrick.density(f)
    total = wtrick.pigeonhole_total(pw, mod)
    pigeonhole_ok = score * mod.phi_W >= total * (1 - 1e-12) - 1e-12
    return {
        "results": {
            "modulus": {"w_cut": mod.w_cut, "extra_factor": mod.extra_factor,
                        "W": mod.W, "phi_W": mod.phi_W},
            "b": b, "score": score, "m0": block.m0, "N": block.N,
            "eta": p["eta"], "R": R, "cap_X": x,
            "density": delta, "density_times_logR": delta * math.log(R),
        },
        "checks": {"pigeonhole": pigeonhole_ok},
    }


def _cmd_majorant(p: dict) -> dict:
    x, H, theta = _window_params(p)
    pw = windows.sieve_window(x, H, theta)
    mod = wtrick.build_modulus(p["w_cut"], p["extra_factor"])
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    table = majorant.divisor_sum_table(block, p["eta"])
    raw = majorant.nu_weights(table)
    f = wtrick.prime_weights(block, pw, table.R, prime_only=True)
    maj = majorant.majorization_check(f, raw)
    moment_table = (majorant.nu_weights(table, normalize=True)
                    if p["normalize"] else raw)
    shifts = [int(s) for s in p["shifts"].split(",")] if p["shifts"] else [0, 1]
    mom = majorant.moment_diagnostic(moment_table, shifts,
                                     sample_count=p["samples"], seed=p["seed"])
    return {
        "results": {
            "b": b, "N": block.N, "eta": p["eta"], "R": table.R, "cap_X": x,
            "mean_nu_raw": tree_sum(raw.nu) / block.N,
            "normalization": moment_table.normalization,
            "majorization": asdict(maj),
            "moment": asdict(mom),
        },
        "checks": {"majorization_holds": maj.holds},
    }


def _cmd_apcount(p: dict) -> dict:
    x, H, theta = _window_params(p)
    pw = windows.sieve_window(x, H, theta)
    mod = wtrick.build_modulus(p["w_cut"], p["extra_factor"])
    b, _ = wtrick.select_residue(pw, mod)
    block = wtrick.align_block(pw, mod, b)
    R = float(block.N) ** p["eta"]
    f = wtrick.prime_weights(block, pw, R)
    rep = apcount.ap_report(pw, block, f, R, p["k"],
                            C_k=p["C_k"], c_k_rel_sz=p["c_k"])
    count_all = apcount.count_prime_aps(pw, block, p["k"], "all")
    led = rep.lower_bound_ledger
    return {
        "results": {
            "b": b, "N": block.N, "R": R,
            "report": asdict(rep),
            "count_prime_aps_all_r": count_all,
        },
        "checks": {
            "weight_cap": led["weight_cap_holds"],
            "unweighted_lower": led["unweighted_lower_holds"],
            "box_monotone": rep.count_prime_aps <= count_all,
        },
    }


def _cmd_tuple(p: dict) -> dict:
    survivors, residues = maynard.greedy_survivors(p["span"], p["y"], p["q"])
    tup = maynard.build_tuple(survivors, p["k"], p["q"], p["a"],
                              residues, p["y"])
    mod = wtrick.build_modulus(p["w_cut"], p["q"])
    nu = maynard.crt_residue(tup, mod)
    ok, _ = maynard.is_admissible(tup.shifts)
    return {
        "results": {
            "survivors": _listing(survivors),
            "greedy_residues": {str(k): v for k, v in residues.items()},
            "shifts": list(tup.shifts), "span_L": tup.span_L,
            "W": mod.W, "crt_residue": nu,
        },
        "checks": {"admissible": ok},
    }


def _cmd_maynard_opt(p: dict) -> dict:
    F, M = maynard.optimize_F(p["k"], p["degree"])
    I, J, M_again = maynard.sieve_integrals(F)
    return {
        "results": {
            "k": p["k"], "degree": p["degree"],
            "M_k": M, "I_k": I, "J_sum": sum(J, Fraction(0)),
            "coefficients": [
                {"exponents": list(e), "coefficient": c}
                for e, c in sorted(F.coeffs.items())
            ],
        },
        "checks": {"ratio_recomputed": M == M_again},
    }


def _cmd_cluster(p: dict) -> dict:
    survivors, residues = maynard.greedy_survivors(p["span"], p["y"], p["q"])
    tup = maynard.build_tuple(survivors, p["k"], p["q"], p["a"],
                              residues, p["y"])
    mod = wtrick.build_modulus(p["w_cut"], p["q"])
    nu = maynard.crt_residue(tup, mod)
    F = maynard.SieveF.one_minus_sum(p["k"])
    rep = maynard.cluster_search(p["x_lo"], p["x_hi"], tup, mod, nu,
                                 F, p["R"])
    out = {"tuple_shifts": list(tup.shifts), "W": mod.W,
           "crt_residue": nu, "cluster": asdict(rep)}
    if p["with_sums"]:
        sums = maynard.sieve_sums(p["x_lo"], p["x_hi"], mod, nu, tup, F, p["R"])
        out["sums"] = asdict(sums)
    return {
        "results": out,
        "checks": {"congruence": rep.congruence_verified,
                   "interval": rep.interval_verified},
    }


def _cmd_bdh(p: dict) -> dict:
    x, H, theta = _window_params(p)
    pw = windows.sieve_window(x, H, theta)
    rep = bdh.bdh_variance(pw, p["Q"], p["A"])
    results = asdict(rep)
    if not p["per_q"]:
        results.pop("per_q")
    split_ok = abs(rep.S_total - (rep.S_star + rep.S_zero)) == 0.0
    return {
        "results": results,
        "checks": {
            "split_total": split_ok,
            "psi_pp_bound": rep.S_star <= 2 * rep.S_psi + 2 * rep.S_pp + 1e-9,
        },
    }


def _cmd_empty_class(p: dict) -> dict:
    x, H, theta = _window_params(p)
    pw = windows.sieve_window(x, H, theta)
    subclass = None
    if p["subclass_m"] is not None:
        residues = frozenset(int(r) for r in p["subclass_residues"].split(","))
        subclass = (p["subclass_m"], residues)
    rep = bdh.empty_class_bound(pw, p["Q"], p["delta_class"], subclass)
    deviation = (abs(rep.mertens_sum - rep.mertens_reference)
                 if rep.mertens_reference is not None else None)
    return {
        "results": asdict(rep),
        "checks": {"witness_count": len(rep.witnesses),
                   "mertens_deviation": deviation},
    }


def _cmd_scan(p: dict) -> dict:
    table = bdh.variance_scan(p["X"], p["theta"], p["B"], p["A"],
                              p["samples"], p["seed"])
    return {
        "results": asdict(table),
        "checks": {"ratios_finite": all(math.isfinite(r.ratio)
                                        for r in table.rows)},
    }


_COMMANDS = {
    "sieve": _cmd_sieve,
    "wtrick": _cmd_wtrick,
    "majorant": _cmd_majorant,
    "apcount": _cmd_apcount,
    "tuple": _cmd_tuple,
    "maynard-opt": _cmd_maynard_opt,
    "cluster": _cmd_cluster,
    "bdh": _cmd_bdh,
    "empty-class": _cmd_empty_class,
    "scan": _cmd_scan,
}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="primelab",
        description="Desk-scale experiments on primes in short windows.",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def add_common(sp):
        sp.add_argument("--out", type=str, default=None,
                        help="output path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"), default=None)

    def add_window(sp):
        sp.add_argument("--x", type=int, required=True)
        sp.add_argument("--H", type=int, default=None)
        sp.add_argument("--theta", type=float, default=None)

    sp = sub.add_parser("sieve", help="sieve a window (x, x+H]")
    add_window(sp)
    add_common(sp)

    sp = sub.add_parser("wtrick", help="residue selection and block weights")
    add_window(sp)
    sp.add_argument("--w-cut", type=float, default=wtrick.DEFAULT_W_CUT)
    sp.add_argument("--extra-factor", type=int, default=1)
    sp.add_argument("--eta", type=float, default=0.05)
    sp.add_argument("--prime-only", action="store_true")
    add_common(sp)

    sp = sub.add_parser("majorant", help="divisor-sum majorant diagnostics")
    add_window(sp)
    sp.add_argument("--w-cut", type=float, default=wtrick.DEFAULT_W_CUT)
    sp.add_argument("--extra-factor", type=int, default=1)
    sp.add_argument("--eta", type=float, default=0.05)
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--shifts", type=str, default=None,
                    help="comma-separated index shifts for the moment")
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    add_common(sp)

    sp = sub.add_parser("apcount", help="weighted and exact AP counts")
    add_window(sp)
    sp.add_argument("--w-cut", type=float, default=wtrick.DEFAULT_W_CUT)
    sp.add_argument("--extra-factor", type=int, default=1)
    sp.add_argument("--eta", type=float, default=0.05)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--C-k", dest="C_k", type=float, default=1.0)
    sp.add_argument("--c-k", dest="c_k", type=float, default=1.0)
    add_common(sp)

    sp = sub.add_parser("tuple", help="greedy admissible tuple and CRT residue")
    sp.add_argument("--span", type=int, required=True)
    sp.add_argument("--y", type=int, required=True)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--w-cut", type=float, default=wtrick.DEFAULT_W_CUT)
    add_common(sp)

    sp = sub.add_parser("maynard-opt", help="optimize the sieve ratio M_k")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--degree", type=int, default=3)
    add_common(sp)

    sp = sub.add_parser("cluster", help="scan for prime clusters on a progression")
    sp.add_argument("--x-lo", type=int, required=True)
    sp.add_argument("--x-hi", type=int, required=True)
    sp.add_argument("--span", type=int, required=True)
    sp.add_argument("--y", type=int, required=True)
    sp.add_argument("--q", type=int, default=1)
    sp.add_argument("--a", type=int, default=0)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--w-cut", type=float, default=5.0)
    sp.add_argument("--R", type=float, required=True)
    sp.add_argument("--with-sums", action="store_true")
    add_common(sp)

    sp = sub.add_parser("bdh", help="progression variance over moduli q <= Q")
    add_window(sp)
    sp.add_argument("--Q", type=int, required=True)
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--per-q", action="store_true")
    add_common(sp)

    sp = sub.add_parser("empty-class", help="empty-class variance lower bound")
    add_window(sp)
    sp.add_argument("--Q", type=int, required=True)
    sp.add_argument("--delta-class", type=float, default=1.0)
    sp.add_argument("--subclass-m", type=int, default=None)
    sp.add_argument("--subclass-residues", type=str, default=None)
    add_common(sp)

    sp = sub.add_parser("scan", help="variance ratio scan over sampled x")
    sp.add_argument("--X", type=int, required=True)
    sp.add_argument("--theta", type=float, required=True)
    sp.add_argument("--B", type=float, default=1.0)
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    add_common(sp)

    sp = sub.add_parser("verify", help="run the invariant/oracle suite")
    sp.add_argument("--only", type=str, default=None,
                    help="restrict to one module group (e.g. bdh)")
    sp.add_argument("--corrupt-lambda", action="store_true",
                    help="test hook: corrupt a weight to force a failure")
    add_common(sp)

    return ap


def run_params(subcommand: str, params: dict) -> dict:
    """Dispatch a parsed parameter dict; returns the full output document."""
    body = _COMMANDS[subcommand](params)
    return {
        "tool": "primelab",
        "version": __version__,
        "seed": params.get("seed", 0),
        "config": {"subcommand": subcommand, "params": params},
        "results": body["results"],
        "checks": body["checks"],
    }


def _scan_csv(doc: dict) -> str:
    buf = io.StringIO()
    buf.write(f"# tool=primelab version={__version__}\n")
    cfg = doc["config"]["params"]
    buf.write("# config " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg)) + "\n")
    res = doc["results"]
    buf.write(f"# max_ratio={_float_repr(res['max_ratio'])}"
              f" mean_ratio={_float_repr(res['mean_ratio'])}\n")
    buf.write("x,H,Q,S_total,ratio\n")
    for row in res["rows"]:
        buf.write(f"{row['x']},{row['H']},{row['Q']},"
                  f"{_float_repr(row['S_total'])},{_float_repr(row['ratio'])}\n")
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(argv=None) -> int:
    """Parse argv, dispatch, and write the output artifact; returns exit code."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    params = {k: v for k, v in vars(ns).items()
              if k not in ("subcommand", "out", "format")}
    try:
        if ns.subcommand == "verify":
            results = verify.run_checks(only=ns.only,
                                        corrupt_lambda=ns.corrupt_lambda)
            all_passed = all(r.passed for r in results)
            width = max((len(r.key) for r in results), default=10)
            lines = [f"{r.key.ljust(width)}  {'PASS' if r.passed else 'FAIL'}  {r.detail}"
                     for r in results]
            matrix = "\n".join(lines) + "\n"
            doc = {
                "tool": "primelab", "version": __version__, "seed": 0,
                "config": {"subcommand": "verify", "params": params},
                "checks": [asdict(r) for r in results],
                "all_passed": all_passed,
            }
            if ns.out:
                _emit(dumps_doc(doc), ns.out)
                sys.stdout.write(matrix)
            else:
                sys.stdout.write(matrix)
                sys.stdout.write(dumps_doc(doc))
            if not all_passed:
                failing = next(r.key for r in results if not r.passed)
                sys.stderr.write(f"verify failed at {failing}\n")
                return 3
            return 0

        doc = run_params(ns.subcommand, params)
        fmt = ns.format or ("csv" if ns.subcommand == "scan" else "json")
        if fmt == "csv":
            if ns.subcommand != "scan":
                raise InputError("csv output is only defined for scan")
            _emit(_scan_csv(to_jsonable(doc)), ns.out)
        else:
            _emit(dumps_doc(doc), ns.out)
        return 0
    except InvariantError as exc:
        sys.stderr.write(f"invariant failure: {exc}\n")
        return 3
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 2
    except PrimelabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
