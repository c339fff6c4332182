"""linhyp command line.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from math import comb

from . import asymptotics as asy
from .config import OUTPUTS, RunConfig, load_config
from .core import (
    Regime,
    build,
    clusters,
    dumps_lh,
    is_linear,
    load_lh,
    profile_of,
    property_report,
    thresholds,
)
from .errors import InputError, LinhypError
from .exact import (
    count_linear,
    count_linear_containing,
    count_linear_vector,
    exact_binomial_linearity,
    profile_census,
)


def _big(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return str(x)


def _exp(x: float) -> float:
    return math.exp(min(x, 700.0))


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse {text!r} as a number") from None


def _parse_edges(text: str) -> list[tuple[int, ...]]:
    """'1,2,3;4,5,6' -> [(1,2,3), (4,5,6)]; empty string -> []."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            out.append(tuple(int(v) for v in chunk.split(",")))
        except ValueError:
            raise InputError(f"bad edge {chunk!r}") from None
    return out


def _flatten(obj, prefix: str = "") -> list[tuple[str, object]]:
    if not isinstance(obj, dict):
        return [(prefix, obj)]
    items = []
    for k in sorted(obj):
        items.extend(_flatten(obj[k], f"{prefix}.{k}" if prefix else str(k)))
    return items


def emit(obj, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        stream.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        return
    rows = [["key", "value"]]
    rows += [[k, json.dumps(v) if isinstance(v, list) else v] for k, v in _flatten(obj)]
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        stream.write(buf.getvalue())
    else:
        stream.writelines(f"{k}: {v}\n" for k, v in rows[1:])


# --- subcommands -----------------------------------------------------------------------

def cmd_count(args, cfg: RunConfig) -> tuple[dict, int]:
    n, r, m = args.n, args.r, args.m
    N = comb(n, r) if 0 <= r <= n else 0
    if r < 1 or n < r or not 0 <= m <= N:
        raise InputError(f"need 1 <= r <= n and 0 <= m <= C(n,r); got n={n}, r={r}, m={m}")
    out: dict = {"n": n, "r": r, "m": m}
    if args.method in ("exact", "both"):
        out["exact"] = str(count_linear(n, r, m, node_cap=cfg.dfs_node_cap, threads=cfg.threads))
    if args.method in ("asym", "both"):
        val, es = asy.linear_log_count(n, r, m, args.form)
        E, terms = asy.linear_count_exponent(n, r, m)
        out.update(asy.formula_json(val.ln_mag, es, None, {"E": E, **terms}))
        out["asym_ln"] = val.ln_mag
        out["form"] = args.form
    return out, 0


def cmd_prob_linear(args, cfg: RunConfig) -> tuple[dict, int]:
    n, r = args.n, args.r
    out: dict = {"n": n, "r": r}
    if (args.m is None) == (args.p is None):
        raise InputError("give exactly one of --m, --p")
    if args.m is not None:
        m = args.m
        out["m"] = m
        if args.method in ("exact", "both"):
            N = comb(n, r)
            if not 0 <= m <= N:
                raise InputError(f"m={m} outside 0..{N}")
            L = count_linear(n, r, m, node_cap=cfg.dfs_node_cap, threads=cfg.threads)
            P = Fraction(L, comb(N, m))
            out["exact"] = _big(P)
            out["exact_float"] = float(P)
        if args.method in ("asym", "both"):
            E, terms = asy.linear_count_exponent(n, r, m)
            out.update(asy.formula_json(E, asy.linear_count_error_scale(n, r, m), None, terms))
    else:
        p = _fraction(args.p)
        out["p"] = float(p)
        if args.method in ("exact", "both"):
            res = exact_binomial_linearity(n, r, p, m_cut=args.m_cut, node_cap=cfg.dfs_node_cap)
            out.update(exact_float=res.probability, exact=_big(res.exact), truncated=res.truncated,
                       m_cut=res.m_cut, tail_bound=res.tail_bound)
        if args.method in ("asym", "both"):
            vals = asy.binomial_linear_values(n, r, p)
            val, es, case = asy.binomial_linear_log_prob(n, r, p, args.case)
            terms = {f"{k}.value_ln": v[0] for k, v in vals.items()}
            out.update(asy.formula_json(val, es, case, terms))
    return out, 0


def _load_K(args, n: int, r: int):
    if args.k_file:
        return load_lh(args.k_file)
    return build(n, r, _parse_edges(args.K or ""))


def cmd_contain(args, cfg: RunConfig) -> tuple[dict, int]:
    n, r, m = args.n, args.r, args.m
    K = _load_K(args, n, r)
    out: dict = {"n": n, "r": r, "m": m, "k": K.m}
    if args.method in ("exact", "both"):
        num = count_linear_containing(n, r, m, K, node_cap=cfg.dfs_node_cap, threads=cfg.threads)
        den = count_linear(n, r, m, node_cap=cfg.dfs_node_cap, threads=cfg.threads)
        out["exact_containing"] = str(num)
        out["exact_linear"] = str(den)
        if den:
            out["exact"] = _big(Fraction(num, den))
            out["exact_float"] = num / den
    if args.method in ("asym", "both"):
        val, es = asy.containment_log_prob(n, r, m, K.m)
        out.update(asy.formula_json(val, es, None, {}))
    return out, 0


def cmd_clusters(args, cfg: RunConfig) -> tuple[dict, int]:
    H = load_lh(args.input)
    cls = clusters(H)
    prof = profile_of(cls)
    out = {
        "n": H.n, "r": H.r, "m": H.m,
        "linear": is_linear(H),
        "profile": dict(zip(("h1", "h2", "h3", "h4", "other"), prof.as_tuple())),
        "clusters": [{"kind": c.kind, "span": c.vertex_span,
                      "edges": [list(H.edges[j]) for j in c.edge_indices]} for c in cls],
    }
    if H.m:
        ts = thresholds(H.n, H.r, H.m, args.regime)
        rep = property_report(H, ts.regime, ts)
        out.update(regime=ts.regime.value, properties=rep.properties, in_plus=rep.in_plus,
                   in_plusplus=rep.in_plusplus,
                   thresholds={"m0_star": ts.m0_star, "m0_cap": ts.m0_cap, "m1": ts.m1, "m2": ts.m2,
                               "m3": ts.m3, "m4": ts.m4})
    return out, 0


def cmd_sample(args, cfg: RunConfig) -> tuple[dict, int]:
    from .montecarlo import sample_many

    if (args.m is None) == (args.p is None):
        raise InputError("give exactly one of --m, --p")
    p = float(_fraction(args.p)) if args.p is not None else None
    os.makedirs(args.out, exist_ok=True)
    files = []
    for t, H in sample_many(args.n, args.r, cfg.seed, args.count, m=args.m, p=p, linear_only=args.linear_only):
        path = os.path.join(args.out, f"sample_{t:06d}.lh")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps_lh(H))
        files.append({"trial": t, "file": os.path.basename(path), "m": H.m, "linear": is_linear(H)})
    return {"n": args.n, "r": args.r, "seed": cfg.seed, "samples": files}, 0


def cmd_estimate(args, cfg: RunConfig) -> tuple[dict, int]:
    from . import montecarlo as mc

    n, r = args.n, args.r
    seed, threads = cfg.seed, cfg.threads
    p = float(_fraction(args.p)) if args.p is not None else None
    predicted = None
    if args.what == "linearity":
        est = mc.estimate_linearity(n, r, m=args.m, p=p, trials=args.trials, seed=seed, threads=threads)
        if r >= 3:
            if args.m is not None:
                predicted = _exp(asy.linear_count_exponent(n, r, args.m)[0])
            else:
                predicted = _exp(asy.binomial_linear_log_prob(n, r, p)[0])
        out = est.to_json()
        if predicted is not None:
            out["predicted"] = predicted
    elif args.what == "profile":
        if args.m is None:
            raise InputError("--what profile needs --m")
        pe = mc.estimate_profile_distribution(n, r, args.m, args.trials, seed, args.regime, threads)
        out = {"regime": pe.regime.value, "plus": pe.plus.to_json(), "plusplus": pe.plusplus.to_json(),
               "profiles": {",".join(map(str, k.as_tuple())): v.to_json() for k, v in pe.profiles.items()}}
        est = pe.plusplus
    elif args.what == "moments":
        if p is None:
            raise InputError("--what moments needs --p")
        cm = mc.estimate_conditional_moments(n, r, p, args.trials, seed, threads)
        out = {"mean": cm.mean.to_json(), "variance": cm.variance.to_json(),
               "acceptance_rate": cm.acceptance_rate, "accepted": cm.accepted}
        mean_pred, var_pred = asy.conditional_edge_params(n, r, p)
        out["predicted"] = {"mean": mean_pred, "variance": var_pred}
        est, predicted = cm.mean, mean_pred
    else:
        if args.m is None:
            raise InputError("--what containment needs --m")
        K = _load_K(args, n, r)
        est = mc.estimate_containment(n, r, args.m, K, args.trials, seed, threads)
        out = est.to_json()
        if r >= 3:
            predicted = _exp(asy.containment_log_prob(n, r, args.m, K.m)[0])
            out["predicted"] = predicted
    if args.figure:
        from .figures import estimate_bar

        estimate_bar(args.what, est.point, est.stderr, predicted, args.figure)
    return out, 0


def cmd_audit(args, cfg: RunConfig) -> tuple[dict, int]:
    from .switching import double_count_audit

    try:
        prof = tuple(int(x) for x in args.profile.split(","))
    except ValueError:
        raise InputError(f"bad profile {args.profile!r}") from None
    rep = double_count_audit(args.n, args.r, args.m, args.kind, prof, cap=cfg.census_cap)
    out = rep.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out, 0 if rep.equal and rep.sandwich_ok else 1


GOLDEN_VECTORS = ((3, 3), (4, 3), (5, 3), (6, 3), (7, 3), (8, 3), (9, 4), (10, 4))
GOLDEN_CENSUS = ((5, 3, 2), (6, 3, 2), (6, 3, 3), (7, 3, 3), (8, 3, 3))


def golden_tables(cfg: RunConfig) -> dict[str, list[list]]:
    lin = [["n", "r", "m", "linear_count"]]
    for n, r in GOLDEN_VECTORS:
        for m, c in enumerate(count_linear_vector(n, r, None, cfg.dfs_node_cap)):
            lin.append([n, r, m, str(c)])
    cen = [["n", "r", "m", "regime", "h1", "h2", "h3", "h4", "other", "in_plus", "in_plusplus", "count"]]
    for n, r, m in GOLDEN_CENSUS:
        tab = profile_census(n, r, m, cap=cfg.census_cap)
        for row in tab.rows():
            cen.append([n, r, m, tab.regime.value, *row[:5], int(row[5]), int(row[6]), str(row[7])])
    return {"linear_counts.csv": lin, "census.csv": cen}


def cmd_golden(args, cfg: RunConfig) -> tuple[dict, int]:
    os.makedirs(args.out, exist_ok=True)
    written = []
    for name, rows in golden_tables(cfg).items():
        path = os.path.join(args.out, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        written.append({"file": name, "rows": len(rows) - 1})
    return {"out": args.out, "files": written}, 0


def cmd_verify(args, cfg: RunConfig) -> tuple[dict, int]:
    from . import verify

    results = verify.run_suite(args.suite, cfg)
    for res in results:
        print(res.line(), file=sys.stderr)
    report = verify.report_json(results, cfg, args.suite)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
        base = os.path.splitext(args.report)[0]
        with open(base + ".csv", "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(verify.report_rows(results))
        if args.figures:
            from .figures import render_report

            render_report(results, os.path.dirname(os.path.abspath(args.report)), cfg.tolerance_multiplier)
    elif args.figures:
        from .figures import render_report

        render_report(results, os.getcwd(), cfg.tolerance_multiplier)
    return report, 0 if report["passed"] else 1


# --- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=OUTPUTS, default=None, help="output format (default json)")
    common.add_argument("--config", default=None, help="key=value config file")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tolerance-multiplier", type=float, default=None)

    ap = argparse.ArgumentParser(prog="linhyp", description="Linear hypergraph enumeration toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def nr(p):
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--r", type=int, required=True)

    p = sub.add_parser("count", parents=[common], help="count linear r-graphs with m edges")
    nr(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--method", choices=("exact", "asym", "both"), default="both")
    p.add_argument("--form", choices=("binomial", "poisson"), default="binomial")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("prob-linear", parents=[common], help="probability that a random r-graph is linear")
    nr(p)
    p.add_argument("--m", type=int)
    p.add_argument("--p")
    p.add_argument("--method", choices=("exact", "asym", "both"), default="asym")
    p.add_argument("--case", choices=("small_m0", "large_m0"), default=None)
    p.add_argument("--m-cut", type=int, default=None)
    p.set_defaults(func=cmd_prob_linear)

    p = sub.add_parser("contain", parents=[common], help="probability that a fixed linear K lies in H")
    nr(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--K", default=None, help="edges as '1,2,3;4,5,6'")
    p.add_argument("--k-file", default=None, help=".lh file holding K")
    p.add_argument("--method", choices=("exact", "asym", "both"), default="both")
    p.set_defaults(func=cmd_contain)

    p = sub.add_parser("clusters", parents=[common], help="cluster profile and property report of a .lh file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--regime", choices=[x.value for x in Regime], default=None)
    p.set_defaults(func=cmd_clusters)

    p = sub.add_parser("sample", parents=[common], help="write seeded random r-graphs as .lh files")
    nr(p)
    p.add_argument("--m", type=int)
    p.add_argument("--p")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--linear-only", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo estimates")
    nr(p)
    p.add_argument("--what", choices=("linearity", "profile", "moments", "containment"), default="linearity")
    p.add_argument("--m", type=int)
    p.add_argument("--p")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--K", default=None)
    p.add_argument("--k-file", default=None)
    p.add_argument("--regime", choices=[x.value for x in Regime], default=None)
    p.add_argument("--figure", default=None, help="also write a PNG of the estimate")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("audit", parents=[common], help="switching double-count audit")
    nr(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kind", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--profile", required=True, help="h1,h2,h3,h4")
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("golden", parents=[common], help="regenerate golden CSV tables")
    p.add_argument("--out", default="golden")
    p.set_defaults(func=cmd_golden)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance battery")
    p.add_argument("--suite", choices=("quick", "all"), default="quick")
    p.add_argument("--report", default=None, help="JSON report path; a CSV is written next to it")
    p.add_argument("--figures", action="store_true", help="render PNG figures next to the report")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, threads=args.threads, seed=args.seed,
                          tolerance_multiplier=args.tolerance_multiplier, output=args.output)
        obj, code = args.func(args, cfg)
    except LinhypError as exc:
        print(f"linhyp: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"linhyp: error: {exc}", file=sys.stderr)
        return 2
    emit(obj, cfg.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
