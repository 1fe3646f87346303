"""``cpmeans`` command-line interface.

Exit codes: 0 when every asserted property holds, 2 on a violation or
finding (including a located counterexample), 1 on usage or config errors.
"""
import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import ContractError, DomainError, ParameterError, QuadratureError, log_grid
from .functions import Order, catalog_samples, check_standard, compare_sqrt, parse_function
from .integral import crosscheck
from .io import ConfigError, load_config, read_matrix
from .linalg import inverse_mean_matrix, mean_matrix, psd_check
from .search import SearchSpec, find_negative_T, fmt, scan_mean_matrix_positivity, scan_positivity
from .superop import hadamard_map, cp_check, monotonicity_sweep

OK, FINDING, USAGE = 0, 2, 1

# acceptance tolerances per cross-check form
CROSSCHECK_TOL = {
    "arith-integral": 1e-7,
    "log-integral": 1e-7,
    "heinz-sylvester": 1e-7,
    "gamma-compose": 1e-7,
    "wyd-double": 1e-5,
    "sqrt-double-exp": 1e-5,
    "phas": 1e-3,
}
MONOTONICITY_TOL = 1e-8


class UsageError(Exception):
    pass


def default_monotone_fns(num=3):
    """Operator-monotone catalog members used by monotonicity sweeps."""
    return [str(f) for f in catalog_samples(num) if f.operator_monotone_claimed]


# output helpers

def _rows_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def _emit(args, text, meta):
    if args.out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out = Path(args.out)
    out.write_text(text if text.endswith("\n") else text + "\n")
    meta = {"command": args.command, "version": __version__, "created": datetime.now(timezone.utc).isoformat(), **meta}
    out.with_name(out.name + ".meta.json").write_text(json.dumps(meta, indent=2, default=str) + "\n")


def _round6(x):
    return f"{x:.6g}" if isinstance(x, float) else str(x)


def _table(pairs):
    width = max(len(k) for k, _ in pairs)
    return "\n".join(f"{k:<{width}}  {_round6(v)}" for k, v in pairs)


def _spectrum(values):
    try:
        lam = np.array([float(v) for v in values])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if lam.size == 0:
        raise UsageError("a spectrum is required")
    return lam


# subcommands

def cmd_check_function(args):
    fn = parse_function(args.fn)
    grid = log_grid(args.grid_lo, args.grid_hi, args.grid_num)
    tol = 1e-12 if args.tol is None else args.tol
    rep = check_standard(fn, grid, tol)
    cmp = compare_sqrt(fn, grid, tol)
    ok = rep.ok and cmp.order != Order.INCOMPARABLE
    record = {
        "fn": str(fn),
        "f1_defect": rep.f1_defect,
        "symmetry_defect": rep.symmetry_defect,
        "bound_checked": rep.bound_checked,
        "bound_violations": len(rep.bound_violations),
        "sqrt_order": cmp.order.value,
        "operator_monotone_claimed": fn.operator_monotone_claimed,
        "positive_T_claimed": fn.positive_T_claimed,
        "status": "PASS" if ok else "FINDING",
    }
    if args.format == "json":
        text = json.dumps(record)
    elif args.format == "csv":
        text = _rows_csv(list(record), [record])
    else:
        text = _table(list(record.items()))
    _emit(args, text, {"fn": str(fn)})
    return OK if ok else FINDING


def _matrix_input(args):
    if args.matrix_file:
        if args.fn is not None or args.lam:
            raise UsageError("give either a function and spectrum or --matrix-file")
        return None, read_matrix(args.matrix_file)
    if args.fn is None:
        raise UsageError("a function string is required")
    fn = parse_function(args.fn)
    lam = _spectrum(args.lam)
    return fn, (mean_matrix if args.mean_matrix else inverse_mean_matrix)(fn, lam)


def _psd_record(rep):
    tol = rep.tol_used
    return {
        "psd": rep.is_psd,
        "min_eig": rep.min_eig,
        "witness": None if rep.witness is None else [float(np.real(v)) for v in rep.witness],
        "form_value": rep.form_value,
        "tol": tol,
    }


def cmd_psd(args):
    fn, M = _matrix_input(args)
    rep = psd_check(M, 1e-10 if args.tol is None else args.tol)
    w = np.linalg.eigvalsh(M)
    rank = int(np.sum(w > rep.tol_used))
    record = {"fn": None if fn is None else str(fn), "matrix": "X" if args.mean_matrix else "T", "rank": rank, **_psd_record(rep)}
    if args.format == "json":
        text = json.dumps(record)
    else:
        verdict = ("PSD" if rep.is_psd else "NOT PSD") + (f" rank-{rank}" if rep.is_psd and rank < M.shape[0] else "")
        pairs = [("verdict", verdict), ("min_eig", rep.min_eig), ("rank", rank)]
        if rep.witness is not None:
            pairs += [("witness", " ".join(_round6(float(np.real(v))) for v in rep.witness)), ("form_value", rep.form_value)]
        text = _table(pairs)
    _emit(args, text, {"fn": record["fn"]})
    return OK if rep.is_psd else FINDING


def cmd_cp(args):
    fn, T = _matrix_input(args)
    tol = 1e-10 if args.tol is None else args.tol
    prep = psd_check(T, tol)
    crep = cp_check(hadamard_map(T), tol)
    agree = prep.is_psd == crep.is_psd
    record = {
        "fn": None if fn is None else str(fn),
        "t_psd": prep.is_psd,
        "t_min_eig": prep.min_eig,
        "choi_psd": crep.is_psd,
        "choi_min_eig": crep.min_eig,
        "agree": agree,
    }
    if args.format == "json":
        text = json.dumps(record)
    else:
        state = "completely positive" if crep.is_psd else "not completely positive"
        text = _table([(k, v) for k, v in record.items()] + [("verdict", f"{'agree' if agree else 'DISAGREE'}, {state}")])
    _emit(args, text, {"fn": record["fn"]})
    return OK if agree and crep.is_psd else FINDING


_SCAN_KEYS = {
    "T": {"kind", "family", "params", "n", "spectra", "seed", "tol"},
    "X": {"kind", "family", "params", "n", "spectra", "seed", "tol"},
    "monotonicity": {"kind", "fns", "ns", "ms", "seeds", "n_kraus", "tol"},
    "search": {"kind", "fn", "n", "lam_range", "strategy", "budget", "seed", "criterion"},
}


def _param_grid(value):
    if value is None:
        return None
    if isinstance(value, dict):
        extra = set(value) - {"start", "stop", "num"}
        if extra:
            raise ConfigError(f"unknown params keys: {', '.join(sorted(extra))}")
        return np.linspace(float(value["start"]), float(value["stop"]), int(value["num"]))
    return [float(v) for v in value]


def _over(cfg, key, flag, default):
    return flag if flag is not None else cfg.get(key, default)


def _run_scan(args, cfg):
    kind = cfg["kind"]
    if kind in ("T", "X"):
        if "family" not in cfg:
            raise ConfigError("missing config key: family")
        scan = scan_positivity if kind == "T" else scan_mean_matrix_positivity
        rep = scan(
            cfg["family"],
            _param_grid(cfg.get("params")),
            n=int(cfg.get("n", 6)),
            spectra_per_point=int(cfg.get("spectra", 50)),
            seed=int(_over(cfg, "seed", args.seed, 0)),
            rel_tol=float(_over(cfg, "tol", args.tol, 1e-10)),
            jobs=args.jobs,
        )
        text = rep.to_json() if args.format == "json" else rep.to_csv()
        return text, (FINDING if rep.violations else OK)
    if kind == "monotonicity":
        return _monotonicity(
            args,
            cfg.get("fns") or default_monotone_fns(),
            cfg.get("ns", [2, 3]),
            cfg.get("ms", [2, 3]),
            int(_over(cfg, "seeds", args.seeds, 25)),
            int(cfg.get("n_kraus", 3)),
            float(_over(cfg, "tol", args.tol, MONOTONICITY_TOL)),
        )
    spec_kw = {k: cfg[k] for k in ("fn", "n", "strategy", "criterion") if k in cfg}
    if "lam_range" in cfg:
        spec_kw["lam_range"] = tuple(cfg["lam_range"])
    spec_kw["budget"] = int(_over(cfg, "budget", args.budget, 100_000))
    spec_kw["seed"] = int(_over(cfg, "seed", args.seed, 0))
    if "fn" not in spec_kw:
        raise ConfigError("missing config key: fn")
    return _search(args, SearchSpec(**spec_kw))


def cmd_scan(args):
    allowed = set().union(*_SCAN_KEYS.values())
    cfg = load_config(args.config, allowed, required=("kind",))
    kind = cfg["kind"]
    if kind not in _SCAN_KEYS:
        raise ConfigError(f"unknown scan kind {kind!r}; expected one of {', '.join(_SCAN_KEYS)}")
    unknown = sorted(set(cfg) - _SCAN_KEYS[kind])
    if unknown:
        raise ConfigError(f"keys not valid for kind {kind!r}: {', '.join(unknown)}")
    text, code = _run_scan(args, cfg)
    _emit(args, text, {"config": cfg})
    return code


_WITNESS_COLUMNS = ("fn", "criterion", "criterion_value", "lam", "vector", "revalidated")


def _search(args, spec):
    w = find_negative_T(spec)
    if w is None:
        record = {"fn": str(spec.fn), "found": False, "budget": spec.budget, "seed": spec.seed}
        text = json.dumps(record) if args.format == "json" else _rows_csv(_WITNESS_COLUMNS, [])
        return text, OK
    d = w.to_dict()
    d["fn"] = str(d["fn"])
    d["revalidated"] = w.revalidate()
    if args.format == "json":
        text = json.dumps({"found": True, **d})
    else:
        row = {
            "fn": d["fn"],
            "criterion": d["criterion"],
            "criterion_value": w.criterion_value,
            "lam": " ".join(d["lam"]),
            "vector": "" if d["vector"] is None else " ".join(d["vector"]),
            "revalidated": d["revalidated"],
        }
        text = _rows_csv(_WITNESS_COLUMNS, [row])
    return text, FINDING


def cmd_search(args):
    if args.config:
        cfg = load_config(args.config, _SCAN_KEYS["search"])
        cfg.setdefault("kind", "search")
        if cfg["kind"] != "search":
            raise ConfigError("search config must have kind = 'search'")
        if args.fn is not None:
            cfg["fn"] = args.fn
        text, code = _run_scan(args, cfg)
        _emit(args, text, {"config": cfg})
        return code
    if args.fn is None:
        raise UsageError("a function string or --config is required")
    spec = SearchSpec(
        args.fn,
        n=args.n,
        lam_range=(args.lo, args.hi),
        strategy=args.strategy,
        budget=100_000 if args.budget is None else args.budget,
        seed=0 if args.seed is None else args.seed,
        criterion=args.criterion,
    )
    text, code = _search(args, spec)
    _emit(args, text, {"fn": str(spec.fn), "budget": spec.budget, "seed": spec.seed})
    return code


def _parse_kv(tokens):
    fn, kv = None, {}
    for tok in tokens:
        if "=" in tok:
            k, v = tok.split("=", 1)
            if k not in ("n", "seed", "t", "x"):
                raise UsageError(f"unknown parameter {k!r}; expected n, seed, t or x")
            kv[k] = int(v) if k in ("n", "seed") else float(v)
        elif fn is None:
            fn = parse_function(tok)
        else:
            raise UsageError(f"unexpected argument {tok!r}")
    return fn, kv


_FORM_FAMILY = {
    "arith-integral": "arithmetic",
    "log-integral": "logarithmic",
    "heinz-sylvester": "heinz",
    "gamma-compose": "wyd_efek",
    "wyd-double": "wyd_efek",
    "sqrt-double-exp": "wyd_efek",
    "phas": "wyd_efek",
}


def cmd_crosscheck(args):
    if args.form not in _FORM_FAMILY:
        raise UsageError(f"unknown form {args.form!r}; expected one of {', '.join(_FORM_FAMILY)}")
    fn, kv = _parse_kv(args.extra)
    if fn is not None:
        if fn.family != _FORM_FAMILY[args.form]:
            raise UsageError(f"form {args.form} represents the {_FORM_FAMILY[args.form]} family, not {fn.family}")
        if fn.param is not None:
            kv.setdefault("t", fn.param)
    if args.seed is not None:
        kv.setdefault("seed", args.seed)
    rec = crosscheck(args.form, **kv)
    tol = CROSSCHECK_TOL[args.form] if args.tol is None else args.tol
    rec["tol"] = tol
    rec["pass"] = rec["discrepancy"] <= tol
    if args.format == "json":
        text = json.dumps(rec)
    elif args.format == "csv":
        flat = {**{k: v for k, v in rec.items() if k != "params"}, **rec["params"]}
        text = _rows_csv(list(flat), [flat])
    else:
        text = _table([(k, v) for k, v in rec.items() if k != "params"] + list(rec["params"].items()))
    _emit(args, text, {"form": args.form})
    return OK if rec["pass"] else FINDING


def _monotonicity(args, fns, ns, ms, seeds, n_kraus, tol):
    rows = monotonicity_sweep(fns, ns=tuple(ns), ms=tuple(ms), seeds=range(seeds), n_kraus=n_kraus, jobs=args.jobs)
    cols = ("fn", "n", "m", "seed", "gap")
    records = [dict(zip(cols, r)) for r in rows]
    if args.format == "json":
        text = json.dumps({"tol": tol, "rows": records})
    else:
        text = _rows_csv(cols, records)
    return text, (FINDING if any(r["gap"] < -tol for r in records) else OK)


def cmd_monotonicity(args):
    fns = args.fn or default_monotone_fns()
    tol = MONOTONICITY_TOL if args.tol is None else args.tol
    seeds = 25 if args.seeds is None else args.seeds
    text, code = _monotonicity(args, fns, args.ns, args.ms, seeds, args.n_kraus, tol)
    _emit(args, text, {"fns": fns, "seeds": seeds})
    return code


# parser

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base random seed")
    common.add_argument("--budget", type=int, default=None, help="evaluation budget for searches")
    common.add_argument("--tol", type=float, default=None, help="tolerance (command specific default)")
    common.add_argument("--out", default=None, help="write output here; metadata goes to OUT.meta.json")
    common.add_argument("--format", choices=("text", "csv", "json"), default=None)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")

    p = argparse.ArgumentParser(prog="cpmeans", description="Complete positivity of mean-induced superoperators.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-function", parents=[common], help="standardness, bound chain and sqrt comparison")
    s.add_argument("fn")
    s.add_argument("--grid-lo", type=float, default=1e-4)
    s.add_argument("--grid-hi", type=float, default=1e4)
    s.add_argument("--grid-num", type=int, default=101)
    s.set_defaults(func=cmd_check_function, default_format="text")

    for name, func, helptext in (("psd", cmd_psd, "positivity of the inverse mean matrix"), ("cp", cmd_cp, "T positivity against Choi positivity")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("fn", nargs="?")
        s.add_argument("lam", nargs="*", help="spectrum")
        s.add_argument("--matrix-file", default=None, help="JSON or CSV matrix used instead of fn and spectrum")
        s.add_argument("--mean-matrix", action="store_true", help="use the mean matrix X instead of T")
        s.set_defaults(func=func, default_format="text")

    s = sub.add_parser("scan", parents=[common], help="run a scan described by a TOML config")
    s.add_argument("config")
    s.add_argument("--seeds", type=int, default=None, help="channel seeds for monotonicity scans")
    s.set_defaults(func=cmd_scan, default_format="csv")

    s = sub.add_parser("search", parents=[common], help="counterexample search for T >= 0")
    s.add_argument("fn", nargs="?")
    s.add_argument("--config", default=None)
    s.add_argument("--n", type=int, default=3)
    s.add_argument("--lo", type=float, default=1e-3)
    s.add_argument("--hi", type=float, default=1.0)
    s.add_argument("--strategy", choices=("grid", "random", "hybrid"), default="hybrid")
    s.add_argument("--criterion", choices=("min_eig", "determinant"), default="min_eig")
    s.set_defaults(func=cmd_search, default_format="csv")

    s = sub.add_parser("crosscheck", parents=[common], help="integral form against the Hadamard form")
    s.add_argument("form")
    s.add_argument("extra", nargs="*", help="optional fn string and key=value pairs (n, seed, t, x)")
    s.set_defaults(func=cmd_crosscheck, default_format="text")

    s = sub.add_parser("monotonicity", parents=[common], help="monotonicity gap sweep over random channels")
    s.add_argument("--fn", action="append", default=None, help="function string; repeatable")
    s.add_argument("--ns", type=int, nargs="+", default=[2, 3])
    s.add_argument("--ms", type=int, nargs="+", default=[2, 3])
    s.add_argument("--seeds", type=int, default=None, help="number of channel seeds per configuration")
    s.add_argument("--n-kraus", type=int, default=3)
    s.set_defaults(func=cmd_monotonicity, default_format="csv")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if args.format is None:
        args.format = args.default_format
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return USAGE
    try:
        return args.func(args)
    except (UsageError, ConfigError, ParameterError, DomainError, ContractError, QuadratureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
