"""``oedkit`` command line: class dumps, size scans, fits and time series as CSV/JSON."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

import numpy as np

from .closure import DEFAULT_BUDGET, IncompleteClassError, generate_class, partition_all
from .dimpoly import PolynomialFitError, detect_degree, fit_counts, xy_polynomials
from .dynamics import ConsistencyError, InitialState, IntegrationError, run_relaxation_experiment
from .models import ConfigError, from_config
from .oracle import CapExceededError, exact_heisenberg
from .pauli import DimensionError, PauliParseError, format_pauli, parse, single
from .quench import parse_schedule, quenched_evolution

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_CONSISTENCY = 0, 2, 3, 4


class BudgetExhausted(Exception):
    """Raised after partial output has been written."""


# -- fitting ------------------------------------------------------------------

def fit_exponential(sizes, counts) -> dict:
    """Ordinary least squares of ``ln D`` on ``L``: ``D ~ prefactor * exp(rate * L)``."""
    L = np.asarray(sizes, dtype=float)
    D = np.asarray(counts, dtype=float)
    if L.size < 4:
        raise ConfigError("exponential fit needs at least 4 points")
    if np.any(D <= 0):
        raise ConfigError("counts must be positive")
    y = np.log(D)
    rate, icpt = np.polyfit(L, y, 1)
    resid = y - (rate * L + icpt)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return {"rate": float(rate), "prefactor": float(math.exp(icpt)), "r2": r2, "points": int(L.size)}


# -- helpers ------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    """``"4:10"`` (inclusive), ``"4,6,8"`` or ``"5"``."""
    out = []
    for part in text.split(","):
        if ":" in part:
            a, b = part.split(":")
            out.extend(range(int(a), int(b) + 1))
        elif part.strip():
            out.append(int(part))
    return out


def _model_config(args, size: int | None = None) -> dict:
    cfg = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
    if args.model:
        cfg["model"] = args.model
    if args.L is not None:
        cfg["L"] = args.L
    if size is not None:
        cfg["L"] = size
    if args.boundary:
        cfg["boundary"] = args.boundary
    if args.uniform is not None:
        cfg["uniform"] = args.uniform
        cfg.pop("random", None)
    if args.disorder is not None:
        cfg["random"] = {"lo": 0.5, "hi": 1.5, "seed": args.disorder}
    if "n" in cfg and "L" not in cfg:
        cfg["L"] = cfg["n"]
    cfg.setdefault("model", "xy")
    return cfg


def _rows_to_text(header, rows, meta: dict, fmt: str, no_meta: bool) -> str:
    if fmt == "json":
        doc = {"schema": SCHEMA}
        if not no_meta:
            doc["generated"] = meta["generated"]
        doc.update({k: v for k, v in meta.items() if k != "generated"})
        doc["rows"] = [dict(zip(header, r)) for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema={SCHEMA}\n")
    if not no_meta:
        buf.write(f"# generated={meta['generated']}\n")
    for k, v in meta.items():
        if k != "generated":
            buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _meta(args, **kw) -> dict:
    m = {"generated": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    m.update(kw)
    return m


def _read_counts(path: str) -> tuple[list[int], list[int]]:
    """Columns ``L`` and ``oed`` from a CSV (``#`` lines skipped)."""
    try:
        with open(path) as fh:
            lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    reader = csv.DictReader(lines)
    sizes, counts = [], []
    for row in reader:
        try:
            sizes.append(int(row["L"]))
            counts.append(int(row["oed"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigError("counts CSV needs integer columns 'L' and 'oed'") from None
    return sizes, counts


def _seed_strings(family: str, site: int, L: int):
    if family == "prodZ":
        return [parse("Z" * L, L)]
    if family == "sum":
        return [single(s, site, L) for s in "XYZ"]
    return [single(family, site, L)]


# -- subcommands ----------------------------------------------------------------

def cmd_class(args) -> int:
    cfg = _model_config(args)
    h = from_config(cfg)
    L = h.num_sites
    if args.partition:
        part = partition_all(h)
        rows = [(k, c.size, format_pauli(c.members[0])) for k, c in enumerate(part.classes)]
        meta = _meta(args, L=L, K=part.K, total=sum(part.sizes))
        _emit(args, _rows_to_text(["class", "size", "representative"], rows, meta, args.format, args.no_meta))
        return EXIT_OK
    seed = parse(args.seed, L)
    cls = generate_class(h, seed, args.budget)
    meta = _meta(args, L=L, seed=seed.word(), oed=cls.size if cls.complete else "none",
                 complete=cls.complete, depth=cls.depth)
    rows = [] if args.summary else [(format_pauli(p),) for p in cls.members]
    _emit(args, _rows_to_text(["member"], rows, meta, args.format, args.no_meta))
    if not cls.complete:
        raise BudgetExhausted(f"class of {args.seed} exceeds budget {args.budget}")
    return EXIT_OK


def cmd_scan(args) -> int:
    rows, exhausted = [], False
    for L in _int_list(args.sizes):
        h = from_config(_model_config(args, L))
        sites = range(1, L + 1) if args.sites == "all" else [s for s in _int_list(args.sites) if s <= L]
        if args.family == "prodZ":
            sites = [0]
        for i in sites:
            total, complete = 0, True
            for seed in _seed_strings(args.family, i, L):
                c = generate_class(h, seed, args.budget)
                total += c.size
                complete &= c.complete
            label = {"prodZ": "prodZ", "sum": f"XYZ{i}"}.get(args.family, f"{args.family}{i}")
            rows.append((L, label, total if complete else "", complete))
            exhausted |= not complete
    meta = _meta(args, model=_model_config(args, 0)["model"], family=args.family)
    _emit(args, _rows_to_text(["L", "seed", "oed", "complete"], rows, meta, args.format, args.no_meta))
    if exhausted:
        raise BudgetExhausted("some classes exceeded the budget")
    return EXIT_OK


def cmd_fit_poly(args) -> int:
    if args.xy is not None:
        polys = xy_polynomials(args.xy)
        doc = {"schema": SCHEMA, "model": "xy", "polynomials": [p.to_json() for p in polys]}
    else:
        if not args.input:
            raise ConfigError("fit-poly needs --input or --xy")
        sizes, counts = _read_counts(args.input)
        if args.degree is None:
            poly = detect_degree(sizes, counts)
        else:
            d = args.degree
            poly = fit_counts(sizes[: d + 1], counts[: d + 1], d, list(zip(sizes[d + 1:], counts[d + 1:])))
        doc = {"schema": SCHEMA, **poly.to_json(), "effective_degree": poly.effective_degree}
    if not args.no_meta:
        doc["generated"] = _meta(args)["generated"]
    _emit(args, json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_fit_exp(args) -> int:
    sizes, counts = _read_counts(args.input)
    if args.offset:
        sizes = [L + args.offset for L in sizes]
    res = fit_exponential(sizes, counts)
    meta = _meta(args, source=args.input)
    _emit(args, _rows_to_text(list(res), [tuple(res.values())], meta, args.format, args.no_meta))
    return EXIT_OK


def _times(args) -> np.ndarray:
    if args.dt <= 0 or args.t_max < 0:
        raise ConfigError("need dt > 0 and t_max >= 0")
    n = int(round(args.t_max / args.dt))
    return np.linspace(0.0, n * args.dt, n + 1)


def cmd_evolve(args) -> int:
    h = from_config(_model_config(args))
    sites = _int_list(args.sites)
    rows = run_relaxation_experiment(h, sites, args.state.split(","), args.t_max, args.dt,
                                     tuple(args.observable), args.method, args.budget)
    rows = [(f"{t:.10g}", s, o, f"{v:.15g}", f"{d:.3e}") for t, s, o, v, d in rows]
    meta = _meta(args, method=args.method)
    _emit(args, _rows_to_text(["t", "site", "observable", "value", "norm_drift"], rows, meta,
                              args.format, args.no_meta))
    return EXIT_OK


def _load_schedule(path):
    try:
        with open(path) as fh:
            return parse_schedule(json.load(fh))
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad gate schedule: {exc}") from None


def cmd_quench(args) -> int:
    h = from_config(_model_config(args))
    sched = _load_schedule(args.schedule) if args.schedule else []
    seed = parse(args.seed, h.num_sites)
    init = InitialState.from_label(args.site, args.state)
    res = quenched_evolution(h, sched, seed, init, _times(args), args.method, args.budget)
    rows = [(f"{t:.10g}", args.site, format_pauli(seed), f"{v:.15g}", f"{res.norm_drift:.3e}")
            for t, v in zip(res.times, res.values)]
    meta = _meta(args, basis=res.basis.size, gates=len(sched))
    _emit(args, _rows_to_text(["t", "site", "observable", "value", "norm_drift"], rows, meta,
                              args.format, args.no_meta))
    return EXIT_OK


def cmd_oracle(args) -> int:
    h = from_config(_model_config(args))
    sched = _load_schedule(args.schedule) if args.schedule else []
    seed = parse(args.seed, h.num_sites)
    init = InitialState.from_label(args.site, args.state)
    ts = _times(args)
    vals = exact_heisenberg(h, seed, ts, init, gates=sched)
    rows = [(f"{t:.10g}", args.site, format_pauli(seed), f"{v:.15g}") for t, v in zip(ts, vals)]
    _emit(args, _rows_to_text(["t", "site", "observable", "value"], rows, _meta(args), args.format, args.no_meta))
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _budget(text: str) -> int:
    v = float(text)
    if v < 1 or v != int(v):
        raise argparse.ArgumentTypeError("budget must be a positive integer")
    return int(v)


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # the subcommand copy must not overwrite values given before the subcommand
    g = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS if suppress else None)

    def dflt(v):
        return {} if suppress else {"default": v}

    g.add_argument("--config", help="JSON model config")
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), **dflt("csv"))
    g.add_argument("--budget", type=_budget, **dflt(DEFAULT_BUDGET))
    g.add_argument("--threads", type=int, help="accepted for compatibility; work is single-threaded", **dflt(1))
    g.add_argument("--no-meta", action="store_true", help="omit the timestamp line", **dflt(False))
    return g


def build_parser() -> argparse.ArgumentParser:
    glob = _global_flags(True)
    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=("xy", "kitaev", "xyzz"))
    model.add_argument("--L", "--n", dest="L", type=int)
    model.add_argument("--boundary", choices=("open", "periodic"))
    model.add_argument("--uniform", type=float, help="all couplings and fields equal to this value")
    model.add_argument("--disorder", type=int, metavar="SEED", help="random couplings in [0.5, 1.5)")

    time_ = argparse.ArgumentParser(add_help=False)
    time_.add_argument("--t-max", type=float, default=10.0)
    time_.add_argument("--dt", type=float, default=0.1)

    p = argparse.ArgumentParser(prog="oedkit", parents=[_global_flags(False)],
                                description="Operator evolution dimensions of spin-chain observables.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("class", parents=[glob, model], help="equivalence class of one seed")
    c.add_argument("--seed", default="X1")
    c.add_argument("--partition", action="store_true", help="partition every Pauli string instead")
    c.add_argument("--summary", action="store_true", help="header only, no member list")
    c.set_defaults(func=cmd_class)

    s = sub.add_parser("scan", parents=[glob, model], help="OED over sizes and seed sites")
    s.add_argument("--sizes", required=True, help="e.g. 4:10 or 4,6,8")
    s.add_argument("--family", choices=("X", "Y", "Z", "sum", "prodZ"), default="X")
    s.add_argument("--sites", default="all", help="'all' or a list like 1,2,3")
    s.set_defaults(func=cmd_scan)

    f = sub.add_parser("fit-poly", parents=[glob], help="exact polynomial through (L, oed) counts")
    f.add_argument("--input", help="CSV with columns L, oed")
    f.add_argument("--degree", type=int, help="fixed degree; default detects the lowest that validates")
    f.add_argument("--xy", type=int, metavar="N", help="open XY polynomials D^0..D^N from the recursion")
    f.set_defaults(func=cmd_fit_poly)

    e = sub.add_parser("fit-exp", parents=[glob], help="least-squares exponential fit of (L, oed)")
    e.add_argument("--input", required=True)
    e.add_argument("--offset", type=int, default=0, help="shift L before fitting")
    e.set_defaults(func=cmd_fit_exp)

    v = sub.add_parser("evolve", parents=[glob, model, time_], help="restricted Heisenberg relaxation")
    v.add_argument("--sites", default="1")
    v.add_argument("--state", default="+", help="0 1 + - +i -i, one or one per site")
    v.add_argument("--observable", default="X", choices=("X", "Y", "Z"), nargs="+")
    v.add_argument("--method", default="auto", choices=("auto", "eig", "expm", "rk4"))
    v.set_defaults(func=cmd_evolve)

    q = sub.add_parser("quench", parents=[glob, model, time_], help="evolution interrupted by gates")
    q.add_argument("--schedule", help="JSON gate schedule")
    q.add_argument("--seed", default="Z1")
    q.add_argument("--site", type=int, default=1)
    q.add_argument("--state", default="0")
    q.add_argument("--method", default="auto", choices=("auto", "eig", "expm", "rk4"))
    q.set_defaults(func=cmd_quench)

    o = sub.add_parser("oracle", parents=[glob, model, time_], help="dense exact evolution (L <= 10)")
    o.add_argument("--schedule", help="JSON gate schedule")
    o.add_argument("--seed", default="X1")
    o.add_argument("--site", type=int, default=1)
    o.add_argument("--state", default="+")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExhausted as exc:
        print(f"oedkit: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except IncompleteClassError as exc:
        print(f"oedkit: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConsistencyError, IntegrationError) as exc:
        print(f"oedkit: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ConfigError, PauliParseError, DimensionError, CapExceededError, PolynomialFitError, ValueError) as exc:
        print(f"oedkit: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
