"""Command-line front end.

Subcommands
-----------
link     x, y, concurrence and field overlap versus channel loss
purify   recurrence coefficients and success probability versus x
rate     closed-form rates for a configuration or a figure preset
oracle   oracle-versus-analytic checks (JSON report, exit 1 on failure)
mc       Monte Carlo simulation of a chain

Every data file written with ``--out`` gets a ``<out>.manifest.json``
holding the command, the resolved parameters, the tool version and the
wall-clock duration. Exit codes: 0 success, 1 validation failure, 2
usage or configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .channel import ChannelParams, field_overlap_fstar, length_from_gammaT, gammaT_from_length
from .checks import CHECKS, run_check
from .entgen import link_state
from .errors import HQRError
from .mcsim import simulate_chain
from .presets import FIGURES, apply_overrides, figure_configs
from .purify import purify_n
from .rates import HARDWARE, RepeaterConfig, repeater_rate

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

CSV_SCHEMA = "hqrepeater-csv/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output

def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(columns, rows, stream) -> None:
    """``columns`` is a list of ``(name, unit)``; the unit may be empty."""
    stream.write(f"# {CSV_SCHEMA}\n")
    stream.write(",".join(f"{n}[{u}]" if u else n for n, u in columns) + "\n")
    for r in rows:
        stream.write(",".join(fmt(v) for v in r) + "\n")


def _jsonable(o):
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    if isinstance(o, (np.floating, np.integer)):
        return _jsonable(o.item())
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    return o


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def emit(args, command: str, params: dict, write_body, t0: float, seed=None) -> None:
    """Write the body to ``--out`` (plus manifest) or to stdout."""
    if args.out is None:
        write_body(sys.stdout)
        return
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        write_body(fh)
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "config": params,
        "seed": seed,
        "version": __version__,
        "outputs": [str(out)],
        "duration_s": time.perf_counter() - t0,
    }
    Path(str(out) + ".manifest.json").write_text(dump_json(manifest))
    print(f"wrote {out}")


# ---------------------------------------------------------------------------
# config

_FIELDS = {f.name: f for f in dataclasses.fields(RepeaterConfig)}
_FLAG_KEYS = {
    "n_links": "n_links", "L0": "L0_km", "N": "N_rounds", "nbar": "nbar", "gtau": "g_tau",
    "eta": "eta", "eps": "eps", "x_link": "x_link", "y_link": "y_link", "policy": "fidelity_policy",
    "hardware": "hardware", "endpoint": "endpoint",
}


def load_config(path) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    return raw


def resolve_config(file_values: dict, flags: dict) -> dict:
    """Merge file values and flag overrides into keyword arguments for ``RepeaterConfig``."""
    kw = {}
    for k, v in file_values.items():
        if k not in _FIELDS:
            raise UsageError(f"unknown config key {k!r}")
        kw[k] = v
    for k, v in flags.items():
        if v is not None:
            kw[_FLAG_KEYS[k]] = v
    hw = kw.get("hardware")
    if isinstance(hw, str):
        if hw not in HARDWARE:
            raise UsageError(f"unknown hardware preset {hw!r}; choose from {', '.join(HARDWARE)}")
        kw["hardware"] = HARDWARE[hw]
    return kw


def _config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("chain parameters (override --config)")
    g.add_argument("--config", help="TOML file with RepeaterConfig keys")
    g.add_argument("--n-links", dest="n_links", type=int)
    g.add_argument("--L0", type=float, help="elementary link length [km]")
    g.add_argument("--N", type=int, help="purification rounds per link")
    g.add_argument("--nbar", type=float)
    g.add_argument("--gtau", type=float)
    g.add_argument("--eta", type=float)
    g.add_argument("--eps", type=float)
    g.add_argument("--x-link", dest="x_link", type=float)
    g.add_argument("--y-link", dest="y_link", type=float)
    g.add_argument("--policy", choices=("threshold", "track"))
    g.add_argument("--hardware", choices=sorted(HARDWARE))
    g.add_argument("--no-endpoint", dest="endpoint", action="store_false", default=None)


def _flag_values(args) -> dict:
    return {k: getattr(args, k, None) for k in _FLAG_KEYS}


def _build_config(args) -> RepeaterConfig:
    file_values = load_config(args.config) if args.config else {}
    kw = resolve_config(file_values, _flag_values(args))
    return RepeaterConfig(**kw)


# ---------------------------------------------------------------------------
# commands

def _grid(lo: float, hi: float, points: int, what: str) -> np.ndarray:
    if points < 1 or hi < lo or lo < 0:
        raise UsageError(f"invalid {what} range [{lo}, {hi}] with {points} points")
    return np.linspace(lo, hi, points)


def cmd_link(args) -> int:
    t0 = time.perf_counter()
    if args.L0_max is not None:
        gts = [gammaT_from_length(L) for L in _grid(0.0, args.L0_max, args.points, "L0")]
    else:
        gts = list(_grid(0.0, args.gammaT_max, args.points, "gammaT"))
    if args.nbar <= 0 or any(not 0 < e <= 1 for e in args.eta):
        raise UsageError("need nbar > 0 and eta in (0, 1]")
    rows = []
    for eta in args.eta:
        for gT in gts:
            p = ChannelParams(float(gT), eta)
            ls = link_state(p, args.nbar, args.gtau, warn=False)
            fs = field_overlap_fstar(p, args.gtau, args.nbar)
            rows.append((float(gT), length_from_gammaT(float(gT)), eta, ls.x, ls.y, ls.concurrence, fs.exact))
    cols = [("gammaT", ""), ("L0_km", "km"), ("eta", ""), ("x", ""), ("y", ""), ("concurrence", ""),
            ("Fstar", "")]
    params = {"nbar": args.nbar, "g_tau": args.gtau, "eta": list(args.eta), "gammaT": [float(g) for g in gts]}
    emit(args, "link", params, lambda s: write_csv(cols, rows, s), t0)
    return EXIT_OK


def cmd_purify(args) -> int:
    t0 = time.perf_counter()
    if not -1.0 <= args.x_min <= args.x_max <= 1.0 or args.points < 1:
        raise UsageError("x range must lie within [-1, 1]")
    if any(N < 0 for N in args.rounds):
        raise UsageError("rounds must be >= 0")
    xs = np.linspace(args.x_min, args.x_max, args.points)
    rows = []
    for N in args.rounds:
        for x in xs:
            t = purify_n(float(x), args.y, N)
            h = math.nan if t.h is None else t.h
            rows.append((float(x), N, t.f, t.g, h, t.overall_prob, t.log_overall_prob / math.log(10.0)))
    cols = [("x", ""), ("N", ""), ("f", ""), ("g", ""), ("h", ""), ("P_pur", ""), ("log10_P_pur", "")]
    params = {"x_min": args.x_min, "x_max": args.x_max, "points": args.points, "rounds": list(args.rounds),
              "y": args.y}
    emit(args, "purify", params, lambda s: write_csv(cols, rows, s), t0)
    return EXIT_OK


RATE_COLUMNS = [
    ("series", ""), ("n_links", ""), ("L_km", "km"), ("L0_km", "km"), ("N_rounds", ""), ("x_link", ""),
    ("F_link", ""), ("F_final", ""), ("P", ""), ("A_n", "attempts"), ("N_bar", "pairs"), ("j_extra", ""),
    ("T_link", "s"), ("T_swap", "s"), ("R", "1/s"), ("log10_R", ""), ("benchmark_rate", "1/s"),
]


def _rate_rows(series):
    rows, reports = [], []
    for label, cfgs in series:
        for c in cfgs:
            r = repeater_rate(c)
            rows.append((label, c.n_links, c.L_km, c.L0_km, c.N_rounds, r.x_link, r.F_link, r.F_final, r.P,
                         r.A_n, r.N_bar, r.j_extra, r.T_link, r.T_swap, r.R, r.log_R / math.log(10.0),
                         r.benchmark_rate))
            reports.append({"series": label, "config": c.to_dict(), "report": r.to_dict()})
    return rows, reports


def cmd_rate(args) -> int:
    t0 = time.perf_counter()
    if args.figure:
        if args.config:
            raise UsageError("--figure and --config are exclusive")
        series = figure_configs(args.figure)
        over = resolve_config({}, {k: v for k, v in _flag_values(args).items() if k != "n_links"})
        series = apply_overrides(series, **over)
    else:
        cfg = _build_config(args)
        if args.n_max:
            cfgs = [dataclasses.replace(cfg, n_links=n) for n in range(1, args.n_max + 1)]
        else:
            cfgs = [cfg]
        series = [(cfg.label or "config", cfgs)]
    rows, reports = _rate_rows(series)

    def body(s):
        write_csv(RATE_COLUMNS, rows, s)

    params = {"figure": args.figure, "configs": [r["config"] for r in reports]}
    emit(args, "rate", params, body, t0)
    if args.out is not None:
        Path(str(args.out) + ".reports.json").write_text(dump_json(reports))
    return EXIT_OK


def cmd_oracle(args) -> int:
    t0 = time.perf_counter()
    names = CHECKS if args.check == "all" else (args.check,)
    if args.nbar < 0 or (args.dim is not None and args.dim < 1):
        raise UsageError("need nbar >= 0 and dim >= 1")
    results = [run_check(n, args.nbar, args.dim) for n in names]
    report = {"nbar": args.nbar, "dim": args.dim, "checks": [r.to_dict() for r in results],
              "passed": all(r.passed for r in results)}
    if args.out is not None:
        for r in results:
            print(f"{r.name:9s} {'PASS' if r.passed else 'FAIL'}  {r.sense} = {r.measured:.6g} "
                  f"(threshold {r.threshold:g})")
    emit(args, "oracle", {"check": list(names), "nbar": args.nbar, "dim": args.dim},
         lambda s: s.write(dump_json(report)), t0)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def cmd_mc(args) -> int:
    t0 = time.perf_counter()
    if args.trials < 1 or args.workers < 1:
        raise UsageError("trials and workers must be >= 1")
    if args.figure:
        series = figure_configs(args.figure)
        cfg = series[0][1][-1]
        over = resolve_config({}, _flag_values(args))
        cfg = dataclasses.replace(cfg, **over)
    else:
        cfg = _build_config(args)
    s = simulate_chain(cfg, args.trials, args.seed, workers=args.workers)
    closed = repeater_rate(cfg)
    out = {"summary": s.to_dict(), "closed_form": {"A_n": closed.A_n, "R": closed.R, "F_final": closed.F_final},
           "config": cfg.to_dict()}
    emit(args, "mc", {"config": cfg.to_dict(), "trials": args.trials, "workers": args.workers},
         lambda st: st.write(dump_json(out)), t0, seed=args.seed)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hqrepeater", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("link", help="link parameters versus channel loss")
    p.add_argument("--nbar", type=float, default=100.0)
    p.add_argument("--gtau", type=float, default=4.0)
    p.add_argument("--eta", type=float, nargs="+", default=[1.0, 0.85, 0.7])
    p.add_argument("--gammaT-max", dest="gammaT_max", type=float, default=0.1)
    p.add_argument("--L0-max", dest="L0_max", type=float, help="sweep L0 in km instead of gammaT")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("purify", help="recurrence purification versus x")
    p.add_argument("--x-min", dest="x_min", type=float, default=-1.0)
    p.add_argument("--x-max", dest="x_max", type=float, default=1.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--rounds", type=int, nargs="+", default=[2, 3, 4])
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_purify)

    p = sub.add_parser("rate", help="closed-form rates")
    p.add_argument("--figure", choices=FIGURES)
    p.add_argument("--n-max", dest="n_max", type=int, help="sweep n_links from 1 to this value")
    _config_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("oracle", help="oracle-versus-analytic checks")
    p.add_argument("--check", choices=CHECKS + ("all",), default="all")
    p.add_argument("--nbar", type=float, default=100.0)
    p.add_argument("--dim", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("mc", help="Monte Carlo simulation")
    p.add_argument("--figure", choices=FIGURES, help="use the last configuration of a preset")
    _config_flags(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, HQRError, TypeError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
