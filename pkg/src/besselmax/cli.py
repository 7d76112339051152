"""Command-line front end: evaluations, reference tables, sweeps, zero dumps, checks, MC."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

from mpmath import mp, mpf

from . import __version__
from .errors import ConsistencyError, ConvergenceError, DomainError
from .linalg_xp import PrecisionConfig
from .maxdist import (ModelParams, ProbabilityResult, TruncationPolicy, probability,
                      prob_thm1)
from .mc_oracle import McConfig, estimate_cdf
from .specfun import bessel_j, bessel_zeros

EXIT_USAGE, EXIT_CONSISTENCY, EXIT_CONVERGENCE = 1, 2, 3
ROUTE_ALIASES = {
    "thm1": "thm1", "thm2": "thm2_hankel", "thm2_hankel": "thm2_hankel", "hankel": "thm2_hankel",
    "pitman_yor": "pitman_yor", "brownian_reflect": "brownian_reflect",
    "brownian_excursion": "brownian_excursion",
}
CROSSCHECK_FACTOR = 100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _route(s: str) -> str:
    key = s.replace("-", "_").lower()
    if key not in ROUTE_ALIASES:
        raise argparse.ArgumentTypeError(f"unknown route {s!r}")
    return ROUTE_ALIASES[key]


def _pow2(s: str) -> int:
    v = int(s)
    if v < 1024 or v & (v - 1):
        raise argparse.ArgumentTypeError("grid must be a power of two >= 1024")
    return v


def reference_tables() -> dict:
    with resources.files("besselmax").joinpath("data/reference_tables.json").open("r") as f:
        return json.load(f)


def report_schema() -> dict:
    with resources.files("besselmax").joinpath("data/verify_report.schema.json").open("r") as f:
        return json.load(f)


# ---------------------------------------------------------------------------
# configuration


def _precision(args) -> PrecisionConfig:
    return PrecisionConfig(args.precision_bits)


def _trunc(args) -> TruncationPolicy:
    if args.nmax is not None:
        return TruncationPolicy.fixed(args.nmax)
    return TruncationPolicy(tail_tol=args.tail_tol)


def _jobs(args) -> int:
    return args.jobs if args.jobs else (os.cpu_count() or 1)


def _fmt(v, bits: int | None = None) -> str:
    """Full-precision decimal for csv/json."""
    if isinstance(v, mpf):
        digits = int((bits or mp.prec) * math.log10(2)) + 2
        return mp.nstr(v, digits, strip_zeros=False, min_fixed=-4, max_fixed=6)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _pretty(v) -> str:
    if isinstance(v, (mpf, float)):
        return f"{float(v):.6g}"
    return str(v)


def _canonical_argv(args) -> str:
    """Command line reproducing this run with every default spelled out."""
    parts = ["besselmax", args.command]
    for key, val in sorted(vars(args).items()):
        if key in ("command", "func", "out", "format") or val is None or val is False:
            continue
        flag = "--" + key.replace("_", "-")
        parts += [flag] if val is True else [flag, str(val)]
    return shlex.join(parts)


def _meta(args, extra: dict | None = None) -> dict:
    m = {"command": args.command, "version": __version__, "argv": _canonical_argv(args)}
    if hasattr(args, "precision_bits"):
        m["precision_bits"] = args.precision_bits
    if hasattr(args, "nmax"):
        m["truncation"] = (f"fixed_terms n_max={args.nmax}" if args.nmax is not None
                           else f"tail_tol {args.tail_tol if args.tail_tol is not None else 'auto'}")
    if extra:
        m.update(extra)
    return m


class Output:
    """Collects rows and renders csv, json or pretty text with a metadata header."""

    def __init__(self, args, columns: list[str], meta: dict):
        self.fmt = args.format
        self.columns = columns
        self.meta = meta
        self.rows: list[list] = []
        self.footer: list[str] = []
        self.bits = getattr(args, "precision_bits", None)

    def add(self, row: list):
        self.rows.append(row)

    def render(self) -> str:
        if self.fmt == "json":
            doc = {"meta": self.meta, "columns": self.columns,
                   "rows": [dict(zip(self.columns, (self._json(v) for v in r))) for r in self.rows],
                   "notes": self.footer}
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        if self.fmt == "csv":
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow([_fmt(v, self.bits) for v in r])
        else:
            cells = [self.columns] + [[_pretty(v) for v in r] for r in self.rows]
            widths = [max(len(c[i]) for c in cells) for i in range(len(self.columns))]
            for c in cells:
                buf.write("  ".join(s.rjust(wd) for s, wd in zip(c, widths)).rstrip() + "\n")
        for line in self.footer:
            buf.write(f"# {line}\n")
        return buf.getvalue()

    def _json(self, v):
        if isinstance(v, mpf):
            return _fmt(v, self.bits)
        if isinstance(v, float) and not math.isfinite(v):
            return None
        return v


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def _evaluate(task):
    params, route, trunc, prec = task
    return probability(params, route, trunc, prec)


def _map(fn, tasks, jobs: int):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _params(args) -> ModelParams:
    if args.n is None or args.alpha is None or args.a is None or args.m is None:
        raise UsageError("--n, --alpha, --a and --m are required")
    return ModelParams(args.n, args.alpha, args.a, args.m)


def _clamp(v):
    # presentation only; the library keeps the raw number
    return min(max(v, 0), 1)


def cmd_eval(args) -> int:
    params = _params(args)
    trunc, prec = _trunc(args), _precision(args)
    res = probability(params, args.route, trunc, prec)
    cols = ["route", "N", "alpha", "a", "M", "value", "est_error", "n_terms_used",
            "precision_bits", "condition"]
    row = [res.route, params.n_paths, params.alpha, params.start, params.wall, _clamp(res.value),
           res.est_error, res.n_terms_used, res.precision_bits, res.condition]
    check = None
    if not args.no_crosscheck and params.n_paths <= 10 and not params.degenerate:
        other = "thm2_hankel" if res.route == "thm1" else "thm1"
        check = probability(params, other, trunc, prec)
        cols += ["crosscheck_route", "crosscheck_value", "crosscheck_diff"]
        row += [check.route, check.value, float(abs(check.value - res.value))]
    out = Output(args, cols, _meta(args))
    out.add(row)
    if res.note:
        out.footer.append(f"note: {res.note}")
    _emit(args, out.render())
    if check is not None:
        diff = float(abs(check.value - res.value))
        allowed = CROSSCHECK_FACTOR * (res.est_error + check.est_error)
        if not diff <= allowed:
            raise ConsistencyError(
                f"{res.route} and {check.route} differ by {diff:.3e} > {allowed:.3e}")
    return 0


def _table_rows(which: str, args) -> tuple[dict, list]:
    tab = reference_tables()["tables"][which]
    fx = tab["fixed"]
    tasks = []
    for x, _ in tab["rows"]:
        if tab["variable"] == "M":
            p = ModelParams(fx["n_paths"], fx["alpha"], fx["start"], x)
        else:
            p = ModelParams(fx["n_paths"], fx["alpha"], x, fx["wall"])
        tasks.append((p, "thm1", _trunc(args), _precision(args)))
    return tab, _map(_evaluate, tasks, _jobs(args))


def cmd_table(args, which: str) -> int:
    tab, results = _table_rows(which, args)
    var = tab["variable"]
    out = Output(args, [var, "computed", "reference", "abs_diff", "est_error"],
                 _meta(args, {"table": tab["description"]}))
    for (x, ref), r in zip(tab["rows"], results):
        out.add([x, r.value, ref, abs(float(r.value) - ref), r.est_error])
    vals = [r.value for r in results]
    increasing = var == "M"
    mono = all((b > a) if increasing else (b < a) for a, b in zip(vals, vals[1:]))
    out.footer.append(f"computed column strictly {'increasing' if increasing else 'decreasing'}: "
                      f"{'yes' if mono else 'no'}")
    for line in reference_tables()["anomalies"]:
        out.footer.append(f"reference anomaly: {line}")
    _emit(args, out.render())
    return 0


def _frange(start: float, stop: float, step: float) -> list[float]:
    if not step > 0:
        raise UsageError("--step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise UsageError("empty sweep range")
    return [round(start + i * step, 12) for i in range(n)]


def cmd_sweep(args) -> int:
    xs = _frange(args.start, args.stop, args.step)
    tasks = []
    for x in xs:
        if args.var == "M":
            p = ModelParams(args.n, args.alpha, args.a, x)
        else:
            p = ModelParams(args.n, args.alpha, x, args.m)
        tasks.append((p, args.route, _trunc(args), _precision(args)))
    results = _map(_evaluate, tasks, _jobs(args))
    out = Output(args, [args.var, "probability"], _meta(args))
    for x, r in zip(xs, results):
        out.add([x, _clamp(r.value)])
    _emit(args, out.render())
    return 0


def cmd_zeros(args) -> int:
    prec = _precision(args)
    tab = bessel_zeros(args.alpha, args.count, args.tol, prec)
    out = Output(args, ["n", "x_n", "residual"], _meta(args))
    for n, x in enumerate(tab.zeros, start=1):
        out.add([n, x, abs(float(bessel_j(args.alpha, x, prec)))])
    out.footer.append(f"residual_bound: {tab.residual_bound:.3e}")
    _emit(args, out.render())
    return 0


def cmd_verify(args) -> int:
    from . import verify

    names = list(verify.CHECKS)
    results = _map(_verify_task, [(n, args.depth) for n in names], _jobs(args))
    report = {
        "schema_version": 1,
        "meta": _meta(args, {"depth": args.depth}),
        "checks": results,
        "notes": [f"reference anomaly: {s}" for s in reference_tables()["anomalies"]],
        "passed": all(c["passed"] for c in results),
    }
    if args.format == "json":
        text = json.dumps(report, indent=2) + "\n"
    else:
        lines = [f"# {k}: {v}" for k, v in report["meta"].items()]
        for c in results:
            m = "n/a" if c["measured"] is None else f"{c['measured']:.3e}"
            lines.append(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']:<22} measured={m} "
                         f"tol={c['tolerance']:.1e} cases={c['cases']} {c['seconds']:.1f}s  {c['detail']}")
        lines += [f"# {s}" for s in report["notes"]]
        text = "\n".join(lines) + "\n"
    _emit(args, text)
    return 0 if report["passed"] else EXIT_CONSISTENCY


def _verify_task(task):
    from .verify import run_check

    return run_check(*task)


def cmd_mc(args) -> int:
    cfg = McConfig(args.dim, args.a, args.m, args.grid, args.samples, args.seed)
    est = estimate_cdf(cfg, workers=_jobs(args))
    analytic = None
    if cfg.wall > cfg.start:
        p = ModelParams(1, cfg.alpha, cfg.start, cfg.wall)
        analytic = prob_thm1(p, precision=PrecisionConfig(args.precision_bits)).value
    cols = ["dim", "alpha", "a", "M", "samples", "grid", "p_hat", "std_err", "p_hat_2x_grid",
            "bias_bracket", "analytic", "z_score", "within_allowance"]
    z = allowed = None
    if analytic is not None:
        diff = est.p_hat - float(analytic)
        z = diff / est.std_err if est.std_err > 0 else (0.0 if diff == 0 else math.inf)
        allowed = abs(diff) <= 3 * est.std_err + est.bias_bracket
    out = Output(args, cols, _meta(args))
    out.add([cfg.dim, cfg.alpha, cfg.start, cfg.wall, est.samples, est.grid_points, est.p_hat,
             est.std_err, est.p_hat_fine, est.bias_bracket,
             "" if analytic is None else analytic, "" if z is None else z,
             "" if allowed is None else ("yes" if allowed else "no")])
    out.footer.append(est.bias_note)
    _emit(args, out.render())
    return 0


# ---------------------------------------------------------------------------
# parser


def _common(p, model: bool = True, route: bool = False):
    if model:
        p.add_argument("--n", type=int, help="number of paths N")
        p.add_argument("--alpha", type=float, help="Bessel order alpha > -1")
        p.add_argument("--a", type=float, help="starting point a >= 0")
        p.add_argument("--m", type=float, help="wall height M")
    if route:
        p.add_argument("--route", type=_route, default="thm1",
                       help="thm1, thm2 (hankel), pitman-yor, brownian-reflect, brownian-excursion")
    p.add_argument("--nmax", type=int, help="use exactly this many zeros (fixed truncation)")
    p.add_argument("--tail-tol", type=float, help="relative tail tolerance (default 2^-(bits+8))")
    p.add_argument("--precision-bits", type=int, default=106, help="53, 106 or 200..4096")
    p.add_argument("--format", choices=("csv", "json", "pretty"), default="csv")
    p.add_argument("--out", help="write to this file instead of stdout")
    p.add_argument("--jobs", type=int, help="worker processes (default: number of CPUs)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="besselmax", description=__doc__)
    ap.add_argument("--version", action="version", version=f"besselmax {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="one probability with a cross-route check")
    _common(p, route=True)
    p.add_argument("--no-crosscheck", action="store_true", help="skip the second route")
    p.set_defaults(func=cmd_eval)

    for which in ("table1", "table2"):
        p = sub.add_parser(which, help=f"reproduce reference {which} with differences")
        _common(p, model=False)
        p.set_defaults(func=lambda a, w=which: cmd_table(a, w))

    p = sub.add_parser("sweep", help="probability along M or a, for plotting")
    _common(p, route=True)
    p.add_argument("--var", choices=("M", "a"), required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("zeros", help="dump positive zeros of J_alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-14)
    p.add_argument("--precision-bits", type=int, default=106)
    p.add_argument("--format", choices=("csv", "json", "pretty"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("verify", help="run the consistency checks, report pass/fail")
    p.add_argument("--depth", choices=("quick", "full"), default="quick")
    p.add_argument("--format", choices=("json", "pretty"), default="json")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("mc", help="Monte Carlo estimate for one path, with the analytic value")
    p.add_argument("--dim", type=int, required=True, help="integer dimension d = 2(alpha+1)")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--grid", type=_pow2, default=2 ** 14)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--precision-bits", type=int, default=106)
    p.add_argument("--format", choices=("csv", "json", "pretty"), default="csv")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_mc)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"besselmax {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"besselmax {args.command}: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except ConvergenceError as exc:
        print(f"besselmax {args.command}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
