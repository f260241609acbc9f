"""Command line driver.

    chaosexp <command> [--config FILE] [options]

Commands: covariance, cumulants, coefficients, expand, simulate, compare,
ordering.  Options may also come from an INI-style config file (keys are the
long option names with underscores; section names are ignored); flags given
on the command line win.

Exit status: 0 success, 2 invalid configuration, 3 numerical failure,
64 unknown command.
"""
import argparse
import configparser
import io
import json
import math
import re
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import coefficients as coef
from .cumulants import DEFAULT_MAX_P, build_gamma_table
from .errors import DomainError, NoSubsequenceError, NumericalError
from .expansion import ExpansionSpec, density, expectation
from .montecarlo import (default_threads, empirical_vs_expansion, mc_expectation,
                         simulate_statistic, write_samples)
from .wave import WaveModel, covariance_matrix

COMMANDS = ("covariance", "cumulants", "coefficients", "expand", "simulate", "compare", "ordering")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64


@dataclass
class ExperimentConfig:
    command: str
    times: tuple = (1.0,)
    N: int = None
    N_grid: tuple = None
    tau: float = None
    a: float = 0.0
    p: int = 2
    k_order: int = None
    gamma: float = 0.5
    M: int = 10 ** 6
    seed: int = None
    out: str = None
    format: str = "csv"
    max_p: int = DEFAULT_MAX_P
    threads: int = None
    grid: str = "-5:5:201"
    raw: str = None


def fmt_float(x):
    return format(float(x), ".17g")


def _json_value(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj):
    """JSON text with every float written to 17 significant digits."""
    return _json_value(obj) + "\n"


def dumps_csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt_float(v) if isinstance(v, (float, np.floating)) else str(v)
                           for v in row) + "\n")
    return buf.getvalue()


def _parse_number(text):
    text = text.strip()
    if "/" in text:
        return float(Fraction(text))
    return float(text)


def _parse_times(text):
    return tuple(_parse_number(t) for t in str(text).split(",") if t.strip())


def _parse_grid_sizes(text):
    text = str(text).strip()
    m = re.fullmatch(r"(\d+)\^(\d+)\s*\.\.\s*(\d+)\^(\d+)", text)
    if m:
        b1, e1, b2, e2 = map(int, m.groups())
        if b1 != b2:
            raise ValueError("power range needs a common base")
        return tuple(b1 ** e for e in range(e1, e2 + 1))
    return tuple(int(v) for v in text.split(",") if v.strip())


def _parse_x_grid(text):
    lo, hi, n = str(text).split(":")
    return np.linspace(float(lo), float(hi), int(n))


_CONVERTERS = {
    "times": _parse_times, "N": int, "N_grid": _parse_grid_sizes, "tau": _parse_number,
    "a": _parse_number, "p": int, "k_order": int, "gamma": float, "M": lambda v: int(float(v)),
    "seed": int, "out": str, "format": str, "max_p": int, "threads": int, "grid": str, "raw": str,
}


def _read_config_file(path):
    parser = configparser.ConfigParser()
    parser.optionxform = str
    with open(path) as fh:
        text = fh.read()
    if not re.search(r"^\s*\[", text, re.M):
        text = "[main]\n" + text
    parser.read_string(text)
    values = {}
    for section in parser.sections():
        values.update(parser[section])
    return values


def _build_parser():
    parser = argparse.ArgumentParser(prog="chaosexp", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--times", "--t", dest="times")
        p.add_argument("--N", dest="N")
        p.add_argument("--N-grid", dest="N_grid")
        p.add_argument("--tau")
        p.add_argument("--a")
        p.add_argument("--p")
        p.add_argument("--k-order", dest="k_order")
        p.add_argument("--gamma")
        p.add_argument("--M")
        p.add_argument("--seed")
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--max-p", dest="max_p")
        p.add_argument("--threads")
        p.add_argument("--grid", help="x grid as lo:hi:count")
        p.add_argument("--raw", help="write raw replicates (little-endian float64) here")
    return parser


def _join_negative_values(argv):
    # argparse takes "-2:2:5" for a flag; glue such values onto their option
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and re.match(r"-\.?\d", tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_config(argv):
    """Turn command-line arguments into an ``ExperimentConfig``."""
    args = _build_parser().parse_args(_join_negative_values(argv))
    raw = {}
    if args.config:
        raw.update(_read_config_file(args.config))
    raw.update({k: v for k, v in vars(args).items()
                if v is not None and k not in ("command", "config")})
    names = {f.name for f in fields(ExperimentConfig)}
    values = {}
    for key, text in raw.items():
        key = key.replace("-", "_")
        if key not in names or key == "command":
            raise ValueError(f"unknown configuration key {key!r}")
        values[key] = _CONVERTERS[key](text)
    return ExperimentConfig(command=args.command, **values)


def validate(config):
    """Violations of the configuration, as human-readable strings."""
    out = []
    if config.command not in COMMANDS:
        out.append(f"unknown command {config.command!r}")
    times = tuple(config.times or ())
    if len(times) not in (1, 2):
        out.append("times must list one or two values")
    for t in times:
        if not t > 0.5:
            out.append(f"t must exceed 1/2 (got {t})")
    if len(times) == 2 and times[0] == times[1]:
        out.append("the two times must differ")
    needs_n = config.command in ("covariance", "cumulants", "expand", "simulate", "compare")
    if needs_n and config.N is None:
        out.append("N is required")
    if config.N is not None and config.N < 2:
        out.append("N must be at least 2")
    if config.N_grid is not None:
        grid = list(config.N_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            out.append("N grid must be strictly increasing")
        if grid and grid[0] < 2:
            out.append("N grid values must be at least 2")
    if config.command in ("coefficients", "expand", "compare", "ordering"):
        if config.p not in (2, 3, 4):
            out.append("p must be 2, 3 or 4")
        if len(times) == 2 and config.p != 2:
            out.append("two-time tables are built for p = 2")
    if config.k_order is not None and config.k_order < config.p - 1:
        out.append("k_order must be at least p - 1")
    if config.command in ("simulate", "compare"):
        if config.seed is None:
            out.append("seed is required")
        if config.M < 1000:
            out.append("M must be at least 1000")
    if config.command == "compare" and len(times) != 1:
        out.append("compare needs a single time")
    if config.max_p < 2:
        out.append("max_p must be at least 2")
    if not 0.0 <= config.a <= 1.0:
        out.append("a must lie in [0, 1]")
    if config.format not in ("csv", "json"):
        out.append("format must be csv or json")
    if len(times) == 2 and all(t > 0.5 for t in times) and times[0] != times[1]:
        tau = abs(times[0] - times[1])
        if config.tau is not None and abs(config.tau - tau) > 1e-12:
            out.append("tau must equal |t1 - t2|")
        if tau < 1 and config.command in ("coefficients", "expand"):
            try:
                coef.subsequence(tau, config.a, 1)
            except NoSubsequenceError as exc:
                out.append(f"a unreachable: {exc}")
    elif config.tau is not None and 0 < config.tau < 1:
        try:
            coef.subsequence(config.tau, config.a, 1)
        except NoSubsequenceError as exc:
            out.append(f"a unreachable: {exc}")
    try:
        _parse_x_grid(config.grid)
    except (ValueError, TypeError):
        out.append("grid must look like lo:hi:count")
    return out


def _emit(config, text, suffix=None):
    if config.out is None:
        sys.stdout.write(text)
        return
    path = Path(config.out)
    if suffix is not None:
        path = path.with_suffix(suffix)
    path.write_text(text)


def _summary(line):
    # the artifact may be on stdout, so the summary goes to stderr
    print(line, file=sys.stderr)


def _two_time_grid(config):
    times = config.times
    tau = abs(times[0] - times[1])
    if config.N_grid:
        return list(config.N_grid)
    seq = coef.subsequence(tau, config.a, 128)
    return [seq[i] for i in (0, 1, 2, 3, 5, 7, 11, 15, 23, 31, 47, 63) if seq[i] <= 800]


def _table(config):
    if len(config.times) == 1:
        return coef.coeff_table_wave_1d(config.times[0], config.p)
    t1, t2 = config.times
    return coef.coeff_table_two_time(t1, t2, config.a, _two_time_grid(config), config.p)


def _cmd_covariance(config):
    model = WaveModel(config.times, config.N)
    sigma = covariance_matrix(model).matrix
    if config.format == "json":
        _emit(config, dumps_json({"times": list(config.times), "N": config.N, "matrix": sigma}))
    else:
        header = [f"c{i}" for i in range(sigma.shape[1])]
        _emit(config, dumps_csv(header, [list(map(float, r)) for r in sigma]))
    _summary(f"covariance: dim={sigma.shape[0]} diag0={fmt_float(sigma[0, 0])} "
             f"min_eig={fmt_float(np.linalg.eigvalsh(sigma)[0])}")


def _cmd_cumulants(config):
    model = WaveModel(config.times, config.N)
    table = build_gamma_table(model, config.max_p)
    if config.format == "json":
        _emit(config, dumps_json(table.to_dict()))
    else:
        rows = [[r["p"], " ".join(map(str, r["idx"])), r["value"]] for r in table.records()]
        _emit(config, dumps_csv(["p", "idx", "value"], rows))
    _summary(f"cumulants: E[Gamma^(2)_11]={fmt_float(table.value(2, (1, 1)))}")


def _cmd_coefficients(config):
    table = _table(config)
    data = table.to_dict()
    if config.format == "json":
        _emit(config, dumps_json(data))
    else:
        rows = [[r["j"], " ".join(map(str, r["idx"])), r["k"], r["value"]] for r in data["coeffs"]]
        _emit(config, dumps_csv(["j", "idx", "k", "value"], rows))
    _summary(f"coefficients: c(I_3,1)={fmt_float(table.value(3, (1, 1, 1), 1))} "
             f"q={fmt_float(table.q)}")


def _cmd_expand(config):
    table = _table(config)
    spec = ExpansionSpec(table, config.N, config.k_order)
    xs = _parse_x_grid(config.grid)
    if table.d == 1:
        pts = xs
        coords = [["x"], [[float(x)] for x in xs]]
    else:
        g1, g2 = np.meshgrid(xs, xs, indexing="ij")
        pts = np.stack([g1.ravel(), g2.ravel()], axis=1)
        coords = [["x1", "x2"], [[float(a), float(b)] for a, b in pts]]
    ev = density(pts, spec)
    weights = list(range(1, table.p))
    header = coords[0] + ["density", "gaussian"] + [f"correction_w{w}" for w in weights]
    corr = {w: ev.correction_terms.get(w, np.zeros(len(coords[1]))) for w in weights}
    rows = []
    for n, c in enumerate(coords[1]):
        rows.append(c + [float(ev.total[n]), float(ev.base[n])] + [float(corr[w][n]) for w in weights])
    if config.format == "json":
        _emit(config, dumps_json({"columns": header, "rows": rows, "table": table.to_dict(), "N": config.N}))
    else:
        _emit(config, dumps_csv(header, rows))
    mass = expectation(lambda x: np.ones(len(x)), spec)
    _summary(f"expand: integral={fmt_float(mass)}")


def _cmd_simulate(config):
    model = WaveModel(config.times, config.N)
    samples = simulate_statistic(model, config.M, config.seed, config.threads)
    if config.raw:
        write_samples(config.raw, samples)
    report = mc_expectation(lambda x: np.ones(len(x)), model, config.M, config.seed, samples=samples)
    est = {k: v for k, v in report.estimates.items() if k != "mean"}
    if config.format == "json":
        data = report.to_dict()
        data["estimates"] = {k: {"value": v, "se": s} for k, (v, s) in est.items()}
        _emit(config, dumps_json(data))
    else:
        _emit(config, dumps_csv(["statistic", "value", "se"], [[k, v, s] for k, (v, s) in est.items()]))
    key = "k3" if model.d == 1 else "cross_12"
    _summary(f"simulate: {key}={fmt_float(est[key][0])} se={fmt_float(est[key][1])}")


def _cmd_compare(config):
    model = WaveModel(config.times, config.N)
    spec = ExpansionSpec(coef.coeff_table_wave_1d(config.times[0], config.p), config.N, config.k_order)
    cmp = empirical_vs_expansion(model, spec, config.M, config.seed, _parse_x_grid(config.grid),
                                 threads=config.threads)
    summary = cmp.summary()
    columns = ["x", "ecdf", "gauss_cdf", "exp_cdf"]
    rows = [[float(a), float(b), float(c), float(d)]
            for a, b, c, d in zip(cmp.grid, cmp.ecdf, cmp.gauss_cdf, cmp.exp_cdf)]
    if config.format == "json":
        _emit(config, dumps_json(dict(summary, columns=columns, rows=rows)))
    else:
        _emit(config, dumps_csv(columns, rows))
        if config.out is not None:
            _emit(config, dumps_json(summary), suffix=".json")
    _summary(f"compare: D_gauss={fmt_float(cmp.D_gauss)} D_exp={fmt_float(cmp.D_exp)} "
             f"ratio={fmt_float(cmp.ratio)}")


def _cmd_ordering(config):
    grid = list(config.N_grid or _parse_grid_sizes("2^4..2^12"))
    if len(config.times) != 1:
        raise DomainError("ordering is implemented for a single time")
    t = config.times[0]
    table = coef.coeff_table_wave_1d(t, config.p)
    curves = coef.wave_gamma_curves(t, grid, config.p + 1)
    report = coef.check_regular_ordering(table, curves)
    rows = [[r.j, " ".join(map(str, r.idx)), "" if r.k is None else r.k,
             float(r.expected_slope), float(r.observed_slope), str(r.passed).lower()]
            for r in report.rows]
    header = ["j", "idx", "k", "expected_slope", "observed_slope", "passed"]
    if config.format == "json":
        _emit(config, dumps_json({"rows": [dict(zip(header, r)) for r in rows], "passed": report.passed}))
    else:
        _emit(config, dumps_csv(header, rows))
    slopes = " ".join(f"j={r.j}:{r.observed_slope:.4f}" for r in report.rows)
    _summary(f"ordering: {slopes} passed={str(report.passed).lower()}")


_HANDLERS = {
    "covariance": _cmd_covariance, "cumulants": _cmd_cumulants, "coefficients": _cmd_coefficients,
    "expand": _cmd_expand, "simulate": _cmd_simulate, "compare": _cmd_compare,
    "ordering": _cmd_ordering,
}


def run(config):
    """Execute a validated configuration; returns the exit status."""
    problems = validate(config)
    if problems:
        for msg in problems:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    if config.threads is None:
        config.threads = default_threads()
    try:
        _HANDLERS[config.command](config)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in COMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            _build_parser().print_help()
            return EXIT_OK
        print(f"usage: chaosexp {{{','.join(COMMANDS)}}} [options]", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = parse_config(argv)
    except SystemExit as exc:
        # argparse already printed its message
        return EXIT_INVALID if exc.code else EXIT_OK
    except (ValueError, OSError, configparser.Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
