"""Command-line interface: ``dega <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 runtime failure, 3 probe failure,
4 probe inconclusive.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, config, experiments as ex, instrumentation as ins
from .algorithms import ALGORITHMS, DEFAULT_BUDGET, OptimizerConfig, run
from .benchmarks import BENCHMARKS, load_graph, make_benchmark
from .bitcore import RandomSource

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_PROBE_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _algorithm(text: str) -> str:
    if text not in ALGORITHMS:
        raise argparse.ArgumentTypeError(
            f"unknown algorithm {text!r}; valid identifiers: {', '.join(ALGORITHMS)}"
        )
    return text


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(
        prog="dega",
        description="Runtime experiments for two-parent diversity-exploiting GAs on pseudo-Boolean "
        f"benchmarks. Algorithms: {', '.join(ALGORITHMS)}. Benchmarks: {', '.join(BENCHMARKS)}.",
        formatter_class=fmt,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--log-level", default="WARNING", help="logging level")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="one seeded run", formatter_class=fmt)
    r.add_argument("--alg", required=True, type=_algorithm, help=f"one of: {', '.join(ALGORITHMS)}")
    r.add_argument("--bench", required=True, choices=BENCHMARKS, help="benchmark")
    r.add_argument("--n", required=True, type=_positive, help="problem size")
    r.add_argument("--lambda", dest="lam", default=None,
                   help="lambda (number or rule such as 'ln', '(n ln n)^2/3'); "
                   "defaults: ollga sqrt-ln, umda 'sqrt(n) ln'")
    r.add_argument("--p-c", type=float, default=None, help="crossover probability of tpo-ga (default 0.5)")
    r.add_argument("--k", default=None, help="ollga mutation strength rule (default sqrt-ln)")
    r.add_argument("--mu", default=None, help="umda selection size rule (default ln)")
    r.add_argument("--exploitation-cap", default=None,
                   help="dega-a cap on evaluations per exploitation phase; may use lam, e.g. 'lam*ln(n)'")
    r.add_argument("--budget", default=DEFAULT_BUDGET, help="evaluation budget rule")
    r.add_argument("--target", type=float, default=None,
                   help="stop at this fitness (default: the known optimum)")
    r.add_argument("--graph", type=Path, default=None, help="edge-list file for mivs (default F22)")
    r.add_argument("--seed", type=_seed, default=0, help="64-bit seed")
    r.add_argument("--trace", type=Path, default=None, help="write the phase trace TSV here (LO, DEGA)")

    s = sub.add_parser("sweep", help="run an experiment config and write CSVs", formatter_class=fmt)
    _config_args(s)
    s.add_argument("--output-dir", type=Path, required=True, help="directory for the CSV files")
    s.add_argument("--parallelism", type=_positive, default=os.cpu_count() or 1, help="worker processes")

    g = sub.add_parser("regress", help="log-log slopes from summary CSVs", formatter_class=fmt)
    g.add_argument("--summary", type=Path, nargs="+", required=True, help="summary CSV files")
    g.add_argument("--skip", type=int, default=4, help="leading sizes excluded from the fit")
    g.add_argument("--output", type=Path, default=None, help="regression CSV (default: stdout)")

    pr = sub.add_parser("probes", help="Monte-Carlo checks of the DEGA A phase laws", formatter_class=fmt)
    pr.add_argument("--n", type=int, default=100, help="problem size")
    pr.add_argument("--lambda", dest="lam", type=int, default=10, help="crossover bias parameter")
    pr.add_argument("--samples", type=_positive, default=100_000,
                    help="improvement events for the improvement-time and free-rider probes")
    pr.add_argument("--runs", type=_positive, default=1000, help="runs for the critical-bit probe (>= 1000)")
    pr.add_argument("--threshold", type=float, default=ins.Z_THRESHOLD, help="|z| pass threshold")
    pr.add_argument("--seed", type=_seed, default=0, help="64-bit seed")

    m = sub.add_parser("mivs-target", help="target fitness t(n) from (1+1) EA pilots", formatter_class=fmt)
    m.add_argument("--n", type=int, nargs="+", required=True, help="even problem sizes")
    m.add_argument("--runs", type=_positive, default=ex.DEFAULT_TARGET_RUNS, help="pilot runs")
    m.add_argument("--pilot-rule", default=ex.DEFAULT_PILOT_RULE, help="pilot budget rule")
    m.add_argument("--seed", type=_seed, default=0, help="64-bit seed")

    d = sub.add_parser("plot-data", help="plot-ready TSV series from summary CSVs", formatter_class=fmt)
    d.add_argument("--summary", type=Path, nargs="+", required=True, help="summary CSV files")
    d.add_argument("--output-dir", type=Path, required=True, help="directory for the TSV files")
    d.add_argument("--statistic", choices=("mean", "median"), default="mean", help="series statistic")
    d.add_argument("--lambda-rule", default="(n ln n)^2/3", help="lambda rule for the Theorem 1 curve")
    d.add_argument("--scale", type=float, default=1.0, help="constant applied to the reference curves")
    return p


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="INI experiment config")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a key, e.g. repetitions=5 or alg.a.lambda=2")
    p.add_argument("--seed", type=_seed, default=None, help="master seed (overrides the config)")


def _cmd_run(a) -> int:
    graph = load_graph(a.graph.read_text()) if a.graph else None
    f = make_benchmark(a.bench, a.n, graph)
    params = {"lambda": a.lam, "p_c": a.p_c, "k": a.k, "mu": a.mu, "exploitation_cap": a.exploitation_cap}
    params = {k: v for k, v in params.items() if v is not None}
    try:
        cfg = OptimizerConfig.from_parameters(a.alg, params, budget=a.budget, target=a.target)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = run(f, cfg, RandomSource(a.seed), trace=a.trace is not None)
    print(f"algorithm={a.alg} benchmark={a.bench} n={a.n} seed={a.seed}")
    print(f"evaluations={res.evaluations_used}")
    print(f"success={'true' if res.success else 'false'}")
    print(f"best_fitness={ex.format_number(res.best_fitness)}")
    if a.trace is not None:
        if res.phase_trace is None:
            raise UsageError("--trace is available for DEGA variants only")
        a.trace.write_text(res.phase_trace.to_tsv())
    return EXIT_OK


def _load_config(a) -> ex.ExperimentConfig:
    text = a.config.read_text() if a.config else ""
    overrides = list(a.overrides)
    if a.seed is not None:
        overrides.append(f"master_seed={a.seed}")
    try:
        return config.parse(text, overrides)
    except config.ConfigError as exc:
        raise UsageError(str(exc)) from None


def _writable_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise RuntimeError(f"cannot create {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise RuntimeError(f"output directory {path} is not writable")


def _cmd_sweep(a) -> int:
    cfg = _load_config(a)
    _writable_dir(a.output_dir)
    records = ex.run_experiment(cfg, parallelism=a.parallelism)
    rows = ex.summary_rows(records, cfg.normalization)
    files = {"results.csv": ex.records_csv(records), "summary.csv": ex.summary_csv(rows)}
    if cfg.regression_skip is not None:
        files["regression.csv"] = ex.regression_csv(ex.regressions(rows, cfg.regression_skip))
    for name, text in files.items():
        (a.output_dir / name).write_text(text)
    for r in rows:
        s = r.stats
        print(f"{r.algorithm} n={s.n} mean={s.mean:.6g} median={s.median:.6g} sd={s.stddev:.6g} "
              f"success={s.success_rate:.3g} normalized={r.normalized_mean:.6g}")
    return EXIT_OK


def _cmd_regress(a) -> int:
    rows = []
    for path in a.summary:
        rows.extend(ex.read_summary_csv(path))
    if not rows:
        raise RuntimeError("summary files contain no rows")
    by_alg: dict[str, list[dict]] = {}
    for r in rows:
        by_alg.setdefault(r["algorithm"], []).append(r)
    regs = []
    for alg, rs in by_alg.items():
        rs.sort(key=lambda r: int(r["n"]))
        a_, b_, res = ex.loglog_slope([int(r["n"]) for r in rs], [float(r["mean"]) for r in rs], a.skip)
        regs.append((alg, a.skip, a_, b_, res))
    text = ex.regression_csv(regs)
    if a.output:
        a.output.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_probes(a) -> int:
    if a.lam < 2:
        raise UsageError("--lambda must be at least 2")
    rng = RandomSource(a.seed)
    reports = [
        ins.critical_bit_probe(a.n, a.lam, a.runs, rng, threshold=a.threshold),
        ins.improvement_time_probe(a.lam, a.samples, rng, n=max(a.n, 1), threshold=a.threshold),
        ins.free_rider_live(a.n, a.lam, a.samples, rng, threshold=a.threshold),
    ]
    for r in reports:
        print(r.line())
    if any(r.status == ins.FAIL for r in reports):
        return EXIT_PROBE_FAIL
    if any(r.status == ins.INCONCLUSIVE for r in reports):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _cmd_mivs_target(a) -> int:
    for i, n in enumerate(a.n):
        try:
            t = ex.mivs_target(n, RandomSource(ex.derive_seed(a.seed, ex.TARGET_SLOT, i, 0)),
                               a.runs, pilot_rule=a.pilot_rule)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        print(f"n={n} t={t:.6f} target={ex.target_level(t)}")
    return EXIT_OK


def _cmd_plot_data(a) -> int:
    for path in ex.emit_plot_data(a.summary, a.output_dir, statistic=a.statistic,
                                  lambda_rule=a.lambda_rule, scale=a.scale):
        print(path)
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "regress": _cmd_regress,
    "probes": _cmd_probes,
    "mivs-target": _cmd_mivs_target,
    "plot-data": _cmd_plot_data,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=a.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[a.command](a)
    except UsageError as exc:
        print(f"dega {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"dega {a.command}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
