"""Sweeps over log-spaced sizes, summary statistics and scaling regressions."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import rules
from .algorithms import DEFAULT_BUDGET, OptimizerConfig, run
from .benchmarks import BENCHMARKS, make_benchmark
from .bitcore import RandomSource

log = logging.getLogger(__name__)

TIME_TO_OPTIMUM = "time-to-optimum"
TIME_TO_TARGET = "time-to-target"
PROTOCOLS = (TIME_TO_OPTIMUM, TIME_TO_TARGET)

NORMALIZATIONS = {"none": None, "n^2": "n^2", "n ln n": "n*ln(n)"}
_NORM_ALIASES = {"n²": "n^2", "n2": "n^2", "n·ln n": "n ln n", "nlnn": "n ln n", "n*ln(n)": "n ln n"}

DEFAULT_CAP_RULE = "30*n*ln(n)"
DEFAULT_PILOT_RULE = "3*n*ln(n)"
DEFAULT_TARGET_RUNS = 1000

# algorithm-index slot reserved for MIVS target pilots
TARGET_SLOT = 2**32 - 1

RESULT_COLUMNS = (
    "benchmark", "algorithm", "lambda_rule", "n", "repetition", "seed",
    "evaluations", "success", "best_fitness",
)
SUMMARY_COLUMNS = (
    "benchmark", "algorithm", "n", "mean", "median", "stddev",
    "success_rate", "normalized_mean", "normalization_rule",
)
REGRESSION_COLUMNS = ("algorithm", "skip", "slope_a", "intercept_b", "residual")


@dataclass(frozen=True)
class AlgorithmSpec:
    """An optimizer configuration under a display label."""

    label: str
    config: OptimizerConfig

    @property
    def lambda_rule(self) -> str:
        lam = self.config.lam
        return "" if lam is None else str(lam)


@dataclass
class ExperimentConfig:
    benchmark: str
    algorithms: list[AlgorithmSpec]
    n_start: int
    n_end: int
    size_count: int = 10
    repetitions: int = 50
    master_seed: int = 0
    budget_rule: object = DEFAULT_BUDGET
    protocol: str = TIME_TO_OPTIMUM
    normalization: str = "none"
    regression_skip: int | None = None
    cap_rule: object = DEFAULT_CAP_RULE
    pilot_rule: object = DEFAULT_PILOT_RULE
    target_runs: int = DEFAULT_TARGET_RUNS

    def __post_init__(self) -> None:
        if self.benchmark not in BENCHMARKS:
            raise ValueError(f"unknown benchmark {self.benchmark!r}; choose from {', '.join(BENCHMARKS)}")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        labels = [a.label for a in self.algorithms]
        if len(set(labels)) != len(labels):
            raise ValueError("algorithm labels must be unique")
        if self.n_start < 1:
            raise ValueError("n_start must be at least 1")
        if self.n_end < self.n_start:
            raise ValueError("n_end must not be below n_start")
        if self.size_count < 2 and self.n_end != self.n_start:
            raise ValueError("size_count must be at least 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"protocol must be one of {', '.join(PROTOCOLS)}")
        if self.protocol == TIME_TO_TARGET and self.benchmark != "mivs":
            raise ValueError("time-to-target is defined for mivs only")
        self.normalization = normalization_name(self.normalization)
        for r in (self.budget_rule, self.cap_rule, self.pilot_rule):
            rules.validate(r)
        if self.regression_skip is not None and self.regression_skip < 0:
            raise ValueError("regression_skip must be non-negative")
        if self.target_runs < 1:
            raise ValueError("target_runs must be at least 1")

    def sizes(self) -> list[int]:
        if self.n_start == self.n_end:
            sizes = [self.n_start]
        else:
            sizes = log_spaced_sizes(self.n_start, self.n_end, self.size_count)
        if self.benchmark == "mivs":
            sizes = _even(sizes)
        return sizes


@dataclass(frozen=True)
class RunRecord:
    benchmark: str
    algorithm: str
    lambda_rule: str
    n: int
    repetition: int
    seed: int
    evaluations: int
    success: bool
    best_fitness: float
    algorithm_index: int = field(default=0, compare=False)

    def row(self) -> list[str]:
        return [
            self.benchmark, self.algorithm, self.lambda_rule, str(self.n), str(self.repetition),
            str(self.seed), str(self.evaluations), "true" if self.success else "false",
            format_number(self.best_fitness),
        ]


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    median: float
    stddev: float
    success_rate: float
    truncated_count: int
    count: int
    single_sample: bool = False


def format_number(x: float) -> str:
    """Shortest round-trip text; integral values without a fraction."""
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return repr(x)


def normalization_name(rule: str) -> str:
    key = _NORM_ALIASES.get(rule, rule)
    if key not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {', '.join(NORMALIZATIONS)}")
    return key


def _even(sizes: Iterable[int]) -> list[int]:
    out: list[int] = []
    for s in sizes:
        e = max(4, 2 * round(s / 2))
        if not out or e > out[-1]:
            out.append(e)
    return out


def log_spaced_sizes(n_start: int, n_end: int, count: int, *, even: bool = False) -> list[int]:
    """``round(n_start * (n_end/n_start)**(i/(count-1)))``, deduplicated in order."""
    if not 1 <= n_start < n_end:
        raise ValueError("need 1 <= n_start < n_end")
    if count < 2:
        raise ValueError("count must be at least 2")
    ratio = n_end / n_start
    out: list[int] = []
    for i in range(count):
        s = n_end if i == count - 1 else int(round(n_start * ratio ** (i / (count - 1))))
        if not out or s > out[-1]:
            out.append(s)
    return _even(out) if even else out


def derive_seed(master: int, algorithm: int, size: int, repetition: int) -> int:
    """64-bit run seed: numpy ``SeedSequence([master, algorithm, size, repetition])``."""
    ss = np.random.SeedSequence([master, algorithm, size, repetition])
    return int(ss.generate_state(1, np.uint64)[0])


def target_level(t: float) -> int:
    """``round(t - 1/2)`` with halves rounded up."""
    return math.floor(t)


def mivs_target(
    n: int, rng: RandomSource, runs: int = DEFAULT_TARGET_RUNS, *,
    pilot_rule: object = DEFAULT_PILOT_RULE, graph=None,
) -> float:
    """Mean best fitness of ``runs`` (1+1) EA runs of ``ceil(pilot_rule(n))`` evaluations."""
    if n < 4 or n % 2:
        raise ValueError("mivs_target needs even n >= 4")
    cfg = OptimizerConfig("opo-ea", budget=pilot_rule)
    best = 0.0
    for _ in range(runs):
        f = make_benchmark("mivs", n, graph)
        best += run(f, cfg, rng).best_fitness
    return best / runs


def time_to_target(
    config: OptimizerConfig, n: int, t: float, cap: int | None = None, repetitions: int = 100,
    rng: RandomSource | None = None, *, graph=None,
) -> tuple[SummaryStats, list[RunRecord]]:
    """Runs stop at fitness ``>= round(t - 1/2)`` or after ``cap`` evaluations."""
    if cap is None:
        cap = rules.resolve_ceil(DEFAULT_CAP_RULE, n, minimum=1)
    rng = RandomSource(0) if rng is None else rng
    cfg = dataclasses.replace(config, budget=int(cap), target=float(target_level(t)))
    seeds = rng.generator.integers(0, 2**64, size=repetitions, dtype=np.uint64)
    records = []
    for rep, seed in enumerate(seeds.tolist()):
        f = make_benchmark("mivs", n, graph)
        res = run(f, cfg, RandomSource(seed))
        records.append(RunRecord(
            "mivs", config.algorithm, "" if config.lam is None else str(config.lam), n, rep,
            seed, res.evaluations_used, res.success, res.best_fitness,
        ))
    return summarize(records), records


def _one_run(task) -> RunRecord:
    bench, spec, ai, n, rep, seed, cfg = task
    f = make_benchmark(bench, n)
    res = run(f, cfg, RandomSource(seed))
    return RunRecord(bench, spec.label, spec.lambda_rule, n, rep, seed,
                     res.evaluations_used, res.success, res.best_fitness, ai)


def _tasks(cfg: ExperimentConfig, targets: dict[int, float]):
    for ai, spec in enumerate(cfg.algorithms):
        for si, n in enumerate(cfg.sizes()):
            if cfg.protocol == TIME_TO_TARGET:
                run_cfg = dataclasses.replace(
                    spec.config,
                    budget=rules.resolve_ceil(cfg.cap_rule, n, minimum=1),
                    target=float(target_level(targets[n])),
                )
            else:
                run_cfg = dataclasses.replace(spec.config, budget=cfg.budget_rule)
            for rep in range(cfg.repetitions):
                seed = derive_seed(cfg.master_seed, ai, si, rep)
                yield (cfg.benchmark, spec, ai, n, rep, seed, run_cfg)


def experiment_targets(cfg: ExperimentConfig) -> dict[int, float]:
    """MIVS targets per size; empty for time-to-optimum."""
    if cfg.protocol != TIME_TO_TARGET:
        return {}
    return {
        n: mivs_target(n, RandomSource(derive_seed(cfg.master_seed, TARGET_SLOT, si, 0)),
                       cfg.target_runs, pilot_rule=cfg.pilot_rule)
        for si, n in enumerate(cfg.sizes())
    }


def run_experiment(
    cfg: ExperimentConfig, parallelism: int = 1, targets: dict[int, float] | None = None
) -> list[RunRecord]:
    """Every (algorithm, size, repetition) run, sorted by that triple.

    The result depends on ``cfg`` alone, not on ``parallelism``.
    """
    if targets is None:
        targets = experiment_targets(cfg)
    tasks = list(_tasks(cfg, targets))
    if parallelism > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(_one_run, tasks, chunksize=max(1, len(tasks) // (4 * parallelism))))
    else:
        records = [_one_run(t) for t in tasks]
    records.sort(key=lambda r: (r.algorithm_index, r.n, r.repetition))
    if cfg.protocol == TIME_TO_OPTIMUM:
        for r in records:
            if not r.success:
                log.warning("%s n=%d rep=%d did not reach the optimum within budget",
                            r.algorithm, r.n, r.repetition)
    return records


def summarize(records: Sequence[RunRecord], n: int | None = None) -> SummaryStats:
    """Mean, lower-middle median and sample stddev over runs, capped runs included."""
    if n is not None:
        records = [r for r in records if r.n == n]
    if not records:
        raise ValueError("no records to summarize")
    sizes = {r.n for r in records}
    if len(sizes) > 1:
        raise ValueError("records span several sizes; pass n")
    evals = np.sort(np.array([r.evaluations for r in records], dtype=np.float64))
    k = evals.size
    ok = sum(r.success for r in records)
    return SummaryStats(
        n=sizes.pop(),
        mean=float(evals.mean()),
        median=float(evals[(k - 1) // 2]),
        stddev=float(evals.std(ddof=1)) if k > 1 else 0.0,
        success_rate=ok / k,
        truncated_count=k - ok,
        count=k,
        single_sample=k == 1,
    )


def normalize(stats: SummaryStats | float, rule: str, n: int | None = None) -> float:
    """``mean / rule(n)``; a bare number is normalized with an explicit ``n``."""
    if isinstance(stats, SummaryStats):
        value, n = stats.mean, stats.n
    else:
        value = float(stats)
    expr = NORMALIZATIONS[normalization_name(rule)]
    if expr is None:
        return value
    if n is None:
        raise ValueError("n is required to normalize a bare value")
    return value / rules.evaluate(expr, n)


def loglog_slope(sizes: Sequence[float], means: Sequence[float], skip: int = 0) -> tuple[float, float, float]:
    """Least-squares fit ``ln T = a ln n + b`` over the points after the first ``skip``."""
    x = np.log(np.asarray(sizes, dtype=np.float64)[skip:])
    y = np.log(np.asarray(means, dtype=np.float64)[skip:])
    if x.size < 2 or x.size != y.size:
        raise ValueError("need at least two points of equal length after skipping")
    xc = x - x.mean()
    a = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    b = float(y.mean() - a * x.mean())
    res = float(np.sum((y - (a * x + b)) ** 2))
    return a, b, res


@dataclass(frozen=True)
class SummaryRow:
    benchmark: str
    algorithm: str
    stats: SummaryStats
    normalization: str

    @property
    def normalized_mean(self) -> float:
        return normalize(self.stats, self.normalization)

    def row(self) -> list[str]:
        s = self.stats
        return [
            self.benchmark, self.algorithm, str(s.n), format_number(s.mean), format_number(s.median),
            format_number(s.stddev), format_number(s.success_rate),
            format_number(self.normalized_mean), self.normalization,
        ]


def summary_rows(records: Sequence[RunRecord], normalization: str = "none") -> list[SummaryRow]:
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.algorithm_index, r.algorithm, r.n), []).append(r)
    return [
        SummaryRow(recs[0].benchmark, alg, summarize(recs), normalization_name(normalization))
        for (_, alg, _), recs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][2]))
    ]


def regressions(rows: Sequence[SummaryRow], skip: int) -> list[tuple[str, int, float, float, float]]:
    by_alg: dict[str, list[SummaryRow]] = {}
    for r in rows:
        by_alg.setdefault(r.algorithm, []).append(r)
    out = []
    for alg, rs in by_alg.items():
        if len(rs) - skip < 2:
            log.warning("%s: too few sizes for a regression with skip=%d", alg, skip)
            continue
        a, b, res = loglog_slope([r.stats.n for r in rs], [r.stats.mean for r in rs], skip)
        out.append((alg, skip, a, b, res))
    return out


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def records_csv(records: Sequence[RunRecord]) -> str:
    return _csv_text(RESULT_COLUMNS, (r.row() for r in records))


def summary_csv(rows: Sequence[SummaryRow]) -> str:
    return _csv_text(SUMMARY_COLUMNS, (r.row() for r in rows))


def regression_csv(regs: Sequence[tuple]) -> str:
    return _csv_text(
        REGRESSION_COLUMNS,
        ([alg, str(skip), format_number(a), format_number(b), format_number(res)]
         for alg, skip, a, b, res in regs),
    )


def read_summary_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SUMMARY_COLUMNS:
            raise ValueError(f"{path}: not a summary CSV")
        return list(reader)


def theorem1_curve(n: float, lam: float) -> float:
    """``lam * n + n^2 ln n / sqrt(lam)``."""
    return lam * n + n * n * math.log(n) / math.sqrt(lam)


def emit_plot_data(
    summary_paths: Sequence[str | os.PathLike], out_dir: str | os.PathLike, *,
    statistic: str = "mean", lambda_rule: object = "(n ln n)^2/3", scale: float = 1.0,
) -> list[Path]:
    """Write per-(benchmark, algorithm) series and reference curves as TSV.

    Series columns are ``n``, the normalized mean or median, and the
    normalized stddev.  Reference files hold ``n^2``, ``n^(5/3)`` and the
    Theorem 1 bound at each size, multiplied by ``scale``.  Nothing is
    written unless every input parses.
    """
    if statistic not in ("mean", "median"):
        raise ValueError("statistic must be mean or median")
    if not summary_paths:
        raise ValueError("no summary files given")
    rows: list[dict] = []
    for p in summary_paths:
        if not Path(p).is_file():
            raise FileNotFoundError(f"summary file {p} does not exist")
        rows.extend(read_summary_csv(p))
    if not rows:
        raise ValueError("summary files contain no rows")
    series: dict[tuple[str, str], list[tuple[int, float, float]]] = {}
    sizes: dict[str, set[int]] = {}
    for r in rows:
        n = int(r["n"])
        rule = r["normalization_rule"]
        div = 1.0 if rule == "none" else rules.evaluate(NORMALIZATIONS[normalization_name(rule)], n)
        series.setdefault((r["benchmark"], r["algorithm"]), []).append(
            (n, float(r[statistic]) / div, float(r["stddev"]) / div)
        )
        sizes.setdefault(r["benchmark"], set()).add(n)
    files: dict[Path, str] = {}
    out = Path(out_dir)
    for (bench, alg), pts in sorted(series.items()):
        text = "n\tvalue\tstddev\n" + "".join(
            f"{n}\t{format_number(v)}\t{format_number(s)}\n" for n, v, s in sorted(pts)
        )
        files[out / f"series_{bench}_{_slug(alg)}.tsv"] = text
    for bench, ns in sorted(sizes.items()):
        lines = ["n\tn^2\tn^5/3\ttheorem1\n"]
        for n in sorted(ns):
            lam = rules.evaluate(lambda_rule, n)
            lines.append(
                f"{n}\t{format_number(scale * n**2)}\t{format_number(scale * n ** (5 / 3))}"
                f"\t{format_number(scale * theorem1_curve(n, lam))}\n"
            )
        files[out / f"reference_{bench}.tsv"] = "".join(lines)
    out.mkdir(parents=True, exist_ok=True)
    for path, text in files.items():
        path.write_text(text)
    return list(files)


def _slug(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)
