"""Acceptance criteria at full scale.

Each test prints ``criterion <k>: PASS|FAIL <detail>`` as it finishes; the
lines are repeated in the terminal summary.  The whole module takes roughly
a quarter of an hour on one core.
"""

import itertools
import math

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from dega import instrumentation as ins
from dega.algorithms import DEGA_VARIANTS, OptimizerConfig, run
from dega.benchmarks import make_benchmark, pbo_f22_graph
from dega.bitcore import RandomSource
from dega.experiments import (
    AlgorithmSpec,
    ExperimentConfig,
    derive_seed,
    log_spaced_sizes,
    loglog_slope,
    mivs_target,
    records_csv,
    regression_csv,
    regressions,
    run_experiment,
    summarize,
    summary_csv,
    summary_rows,
    time_to_target,
)

pytestmark = pytest.mark.acceptance

SEED = 20240601


def report(capsys, key, ok, detail):
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    with capsys.disabled():
        print(f"\n{line}")
    assert ok, line


def lo_sweep(spec, n_start, n_end, count, reps, seed):
    cfg = ExperimentConfig("lo", [spec], n_start, n_end, count, reps, seed, normalization="n^2")
    return summary_rows(run_experiment(cfg), "n^2")


def test_c01_dega_scaling_slope(capsys):
    rows = lo_sweep(AlgorithmSpec("dega", OptimizerConfig("dega-a", lam="(n ln n)^2/3")),
                    100, 3000, 10, 50, SEED + 1)
    (_, _, a, _, res), = regressions(rows, 4)
    norm = " ".join(f"{r.stats.n}:{r.normalized_mean:.3f}" for r in rows)
    report(capsys, 1, 1.60 <= a <= 1.90, f"slope={a:.4f} (target [1.60, 1.90]) residual={res:.2e} T/n^2 {norm}")


def test_c02_lambda_two_is_quadratic(capsys):
    rows = lo_sweep(AlgorithmSpec("dega2", OptimizerConfig("dega-a", lam=2)), 100, 3000, 10, 50, SEED + 2)
    (_, _, a, _, _), = regressions(rows, 4)
    report(capsys, 2, a >= 1.90, f"slope={a:.4f} (target >= 1.90)")


def test_c03_two_plus_one_ga_quadratic(capsys):
    rows = lo_sweep(AlgorithmSpec("ga", OptimizerConfig("tpo-ga")), 100, 800, 4, 50, SEED + 3)
    norm = [r.normalized_mean for r in rows]
    spread = max(norm) / min(norm) - 1
    ok = abs(norm[-1] / norm[0] - 1) < 0.5
    report(capsys, 3, ok, "T/n^2 " + " ".join(f"{r.stats.n}:{v:.3f}" for r, v in zip(rows, norm))
           + f" end-to-end change={norm[-1] / norm[0] - 1:+.3f} max spread={spread:.3f} (target < 0.5)")


def test_c04_variant_ordering(capsys):
    specs = [AlgorithmSpec("bb", OptimizerConfig("dega-a-bb")),
             AlgorithmSpec("a", OptimizerConfig("dega-a", lam="n^2/3")),
             AlgorithmSpec("ga", OptimizerConfig("tpo-ga"))]
    cfg = ExperimentConfig("lo", specs, 1000, 1000, 2, 50, SEED + 4)
    rows = summary_rows(run_experiment(cfg))
    s = [r.stats for r in rows]

    def gap(x, y):
        return (y.mean - x.mean) / math.sqrt(x.stddev**2 / x.count + y.stddev**2 / y.count)

    g1, g2 = gap(s[0], s[1]), gap(s[1], s[2])
    ok = g1 > 2 and g2 > 2
    report(capsys, 4, ok, f"means bb={s[0].mean:.0f} a={s[1].mean:.0f} ga={s[2].mean:.0f} "
           f"gaps={g1:.1f},{g2:.1f} standard errors (target > 2)")


def test_c05_critical_bit(capsys):
    rep = ins.critical_bit_probe(100, 10, 10_000, RandomSource(SEED + 5))
    report(capsys, 5, rep.passed and abs(rep.z_score) <= 4, rep.line())


@pytest.mark.parametrize("lam", [2, 16, 64])
def test_c06_improvement_time(capsys, lam):
    rep = ins.improvement_time_probe(lam, 100_000, RandomSource(SEED + 6 + lam))
    rel = rep.details["rel_error"]
    ok = rel <= 0.05 and abs(rep.details["chi2_z"]) <= 4
    report(capsys, f"6[lambda={lam}]", ok, f"rel_error={rel:.4f} (<= 0.05) {rep.line()}")


def test_c07_free_rider(capsys):
    rep = ins.free_rider_live(500, "(n ln n)^2/3", 100_000, RandomSource(SEED + 7))
    tail5 = rep.details.get("tail_5", math.nan)
    ok = rep.samples >= 100_000 and 1.9 <= rep.empirical_mean <= 2.1 and tail5 <= 0.0625 * 1.2
    report(capsys, 7, ok, f"mean={rep.empirical_mean:.4f} (in [1.9, 2.1]) Pr[jump>=5]={tail5:.4f} "
           f"(<= 0.075) {rep.line()}")


def test_c08_diversity_monotonicity(capsys):
    traces = ins.collect_traces(200, "(n ln n)^2/3", 100, RandomSource(SEED + 8))
    bad = sum(ins.monotonicity_violations(tr) for tr in traces)
    report(capsys, 8, bad == 0, f"violations={bad} over 100 traced runs at n=200")


def test_c09_antipodal_start(capsys):
    counts = {}
    for alg in DEGA_VARIANTS:
        cfg = OptimizerConfig(alg, lam="ln" if alg == "dega-a" else None, budget=2)
        rng = RandomSource(SEED + 9)
        counts[alg] = sum(run(make_benchmark("om", 100), cfg, rng).initial_distance == 100 for _ in range(100))
    report(capsys, 9, all(c == 100 for c in counts.values()), f"antipodal starts {counts}")


def _mis_exhaustive(n, edges):
    # all 2^n subsets as bit masks; independent iff no edge has both ends set
    masks = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(masks.size, dtype=bool)
    for i, j in edges:
        ok &= ((masks >> (i - 1)) & 1 & (masks >> (j - 1))) == 0
    sizes = np.zeros(masks.size, dtype=np.int64)
    for v in range(n):
        sizes += (masks >> v) & 1
    sizes[~ok] = -1
    best = int(sizes.max())
    return best, int(np.sum(sizes == best))


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12, 14, 16])
def test_c10_mivs_generator_gate(capsys, n):
    best, count = _mis_exhaustive(n, pbo_f22_graph(n).edges)
    ok = best == n // 2 + 1 and count == 1
    report(capsys, f"10[n={n}]", ok, f"max independent set={best} (expected {n // 2 + 1}) maximizers={count}")


def test_c11_mivs_time_to_target(capsys):
    dega = OptimizerConfig("dega-a", lam="ln", exploitation_cap="lam*ln(n)")
    ga = OptimizerConfig("tpo-ga")
    parts = []
    ok = True
    for i, n in enumerate([100, 200, 300, 400, 500]):
        t = mivs_target(n, RandomSource(derive_seed(SEED + 11, 0, i, 0)))
        a, _ = time_to_target(dega, n, t, repetitions=100, rng=RandomSource(derive_seed(SEED + 11, 1, i, 0)))
        b, _ = time_to_target(ga, n, t, repetitions=100, rng=RandomSource(derive_seed(SEED + 11, 2, i, 0)))
        ratio = a.median / b.median
        ok &= ratio <= 3
        parts.append(f"n={n} t={t:.2f} median dega={a.median:.0f} ga={b.median:.0f} ratio={ratio:.2f} "
                     f"success dega={a.success_rate:.2f} ga={b.success_rate:.2f}")
    report(capsys, 11, ok, "; ".join(parts) + " (target ratio <= 3)")


def test_c12_sweep_determinism(capsys):
    specs = [AlgorithmSpec("a", OptimizerConfig("dega-a", lam="(n ln n)^2/3")),
             AlgorithmSpec("ga", OptimizerConfig("tpo-ga")),
             AlgorithmSpec("umda", OptimizerConfig("umda"))]
    cfg = ExperimentConfig("lo", specs, 50, 200, 3, 5, SEED + 12, normalization="n^2", regression_skip=0)

    def files(parallelism):
        recs = run_experiment(cfg, parallelism=parallelism)
        rows = summary_rows(recs, cfg.normalization)
        return records_csv(recs) + summary_csv(rows) + regression_csv(regressions(rows, 0))

    first, second, pooled = files(1), files(1), files(2)
    ok = first == second == pooled
    report(capsys, 12, ok, f"{len(first)} bytes identical across two sequential runs and a 2-worker run")


@pytest.mark.parametrize("k", [1.0, 1.5, 2.0])
def test_c13_slope_oracle(capsys, k):
    ns = log_spaced_sizes(100, 3000, 10)
    a, _, _ = loglog_slope(ns, [2.5 * n**k for n in ns], skip=4)
    report(capsys, f"13[k={k}]", abs(a - k) < 1e-9, f"recovered slope {a!r}")


def test_summary_is_sorted_and_complete():
    # guards the sweep bookkeeping the criteria rely on
    cfg = ExperimentConfig("om", [AlgorithmSpec("ea", OptimizerConfig("opo-ea"))], 10, 40, 3, 2, SEED)
    recs = run_experiment(cfg)
    assert [(r.n, r.repetition) for r in recs] == list(itertools.product([10, 20, 40], [0, 1]))
    assert summarize(recs, 10).count == 2
