import math

import numpy as np
import pytest

from dega.algorithms import (
    ALGORITHMS,
    DEGA_VARIANTS,
    OptimizerConfig,
    Population2,
    UnknownAlgorithm,
    run,
    select_population,
    umda,
)
from dega.benchmarks import make_benchmark
from dega.bitcore import BitString, RandomSource


def cfg_for(alg, **kw):
    if alg == "dega-a" and "lam" not in kw:
        kw["lam"] = "ln"
    return OptimizerConfig(alg, **kw)


@pytest.mark.parametrize("alg", ALGORITHMS)
@pytest.mark.parametrize("bench, n", [("lo", 40), ("om", 60), ("lfhw", 30)])
def test_every_algorithm_reaches_the_optimum(alg, bench, n):
    f = make_benchmark(bench, n)
    res = run(f, cfg_for(alg), RandomSource(11))
    assert res.success
    assert res.best_fitness == f.known_optimum
    assert f.evaluation_count == res.evaluations_used


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_every_algorithm_finds_an_independent_set(alg):
    # F22 has deep local optima; only feasibility is guaranteed within the cap
    n = 40
    f = make_benchmark("mivs", n)
    extra = {"exploitation_cap": "lam*ln(n)"} if alg == "dega-a" else {}
    res = run(f, cfg_for(alg, budget="30*n*ln(n)", **extra), RandomSource(11))
    assert 0 <= res.best_fitness <= f.known_optimum
    assert f.evaluation_count == res.evaluations_used


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_same_seed_same_run(alg):
    runs = [run(make_benchmark("lo", 50), cfg_for(alg), RandomSource(5)) for _ in range(2)]
    assert runs[0].evaluations_used == runs[1].evaluations_used
    assert np.array_equal(runs[0].trajectory, runs[1].trajectory)


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_budget_is_respected(alg):
    f = make_benchmark("lo", 200)
    res = run(f, cfg_for(alg, budget=50), RandomSource(1))
    assert res.evaluations_used == 50
    assert not res.success


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_trajectory_is_strictly_improving(alg):
    res = run(make_benchmark("om", 80), cfg_for(alg), RandomSource(2))
    evals, fit = res.trajectory[:, 0], res.trajectory[:, 1]
    assert np.all(np.diff(evals) > 0) and np.all(np.diff(fit) > 0)
    assert fit[-1] == res.best_fitness
    assert evals[-1] <= res.evaluations_used


@pytest.mark.parametrize("alg", DEGA_VARIANTS)
def test_dega_starts_antipodal(alg):
    for seed in range(10):
        res = run(make_benchmark("om", 33), cfg_for(alg, budget=2), RandomSource(seed))
        assert res.initial_distance == 33


def test_one_plus_one_ea_leading_ones_mean():
    # exact expectation for uniform initialization: n^2/2 ((1-1/n)^(1-n) - (1-1/n))
    n, reps = 40, 600
    expected = n * n / 2 * ((1 - 1 / n) ** (1 - n) - (1 - 1 / n))
    rng = RandomSource(123)
    times = np.array([
        run(make_benchmark("lo", n), OptimizerConfig("opo-ea"), rng).evaluations_used
        for _ in range(reps)
    ])
    # the first evaluation is the initial point
    assert abs(times.mean() - 1 - expected) < 4 * times.std(ddof=1) / math.sqrt(reps)


def test_umda_frequencies_stay_inside_borders():
    n = 50
    freq = np.empty(n)
    umda(make_benchmark("om", n), OptimizerConfig("umda", budget=3000), RandomSource(4), frequencies=freq)
    assert np.all(freq >= 1 / n - 1e-12) and np.all(freq <= 1 - 1 / n + 1e-12)


def test_config_validation():
    with pytest.raises(UnknownAlgorithm) as info:
        OptimizerConfig("nosuch")
    for name in ALGORITHMS:
        assert name in str(info.value)
    with pytest.raises(ValueError):
        OptimizerConfig("opo-ea", lam=3)
    with pytest.raises(ValueError):
        OptimizerConfig("dega-a")
    with pytest.raises(ValueError):
        OptimizerConfig("umda", lam=3, mu=5).resolved(100)
    with pytest.raises(ValueError):
        OptimizerConfig("tpo-ga", p_c=1.5)


def test_resolved_parameters():
    p = OptimizerConfig("dega-a", lam="(n ln n)^2/3", exploitation_cap="lam*ln(n)").resolved(100)
    assert p["lambda"] == round((100 * math.log(100)) ** (2 / 3))
    assert p["exploitation_cap"] == math.ceil(p["lambda"] * math.log(100))
    assert p["budget"] == 500 * 100**2
    assert OptimizerConfig("dega-a", lam=1).resolved(10)["lambda"] == 2
    assert OptimizerConfig("ollga").resolved(100)["lambda"] == round(math.sqrt(math.log(100)))


def b(s):
    return BitString.from_str(s)


def test_selection_drops_the_unfit_offspring():
    pop = select_population(b("0000"), b("1111"), b("0011"), 1.0, 1.0, 0.0, RandomSource(0))
    assert (str(pop.x1), str(pop.x2)) == ("0000", "1111")


def test_selection_prefers_diversity_among_equals():
    # dropping the offspring keeps the distance-4 pair
    for seed in range(20):
        pop = select_population(b("0000"), b("1111"), b("0011"), 1.0, 1.0, 1.0, RandomSource(seed))
        assert {str(pop.x1), str(pop.x2)} == {"0000", "1111"}


def test_selection_breaks_ties_randomly():
    kept = set()
    for seed in range(50):
        pop = select_population(b("0000"), b("1111"), b("0011"), 1.0, 1.0, 2.0, RandomSource(seed))
        assert "0011" in (str(pop.x1), str(pop.x2))
        kept.add(frozenset((str(pop.x1), str(pop.x2))))
    assert len(kept) == 2


def test_selection_requires_a_diversity_phase():
    with pytest.raises(ValueError):
        select_population(b("00"), b("11"), b("01"), 0.0, 1.0, 1.0, RandomSource(0))


def test_population_relabel():
    pop = Population2(b("10"), b("11"), 2.0, 1.0).relabeled()
    assert pop.f1 == 1.0 and str(pop.x1) == "11"


def test_trace_only_for_dega():
    with pytest.raises(ValueError):
        run(make_benchmark("lo", 10), OptimizerConfig("opo-ea"), RandomSource(0), trace=True)
    with pytest.raises(ValueError):
        run(make_benchmark("om", 10), OptimizerConfig("dega-a", lam=2), RandomSource(0), trace=True)
