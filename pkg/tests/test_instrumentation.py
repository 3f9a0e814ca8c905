import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dega import _kernels as K
from dega import instrumentation as ins
from dega.algorithms import OptimizerConfig, Population2, dega_a
from dega.benchmarks import leading_ones, make_benchmark
from dega.bitcore import BitString, RandomSource
from dega.trace import PhaseTrace


def pop_of(a, b):
    x1, x2 = BitString.from_str(a), BitString.from_str(b)
    return Population2(x1, x2, leading_ones(x1), leading_ones(x2))


def test_diversity_stats_by_hand():
    # LO 2 and 2: NO = positions 4..8 (1-based)
    ev = ins.diversity_stats(pop_of("11010011", "11001010"))
    assert ev.kind == ins.DIVERSITY
    assert (ev.H, ev.B, ev.S, ev.H_bar) == (3, 1, 1, 2)
    assert ev.alpha == pytest.approx(5 / 8)


def test_diversity_stats_exploitation():
    # LO 1 and 3: NO = positions 4..6, critical bit included
    ev = ins.diversity_stats(pop_of("101100", "111010"))
    assert ev.kind == ins.EXPLOITATION
    assert (ev.lo1, ev.lo2) == (1, 3)
    assert (ev.H, ev.B, ev.S) == (2, 1, 0)
    assert ev.alpha == pytest.approx(0.5)


@settings(max_examples=200, deadline=None)
@given(n=st.integers(2, 30), data=st.data())
def test_kernel_phase_row_matches_python(n, data):
    a = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    b = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    pop = pop_of("".join(map(str, a)), "".join(map(str, b)))
    row = np.zeros(K.TRACE_COLS)
    K.phase_row(pop.x1.bits, pop.x2.bits, float(pop.f1), float(pop.f2), 7, row)
    ev = PhaseTrace(row, n)[0]
    assert ev == ins.diversity_stats(pop, generation=7)


def test_classify_phase():
    assert ins.classify_phase(pop_of("10", "01")) == ins.EXPLOITATION
    assert ins.classify_phase(pop_of("01", "00")) == ins.DIVERSITY


def test_trace_tsv_round_trip():
    res = dega_a(make_benchmark("lo", 40), OptimizerConfig("dega-a", lam=4), RandomSource(3), trace=True)
    tr = res.phase_trace
    assert len(tr) > 10
    back = PhaseTrace.from_tsv(tr.to_tsv(), 40)
    assert np.array_equal(back.rows, tr.rows)
    # the initial pair costs two evaluations
    assert tr[0].generation == 2
    assert np.all(np.diff(tr.generation) == 1)


def test_traced_runs_keep_phase_monotonicity():
    rng = RandomSource(8)
    for tr in ins.collect_traces(60, "(n ln n)^2/3", 10, rng):
        assert ins.monotonicity_violations(tr) == 0


def _synthetic(rows, n):
    # rows of (generation, is_diversity, lo1, lo2, H)
    arr = np.zeros((len(rows), K.TRACE_COLS))
    for i, (g, div, l1, l2, h) in enumerate(rows):
        arr[i, K.T_GEN] = g
        arr[i, K.T_KIND] = K.KIND_DIVERSITY if div else K.KIND_EXPLOITATION
        arr[i, K.T_LO1], arr[i, K.T_LO2], arr[i, K.T_H] = l1, l2, h
    return PhaseTrace(arr, n)


def test_free_rider_jumps_and_progress_on_synthetic_trace():
    tr = _synthetic(
        [
            (0, False, 0, 2, 8),
            (1, False, 1, 2, 7),
            (2, True, 2, 2, 5),
            (3, True, 2, 2, 6),
            (4, False, 2, 5, 6),  # jump 3 out of a diversity phase
            (5, False, 4, 5, 4),
            (6, True, 5, 5, 4),
            (8, False, 5, 7, 3),  # not consecutive: ignored
            (9, True, 10, 10, 0),
        ],
        10,
    )
    jumps, rooms = ins.free_rider_jumps(tr)
    assert jumps.tolist() == [3] and rooms.tolist() == [8]
    assert ins.monotonicity_violations(tr) == 0
    prog = ins.phase_progress_stats([tr], lam=4)
    # exploitation phases start at rows 0, 4, 7
    assert prog.progress.tolist() == [0.0, 0.0, 3.0]
    assert prog.diversity_gain == 3 + 2
    assert prog.total_gain == 8


def test_monotonicity_violation_detected():
    tr = _synthetic([(0, True, 0, 0, 5), (1, True, 0, 0, 4), (2, False, 0, 1, 4), (3, False, 0, 1, 5)], 8)
    assert ins.monotonicity_violations(tr) == 2


@pytest.mark.parametrize("room", [1, 2, 3, 10, 60])
def test_truncated_free_rider_moments(room):
    # direct enumeration of min(1 + G, room) with Pr[G = g] = 2^-(g+1)
    pr = {}
    for g in range(200):
        j = min(1 + g, room)
        pr[j] = pr.get(j, 0.0) + 0.5 ** (g + 1)
    mean = sum(j * p for j, p in pr.items())
    var = sum(j * j * p for j, p in pr.items()) - mean**2
    m, v = ins._truncated_moments(room)
    assert m == pytest.approx(mean, abs=1e-12)
    assert v == pytest.approx(var, abs=1e-12)
    assert m == pytest.approx(2 * (1 - 0.5**room), abs=1e-12)


@pytest.mark.parametrize("lam", [2, 5, 64])
def test_geometric_bins(lam):
    edges, probs = ins.geometric_bins(1 / lam, 10_000)
    assert probs.sum() == pytest.approx(1.0)
    assert np.all(probs * 10_000 >= 5)
    assert edges[0] == 1 and np.all(np.diff(edges) > 0)
    assert len(probs) == len(edges) <= 20


def test_chi_square_of_exact_counts():
    chi2, df, z = ins.chi_square_z(np.array([10.0, 20.0, 30.0]), np.array([10.0, 20.0, 30.0]))
    assert chi2 == 0 and df == 2 and z < 0


def test_improvement_time_probe_small():
    rep = ins.improvement_time_probe(8, 20_000, RandomSource(5), n=60)
    assert rep.passed, rep.line()
    assert rep.details["rel_error"] < 0.05


def test_free_rider_probe_small():
    rep = ins.free_rider_live(100, "(n ln n)^2/3", 3000, RandomSource(6))
    assert rep.passed, rep.line()
    assert rep.details["exceeds_room"] == 0


def test_critical_bit_probe_small():
    rep = ins.critical_bit_probe(30, 4, 1000, RandomSource(7))
    assert rep.passed, rep.line()
    assert rep.details["boundary_violations"] == 0


def test_probes_inconclusive_for_degenerate_size():
    rng = RandomSource(0)
    assert ins.critical_bit_probe(1, 2, 1000, rng).status == ins.INCONCLUSIVE
    assert ins.improvement_time_probe(2, 100, rng, n=1).status == ins.INCONCLUSIVE
    assert ins.free_rider_live(1, 2, 100, rng).status == ins.INCONCLUSIVE
    assert ins.free_rider_probe([]).status == ins.INCONCLUSIVE


def test_critical_bit_probe_needs_enough_runs():
    with pytest.raises(ValueError):
        ins.critical_bit_probe(30, 4, 10, RandomSource(0))


def test_probe_z_uses_binomial_variance():
    assert ins._z(5.0, 5.0, 0.0) == 0.0
    assert math.isinf(ins._z(6.0, 5.0, 0.0))
    assert ins._z(7.0, 5.0, 4.0) == pytest.approx(1.0)
