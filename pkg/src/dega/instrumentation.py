"""Phase classification, diversity statistics and Monte-Carlo probes.

The probes check live (2+1)-DEGA runs on LeadingOnes against three exact
predictions: the critical bit after the lagging point catches up differs with
probability ``H / |NO|``; a single improvement of the weaker point inside an
exploitation phase takes ``Geometric(1/lambda)`` evaluations; and the fitness
gain that ends a diversity phase is ``1 + Geometric(1/2)``, truncated at the
end of the string.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from . import _kernels as K
from .algorithms import OptimizerConfig, Population2, _dega_a_raw, dega_a
from .benchmarks import make_benchmark
from .bitcore import RandomSource
from .trace import DIVERSITY, EXPLOITATION, PhaseEvent, PhaseTrace

Z_THRESHOLD = 4.0
MIN_EVENTS = 30

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

__all__ = [
    "DIVERSITY",
    "EXPLOITATION",
    "PhaseEvent",
    "PhaseTrace",
    "ProbeReport",
    "classify_phase",
    "diversity_stats",
    "critical_bit_probe",
    "improvement_time_probe",
    "free_rider_probe",
    "free_rider_jumps",
    "free_rider_live",
    "phase_progress_stats",
    "collect_traces",
]


def classify_phase(pop: Population2) -> str:
    return DIVERSITY if pop.f1 == pop.f2 else EXPLOITATION


def diversity_stats(pop: Population2, n: int | None = None, generation: int = 0) -> PhaseEvent:
    """Leading-ones statistics of a population, with cached LO values as fitness.

    NO starts after the fitter point's leading ones; in a diversity phase the
    critical bit right after them is excluded as well.
    """
    pop = pop.relabeled()
    n = len(pop.x1) if n is None else n
    lead = int(pop.f2)
    kind = classify_phase(pop)
    start = min(n, lead + 1 if kind == DIVERSITY else lead)
    a = pop.x1.bits[start:]
    b = pop.x2.bits[start:]
    h = int(np.count_nonzero(a != b))
    blocking = int(np.count_nonzero((a == 0) & (b == 0)))
    skipping = int(np.count_nonzero((a == 1) & (b == 1)))
    return PhaseEvent(
        generation=generation,
        kind=kind,
        lo1=float(pop.f1),
        lo2=float(pop.f2),
        H=h,
        H_bar=blocking + skipping,
        B=blocking,
        S=skipping,
        alpha=(n - start) / n,
    )


@dataclass
class ProbeReport:
    name: str
    samples: int
    empirical_mean: float
    predicted: float
    z_score: float
    passed: bool
    status: str
    threshold: float = Z_THRESHOLD
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        extra = " ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return (
            f"{self.name}: {self.status.upper()} samples={self.samples} "
            f"mean={self.empirical_mean:.5g} predicted={self.predicted:.5g} "
            f"z={self.z_score:.3f} {extra}".rstrip()
        )


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.5g}"
    return str(v)


def _inconclusive(name: str, samples: int, reason: str) -> ProbeReport:
    return ProbeReport(
        name, samples, math.nan, math.nan, math.nan, False, INCONCLUSIVE, details={"reason": reason}
    )


def _z(observed: float, expected: float, variance: float) -> float:
    if variance <= 0.0:
        return 0.0 if observed == expected else math.inf
    return (observed - expected) / math.sqrt(variance)


def _probe_run(n: int, lam: int, rng: RandomSource):
    f = make_benchmark("lo", n)
    cfg = OptimizerConfig("dega-a", lam=lam, budget=10**12)
    _, (_, _, imp, crit) = _dega_a_raw(f, cfg, rng, K.MODE_PROBE, 1)
    return imp, crit


def critical_bit_probe(
    n: int, lam: int, runs: int, rng: RandomSource, *, threshold: float = Z_THRESHOLD
) -> ProbeReport:
    """Does the bit after the caught-up level differ with probability H/|NO|?

    An event is every generation in which the lagging point reaches the
    fitter point's level ``i``.  The indicator is whether position ``i+1``
    now differs; the prediction is the NO-restricted Hamming distance of the
    new pair divided by ``n - i``.
    """
    if runs < 1000:
        raise ValueError("critical_bit_probe needs at least 1000 runs")
    name = "critical-bit"
    if n < 2:
        return _inconclusive(name, 0, "n < 2 has no critical bit")
    chunks = [_probe_run(n, lam, rng)[1] for _ in range(runs)]
    events = np.concatenate(chunks) if chunks else np.zeros((0, 2))
    m = events.shape[0]
    if m < MIN_EVENTS:
        return _inconclusive(name, m, f"only {m} qualifying events")
    ind, pred = events[:, 0], events[:, 1]
    z = _z(ind.sum(), pred.sum(), float(np.sum(pred * (1 - pred))))
    boundary = int(np.sum((pred == 1.0) & (ind == 0.0)) + np.sum((pred == 0.0) & (ind == 1.0)))
    ok = abs(z) <= threshold and boundary == 0
    return ProbeReport(
        name, m, float(ind.mean()), float(pred.mean()), float(z), ok, PASS if ok else FAIL, threshold,
        {"runs": runs, "boundary_violations": boundary,
         "note": "H measured right after the catching-up generation"},
    )


def geometric_bins(p: float, samples: int, bins: int = 20, min_expected: float = 5.0):
    """Equal-probability bins for ``Geometric(p)`` on ``1, 2, ...``.

    Returns ``(edges, probs)``: bin ``j`` covers ``edges[j] <= T < edges[j+1]``
    (the last bin is open).  Bins with fewer than ``min_expected`` expected
    counts are merged into their neighbour.
    """
    q = 1.0 - p

    def cdf_below(k):  # Pr[T < k]
        return 1.0 - q ** (k - 1)

    edges = [1]
    for j in range(1, bins):
        k = math.ceil(math.log(1 - j / bins) / math.log(q)) + 1 if q > 0 else 2
        if k > edges[-1]:
            edges.append(k)
    probs = [cdf_below(edges[i + 1]) - cdf_below(edges[i]) for i in range(len(edges) - 1)]
    probs.append(1.0 - cdf_below(edges[-1]))
    # merge thin bins from the tail backwards
    while len(probs) > 1 and probs[-1] * samples < min_expected:
        probs[-2] += probs.pop()
        edges.pop()
    i = 0
    while i < len(probs) - 1:
        if probs[i] * samples < min_expected:
            probs[i] += probs.pop(i + 1)
            edges.pop(i + 1)
        else:
            i += 1
    return np.array(edges), np.array(probs)


def chi_square_z(observed: np.ndarray, expected: np.ndarray) -> tuple[float, int, float]:
    """Chi-squared statistic, degrees of freedom, and its Wilson-Hilferty z."""
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    df = len(observed) - 1
    if df < 1:
        return chi2, df, 0.0
    c = 2.0 / (9.0 * df)
    return chi2, df, ((chi2 / df) ** (1.0 / 3.0) - (1.0 - c)) / math.sqrt(c)


def improvement_time_probe(
    lam: int, samples: int, rng: RandomSource, *, n: int = 100, threshold: float = Z_THRESHOLD
) -> ProbeReport:
    """Evaluations per improvement of the weaker point vs ``Geometric(1/lam)``."""
    if lam < 2:
        raise ValueError("lambda must be at least 2")
    name = f"improvement-time[lambda={lam}]"
    if n < 2:
        return _inconclusive(name, 0, "n < 2 has no exploitation phase")
    chunks = []
    got = 0
    runs = 0
    while got < samples:
        imp, _ = _probe_run(n, lam, rng)
        runs += 1
        if imp.size == 0 and runs >= 1000 and got == 0:
            return _inconclusive(name, 0, "no exploitation improvements observed")
        chunks.append(imp)
        got += imp.size
    times = np.concatenate(chunks)[:samples]
    p = 1.0 / lam
    mean = float(times.mean())
    sd = math.sqrt((1 - p) / p**2)
    z_mean = (mean - lam) / (sd / math.sqrt(times.size))
    edges, probs = geometric_bins(p, times.size)
    idx = np.searchsorted(edges, times, side="right") - 1
    observed = np.bincount(idx, minlength=len(probs)).astype(float)
    chi2, df, z_chi = chi_square_z(observed, probs * times.size)
    first = float(np.mean(times == 1))
    sigma_first = math.sqrt(p * (1 - p) / times.size)
    ok = abs(z_mean) <= threshold and abs(z_chi) <= threshold
    return ProbeReport(
        name, int(times.size), mean, float(lam), float(z_mean), ok, PASS if ok else FAIL, threshold,
        {"runs": runs, "n": n, "rel_error": abs(mean - lam) / lam, "chi2": chi2, "df": df,
         "chi2_z": z_chi, "p_first": first, "p_first_z": (first - p) / sigma_first},
    )


def free_rider_jumps(trace: PhaseTrace) -> tuple[np.ndarray, np.ndarray]:
    """Fitness gains that end diversity phases, and the room left for each.

    Only consecutive generations are compared, so strided traces yield the
    gains they happen to sample.
    """
    if len(trace) < 2:
        return np.zeros(0), np.zeros(0)
    prev_div = trace.is_diversity[:-1]
    level = trace.lo2[:-1]
    nxt = trace.lo2[1:]
    step = np.diff(trace.generation) == 1
    mask = prev_div & step & (nxt > level)
    return nxt[mask] - level[mask], trace.n - level[mask]


_trunc_cache: dict[int, tuple[float, float]] = {}


def _truncated_moments(room: int) -> tuple[float, float]:
    """Mean and variance of ``min(1 + G(1/2), room)``."""
    if room not in _trunc_cache:
        j = np.arange(1, room + 1, dtype=float)
        pr = 0.5**j
        pr[-1] = 0.5 ** (room - 1)
        mean = float(np.sum(j * pr))
        _trunc_cache[room] = (mean, float(np.sum(j * j * pr) - mean**2))
    return _trunc_cache[room]


def free_rider_probe(
    traces: Iterable[PhaseTrace], *, epsilon: float = 0.2, kmax: int = 10,
    threshold: float = Z_THRESHOLD,
) -> ProbeReport:
    """Diversity-phase-ending gains against the truncated ``1 + G(1/2)`` law.

    Passes when the summed gains agree with the truncated prediction within
    ``threshold`` standard errors, no gain exceeds the remaining room, and
    ``Pr[jump >= k] <= 2**(1-k) * (1 + epsilon)`` (plus ``threshold``
    binomial standard errors) for ``k <= kmax``.
    """
    name = "free-rider"
    jumps, rooms = [], []
    for tr in traces:
        j, r = free_rider_jumps(tr)
        jumps.append(j)
        rooms.append(r)
    jump = np.concatenate(jumps) if jumps else np.zeros(0)
    room = np.concatenate(rooms).astype(int) if rooms else np.zeros(0, dtype=int)
    m = jump.size
    if m < MIN_EVENTS:
        return _inconclusive(name, m, f"only {m} diversity-phase improvements")
    moments = np.array([_truncated_moments(int(r)) for r in room])
    z = _z(jump.sum(), moments[:, 0].sum(), moments[:, 1].sum())
    too_long = int(np.sum(jump > room))
    tails = {}
    tail_ok = True
    for k in range(2, kmax + 1):
        bound = 0.5 ** (k - 1)
        freq = float(np.mean(jump >= k))
        slack = threshold * math.sqrt(bound * (1 - bound) / m)
        tails[f"tail_{k}"] = freq
        tail_ok &= freq <= bound * (1 + epsilon) + slack
    ok = abs(z) <= threshold and too_long == 0 and tail_ok
    return ProbeReport(
        name, m, float(jump.mean()), float(moments[:, 0].mean()), float(z), ok,
        PASS if ok else FAIL, threshold,
        {"p_jump_1": float(np.mean(jump == 1)), "exceeds_room": too_long, "tails_ok": tail_ok, **tails},
    )


def free_rider_live(
    n: int, lam, samples: int, rng: RandomSource, *, max_runs: int = 10**6, **kw
) -> ProbeReport:
    """Trace DEGA A runs until ``samples`` diversity-phase improvements are seen."""
    if n < 2:
        return _inconclusive("free-rider", 0, "n < 2 has no diversity phase")

    def until_enough():
        got = 0
        for tr in collect_traces(n, lam, max_runs, rng):
            yield tr
            got += free_rider_jumps(tr)[0].size
            if got >= samples:
                return

    return free_rider_probe(until_enough(), **kw)


@dataclass
class PhaseProgress:
    """Per-exploitation-phase fitness progress of one or more traces."""

    progress: np.ndarray
    normalized: np.ndarray
    quantiles: dict
    diversity_gain: float
    total_gain: float


def _segments(div: np.ndarray) -> list[tuple[int, int]]:
    flips = np.flatnonzero(div[1:] != div[:-1]) + 1
    starts = np.concatenate(([0], flips))
    ends = np.concatenate((flips, [div.size]))
    return list(zip(starts.tolist(), ends.tolist()))


def phase_progress_stats(traces: Iterable[PhaseTrace], lam: float) -> PhaseProgress:
    """Progress ``L_k`` of each exploitation phase, normalized by ``sqrt(lam) ln n``.

    A phase starts at the first trace row of a maximal run of equal kind;
    ``L_k`` is the fitter point's LO at the next phase start (or the last row)
    minus its LO at this phase start.
    """
    progress = []
    norm = []
    div_gain = 0.0
    total = 0.0
    for tr in traces:
        if len(tr) == 0:
            continue
        lead = tr.lo2
        div = tr.is_diversity
        scale = math.sqrt(lam) * math.log(tr.n) if tr.n > 1 else 1.0
        for s, e in _segments(div):
            end_val = lead[e] if e < len(tr) else lead[-1]
            gain = float(end_val - lead[s])
            if div[s]:
                div_gain += gain
            else:
                progress.append(gain)
                norm.append(gain / scale)
        total += float(lead[-1] - lead[0])
    progress_arr = np.array(progress)
    norm_arr = np.array(norm)
    qs = {}
    if norm_arr.size:
        for q in (50, 90, 99):
            qs[f"q{q}"] = float(np.percentile(norm_arr, q))
    return PhaseProgress(progress_arr, norm_arr, qs, div_gain, total)


def collect_traces(n: int, lam, runs: int, rng: RandomSource) -> Iterator[PhaseTrace]:
    """Phase traces of ``runs`` successive DEGA A runs on LeadingOnes."""
    cfg = OptimizerConfig("dega-a", lam=lam, budget=10**12)
    for _ in range(runs):
        f = make_benchmark("lo", n)
        yield dega_a(f, cfg, rng, trace=True).phase_trace


def monotonicity_violations(trace: PhaseTrace) -> int:
    """Steps where H falls inside a diversity phase or rises inside an exploitation phase."""
    div = trace.is_diversity
    h = trace.H
    same = div[1:] == div[:-1]
    dh = np.diff(h)
    bad = same & ((div[1:] & (dh < 0)) | (~div[1:] & (dh > 0)))
    return int(bad.sum())
