"""Compiled hot loops shared by every optimizer.

Search points live in ``uint8`` arrays (one byte per bit, 0-based).  An
offspring is never copied while it is being evaluated: it is described by its
base parent plus a sorted array of flipped positions, and its fitness is
computed incrementally from the parent's cached fitness.  Only accepted
offspring are materialized.

Run bookkeeping travels in a small ``float64`` array ``st`` so that nested
helpers can update it in place:

    st[EVALS]   evaluations used so far
    st[BUDGET]  evaluation budget
    st[BEST]    best fitness seen
    st[TARGET]  stop as soon as a fitness >= TARGET is evaluated
    st[SUCCESS] 1.0 once the target was hit
    st[DONE]    1.0 once the run must stop
"""

from __future__ import annotations

import numpy as np
from numba import njit

EVALS, BUDGET, BEST, TARGET, SUCCESS, DONE, INIT_H = 0, 1, 2, 3, 4, 5, 6

LO, OM, LFHW, MIVS = 0, 1, 2, 3

# trace row layout
T_GEN, T_KIND, T_LO1, T_LO2, T_H, T_HBAR, T_B, T_S, T_NO = range(9)
TRACE_COLS = 9
KIND_DIVERSITY, KIND_EXPLOITATION = 0.0, 1.0

MODE_TRACE = 1
MODE_PROBE = 2


def new_state(budget: int, target: float) -> np.ndarray:
    st = np.zeros(7, dtype=np.float64)
    st[BUDGET] = float(budget)
    st[INIT_H] = -1.0
    st[BEST] = -np.inf
    st[TARGET] = float(target)
    return st


# ---------------------------------------------------------------------------
# buffers


@njit(cache=True)
def _push2(buf, m, a, b):
    if m == buf.shape[0]:
        grown = np.empty((2 * m + 16, 2), dtype=buf.dtype)
        grown[:m] = buf[:m]
        buf = grown
    buf[m, 0] = a
    buf[m, 1] = b
    return buf, m + 1


@njit(cache=True)
def _push1f(buf, m, a):
    if m == buf.shape[0]:
        grown = np.empty(2 * m + 16, dtype=buf.dtype)
        grown[:m] = buf[:m]
        buf = grown
    buf[m] = a
    return buf, m + 1


@njit(cache=True)
def _push_row(buf, m, row):
    if m == buf.shape[0]:
        grown = np.empty((2 * m + 16, buf.shape[1]), dtype=buf.dtype)
        grown[:m] = buf[:m]
        buf = grown
    buf[m, :] = row
    return buf, m + 1


@njit(cache=True)
def _record(st, f, traj, nt):
    """Account for one evaluation with fitness ``f``."""
    st[EVALS] += 1.0
    if f > st[BEST]:
        st[BEST] = f
        traj, nt = _push2(traj, nt, st[EVALS], f)
    if f >= st[TARGET]:
        st[SUCCESS] = 1.0
        st[DONE] = 1.0
    elif st[EVALS] >= st[BUDGET]:
        st[DONE] = 1.0
    return traj, nt


# ---------------------------------------------------------------------------
# fitness


@njit(cache=True)
def full_fitness(kind, x, indptr, indices):
    n = x.shape[0]
    if kind == LO:
        for i in range(n):
            if x[i] == 0:
                return float(i)
        return float(n)
    if kind == OM:
        s = 0
        for i in range(n):
            s += x[i]
        return float(s)
    if kind == LFHW:
        s = 0
        for i in range(n):
            if x[i]:
                s += i + 1
        return float(s)
    cnt = 0
    viol = 0
    for v in range(n):
        if x[v]:
            cnt += 1
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                if u > v and x[u]:
                    viol += 1
    return float(cnt - n * viol)


@njit(cache=True)
def flip_fitness(kind, x, fx, flips, nf, indptr, indices, mark):
    """Fitness of ``x`` with the sorted positions ``flips[:nf]`` flipped."""
    if nf == 0:
        return fx
    n = x.shape[0]
    if kind == LO:
        lead = int(fx)
        first = flips[0]
        if first < lead:
            return float(first)
        if first > lead:
            return fx
        j = lead + 1
        k = 1
        while j < n:
            b = x[j]
            if k < nf and flips[k] == j:
                b = 1 - b
                k += 1
            if b == 0:
                return float(j)
            j += 1
        return float(n)
    if kind == OM:
        d = 0
        for k in range(nf):
            d += 1 - 2 * int(x[flips[k]])
        return fx + d
    if kind == LFHW:
        d = 0
        for k in range(nf):
            p = flips[k]
            d += (p + 1) * (1 - 2 * int(x[p]))
        return fx + d
    dcnt = 0
    dviol = 0
    for k in range(nf):
        mark[flips[k]] = 1
    for k in range(nf):
        v = flips[k]
        old_v = int(x[v])
        new_v = 1 - old_v
        dcnt += new_v - old_v
        for e in range(indptr[v], indptr[v + 1]):
            u = indices[e]
            if mark[u]:
                if u > v:
                    old_u = int(x[u])
                    dviol += new_v * (1 - old_u) - old_v * old_u
            else:
                dviol += (new_v - old_v) * int(x[u])
    for k in range(nf):
        mark[flips[k]] = 0
    return fx + dcnt - n * dviol


# ---------------------------------------------------------------------------
# sampling


@njit(cache=True)
def uniform_bits(g, n):
    x = np.empty(n, dtype=np.uint8)
    for i in range(n):
        x[i] = 1 if g.random() < 0.5 else 0
    return x


@njit(cache=True)
def bernoulli_subset(g, pos, npos, p, out):
    """Keep each of ``pos[:npos]`` independently with probability ``p``.

    Geometric skip sampling; the kept entries are written to ``out`` in order.
    """
    if npos == 0 or p <= 0.0:
        return 0
    if p >= 1.0:
        for i in range(npos):
            out[i] = pos[i]
        return npos
    log_q = np.log1p(-p)
    m = 0
    i = -1
    while True:
        skip = np.log(1.0 - g.random()) / log_q
        if i + 1 + skip >= npos:
            break
        i += int(skip) + 1
        out[m] = pos[i]
        m += 1
    return m


@njit(cache=True)
def mutation_flips(g, n, p, out):
    """Positions flipped by standard bit mutation with rate ``p``."""
    if p >= 1.0:
        for i in range(n):
            out[i] = i
        return n
    log_q = np.log1p(-p)
    m = 0
    i = -1
    while True:
        skip = np.log(1.0 - g.random()) / log_q
        if i + 1 + skip >= n:
            break
        i += int(skip) + 1
        out[m] = i
        m += 1
    return m


@njit(cache=True)
def distinct_positions(g, n, ell, out, mark):
    """``ell`` distinct uniform positions of ``0..n-1`` (Floyd), sorted."""
    for j in range(n - ell, n):
        t = g.integers(0, j + 1)
        if mark[t]:
            t = j
        mark[t] = 1
        out[j - (n - ell)] = t
    for k in range(ell):
        mark[out[k]] = 0
    out[:ell].sort()
    return ell


@njit(cache=True)
def merge_xor(a, na, b, nb, out):
    """Symmetric difference of two sorted position lists."""
    i = 0
    j = 0
    m = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            out[m] = a[i]
            i += 1
            m += 1
        elif b[j] < a[i]:
            out[m] = b[j]
            j += 1
            m += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[m] = a[i]
        i += 1
        m += 1
    while j < nb:
        out[m] = b[j]
        j += 1
        m += 1
    return m


@njit(cache=True)
def complement_in(pos, npos, sub, nsub, out):
    """Entries of sorted ``pos`` that are not in its sorted subset ``sub``."""
    j = 0
    m = 0
    for i in range(npos):
        if j < nsub and sub[j] == pos[i]:
            j += 1
        else:
            out[m] = pos[i]
            m += 1
    return m


# ---------------------------------------------------------------------------
# population helpers


@njit(cache=True)
def diff_positions(a, b, out):
    m = 0
    for i in range(a.shape[0]):
        if a[i] != b[i]:
            out[m] = i
            m += 1
    return m


@njit(cache=True)
def dist_after_flips(x, flips, nf, other, d):
    """Hamming distance to ``other`` after flipping ``flips`` in ``x``.

    ``d`` is the current distance between ``x`` and ``other``.
    """
    for k in range(nf):
        p = flips[k]
        if x[p] == other[p]:
            d += 1
        else:
            d -= 1
    return d


@njit(cache=True)
def apply_flips(x, flips, nf):
    for k in range(nf):
        p = flips[k]
        x[p] = 1 - x[p]


@njit(cache=True)
def choose_drop(g, fa, fb, fc, dab, dac, dbc):
    """Which of three points to drop so the best two survive.

    Fitness first; among equally unfit candidates the one whose removal
    leaves the most distant pair is dropped, remaining ties uniformly.
    Returns 0, 1 or 2 for a, b, c.
    """
    fmin = min(fa, min(fb, fc))
    drop = -1
    best_d = -1
    ties = 0
    for i in range(3):
        if i == 0:
            f = fa
            d = dbc
        elif i == 1:
            f = fb
            d = dac
        else:
            f = fc
            d = dab
        if f != fmin:
            continue
        if d > best_d:
            best_d = d
            drop = i
            ties = 1
        elif d == best_d:
            ties += 1
            if g.integers(0, ties) == 0:
                drop = i
    return drop


@njit(cache=True)
def umda_update(freq, pop, order, mu, lo, hi):
    n = freq.shape[0]
    for i in range(n):
        c = 0
        for r in range(mu):
            c += pop[order[r], i]
        v = c / mu
        if v < lo:
            v = lo
        elif v > hi:
            v = hi
        freq[i] = v


# ---------------------------------------------------------------------------
# tracing


@njit(cache=True)
def phase_row(x1, x2, f1, f2, gen, row):
    """Fill ``row`` with the leading-ones diversity statistics of a pair."""
    n = x1.shape[0]
    lo1 = f1 if f1 <= f2 else f2
    lo2 = f2 if f1 <= f2 else f1
    lead = int(lo2)
    if f1 == f2:
        start = lead + 1
        row[T_KIND] = KIND_DIVERSITY
    else:
        start = lead
        row[T_KIND] = KIND_EXPLOITATION
    if start > n:
        start = n
    h = 0
    b = 0
    s = 0
    for i in range(start, n):
        if x1[i] != x2[i]:
            h += 1
        elif x1[i] == 0:
            b += 1
        else:
            s += 1
    row[T_GEN] = gen
    row[T_LO1] = lo1
    row[T_LO2] = lo2
    row[T_H] = h
    row[T_HBAR] = b + s
    row[T_B] = b
    row[T_S] = s
    row[T_NO] = n - start


@njit(cache=True)
def _trace(trace, ntr, row, x1, x2, f1, f2, st, changed, every):
    gen = st[EVALS]
    if changed:
        phase_row(x1, x2, f1, f2, gen, row)
    if int(gen) % every == 0 or st[DONE] != 0.0:
        row[T_GEN] = gen
        trace, ntr = _push_row(trace, ntr, row)
    return trace, ntr


# ---------------------------------------------------------------------------
# optimizers


@njit(cache=True)
def run_dega_a(g, kind, n, indptr, indices, lam, cap, st, mode, every):
    """(2+1)-DEGA, variant A.

    ``cap`` > 0 limits the crossover evaluations of one exploitation phase;
    on expiry one mutation step is made and the phase budget is renewed.
    """
    traj = np.empty((64, 2))
    nt = 0
    tracing = (mode & MODE_TRACE) != 0
    probing = (mode & MODE_PROBE) != 0
    trace = np.empty((1024 if tracing else 1, TRACE_COLS))
    ntr = 0
    row = np.zeros(TRACE_COLS)
    imp = np.empty(64)
    nimp = 0
    crit = np.empty((64, 2))
    ncrit = 0

    flips = np.empty(n, dtype=np.int64)
    diff = np.empty(n, dtype=np.int64)
    tmp = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)

    x1 = uniform_bits(g, n)
    x2 = (1 - x1).astype(np.uint8)
    st[INIT_H] = float(np.sum(x1 != x2))
    f1 = full_fitness(kind, x1, indptr, indices)
    traj, nt = _record(st, f1, traj, nt)
    if st[DONE] != 0.0:
        return traj[:nt], trace[:ntr], imp[:nimp], crit[:ncrit]
    f2 = full_fitness(kind, x2, indptr, indices)
    traj, nt = _record(st, f2, traj, nt)
    h = n
    for i in range(n):
        diff[i] = i
    if tracing:
        trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, True, 1)
    rate = 1.0 / n
    bias = 1.0 / lam
    phase_evals = 0

    while st[DONE] == 0.0:
        if f1 == f2 or (cap > 0 and phase_evals >= cap):
            # mutation step: diversity phase, or fallback after a capped phase
            phase_evals = 0
            pick = g.integers(0, 2)
            if pick == 0:
                par = x1
                oth = x2
                fp = f1
            else:
                par = x2
                oth = x1
                fp = f2
            nf = mutation_flips(g, n, rate, flips)
            fy = flip_fitness(kind, par, fp, flips, nf, indptr, indices, mark)
            traj, nt = _record(st, fy, traj, nt)
            d_par = nf
            d_oth = dist_after_flips(par, flips, nf, oth, h)
            if pick == 0:
                drop = choose_drop(g, f1, f2, fy, h, d_par, d_oth)
            else:
                drop = choose_drop(g, f1, f2, fy, h, d_oth, d_par)
            changed = drop != 2
            if drop == pick:
                apply_flips(par, flips, nf)
            elif drop != 2:
                oth[:] = par
                apply_flips(oth, flips, nf)
            if drop == 0:
                f1 = fy
            elif drop == 1:
                f2 = fy
            if changed:
                h = diff_positions(x1, x2, diff)
            if tracing:
                trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, changed, every)
            continue

        if f1 > f2:
            x1, x2 = x2, x1
            f1, f2 = f2, f1
        tries = 0
        while st[DONE] == 0.0:
            if cap > 0 and phase_evals >= cap:
                break
            nf = bernoulli_subset(g, diff, h, bias, flips)
            fy = flip_fitness(kind, x1, f1, flips, nf, indptr, indices, mark)
            traj, nt = _record(st, fy, traj, nt)
            phase_evals += 1
            tries += 1
            accepted = fy > f1
            if accepted:
                apply_flips(x1, flips, nf)
                h = complement_in(diff, h, flips, nf, tmp)
                diff, tmp = tmp, diff
                if probing:
                    imp, nimp = _push1f(imp, nimp, tries)
                    if fy >= f2:
                        lead = int(f2)
                        hno = 0
                        for k in range(h):
                            if diff[k] >= lead:
                                hno += 1
                        crit, ncrit = _push2(
                            crit, ncrit, 1.0 if fy > f2 else 0.0, hno / (n - lead)
                        )
                f1 = fy
            if tracing:
                trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, accepted, every)
            if accepted:
                break
    return traj[:nt], trace[:ntr], imp[:nimp], crit[:ncrit]


@njit(cache=True)
def run_dega_prime(g, kind, n, indptr, indices, bb, st, mode, every):
    """(2+1)-DEGA variants A' (``bb`` false) and A_BB (``bb`` true)."""
    traj = np.empty((64, 2))
    nt = 0
    tracing = (mode & MODE_TRACE) != 0
    trace = np.empty((1024 if tracing else 1, TRACE_COLS))
    ntr = 0
    row = np.zeros(TRACE_COLS)

    flips = np.empty(n, dtype=np.int64)
    yflips = np.empty(n, dtype=np.int64)
    yrel = np.empty(n, dtype=np.int64)
    zflips = np.empty(n, dtype=np.int64)
    diff = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)

    x1 = uniform_bits(g, n)
    x2 = (1 - x1).astype(np.uint8)
    st[INIT_H] = float(np.sum(x1 != x2))
    f1 = full_fitness(kind, x1, indptr, indices)
    traj, nt = _record(st, f1, traj, nt)
    if st[DONE] != 0.0:
        return traj[:nt], trace[:ntr]
    f2 = full_fitness(kind, x2, indptr, indices)
    traj, nt = _record(st, f2, traj, nt)
    h = diff_positions(x1, x2, diff)
    if tracing:
        trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, True, 1)
    rate = 1.0 / n
    logn = np.log(n)
    bb_iters = max(1, int(np.ceil(10.0 * logn)))

    while st[DONE] == 0.0:
        if g.random() < 0.5:
            pick = g.integers(0, 2)
            if pick == 0:
                par = x1
                oth = x2
                fp = f1
            else:
                par = x2
                oth = x1
                fp = f2
            nf = mutation_flips(g, n, rate, flips)
            fy = flip_fitness(kind, par, fp, flips, nf, indptr, indices, mark)
            traj, nt = _record(st, fy, traj, nt)
            accepted = fy > fp
            if not accepted and fy == fp:
                accepted = dist_after_flips(par, flips, nf, oth, h) > h
            if accepted:
                apply_flips(par, flips, nf)
                if pick == 0:
                    f1 = fy
                else:
                    f2 = fy
                h = diff_positions(x1, x2, diff)
            if tracing:
                trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, accepted, every)
            continue

        ny = bernoulli_subset(g, diff, h, 0.5, yflips)
        fy = flip_fitness(kind, x1, f1, yflips, ny, indptr, indices, mark)
        traj, nt = _record(st, fy, traj, nt)
        if tracing:
            trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, False, every)
        if f1 < f2:
            pick = 0
        elif f2 < f1:
            pick = 1
        else:
            pick = g.integers(0, 2)
        if pick == 0:
            xp = x1
            fxp = f1
            hy = ny
            yrel[:ny] = yflips[:ny]
        else:
            xp = x2
            fxp = f2
            hy = complement_in(diff, h, yflips, ny, yrel)
        if st[DONE] != 0.0 or fy <= fxp:
            continue

        if not bb:
            iters = max(1, int(np.ceil(hy * logn)))
            bias = 1.0 / hy
            for _ in range(iters):
                nz = bernoulli_subset(g, yrel, hy, bias, zflips)
                fz = flip_fitness(kind, xp, fxp, zflips, nz, indptr, indices, mark)
                traj, nt = _record(st, fz, traj, nt)
                accepted = fz > fxp
                if accepted:
                    apply_flips(xp, zflips, nz)
                    fxp = fz
                    if pick == 0:
                        f1 = fz
                    else:
                        f2 = fz
                    h = diff_positions(x1, x2, diff)
                if tracing:
                    trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, accepted, every)
                if accepted or st[DONE] != 0.0:
                    break
        else:
            for it in range(bb_iters):
                nz = bernoulli_subset(g, yrel, hy, 0.5, zflips)
                fz = flip_fitness(kind, xp, fxp, zflips, nz, indptr, indices, mark)
                traj, nt = _record(st, fz, traj, nt)
                if fz > fxp:
                    yrel[:nz] = zflips[:nz]
                    hy = nz
                    fy = fz
                last = it == bb_iters - 1 or st[DONE] != 0.0
                if last:
                    apply_flips(xp, yrel, hy)
                    if pick == 0:
                        f1 = fy
                    else:
                        f2 = fy
                    h = diff_positions(x1, x2, diff)
                if tracing:
                    trace, ntr = _trace(trace, ntr, row, x1, x2, f1, f2, st, last, every)
                if last:
                    break
    return traj[:nt], trace[:ntr]


@njit(cache=True)
def run_one_plus_one(g, kind, n, indptr, indices, st):
    traj = np.empty((64, 2))
    nt = 0
    flips = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)
    x = uniform_bits(g, n)
    fx = full_fitness(kind, x, indptr, indices)
    traj, nt = _record(st, fx, traj, nt)
    rate = 1.0 / n
    while st[DONE] == 0.0:
        nf = mutation_flips(g, n, rate, flips)
        fy = flip_fitness(kind, x, fx, flips, nf, indptr, indices, mark)
        traj, nt = _record(st, fy, traj, nt)
        if fy >= fx:
            apply_flips(x, flips, nf)
            fx = fy
    return traj[:nt]


@njit(cache=True)
def run_two_plus_one(g, kind, n, indptr, indices, pc, st):
    traj = np.empty((64, 2))
    nt = 0
    cflips = np.empty(n, dtype=np.int64)
    mflips = np.empty(n, dtype=np.int64)
    flips = np.empty(n, dtype=np.int64)
    diff = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)

    x1 = uniform_bits(g, n)
    f1 = full_fitness(kind, x1, indptr, indices)
    traj, nt = _record(st, f1, traj, nt)
    if st[DONE] != 0.0:
        return traj[:nt]
    x2 = uniform_bits(g, n)
    f2 = full_fitness(kind, x2, indptr, indices)
    traj, nt = _record(st, f2, traj, nt)
    h = diff_positions(x1, x2, diff)
    rate = 1.0 / n
    while st[DONE] == 0.0:
        if g.random() < pc:
            pick = 0
            nc = bernoulli_subset(g, diff, h, 0.5, cflips)
        else:
            pick = g.integers(0, 2)
            nc = 0
        nm = mutation_flips(g, n, rate, mflips)
        nf = merge_xor(cflips, nc, mflips, nm, flips)
        if pick == 0:
            par = x1
            oth = x2
            fp = f1
        else:
            par = x2
            oth = x1
            fp = f2
        fy = flip_fitness(kind, par, fp, flips, nf, indptr, indices, mark)
        traj, nt = _record(st, fy, traj, nt)
        d_par = nf
        d_oth = dist_after_flips(par, flips, nf, oth, h)
        if pick == 0:
            drop = choose_drop(g, f1, f2, fy, h, d_par, d_oth)
        else:
            drop = choose_drop(g, f1, f2, fy, h, d_oth, d_par)
        if drop == pick:
            apply_flips(par, flips, nf)
        elif drop != 2:
            oth[:] = par
            apply_flips(oth, flips, nf)
        if drop == 0:
            f1 = fy
        elif drop == 1:
            f2 = fy
        if drop != 2:
            h = diff_positions(x1, x2, diff)
    return traj[:nt]


@njit(cache=True)
def run_ollga(g, kind, n, indptr, indices, lam, k, st):
    """Static-parameter (1+(lambda,lambda))-GA."""
    traj = np.empty((64, 2))
    nt = 0
    mflips = np.empty(n, dtype=np.int64)
    best_m = np.empty(n, dtype=np.int64)
    zflips = np.empty(n, dtype=np.int64)
    best_z = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)
    x = uniform_bits(g, n)
    fx = full_fitness(kind, x, indptr, indices)
    traj, nt = _record(st, fx, traj, nt)
    p_mut = min(1.0, k / n)
    bias = 1.0 / lam
    while st[DONE] == 0.0:
        ell = g.binomial(n, p_mut)
        fbest = -np.inf
        ties = 0
        for _ in range(lam):
            distinct_positions(g, n, ell, mflips, mark)
            fy = flip_fitness(kind, x, fx, mflips, ell, indptr, indices, mark)
            traj, nt = _record(st, fy, traj, nt)
            if fy > fbest:
                fbest = fy
                ties = 1
                best_m[:ell] = mflips[:ell]
            elif fy == fbest:
                ties += 1
                if g.integers(0, ties) == 0:
                    best_m[:ell] = mflips[:ell]
            if st[DONE] != 0.0:
                break
        if st[DONE] != 0.0:
            break
        fz_best = -np.inf
        nzb = 0
        ties = 0
        for _ in range(lam):
            nz = bernoulli_subset(g, best_m, ell, bias, zflips)
            fz = flip_fitness(kind, x, fx, zflips, nz, indptr, indices, mark)
            traj, nt = _record(st, fz, traj, nt)
            if fz > fz_best:
                fz_best = fz
                ties = 1
                best_z[:nz] = zflips[:nz]
                nzb = nz
            elif fz == fz_best:
                ties += 1
                if g.integers(0, ties) == 0:
                    best_z[:nz] = zflips[:nz]
                    nzb = nz
            if st[DONE] != 0.0:
                break
        if fz_best >= fx:
            apply_flips(x, best_z, nzb)
            fx = fz_best
    return traj[:nt]


@njit(cache=True)
def run_umda(g, kind, n, indptr, indices, lam, mu, st, freq):
    """UMDA with truncation selection; ``freq`` is updated in place."""
    traj = np.empty((64, 2))
    nt = 0
    if n >= 2:
        lo = 1.0 / n
        hi = 1.0 - 1.0 / n
    else:
        lo = 0.0
        hi = 1.0
    freq[:] = 0.5
    pop = np.empty((lam, n), dtype=np.uint8)
    fits = np.empty(lam)
    perm = np.empty(lam, dtype=np.int64)
    keys = np.empty(lam)
    order = np.empty(lam, dtype=np.int64)
    while st[DONE] == 0.0:
        for r in range(lam):
            for i in range(n):
                pop[r, i] = 1 if g.random() < freq[i] else 0
            f = full_fitness(kind, pop[r], indptr, indices)
            fits[r] = f
            traj, nt = _record(st, f, traj, nt)
            if st[DONE] != 0.0:
                break
        if st[DONE] != 0.0:
            break
        for r in range(lam):
            perm[r] = r
        for r in range(lam - 1, 0, -1):
            j = g.integers(0, r + 1)
            perm[r], perm[j] = perm[j], perm[r]
        for r in range(lam):
            keys[r] = -fits[perm[r]]
        srt = np.argsort(keys, kind="mergesort")
        for r in range(lam):
            order[r] = perm[srt[r]]
        umda_update(freq, pop, order, mu, lo, hi)
    return traj[:nt]
