"""Low-level numba kernels shared by the sampling API and the query engines.

Everything here operates on flat arrays plus an explicit splitmix64 RNG state
(a uint64 array of length 1), so outputs are reproducible bit-for-bit from a
seed, independent of call site or thread.
"""

import numpy as np
from numba import njit

# splitmix64 increment / mixing constants
_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_RUNKEY = np.uint64(0xD2B74407B1CE6E93)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


@njit(cache=True, inline="always")
def rng_next(state):
    state[0] = state[0] + _G
    z = state[0]
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def rng_uniform(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(rng_next(state) >> _S11) * _INV53


@njit(cache=True, inline="always")
def mix64(x):
    """Stateless scramble; used to derive independent per-run stream keys."""
    z = x + _G
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def seed_state(state, base_seed, run):
    state[0] = mix64(base_seed ^ (np.uint64(run + 1) * _RUNKEY))


@njit(cache=True)
def bounded_geometric(p, n, state):
    """First-success index among n Bernoulli(p) trials; n+1 means no success.

    Inverse transform ceil(ln u / ln(1-p)), so a draw costs O(1) regardless
    of n. log1p avoids cancellation for small p.
    """
    if p >= 1.0:
        return 1
    if p <= 0.0:
        return n + 1
    u = 1.0 - rng_uniform(state)  # (0, 1]
    j = int(np.ceil(np.log(u) / np.log1p(-p)))
    if j < 1:
        j = 1
    if j > n:
        return n + 1
    return j


@njit(cache=True)
def bucket_geometric_into(bucket, p_star, state, out):
    """Keep each bucket element independently with prob p_star.

    Walks the bucket by cumulative geometric skips; returns
    (kept, variates_drawn). Candidates land in `out` in slot order.
    p_star >= 1 short-circuits to the whole bucket with zero variates.
    """
    n = bucket.shape[0]
    if p_star >= 1.0:
        for k in range(n):
            out[k] = bucket[k]
        return n, 0
    if p_star <= 0.0:
        return 0, 0
    kept = 0
    variates = 0
    y = 0
    while True:
        g = bounded_geometric(p_star, n, state)
        variates += 1
        y += g
        if y > n:
            break
        out[kept] = bucket[y - 1]
        kept += 1
    return kept, variates


@njit(cache=True)
def binomial_variate(n, p, state):
    """Exact Bin(n, p) variate.

    Small n*p: count successes via geometric skips. Otherwise: CDF inversion
    with an incrementally updated PMF (symmetry-reduced to p <= 1/2; if the
    k=0 PMF term underflows, fall back to skip counting, which stays exact).
    """
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    flip = False
    if p > 0.5:
        flip = True
        p = 1.0 - p
    k = -1
    if n * p <= 30.0:
        cnt = 0
        y = 0
        while True:
            g = bounded_geometric(p, n, state)
            y += g
            if y > n:
                break
            cnt += 1
        k = cnt
    else:
        q = 1.0 - p
        f = q ** n
        if f <= 0.0:
            cnt = 0
            y = 0
            while True:
                g = bounded_geometric(p, n, state)
                y += g
                if y > n:
                    break
                cnt += 1
            k = cnt
        else:
            u = rng_uniform(state)
            ratio = p / q
            kk = 0
            cdf = f
            while u > cdf and kk < n:
                kk += 1
                f *= ratio * (n - kk + 1) / kk
                cdf += f
            k = kk
    if flip:
        return n - k
    return k


@njit(cache=True)
def bucket_binomial_into(bucket, p_star, state, out, scratch):
    """Draw X ~ Bin(|bucket|, p_star), then X distinct slots by partial
    Fisher-Yates. Returns the number kept; `scratch` needs len(bucket) room.
    """
    n = bucket.shape[0]
    x = binomial_variate(n, p_star, state)
    if x <= 0:
        return 0
    if x >= n:
        for k in range(n):
            out[k] = bucket[k]
        return n
    for k in range(n):
        scratch[k] = k
    for k in range(x):
        j = k + int(rng_uniform(state) * (n - k))
        if j >= n:
            j = n - 1
        t = scratch[k]
        scratch[k] = scratch[j]
        scratch[j] = t
        out[k] = bucket[scratch[k]]
    return x


@njit(cache=True)
def subset_sample_into(seg_j, seg_ptr, nbr, s_u, pow2ja, boost, da, state,
                       out_v, out_w):
    """Subset-sample one bucketed neighborhood.

    Net effect: each neighbor v is included independently with probability
    min(1, s_u / d_v^a), where da[v] = d_v^a holds current degrees. Per
    bucket with exponent j the candidate probability is
    p* = min(1, boost * s_u / 2^(j*a)); boost is 1 when bucket keys match
    current degrees and 2^a when keys are reference degrees that may lag by
    a factor of two. Accepted entries carry the raw ratio s_u / d_v^a.

    Returns (accepted, candidates, variates, max_ratio) where max_ratio is
    the largest raw acceptance ratio seen in clamped buckets (must stay
    <= 1 whenever the structure's staleness invariant holds).
    """
    nseg = seg_j.shape[0]
    acc = 0
    cand = 0
    var = 0
    maxr = 0.0
    for s in range(nseg):
        base = boost * s_u / pow2ja[seg_j[s]]
        if base <= 0.0:
            continue
        lo = seg_ptr[s]
        hi = seg_ptr[s + 1]
        if base >= 1.0:
            # p* clamps to 1: every bucket member is a candidate, acceptance
            # is the exact inclusion probability itself.
            for k in range(lo, hi):
                v = nbr[k]
                cand += 1
                praw = s_u / da[v]
                if praw >= 1.0 or rng_uniform(state) < praw:
                    out_v[acc] = v
                    out_w[acc] = praw
                    acc += 1
        else:
            nb = hi - lo
            y = 0
            while True:
                g = bounded_geometric(base, nb, state)
                var += 1
                y += g
                if y > nb:
                    break
                v = nbr[lo + y - 1]
                cand += 1
                praw = s_u / da[v]
                ratio = praw / base
                if ratio > maxr:
                    maxr = ratio
                if ratio >= 1.0 or rng_uniform(state) < ratio:
                    out_v[acc] = v
                    out_w[acc] = praw
                    acc += 1
    return acc, cand, var, maxr


@njit(cache=True)
def init_randomized_into(lo, hi, val, eps, forced_cut, state, out_idx,
                         out_val):
    """Randomized residue initialization over contiguous constant groups.

    Groups with value >= eps (or index >= forced_cut) get the exact value at
    every index; the rest are subset-sampled with probability val/eps, each
    selected index receiving mass eps. Unbiased entrywise.

    Returns (count, variates, assignments).
    """
    count = 0
    variates = 0
    assignments = 0
    for gi in range(lo.shape[0]):
        s = val[gi]
        if s <= 0.0:
            continue
        if s >= eps or gi >= forced_cut:
            for ix in range(lo[gi], hi[gi]):
                out_idx[count] = ix
                out_val[count] = s
                count += 1
                assignments += 1
        else:
            p = s / eps
            n = hi[gi] - lo[gi]
            y = 0
            while True:
                g = bounded_geometric(p, n, state)
                variates += 1
                y += g
                if y > n:
                    break
                out_idx[count] = lo[gi] + y - 1
                out_val[count] = eps
                count += 1
                assignments += 1
    return count, variates, assignments


@njit(cache=True)
def propagate_push_batch(
    n, vseg_ptr, seg_j, seg_ptr, nbr,
    deg, da, db, pow2ja,
    ratio_tab, wy_tab, levels, eps, boost,
    x_idx, x_val,
    cg_lo, cg_hi, cg_val, forced_cut, use_compact,
    runs, base_seed,
    truth, c_err, check_idx,
    out_sum, out_sumsq, out_exceed, out_counters, out_maxr,
):
    """Run `runs` seeded bucket-sampling propagation queries on one snapshot.

    Per run: residues start from the deterministic nonzeros (x_idx/x_val) or
    from randomized group initialization (cg_* arrays) when use_compact; then
    `levels` rounds of per-neighborhood subset sampling, residue pushes of
    mass max(eps, exact), and reserve accumulation wy_tab[i] * r(u).

    Accumulates per-vertex sum / sum of squares of the estimates, and (when
    c_err >= 0) counts runs with |estimate - truth| > c_err * truth at the
    vertices listed in check_idx. out_counters collects
    [edges_propagated, variates_drawn, neighborhoods_touched,
    candidates_examined, init_work_max].
    """
    state = np.empty(1, dtype=np.uint64)
    r_cur = np.zeros(n, dtype=np.float64)
    r_next = np.zeros(n, dtype=np.float64)
    pi = np.zeros(n, dtype=np.float64)
    touched = np.empty(n, dtype=np.int64)
    touched_next = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.uint8)
    seen_list = np.empty(n, dtype=np.int64)
    maxdeg = 0
    for u in range(n):
        if deg[u] > maxdeg:
            maxdeg = deg[u]
    cand_v = np.empty(max(maxdeg, 1), dtype=np.int64)
    cand_w = np.empty(max(maxdeg, 1), dtype=np.float64)
    init_idx = np.empty(n, dtype=np.int64)
    init_val = np.empty(n, dtype=np.float64)
    inv_eps = 1.0 / eps
    maxr_all = 0.0

    for run in range(runs):
        seed_state(state, base_seed, run)
        tc = 0
        if use_compact:
            cnt, ivar, iasg = init_randomized_into(
                cg_lo, cg_hi, cg_val, eps, forced_cut, state, init_idx,
                init_val)
            work = ivar + iasg
            if work > out_counters[4]:
                out_counters[4] = work
            for k in range(cnt):
                v = init_idx[k]
                if r_cur[v] == 0.0:
                    touched[tc] = v
                    tc += 1
                r_cur[v] += init_val[k]
        else:
            for k in range(x_idx.shape[0]):
                v = x_idx[k]
                touched[tc] = v
                tc += 1
                r_cur[v] = x_val[k]

        nseen = 0
        for i in range(levels + 1):
            sub = np.sort(touched[:tc])
            wy = wy_tab[i]
            for k in range(tc):
                u = sub[k]
                if seen[u] == 0:
                    seen[u] = 1
                    seen_list[nseen] = u
                    nseen += 1
                pi[u] += wy * r_cur[u]
            if i == levels:
                for k in range(tc):
                    r_cur[sub[k]] = 0.0
                break
            ratio = ratio_tab[i]
            tn = 0
            if ratio > 0.0:
                for k in range(tc):
                    u = sub[k]
                    ru = r_cur[u]
                    r_cur[u] = 0.0
                    if deg[u] <= 0 or ru <= 0.0:
                        continue
                    s_u = inv_eps * ratio * ru / db[u]
                    if s_u <= 0.0:
                        continue
                    out_counters[2] += 1
                    vs = vseg_ptr[u]
                    ve = vseg_ptr[u + 1]
                    acc, cand, var, mr = subset_sample_into(
                        seg_j[vs:ve], seg_ptr[vs:ve + 1], nbr, s_u, pow2ja,
                        boost, da, state, cand_v, cand_w)
                    out_counters[1] += var
                    out_counters[3] += cand
                    if mr > maxr_all:
                        maxr_all = mr
                    for c in range(acc):
                        v = cand_v[c]
                        w = cand_w[c]
                        mass = eps * (w if w > 1.0 else 1.0)
                        if r_next[v] == 0.0:
                            touched_next[tn] = v
                            tn += 1
                        r_next[v] += mass
                    out_counters[0] += acc
            else:
                for k in range(tc):
                    r_cur[sub[k]] = 0.0
            tmp = r_cur
            r_cur = r_next
            r_next = tmp
            tmp2 = touched
            touched = touched_next
            touched_next = tmp2
            tc = tn

        for k in range(nseen):
            v = seen_list[k]
            out_sum[v] += pi[v]
            out_sumsq[v] += pi[v] * pi[v]
        if c_err >= 0.0:
            for k in range(check_idx.shape[0]):
                v = check_idx[k]
                d = pi[v] - truth[v]
                if d < 0.0:
                    d = -d
                if d > c_err * truth[v]:
                    out_exceed[v] += 1
        for k in range(nseen):
            v = seen_list[k]
            pi[v] = 0.0
            seen[v] = 0

    out_maxr[0] = maxr_all


@njit(cache=True)
def propagate_baseline_batch(
    n, sptr, snbr,
    bvseg_ptr, bseg_j, bseg_ptr, bnbr, max_bucket,
    deg, da, db, pow2ja,
    ratio_tab, wy_tab, levels, eps,
    x_idx, x_val,
    runs, base_seed,
    truth, c_err, check_idx,
    out_sum, out_sumsq, out_exceed, out_counters, out_maxr,
):
    """Batch driver for the scan-plus-binomial propagation scheme.

    Low-degree neighbors (exact inclusion probability >= 1) are found by
    scanning the degree-sorted adjacency and receive exact mass; the rest are
    binomially bucket-sampled and each accepted neighbor receives fixed mass
    eps. Candidates already covered by the scan are skipped during sampling.
    Counter layout matches propagate_push_batch (index 4 unused).
    """
    state = np.empty(1, dtype=np.uint64)
    r_cur = np.zeros(n, dtype=np.float64)
    r_next = np.zeros(n, dtype=np.float64)
    pi = np.zeros(n, dtype=np.float64)
    touched = np.empty(n, dtype=np.int64)
    touched_next = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.uint8)
    seen_list = np.empty(n, dtype=np.int64)
    sel = np.empty(max(max_bucket, 1), dtype=np.int64)
    scratch = np.empty(max(max_bucket, 1), dtype=np.int64)
    inv_eps = 1.0 / eps
    maxr_all = 0.0

    for run in range(runs):
        seed_state(state, base_seed, run)
        tc = 0
        for k in range(x_idx.shape[0]):
            v = x_idx[k]
            touched[tc] = v
            tc += 1
            r_cur[v] = x_val[k]

        nseen = 0
        for i in range(levels + 1):
            sub = np.sort(touched[:tc])
            wy = wy_tab[i]
            for k in range(tc):
                u = sub[k]
                if seen[u] == 0:
                    seen[u] = 1
                    seen_list[nseen] = u
                    nseen += 1
                pi[u] += wy * r_cur[u]
            if i == levels:
                for k in range(tc):
                    r_cur[sub[k]] = 0.0
                break
            ratio = ratio_tab[i]
            tn = 0
            if ratio > 0.0:
                for k in range(tc):
                    u = sub[k]
                    ru = r_cur[u]
                    r_cur[u] = 0.0
                    if deg[u] <= 0 or ru <= 0.0:
                        continue
                    s_u = inv_eps * ratio * ru / db[u]
                    if s_u <= 0.0:
                        continue
                    out_counters[2] += 1
                    # exact branch: degree-sorted scan while d_v^a <= s_u
                    p = sptr[u]
                    pend = sptr[u + 1]
                    while p < pend:
                        v = snbr[p]
                        praw = s_u / da[v]
                        if praw < 1.0:
                            break
                        out_counters[3] += 1
                        mass = eps * praw
                        if r_next[v] == 0.0:
                            touched_next[tn] = v
                            tn += 1
                        r_next[v] += mass
                        out_counters[0] += 1
                        p += 1
                    # sampled branch: binomial per bucket, fixed mass eps
                    vs = bvseg_ptr[u]
                    ve = bvseg_ptr[u + 1]
                    for s in range(vs, ve):
                        p_star = s_u / pow2ja[bseg_j[s]]
                        if p_star > 1.0:
                            p_star = 1.0
                        if p_star <= 0.0:
                            continue
                        blo = bseg_ptr[s]
                        bhi = bseg_ptr[s + 1]
                        x = bucket_binomial_into(
                            bnbr[blo:bhi], p_star, state, sel, scratch)
                        out_counters[1] += 1
                        for c in range(x):
                            v = sel[c]
                            praw = s_u / da[v]
                            if praw >= 1.0:
                                continue  # handled by the exact scan
                            out_counters[3] += 1
                            ratio_ac = praw / p_star
                            if ratio_ac > maxr_all:
                                maxr_all = ratio_ac
                            if rng_uniform(state) < ratio_ac:
                                if r_next[v] == 0.0:
                                    touched_next[tn] = v
                                    tn += 1
                                r_next[v] += eps
                                out_counters[0] += 1
            else:
                for k in range(tc):
                    r_cur[sub[k]] = 0.0
            tmp = r_cur
            r_cur = r_next
            r_next = tmp
            tmp2 = touched
            touched = touched_next
            touched_next = tmp2
            tc = tn

        for k in range(nseen):
            v = seen_list[k]
            out_sum[v] += pi[v]
            out_sumsq[v] += pi[v] * pi[v]
        if c_err >= 0.0:
            for k in range(check_idx.shape[0]):
                v = check_idx[k]
                d = pi[v] - truth[v]
                if d < 0.0:
                    d = -d
                if d > c_err * truth[v]:
                    out_exceed[v] += 1
        for k in range(nseen):
            v = seen_list[k]
            pi[v] = 0.0
            seen[v] = 0

    out_maxr[0] = maxr_all


@njit(cache=True)
def bounded_geometric_hist(p, n, draws, base_seed):
    """Histogram of `draws` bounded-geometric variates (index 1..n+1)."""
    state = np.empty(1, dtype=np.uint64)
    seed_state(state, base_seed, 0)
    hist = np.zeros(n + 2, dtype=np.int64)
    for _ in range(draws):
        hist[bounded_geometric(p, n, state)] += 1
    return hist


@njit(cache=True)
def bucket_sampler_freq(kind, bucket, p_star, trials, base_seed, pair_a,
                        pair_b):
    """Monte-Carlo marginals for the two bucket samplers.

    kind 0 = geometric skips, 1 = binomial + Fisher-Yates. Returns per-slot
    inclusion counts, a histogram of kept-set sizes, and joint inclusion
    counts for the requested slot pairs.
    """
    n = bucket.shape[0]
    state = np.empty(1, dtype=np.uint64)
    counts = np.zeros(n, dtype=np.int64)
    sizes = np.zeros(n + 1, dtype=np.int64)
    joint = np.zeros(pair_a.shape[0], dtype=np.int64)
    out = np.empty(max(n, 1), dtype=np.int64)
    scratch = np.empty(max(n, 1), dtype=np.int64)
    incl = np.zeros(n, dtype=np.uint8)
    slot_of = np.empty(n, dtype=np.int64)
    for k in range(n):
        slot_of[bucket[k]] = k  # caller guarantees distinct ids in [0, n)
    for t in range(trials):
        seed_state(state, base_seed, t)
        if kind == 0:
            kept, _ = bucket_geometric_into(bucket, p_star, state, out)
        else:
            kept = bucket_binomial_into(bucket, p_star, state, out, scratch)
        sizes[kept] += 1
        for k in range(kept):
            s = slot_of[out[k]]
            counts[s] += 1
            incl[s] = 1
        for q in range(pair_a.shape[0]):
            if incl[pair_a[q]] == 1 and incl[pair_b[q]] == 1:
                joint[q] += 1
        for k in range(kept):
            incl[slot_of[out[k]]] = 0
    return counts, sizes, joint


@njit(cache=True)
def subset_sample_freq(seg_j, seg_ptr, nbr, s_u, pow2ja, boost, da, nmax,
                       trials, base_seed, pair_a, pair_b):
    """Monte-Carlo inclusion frequencies for one bucketed neighborhood."""
    state = np.empty(1, dtype=np.uint64)
    counts = np.zeros(nmax, dtype=np.int64)
    joint = np.zeros(pair_a.shape[0], dtype=np.int64)
    out_v = np.empty(nmax, dtype=np.int64)
    out_w = np.empty(nmax, dtype=np.float64)
    incl = np.zeros(nmax, dtype=np.uint8)
    total_cand = 0
    total_var = 0
    maxr_all = 0.0
    for t in range(trials):
        seed_state(state, base_seed, t)
        acc, cand, var, mr = subset_sample_into(
            seg_j, seg_ptr, nbr, s_u, pow2ja, boost, da, state, out_v, out_w)
        total_cand += cand
        total_var += var
        if mr > maxr_all:
            maxr_all = mr
        for k in range(acc):
            counts[out_v[k]] += 1
            incl[out_v[k]] = 1
        for q in range(pair_a.shape[0]):
            if incl[pair_a[q]] == 1 and incl[pair_b[q]] == 1:
                joint[q] += 1
        for k in range(acc):
            incl[out_v[k]] = 0
    return counts, joint, total_cand, total_var, maxr_all


@njit(cache=True)
def init_randomized_freq(lo, hi, val, eps, forced_cut, n, trials, base_seed):
    """Monte-Carlo statistics for randomized initialization.

    Returns per-index (sum, sumsq) of the initialized residue, the max
    per-run work counter (variates + assignments), and the max output count.
    """
    state = np.empty(1, dtype=np.uint64)
    out_idx = np.empty(n, dtype=np.int64)
    out_val = np.empty(n, dtype=np.float64)
    s = np.zeros(n, dtype=np.float64)
    s2 = np.zeros(n, dtype=np.float64)
    work_max = 0
    count_max = 0
    for t in range(trials):
        seed_state(state, base_seed, t)
        cnt, var, asg = init_randomized_into(lo, hi, val, eps, forced_cut,
                                             state, out_idx, out_val)
        if var + asg > work_max:
            work_max = var + asg
        if cnt > count_max:
            count_max = cnt
        for k in range(cnt):
            s[out_idx[k]] += out_val[k]
            s2[out_idx[k]] += out_val[k] * out_val[k]
    return s, s2, work_max, count_max
