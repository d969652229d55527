"""The whole branch-and-prune search as one compiled function.

Mirrors ``solver._Search`` step for step, including the order of random
draws, so both backends return the same result for the same seed.  Scalar
settings travel in an int64 array ``ip``; counters and the abort code live in
``stats`` (slot layout below) and are read back by the caller.
"""

import numpy as np
from numba import njit

from ._numba import domain_codes, nearest_center

# ip slots
IP_K, IP_DELTA, IP_M, IP_LAM, IP_RETRY, IP_MAX_CALLS, IP_CHECK, IP_PARTIAL, IP_MAX_SAMPLING = range(9)
N_IP = 9

# stats slots
(
    ST_CALLS,
    ST_SAMPLING,
    ST_PRUNING,
    ST_MAX_SAMPLING,
    ST_MAX_PRUNING,
    ST_NODES,
    ST_MIN_MARGIN,
    ST_ABORT,
    ST_ROOT_N,
) = range(9)
N_STATS = 9
NO_MARGIN = 1 << 62

# abort codes
ABORT_CALLS = 1
ABORT_DOMAIN = 2
ABORT_SAMPLING = 3
ABORT_PRUNING_DEPTH = 4
ABORT_POTENTIAL = 5
ABORT_PRUNE_SIZE = 6
ABORT_DEPTH = 7


@njit(cache=True)
def mix_key(key, branch):
    z = key ^ (np.uint64(branch + 1) * np.uint64(0x9E3779B97F4A7C15))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _seed(key):
    np.random.seed(np.int64((key ^ (key >> np.uint64(32))) & np.uint64(0xFFFFFFFF)))


@njit(cache=True)
def _pick(n):
    j = int(np.random.random() * n)
    return j if j < n else n - 1


@njit(cache=True)
def superset_value(values, mask, R, i, m, retry):
    L = R.shape[0]
    draws = np.empty(m, dtype=np.int64)
    keep = np.empty(m, dtype=np.bool_)
    for _ in range(retry + 1):
        for j in range(m):
            draws[j] = R[_pick(L)]
        anykeep = False
        while not anykeep:
            for j in range(m):
                keep[j] = np.random.random() < 0.5
                if keep[j]:
                    anykeep = True
        s = 0.0
        c = 0
        for j in range(m):
            if keep[j] and mask[draws[j], i]:
                s += values[draws[j], i]
                c += 1
        if c > 0:
            return s / c
    cnt = 0
    for r in range(L):
        if mask[R[r], i]:
            cnt += 1
    if cnt == 0:
        return 0.0
    j = _pick(cnt)
    for r in range(L):
        if mask[R[r], i]:
            if j == 0:
                return values[R[r], i]
            j -= 1
    return 0.0


@njit(cache=True)
def _sample_sums(values, mask, R, size, sums, cnt):
    L = R.shape[0]
    d = values.shape[1]
    sums[:] = 0.0
    cnt[:] = 0
    for _ in range(size):
        x = R[_pick(L)]
        for i in range(d):
            sums[i] += values[x, i]
            if mask[x, i]:
                cnt[i] += 1


@njit(cache=True)
def initial_center(values, mask, R, delta, m, lam, retry):
    d = values.shape[1]
    L = R.shape[0]
    sums = np.zeros(d)
    cnt = np.zeros(d, dtype=np.int64)
    u = np.zeros(d)
    if delta == 0:
        _sample_sums(values, mask, R, m, sums, cnt)
        dom = cnt > 0
        for i in range(d):
            if dom[i]:
                u[i] = sums[i] / cnt[i]
        return u, dom
    pivot = R[_pick(L)]
    dom = mask[pivot].copy()
    _sample_sums(values, mask, R, lam, sums, cnt)
    for i in range(d):
        if dom[i] and cnt[i] > 0:
            u[i] = sums[i] / cnt[i]
    for j in range(d):
        if not dom[j] or cnt[j] > 0:
            continue
        found = False
        for _ in range(retry):
            s = 0.0
            c = 0
            for q in range(lam):
                x = R[_pick(L)]
                if mask[x, j]:
                    s += values[x, j]
                    c += 1
            if c > 0:
                u[j] = s / c
                found = True
                break
        if not found:
            npool = 0
            for r in range(L):
                if mask[R[r], j]:
                    npool += 1
            pool = np.empty(npool, dtype=np.int64)
            npool = 0
            for r in range(L):
                if mask[R[r], j]:
                    pool[npool] = R[r]
                    npool += 1
            s = 0.0
            for q in range(lam):
                s += values[pool[_pick(npool)], j]
            u[j] = s / lam
    return u, dom


@njit(cache=True)
def _potential(cmask, delta):
    k, d = cmask.shape
    total = 0
    for t in range(k):
        missing = d
        for i in range(d):
            if cmask[t, i]:
                missing -= 1
        total += min(missing, delta + 1)
    return total


@njit(cache=True)
def _set_word(cwords, t, j):
    cwords[t, j // 64] |= np.uint64(1) << np.uint64(j % 64)


@njit(cache=True)
def _partial_score(values, mask, R, cv, cm, allowed):
    d2, _ = nearest_center(values, mask, R, cv, cm, allowed)
    score = 0.0
    for q in range(d2.shape[0]):
        score += d2[q]
    return score


@njit(cache=True)
def search(values, mask, words, R0, cv0, cm0, cw0, key0, ip, max_pruning, stats, root_costs):
    """Depth-first walk of the search tree with an explicit frame stack.

    A frame is entered once (point removal, branch list), then resumed after
    each child returns until its sampling branches and its pruning branch are
    exhausted.  Returns the winning centers, their cost over ``R0`` and the
    labels of ``R0`` in order.  On abort ``stats[ST_ABORT]`` is nonzero and the
    other outputs are meaningless.
    """
    k = ip[IP_K]
    delta = ip[IP_DELTA]
    check = ip[IP_CHECK] != 0
    partial = ip[IP_PARTIAL] != 0
    d = values.shape[1]
    full = (1 << k) - 1
    allowed = np.ones(k, dtype=np.bool_)
    cap = ip[IP_MAX_SAMPLING] + int(max_pruning) + 3

    e_i = np.empty(0, dtype=np.int64)
    e_b = np.empty((0, 2), dtype=np.int64)
    fR = [R0] * cap
    fcv = [cv0] * cap
    fcm = [cm0] * cap
    fcw = [cw0] * cap
    fRr = [e_i] * cap
    frest = [e_i] * cap
    fcodes = [e_i] * cap
    flab = [e_i] * cap
    fbr = [e_b] * cap
    fbcv = [cv0] * cap
    fbcm = [cm0] * cap
    fblab = [e_i] * cap
    fppos = [e_i] * cap
    fporder = [e_i] * cap
    fplab = [e_i] * cap
    fleft = [e_i] * cap
    fkey = np.zeros(cap, dtype=np.uint64)
    fns = np.zeros(cap, dtype=np.int64)
    fnp = np.zeros(cap, dtype=np.int64)
    fb = np.zeros(cap, dtype=np.int64)
    fT = np.zeros(cap, dtype=np.int64)
    fpruned = np.zeros(cap, dtype=np.bool_)
    fpend = np.zeros(cap, dtype=np.int64)
    fpot = np.zeros(cap, dtype=np.int64)
    fhave = np.zeros(cap, dtype=np.bool_)
    fown = np.zeros(cap)
    fbs = np.zeros(cap)
    fbcost = np.zeros(cap)
    fpcost = np.zeros(cap)

    fkey[0] = key0
    depth = 0
    r_cv = cv0
    r_cm = cm0
    r_cost = 0.0
    r_lab = e_i
    returning = False

    while True:
        if returning:
            # hand the child's result to its parent frame
            depth -= 1
            if depth < 0:
                break
            f = depth
            Rr = fRr[f]
            nr = Rr.shape[0]
            if fpend[f] == 1:
                pos = fppos[f]
                order = fporder[f]
                plab = fplab[f]
                left = fleft[f]
                c_lab = np.zeros(nr, dtype=np.int64)
                for q in order:
                    c_lab[pos[q]] = plab[q]
                for q in range(left.shape[0]):
                    c_lab[left[q]] = r_lab[q]
                c_cost = r_cost + fpcost[f]
            else:
                c_lab = r_lab
                c_cost = r_cost
            if partial:
                score = _partial_score(values, mask, Rr, r_cv, r_cm, allowed)
            else:
                score = c_cost
            if f == 0:
                root_costs[stats[ST_ROOT_N]] = score
                stats[ST_ROOT_N] += 1
            if not fhave[f] or score < fbs[f]:
                fhave[f] = True
                fbs[f] = score
                fbcv[f] = r_cv
                fbcm[f] = r_cm
                fbcost[f] = c_cost
                fblab[f] = c_lab
            returning = False
        else:
            # enter frame ``depth``
            f = depth
            R = fR[f]
            cvals = fcv[f]
            cmask = fcm[f]
            n_s = fns[f]
            n_p = fnp[f]
            stats[ST_CALLS] += 1
            if stats[ST_CALLS] > ip[IP_MAX_CALLS]:
                stats[ST_ABORT] = ABORT_CALLS
                break
            if n_s > stats[ST_MAX_SAMPLING]:
                stats[ST_MAX_SAMPLING] = n_s
            if n_p > stats[ST_MAX_PRUNING]:
                stats[ST_MAX_PRUNING] = n_p
            if check:
                bad = False
                for t in range(k):
                    size = 0
                    for i in range(d):
                        if cmask[t, i]:
                            size += 1
                    if size != 0 and size < d - delta:
                        bad = True
                if bad:
                    stats[ST_ABORT] = ABORT_DOMAIN
                    break
                if n_s > ip[IP_MAX_SAMPLING]:
                    stats[ST_ABORT] = ABORT_SAMPLING
                    break
                if n_p > max_pruning:
                    stats[ST_ABORT] = ABORT_PRUNING_DEPTH
                    break
                stats[ST_NODES] += 1

            codes_all = domain_codes(words, R, fcw[f])
            labels_out = np.zeros(R.shape[0], dtype=np.int64)
            n_done = 0
            for r in range(R.shape[0]):
                if codes_all[r] == full:
                    n_done += 1
            own_cost = 0.0
            rest = np.empty(R.shape[0] - n_done, dtype=np.int64)
            if n_done > 0:
                done_pos = np.empty(n_done, dtype=np.int64)
                a = 0
                b = 0
                for r in range(R.shape[0]):
                    if codes_all[r] == full:
                        done_pos[a] = r
                        a += 1
                    else:
                        rest[b] = r
                        b += 1
                d2, lab = nearest_center(values, mask, R[done_pos], cvals, cmask, allowed)
                for q in range(n_done):
                    labels_out[done_pos[q]] = lab[q]
                    own_cost += d2[q]
            else:
                for r in range(R.shape[0]):
                    rest[r] = r
            if rest.shape[0] == 0:
                r_cv = cvals
                r_cm = cmask
                r_cost = own_cost
                r_lab = labels_out
                returning = True
                continue
            Rr = R[rest]
            codes = codes_all[rest]
            nr = Rr.shape[0]
            fRr[f] = Rr
            frest[f] = rest
            fcodes[f] = codes
            flab[f] = labels_out
            fown[f] = own_cost
            fpot[f] = _potential(cmask, delta) if check else 0

            nb = 0
            for t in range(k):
                size = 0
                for i in range(d):
                    if cmask[t, i]:
                        size += 1
                if size == 0:
                    nb += 1
                elif size < d:
                    nb += d - size
            br = np.empty((nb, 2), dtype=np.int64)
            nb = 0
            for t in range(k):
                size = 0
                for i in range(d):
                    if cmask[t, i]:
                        size += 1
                if size == 0:
                    br[nb, 0] = t
                    br[nb, 1] = -1
                    nb += 1
                elif size < d:
                    for j in range(d):
                        if not cmask[t, j]:
                            br[nb, 0] = t
                            br[nb, 1] = j
                            nb += 1
            fbr[f] = br
            fb[f] = 0
            fhave[f] = False
            fpruned[f] = False

            counts = np.zeros(full, dtype=np.int64)
            for r in range(nr):
                if codes[r] != 0:
                    counts[codes[r]] += 1
            T = 0
            for s_ in range(1, full):
                if counts[s_] > counts[T]:
                    T = s_
            fT[f] = T if counts[T] > 0 and counts[T] * full >= nr else -1

        # resume frame f: next sampling branch, then the pruning branch
        if fb[f] < fbr[f].shape[0]:
            b = fb[f]
            t = fbr[f][b, 0]
            j = fbr[f][b, 1]
            Rr = fRr[f]
            ck = mix_key(fkey[f], b)
            _seed(ck)
            ncv = fcv[f].copy()
            ncm = fcm[f].copy()
            ncw = fcw[f].copy()
            if j < 0:
                u, dom = initial_center(values, mask, Rr, delta, ip[IP_M], ip[IP_LAM], ip[IP_RETRY])
                ncw[t, :] = 0
                for i in range(d):
                    ncv[t, i] = u[i] if dom[i] else 0.0
                    ncm[t, i] = dom[i]
                    if dom[i]:
                        _set_word(ncw, t, i)
            else:
                ncv[t, j] = superset_value(values, mask, Rr, j, ip[IP_M], ip[IP_RETRY])
                ncm[t, j] = True
                _set_word(ncw, t, j)
            stats[ST_SAMPLING] += 1
            if check and _potential(ncm, delta) > fpot[f] - 1:
                stats[ST_ABORT] = ABORT_POTENTIAL
                break
            fb[f] = b + 1
            fpend[f] = 0
            if depth + 1 >= cap:
                stats[ST_ABORT] = ABORT_DEPTH
                break
            c = depth + 1
            fR[c] = Rr
            fcv[c] = ncv
            fcm[c] = ncm
            fcw[c] = ncw
            fkey[c] = ck
            fns[c] = fns[f] + 1
            fnp[c] = fnp[f]
            depth = c
            continue

        if fT[f] >= 0 and not fpruned[f]:
            fpruned[f] = True
            T = fT[f]
            Rr = fRr[f]
            codes = fcodes[f]
            nr = Rr.shape[0]
            ck = mix_key(fkey[f], fbr[f].shape[0])
            npos = 0
            for r in range(nr):
                if codes[r] == T:
                    npos += 1
            pos = np.empty(npos, dtype=np.int64)
            a = 0
            for r in range(nr):
                if codes[r] == T:
                    pos[a] = r
                    a += 1
            sub_allowed = np.zeros(k, dtype=np.bool_)
            for t in range(k):
                sub_allowed[t] = (T >> t) & 1 == 1
            d2, lab = nearest_center(values, mask, Rr[pos], fcv[f], fcm[f], sub_allowed)
            half = (npos + 1) // 2
            order = np.argsort(d2, kind="mergesort")[:half]
            stats[ST_PRUNING] += 1
            if check:
                need = -(-nr // (2 * full))
                margin = half - max(1, need)
                if margin < 0:
                    stats[ST_ABORT] = ABORT_PRUNE_SIZE
                    break
                if margin < stats[ST_MIN_MARGIN]:
                    stats[ST_MIN_MARGIN] = margin
            taken = np.zeros(nr, dtype=np.bool_)
            p_cost = 0.0
            for q in order:
                taken[pos[q]] = True
                p_cost += d2[q]
            left = np.empty(nr - half, dtype=np.int64)
            a = 0
            for r in range(nr):
                if not taken[r]:
                    left[a] = r
                    a += 1
            fppos[f] = pos
            fporder[f] = order
            fplab[f] = lab
            fleft[f] = left
            fpcost[f] = p_cost
            fpend[f] = 1
            if depth + 1 >= cap:
                stats[ST_ABORT] = ABORT_DEPTH
                break
            c = depth + 1
            fR[c] = Rr[left]
            fcv[c] = fcv[f]
            fcm[c] = fcm[f]
            fcw[c] = fcw[f]
            fkey[c] = ck
            fns[c] = fns[f]
            fnp[c] = fnp[f] + 1
            depth = c
            continue

        # frame exhausted: return its best candidate
        labels_out = flab[f]
        rest = frest[f]
        blab = fblab[f]
        for q in range(rest.shape[0]):
            labels_out[rest[q]] = blab[q]
        r_cv = fbcv[f]
        r_cm = fbcm[f]
        r_cost = fbcost[f] + fown[f]
        r_lab = labels_out
        returning = True

    return r_cv, r_cm, r_cost, r_lab
