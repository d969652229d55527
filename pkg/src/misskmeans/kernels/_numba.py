import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def domain_codes(words, rows, cwords):
    nrows = rows.shape[0]
    k, nw = cwords.shape
    codes = np.zeros(nrows, dtype=np.int64)
    for r in range(nrows):
        x = rows[r]
        code = 0
        for t in range(k):
            inside = True
            for w in range(nw):
                if words[x, w] & ~cwords[t, w]:
                    inside = False
                    break
            if inside:
                code |= 1 << t
        codes[r] = code
    return codes


@njit(cache=True, nogil=True)
def nearest_center(values, mask, rows, cvals, cmask, allowed):
    nrows = rows.shape[0]
    k, d = cvals.shape
    best = np.empty(nrows)
    arg = np.zeros(nrows, dtype=np.int64)
    for r in range(nrows):
        x = rows[r]
        bd = np.inf
        ba = 0
        for t in range(k):
            if not allowed[t]:
                continue
            s = 0.0
            for i in range(d):
                if mask[x, i] and cmask[t, i]:
                    diff = values[x, i] - cvals[t, i]
                    s += diff * diff
            if s < bd:
                bd = s
                ba = t
        best[r] = bd
        arg[r] = ba
    return best, arg


@njit(cache=True, nogil=True)
def cluster_sums(values, mask, labels, k):
    n, d = values.shape
    sums = np.zeros((k, d))
    counts = np.zeros((k, d))
    for x in range(n):
        t = labels[x]
        for i in range(d):
            if mask[x, i]:
                sums[t, i] += values[x, i]
                counts[t, i] += 1.0
    return sums, counts


@njit(cache=True, nogil=True)
def _labeling_cost(values, mask, labels, k, sums, sq, cnt):
    n, d = values.shape
    sums[:, :] = 0.0
    sq[:, :] = 0.0
    cnt[:, :] = 0.0
    for x in range(n):
        t = labels[x]
        for i in range(d):
            if mask[x, i]:
                v = values[x, i]
                sums[t, i] += v
                sq[t, i] += v * v
                cnt[t, i] += 1.0
    total = 0.0
    for t in range(k):
        for i in range(d):
            if cnt[t, i] > 0:
                total += sq[t, i] - sums[t, i] * sums[t, i] / cnt[t, i]
    return total


@njit(cache=True, nogil=True)
def enumerate_partitions(values, mask, k):
    n, d = values.shape
    labels = np.zeros(n, dtype=np.int64)
    prefix_max = np.zeros(n, dtype=np.int64)
    sums = np.zeros((k, d))
    sq = np.zeros((k, d))
    cnt = np.zeros((k, d))
    best_cost = np.inf
    best_labels = labels.copy()
    while True:
        cost = _labeling_cost(values, mask, labels, k, sums, sq, cnt)
        if cost < best_cost:
            best_cost = cost
            best_labels[:] = labels
        # successor in lexicographic order of restricted growth strings
        i = n - 1
        while i >= 1 and labels[i] >= min(k - 1, prefix_max[i - 1] + 1):
            i -= 1
        if i < 1:
            break
        labels[i] += 1
        prefix_max[i] = max(prefix_max[i - 1], labels[i])
        for j in range(i + 1, n):
            labels[j] = 0
            prefix_max[j] = prefix_max[i]
    return best_cost, best_labels
