import numpy as np


def pack_mask(mask):
    """Pack a boolean ``(n, d)`` mask into ``(n, ceil(d/64))`` uint64 words."""
    mask = np.atleast_2d(np.asarray(mask, dtype=bool))
    n, d = mask.shape
    nwords = max(1, -(-d // 64))
    padded = np.zeros((n, nwords * 64), dtype=bool)
    padded[:, :d] = mask
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def domain_codes(words, rows, cwords):
    w = words[rows]
    k = cwords.shape[0]
    codes = np.zeros(len(rows), dtype=np.int64)
    for t in range(k):
        inside = ~np.any(w & ~cwords[t], axis=1)
        codes |= inside.astype(np.int64) << t
    return codes


def nearest_center(values, mask, rows, cvals, cmask, allowed):
    x = values[rows]
    m = mask[rows]
    d2 = np.zeros((len(rows), cvals.shape[0]))
    # coordinate by coordinate, so sums round exactly like the compiled loop
    for i in range(values.shape[1]):
        diff = x[:, i, None] - cvals[None, :, i]
        d2 += np.where(m[:, i, None] & cmask[None, :, i], diff * diff, 0.0)
    d2[:, ~allowed] = np.inf
    arg = np.argmin(d2, axis=1)
    return d2[np.arange(len(rows)), arg], arg.astype(np.int64)


def cluster_sums(values, mask, labels, k):
    d = values.shape[1]
    sums = np.zeros((k, d))
    counts = np.zeros((k, d))
    np.add.at(sums, labels, np.where(mask, values, 0.0))
    np.add.at(counts, labels, mask.astype(np.float64))
    return sums, counts


def _canonical_blocks(n, k, block=1 << 16):
    # point 0 always carries label 0; mixed-radix order over the rest
    total = k ** (n - 1)
    radix = k ** np.arange(n - 2, -1, -1, dtype=np.int64)
    for start in range(0, total, block):
        codes = np.arange(start, min(total, start + block), dtype=np.int64)
        labels = np.zeros((len(codes), n), dtype=np.int64)
        if n > 1:
            labels[:, 1:] = (codes[:, None] // radix[None, :]) % k
        prev_max = np.maximum.accumulate(labels, axis=1)
        ok = np.all(labels[:, 1:] <= prev_max[:, :-1] + 1, axis=1)
        yield labels[ok]


def enumerate_partitions(values, mask, k):
    n, d = values.shape
    v = np.where(mask, values, 0.0)
    m = mask.astype(np.float64)
    v2 = v * v
    best_cost = np.inf
    best_labels = np.zeros(n, dtype=np.int64)
    for labels in _canonical_blocks(n, k):
        cost = np.zeros(len(labels))
        for t in range(k):
            oh = (labels == t).astype(np.float64)
            s = oh @ v
            q = oh @ v2
            c = oh @ m
            with np.errstate(invalid="ignore", divide="ignore"):
                part = np.where(c > 0, q - s * s / c, 0.0)
            cost += part.sum(axis=1)
        i = int(np.argmin(cost))
        if cost[i] < best_cost:
            best_cost = float(cost[i])
            best_labels = labels[i].copy()
    return best_cost, best_labels
