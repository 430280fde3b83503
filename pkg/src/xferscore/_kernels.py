"""Hot numeric kernels, numba-jitted with a pure-numpy fallback.

Backend selection happens once at import time:

* ``XFERSCORE_BACKEND=numpy``  force the pure-numpy path
* ``XFERSCORE_BACKEND=numba``  require numba (ImportError if missing)
* unset / ``auto``             numba when importable, numpy otherwise

Both backends implement the same canonical reduction: wherever a multiset
of float64 addends is summed, the addends are sorted ascending first and
accumulated in a wider-than-storage accumulator (Kahan compensation under
numba, longdouble under numpy).  Sorting makes every reduction a pure
function of the addend *multiset*, which is what gives leep_score its
bit-level permutation and relabeling invariance.  The two backends agree
to ~1e-15 relative but are not bit-identical to each other.
"""

import os

import numpy as np

_requested = os.environ.get("XFERSCORE_BACKEND", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"XFERSCORE_BACKEND={_requested!r} (expected auto, numba or numpy)")

if _requested == "numpy":
    _HAVE_NUMBA = False
else:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


# --- numpy reference implementations -----------------------------------------

def class_sorted_sums_numpy(pred, labels, c):
    """Per-class column sums of `pred`, each cell summed in ascending order.

    Returns a (c, m) array; row y holds sum_i{labels[i]==y} pred[i, :].
    """
    n, m = pred.shape
    out = np.zeros((c, m), dtype=np.float64)
    for y in range(c):
        block = pred[labels == y]
        if block.shape[0]:
            block = np.sort(block, axis=0)
            out[y] = block.sum(axis=0, dtype=np.longdouble).astype(np.float64)
    return out


def inner_sums_numpy(pred, cond, labels):
    """s_i = sum_z cond[labels[i], z] * pred[i, z], addends sorted ascending."""
    prod = pred * cond[labels]
    prod.sort(axis=1)
    return prod.sum(axis=1, dtype=np.longdouble).astype(np.float64)


def sgd_train_numpy(features, labels, c, orders, lr, batch, l2):
    """Mini-batch SGD on softmax cross-entropy, zero init, fixed epoch orders."""
    n, d = features.shape
    weights = np.zeros((c, d), dtype=np.float64)
    bias = np.zeros(c, dtype=np.float64)
    for order in orders:
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            xb = features[idx]
            logits = xb @ weights.T + bias
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            probs[np.arange(len(idx)), labels[idx]] -= 1.0
            inv = 1.0 / len(idx)
            weights -= lr * (probs.T @ xb * inv + l2 * weights)
            bias -= lr * probs.sum(axis=0) * inv
    return weights, bias


# --- numba implementations ----------------------------------------------------

if _HAVE_NUMBA:

    @njit(cache=True)
    def _class_sorted_sums_nb(pred, labels, c):
        n, m = pred.shape
        counts = np.zeros(c + 1, dtype=np.int64)
        for i in range(n):
            counts[labels[i] + 1] += 1
        for y in range(c):
            counts[y + 1] += counts[y]
        order = np.argsort(labels, kind="mergesort")
        out = np.zeros((c, m), dtype=np.float64)
        for y in range(c):
            lo = counts[y]
            hi = counts[y + 1]
            size = hi - lo
            if size == 0:
                continue
            vals = np.empty(size, dtype=np.float64)
            for z in range(m):
                for j in range(size):
                    vals[j] = pred[order[lo + j], z]
                vals.sort()
                acc = 0.0
                comp = 0.0
                for j in range(size):
                    v = vals[j] - comp
                    t = acc + v
                    comp = (t - acc) - v
                    acc = t
                out[y, z] = acc
        return out

    @njit(cache=True)
    def _inner_sums_nb(pred, cond, labels):
        n, m = pred.shape
        s = np.empty(n, dtype=np.float64)
        buf = np.empty(m, dtype=np.float64)
        for i in range(n):
            y = labels[i]
            for z in range(m):
                buf[z] = pred[i, z] * cond[y, z]
            b = np.sort(buf)
            acc = 0.0
            comp = 0.0
            for z in range(m):
                v = b[z] - comp
                t = acc + v
                comp = (t - acc) - v
                acc = t
            s[i] = acc
        return s

    @njit(cache=True)
    def _sgd_train_nb(features, labels, c, orders, lr, batch, l2):
        n, d = features.shape
        weights = np.zeros((c, d), dtype=np.float64)
        bias = np.zeros(c, dtype=np.float64)
        logits = np.empty(c, dtype=np.float64)
        gw = np.zeros((c, d), dtype=np.float64)
        gb = np.zeros(c, dtype=np.float64)
        for e in range(orders.shape[0]):
            for start in range(0, n, batch):
                stop = min(start + batch, n)
                for k in range(c):
                    gb[k] = 0.0
                    for j in range(d):
                        gw[k, j] = 0.0
                for t in range(start, stop):
                    i = orders[e, t]
                    mx = -np.inf
                    for k in range(c):
                        acc = bias[k]
                        for j in range(d):
                            acc += weights[k, j] * features[i, j]
                        logits[k] = acc
                        if acc > mx:
                            mx = acc
                    total = 0.0
                    for k in range(c):
                        logits[k] = np.exp(logits[k] - mx)
                        total += logits[k]
                    for k in range(c):
                        g = logits[k] / total
                        if k == labels[i]:
                            g -= 1.0
                        gb[k] += g
                        for j in range(d):
                            gw[k, j] += g * features[i, j]
                inv = 1.0 / (stop - start)
                for k in range(c):
                    bias[k] -= lr * gb[k] * inv
                    for j in range(d):
                        weights[k, j] -= lr * (gw[k, j] * inv + l2 * weights[k, j])
        return weights, bias

    def class_sorted_sums_numba(pred, labels, c):
        return _class_sorted_sums_nb(
            np.ascontiguousarray(pred, dtype=np.float64),
            np.ascontiguousarray(labels, dtype=np.int64),
            c,
        )

    def inner_sums_numba(pred, cond, labels):
        return _inner_sums_nb(
            np.ascontiguousarray(pred, dtype=np.float64),
            np.ascontiguousarray(cond, dtype=np.float64),
            np.ascontiguousarray(labels, dtype=np.int64),
        )

    def sgd_train_numba(features, labels, c, orders, lr, batch, l2):
        return _sgd_train_nb(
            np.ascontiguousarray(features, dtype=np.float64),
            np.ascontiguousarray(labels, dtype=np.int64),
            c,
            np.ascontiguousarray(orders, dtype=np.int64),
            lr,
            batch,
            l2,
        )

    class_sorted_sums = class_sorted_sums_numba
    inner_sums = inner_sums_numba
    sgd_train = sgd_train_numba
else:
    class_sorted_sums = class_sorted_sums_numpy
    inner_sums = inner_sums_numpy
    sgd_train = sgd_train_numpy


def sorted_sum(values):
    """Order-independent sum of a 1-D float array (sort ascending, then add)."""
    v = np.sort(np.asarray(values, dtype=np.float64), kind="stable")
    return float(v.sum(dtype=np.longdouble))


def sorted_mean(values):
    values = np.asarray(values, dtype=np.float64)
    return sorted_sum(values) / values.size
