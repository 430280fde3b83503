"""Deliberately naive reference implementations used only by tests.

Everything here favors obviousness over speed: plain Python loops,
dict counting, and library decompositions that differ from the ones the
package uses, so agreement is evidence rather than tautology.
"""

import math

import numpy as np


def naive_joint(pred, labels, c):
    pred = np.asarray(pred, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n, m = pred.shape
    joint = [[0.0] * m for _ in range(c)]
    for i in range(n):
        for z in range(m):
            joint[labels[i]][z] += pred[i][z] / n
    return np.array(joint)


def naive_conditional(joint):
    joint = np.asarray(joint, dtype=float)
    c, m = joint.shape
    cond = [[0.0] * m for _ in range(c)]
    support = [False] * m
    for z in range(m):
        marginal = 0.0
        for y in range(c):
            marginal += joint[y][z]
        if marginal > 0.0:
            support[z] = True
            for y in range(c):
                cond[y][z] = joint[y][z] / marginal
    return np.array(cond), np.array(support)


def naive_leep(pred, labels, c):
    """Triple-loop transcription of the two-step definition; also returns
    the per-example inner sums for boundedness checks."""
    pred = np.asarray(pred, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n, m = pred.shape
    cond, _ = naive_conditional(naive_joint(pred, labels, c))
    sums = []
    for i in range(n):
        s = 0.0
        for z in range(m):
            s += cond[labels[i]][z] * pred[i][z]
        sums.append(s)
    total = 0.0
    for s in sums:
        total += math.log(s)
    return total / n, sums


def naive_nce(ys, zs):
    ys = [int(y) for y in ys]
    zs = [int(z) for z in zs]
    n = len(ys)
    pair = {}
    z_count = {}
    for y, z in zip(ys, zs):
        pair[(y, z)] = pair.get((y, z), 0) + 1
        z_count[z] = z_count.get(z, 0) + 1
    total = 0.0
    for y, z in zip(ys, zs):
        total += math.log(pair[(y, z)] / z_count[z])
    return total / n


def naive_h_score(features, labels):
    """SVD-route pseudo-inverse (np.linalg.pinv) against explicit loops for
    both covariance factors; independent of the package's eigh route."""
    feats = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=int)
    n, d = feats.shape
    mean = feats.sum(axis=0) / n
    centered = feats - mean
    cov_f = np.zeros((d, d))
    for i in range(n):
        cov_f += np.outer(centered[i], centered[i])
    cov_f /= n
    cov_g = np.zeros((d, d))
    for y in set(labels.tolist()):
        rows = centered[labels == y]
        g = rows.sum(axis=0) / len(rows)
        cov_g += (len(rows) / n) * np.outer(g, g)
    pinv = np.linalg.pinv(cov_f, rcond=1e-8)
    return float(np.trace(pinv @ cov_g))


def naive_pearson(xs, ys):
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy / math.sqrt(sxx * syy)


def naive_avg_loglik(weights, bias, feats, labels):
    weights = np.asarray(weights, dtype=float)
    bias = np.asarray(bias, dtype=float)
    feats = np.asarray(feats, dtype=float)
    total = 0.0
    for i, y in enumerate(labels):
        logits = weights @ feats[i] + bias
        shifted = logits - max(logits)
        total += shifted[int(y)] - math.log(sum(math.exp(v) for v in shifted))
    return total / len(labels)


def random_instance(rng, n_max=20, m_max=5, c_max=4):
    """Small random (pred, labels, c) with every class present and rows
    normalized exactly; matches the fuzz envelope used across the suite."""
    c = int(rng.integers(2, c_max + 1))
    m = int(rng.integers(2, m_max + 1))
    n = int(rng.integers(c, n_max + 1))
    labels = np.concatenate([np.arange(c), rng.integers(0, c, size=n - c)])
    rng.shuffle(labels)
    pred = rng.random((n, m)) + 1e-3
    pred /= pred.sum(axis=1, keepdims=True)
    return pred, labels.astype(np.int64), c
