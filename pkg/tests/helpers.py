"""Independent oracles used across the test suite.

These deliberately re-derive results with plain loops (no engine code paths)
so they can stand as ground truth for the fast implementations.
"""

from __future__ import annotations

import numpy as np


def gini(c0: float, c1: float) -> float:
    n = c0 + c1
    p1 = c1 / n
    p0 = c0 / n
    return 1.0 - p1 * p1 - p0 * p0


def oracle_best_split(X, y):
    """Exhaustive scan over every (feature, midpoint) candidate.

    Returns (feature, threshold, decrease) maximizing weighted Gini decrease
    with ties broken by lower feature index then lower threshold, or None if
    no feature admits a split. Uses the same algebraic form as the engine so
    exact ties resolve identically.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n, d = X.shape
    total1 = float((y == 1).sum())
    total0 = float(n) - total1
    g_parent = gini(total0, total1)
    best = None
    for f in range(d):
        values = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(values[:-1], values[1:]):
            thr = 0.5 * (lo + hi)
            if thr == hi:
                thr = lo
            left = X[:, f] <= thr
            nl = float(left.sum())
            nr = float(n) - nl
            cl1 = float((y[left] == 1).sum())
            cl0 = nl - cl1
            cr1 = total1 - cl1
            cr0 = nr - cr1
            dec = g_parent - (nl / n) * gini(cl0, cl1) - (nr / n) * gini(cr0, cr1)
            if best is None or dec > best[2]:
                best = (f, thr, dec)
    return best


def oracle_build_tree(X, y, max_depth: int):
    """Reference CART skeleton: nested (feature, threshold, left, right) dicts
    with leaves {"prob": p}. Mirrors the declared stopping rules."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)

    def grow(mask, depth):
        yy = y[mask]
        node = {"n": int(mask.sum()), "prob": float((yy == 1).mean())}
        if depth >= max_depth or (yy == yy[0]).all():
            return node
        best = oracle_best_split(X[mask], y[mask])
        if best is None:
            return node
        f, thr, dec = best
        go_left = mask & (X[:, f] <= thr)
        node.update(feature=f, threshold=thr, decrease=dec)
        node["left"] = grow(go_left, depth + 1)
        node["right"] = grow(mask & ~go_left, depth + 1)
        return node

    return grow(np.ones(X.shape[0], dtype=bool), 0)


def tree_structure(node) -> tuple:
    """Comparable skeleton of a tree: (feature, threshold, left, right) or a
    leaf marker. Works for both engine TreeNodes and oracle dicts."""
    if isinstance(node, dict):
        if "feature" not in node:
            return ("leaf", round(node["prob"], 12))
        return (
            node["feature"],
            node["threshold"],
            tree_structure(node["left"]),
            tree_structure(node["right"]),
        )
    if node.is_leaf:
        return ("leaf", round(node.prob, 12))
    return (
        node.feature,
        node.threshold,
        tree_structure(node.left),
        tree_structure(node.right),
    )


def concordance_auc(scores, labels) -> float:
    """Brute-force pairwise P(score+ > score-) + 0.5 P(tie)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    wins = ties = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def fm_pairwise_score(x, w0, w, V) -> float:
    """Direct O(d^2) factorization-machine score."""
    x = np.asarray(x, dtype=np.float64)
    total = w0 + float(np.dot(w, x))
    d = x.shape[0]
    for i in range(d):
        for j in range(i + 1, d):
            total += float(np.dot(V[i], V[j])) * x[i] * x[j]
    return total


def grad_check(value_and_grad, theta: np.ndarray, h: float = 1e-6) -> float:
    """Max relative error between the analytic gradient and central differences.

    `value_and_grad` maps a flat parameter vector to (loss, flat gradient).
    """
    _, grad = value_and_grad(theta)
    fd = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += h
        dn[i] -= h
        fd[i] = (value_and_grad(up)[0] - value_and_grad(dn)[0]) / (2 * h)
    denom = max(1.0, float(np.linalg.norm(grad)), float(np.linalg.norm(fd)))
    return float(np.linalg.norm(grad - fd)) / denom
