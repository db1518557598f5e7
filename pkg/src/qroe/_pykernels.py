"""Reference implementations of the combinatorial kernels (no compilation needed)."""
from __future__ import annotations

import numpy as np


def subset_lambda(pattern, weights):
    """max over nonempty A of w(union of columns in A) / w(A), with the argmax mask."""
    pattern = np.asarray(pattern, dtype=bool)
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n > 24:
        raise ValueError("subset enumeration limited to 24 atoms")
    if pattern.shape != (n, n):
        raise ValueError("pattern must be n x n")
    best, best_mask = 0.0, 0
    for s in range(1, 1 << n):
        members = [x for x in range(n) if (s >> x) & 1]
        den = float(w[members].sum())
        union = pattern[:, members].any(axis=1)
        ratio = float(w[union].sum()) / den
        if ratio > best:
            best, best_mask = ratio, s
    return best, best_mask


def transitive_closure(rel):
    r = np.array(rel, dtype=bool)
    for k in range(r.shape[0]):
        r |= np.outer(r[:, k], r[k, :])
    return r.astype(np.uint8)


def _component_ok(start, color, colors, adj, dist, max_diam):
    n = len(colors)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in range(n):
            if w not in seen and colors[w] == color and (adj[v][w] or adj[w][v]):
                seen.add(w)
                stack.append(w)
    comp = sorted(seen)
    for i, a in enumerate(comp):
        for b in comp[i + 1:]:
            if dist[a][b] > max_diam:
                return False
    return True


def color_search(adj, dist, n_colors, max_diam):
    adj = np.asarray(adj, dtype=bool).tolist()
    dist = np.asarray(dist, dtype=float).tolist()
    n = len(adj)
    colors = [-1] * n
    nodes = 0

    def rec(i, used):
        nonlocal nodes
        if i == n:
            return True
        for c in range(min(used + 1, n_colors - 1) + 1):
            colors[i] = c
            nodes += 1
            if _component_ok(i, c, colors, adj, dist, max_diam) and rec(i + 1, max(used, c)):
                return True
            colors[i] = -1
        return False

    if rec(0, -1):
        return np.array(colors, dtype=np.int32), nodes
    return None, nodes
