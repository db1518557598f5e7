# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled combinatorial kernels; see _pykernels for the reference versions."""

import numpy as np


def subset_lambda(const unsigned char[:, :] pattern, const double[:] weights):
    """max over nonempty A of w(union of columns in A) / w(A).

    pattern[y, x] != 0 marks y in the column support of atom x.
    Returns (ratio, mask of the maximizing subset).
    """
    cdef Py_ssize_t n = weights.shape[0]
    cdef Py_ssize_t x, y
    cdef long long s, full, u, best_mask = 0
    cdef double num, den, ratio, best = 0.0
    if n > 24:
        raise ValueError("subset enumeration limited to 24 atoms")
    if pattern.shape[0] != n or pattern.shape[1] != n:
        raise ValueError("pattern must be n x n")
    cols = np.zeros(n, dtype=np.int64)
    cdef long long[:] colmask = cols
    for x in range(n):
        u = 0
        for y in range(n):
            if pattern[y, x]:
                u |= (<long long>1) << y
        colmask[x] = u
    full = (<long long>1) << n
    for s in range(1, full):
        u = 0
        den = 0.0
        for x in range(n):
            if (s >> x) & 1:
                u |= colmask[x]
                den += weights[x]
        num = 0.0
        for y in range(n):
            if (u >> y) & 1:
                num += weights[y]
        ratio = num / den
        if ratio > best:
            best = ratio
            best_mask = s
    return best, int(best_mask)


def transitive_closure(const unsigned char[:, :] rel):
    cdef Py_ssize_t n = rel.shape[0]
    cdef Py_ssize_t i, j, k
    out = np.array(rel, dtype=np.uint8, copy=True)
    cdef unsigned char[:, :] r = out
    for k in range(n):
        for i in range(n):
            if r[i, k]:
                for j in range(n):
                    if r[k, j]:
                        r[i, j] = 1
    return out


cdef bint _component_ok(Py_ssize_t start, int color, int[:] colors, const unsigned char[:, :] adj,
                        const double[:, :] dist, double max_diam, int[:] stack, int[:] comp,
                        unsigned char[:] seen):
    cdef Py_ssize_t n = colors.shape[0]
    cdef Py_ssize_t top = 0, size = 0, i, j, v, w
    for i in range(n):
        seen[i] = 0
    stack[0] = start
    top = 1
    seen[start] = 1
    while top > 0:
        top -= 1
        v = stack[top]
        comp[size] = v
        size += 1
        for w in range(n):
            if not seen[w] and colors[w] == color and (adj[v, w] or adj[w, v]):
                seen[w] = 1
                stack[top] = w
                top += 1
    for i in range(size):
        for j in range(i + 1, size):
            if dist[comp[i], comp[j]] > max_diam:
                return False
    return True


def color_search(const unsigned char[:, :] adj, const double[:, :] dist, int n_colors, double max_diam):
    """Backtracking assignment of atoms to families.

    Parts of a family are the connected components of its atoms under adj;
    every part must have diameter at most max_diam.  Returns (colors or None,
    number of search nodes visited).
    """
    cdef Py_ssize_t n = adj.shape[0]
    cdef Py_ssize_t i
    cdef long long nodes = 0
    cdef int c, top_color
    colors_arr = np.full(n, -1, dtype=np.int32)
    cdef int[:] colors = colors_arr
    cdef int[:] stack = np.zeros(n + 1, dtype=np.int32)
    cdef int[:] comp = np.zeros(n + 1, dtype=np.int32)
    cdef unsigned char[:] seen = np.zeros(n, dtype=np.uint8)
    # choice[i] is the next color to try at depth i; used[i] the max color used before i
    cdef int[:] choice = np.zeros(n + 1, dtype=np.int32)
    cdef int[:] used = np.full(n + 1, -1, dtype=np.int32)
    if n == 0:
        return colors_arr, 0
    i = 0
    choice[0] = 0
    while True:
        top_color = used[i] + 1
        if top_color > n_colors - 1:
            top_color = n_colors - 1
        if choice[i] > top_color:
            colors[i] = -1
            if i == 0:
                return None, int(nodes)
            i -= 1
            choice[i] += 1
            continue
        c = choice[i]
        colors[i] = c
        nodes += 1
        if _component_ok(i, c, colors, adj, dist, max_diam, stack, comp, seen):
            if i == n - 1:
                return colors_arr, int(nodes)
            used[i + 1] = used[i] if used[i] >= c else c
            i += 1
            choice[i] = 0
        else:
            colors[i] = -1
            choice[i] += 1
