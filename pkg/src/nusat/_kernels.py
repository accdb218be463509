"""Compiled hot loops for the experiment harness.

These reproduce :mod:`nusat.generator` word for word (tests pin the two
against each other) and run Tarjan's algorithm without Python overhead.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / (1 << 53)


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def draw_clauses(prob, alias, k, seed, start, retry_cap, out):
    """Fill ``out`` (shape ``(m, k)``) with clauses ``start..start+m-1``.

    Returns -1 on success, else the index of the first clause that hit the
    retry cap.
    """
    n = prob.shape[0]
    key = mix64(np.uint64(seed))
    stride = k + 1
    tup = np.empty(k, dtype=np.int64)
    for r in range(out.shape[0]):
        base = mix64(key + np.uint64(start + r + 1) * _G)
        attempt = 0
        while True:
            if attempt >= retry_cap:
                return start + r
            c0 = np.uint64(attempt * stride)
            for j in range(k):
                w = mix64(base + (c0 + np.uint64(j) + _ONE) * _G)
                u = np.float64(w >> _S11) * _INV53 * n
                col = np.int64(u)
                if col > n - 1:
                    col = n - 1
                if (u - col) < prob[col]:
                    tup[j] = col
                else:
                    tup[j] = alias[col]
            clash = False
            for a in range(k):
                for b in range(a + 1, k):
                    if tup[a] == tup[b]:
                        clash = True
            if not clash:
                break
            attempt += 1
        sw = mix64(base + (np.uint64(attempt * stride + k) + _ONE) * _G)
        for j in range(k):
            lit = tup[j] + 1
            if (sw >> np.uint64(63 - j)) & _ONE:
                lit = -lit
            out[r, j] = lit
    return -1


@njit(cache=True)
def scc_components(clauses, n):
    """Tarjan component ids on the 2n-node implication graph of a 2-CNF.

    Ids are assigned sinks first; nodes without edges keep id -1.
    """
    nn = 2 * n
    m = clauses.shape[0]
    deg = np.zeros(nn + 1, dtype=np.int64)
    src = np.empty(2 * m, dtype=np.int64)
    dst = np.empty(2 * m, dtype=np.int64)
    for c in range(m):
        a = clauses[c, 0]
        b = clauses[c, 1]
        na = 2 * (abs(a) - 1) + (1 if a < 0 else 0)
        nb = 2 * (abs(b) - 1) + (1 if b < 0 else 0)
        src[2 * c] = na ^ 1
        dst[2 * c] = nb
        src[2 * c + 1] = nb ^ 1
        dst[2 * c + 1] = na
        deg[(na ^ 1) + 1] += 1
        deg[(nb ^ 1) + 1] += 1
    for v in range(nn):
        deg[v + 1] += deg[v]
    indptr = deg.copy()
    fill = deg[:-1].copy()
    adj = np.empty(2 * m, dtype=np.int64)
    for e in range(2 * m):
        s = src[e]
        adj[fill[s]] = dst[e]
        fill[s] += 1

    index = np.full(nn, -1, dtype=np.int64)
    low = np.zeros(nn, dtype=np.int64)
    on_stack = np.zeros(nn, dtype=np.bool_)
    comp = np.full(nn, -1, dtype=np.int64)
    stack = np.empty(nn, dtype=np.int64)
    work_v = np.empty(nn, dtype=np.int64)
    work_i = np.empty(nn, dtype=np.int64)
    sp = 0
    counter = 0
    ncomp = 0
    for root in range(nn):
        if index[root] != -1 or indptr[root] == indptr[root + 1]:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[sp] = root
        sp += 1
        on_stack[root] = True
        wp = 0
        work_v[0] = root
        work_i[0] = indptr[root]
        wp = 1
        while wp > 0:
            v = work_v[wp - 1]
            i = work_i[wp - 1]
            end = indptr[v + 1]
            descended = False
            while i < end:
                w = adj[i]
                i += 1
                if index[w] == -1:
                    work_i[wp - 1] = i
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[sp] = w
                    sp += 1
                    on_stack[w] = True
                    work_v[wp] = w
                    work_i[wp] = indptr[w]
                    wp += 1
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            wp -= 1
            if low[v] == index[v]:
                while True:
                    sp -= 1
                    w = stack[sp]
                    on_stack[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if wp > 0:
                u = work_v[wp - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comp


@njit(cache=True)
def first_clash(comp):
    """0-based variable whose literals share a component, or -1."""
    for v in range(comp.shape[0] // 2):
        if comp[2 * v] >= 0 and comp[2 * v] == comp[2 * v + 1]:
            return v
    return -1


@njit(cache=True)
def batch_status(prob, alias, m, seeds, retry_cap):
    """Draw and decide one 2-CNF per seed: 1 SAT, 0 UNSAT, -1 retry cap hit."""
    n = prob.shape[0]
    out = np.empty(seeds.shape[0], dtype=np.int8)
    clauses = np.empty((m, 2), dtype=np.int64)
    for t in range(seeds.shape[0]):
        if draw_clauses(prob, alias, 2, seeds[t], 0, retry_cap, clauses) >= 0:
            out[t] = -1
            continue
        comp = scc_components(clauses, n)
        out[t] = 1 if first_clash(comp) < 0 else 0
    return out
