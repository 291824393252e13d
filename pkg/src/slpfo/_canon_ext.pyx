# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled color refinement; same results as ``_canon_py.refine``."""

from libc.stdlib cimport malloc, free, qsort

cdef long long *_keys
cdef long *_start
cdef long *_len
cdef long *_cur


cdef int _cmp(const void *pa, const void *pb) noexcept nogil:
    cdef long a = (<long *> pa)[0]
    cdef long b = (<long *> pb)[0]
    cdef long i, m
    cdef long long x, y
    if _cur[a] != _cur[b]:
        return -1 if _cur[a] < _cur[b] else 1
    m = _len[a] if _len[a] < _len[b] else _len[b]
    for i in range(m):
        x = _keys[_start[a] + i]
        y = _keys[_start[b] + i]
        if x != y:
            return -1 if x < y else 1
    if _len[a] != _len[b]:
        return -1 if _len[a] < _len[b] else 1
    return 0


cdef void _sort_run(long long *a, long lo, long hi) noexcept nogil:
    # insertion sort; neighbor lists are short
    cdef long i, j
    cdef long long t
    for i in range(lo + 1, hi):
        t = a[i]
        j = i - 1
        while j >= lo and a[j] > t:
            a[j + 1] = a[j]
            j -= 1
        a[j + 1] = t


def refine(colors, offsets, labs, targets):
    global _keys, _start, _len, _cur
    cdef long n = len(colors)
    cdef long m = len(targets)
    cdef long v, e, i, ncells, newcells, prev
    if n == 0:
        return []
    uniq = sorted(set(colors))
    rank = {c: i for i, c in enumerate(uniq)}
    if len(uniq) == n:
        return [rank[c] for c in colors]
    cdef long *cur = <long *> malloc(n * sizeof(long))
    cdef long *nxt = <long *> malloc(n * sizeof(long))
    cdef long *order = <long *> malloc(n * sizeof(long))
    cdef long *off = <long *> malloc((n + 1) * sizeof(long))
    cdef long *tg = <long *> malloc((m + 1) * sizeof(long))
    cdef long long *lb = <long long *> malloc((m + 1) * sizeof(long long))
    cdef long long *keys = <long long *> malloc((m + 1) * sizeof(long long))
    cdef long *lens = <long *> malloc(n * sizeof(long))
    try:
        for v in range(n):
            cur[v] = rank[colors[v]]
            off[v] = offsets[v]
            lens[v] = <long> offsets[v + 1] - <long> offsets[v]
        off[n] = offsets[n]
        for e in range(m):
            tg[e] = targets[e]
            lb[e] = labs[e]
        ncells = len(uniq)
        while True:
            for v in range(n):
                for e in range(off[v], off[v + 1]):
                    keys[e] = lb[e] * n + cur[tg[e]]
                _sort_run(keys, off[v], off[v + 1])
                order[v] = v
            _keys = keys
            _start = off
            _len = lens
            _cur = cur
            qsort(order, n, sizeof(long), _cmp)
            newcells = 0
            nxt[order[0]] = 0
            for i in range(1, n):
                if _cmp(&order[i - 1], &order[i]) != 0:
                    newcells += 1
                nxt[order[i]] = newcells
            newcells += 1
            if newcells == ncells:
                return [cur[v] for v in range(n)]
            for v in range(n):
                cur[v] = nxt[v]
            ncells = newcells
            if ncells == n:
                return [cur[v] for v in range(n)]
    finally:
        free(cur); free(nxt); free(order); free(off); free(tg); free(lb); free(keys); free(lens)
