"""Pure-Python color refinement (fallback for the compiled kernel)."""


def refine(colors, offsets, labs, targets):
    """Iterated 1-dimensional refinement.

    ``colors`` is any list of ints; the result is the stable refinement as
    contiguous ranks.  Neighbors of ``v`` are ``targets[offsets[v]:offsets[v+1]]``
    with arc labels ``labs``.  Ranks are ordered by (old color, sorted
    multiset of (label, neighbor color)), so the procedure commutes with
    relabeling.
    """
    n = len(colors)
    if n == 0:
        return []
    uniq = sorted(set(colors))
    if len(uniq) == n:
        rank = {c: i for i, c in enumerate(uniq)}
        return [rank[c] for c in colors]
    rank = {c: i for i, c in enumerate(uniq)}
    cur = [rank[c] for c in colors]
    ncells = len(uniq)
    while True:
        keys = []
        for v in range(n):
            lo, hi = offsets[v], offsets[v + 1]
            if lo == hi:
                keys.append((cur[v], ()))
            else:
                keys.append((cur[v], tuple(sorted([labs[e] * n + cur[targets[e]] for e in range(lo, hi)]))))
        uniq = sorted(set(keys))
        if len(uniq) == ncells:
            return cur
        rank = {k: i for i, k in enumerate(uniq)}
        cur = [rank[k] for k in keys]
        ncells = len(uniq)
        if ncells == n:
            return cur
