"""
Square linear assignment.

The optimum is found with the shortest-augmenting-path form of the
Hungarian method, O(n^3), which also yields dual potentials ``u``, ``v``.
With optimal potentials a permutation is optimal exactly when every edge it
uses is tight (``cost[i, j] - u[i] - v[j] == 0``), so the lexicographically
smallest optimal permutation is the lexicographically smallest perfect
matching on the tight edges. That matching is built row by row, starting
from the Hungarian solution and rerouting it along alternating paths.
"""

import numpy as np

from discharge_scenarios.exceptions import NumericFault, ShapeMismatch

# reduced costs within this (relative) distance of zero count as tight
TIGHT_TOLERANCE = 1e-9


def _hungarian(cost):
    """Return ``(row_to_col, u, v)`` for an optimal assignment."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    # owner[j]: row (1-based) assigned to column j, 0 for none; column 0 is a sentinel
    owner = np.zeros(n + 1, dtype=int)
    way = np.zeros(n + 1, dtype=int)
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        min_slack = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            slack = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (slack < min_slack[1:])
            min_slack[1:][better] = slack[better]
            way[1:][better] = j0
            candidates = np.where(free, min_slack[1:], np.inf)
            j1 = int(np.argmin(candidates)) + 1
            delta = candidates[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            min_slack[~used] -= delta
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    row_to_col = np.empty(n, dtype=int)
    row_to_col[owner[1:] - 1] = np.arange(n)
    return row_to_col, u[1:], v[1:]


def _reroute(tight, row_to_col, col_to_row, fixed_rows, row, target):
    """
    Try to give ``target`` to ``row``. The row that holds ``target`` now must
    move, possibly displacing others, until some row takes the column
    ``row`` gives up. Only tight edges and rows not yet fixed are used.
    Applies the change and returns True on success.
    """
    released = row_to_col[row]
    start = col_to_row[target]
    visited_cols = {target}
    parent = {}
    stack = [start]
    seen_rows = {start}
    found = None
    while stack and found is None:
        r = stack.pop()
        for c in np.flatnonzero(tight[r]):
            c = int(c)
            if c in visited_cols:
                continue
            visited_cols.add(c)
            parent[c] = r
            if c == released:
                found = c
                break
            nxt = col_to_row[c]
            if nxt not in seen_rows and nxt not in fixed_rows:
                seen_rows.add(nxt)
                stack.append(nxt)
    if found is None:
        return False
    c = found
    while True:
        r = parent[c]
        previous = row_to_col[r]
        row_to_col[r] = c
        col_to_row[c] = r
        if r == start:
            break
        c = previous
    row_to_col[row] = target
    col_to_row[target] = row
    return True


def _lexicographic_tight_matching(cost, row_to_col, u, v):
    n = cost.shape[0]
    scale = max(1.0, float(np.abs(cost).max()))
    tight = (cost - u[:, None] - v[None, :]) <= TIGHT_TOLERANCE * scale
    row_to_col = row_to_col.copy()
    col_to_row = np.empty(n, dtype=int)
    col_to_row[row_to_col] = np.arange(n)
    fixed_rows = set()
    fixed_cols = np.zeros(n, dtype=bool)
    for row in range(n):
        tight[row, fixed_cols] = False
        for col in np.flatnonzero(tight[row]):
            col = int(col)
            if col == row_to_col[row]:
                break
            blocked = tight.copy()
            blocked[:, fixed_cols] = False
            blocked[row] = False
            if _reroute(blocked, row_to_col, col_to_row, fixed_rows | {row}, row, col):
                break
        fixed_rows.add(row)
        fixed_cols[row_to_col[row]] = True
    return row_to_col


def assignment_solve(cost):
    """
    Return the permutation ``perm`` (row i takes column ``perm[i]``) with
    minimal total ``cost[i, perm[i]]``; among optimal permutations the
    lexicographically smallest one.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ShapeMismatch(f"assignment needs a square cost matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise NumericFault("assignment cost matrix has non-finite entries")
    if cost.shape[0] == 0:
        return np.empty(0, dtype=int)
    row_to_col, u, v = _hungarian(cost)
    return _lexicographic_tight_matching(cost, row_to_col, u, v)


def assignment_total(cost, perm):
    cost = np.asarray(cost, dtype=float)
    return float(cost[np.arange(cost.shape[0]), perm].sum())
