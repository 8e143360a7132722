"""Primal network simplex for the dense transportation problem.

Solves  min <C, X>  s.t.  X @ 1 = supply,  X.T @ 1 = demand,  X >= 0
on the complete bipartite graph. The basis is a spanning tree over the
n + m nodes; pivots are priced with Dantzig's rule and fall back to
Bland's rule after a run of degenerate steps so ties cannot cycle.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, SolverStall

# consecutive zero-step pivots tolerated before switching to Bland's rule
_STALL_THRESHOLD = 50


def transport_simplex(
    cost: np.ndarray,
    supply: np.ndarray,
    demand: np.ndarray,
    *,
    max_iter: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Return (plan, row_duals, col_duals, pivot_count) at the optimum.

    Requires supply/demand nonnegative with equal totals (up to float
    drift, which is rescaled away). Costs may be negative.
    """
    cost = np.ascontiguousarray(cost, dtype=float)
    supply = np.asarray(supply, dtype=float).copy()
    demand = np.asarray(demand, dtype=float).copy()
    n, m = cost.shape
    if supply.shape != (n,) or demand.shape != (m,):
        raise DimensionMismatch(
            f"cost is {n}x{m} but marginals have {supply.shape}/{demand.shape}"
        )
    total_s, total_d = supply.sum(), demand.sum()
    if total_d > 0:
        demand *= total_s / total_d

    flow, adj = _greedy_basis(cost, supply, demand)

    scale = max(1.0, float(np.abs(cost).max()))
    tol = 1e-11 * scale
    if max_iter is None:
        max_iter = 1000 + 20 * (n + m) * max(n, m)

    bland = False
    stall = 0
    pivots = 0
    for _ in range(max_iter):
        u, v = _tree_duals(cost, adj, n, m)
        reduced = cost - u[:, None] - v[None, :]
        if bland:
            neg = np.argwhere(reduced < -tol)
            if neg.size == 0:
                break
            ei, ej = int(neg[0, 0]), int(neg[0, 1])
        else:
            flat = int(np.argmin(reduced))
            ei, ej = divmod(flat, m)
            if reduced[ei, ej] >= -tol:
                break

        path = _tree_path(adj, ei, n + ej, n + m)
        arcs = []
        for a, b in zip(path, path[1:]):
            arcs.append((a, b - n) if a < n else (b, a - n))
        minus = arcs[0::2]
        theta = min(flow[a] for a in minus)
        if bland:
            leaving = min(a for a in minus if flow[a] <= theta)
        else:
            leaving = next(a for a in minus if flow[a] <= theta)

        for k, a in enumerate(arcs):
            if k % 2 == 0:
                flow[a] -= theta
            else:
                flow[a] += theta
        flow[(ei, ej)] = theta
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)
        del flow[leaving]
        adj[leaving[0]].discard(n + leaving[1])
        adj[n + leaving[1]].discard(leaving[0])

        pivots += 1
        if theta <= 0.0:
            stall += 1
            if stall > _STALL_THRESHOLD:
                bland = True
        else:
            stall = 0
            bland = False
    else:
        raise SolverStall(f"no optimum within {max_iter} pivots on {n}x{m} instance")

    plan = np.zeros((n, m))
    for (i, j), f in flow.items():
        plan[i, j] = f
    u, v = _tree_duals(cost, adj, n, m)
    return plan, u, v, pivots


def _greedy_basis(cost, supply, demand):
    """Row-by-row least-cost start; returns n+m-1 basic arcs forming a
    spanning tree (degenerate zero arcs included).

    Every arc retires exactly one row or column. Depletion is judged
    against a tolerance because repeated subtraction leaves residues;
    the guards (the last column never retires while rows remain, the
    last row never retires itself) keep the count exact regardless, and
    any mass discarded by a forced retirement is residue-sized.
    """
    n, m = cost.shape
    s = supply.copy()
    d = demand.copy()
    eps = 1e-12 * max(1.0, float(s.sum()))
    col_alive = np.ones(m, dtype=bool)
    cols_left = m
    flow: dict[tuple[int, int], float] = {}
    adj: dict[int, set[int]] = {k: set() for k in range(n + m)}
    target = n + m - 1

    for i in range(n):
        last_row = i == n - 1
        while True:
            masked = np.where(col_alive, cost[i], np.inf)
            j = int(np.argmin(masked))
            a = min(s[i], d[j])
            flow[(i, j)] = a
            adj[i].add(n + j)
            adj[n + j].add(i)
            s[i] -= a
            d[j] -= a
            if len(flow) == target:
                return flow, adj
            row_done = s[i] <= eps
            col_done = d[j] <= eps
            if row_done and col_done:
                if not last_row:
                    break
                col_alive[j] = False
                cols_left -= 1
            elif col_done:
                if cols_left > 1:
                    col_alive[j] = False
                    cols_left -= 1
                else:
                    break
            else:  # row depleted, column still open
                if not last_row:
                    break
                col_alive[j] = False
                cols_left -= 1
    return flow, adj  # pragma: no cover - loop exits via the target count


def _tree_duals(cost, adj, n, m):
    """Potentials u, v with u_i + v_j = c_ij on every basic arc."""
    u = np.zeros(n)
    v = np.zeros(m)
    seen = np.zeros(n + m, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        node = stack.pop()
        for nb in adj[node]:
            if seen[nb]:
                continue
            seen[nb] = True
            if node < n:
                v[nb - n] = cost[node, nb - n] - u[node]
            else:
                u[nb] = cost[nb, node - n] - v[node - n]
            stack.append(nb)
    return u, v


def _tree_path(adj, src, dst, size):
    """Node path from src to dst through the basis tree."""
    parent = np.full(size, -1, dtype=int)
    parent[src] = src
    stack = [src]
    while stack:
        node = stack.pop()
        if node == dst:
            break
        for nb in adj[node]:
            if parent[nb] < 0:
                parent[nb] = node
                stack.append(nb)
    path = [dst]
    while path[-1] != src:
        path.append(int(parent[path[-1]]))
    path.reverse()
    return path
