"""Independent brute-force oracles used only by the test suite.

Nothing here shares code with the library implementations it checks:
min-cost flow is solved by successive shortest paths on integer masses,
correlations by direct evaluation of their textbook formulas over all
pairs.
"""

from collections import deque

import numpy as np


def mcmf_transport(supplies, demands, cost) -> float:
    """Exact transport optimum for integer supplies/demands via successive
    shortest paths (Bellman-Ford labeling). Returns the total cost."""
    sup = [int(x) for x in supplies]
    dem = [int(x) for x in demands]
    assert sum(sup) == sum(dem), "oracle needs balanced integer masses"
    n, m = len(sup), len(dem)
    N = n + m + 2
    src, snk = n + m, n + m + 1
    edges = []  # [to, cap, cost, flow]
    adj = [[] for _ in range(N)]

    def add(u, v, cap, c):
        adj[u].append(len(edges))
        edges.append([v, cap, c, 0])
        adj[v].append(len(edges))
        edges.append([u, 0, -c, 0])

    for i in range(n):
        add(src, i, sup[i], 0.0)
    for j in range(m):
        add(n + j, snk, dem[j], 0.0)
    for i in range(n):
        for j in range(m):
            add(i, n + j, min(sup[i], dem[j]), float(cost[i][j]))

    total = 0.0
    while True:
        dist = [float("inf")] * N
        dist[src] = 0.0
        prev = [-1] * N
        inq = [False] * N
        q = deque([src])
        inq[src] = True
        while q:
            u = q.popleft()
            inq[u] = False
            for eid in adj[u]:
                v, cap, c, fl = edges[eid]
                if cap - fl > 0 and dist[u] + c < dist[v] - 1e-15:
                    dist[v] = dist[u] + c
                    prev[v] = eid
                    if not inq[v]:
                        q.append(v)
                        inq[v] = True
        if prev[snk] == -1:
            break
        push = float("inf")
        v = snk
        while v != src:
            eid = prev[v]
            push = min(push, edges[eid][1] - edges[eid][3])
            v = edges[eid ^ 1][0]
        v = snk
        while v != src:
            eid = prev[v]
            edges[eid][3] += push
            edges[eid ^ 1][3] -= push
            v = edges[eid ^ 1][0]
        total += push * dist[snk]
    return total


def random_feasible_plan(rng, a, b) -> np.ndarray:
    """A feasible transport plan: greedy filling over a random cell order.

    Every cell gets min(residual supply, residual demand) in turn, which
    always exhausts both sides exactly.
    """
    n, m = len(a), len(b)
    s = np.array(a, dtype=float)
    d = np.array(b, dtype=float)
    plan = np.zeros((n, m))
    order = rng.permutation(n * m)
    for flat in order:
        i, j = divmod(int(flat), m)
        f = min(s[i], d[j])
        if f > 0:
            plan[i, j] = f
            s[i] -= f
            d[j] -= f
    return plan


def pearson_direct(x, y) -> float:
    """Covariance over the product of standard deviations, spelled out."""
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / (vx**0.5 * vy**0.5)


def kendall_tau_b_pairs(x, y) -> float:
    """Tie-corrected rank correlation by enumerating all pairs."""
    n = len(x)
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            if dx == 0 and dy == 0:
                continue
            if dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif (dx > 0) == (dy > 0):
                concordant += 1
            else:
                discordant += 1
    n0 = n * (n - 1) // 2
    nx = sum(
        c * (c - 1) // 2 for c in _group_counts(x)
    )
    ny = sum(
        c * (c - 1) // 2 for c in _group_counts(y)
    )
    denom = ((n0 - nx) * (n0 - ny)) ** 0.5
    return (concordant - discordant) / denom


def _group_counts(values):
    counts = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    return counts.values()
