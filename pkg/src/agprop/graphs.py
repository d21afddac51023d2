"""Synthetic graph generators for tests and benchmarks. All return
(edges, n) with deterministic output for a given seed.
"""

from .sampling import RngStream


def path_graph(n):
    return [(i, i + 1) for i in range(n - 1)], n


def star_graph(n):
    """Center 0 with n-1 leaves."""
    return [(0, i) for i in range(1, n)], n


def complete_graph(n):
    return [(u, v) for u in range(n) for v in range(u + 1, n)], n


def gnp_graph(n, p, seed):
    """Erdos-Renyi G(n, p) by per-pair coin flips (small n only)."""
    rng = RngStream(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)
             if rng.uniform() < p]
    return edges, n


def random_edges_graph(n, m, seed):
    """G(n, m): m distinct uniform non-loop pairs."""
    rng = RngStream(seed)
    seen = set()
    edges = []
    while len(edges) < m:
        u = rng.randint(n)
        v = rng.randint(n)
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            continue
        seen.add(key)
        edges.append(key)
    return edges, n


def powerlaw_graph(n, k, seed):
    """Preferential attachment: each new vertex attaches k edges to targets
    drawn from the running endpoint multiset (degree-proportional)."""
    if n <= k:
        raise ValueError("need n > k")
    rng = RngStream(seed)
    edges = [(u, v) for u in range(k) for v in range(u + 1, k)]
    endpoints = []
    for u, v in edges:
        endpoints.append(u)
        endpoints.append(v)
    if not endpoints:
        endpoints = [0]
    for u in range(k, n):
        targets = set()
        while len(targets) < k:
            t = endpoints[rng.randint(len(endpoints))]
            if t != u:
                targets.add(t)
        for t in targets:
            edges.append((u, t))
            endpoints.append(u)
            endpoints.append(t)
    return edges, n
