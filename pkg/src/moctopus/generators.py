"""Seeded synthetic graph streams standing in for SNAP inputs."""

from __future__ import annotations

import random
from collections import deque

from .graph import Edge


def community_of(node: int, n: int) -> int:
    return node // n


def gen_community_graph(
    c: int, n: int, d: int, p_intra: float, seed: int,
    order: str = "lockstep", warmup: int = 16,
) -> list[Edge]:
    """``c`` communities of ``n`` nodes; each node gets ``d`` distinct out-neighbors.

    Node ``x`` belongs to community ``x // n``.  Each neighbor is drawn from
    the node's own community with probability ``p_intra``, otherwise
    uniformly from the rest of the graph.

    ``order`` picks the stream order of the (identical) edge set:

    ``source``
        grouped by source node, sources in id order.
    ``lockstep``
        communities are introduced one at a time until each has ``warmup``
        members, then all grow in lockstep by breadth-first discovery, one
        new node per community per round; inter-community edges follow once
        every intra edge has been emitted.  This models ingestion of
        clustered data arriving in parallel.
    """
    if c < 1 or n < 1 or d < 0:
        raise ValueError("c, n must be >= 1 and d >= 0")
    if c * n < d + 1:
        raise ValueError("not enough nodes for d distinct neighbors")
    if not 0 <= p_intra <= 1:
        raise ValueError("p_intra must lie in [0, 1]")
    if order not in ("source", "lockstep"):
        raise ValueError(f"unknown order {order!r}")
    rng = random.Random(seed)
    N = c * n
    adj: list[list[int]] = []
    for u in range(N):
        base = community_of(u, n) * n
        intra_room = n - 1
        inter_room = N - n
        chosen: dict[int, None] = {}
        n_intra = 0
        while len(chosen) < d:
            want_intra = rng.random() < p_intra
            if want_intra and n_intra >= intra_room:
                want_intra = False
            elif not want_intra and len(chosen) - n_intra >= inter_room:
                want_intra = True
            if want_intra:
                w = base + rng.randrange(n)
                if w == u:
                    continue
            else:
                w = rng.randrange(N - n)
                if w >= base:
                    w += n
            if w not in chosen:
                chosen[w] = None
                n_intra += want_intra
        adj.append(list(chosen))
    if order == "source":
        return [Edge(u, w) for u in range(N) for w in adj[u]]
    return _lockstep_order(adj, c, n, warmup)


def _lockstep_order(adj: list[list[int]], c: int, n: int, warmup: int) -> list[Edge]:
    intra = [deque(w for w in adj[u] if w // n == u // n) for u in range(len(adj))]
    cross = [Edge(u, w) for u in range(len(adj)) for w in adj[u] if w // n != u // n]
    queues = [deque([k * n]) for k in range(c)]
    seen = {k * n for k in range(c)}
    next_root = [k * n for k in range(c)]
    size = [1] * c
    stream: list[Edge] = []

    def discover(k: int) -> bool:
        """Emit intra edges of community k until one new node is reached."""
        q = queues[k]
        while True:
            while q and not intra[q[0]]:
                q.popleft()
            if not q:
                # restart from the next member no intra edge has reached
                while next_root[k] < (k + 1) * n and next_root[k] in seen:
                    next_root[k] += 1
                if next_root[k] == (k + 1) * n:
                    return False
                seen.add(next_root[k])
                q.append(next_root[k])
                size[k] += 1
                return True
            u = q[0]
            w = intra[u].popleft()
            stream.append(Edge(u, w))
            if w not in seen:
                seen.add(w)
                q.append(w)
                size[k] += 1
                return True

    for k in range(c):
        while size[k] < warmup and discover(k):
            pass
    live = list(range(c))
    while live:
        live = [k for k in live if discover(k)]
    return stream + cross


def gen_powerlaw_graph(n: int, m_per_node: int, seed: int) -> list[Edge]:
    """Preferential-attachment stream with skewed out-degrees.

    Nodes arrive in id order; node ``i`` picks ``min(m, i)`` distinct earlier
    nodes with probability proportional to (in+out degree + 1).  Each pick
    ``t`` becomes the edge ``i -> t`` or ``t -> i`` on a seeded coin flip, so
    popular nodes end up with both large in- and out-degree.
    """
    if not n > m_per_node >= 1:
        raise ValueError("need n > m_per_node >= 1")
    rng = random.Random(seed)
    # urn holds each node (degree + 1) times
    urn: list[int] = [0]
    edges = []
    for i in range(1, n):
        want = min(m_per_node, i)
        picks: dict[int, None] = {}
        while len(picks) < want:
            picks[urn[rng.randrange(len(urn))]] = None
        for t in picks:
            edges.append(Edge(i, t) if rng.random() < 0.5 else Edge(t, i))
            urn.append(t)
        urn.extend([i] * (len(picks) + 1))
    return edges


def parse_gen_spec(spec: str, seed: int) -> list[Edge]:
    """``community:c,n,d,p`` or ``powerlaw:n,m``."""
    kind, _, args = spec.partition(":")
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if kind == "community" and len(parts) == 4:
            return gen_community_graph(int(parts[0]), int(parts[1]), int(parts[2]),
                                       float(parts[3]), seed)
        if kind == "powerlaw" and len(parts) == 2:
            return gen_powerlaw_graph(int(parts[0]), int(parts[1]), seed)
    except ValueError as exc:
        raise ValueError(f"bad generator spec {spec!r}: {exc}") from None
    raise ValueError(f"bad generator spec {spec!r}; expected community:c,n,d,p or powerlaw:n,m")
