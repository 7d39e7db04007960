"""Augmenting-path max-flow / min-cut on directed graphs with float capacities.

Dinic's algorithm: BFS builds a level graph from the source, then depth-first
augmenting paths saturate it until the sink is unreachable. Capacities may be
``inf`` (used to pin nodes to a terminal). Residual capacities at or below
``eps * max_finite_capacity`` are treated as saturated.
"""
from __future__ import annotations

import math
from collections import deque


class FlowGraph:
    def __init__(self, n_nodes: int):
        self.n = n_nodes
        self.head = [-1] * n_nodes
        self.to: list[int] = []
        self.cap: list[float] = []
        self.nxt: list[int] = []
        self._max_cap = 0.0

    def add_edge(self, u: int, v: int, cap: float, rev_cap: float = 0.0) -> None:
        """Add ``u -> v`` with capacity ``cap`` (and ``v -> u`` with ``rev_cap``)."""
        if cap < 0 or rev_cap < 0:
            raise ValueError("capacities must be non-negative")
        for a, b, c in ((u, v, cap), (v, u, rev_cap)):
            self.to.append(b)
            self.cap.append(float(c))
            self.nxt.append(self.head[a])
            self.head[a] = len(self.to) - 1
            if math.isfinite(c):
                self._max_cap = max(self._max_cap, c)

    def _levels(self, s: int, t: int, tol: float) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        head, to, cap, nxt = self.head, self.to, self.cap, self.nxt
        while q:
            u = q.popleft()
            e = head[u]
            while e != -1:
                v = to[e]
                if level[v] < 0 and cap[e] > tol:
                    level[v] = level[u] + 1
                    q.append(v)
                e = nxt[e]
        return level if level[t] >= 0 else None

    def max_flow(self, s: int, t: int, eps: float = 1e-12) -> float:
        if s == t:
            raise ValueError("source and sink must differ")
        tol = eps * self._max_cap
        to, cap, nxt = self.to, self.cap, self.nxt
        total = 0.0
        while True:
            level = self._levels(s, t, tol)
            if level is None:
                return total
            it = self.head[:]
            # iterative DFS over the level graph; stack holds edge ids on the current path
            while True:
                path: list[int] = []
                u = s
                while u != t:
                    e = it[u]
                    while e != -1 and not (cap[e] > tol and level[to[e]] == level[u] + 1):
                        e = nxt[e]
                    it[u] = e
                    if e == -1:
                        if u == s:
                            break
                        level[u] = -1  # dead end
                        e_back = path.pop()
                        u = to[e_back ^ 1]
                        it[u] = nxt[it[u]]
                        continue
                    path.append(e)
                    u = to[e]
                if u != t:
                    break
                pushed = min(cap[e] for e in path)
                if math.isinf(pushed):
                    raise ValueError("infinite-capacity source-to-sink path: max flow is unbounded")
                for e in path:
                    cap[e] -= pushed
                    cap[e ^ 1] += pushed
                total += pushed

    def source_side(self, s: int, eps: float = 1e-12) -> list[bool]:
        """Nodes reachable from ``s`` in the residual graph (call after :meth:`max_flow`)."""
        tol = eps * self._max_cap
        seen = [False] * self.n
        seen[s] = True
        q = deque([s])
        while q:
            u = q.popleft()
            e = self.head[u]
            while e != -1:
                v = self.to[e]
                if not seen[v] and self.cap[e] > tol:
                    seen[v] = True
                    q.append(v)
                e = self.nxt[e]
        return seen


def min_cut(n_nodes: int, edges, s: int, t: int) -> tuple[float, list[bool]]:
    """Max-flow value and source-side membership for ``edges`` = [(u, v, cap), ...]."""
    g = FlowGraph(n_nodes)
    for u, v, c in edges:
        g.add_edge(u, v, c)
    value = g.max_flow(s, t)
    return value, g.source_side(s)
