"""Attack graphs: edges with baseline attack probabilities, simple-path
enumeration and minimum edge cuts."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np

Node = Hashable

DEFAULT_PATH_CAP = 10_000


class GraphError(ValueError):
    pass


class PathLimitError(GraphError):
    """Raised when exhaustive path enumeration hits the cap."""


class UnreachableError(GraphError):
    pass


@dataclass(frozen=True)
class Edge:
    src: Node
    dst: Node
    p0: float
    index: int

    @property
    def offset(self) -> float:
        """-log(p0): the investment-free part of the edge exponent."""
        if not 0.0 < self.p0 <= 1.0:
            raise GraphError(f"p0 out of (0,1] on edge {self.src}->{self.dst}")
        return -float(np.log(self.p0))


@dataclass(frozen=True)
class AttackGraph:
    """Directed graph of assets with an attacker entry node.

    Construction is permissive: invariants are reported by
    :func:`bsgames.scenario.validate` rather than raised here, so that a
    malformed file can still be loaded and diagnosed.
    """

    nodes: tuple
    source: Node
    edges: tuple[Edge, ...]

    @classmethod
    def from_edges(
        cls,
        source: Node,
        edges: Iterable[tuple],
        nodes: Iterable[Node] | None = None,
    ) -> "AttackGraph":
        """Build from ``(src, dst)`` or ``(src, dst, p0)`` tuples (p0 defaults to 1)."""
        built = []
        seen_nodes: dict = {source: None}
        for i, e in enumerate(edges):
            src, dst = e[0], e[1]
            p0 = float(e[2]) if len(e) > 2 else 1.0
            built.append(Edge(src, dst, p0, i))
            seen_nodes.setdefault(src, None)
            seen_nodes.setdefault(dst, None)
        if nodes is not None:
            node_order = dict.fromkeys(nodes)
            for n in seen_nodes:
                node_order.setdefault(n, None)
        else:
            node_order = seen_nodes
        return cls(tuple(node_order), source, tuple(built))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def out_edges(self) -> dict:
        adj: dict = {n: [] for n in self.nodes}
        for e in self.edges:
            adj.setdefault(e.src, []).append(e.index)
        return adj

    @cached_property
    def offsets(self) -> np.ndarray:
        """Per-edge -log(p0), in edge-index order."""
        return np.array([e.offset for e in self.edges], dtype=float)

    def edge_index(self, src: Node, dst: Node) -> int:
        for e in self.edges:
            if e.src == src and e.dst == dst:
                return e.index
        raise KeyError((src, dst))

    def reachable(self, start: Node | None = None, removed: Iterable[int] = ()) -> set:
        start = self.source if start is None else start
        removed = set(removed)
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for i in self.out_edges.get(u, ()):
                if i in removed:
                    continue
                v = self.edges[i].dst
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen


@dataclass(frozen=True)
class PathSet:
    """Simple source->target paths, each a tuple of edge indices."""

    target: Node
    paths: tuple[tuple[int, ...], ...]
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.paths)

    def incidence(self, n_edges: int) -> np.ndarray:
        """0/1 matrix of shape (n_paths, n_edges)."""
        A = np.zeros((len(self.paths), n_edges))
        for r, p in enumerate(self.paths):
            A[r, list(p)] = 1.0
        return A

    def require_complete(self) -> None:
        if self.truncated:
            raise PathLimitError(
                f"path enumeration to {self.target!r} was truncated; "
                "raise the cap or simplify the graph"
            )


def enumerate_paths(
    graph: AttackGraph,
    target: Node,
    cap: int = DEFAULT_PATH_CAP,
    exhaustive: bool = False,
) -> PathSet:
    """All simple directed paths from the source to ``target``, up to ``cap``.

    Walks that revisit a node are never needed: every edge probability
    (true or perceived) is at most 1, so a simple sub-path dominates.
    ``target == source`` gives the single empty path.
    """
    if target not in graph.out_edges and target not in graph.nodes:
        raise GraphError(f"unknown target {target!r}")
    if cap < 1:
        raise ValueError("cap must be positive")
    if target == graph.source:
        return PathSet(target, ((),))

    paths: list[tuple[int, ...]] = []
    truncated = False
    on_path = {graph.source}
    trail: list[int] = []
    # iterative DFS over (node, position in its out-edge list)
    stack = [(graph.source, 0)]
    while stack:
        u, k = stack[-1]
        outs = graph.out_edges.get(u, ())
        if k >= len(outs):
            stack.pop()
            on_path.discard(u)
            if trail:
                trail.pop()
            continue
        stack[-1] = (u, k + 1)
        i = outs[k]
        v = graph.edges[i].dst
        if v in on_path:
            continue
        if v == target:
            if len(paths) >= cap:
                truncated = True
                break
            paths.append(tuple(trail) + (i,))
            continue
        on_path.add(v)
        trail.append(i)
        stack.append((v, 0))

    result = PathSet(target, tuple(paths), truncated)
    if exhaustive:
        result.require_complete()
    return result


def _max_flow(graph: AttackGraph, target: Node, removed: set[int]) -> int:
    """Unit-capacity max flow (BFS augmenting paths) from the source."""
    n_e = graph.n_edges
    flow = np.zeros(n_e, dtype=int)
    # residual adjacency: for each node, forward edges out and backward edges in
    in_edges: dict = {}
    for e in graph.edges:
        in_edges.setdefault(e.dst, []).append(e.index)
    value = 0
    while True:
        parent: dict = {graph.source: None}
        queue = deque([graph.source])
        while queue and target not in parent:
            u = queue.popleft()
            for i in graph.out_edges.get(u, ()):
                if i in removed or flow[i]:
                    continue
                v = graph.edges[i].dst
                if v not in parent:
                    parent[v] = (i, +1)
                    queue.append(v)
            for i in in_edges.get(u, ()):
                if i in removed or not flow[i]:
                    continue
                v = graph.edges[i].src
                if v not in parent:
                    parent[v] = (i, -1)
                    queue.append(v)
        if target not in parent:
            return value
        v = target
        while parent[v] is not None:
            i, d = parent[v]
            flow[i] += d
            v = graph.edges[i].src if d > 0 else graph.edges[i].dst
        value += 1


def min_edge_cut(graph: AttackGraph, target: Node) -> frozenset[int]:
    """Minimum-cardinality set of edges separating the source from ``target``.

    Among all minimum cuts, returns the one whose sorted edge indices are
    lexicographically smallest: an edge belongs to some minimum cut iff
    deleting it lowers the max flow by one, so edges are taken greedily
    in index order.
    """
    if target == graph.source:
        raise GraphError("target equals source; no edge cut exists")
    if target not in graph.reachable():
        raise UnreachableError(f"{target!r} is not reachable from the source")
    removed: set[int] = set()
    remaining = _max_flow(graph, target, removed)
    cut = []
    for e in graph.edges:
        if remaining == 0:
            break
        trial = removed | {e.index}
        f = _max_flow(graph, target, trial)
        if f == remaining - 1:
            removed = trial
            cut.append(e.index)
            remaining = f
    return frozenset(cut)


def edge_disjoint_path_count(graph: AttackGraph, target: Node) -> int:
    return _max_flow(graph, target, set())


def incidence_for(paths: Sequence[PathSet], n_edges: int) -> tuple[np.ndarray, np.ndarray]:
    """Stack several path sets into one incidence matrix plus a group index."""
    blocks = [ps.incidence(n_edges) for ps in paths]
    group = np.concatenate(
        [np.full(len(ps), g, dtype=int) for g, ps in enumerate(paths)]
    ) if blocks else np.zeros(0, dtype=int)
    A = np.vstack(blocks) if blocks else np.zeros((0, n_edges))
    return A, group
