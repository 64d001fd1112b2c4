"""Anonymous port-labeled graphs.

Node ids are plain integers used for bookkeeping only; agent logic sees
nothing but the degree of the current node and the port it entered by.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from typing import Iterator

ENUMERATION_CAP = 4


class GraphError(ValueError):
    """Invalid graph input. ``code`` identifies the violated rule."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True, order=True)
class Edge:
    u: int
    port_u: int
    v: int
    port_v: int

    @property
    def key(self) -> tuple[int, int]:
        return edge_id(self.u, self.v)


def edge_id(a: int, b: int) -> tuple[int, int]:
    """Canonical unordered edge identifier (smaller id first)."""
    return (a, b) if a < b else (b, a)


class PortGraph:
    """Immutable simple connected undirected graph with local port numbers.

    ``adj[w][p]`` is ``(neighbor, entry_port)`` for the edge leaving ``w``
    by port ``p``.
    """

    __slots__ = ("node_count", "edges", "adj", "_edge_index")

    def __init__(self, node_count: int, edges):
        if node_count < 1:
            raise GraphError("node-count", f"node count must be positive, got {node_count}")
        edges = tuple(sorted(Edge(*e) if not isinstance(e, Edge) else e for e in edges))
        ports: list[dict[int, tuple[int, int]]] = [{} for _ in range(node_count)]
        seen: set[tuple[int, int]] = set()
        for e in edges:
            for w in (e.u, e.v):
                if not 0 <= w < node_count:
                    raise GraphError("node-range", f"edge {e.u}-{e.v} names node {w} outside [0, {node_count})")
            if e.u == e.v:
                raise GraphError("self-loop", f"self-loop at node {e.u}")
            if e.key in seen:
                raise GraphError("duplicate-edge", f"duplicate edge {e.key[0]}-{e.key[1]}")
            seen.add(e.key)
            for w, p, other, q in ((e.u, e.port_u, e.v, e.port_v), (e.v, e.port_v, e.u, e.port_u)):
                if p in ports[w]:
                    raise GraphError("port-set", f"node {w} has port {p} on more than one edge")
                ports[w][p] = (other, q)
        for w, pw in enumerate(ports):
            if sorted(pw) != list(range(len(pw))):
                raise GraphError("port-set", f"node {w} has ports {sorted(pw)}, expected 0..{len(pw) - 1}")
        self.node_count = node_count
        self.edges = edges
        self.adj = tuple(tuple(pw[p] for p in range(len(pw))) for pw in ports)
        self._edge_index = {e.key: i for i, e in enumerate(edges)}
        if not self._connected():
            raise GraphError("disconnected", f"graph on {node_count} nodes is not connected")

    def _connected(self) -> bool:
        seen = {0}
        todo = [0]
        while todo:
            w = todo.pop()
            for x, _ in self.adj[w]:
                if x not in seen:
                    seen.add(x)
                    todo.append(x)
        return len(seen) == self.node_count

    def degree(self, w: int) -> int:
        return len(self.adj[w])

    def edge_index(self, a: int, b: int) -> int:
        """Position of edge {a, b} in ``edges``."""
        return self._edge_index[edge_id(a, b)]

    def edge_keys(self) -> list[tuple[int, int]]:
        return [e.key for e in self.edges]

    def signature(self) -> tuple:
        return (self.node_count, self.edges)

    def __eq__(self, other):
        return isinstance(other, PortGraph) and self.signature() == other.signature()

    def __hash__(self):
        return hash(self.signature())

    def __repr__(self):
        return f"PortGraph(n={self.node_count}, m={len(self.edges)})"

    def to_text(self) -> str:
        lines = [f"{self.node_count} {len(self.edges)}"]
        lines += [f"{e.u} {e.port_u} {e.v} {e.port_v}" for e in self.edges]
        return "\n".join(lines) + "\n"


def traverse(g: PortGraph, at: int, out_port: int) -> tuple[int, int]:
    """Follow port ``out_port`` from ``at``; return (arrival node, entry port)."""
    if not 0 <= out_port < g.degree(at):
        raise GraphError("port-range", f"port {out_port} out of range at node {at} (degree {g.degree(at)})")
    return g.adj[at][out_port]


def parse_port_graph(text: str) -> PortGraph:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append((lineno, [int(tok) for tok in line.split()]))
        except ValueError:
            raise GraphError("malformed", f"line {lineno}: non-integer token in {line!r}") from None
    if not rows:
        raise GraphError("malformed", "empty graph text")
    lineno, header = rows[0]
    if len(header) != 2:
        raise GraphError("malformed", f"line {lineno}: header must be 'n m'")
    n, m = header
    if len(rows) - 1 != m:
        raise GraphError("malformed", f"header announces {m} edges, found {len(rows) - 1}")
    edges = []
    for lineno, vals in rows[1:]:
        if len(vals) != 4:
            raise GraphError("malformed", f"line {lineno}: edge line must be 'u port_u v port_v'")
        edges.append(Edge(*vals))
    return PortGraph(n, edges)


def gen_path(n: int) -> PortGraph:
    if n < 1:
        raise GraphError("size", f"path needs n >= 1, got {n}")
    # node i > 0 reaches i-1 by port 0; internal nodes reach i+1 by port 1
    edges = [Edge(i, 0 if i == 0 else 1, i + 1, 0) for i in range(n - 1)]
    return PortGraph(n, edges)


def gen_cycle(n: int) -> PortGraph:
    if n < 3:
        raise GraphError("size", f"cycle needs n >= 3, got {n}")
    # port 0 toward i-1, port 1 toward i+1
    edges = [Edge(i, 1, (i + 1) % n, 0) for i in range(n)]
    return PortGraph(n, edges)


def gen_complete(n: int) -> PortGraph:
    if n < 1:
        raise GraphError("size", f"complete graph needs n >= 1, got {n}")

    def port(a, b):
        return b if b < a else b - 1

    edges = [Edge(a, port(a, b), b, port(b, a)) for a, b in itertools.combinations(range(n), 2)]
    return PortGraph(n, edges)


def _random_tree(n: int, rng: random.Random) -> list[tuple[int, int]]:
    # Prüfer decoding gives a uniform labeled spanning tree of K_n
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    tree = []
    for x in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        tree.append(edge_id(leaf, x))
        degree[leaf] -= 1
        degree[x] -= 1
    u, v = [i for i in range(n) if degree[i] == 1]
    tree.append(edge_id(u, v))
    return tree


def _assign_ports(n: int, pairs, rng: random.Random) -> PortGraph:
    incident: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for a, b in pairs:
        incident[a].append((a, b))
        incident[b].append((a, b))
    port_of: dict[tuple[int, tuple[int, int]], int] = {}
    for w in range(n):
        order = list(range(len(incident[w])))
        rng.shuffle(order)
        for p, key in zip(order, incident[w]):
            port_of[w, key] = p
    return PortGraph(n, [Edge(a, port_of[a, (a, b)], b, port_of[b, (a, b)]) for a, b in pairs])


def gen_random_connected(n: int, seed: int) -> PortGraph:
    """Random connected graph: uniform spanning tree, each other edge with
    probability 1/2, ports shuffled per node. Deterministic in (n, seed)."""
    if n < 1:
        raise GraphError("size", f"need n >= 1, got {n}")
    rng = random.Random(f"graph:{n}:{seed}")
    tree = _random_tree(n, rng)
    chosen = set(tree)
    for pair in itertools.combinations(range(n), 2):
        if pair not in chosen and rng.random() < 0.5:
            chosen.add(pair)
    return _assign_ports(n, sorted(chosen), rng)


def _connected_edge_sets(n: int) -> Iterator[list[tuple[int, int]]]:
    pairs = list(itertools.combinations(range(n), 2))
    for mask in range(1 << len(pairs)):
        chosen = [p for i, p in enumerate(pairs) if mask >> i & 1]
        if len(chosen) < n - 1:
            continue
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for a, b in chosen:
            nbrs[a].append(b)
            nbrs[b].append(a)
        seen = {0}
        queue = deque([0])
        while queue:
            w = queue.popleft()
            for x in nbrs[w]:
                if x not in seen:
                    seen.add(x)
                    queue.append(x)
        if len(seen) == n:
            yield chosen


def enumerate_port_graphs(n: int, cap: int = ENUMERATION_CAP) -> Iterator[PortGraph]:
    """Every connected simple graph on nodes 0..n-1 under every port numbering."""
    if n > cap:
        raise GraphError("enumeration-cap", f"n={n} exceeds enumeration cap {cap}; use sampling")
    if n < 1:
        raise GraphError("size", f"need n >= 1, got {n}")
    for chosen in _connected_edge_sets(n):
        incident: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for key in chosen:
            incident[key[0]].append(key)
            incident[key[1]].append(key)
        per_node = [list(itertools.permutations(range(len(inc)))) for inc in incident]
        for numbering in itertools.product(*per_node):
            port_of = {}
            for w in range(n):
                for p, key in zip(numbering[w], incident[w]):
                    port_of[w, key] = p
            yield PortGraph(n, [Edge(a, port_of[a, (a, b)], b, port_of[b, (a, b)]) for a, b in chosen])
