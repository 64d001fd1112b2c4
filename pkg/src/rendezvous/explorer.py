"""Exploration sequences and the Explo closed walk.

A sequence (x_1, ..., x_L) drives a walk: after entering a node of degree d
by port p, leave by port (p + x_i) mod d. The walk starts with p = 0 at the
start node. Explo follows the sequence forward and then backtracks along the
same edges, so it is a closed walk of 2L traversals on any graph with an
edge; the traversal count P(n) = 2 L(n).

Sequences are built greedily. ``build_uxs(2n)`` extends ``build_uxs(n)``,
so every sequence is a prefix of the next one and lengths never shrink.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from .graph import ENUMERATION_CAP, PortGraph, enumerate_port_graphs, gen_random_connected

DEFAULT_CAP = 128
SAMPLED_CHECKS = 1000
# construction samples per size above the enumeration cap
BUILD_SAMPLES = {8: 1_000_000}
BUILD_SAMPLES_DEFAULT = 10_000


class CapExceeded(LookupError):
    def __init__(self, n: int, cap: int):
        super().__init__(f"exploration size {n} exceeds provider cap {cap}")
        self.n = n
        self.cap = cap


@dataclass(frozen=True)
class Uxs:
    n: int
    steps: tuple[int, ...]

    @property
    def L(self) -> int:
        return len(self.steps)

    def to_line(self) -> str:
        return " ".join(map(str, (self.n, self.L, *self.steps)))


@dataclass(frozen=True)
class Walk:
    """Closed walk: ``hops[i] = (exit_port, arrival_node, entry_port)``."""

    start: int
    hops: tuple[tuple[int, int, int], ...]

    def nodes(self) -> list[int]:
        return [self.start] + [h[1] for h in self.hops]

    @property
    def end(self) -> int:
        return self.hops[-1][1] if self.hops else self.start


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def _forward(g: PortGraph, start: int, steps: Iterable[int]):
    """Yield (exit, node, entry) for each forward hop."""
    adj = g.adj
    w, p = start, 0
    if not adj[w]:
        return
    for x in steps:
        d = len(adj[w])
        q = (p + x) % d
        w, p = adj[w][q]
        yield q, w, p


def explo_trajectory(g: PortGraph, start: int, u: Uxs) -> Walk:
    if not 0 <= start < g.node_count:
        raise ValueError(f"start node {start} outside graph of size {g.node_count}")
    forward = list(_forward(g, start, u.steps))
    hops = list(forward)
    # backtrack: leave each node by the port the forward walk entered it
    prev_nodes = [start] + [h[1] for h in forward[:-1]]
    for (q, _, p), back_to in zip(reversed(forward), reversed(prev_nodes)):
        hops.append((p, back_to, q))
    return Walk(start, tuple(hops))


def _missing(g: PortGraph, start: int, steps) -> tuple[set[int], int, int]:
    """Nodes the forward walk misses, plus its final (node, entry port).

    Stops early once everything is seen; the position is only meaningful
    when something is missing.
    """
    n = g.node_count
    seen = {start}
    w, p = start, 0
    if n == 1:
        return set(), w, p
    for _, w, p in _forward(g, start, steps):
        seen.add(w)
        if len(seen) == n:
            return set(), w, p
    return set(range(n)) - seen, w, p


def _extend(steps: list[int], g: PortGraph, start: int) -> None:
    missing, w, p = _missing(g, start, steps)
    while missing:
        # BFS to the nearest unvisited node
        parent = {w: None}
        queue = deque([w])
        target = None
        while queue:
            x = queue.popleft()
            if x in missing:
                target = x
                break
            for q, (y, _) in enumerate(g.adj[x]):
                if y not in parent:
                    parent[y] = (x, q)
                    queue.append(y)
        path = []
        x = target
        while parent[x] is not None:
            px, q = parent[x]
            path.append((px, q))
            x = px
        for x, q in reversed(path):
            d = g.degree(x)
            steps.append((q - p) % d)
            w, p = g.adj[x][q]
            missing.discard(w)


@dataclass
class VerificationReport:
    n: int
    mode: str
    checked: int = 0
    failures: list[tuple[PortGraph, int]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        status = "pass" if self.passed else f"FAIL ({len(self.failures)} failing pairs)"
        return f"n={self.n} mode={self.mode} checked={self.checked} {status}"


def exhaustive_pairs(n: int) -> Iterator[tuple[PortGraph, int]]:
    for size in range(1, n + 1):
        for g in enumerate_port_graphs(size):
            for s in range(size):
                yield g, s


def sampled_pairs(n: int, k: int, seed: int, stream: str = "verify") -> Iterator[tuple[PortGraph, int]]:
    rng = random.Random(f"uxs-{stream}:{n}:{seed}")
    for _ in range(k):
        size = rng.randint(1, n)
        g = gen_random_connected(size, rng.randrange(2**32))
        yield g, rng.randrange(size)


def verify_uxs(u: Uxs, n: int, mode: str = "exhaustive", k: int = SAMPLED_CHECKS, seed: int = 0) -> VerificationReport:
    if mode == "exhaustive":
        pairs = exhaustive_pairs(n)
    elif mode == "sampled":
        pairs = sampled_pairs(n, k, seed)
    else:
        raise ValueError(f"unknown verification mode {mode!r}")
    report = VerificationReport(n, mode)
    for g, s in pairs:
        report.checked += 1
        if _missing(g, s, u.steps)[0]:
            report.failures.append((g, s))
    return report


def build_uxs(n: int, base: Uxs | None = None, samples: int | None = None) -> Uxs:
    """Greedy sequence for all graphs of size <= n, extending ``base``."""
    if not is_power_of_two(n):
        raise ValueError(f"exploration size must be a power of two, got {n}")
    if n == 1:
        return Uxs(1, (0,))
    if base is None:
        base = build_uxs(n // 2)
    steps = list(base.steps)
    if n <= ENUMERATION_CAP:
        pairs = exhaustive_pairs(n)
    else:
        if samples is None:
            samples = BUILD_SAMPLES.get(n, BUILD_SAMPLES_DEFAULT)
        pairs = sampled_pairs(n, samples, 0, stream="build")
    for g, s in pairs:
        _extend(steps, g, s)
    while len(steps) <= base.L:
        steps.append(0)
    return Uxs(n, tuple(steps))


def parse_table(text: str) -> dict[int, Uxs]:
    table = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        vals = [int(tok) for tok in line.split()]
        n, L, steps = vals[0], vals[1], tuple(vals[2:])
        if len(steps) != L:
            raise ValueError(f"line {lineno}: declared length {L}, found {len(steps)} steps")
        table[n] = Uxs(n, steps)
    return table


def format_table(table: dict[int, Uxs]) -> str:
    return "".join(table[n].to_line() + "\n" for n in sorted(table))


def _packaged_table() -> dict[int, Uxs]:
    try:
        text = resources.files("rendezvous").joinpath("data/uxs_table.txt").read_text()
    except FileNotFoundError:
        return {}
    return parse_table(text)


class UxsTable:
    """Lazily built table of sequences for n = 1, 2, 4, ... up to ``cap``.

    Indexing ``table[n]`` returns P(n), so the table doubles as the
    traversal-count map the algorithm's waiting times are computed from.
    """

    def __init__(self, cap: int = DEFAULT_CAP, preload: dict[int, Uxs] | None = None):
        self.cap = cap
        self._seqs: dict[int, Uxs] = {}
        if preload:
            n = 1
            while n in preload and n <= cap:
                self._seqs[n] = preload[n]
                n *= 2

    @classmethod
    def packaged(cls, cap: int = DEFAULT_CAP) -> "UxsTable":
        return cls(cap, _packaged_table())

    @classmethod
    def from_file(cls, path: str | Path, cap: int = DEFAULT_CAP) -> "UxsTable":
        return cls(cap, parse_table(Path(path).read_text()))

    def uxs(self, n: int) -> Uxs:
        if not is_power_of_two(n):
            raise ValueError(f"exploration size must be a power of two, got {n}")
        if n > self.cap:
            raise CapExceeded(n, self.cap)
        if n not in self._seqs:
            base = self.uxs(n // 2) if n > 1 else None
            self._seqs[n] = build_uxs(n, base)
        return self._seqs[n]

    def __getitem__(self, n: int) -> int:
        return 2 * self.uxs(n).L

    def __contains__(self, n: int) -> bool:
        return is_power_of_two(n) and n <= self.cap

    def sizes(self) -> list[int]:
        return sorted(self._seqs)

    def dump(self) -> str:
        return format_table(self._seqs)


_default: UxsTable | None = None


def default_table() -> UxsTable:
    global _default
    if _default is None:
        _default = UxsTable.packaged()
    return _default


def traversal_count(n: int, table: UxsTable | None = None) -> int:
    return (table or default_table())[n]
