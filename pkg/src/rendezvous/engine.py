"""Exact event-driven simulation of two agents running the algorithm.

Time is exact. Internally every instant is an integer number of ticks of
length 1/D, where D is the least common multiple of the denominators of the
edge times and wakeups. Waiting times are integers, so every event lands on
the tick grid and all comparisons are integer comparisons.

The engine works at the granularity of actions (blocks). An exploration
always starts from the agent's initial node, so its walk and timing are
computed once per (agent, size) and reused. Meetings are found by comparing
each newly started block with the other agent's current block over their
common time window. Events are processed in time order, so the first
meeting found in this order is the earliest one.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .explorer import UxsTable, default_table, explo_trajectory
from .graph import PortGraph, edge_id
from .strongrv import EXPLO, WAIT, Action, PlanHorizonError, strongrv_stream

DORMANT = "dormant"
_INT64_SAFE = 2**62


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class AdversaryAssignment:
    """Edge traversal time per agent and edge, plus wakeup times.

    ``times[r][(u, v)]`` is the time agent r needs to cross edge {u, v}
    (canonical key, u < v). Agents are indexed 0 and 1.
    """

    times: tuple[dict[tuple[int, int], Fraction], dict[tuple[int, int], Fraction]]
    wakeup: tuple[Fraction, Fraction]

    @property
    def tau(self) -> Fraction:
        return max(max(t.values(), default=Fraction(0)) for t in self.times)

    @property
    def tau_min(self) -> Fraction:
        return min(min(t.values(), default=Fraction(0)) for t in self.times)


@dataclass(frozen=True)
class Scenario:
    graph: PortGraph
    labels: tuple[int, int]
    starts: tuple[int, int]
    assignment: AdversaryAssignment

    def validate(self) -> None:
        g = self.graph
        a, b = self.labels
        if a < 1 or b < 1:
            raise ScenarioError(f"labels must be positive, got {self.labels}")
        if a == b:
            raise ScenarioError(f"labels must differ, got {self.labels}")
        for s in self.starts:
            if not 0 <= s < g.node_count:
                raise ScenarioError(f"start node {s} outside graph of size {g.node_count}")
        if self.starts[0] == self.starts[1]:
            raise ScenarioError(f"agents must start at different nodes, got {self.starts}")
        keys = set(g.edge_keys())
        for r, times in enumerate(self.assignment.times):
            if set(times) != keys:
                raise ScenarioError(f"agent {r} edge times do not match the graph's edges")
            for key, t in times.items():
                if t <= 0:
                    raise ScenarioError(f"agent {r} time on edge {key} must be positive, got {t}")
        for r, w in enumerate(self.assignment.wakeup):
            if w < 0:
                raise ScenarioError(f"agent {r} wakeup must be non-negative, got {w}")

    @property
    def earlier(self) -> int:
        w = self.assignment.wakeup
        return 0 if w[0] <= w[1] else 1


@dataclass
class ExploProfile:
    """One agent's Explo(h) from its start node, in ticks relative to its start."""

    h: int
    nodes: list[int]  # nodes[0] is the start, nodes[i] the node after hop i
    arrivals: list[int]  # arrivals[0] == 0, arrivals[i] after hop i
    edges: list[tuple[int, int]]  # directed (from, to) of hop i+1
    by_node: dict[int, list[int]]
    codes: np.ndarray | None  # arrivals * n + node, sorted

    @property
    def duration(self) -> int:
        return self.arrivals[-1]


def _profile(g: PortGraph, start: int, h: int, times: Mapping, scale: int, table: UxsTable) -> ExploProfile:
    walk = explo_trajectory(g, start, table.uxs(h))
    nodes = [start]
    arrivals = [0]
    edges = []
    t = 0
    prev = start
    for _, node, _ in walk.hops:
        dt = times[edge_id(prev, node)] * scale
        t += dt.numerator
        edges.append((prev, node))
        nodes.append(node)
        arrivals.append(t)
        prev = node
    by_node: dict[int, list[int]] = {}
    for node, at in zip(nodes, arrivals):
        by_node.setdefault(node, []).append(at)
    n = g.node_count
    codes = None
    if (t + 1) * n < _INT64_SAFE:
        codes = np.asarray(arrivals, dtype=np.int64) * n + np.asarray(nodes, dtype=np.int64)
    return ExploProfile(h, nodes, arrivals, edges, by_node, codes)


@dataclass
class Block:
    """One executed action (or the dormant period) of one agent, in ticks."""

    agent: int
    kind: str
    start: int
    end: int
    node: int  # the agent's start node; every block begins and ends there
    action: Action | None = None

    @property
    def phase(self) -> int:
        return self.action.phase if self.action else 0


@dataclass(frozen=True)
class Segment:
    kind: str  # "node" or "edge"
    where: int | tuple[int, int]  # node id, or directed (from, to)
    start: Fraction
    end: Fraction


@dataclass(frozen=True)
class AtNode:
    node: int


@dataclass(frozen=True)
class OnEdge:
    edge: tuple[int, int]  # directed (from, to)
    fraction: Fraction  # distance covered from ``edge[0]``


@dataclass
class Trace:
    scenario: Scenario
    scale: int
    blocks: tuple[list[Block], list[Block]]
    end: int  # ticks; the trace covers [0, end]
    profiles: dict[tuple[int, int], ExploProfile]

    def t(self, ticks: int | Fraction) -> Fraction:
        return Fraction(ticks) / self.scale

    @property
    def span(self) -> Fraction:
        return self.t(self.end)

    def segments(self, agent: int) -> Iterator[Segment]:
        """Alternating node / edge segments tiling [0, end] for ``agent``."""
        for blk in self.blocks[agent]:
            if blk.kind != EXPLO:
                yield Segment("node", blk.node, self.t(blk.start), self.t(blk.end))
                continue
            prof = self.profiles[agent, blk.action.size]
            arr = prof.arrivals
            for i, (frm, to) in enumerate(prof.edges):
                dep = blk.start + arr[i]
                if dep >= blk.end:
                    break
                arrive = blk.start + arr[i + 1]
                if arrive > blk.end:
                    yield Segment("edge", (frm, to), self.t(dep), self.t(blk.end))
                    break
                yield Segment("edge", (frm, to), self.t(dep), self.t(arrive))
                yield Segment("node", to, self.t(arrive), self.t(arrive))

    def serialize(self) -> str:
        out = []
        for r in (0, 1):
            for b in self.blocks[r]:
                a = b.action
                if a is None:
                    desc = "dormant"
                else:
                    desc = f"{a.kind} h={a.phase} section={a.section}"
                    if a.section == "core":
                        desc += f" block={a.block} sub={','.join(map(str, a.subblocks))}"
                out.append(f"# {r} {desc} {_q(self.t(b.start))} {_q(self.t(b.end))}")
        for r in (0, 1):
            for s in self.segments(r):
                ident = str(s.where) if s.kind == "node" else f"{s.where[0]}>{s.where[1]}"
                out.append(f"{r} {s.kind} {ident} {_q(s.start)} {_q(s.end)}")
        return "\n".join(out) + "\n"


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass
class MeetingReport:
    met: bool
    status: str  # "met", "horizon" or "cap"
    meet_time: Fraction | None = None
    meet_node: int | None = None
    time_since_earlier_wakeup: Fraction | None = None
    time_since_later_wakeup: Fraction | None = None
    weak_meetings: list[tuple[tuple[int, int], Fraction]] = field(default_factory=list)
    phase_at_meeting: tuple[int, int] = (0, 0)
    reached_phase: tuple[int, int] = (0, 0)

    def serialize(self) -> str:
        def fmt(v):
            if v is None:
                return "none"
            if isinstance(v, Fraction):
                return _q(v)
            return str(v)

        weak = ";".join(f"{e[0]}-{e[1]}@{_q(t)}" for e, t in self.weak_meetings) or "none"
        rows = [
            ("met", str(self.met).lower()),
            ("status", self.status),
            ("meet_time", fmt(self.meet_time)),
            ("meet_node", fmt(self.meet_node)),
            ("time_since_earlier_wakeup", fmt(self.time_since_earlier_wakeup)),
            ("time_since_later_wakeup", fmt(self.time_since_later_wakeup)),
            ("phase_at_meeting", ",".join(map(str, self.phase_at_meeting))),
            ("reached_phase", ",".join(map(str, self.reached_phase))),
            ("weak_meetings", weak),
        ]
        return "".join(f"{k}={v}\n" for k, v in rows)


def _tick_scale(sc: Scenario) -> int:
    dens = [t.denominator for times in sc.assignment.times for t in times.values()]
    dens += [w.denominator for w in sc.assignment.wakeup]
    return math.lcm(*dens) if dens else 1


def _stationary_vs_explo(stay: Block, ex: Block, prof: ExploProfile, lo: int, hi: int) -> int | None:
    offs = prof.by_node.get(stay.node)
    if not offs:
        return None
    i = bisect_left(offs, lo - ex.start)
    if i < len(offs) and offs[i] <= hi - ex.start:
        return ex.start + offs[i]
    return None


def _explo_vs_explo(x: Block, px: ExploProfile, y: Block, py: ExploProfile, lo: int, hi: int, n: int):
    """Earliest common (tick, node) of two explorations inside [lo, hi]."""
    ax = px.arrivals
    ay = py.arrivals
    i0, i1 = bisect_left(ax, lo - x.start), bisect_right(ax, hi - x.start)
    j0, j1 = bisect_left(ay, lo - y.start), bisect_right(ay, hi - y.start)
    if i0 >= i1 or j0 >= j1:
        return None
    shift = y.start - x.start
    if px.codes is not None and py.codes is not None and abs(shift) * n + py.codes[-1] < _INT64_SAFE:
        cx = px.codes[i0:i1]
        cy = py.codes[j0:j1] + shift * n
        common = np.intersect1d(cx, cy, assume_unique=True)
        if not len(common):
            return None
        c = int(common[0])
        return x.start + c // n, c % n
    ys = {(ay[j] + shift, py.nodes[j]) for j in range(j0, j1)}
    for i in range(i0, i1):
        if (ax[i], px.nodes[i]) in ys:
            return x.start + ax[i], px.nodes[i]
    return None


def crossing_time(e1, s1, d1, e2, s2, d2):
    """Instant in the open overlap where two traversals of the same edge
    are at the same point, or None.

    ``e`` is the directed edge (from, to), ``s`` the departure, ``d`` the
    duration. Positions are measured from the smaller endpoint.
    """
    lo = max(s1, s2)
    hi = min(s1 + d1, s2 + d2)
    if lo >= hi:
        return None
    low_end = min(e1)

    def line(e, s, d):
        # position(t) = a + b t
        if e[0] == low_end:
            return Fraction(-s, d), Fraction(1, d)
        return 1 + Fraction(s, d), Fraction(-1, d)

    a1, b1 = line(e1, s1, d1)
    a2, b2 = line(e2, s2, d2)
    if b1 == b2:
        return Fraction(lo) if a1 == a2 else None
    t = (a2 - a1) / (b1 - b2)
    return t if lo < t < hi else None


def _weak_crossings(x: Block, px: ExploProfile, y: Block, py: ExploProfile, lo: int, hi: int):
    """Edge-interior co-locations of two explorations inside (lo, hi)."""
    found = []
    ax, ay = px.arrivals, py.arrivals
    i = max(bisect_right(ax, lo - x.start) - 1, 0)
    j = max(bisect_right(ay, lo - y.start) - 1, 0)
    nx, ny = len(px.edges), len(py.edges)
    while i < nx and j < ny:
        xs, xe = x.start + ax[i], x.start + ax[i + 1]
        ys, ye = y.start + ay[j], y.start + ay[j + 1]
        if xs >= hi or ys >= hi:
            break
        ex, ey = px.edges[i], py.edges[j]
        if xs < ye and ys < xe and edge_id(*ex) == edge_id(*ey):
            t = crossing_time(ex, xs, xe - xs, ey, ys, ye - ys)
            if t is not None:
                found.append((edge_id(*ex), t))
        if xe <= ye:
            i += 1
        else:
            j += 1
    return found


def _meeting(blk: Block, other: Block, lo: int, hi: int, profiles, n: int, weak: bool, weak_found: list):
    """Earliest (tick, node) both blocks share inside [lo, hi], or None."""
    if lo > hi:
        return None
    if blk.kind == EXPLO and other.kind == EXPLO:
        pa = profiles[blk.agent, blk.action.size]
        pb = profiles[other.agent, other.action.size]
        if weak:
            weak_found += _weak_crossings(blk, pa, other, pb, lo, hi)
        return _explo_vs_explo(blk, pa, other, pb, lo, hi, n)
    if blk.kind == EXPLO:
        at = _stationary_vs_explo(other, blk, profiles[blk.agent, blk.action.size], lo, hi)
        return None if at is None else (at, other.node)
    if other.kind == EXPLO:
        at = _stationary_vs_explo(blk, other, profiles[other.agent, other.action.size], lo, hi)
        return None if at is None else (at, blk.node)
    return (lo, blk.node) if blk.node == other.node else None


def _blocks(agent: int, sc: Scenario, pt: Mapping[int, int], scale: int, profile) -> Iterator[Block]:
    start = sc.starts[agent]
    t = (sc.assignment.wakeup[agent] * scale).numerator
    yield Block(agent, DORMANT, 0, t, start)
    for action in strongrv_stream(sc.labels[agent], pt):
        if action.kind == WAIT:
            d = action.duration * scale
            blk = Block(agent, WAIT, t, t + d.numerator, start, action)
        else:
            prof = profile(agent, action.size)
            blk = Block(agent, EXPLO, t, t + prof.duration, start, action)
        t = blk.end
        yield blk


def run_scenario(
    sc: Scenario,
    pt: UxsTable | None = None,
    horizon: Fraction | int | None = None,
    weak: bool = True,
) -> tuple[Trace, MeetingReport]:
    """Run both agents until they share a node.

    ``horizon`` is measured from the earlier wakeup; without a meeting by
    then the report has ``met=False`` and status ``"horizon"``. If the
    sequence table runs out first the status is ``"cap"``.
    """
    sc.validate()
    table = pt if pt is not None else default_table()
    scale = _tick_scale(sc)
    if horizon is not None:
        scale = math.lcm(scale, Fraction(horizon).denominator)
    g = sc.graph
    n = g.node_count
    wake = sc.assignment.wakeup
    t0 = min(wake)
    limit = None if horizon is None else int((t0 + Fraction(horizon)) * scale)
    profiles: dict[tuple[int, int], ExploProfile] = {}

    def profile(agent: int, h: int) -> ExploProfile:
        key = (agent, h)
        if key not in profiles:
            profiles[key] = _profile(g, sc.starts[agent], h, sc.assignment.times[agent], scale, table)
        return profiles[key]

    streams = [_blocks(r, sc, table, scale, profile) for r in (0, 1)]
    recorded: tuple[list[Block], list[Block]] = ([], [])
    current: list[Block | None] = [None, None]
    heap: list[tuple[int, int, int, Block]] = []
    seq = 0
    best: tuple[int, int] | None = None
    weak_found: list[tuple[tuple[int, int], Fraction]] = []

    def push(r: int) -> bool:
        nonlocal seq
        try:
            blk = next(streams[r])
        except PlanHorizonError:
            return False
        heapq.heappush(heap, (blk.start, r, seq, blk))
        seq += 1
        return True

    capped = False
    for r in (0, 1):
        push(r)
    now = 0
    while heap:
        start, r, _, blk = heapq.heappop(heap)
        if best is not None and start >= best[0]:
            break
        if limit is not None and start > limit:
            break
        now = start
        current[r] = blk
        recorded[r].append(blk)
        other = current[1 - r]
        if other is not None:
            hi = min(blk.end, other.end) if limit is None else min(blk.end, other.end, limit)
            hit = _meeting(blk, other, start, hi, profiles, n, weak, weak_found)
            if hit is not None and (best is None or hit < best):
                best = hit
        if not push(r):
            capped = True
            break

    if best is not None:
        status, end = "met", best[0]
    elif capped:
        # everything before the last processed instant has been checked
        status, end = "cap", now
    else:
        status, end = "horizon", limit
    for blocks in recorded:
        while blocks and blocks[-1].start > end:
            blocks.pop()
        if blocks and blocks[-1].end > end:
            last = blocks[-1]
            blocks[-1] = Block(last.agent, last.kind, last.start, end, last.node, last.action)

    trace = Trace(sc, scale, recorded, end, profiles)
    reached = tuple(max((b.phase for b in recorded[r]), default=0) for r in (0, 1))
    report = MeetingReport(met=best is not None, status=status, reached_phase=reached)
    if best is not None:
        meet = Fraction(best[0], scale)
        report.meet_time = meet
        report.meet_node = best[1]
        report.time_since_earlier_wakeup = meet - t0
        report.time_since_later_wakeup = meet - max(wake)
        report.phase_at_meeting = reached
        report.weak_meetings = sorted(
            ((e, t / scale) for e, t in weak_found if t < best[0]), key=lambda item: (item[1], item[0])
        )
    elif weak:
        report.weak_meetings = sorted(
            ((e, t / scale) for e, t in weak_found if t <= end), key=lambda item: (item[1], item[0])
        )
    return trace, report


def presence(tr: Trace, agent: int, time: Fraction | int) -> AtNode | OnEdge:
    """Exact location of ``agent`` at ``time``; instants at a node win."""
    time = Fraction(time)
    if time < 0 or time > tr.span:
        raise ValueError(f"time {time} outside trace span [0, {tr.span}]")
    ticks = time * tr.scale
    blocks = tr.blocks[agent]
    starts = [b.start for b in blocks]
    k = bisect_right(starts, ticks) - 1
    blk = blocks[k]
    if ticks == blk.start and k > 0:
        blk = blocks[k - 1]
    if blk.kind != EXPLO:
        return AtNode(blk.node)
    prof = tr.profiles[agent, blk.action.size]
    rel = ticks - blk.start
    i = bisect_left(prof.arrivals, rel)
    if i < len(prof.arrivals) and prof.arrivals[i] == rel:
        return AtNode(prof.nodes[i])
    dep, arr = prof.arrivals[i - 1], prof.arrivals[i]
    return OnEdge(prof.edges[i - 1], (rel - dep) / (arr - dep))


def detect_weak_meetings(tr: Trace) -> list[tuple[tuple[int, int], Fraction]]:
    """Every instant both agents are at the same interior point of an edge."""
    edges = [[s for s in tr.segments(r) if s.kind == "edge"] for r in (0, 1)]
    a, b = edges
    found = []
    i = j = 0
    while i < len(a) and j < len(b):
        x, y = a[i], b[j]
        key = edge_id(*x.where)
        if key == edge_id(*y.where):
            # a segment cut off by the trace end still moves at its full speed
            dx, dy = (tr.scenario.assignment.times[r][key] for r in (0, 1))
            t = crossing_time(x.where, x.start, dx, y.where, y.start, dy)
            if t is not None and t <= min(x.end, y.end):
                found.append((key, t))
        if x.end <= y.end:
            i += 1
        else:
            j += 1
    return found
