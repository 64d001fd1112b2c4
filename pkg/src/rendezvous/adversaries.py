"""Adversary strategies: edge traversal times and wakeup times.

The adversary commits to everything before the run starts. Besides seeded
random assignments there is the constant-speed construction in which each
agent crosses every edge in the same time and wakeups are staggered so
that both agents leave their start nodes at the same instant. Then neither
can reach a node occupied by the other before the slower traversal ends.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .engine import AdversaryAssignment, Scenario
from .explorer import default_table
from .graph import PortGraph, edge_id, gen_complete, gen_cycle, gen_path, gen_random_connected, parse_port_graph
from .strongrv import EXPLO, Action, strongrv_stream

FAMILIES = {
    "random": None,
    "path": gen_path,
    "cycle": gen_cycle,
    "complete": gen_complete,
}


@dataclass(frozen=True)
class StrategySpec:
    """How an assignment is produced.

    ``kind`` is one of ``fixed``, ``random``, ``delay-later`` or
    ``sec4``. Unused fields stay None.
    """

    kind: str
    seed: int | None = None
    tau_max: Fraction | None = None
    den_bound: int = 1
    t1: Fraction | None = None
    t2: Fraction | None = None
    wakeups: tuple[Fraction, Fraction] = (Fraction(0), Fraction(0))
    base: "StrategySpec | None" = None
    extra_delay: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("tau_max", "t1", "t2"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive, got {v}")
        if self.den_bound < 1:
            raise ValueError(f"den_bound must be >= 1, got {self.den_bound}")


def _rational(rng: random.Random, low_num: int, bound: Fraction, den_bound: int) -> Fraction:
    if math.floor(bound * den_bound) < low_num:
        raise ValueError(f"no rational with denominator <= {den_bound} in range (0, {bound}]")
    while True:
        q = rng.randint(1, den_bound)
        top = math.floor(bound * q)
        if top >= low_num:
            return Fraction(rng.randint(low_num, top), q)


def constant_assignment(g: PortGraph, t1, t2, wakeups=(0, 0)) -> AdversaryAssignment:
    keys = g.edge_keys()
    t1, t2 = Fraction(t1), Fraction(t2)
    return AdversaryAssignment(
        ({k: t1 for k in keys}, {k: t2 for k in keys}),
        (Fraction(wakeups[0]), Fraction(wakeups[1])),
    )


def assignment_random(
    g: PortGraph,
    seed: int,
    tau_max,
    den_bound: int,
    wakeup_max=None,
    pt: Mapping[int, int] | None = None,
) -> AdversaryAssignment:
    """Independent seeded times in (0, tau_max] with denominators <= den_bound.

    One agent (seeded choice) wakes at 0, the other at a seeded rational in
    [0, wakeup_max]; ``wakeup_max`` defaults to tau_max * P(4).
    """
    tau_max = Fraction(tau_max)
    if tau_max <= 0:
        raise ValueError(f"tau_max must be positive, got {tau_max}")
    if wakeup_max is None:
        wakeup_max = tau_max * (pt if pt is not None else default_table())[4]
    rng = random.Random(f"assign:{seed}")
    keys = g.edge_keys()
    times = tuple({k: _rational(rng, 1, tau_max, den_bound) for k in keys} for _ in (0, 1))
    later = rng.randrange(2)
    delay = _rational(rng, 0, Fraction(wakeup_max), den_bound)
    wakeup = (delay, Fraction(0)) if later == 0 else (Fraction(0), delay)
    return AdversaryAssignment(times, wakeup)


def delay_later(a: AdversaryAssignment, extra) -> AdversaryAssignment:
    """Push the later agent's wakeup back by ``extra``."""
    w = list(a.wakeup)
    later = 1 if w[0] <= w[1] else 0
    w[later] += Fraction(extra)
    return AdversaryAssignment(a.times, (w[0], w[1]))


def build_assignment(spec: StrategySpec, g: PortGraph, pt: Mapping[int, int] | None = None) -> AdversaryAssignment:
    if spec.kind == "fixed":
        return constant_assignment(g, spec.t1, spec.t2, spec.wakeups)
    if spec.kind == "random":
        return assignment_random(g, spec.seed, spec.tau_max, spec.den_bound, pt=pt)
    if spec.kind == "delay-later":
        return delay_later(build_assignment(spec.base, g, pt), spec.extra_delay)
    if spec.kind == "sec4":
        raise ValueError("constant-speed lower-bound assignments depend on the labels; use scenario_sec4")
    raise ValueError(f"unknown strategy kind {spec.kind!r}")


Algorithm = Callable[[int, Mapping[int, int]], Iterable[Action]]


def probe_first_move_delay(label: int, pt: Mapping[int, int] | None = None, algorithm: Algorithm = strongrv_stream) -> Fraction:
    """Waiting time between wakeup and the first edge traversal."""
    pt = pt if pt is not None else default_table()
    delay = Fraction(0)
    for action in algorithm(label, pt):
        if action.kind == EXPLO:
            return delay
        delay += action.duration
    return delay


def scenario_sec4(
    g: PortGraph,
    labels: tuple[int, int],
    starts: tuple[int, int],
    t1,
    t2,
    pt: Mapping[int, int] | None = None,
    algorithm: Algorithm = strongrv_stream,
) -> Scenario:
    """Constant speeds t1, t2 with wakeups aligned on the first departure."""
    t1, t2 = Fraction(t1), Fraction(t2)
    faster = 0 if t1 <= t2 else 1
    slower = 1 - faster
    beta = probe_first_move_delay(labels[faster], pt, algorithm)
    gamma = probe_first_move_delay(labels[slower], pt, algorithm)
    wake = [Fraction(0), Fraction(0)]
    if beta >= gamma:
        wake[slower] = beta - gamma
    else:
        wake[faster] = gamma - beta
    return Scenario(g, tuple(labels), tuple(starts), constant_assignment(g, t1, t2, wake))


def make_graph(family: str, n: int, seed: int) -> PortGraph:
    if family not in FAMILIES:
        raise ValueError(f"unknown graph family {family!r}; choose from {sorted(FAMILIES)}")
    if family == "random":
        return gen_random_connected(n, seed)
    return FAMILIES[family](n)


def random_scenario(
    seed: int,
    n_range: tuple[int, int] = (2, 8),
    label_max: int = 2**10,
    tau_max=16,
    den_bound: int = 8,
    family: str = "random",
    pt: Mapping[int, int] | None = None,
) -> Scenario:
    """A seeded scenario: graph, distinct labels, distinct starts, random times."""
    rng = random.Random(f"scenario:{seed}")
    lo, hi = n_range
    if family == "cycle":
        lo = max(lo, 3)
    n = rng.randint(max(lo, 2), hi)
    g = make_graph(family, n, rng.randrange(2**32))
    labels = tuple(rng.sample(range(1, label_max + 1), 2))
    starts = tuple(rng.sample(range(n), 2))
    return Scenario(g, labels, starts, assignment_random(g, rng.randrange(2**32), tau_max, den_bound, pt=pt))


# -- scenario files --------------------------------------------------------


def format_scenario(sc: Scenario) -> str:
    """Inline text form; see :func:`parse_scenario`."""
    a = sc.assignment
    lines = ["graph", sc.graph.to_text().rstrip("\n")]
    lines.append(f"{sc.labels[0]} {sc.labels[1]}")
    lines.append(f"{sc.starts[0]} {sc.starts[1]}")
    lines.append(" ".join(_q(w) for w in a.wakeup))
    for key in sc.graph.edge_keys():
        lines.append(f"{key[0]} {key[1]} {_q(a.times[0][key])} {_q(a.times[1][key])}")
    return "\n".join(lines) + "\n"


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_scenario(text: str, base_dir: Path | None = None) -> Scenario:
    """Parse a scenario file.

    The first line is ``graph`` followed by an inline graph (``n m`` and m
    edge lines), or ``graph-file PATH``. Then come ``label1 label2``,
    ``start1 start2``, ``wakeup1 wakeup2`` and one ``u v t1 t2`` line per
    edge. Times are decimal rationals such as ``3``, ``3/2`` or ``1.25``.
    ``#`` starts a comment line.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty scenario file")
    head = lines[0].split()
    if head[0] == "graph-file":
        if len(head) != 2:
            raise ValueError("expected 'graph-file PATH'")
        path = Path(head[1])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        g = parse_port_graph(path.read_text())
        rest = lines[1:]
    elif head == ["graph"]:
        n_m = lines[1].split()
        if len(n_m) != 2:
            raise ValueError("inline graph must start with 'n m'")
        m = int(n_m[1])
        g = parse_port_graph("\n".join(lines[1 : 2 + m]))
        rest = lines[2 + m :]
    else:
        raise ValueError(f"scenario must start with 'graph' or 'graph-file', got {lines[0]!r}")
    if len(rest) < 3:
        raise ValueError("missing labels, starts or wakeups line")

    def pair(line, conv):
        vals = line.split()
        if len(vals) != 2:
            raise ValueError(f"expected two values, got {line!r}")
        return conv(vals[0]), conv(vals[1])

    labels = pair(rest[0], int)
    starts = pair(rest[1], int)
    wakeup = pair(rest[2], Fraction)
    times: tuple[dict, dict] = ({}, {})
    for line in rest[3:]:
        vals = line.split()
        if len(vals) != 4:
            raise ValueError(f"edge time line must be 'u v t1 t2', got {line!r}")
        key = edge_id(int(vals[0]), int(vals[1]))
        if key in times[0]:
            raise ValueError(f"edge {key} listed twice")
        times[0][key] = Fraction(vals[2])
        times[1][key] = Fraction(vals[3])
    sc = Scenario(g, labels, starts, AdversaryAssignment(times, wakeup))
    sc.validate()
    return sc
