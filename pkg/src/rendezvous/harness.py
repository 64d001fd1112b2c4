"""Bounds, correctness checks and batch experiments."""

from __future__ import annotations

import csv
import io
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from .adversaries import make_graph, random_scenario, scenario_sec4
from .engine import EXPLO, MeetingReport, Scenario, Trace, run_scenario
from .explorer import UxsTable, default_table, is_power_of_two


@dataclass(frozen=True)
class BoundContext:
    n: int
    ell: int  # bit length of the smaller label
    tau: Fraction
    alpha: int
    bound: Fraction  # T(4 alpha, 4 alpha)


def next_power_of_two(x) -> int:
    p = 1
    while p < x:
        p *= 2
    return p


def bound_T(x: int, y: int, pt: Mapping[int, int]) -> Fraction:
    """4xy (P(1) + P(2) + ... + P(y)) over powers of two up to y."""
    if x < 1:
        raise ValueError(f"x must be positive, got {x}")
    if not is_power_of_two(y):
        raise ValueError(f"y must be a power of two, got {y}")
    total, z = 0, 1
    while z <= y:
        total += pt[z]
        z *= 2
    return Fraction(4 * x * y * total)


def compute_alpha(sc: Scenario, pt: Mapping[int, int] | None = None) -> BoundContext:
    pt = pt if pt is not None else default_table()
    n = sc.graph.node_count
    ell = min(sc.labels).bit_length()
    tau = sc.assignment.tau
    alpha = max(2, next_power_of_two(max(n, 2 * ell + 2, tau)))
    return BoundContext(n, ell, tau, alpha, bound_T(4 * alpha, 4 * alpha, pt))


@dataclass
class CheckResult:
    passed: bool
    detail: str

    def __bool__(self):
        return self.passed


def phases_at_end(tr: Trace) -> tuple[int, int]:
    """Phase each agent was executing when the trace stops (0 = dormant)."""
    if not all(tr.blocks):
        raise ValueError("trace has no action annotations for one of the agents")
    return tuple(blocks[-1].phase for blocks in tr.blocks)


def check_theorem1(tr: Trace, rep: MeetingReport, ctx: BoundContext) -> CheckResult:
    """Meeting at a node, before either agent finishes Phase(2 alpha), within
    T(4 alpha, 4 alpha) of the earlier wakeup."""
    if not rep.met:
        return CheckResult(False, f"no meeting (status {rep.status})")
    phases = phases_at_end(tr)
    limit = 2 * ctx.alpha
    for r, h in enumerate(phases):
        if h > limit:
            return CheckResult(False, f"agent {r} was in Phase({h}) at the meeting, after Phase({limit})")
    if rep.time_since_earlier_wakeup > ctx.bound:
        return CheckResult(
            False, f"meeting after {rep.time_since_earlier_wakeup} exceeds bound {ctx.bound}"
        )
    return CheckResult(True, f"met in phases {phases[0]},{phases[1]} <= {limit}; time within bound")


@dataclass
class ClaimReport:
    reached: bool
    alpha: int
    pairs: list[tuple[int, tuple[Fraction, Fraction], tuple[Fraction, Fraction], bool]] = field(default_factory=list)

    @property
    def all_concurrent(self) -> bool:
        return self.reached and all(p[3] for p in self.pairs)

    def summary(self) -> str:
        if not self.reached:
            return f"Phase({self.alpha}) not reached"
        bad = [p[0] for p in self.pairs if not p[3]]
        if bad:
            return f"{len(self.pairs)} sub-block pairs examined; not concurrent: {bad}"
        return f"{len(self.pairs)} sub-block pairs examined; all concurrent"


def core_subblocks(tr: Trace, agent: int, h: int) -> dict[int, tuple[Fraction, Fraction]]:
    """Time span of every started core sub-block of Phase(h), clipped to the trace.

    A core wait counts as two consecutive half-length sub-blocks.
    """
    out = {}
    for b in tr.blocks[agent]:
        a = b.action
        if a is None or a.phase != h or a.section != "core":
            continue
        start = tr.t(b.start)
        if a.kind == EXPLO:
            out[a.subblocks[0]] = (start, tr.t(b.end))
            continue
        half = a.duration / 2
        end = tr.t(b.end)
        for k, y in enumerate(a.subblocks):
            s = start + k * half
            if s <= end:
                out[y] = (s, min(s + half, end))
    return out


def check_claim_concurrency(tr: Trace, ctx: BoundContext) -> ClaimReport:
    """Do the y-th core sub-blocks of Phase(alpha) of the two agents overlap?"""
    spans = [core_subblocks(tr, r, ctx.alpha) for r in (0, 1)]
    if not spans[0] or not spans[1]:
        return ClaimReport(False, ctx.alpha)
    rep = ClaimReport(True, ctx.alpha)
    for y in sorted(set(spans[0]) & set(spans[1])):
        i, j = spans[0][y], spans[1][y]
        rep.pairs.append((y, i, j, max(i[0], j[0]) <= min(i[1], j[1])))
    return rep


@dataclass
class ExperimentRow:
    scenario_id: str
    seed: int
    n: int
    labels: tuple[int, int]
    tau: Fraction
    alpha: int
    meet_time: Fraction | None  # since the earlier wakeup
    meet_since_later: Fraction | None
    bound: Fraction
    met_at_node: bool
    first_weak_meeting: Fraction | None
    phase_at_meeting: tuple[int, int]
    theorem1: bool
    status: str
    lower_bound_ok: bool | None = None  # constant-speed scenarios only

    @property
    def ratio(self) -> Fraction | None:
        return None if self.meet_time is None else self.meet_time / self.bound

    @property
    def ok(self) -> bool:
        return self.met_at_node and self.theorem1 and self.lower_bound_ok is not False


CSV_COLUMNS = [
    "scenario_id", "seed", "n", "label1", "label2", "tau", "alpha",
    "meet_time", "meet_time_approx", "meet_since_later", "bound", "bound_approx",
    "ratio", "ratio_approx", "met_at_node", "first_weak_meeting",
    "phase_at_meeting", "theorem1", "lower_bound_ok", "status",
]


def _q(x) -> str:
    if x is None:
        return ""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _approx(x) -> str:
    return "" if x is None else f"{float(x):.6g}"


def _flag(x) -> str:
    return "" if x is None else str(bool(x)).lower()


def format_csv(rows: list[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([
            r.scenario_id, r.seed, r.n, r.labels[0], r.labels[1], _q(r.tau), r.alpha,
            _q(r.meet_time), _approx(r.meet_time), _q(r.meet_since_later), _q(r.bound), _approx(r.bound),
            _q(r.ratio), _approx(r.ratio), _flag(r.met_at_node), _q(r.first_weak_meeting),
            f"{r.phase_at_meeting[0]};{r.phase_at_meeting[1]}", _flag(r.theorem1),
            _flag(r.lower_bound_ok), r.status,
        ])
    return buf.getvalue()


def evaluate(sc: Scenario, pt: UxsTable | None = None, horizon=None, scenario_id: str = "", seed: int = 0,
             lower_bound: bool = False):
    """Run one scenario and check it. Returns (row, trace, report, ctx)."""
    pt = pt if pt is not None else default_table()
    ctx = compute_alpha(sc, pt)
    if horizon is None:
        horizon = 2 * ctx.bound
    tr, rep = run_scenario(sc, pt, horizon)
    thm = check_theorem1(tr, rep, ctx) if rep.met else CheckResult(False, rep.status)
    lb = None
    if lower_bound:
        lb = rep.met and rep.time_since_later_wakeup >= ctx.tau
    row = ExperimentRow(
        scenario_id=scenario_id,
        seed=seed,
        n=ctx.n,
        labels=sc.labels,
        tau=ctx.tau,
        alpha=ctx.alpha,
        meet_time=rep.time_since_earlier_wakeup,
        meet_since_later=rep.time_since_later_wakeup,
        bound=ctx.bound,
        met_at_node=rep.met,
        first_weak_meeting=(rep.weak_meetings[0][1] - min(sc.assignment.wakeup)) if rep.weak_meetings else None,
        phase_at_meeting=rep.phase_at_meeting if rep.met else rep.reached_phase,
        theorem1=bool(thm),
        status=rep.status,
        lower_bound_ok=lb,
    )
    return row, tr, rep, ctx


# -- batch configuration -------------------------------------------------

DEFAULTS = {
    "strategy": "random",
    "family": "random",
    "n_min": "2",
    "n_max": "8",
    "label_max": "1024",
    "seeds": "0-9",
    "tau_max": "16",
    "den_bound": "8",
    "horizon": "default",
    "jobs": "1",
    "table": "",
}


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, str]:
    cfg = dict(DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        cfg[key] = value
    if cfg["strategy"] not in ("random", "sec4"):
        raise ConfigError(f"strategy must be random or sec4, got {cfg['strategy']!r}")
    try:
        parse_seeds(cfg["seeds"])
        for key in ("n_min", "n_max", "label_max", "den_bound", "jobs"):
            int(cfg[key])
        Fraction(cfg["tau_max"])
        if cfg["horizon"] != "default":
            Fraction(cfg["horizon"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def parse_seeds(spec: str) -> list[int]:
    seeds = []
    for part in spec.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            seeds += range(int(lo), int(hi) + 1)
        elif part:
            seeds.append(int(part))
    return seeds


_tables: dict[str, UxsTable] = {}


def _table_for(cfg: Mapping[str, str]) -> UxsTable:
    path = cfg.get("table", "")
    if path not in _tables:
        _tables[path] = UxsTable.from_file(path) if path else default_table()
    return _tables[path]


def sec4_scenario(seed: int, n_range=(2, 6), label_max=1024, tau_max=16, den_bound=8, family="random", pt=None) -> Scenario:
    rng = random.Random(f"sec4:{seed}")
    lo, hi = n_range
    if family == "cycle":
        lo = max(lo, 3)
    n = rng.randint(max(lo, 2), hi)
    g = make_graph(family, n, rng.randrange(2**32))
    labels = tuple(rng.sample(range(1, label_max + 1), 2))
    starts = tuple(rng.sample(range(n), 2))
    tau_max = Fraction(tau_max)
    while True:
        t1, t2 = (Fraction(rng.randint(1, int(tau_max * den_bound)), den_bound) for _ in (0, 1))
        if t1 != t2:
            break
    return scenario_sec4(g, labels, starts, t1, t2, pt)


def run_row(cfg: Mapping[str, str], seed: int) -> ExperimentRow:
    pt = _table_for(cfg)
    kwargs = dict(
        n_range=(int(cfg["n_min"]), int(cfg["n_max"])),
        label_max=int(cfg["label_max"]),
        tau_max=Fraction(cfg["tau_max"]),
        den_bound=int(cfg["den_bound"]),
        family=cfg["family"],
        pt=pt,
    )
    sec4 = cfg["strategy"] == "sec4"
    sc = sec4_scenario(seed, **kwargs) if sec4 else random_scenario(seed, **kwargs)
    horizon = None if cfg["horizon"] == "default" else Fraction(cfg["horizon"])
    row, *_ = evaluate(sc, pt, horizon, scenario_id=f"{cfg['strategy']}-{seed}", seed=seed, lower_bound=sec4)
    return row


def _run_row_args(args):
    return run_row(*args)


def run_experiment(cfg: Mapping[str, str]) -> list[ExperimentRow]:
    """One row per seed, in seed order."""
    seeds = parse_seeds(cfg["seeds"])
    jobs = int(cfg.get("jobs", "1"))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_row_args, [(dict(cfg), s) for s in seeds]))
    return [run_row(cfg, s) for s in seeds]


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())
