"""Action stream of the rendezvous algorithm.

Phase(h), for h = 1, 2, 4, ..., consists of:

* initialization: Explo(h), then wait 4h^2 (P(1) + P(2) + ... + P(h));
* core: h blocks; block i is [wait 2hP(h), Explo(h), Explo(h)] when bit i of
  the modified label is 0 (or i is past its end), otherwise
  [Explo(h), Explo(h), wait 2hP(h)];
* end: wait hP(2h), then Explo(h).

``pt`` arguments are mappings from a power of two n to P(n), e.g. a
:class:`~rendezvous.explorer.UxsTable` or a plain dict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .labels import ModifiedLabel, effective_bit, modified_label

WAIT = "wait"
EXPLO = "explo"


class PlanHorizonError(RuntimeError):
    """The P table ran out before the stream could continue."""

    def __init__(self, h: int, missing: int):
        super().__init__(f"no traversal count for size {missing}; stream stopped at Phase({h})")
        self.h = h
        self.missing = missing


@dataclass(frozen=True)
class Action:
    kind: str
    duration: Fraction | None = None  # waits only
    size: int | None = None  # explorations only
    phase: int = 0
    section: str = ""
    block: int = 0  # core block index, 1-based
    subblocks: tuple[int, ...] = ()  # core sub-block indices within the phase, 1-based

    def __str__(self) -> str:
        what = f"Wait({self.duration})" if self.kind == WAIT else f"Explo({self.size})"
        where = f"phase={self.phase} section={self.section}"
        if self.section == "core":
            where += f" block={self.block} sub={','.join(map(str, self.subblocks))}"
        return f"{what} {where}"


@dataclass(frozen=True)
class ActionPlan:
    h: int
    actions: tuple[Action, ...]

    def core_subblocks(self) -> int:
        return sum(len(a.subblocks) for a in self.actions)

    def to_text(self) -> str:
        return "".join(str(a) + "\n" for a in self.actions)


def _p(pt: Mapping[int, int], n: int) -> int:
    return pt[n]


def wait_init(h: int, pt: Mapping[int, int]) -> Fraction:
    total, j = 0, 1
    while j <= h:
        total += _p(pt, j)
        j *= 2
    return Fraction(4 * h * h * total)


def wait_core(h: int, pt: Mapping[int, int]) -> Fraction:
    return Fraction(2 * h * _p(pt, h))


def wait_end(h: int, pt: Mapping[int, int]) -> Fraction:
    return Fraction(h * _p(pt, 2 * h))


def phase_plan(h: int, m: ModifiedLabel, pt: Mapping[int, int]) -> ActionPlan:
    acts = [
        Action(EXPLO, size=h, phase=h, section="init"),
        Action(WAIT, duration=wait_init(h, pt), phase=h, section="init"),
    ]
    w = wait_core(h, pt)
    for i in range(1, h + 1):
        first = 4 * (i - 1) + 1
        explo = [Action(EXPLO, size=h, phase=h, section="core", block=i, subblocks=(first + k,)) for k in (0, 1)]
        if effective_bit(m, i) == 0:
            wait = Action(WAIT, duration=w, phase=h, section="core", block=i, subblocks=(first, first + 1))
            explo = [
                Action(EXPLO, size=h, phase=h, section="core", block=i, subblocks=(first + k,)) for k in (2, 3)
            ]
            acts += [wait, *explo]
        else:
            wait = Action(WAIT, duration=w, phase=h, section="core", block=i, subblocks=(first + 2, first + 3))
            acts += [*explo, wait]
    acts += [
        Action(WAIT, duration=wait_end(h, pt), phase=h, section="end"),
        Action(EXPLO, size=h, phase=h, section="end"),
    ]
    return ActionPlan(h, tuple(acts))


def strongrv_stream(label: int, pt: Mapping[int, int]) -> Iterator[Action]:
    """Phase(1), Phase(2), Phase(4), ... forever.

    Stopping at a meeting is the simulator's business.
    """
    m = modified_label(label)
    h = 1
    while True:
        try:
            plan = phase_plan(h, m, pt)
        except LookupError as exc:
            missing = getattr(exc, "n", None) or (exc.args[0] if exc.args else None)
            raise PlanHorizonError(h, missing) from exc
        yield from plan.actions
        h *= 2
