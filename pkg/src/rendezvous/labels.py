"""Modified labels: each binary digit doubled, then ``01`` appended.

No modified label is a prefix of another, so two agents with distinct
labels always disagree at some position before either code runs out.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ModifiedLabel:
    bits: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def modified_label(x: int) -> ModifiedLabel:
    if x < 1:
        raise ValueError(f"agent labels are positive integers, got {x}")
    bits = []
    for c in bin(x)[2:]:
        bits += [int(c), int(c)]
    return ModifiedLabel(tuple(bits + [0, 1]))


def effective_bit(m: ModifiedLabel, i: int) -> int:
    """1-based bit ``i`` of ``m``; positions past the end read as 0."""
    if i < 1:
        raise ValueError(f"bit positions start at 1, got {i}")
    return m.bits[i - 1] if i <= m.s else 0
