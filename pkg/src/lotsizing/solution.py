"""A production plan together with its cost breakdown."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Solution:
    x: tuple[int, ...]
    i: tuple[int, ...]
    y: tuple[int, ...]
    cp: int
    ch: int
    cs: int
    c: int

    @classmethod
    def from_plan(cls, inst, x, y) -> "Solution":
        """Recompute inventories and costs from scratch for a given plan."""
        inv = []
        cur = 0
        for t in range(inst.T):
            cur = cur + x[t] - inst.d[t]
            inv.append(cur)
        cp = sum(inst.p[t] * x[t] for t in range(inst.T))
        ch = sum(inst.h[t] * inv[t] for t in range(inst.T))
        cs = sum(inst.s[t] for t in range(inst.T) if y[t])
        return cls(
            x=tuple(int(v) for v in x),
            i=tuple(int(v) for v in inv),
            y=tuple(int(v) for v in y),
            cp=cp,
            ch=ch,
            cs=cs,
            c=cp + ch + cs,
        )
