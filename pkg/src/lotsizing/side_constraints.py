"""Side constraints: disjunctive production levels and Q/R production gaps.

Disjunctive specs restrict each production domain to {0} union a few closed
intervals (leveled production). Q/R constraints demand at least Q and at most
R periods between consecutive production periods; they are encoded as two
sliding-window cardinality (Sequence) constraints over the setup variables
and propagated through prefix-count variables N_b = Y_0 + ... + Y_{b-1},
with the channeling N_{b+1} = N_b + Y_b and window rules as difference
bounds on the N's.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .domains import DomainStore, Status, iv_intersect, iv_normalize, merge


@dataclass(frozen=True)
class DisjunctiveSpec:
    """Allowed production intervals per period; missing periods are free.

    The resulting domain is {0} union the listed intervals (intersected with
    the instance's own production bounds when applied).
    """

    intervals: dict[int, tuple[tuple[int, int], ...]]

    @classmethod
    def uniform(cls, T: int, intervals) -> "DisjunctiveSpec":
        ivs = iv_normalize(intervals)
        return cls(intervals={t: ivs for t in range(T)})


@dataclass(frozen=True)
class QRSpec:
    Q: int
    R: int

    def validate(self) -> None:
        if not (1 <= self.Q <= self.R):
            raise ValueError(f"need 1 <= Q <= R, got Q={self.Q}, R={self.R}")


@dataclass(frozen=True)
class SideSpecs:
    disjunction: DisjunctiveSpec | None = None
    qr: QRSpec | None = None


def apply_disjunctions(store: DomainStore, spec: DisjunctiveSpec) -> Status:
    status = Status.UNCHANGED
    for t, ivs in sorted(spec.intervals.items()):
        allowed = iv_normalize(tuple(ivs) + ((0, 0),))
        new = iv_intersect(store.intervals(("X", t)), allowed)
        st = store.set_intervals(("X", t), new)
        if st is Status.FAILED:
            return Status.FAILED
        status = merge(status, st)
    return status


class SequenceSystem:
    """Sequence constraints over the Y's, all sharing one prefix-count chain.

    ``post(l, u, k)`` requires every k consecutive setup variables to sum to
    a value in [l, u]; windows are those fully inside the horizon.
    """

    def __init__(self, T: int):
        self.T = T
        self.windows: list[tuple[int, int, int]] = []
        self._installed = False

    def post(self, l: int, u: int, k: int) -> None:
        if not (0 <= l <= u <= k):
            raise ValueError(f"need 0 <= l <= u <= k, got ({l}, {u}, {k})")
        self.windows.append((l, u, k))

    def install(self, store: DomainStore) -> None:
        if self._installed:
            return
        store.add_var(("N", 0), 0, 0)
        for b in range(1, self.T + 1):
            store.add_var(("N", b), 0, b)
        self._installed = True

    def _channel(self, store: DomainStore, b: int) -> Status:
        # N_{b+1} = N_b + Y_b
        st = Status.UNCHANGED
        nl, nh = store.min(("N", b)), store.max(("N", b))
        yl, yh = store.min(("Y", b)), store.max(("Y", b))
        st = merge(st, store.set_min(("N", b + 1), nl + yl))
        st = merge(st, store.set_max(("N", b + 1), nh + yh))
        if st is Status.FAILED:
            return st
        ml, mh = store.min(("N", b + 1)), store.max(("N", b + 1))
        st = merge(st, store.set_min(("N", b), ml - yh))
        st = merge(st, store.set_max(("N", b), mh - yl))
        if st is Status.FAILED:
            return st
        nl, nh = store.min(("N", b)), store.max(("N", b))
        st = merge(st, store.set_min(("Y", b), ml - nh))
        st = merge(st, store.set_max(("Y", b), mh - nl))
        return st

    def _window(self, store: DomainStore, a: int, k: int, l: int, u: int) -> Status:
        # l <= N_{a+k} - N_a <= u
        st = Status.UNCHANGED
        al, ah = store.min(("N", a)), store.max(("N", a))
        bl, bh = store.min(("N", a + k)), store.max(("N", a + k))
        st = merge(st, store.set_min(("N", a + k), al + l))
        st = merge(st, store.set_max(("N", a + k), ah + u))
        if st is Status.FAILED:
            return st
        st = merge(st, store.set_min(("N", a), bl - u))
        st = merge(st, store.set_max(("N", a), bh - l))
        return st

    def propagate(self, store: DomainStore) -> Status:
        if not self._installed:
            self.install(store)
        overall = Status.UNCHANGED
        while True:
            before = store.mod_count
            for b in range(self.T):
                if self._channel(store, b) is Status.FAILED:
                    return Status.FAILED
            for l, u, k in self.windows:
                for a in range(0, self.T - k + 1):
                    if self._window(store, a, k, l, u) is Status.FAILED:
                        return Status.FAILED
            for b in range(self.T - 1, -1, -1):
                if self._channel(store, b) is Status.FAILED:
                    return Status.FAILED
            if store.mod_count == before:
                return overall
            overall = Status.CHANGED


def sequence_propagate(store: DomainStore, T: int, l: int, u: int, k: int) -> Status:
    """One-off propagation of a single Sequence constraint over the Y's."""
    system = SequenceSystem(T)
    system.post(l, u, k)
    if not store.has_var(("N", 0)):
        system.install(store)
    else:
        system._installed = True
    return system.propagate(store)


def post_qr(T: int, Q: int, R: int) -> SequenceSystem:
    """Both Sequence constraints of a Q/R spec on one shared count chain.

    At most one production in any Q+1 consecutive periods, at least one in
    any R+1 consecutive ones.
    """
    QRSpec(Q, R).validate()
    system = SequenceSystem(T)
    system.post(0, 1, Q + 1)
    system.post(1, R + 1, R + 1)
    return system


def qr_satisfied(y, Q: int, R: int) -> bool:
    """Direct window check of a fully instantiated setup vector."""
    T = len(y)
    for a in range(0, T - (Q + 1) + 1):
        if sum(y[a : a + Q + 1]) > 1:
            return False
    for a in range(0, T - (R + 1) + 1):
        if sum(y[a : a + R + 1]) < 1:
            return False
    return True


# ---------------------------------------------------------------------------
# Side-spec files: lines `disj t lo hi` (t 1-based) and `qr Q R`.
# ---------------------------------------------------------------------------


def write_side_specs(specs: SideSpecs, path: str | Path) -> None:
    lines = []
    if specs.disjunction is not None:
        for t in sorted(specs.disjunction.intervals):
            for lo, hi in specs.disjunction.intervals[t]:
                lines.append(f"disj {t + 1} {lo} {hi}")
    if specs.qr is not None:
        lines.append(f"qr {specs.qr.Q} {specs.qr.R}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="ascii")


def read_side_specs(path: str | Path) -> SideSpecs:
    disj: dict[int, list[tuple[int, int]]] = {}
    qr = None
    for lineno, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "disj" and len(parts) == 4:
                t, lo, hi = int(parts[1]) - 1, int(parts[2]), int(parts[3])
                disj.setdefault(t, []).append((lo, hi))
            elif parts[0] == "qr" and len(parts) == 3:
                qr = QRSpec(int(parts[1]), int(parts[2]))
                qr.validate()
            else:
                raise ValueError("unrecognized directive")
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}:{lineno}: bad side-spec line {raw!r}: {exc}") from exc
    spec_disj = (
        DisjunctiveSpec(intervals={t: iv_normalize(ivs) for t, ivs in disj.items()}) if disj else None
    )
    return SideSpecs(disjunction=spec_disj, qr=qr)
