"""Minimum-cost network flow over the lot-sizing graph.

The linear relaxation of the problem is a min-cost flow on a path-shaped
network: a source feeds per-period production arcs, inventory arcs chain the
periods, and each period ships its demand to the sink. Production arc costs
amortize the setup cost over the capacity (``p_t + s_t / cap_t``), which is
what makes the relaxation valid. Restricting the cost vector gives dedicated
lower bounds for the production-cost and holding-cost variables.

When every setup decision is fixed, the remaining problem is an exact
min-cost flow with integer costs; ``complete_when_setups_fixed`` solves it
including production/inventory lower bounds via the usual bound-stripping
circulation transform.
"""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .domains import DomainStore
from .instance import Instance, StrippedInstance
from .solution import Solution


class FlowMode(enum.Enum):
    FULL = "full"
    CP_ONLY = "cp_only"
    CH_ONLY = "ch_only"
    CS_ONLY = "cs_only"


INFEASIBLE = "INFEASIBLE"
OPTIMAL = "OPTIMAL"


class MinCostFlowGraph:
    """Successive shortest paths with node potentials on a tiny graph.

    Costs must be non-negative (ints or Fractions); reverse arcs carry the
    negated cost and are handled through the potentials.
    """

    def __init__(self, n: int):
        self.n = n
        self.adj: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list = []

    def add_edge(self, u: int, v: int, cap: int, cost) -> int:
        if cost < 0:
            raise ValueError("arc costs must be non-negative")
        idx = len(self.to)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.adj[u].append(idx)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        self.adj[v].append(idx + 1)
        return idx

    def flow_on(self, arc: int) -> int:
        return self.cap[arc ^ 1]

    def solve(self, s: int, t: int, target: int):
        """Push min-cost flow from s to t up to ``target`` units.

        Returns (flow_shipped, total_cost); stops early when t becomes
        unreachable, so a short shipment signals infeasibility to the caller.
        """
        n, to, cap, cost, adj = self.n, self.to, self.cap, self.cost, self.adj
        pi = [0] * n
        flow = 0
        total = 0
        while flow < target:
            dist = [math.inf] * n
            parent_arc = [-1] * n
            dist[s] = 0
            heap = [(0, s)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for e in adj[u]:
                    if cap[e] <= 0:
                        continue
                    v = to[e]
                    nd = d + cost[e] + pi[u] - pi[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent_arc[v] = e
                        heapq.heappush(heap, (nd, v))
            if dist[t] == math.inf:
                break
            for v in range(n):
                if dist[v] != math.inf:
                    pi[v] = pi[v] + dist[v]
            push = target - flow
            v = t
            while v != s:
                e = parent_arc[v]
                push = min(push, cap[e])
                v = to[e ^ 1]
            v = t
            while v != s:
                e = parent_arc[v]
                cap[e] -= push
                cap[e ^ 1] += push
                total = total + push * cost[e]
                v = to[e ^ 1]
            flow += push
        return flow, total


@dataclass
class FlowNetwork:
    """Arc data of the relaxation network for one (possibly windowed) bound."""

    n: int
    prod_cap: list[int]
    prod_cost: list
    inv_cap: list[int]
    inv_cost: list[int]
    demand: list[int]
    const: int


@dataclass
class FlowResult:
    status: str
    prod_flow: tuple[int, ...]
    inv_flow: tuple[int, ...]
    total_cost: Fraction
    integer_lower_bound: int


def build_network(
    stripped: StrippedInstance,
    store: DomainStore,
    mode: FlowMode,
    window: tuple[int, int] | None = None,
) -> FlowNetwork:
    """Assemble the relaxation network under the current domains.

    With a ``window`` (u, v), demands and setup costs outside u..v are zeroed
    and periods beyond v are dropped: production after the window can never
    serve a demand inside it. Setup costs of periods whose Y is already fixed
    to 1 move into the constant (they are sunk), tightening the relaxation.
    """
    u, v = (0, stripped.T - 1) if window is None else window
    n = v + 1
    prod_cap, prod_cost, demand = [], [], []
    inv_cap, inv_cost = [], []
    const = 0
    for t in range(n):
        cap = min(stripped.x_cap[t], store.max(("X", t)) - stripped.x_off[t])
        y_lo = store.min(("Y", t))
        y_hi = store.max(("Y", t))
        if y_hi == 0:
            cap = 0
        in_window = u <= t <= v
        s_eff = stripped.s[t] if in_window else 0
        if y_lo == 1 and s_eff > 0:
            if mode in (FlowMode.FULL, FlowMode.CS_ONLY):
                const += s_eff
            s_eff = 0
        cap = max(cap, 0)
        if mode is FlowMode.CP_ONLY:
            cost = stripped.p[t]
        elif mode is FlowMode.CH_ONLY:
            cost = 0
        elif mode is FlowMode.CS_ONLY:
            cost = Fraction(s_eff, cap) if (cap > 0 and s_eff > 0) else 0
        else:
            cost = stripped.p[t] + (Fraction(s_eff, cap) if (cap > 0 and s_eff > 0) else 0)
        prod_cap.append(cap)
        prod_cost.append(cost)
        demand.append(stripped.d[t] if in_window else 0)
        if t < n - 1:
            icap = min(stripped.i_cap[t], store.max(("I", t)) - stripped.i_off[t])
            inv_cap.append(max(icap, 0))
            inv_cost.append(stripped.h[t] if mode in (FlowMode.FULL, FlowMode.CH_ONLY) else 0)
    return FlowNetwork(
        n=n,
        prod_cap=prod_cap,
        prod_cost=prod_cost,
        inv_cap=inv_cap,
        inv_cost=inv_cost,
        demand=demand,
        const=const,
    )


def min_cost_flow(net: FlowNetwork) -> FlowResult:
    """Solve the relaxation network exactly.

    Successive shortest paths specialize on a path network to serving each
    demand from the cheapest available source, with holding prefix sums as
    node potentials; crossing an inventory arc evicts all but its capacity's
    worth of cheapest stock, since surplus units can never pass. Only the
    multiset of used source units determines the cost, so the greedy is the
    exact optimum. Rational arithmetic throughout.
    """
    n = net.n
    # heap entries reference units[k]; lazily discarded when emptied
    cheap: list = []
    rich: list = []
    units: list[int] = []
    srcs: list[int] = []
    avail = 0
    h_prefix = 0
    total = Fraction(net.const)
    prod_flow = [0] * n
    for t in range(n):
        if net.prod_cap[t] > 0:
            k = len(units)
            key = net.prod_cost[t] - h_prefix
            units.append(net.prod_cap[t])
            srcs.append(t)
            heapq.heappush(cheap, (key, k))
            heapq.heappush(rich, (-key, k))
            avail += net.prod_cap[t]
        need = net.demand[t]
        if need > avail:
            return FlowResult(INFEASIBLE, (), (), Fraction(0), 0)
        while need > 0:
            key, k = cheap[0]
            if units[k] == 0:
                heapq.heappop(cheap)
                continue
            take = min(units[k], need)
            units[k] -= take
            need -= take
            avail -= take
            prod_flow[srcs[k]] += take
            total += take * (key + h_prefix)
        if t < n - 1:
            cap = net.inv_cap[t]
            while avail > cap:
                _, k = rich[0]
                if units[k] == 0:
                    heapq.heappop(rich)
                    continue
                drop = min(units[k], avail - cap)
                units[k] -= drop
                avail -= drop
            h_prefix += net.inv_cost[t]
    inv_flow = []
    carried = 0
    for t in range(n - 1):
        carried += prod_flow[t] - net.demand[t]
        inv_flow.append(carried)
    total = Fraction(total)
    return FlowResult(
        status=OPTIMAL,
        prod_flow=tuple(prod_flow),
        inv_flow=tuple(inv_flow),
        total_cost=total,
        integer_lower_bound=math.ceil(total),
    )


def complete_when_setups_fixed(inst: Instance, store: DomainStore) -> Solution | None:
    """Cheapest plan consistent with fully fixed setup decisions, or None.

    Solves the exact min-cost flow on the original instance with production
    arcs only where Y_t = 1; production/inventory lower bounds (from the
    instance and the current domains) go through the standard bound-stripping
    circulation reduction. Costs are integers, so the optimum is integral.
    """
    n = inst.T
    ss, tt = n + 2, n + 3
    source, sink = 0, n + 1
    g = MinCostFlowGraph(n + 4)
    excess = [0] * (n + 4)
    const = 0

    def add_bounded(a: int, b: int, lo: int, hi: int, cost) -> int:
        nonlocal const
        if lo > hi:
            return -2
        excess[b] += lo
        excess[a] -= lo
        const += lo * cost
        if hi - lo > 0:
            return g.add_edge(a, b, hi - lo, cost)
        return -1

    prod_arcs, prod_lo = [], []
    inv_arcs, inv_lo = [], []
    feasible = True
    for t in range(n):
        y = store.value(("Y", t))
        if y == 1:
            lo = max(inst.alpha_lo[t], store.min(("X", t)))
            hi = min(inst.alpha_hi[t], store.max(("X", t)))
        else:
            lo = hi = 0
            if store.min(("X", t)) > 0:
                feasible = False
        arc = add_bounded(source, 1 + t, lo, hi, inst.p[t])
        if arc == -2:
            feasible = False
            arc = -1
        prod_arcs.append(arc)
        prod_lo.append(lo)
        if inst.d[t] > 0:
            add_bounded(1 + t, sink, inst.d[t], inst.d[t], 0)
        if t < n - 1:
            lo_i = max(inst.beta_lo[t], store.min(("I", t)))
            hi_i = min(inst.beta_hi[t], store.max(("I", t)))
            arc = add_bounded(1 + t, 2 + t, lo_i, hi_i, inst.h[t])
            if arc == -2:
                feasible = False
                arc = -1
            inv_arcs.append(arc)
            inv_lo.append(lo_i)
    if not feasible:
        return None
    # Close the circulation and rebalance the present lower-bound flow.
    g.add_edge(sink, source, sum(inst.alpha_hi) + sum(inst.d) + 1, 0)
    need = 0
    for node in range(n + 2):
        if excess[node] > 0:
            g.add_edge(ss, node, excess[node], 0)
            need += excess[node]
        elif excess[node] < 0:
            g.add_edge(node, tt, -excess[node], 0)
    shipped, _cost = g.solve(ss, tt, need)
    if shipped < need:
        return None
    x = [prod_lo[t] + (g.flow_on(prod_arcs[t]) if prod_arcs[t] >= 0 else 0) for t in range(n)]
    y = [store.value(("Y", t)) for t in range(n)]
    return Solution.from_plan(inst, x, y)
