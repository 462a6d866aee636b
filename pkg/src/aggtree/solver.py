"""Optimal bounded placement of aggregation switches via tree DP.

The solver runs in two passes over the switch tree:

* :func:`gather` (bottom-up) builds, for every switch ``v``, a table
  ``X_v[l, i]`` holding the minimum utilization contributed by ``v``'s
  subtree plus ``v``'s outgoing traffic charged over inverse-rate distance
  ``l``, when at most ``i`` blue switches are spent inside the subtree.
  ``l`` is the hop distance from ``v`` to its closest blue ancestor, or to
  the destination when no blue ancestor exists, so it ranges over
  ``0 .. depth(v) + 1``. Internal switches fold their children one at a
  time through intermediate tables ``Y_v^m[l, i, color]`` so the budget
  split across children is itself optimized, conditioned on ``v``'s color.

* :func:`color` (top-down) traces an optimal placement back through those
  tables: each switch turns blue exactly when the blue entry is strictly
  cheaper at its realized ``(l, i)``, re-derives the per-child budget split
  with :func:`minsplit`, and resets the barrier distance of everything
  below a blue switch.

Budgets are "at most k": surplus budget is absorbed without cost, so the
returned cost is non-increasing in ``k``. For a leaf this means a blue
entry never exceeds the red one (a zero-load leaf simply keeps red's zero
cost), which is what makes the result match exhaustive search on
instances with empty subtrees.

Tables are dense numpy arrays. Costs are float64; on unit-rate instances
every value is an exact small integer, so comparisons and the final cost
are exact. Infinity marks infeasible cells (blue with zero budget, or an
unavailable switch colored blue); it is absorbing under addition and
loses every minimum.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import IO, Literal

import numpy as np

from .errors import BudgetNegative, TableMismatch
from .reduce_sim import Placement
from .topology import TreeNetwork

INFEASIBLE = float("inf")

Color = Literal["R", "B"]


@dataclass
class NodeTables:
    """Per-switch DP state.

    ``x`` has shape ``(depth+2, k+1)``. ``y_blue``/``y_red`` hold one array
    per child, in sibling order, each shaped like ``x``; leaves keep empty
    lists. ``blue_best[l, i]`` records whether blue strictly beats red at
    that cell (ties resolve to red).
    """

    x: np.ndarray
    y_blue: list
    y_red: list
    blue_best: np.ndarray


@dataclass
class GatherTables:
    budget: int
    nodes: dict

    def cell_count(self) -> int:
        return sum(t.x.size for t in self.nodes.values())


@dataclass
class SolveStats:
    nodes_visited: int
    table_cells: int
    gather_seconds: float
    color_seconds: float


@dataclass
class SolveResult:
    placement: Placement
    cost: float
    tables: GatherTables | None
    stats: SolveStats


def gather(tree: TreeNetwork, k: int) -> GatherTables:
    """Bottom-up table-building pass.

    Leaf base case: red costs ``rho(v, l) * load``, blue costs
    ``rho(v, l)``; with budget the leaf takes the cheaper of the two.
    Internal switches start from their first child and fold the remaining
    children with the (min,+) recurrences of :func:`mincost`.
    """
    if k < 0:
        raise BudgetNegative(f"budget must be non-negative, got {k}")
    cols = k + 1
    idx = np.subtract.outer(np.arange(cols), np.arange(cols))  # i - j
    red_invalid = idx < 0    # red split allows 0 <= j <= i
    blue_invalid = idx < 1   # blue split needs j < i (one unit spent on v)
    idx_clipped = np.where(idx < 0, 0, idx)

    tables: dict = {}
    for v in tree._post_order:
        rows = tree.depth[v] + 2
        rho = tree.root_path_prefix[v]  # length == rows
        load = tree.load[v]
        avail = tree.available[v]
        children = tree.children[v]

        if not children:
            x = np.empty((rows, cols))
            blue_best = np.zeros((rows, cols), dtype=bool)
            red = rho * load
            x[:, 0] = red
            if k >= 1:
                if avail:
                    x[:, 1:] = np.minimum(rho, red)[:, None]
                    blue_best[:, 1:] = (rho < red)[:, None]
                else:
                    x[:, 1:] = red[:, None]
            tables[v] = NodeTables(x, [], [], blue_best)
            continue

        y_blue: list = []
        y_red: list = []
        for m, c in enumerate(children):
            xc = tables[c].x  # child has rows+1 rows
            if m == 0:
                yb = np.full((rows, cols), INFEASIBLE)
                if avail and k >= 1:
                    yb[:, 1:] = xc[1, :k][None, :] + rho[:, None]
                yr = xc[1:rows + 1, :] + (rho * load)[:, None]
            else:
                yb_prev, yr_prev = y_blue[-1], y_red[-1]
                if avail:
                    g = yb_prev[:, idx_clipped]
                    g[:, blue_invalid] = INFEASIBLE
                    g += xc[1, :][None, None, :]
                    yb = g.min(axis=2)
                else:
                    yb = np.full((rows, cols), INFEASIBLE)
                g = yr_prev[:, idx_clipped]
                g[:, red_invalid] = INFEASIBLE
                g += xc[1:rows + 1, :][:, None, :]
                yr = g.min(axis=2)
            y_blue.append(yb)
            y_red.append(yr)

        x = np.minimum(y_blue[-1], y_red[-1])
        blue_best = y_blue[-1] < y_red[-1]
        tables[v] = NodeTables(x, y_blue, y_red, blue_best)
    return GatherTables(budget=k, nodes=tables)


def mincost(ell: int, i: int, y_prev: np.ndarray, x_child: np.ndarray,
            color: Color) -> float:
    """Cheapest way to split budget ``i`` between the folded-so-far part
    (``y_prev``, at row ``ell``) and one more child subtree (``x_child``).

    Blue parent: the child sits right below a blue switch, so its table is
    read at distance 1, and at least one budget unit stays on the parent's
    side (``j < i``). Red parent: the child's barrier is one hop further
    than the parent's (row ``ell + 1``), and ``j`` may take everything.
    Returns infinity when no split is feasible.
    """
    if color == "B":
        if i <= 0:
            return INFEASIBLE
        js = np.arange(i)
        vals = y_prev[ell, i - js] + x_child[1, js]
    else:
        js = np.arange(i + 1)
        vals = y_prev[ell, i - js] + x_child[ell + 1, js]
    return float(vals.min())


def minsplit(ell: int, i: int, y_prev: np.ndarray, x_child: np.ndarray,
             color: Color) -> int:
    """Argmin counterpart of :func:`mincost`; ties go to the smallest j."""
    if color == "B":
        if i <= 0:
            return 0
        js = np.arange(i)
        vals = y_prev[ell, i - js] + x_child[1, js]
    else:
        js = np.arange(i + 1)
        vals = y_prev[ell, i - js] + x_child[ell + 1, js]
    return int(np.argmin(vals))


def color(tree: TreeNetwork, tables: GatherTables, k: int) -> Placement:
    """Top-down traceback of an optimal placement.

    Each switch receives ``(i, l)``: its subtree budget and its hop
    distance to the closest blue ancestor or the destination. The root
    receives ``(k, 1)``. A switch turns blue only when the blue table entry
    is strictly cheaper at ``(l, i)``; budget is then split over children
    in reverse sibling order, the first child receiving the remainder.
    """
    if tables.budget != k:
        raise TableMismatch(f"tables built for budget {tables.budget}, "
                            f"traceback requested {k}")
    if set(tables.nodes) != set(tree.nodes()):
        raise TableMismatch("tables do not cover this tree's switches")

    blue: set = set()
    stack = [(tree.root_id, k, 1)]
    while stack:
        v, i, ell = stack.pop()
        entry = tables.nodes[v]
        children = tree.children[v]
        if not children:
            if i > 0 and entry.blue_best[ell, i]:
                blue.add(v)
            continue
        is_blue = bool(entry.blue_best[ell, i])
        if is_blue:
            blue.add(v)
        child_ell = 1 if is_blue else ell + 1
        node_color: Color = "B" if is_blue else "R"
        rem = i
        for m in range(len(children) - 1, 0, -1):
            j = minsplit(ell, rem, entry.y_blue[m - 1] if is_blue
                         else entry.y_red[m - 1],
                         tables.nodes[children[m]].x, node_color)
            stack.append((children[m], j, child_ell))
            rem -= j
        first = rem - 1 if is_blue else rem
        stack.append((children[0], first, child_ell))
    return Placement(blue)


def solve(tree: TreeNetwork, k: int, keep_tables: bool = False) -> SolveResult:
    """Optimal at-most-k placement: gather, then trace back.

    The reported cost is the root table entry at distance 1 (its hop to the
    destination) and equals the simulated utilization of the returned
    placement.
    """
    t0 = time.perf_counter()
    tables = gather(tree, k)
    t1 = time.perf_counter()
    placement = color(tree, tables, k)
    t2 = time.perf_counter()
    cost = float(tables.nodes[tree.root_id].x[1, k])
    stats = SolveStats(
        nodes_visited=tree.node_count,
        table_cells=tables.cell_count(),
        gather_seconds=t1 - t0,
        color_seconds=t2 - t1,
    )
    return SolveResult(placement=placement, cost=cost,
                       tables=tables if keep_tables else None, stats=stats)


def write_table_csv(fh: IO[str], tree: TreeNetwork,
                    tables: GatherTables) -> None:
    """Dump every table cell with its winning color, for debugging."""
    writer = csv.writer(fh)
    writer.writerow(("node", "ell", "i", "x", "color"))
    for v in tree.nodes():
        entry = tables.nodes[v]
        rows, cols = entry.x.shape
        for ell in range(rows):
            for i in range(cols):
                writer.writerow((v, ell, i, repr(float(entry.x[ell, i])),
                                 "B" if entry.blue_best[ell, i] else "R"))
