"""Baseline placement strategies and the exhaustive-search oracle.

Budgeted strategies (top, max, level, soar) return at most ``k`` switches
from the available set. ``allred`` and ``allblue`` are the unbudgeted
normalization extremes: the empty placement and the full available set.
"""

from __future__ import annotations

import math
from itertools import combinations

from .errors import InstanceTooLarge, NotCompleteBinary
from .reduce_sim import Placement, total_utilization
from .solver import solve
from .topology import TreeNetwork, bfs_order

STRATEGY_NAMES = ("allred", "allblue", "top", "max", "level", "soar", "brute")


def place_all_red(tree: TreeNetwork, k: int | None = None) -> Placement:
    return Placement()


def place_all_blue(tree: TreeNetwork, k: int | None = None) -> Placement:
    return Placement(v for v in tree.nodes() if tree.available[v])


def place_top(tree: TreeNetwork, k: int) -> Placement:
    """The k available switches closest to the root.

    Depth ties break by breadth-first order, which follows sibling
    insertion order. Fewer than k available switches yields all of them.
    """
    ranked = [v for v in bfs_order(tree) if tree.available[v]]
    return Placement(ranked[:max(k, 0)])


def place_max(tree: TreeNetwork, k: int) -> Placement:
    """The k available switches with the largest load; ties by ascending id."""
    ranked = sorted((v for v in tree.nodes() if tree.available[v]),
                    key=lambda v: (-tree.load[v], v))
    return Placement(ranked[:max(k, 0)])


def place_level(tree: TreeNetwork, k: int) -> Placement:
    """All available switches of one whole level of a complete binary tree.

    Picks the deepest level whose size fits the budget (level d has 2^d
    switches). k below 1 selects nothing.
    """
    _require_complete_binary(tree)
    if k < 1:
        return Placement()
    depth = min(int(math.log2(k)), tree.height)
    return Placement(v for v in tree.nodes()
                     if tree.depth[v] == depth and tree.available[v])


def _require_complete_binary(tree: TreeNetwork) -> None:
    h = tree.height
    for v in tree.nodes():
        fanout = len(tree.children[v])
        if tree.depth[v] < h and fanout != 2:
            raise NotCompleteBinary(
                f"switch {v!r} at depth {tree.depth[v]} has {fanout} "
                "children; level placement needs a complete binary tree")
        if tree.depth[v] == h and fanout != 0:
            raise NotCompleteBinary(
                f"switch {v!r} sits below the leaf level")


def brute_force(tree: TreeNetwork, k: int,
                max_subsets: int = 10_000_000) -> tuple[Placement, float]:
    """Exact minimum by enumerating every available subset of size <= k.

    Deterministic: subsets are scanned by increasing size in insertion
    order and only strict improvements are kept, so ties resolve to the
    first (smallest) subset found.
    """
    candidates = [v for v in tree.nodes() if tree.available[v]]
    kk = min(max(k, 0), len(candidates))
    count = sum(math.comb(len(candidates), size) for size in range(kk + 1))
    if count > max_subsets:
        raise InstanceTooLarge(
            f"{count} subsets exceed the enumeration guard ({max_subsets})")
    best_cost = total_utilization(tree, ())
    best: tuple = ()
    for size in range(1, kk + 1):
        for subset in combinations(candidates, size):
            cost = total_utilization(tree, subset)
            if cost < best_cost:
                best_cost = cost
                best = subset
    return Placement(best), best_cost


def _place_soar(tree: TreeNetwork, k: int) -> Placement:
    return solve(tree, k).placement


def _place_brute(tree: TreeNetwork, k: int) -> Placement:
    return brute_force(tree, k)[0]


_REGISTRY = {
    "allred": place_all_red,
    "allblue": place_all_blue,
    "top": place_top,
    "max": place_max,
    "level": place_level,
    "soar": _place_soar,
    "brute": _place_brute,
}


def place(strategy: str, tree: TreeNetwork, k: int) -> Placement:
    """Run a strategy by name; see STRATEGY_NAMES."""
    try:
        fn = _REGISTRY[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of "
                         f"{', '.join(STRATEGY_NAMES)}") from None
    return fn(tree, k)
