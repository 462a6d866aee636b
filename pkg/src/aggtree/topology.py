"""Weighted rooted tree networks.

A :class:`TreeNetwork` is the switch tree of a datacenter-style reduce
fabric: every switch has one uplink edge towards its parent, the root's
uplink reaches the (implicit) destination host, each edge carries a
positive rate (messages/second), and each switch is annotated with the
number of directly attached servers (its load) and an availability flag
saying whether it may be selected as an aggregation point.

The destination is not represented as a node; it is the far endpoint of
the root's uplink, so the edge set is exactly {(v, parent(v)) for all
switches v}, keyed here by the child endpoint ``v``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping

import numpy as np

from .errors import (
    CycleDetected,
    DisconnectedNode,
    DuplicateParent,
    NonPositiveRate,
    OutOfRangeDistance,
    TopologyError,
    UnknownRoot,
)

NodeId = Hashable

_NODE_KEYS = {"id", "parent", "rate", "load", "available"}


@dataclass(frozen=True)
class TreeMetrics:
    """Shape summary of a tree: height, leaves, per-level node counts."""

    height: int
    leaf_ids: tuple
    level_sizes: tuple


class TreeNetwork:
    """Immutable rooted switch tree with rates, loads and availability.

    Construct via :func:`build_tree` or :func:`from_json_dict`; the class
    validates the structure once and precomputes depths, per-edge inverse
    rates and per-node prefix sums of inverse rates along the path to the
    destination. Instances are safe for concurrent read-only use.
    """

    __slots__ = (
        "node_count", "root_id", "parent", "children", "rate", "inv_rate",
        "load", "available", "depth", "root_path_prefix",
        "_ids", "_index", "_post_order", "_pre_order", "_height",
    )

    def __init__(self, edges, root, loads=None, available=None):
        ids, parent, rate = _validate_edges(edges, root)
        self.root_id = root
        self.node_count = len(ids)
        self._ids = tuple(ids)
        self._index = {v: i for i, v in enumerate(ids)}
        self.parent = parent
        self.rate = rate
        self.inv_rate = {v: 1.0 / r for v, r in rate.items()}

        children: dict = {v: [] for v in ids}
        for v in ids:  # edge-insertion order fixes the sibling order
            p = parent[v]
            if p is not None:
                children[p].append(v)
        self.children = {v: tuple(cs) for v, cs in children.items()}

        self.depth = _depths(ids, parent, root)
        self.load = _annotation(ids, loads, default=0, name="load")
        self.available = _annotation(ids, available, default=True,
                                     name="available")
        for v, l in self.load.items():
            if l < 0 or int(l) != l:
                raise TopologyError(f"load of {v!r} must be a non-negative "
                                    f"integer, got {l!r}")
            self.load[v] = int(l)
        for v, flag in self.available.items():
            self.available[v] = bool(flag)

        # prefix[v][l] = sum of inverse rates over the first l edges above v;
        # index depth(v)+1 reaches the destination.
        prefix = {}
        for v in ids:
            acc = [0.0]
            cur = v
            while cur is not None:
                acc.append(acc[-1] + self.inv_rate[cur])
                cur = parent[cur]
            prefix[v] = np.asarray(acc)
        self.root_path_prefix = prefix

        self._post_order, self._pre_order = _orders(root, self.children)
        self._height = max(self.depth.values())

    # -- queries --------------------------------------------------------------

    def nodes(self) -> tuple:
        """Switch ids in edge-insertion order."""
        return self._ids

    def is_leaf(self, v) -> bool:
        return not self.children[v]

    def rho_to_ancestor(self, v, distance: int) -> float:
        """Total inverse rate over the first ``distance`` edges above ``v``.

        ``distance`` may range from 0 (returns 0.0) to ``depth(v) + 1``,
        which reaches the destination. O(1) via precomputed prefix sums.
        """
        prefix = self.root_path_prefix[v]
        if not 0 <= distance < len(prefix):
            raise OutOfRangeDistance(
                f"distance {distance} out of range [0, {len(prefix) - 1}] "
                f"for switch {v!r}")
        return float(prefix[distance])

    def metrics(self) -> TreeMetrics:
        sizes = [0] * (self._height + 1)
        for v in self._ids:
            sizes[self.depth[v]] += 1
        leaves = tuple(v for v in self._ids if not self.children[v])
        return TreeMetrics(self._height, leaves, tuple(sizes))

    @property
    def height(self) -> int:
        return self._height

    # -- derived copies -------------------------------------------------------

    def with_loads(self, loads: Mapping) -> "TreeNetwork":
        """Same topology with a fresh load assignment (missing ids -> 0)."""
        return TreeNetwork(self._edge_list(), self.root_id,
                           loads=dict(loads), available=dict(self.available))

    def with_availability(self, available: Mapping) -> "TreeNetwork":
        """Same topology with a fresh availability assignment."""
        merged = dict(self.available)
        for v, flag in available.items():
            if v not in self._index:
                raise TopologyError(f"unknown switch {v!r} in availability")
            merged[v] = bool(flag)
        return TreeNetwork(self._edge_list(), self.root_id,
                           loads=dict(self.load), available=merged)

    def _edge_list(self):
        return [(v, self.parent[v], self.rate[v]) for v in self._ids]

    # -- serialization ----------------------------------------------------

    def to_json_dict(self) -> dict:
        nodes = []
        for v in self._ids:
            entry = {"id": v, "rate": self.rate[v], "load": self.load[v],
                     "available": self.available[v]}
            if self.parent[v] is not None:
                entry["parent"] = self.parent[v]
            nodes.append(entry)
        return {"root": self.root_id, "nodes": nodes}

    def __eq__(self, other):
        if not isinstance(other, TreeNetwork):
            return NotImplemented
        return (self.root_id == other.root_id
                and self._ids == other._ids
                and self.parent == other.parent
                and self.rate == other.rate
                and self.load == other.load
                and self.available == other.available
                and self.children == other.children)

    def __repr__(self):
        return (f"TreeNetwork(n={self.node_count}, root={self.root_id!r}, "
                f"height={self._height})")


# -- construction ------------------------------------------------------------

def build_tree(edges: Iterable[tuple], root,
               loads: Mapping | None = None,
               available: Mapping | None = None) -> TreeNetwork:
    """Build and validate a TreeNetwork.

    ``edges`` lists every switch exactly once as ``(child, parent, rate)``;
    the root's entry uses ``parent=None``, standing for the destination, and
    its rate is the rate of the root-to-destination link. Sibling order is
    the order child edges appear in ``edges``.
    """
    return TreeNetwork(list(edges), root, loads=loads, available=available)


def _validate_edges(edges, root):
    if not edges:
        raise TopologyError("edge list is empty")
    parent: dict = {}
    rate: dict = {}
    ids: list = []
    for entry in edges:
        try:
            child, par, r = entry
        except (TypeError, ValueError):
            raise TopologyError(f"edge entry {entry!r} is not "
                                "(child, parent, rate)") from None
        if child in parent:
            raise DuplicateParent(f"switch {child!r} listed twice")
        if r is None or not r > 0:
            raise NonPositiveRate(f"edge ({child!r}, {par!r}) has "
                                  f"non-positive rate {r!r}")
        parent[child] = par
        rate[child] = float(r)
        ids.append(child)

    if root not in parent:
        raise UnknownRoot(f"declared root {root!r} does not appear in edges")
    if parent[root] is not None:
        raise UnknownRoot(f"root {root!r} must attach to the destination "
                          "(parent=None)")
    for v, p in parent.items():
        if p is None and v != root:
            raise DisconnectedNode(f"switch {v!r} attaches to the destination "
                                   "but is not the declared root")
        if p is not None and p not in parent:
            raise DisconnectedNode(f"switch {v!r} names unknown parent {p!r}")

    # Walk every node towards the root; a revisit inside the current walk
    # means a parent cycle, and every walk must terminate at the root.
    state = {v: 0 for v in ids}  # 0 unvisited, 1 on path, 2 done
    for v in ids:
        path = []
        cur = v
        while state[cur] == 0:
            state[cur] = 1
            path.append(cur)
            nxt = parent[cur]
            if nxt is None:
                break
            cur = nxt
        if state[cur] == 1 and parent[cur] is not None:
            raise CycleDetected(f"cycle through switch {cur!r}")
        for u in path:
            state[u] = 2
    return ids, parent, rate


def _depths(ids, parent, root):
    depth = {root: 0}
    for v in ids:
        path = []
        cur = v
        while cur not in depth:
            path.append(cur)
            cur = parent[cur]
        d = depth[cur]
        for u in reversed(path):
            d += 1
            depth[u] = d
    return depth


def _annotation(ids, mapping, default, name):
    out = {v: default for v in ids}
    if mapping is None:
        return out
    for v, value in mapping.items():
        if v not in out:
            raise TopologyError(f"unknown switch {v!r} in {name} mapping")
        out[v] = value
    return out


def _orders(root, children):
    pre = []
    post = []
    stack = [(root, False)]
    while stack:
        v, expanded = stack.pop()
        if expanded:
            post.append(v)
            continue
        pre.append(v)
        stack.append((v, True))
        for c in reversed(children[v]):
            stack.append((c, False))
    return tuple(post), tuple(pre)


def traversal_orders(tree: TreeNetwork) -> tuple[tuple, tuple]:
    """(post_order, pre_order) over switch ids.

    Post-order visits all children before their parent; pre-order is the
    reverse property. Sibling order follows edge insertion order.
    """
    return tree._post_order, tree._pre_order


# -- JSON topology format ------------------------------------------------------

def from_json_dict(doc: dict) -> TreeNetwork:
    """Parse the topology JSON format.

    ``{"root": id, "nodes": [{"id", "parent"?, "rate", "load"?,
    "available"?}, ...]}`` -- a node without "parent" is the root and its
    "rate" is the root-to-destination link rate. Unknown keys are rejected.
    """
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be a JSON object")
    extra = set(doc) - {"root", "nodes"}
    if extra:
        raise TopologyError(f"unknown top-level keys: {sorted(extra)}")
    if "root" not in doc or "nodes" not in doc:
        raise TopologyError('topology document needs "root" and "nodes"')
    edges = []
    loads = {}
    avail = {}
    for entry in doc["nodes"]:
        if not isinstance(entry, dict):
            raise TopologyError(f"node entry {entry!r} is not an object")
        extra = set(entry) - _NODE_KEYS
        if extra:
            raise TopologyError(f"node {entry.get('id')!r} has unknown keys: "
                                f"{sorted(extra)}")
        if "id" not in entry:
            raise TopologyError(f"node entry {entry!r} lacks an id")
        if "rate" not in entry:
            raise TopologyError(f"node {entry['id']!r} lacks a rate")
        vid = entry["id"]
        edges.append((vid, entry.get("parent"), entry["rate"]))
        if "load" in entry:
            loads[vid] = entry["load"]
        if "available" in entry:
            avail[vid] = bool(entry["available"])
    return build_tree(edges, doc["root"], loads=loads, available=avail)


def load_topology(path) -> TreeNetwork:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TopologyError(f"invalid JSON in {path}: {exc}") from exc
    return from_json_dict(doc)


def save_topology(tree: TreeNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tree.to_json_dict(), fh, indent=2)
        fh.write("\n")


def bfs_order(tree: TreeNetwork) -> tuple:
    """Level order over switch ids, siblings in insertion order."""
    out = []
    queue = deque([tree.root_id])
    while queue:
        v = queue.popleft()
        out.append(v)
        queue.extend(tree.children[v])
    return tuple(out)
