"""Reduce simulation: per-edge message counts, utilization cost, bytes.

Semantics of one reduce pass, bottom-up over the switch tree:

* a red (non-aggregating) switch forwards every message received from its
  children plus one message per attached server;
* a blue (aggregating) switch merges everything it receives, including its
  own servers' messages, into a single outgoing message. A blue switch
  emits that one message even when its subtree carries no load, matching
  the solver's cost model.

The utilization cost of a placement is the total transmission time
``sum_e msg_e / rate_e``. :func:`utilization_barrier` computes the same
quantity by charging each switch's outgoing traffic over the distance to
its closest blue ancestor (or the destination), which is the identity the
solver's potential tables are built on.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Mapping

from .errors import BlueNotAvailable, PayloadCountMismatch, SimulationError
from .topology import TreeNetwork


@dataclass(frozen=True)
class Placement:
    """A set of blue (aggregating) switches."""

    blue: frozenset = field(default_factory=frozenset)

    def __init__(self, blue=()):
        object.__setattr__(self, "blue", frozenset(blue))

    def __contains__(self, v):
        return v in self.blue

    def __iter__(self):
        return iter(self.blue)

    def __len__(self):
        return len(self.blue)


@dataclass
class EdgeUtilization:
    """Per-edge message counts and costs; edges keyed by child endpoint."""

    msg: dict
    cost: dict
    total: float


def _blue_set(tree: TreeNetwork, placement) -> frozenset:
    blue = placement.blue if isinstance(placement, Placement) else frozenset(placement)
    for v in blue:
        if v not in tree.parent:
            raise BlueNotAvailable(f"placement names unknown switch {v!r}")
        if not tree.available[v]:
            raise BlueNotAvailable(f"switch {v!r} is not available for "
                                   "aggregation")
    return blue


def simulate_reduce(tree: TreeNetwork, placement) -> EdgeUtilization:
    """Run one reduce pass and return per-edge message counts and costs."""
    blue = _blue_set(tree, placement)
    msg: dict = {}
    total = 0.0
    for v in tree._post_order:
        if v in blue:
            out = 1
        else:
            out = tree.load[v]
            for c in tree.children[v]:
                out += msg[c]
        msg[v] = out
        total += out * tree.inv_rate[v]
    cost = {v: m * tree.inv_rate[v] for v, m in msg.items()}
    return EdgeUtilization(msg=msg, cost=cost, total=total)


def total_utilization(tree: TreeNetwork, placement) -> float:
    """Utilization cost only; allocation-light path for tight loops."""
    blue = _blue_set(tree, placement)
    msg: dict = {}
    total = 0.0
    load = tree.load
    children = tree.children
    inv = tree.inv_rate
    for v in tree._post_order:
        if v in blue:
            out = 1
        else:
            out = load[v]
            for c in children[v]:
                out += msg[c]
        msg[v] = out
        total += out * inv[v]
    return total


def utilization_barrier(tree: TreeNetwork, placement) -> float:
    """Utilization cost via closest-blue-ancestor distances.

    Equals ``simulate_reduce(...).total``: blue switches contribute one
    message over the inverse-rate distance to their barrier, red switches
    contribute one message per attached server over the same distance.
    """
    blue = _blue_set(tree, placement)
    rho_up: dict = {}  # inverse-rate distance from v to its barrier
    total = 0.0
    for v in tree._pre_order:
        p = tree.parent[v]
        if p is None or p in blue:
            rho_up[v] = tree.inv_rate[v]
        else:
            rho_up[v] = tree.inv_rate[v] + rho_up[p]
        weight = 1 if v in blue else tree.load[v]
        total += weight * rho_up[v]
    return total


# -- payload models and byte-level simulation ----------------------------------

PAYLOAD_KINDS = ("unit", "wordcount", "gradient")


@dataclass
class PayloadModel:
    """What the messages carry.

    ``unit``: every message costs ``entry_bytes`` regardless of content.
    ``wordcount``: payloads are word->count mappings; merging sums counts,
    so a merged message's size is the union of key supports.
    ``gradient``: payloads are sets of feature indices; merging is set
    union. ``payloads`` holds one payload per server slot (slots are dealt
    to switches in node insertion order, ``load[v]`` consecutive slots
    each). ``max_message_bytes`` is carried for reporting only; merged
    messages are allowed to exceed it.
    """

    kind: str
    entry_bytes: int = 8
    payloads: tuple | None = None
    max_message_bytes: int | None = None

    def __post_init__(self):
        if self.kind not in PAYLOAD_KINDS:
            raise SimulationError(f"unknown payload kind {self.kind!r}")
        if self.entry_bytes <= 0:
            raise SimulationError("entry_bytes must be positive")


def server_slots(tree: TreeNetwork) -> list:
    """Switch id per server slot; switches in insertion order."""
    slots = []
    for v in tree.nodes():
        slots.extend([v] * tree.load[v])
    return slots


def _merge_wordcount(parts):
    merged: dict = {}
    for part in parts:
        for key, count in part.items():
            merged[key] = merged.get(key, 0) + count
    return merged


def _merge_gradient(parts):
    merged: set = set()
    for part in parts:
        merged |= part
    return merged


def simulate_bytes(tree: TreeNetwork, placement,
                   model: PayloadModel) -> tuple[dict, int]:
    """Byte totals per edge and overall for one reduce pass.

    Red switches relay each incoming payload unchanged; blue switches merge
    all incoming payloads plus their own servers' payloads into one. An
    edge's byte count is ``entry_bytes`` times the total number of entries
    crossing it (for the unit model: per message).
    """
    blue = _blue_set(tree, placement)
    if model.kind == "unit":
        util = simulate_reduce(tree, blue)
        per_edge = {v: model.entry_bytes * m for v, m in util.msg.items()}
        return per_edge, sum(per_edge.values())

    total_servers = sum(tree.load.values())
    payloads = model.payloads or ()
    if len(payloads) != total_servers:
        raise PayloadCountMismatch(
            f"model provides {len(payloads)} payloads for "
            f"{total_servers} server slots")
    merge = _merge_wordcount if model.kind == "wordcount" else _merge_gradient

    next_slot = 0
    own_payloads: dict = {}
    for v in tree.nodes():
        own_payloads[v] = payloads[next_slot:next_slot + tree.load[v]]
        next_slot += tree.load[v]

    outbox: dict = {}
    per_edge: dict = {}
    total = 0
    for v in tree._post_order:
        incoming: list = []
        for c in tree.children[v]:
            incoming.extend(outbox[c])
            outbox[c] = None  # free as we go
        incoming.extend(own_payloads[v])
        if v in blue:
            out = [merge(incoming)]
        else:
            out = incoming
        edge_bytes = model.entry_bytes * sum(len(m) for m in out)
        per_edge[v] = edge_bytes
        total += edge_bytes
        outbox[v] = out
    return per_edge, total


# -- CSV export -----------------------------------------------------------------

EDGE_CSV_FIELDS = ("child_id", "parent_id", "msg", "cost", "bytes")


def write_edge_csv(fh: IO[str], tree: TreeNetwork, util: EdgeUtilization,
                   bytes_per_edge: Mapping | None = None) -> None:
    """One CSV row per edge; the root edge's parent column is empty."""
    writer = csv.writer(fh)
    writer.writerow(EDGE_CSV_FIELDS)
    for v in tree.nodes():
        parent = tree.parent[v]
        row = [v, "" if parent is None else parent,
               util.msg[v], repr(util.cost[v])]
        row.append("" if bytes_per_edge is None else bytes_per_edge[v])
        writer.writerow(row)
