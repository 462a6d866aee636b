"""Scenario generation and the online multi-workload engine.

Topology families, load distributions, rate schemes and payload content
for the evaluation harness, plus the sequential engine that serves a
stream of workloads against per-switch aggregation capacities.

Size convention: a scenario of size ``n`` has ``n - 1`` switches; the
destination counts as the n-th node. A complete binary scenario therefore
needs ``n`` to be a power of two (2^(h+1) - 1 switches of height h).

All generators are pure functions of their seed. Trial seeds derive from
the scenario seed via ``numpy.random.SeedSequence`` spawning, so trials
are reproducible independently of execution order.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import BadParams, BadSize, ScenarioError
from .reduce_sim import Placement, PayloadModel, simulate_reduce
from .strategies import STRATEGY_NAMES, place
from .topology import TreeNetwork, build_tree

RATE_SCHEMES = ("constant", "linear", "exponential")
LOAD_DISTS = ("uniform", "powerlaw", "unit", "explicit")

# Power-law loads are an unbounded Zipf draw clipped into [1, 63]: the cap
# collects the whole tail mass, which keeps the distribution heavy enough
# for the documented scaling behavior (a renormalized truncation cannot
# be: its variance maxes out near 84 at mean 5). Exponent calibrated so
# the mean is 5.0 (variance 122).
POWERLAW_EXPONENT = 1.8212
POWERLAW_RANGE = (1, 63)


def _edge_rate(scheme: str, height: int, depth: int) -> float:
    """Rate of the uplink of a switch at ``depth``.

    Levels count from the bottom: leaf-level uplinks have rate 1 and each
    level towards the root adds 1 (linear) or doubles (exponential); the
    root's uplink to the destination continues the progression one step
    past the deepest switch level.
    """
    level = height - depth + 1
    if scheme == "constant":
        return 1.0
    if scheme == "linear":
        return float(level)
    if scheme == "exponential":
        return float(2 ** (level - 1))
    raise BadParams(f"unknown rate scheme {scheme!r}")


def gen_complete_binary(n: int, rate_scheme: str = "constant") -> TreeNetwork:
    """Complete binary switch tree with n-1 switches (n a power of two).

    Switch ids are level-order integers (root 0, children of i at 2i+1 and
    2i+2). Loads start at zero; assign them with :func:`gen_loads`.
    """
    if n < 2 or n & (n - 1):
        raise BadSize(f"size {n} is not a power of two >= 2")
    switches = n - 1
    height = n.bit_length() - 2  # n = 2^(h+1)
    edges = []
    for i in range(switches):
        depth = (i + 1).bit_length() - 1
        parent = None if i == 0 else (i - 1) // 2
        edges.append((i, parent, _edge_rate(rate_scheme, height, depth)))
    return build_tree(edges, 0)


def gen_rpa(n: int, seed: int, rate_scheme: str = "constant") -> TreeNetwork:
    """Random preferential-attachment switch tree with n-1 switches.

    Growth starts from the root; every further switch attaches below an
    existing switch drawn with probability proportional to its current
    degree (realized by sampling a uniform endpoint of an existing edge).
    Every switch carries load 1, the convention used when evaluating
    scale-free topologies.
    """
    if n < 3:
        raise BadSize(f"need n >= 3 for a preferential-attachment tree, "
                      f"got {n}")
    rng = np.random.default_rng(seed)
    switches = n - 1
    parents = [None, 0]  # second switch must attach to the root
    endpoints = [0, 1]   # one entry per edge endpoint => degree weights
    for v in range(2, switches):
        target = endpoints[rng.integers(len(endpoints))]
        parents.append(target)
        endpoints.append(target)
        endpoints.append(v)
    depth = [0] * switches
    for v in range(1, switches):
        depth[v] = depth[parents[v]] + 1
    height = max(depth)
    edges = [(v, parents[v], _edge_rate(rate_scheme, height, depth[v]))
             for v in range(switches)]
    return build_tree(edges, 0, loads={v: 1 for v in range(switches)})


def _powerlaw_sampler():
    lo, hi = POWERLAW_RANGE
    alpha = POWERLAW_EXPONENT
    values = np.arange(lo, hi + 1)
    weights = values.astype(float) ** (-alpha)
    # clip semantics: P(X = hi) absorbs the Zipf tail beyond the cap;
    # Hurwitz tail sum_{x > hi} x^-alpha via Euler-Maclaurin
    a = float(hi + 1)
    weights[-1] += (a ** (1 - alpha) / (alpha - 1)
                    + a ** (-alpha) / 2
                    + alpha * a ** (-alpha - 1) / 12)
    return values, weights / weights.sum()


_PL_VALUES, _PL_PROBS = _powerlaw_sampler()


def gen_loads(tree: TreeNetwork, dist: str, seed: int | None = None,
              explicit: Mapping | None = None) -> dict:
    """Load assignment for a topology: leaves carry load, internals zero.

    ``uniform`` draws each leaf load u.a.r. from {4, 5, 6}; ``powerlaw``
    draws from the clipped power law on [1, 63] (mean 5); ``unit``
    assigns 1 per leaf; ``explicit`` passes ``explicit`` through.
    """
    if dist not in LOAD_DISTS:
        raise BadParams(f"unknown load distribution {dist!r}")
    if dist == "explicit":
        if explicit is None:
            raise BadParams("explicit load distribution needs a mapping")
        return dict(explicit)
    leaves = tree.metrics().leaf_ids
    loads = {v: 0 for v in tree.nodes()}
    if dist == "unit":
        for v in leaves:
            loads[v] = 1
        return loads
    rng = np.random.default_rng(seed)
    if dist == "uniform":
        draws = rng.integers(4, 7, size=len(leaves))
    else:
        draws = rng.choice(_PL_VALUES, size=len(leaves), p=_PL_PROBS)
    for v, value in zip(leaves, draws):
        loads[v] = int(value)
    return loads


def resolve_budget(rule: str, n: int) -> int:
    """Budget rules over the scenario size n (destination included)."""
    if rule.startswith("fixed:"):
        return int(rule.split(":", 1)[1])
    if rule == "fraction_1pct":
        return max(1, round(0.01 * n))
    if rule == "log_n":
        return max(1, round(math.log2(n)))
    if rule == "sqrt_n":
        return max(1, round(math.sqrt(n)))
    raise BadParams(f"unknown budget rule {rule!r}")


# -- payload content ------------------------------------------------------------

def gen_payloads(use_case: str, n_servers: int, seed: int | None = None, *,
                 entry_bytes: int = 8,
                 vocab_size: int = 10_000,
                 words_per_server: int = 1_000,
                 zipf_exponent: float = 1.0,
                 features: int = 10_000,
                 dropout: float = 0.5,
                 corpus_path=None) -> PayloadModel:
    """Per-server payload content for the byte-level use cases.

    ``wordcount``: each server holds a multiset of words drawn from a
    Zipfian vocabulary (rank weight rank^-s), or, with ``corpus_path``, the
    words of a UTF-8 text file (lowercased, whitespace-tokenized) dealt
    round-robin across servers. ``gradient``: each server holds a random
    feature support of size round(features * (1 - dropout)).
    """
    if use_case == "unit":
        return PayloadModel(kind="unit", entry_bytes=entry_bytes)
    if use_case not in ("wordcount", "gradient"):
        raise BadParams(f"unknown use case {use_case!r}")
    if n_servers <= 0:
        raise BadParams("payload generation needs at least one server")
    rng = np.random.default_rng(seed)

    if use_case == "gradient":
        if not 0.0 <= dropout <= 1.0:
            raise BadParams(f"dropout must be in [0, 1], got {dropout}")
        if features <= 0:
            raise BadParams("features must be positive")
        support = round(features * (1.0 - dropout))
        payloads = tuple(
            frozenset(rng.choice(features, size=support, replace=False).tolist())
            for _ in range(n_servers))
        return PayloadModel(kind="gradient", entry_bytes=entry_bytes,
                            payloads=payloads)

    if corpus_path is not None:
        shards = _shard_corpus(corpus_path, n_servers)
        return PayloadModel(kind="wordcount", entry_bytes=entry_bytes,
                            payloads=tuple(shards))
    if vocab_size <= 0 or words_per_server <= 0:
        raise BadParams("vocab_size and words_per_server must be positive")
    ranks = np.arange(1, vocab_size + 1, dtype=float)
    probs = ranks ** (-zipf_exponent)
    probs /= probs.sum()
    payloads = []
    for _ in range(n_servers):
        words = rng.choice(vocab_size, size=words_per_server, p=probs)
        payloads.append(dict(Counter(words.tolist())))
    return PayloadModel(kind="wordcount", entry_bytes=entry_bytes,
                        payloads=tuple(payloads))


def _shard_corpus(path, n_servers: int) -> list:
    shards = [Counter() for _ in range(n_servers)]
    i = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            for word in line.lower().split():
                shards[i % n_servers][word] += 1
                i += 1
    if i == 0:
        raise BadParams(f"corpus {path} contains no words")
    return [dict(shard) for shard in shards]


# -- scenario configuration -------------------------------------------------------

_CONFIG_KEYS = {"family", "n", "load_dist", "rate_scheme", "k_values",
                "k_rule", "seed", "trials", "strategies", "use_case",
                "payload"}


@dataclass(frozen=True)
class ScenarioConfig:
    """A reproducible experiment grid.

    ``k_values`` lists explicit budgets; ``k_rule`` (fixed:K,
    fraction_1pct, log_n, sqrt_n) is resolved against n when k_values is
    empty. ``payload`` carries keyword overrides for gen_payloads.
    """

    family: str = "complete_binary"
    n: int = 256
    load_dist: str = "powerlaw"
    rate_scheme: str = "constant"
    k_values: tuple = ()
    k_rule: str | None = None
    seed: int = 0
    trials: int = 10
    strategies: tuple = ("soar", "top", "max", "level", "allblue")
    use_case: str = "none"
    payload: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in ("complete_binary", "rpa"):
            raise BadParams(f"unknown topology family {self.family!r}")
        if self.rate_scheme not in RATE_SCHEMES:
            raise BadParams(f"unknown rate scheme {self.rate_scheme!r}")
        if self.load_dist not in LOAD_DISTS:
            raise BadParams(f"unknown load distribution {self.load_dist!r}")
        if self.trials < 1:
            raise BadParams("trials must be >= 1")
        for s in self.strategies:
            if s not in STRATEGY_NAMES:
                raise BadParams(f"unknown strategy {s!r}")
        if not self.k_values and self.k_rule is None:
            raise BadParams("config needs k_values or k_rule")

    @classmethod
    def from_json_dict(cls, doc: Mapping) -> "ScenarioConfig":
        extra = set(doc) - _CONFIG_KEYS
        if extra:
            raise BadParams(f"unknown config keys: {sorted(extra)}")
        kwargs = dict(doc)
        if "k_values" in kwargs:
            kwargs["k_values"] = tuple(kwargs["k_values"])
        if "strategies" in kwargs:
            kwargs["strategies"] = tuple(kwargs["strategies"])
        return cls(**kwargs)

    def budgets(self) -> tuple:
        if self.k_values:
            return tuple(self.k_values)
        return (resolve_budget(self.k_rule, self.n),)

    def trial_seed(self, trial: int) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.seed, trial])

    def build_instance(self, trial: int) -> TreeNetwork:
        """Topology plus loads for one trial, fully seed-determined."""
        ss = self.trial_seed(trial)
        topo_seed, load_seed = ss.spawn(2)
        if self.family == "complete_binary":
            tree = gen_complete_binary(self.n, self.rate_scheme)
        else:
            tree = gen_rpa(self.n, topo_seed, self.rate_scheme)
        if self.family == "rpa" and self.load_dist == "unit":
            return tree  # RPA trees already carry load 1 everywhere
        loads = gen_loads(tree, self.load_dist, load_seed)
        return tree.with_loads(loads)


# -- online multi-workload engine ---------------------------------------------------

@dataclass
class CapacityLedger:
    """Aggregation capacities and what is left of them."""

    capacity: dict
    residual: dict
    history: list = field(default_factory=list)

    def charge(self, placement: Placement) -> None:
        for v in placement:
            if self.residual[v] <= 0:
                raise ScenarioError(f"switch {v!r} charged beyond its "
                                    "aggregation capacity")
            self.residual[v] -= 1
        self.history.append(placement)


@dataclass(frozen=True)
class WorkloadOutcome:
    index: int
    placement: Placement
    cost: float
    allred_cost: float

    @property
    def normalized(self) -> float:
        if self.allred_cost == 0:
            return 1.0
        return self.cost / self.allred_cost


def run_online(tree: TreeNetwork, workloads: Sequence[Mapping], k: int,
               capacities, strategy) -> tuple[list, CapacityLedger]:
    """Serve a stream of workloads, spending aggregation capacity as we go.

    ``workloads`` is a sequence of load mappings over the fixed topology;
    each is handled in order and the chosen blue switches are settled
    before the next one arrives. A switch is offered to the strategy only
    while it retains residual capacity (and is available in the base
    topology). ``capacities`` is a per-switch mapping or a scalar
    (math.inf for unbounded). ``strategy`` is a name from STRATEGY_NAMES
    or a callable (tree, k) -> Placement.
    """
    if isinstance(capacities, Mapping):
        capacity = {v: capacities.get(v, 0) for v in tree.nodes()}
    else:
        capacity = {v: capacities for v in tree.nodes()}
    for v, a in capacity.items():
        if a < 0:
            raise BadParams(f"negative aggregation capacity at {v!r}")
    ledger = CapacityLedger(capacity=capacity, residual=dict(capacity))
    run = strategy if callable(strategy) else (
        lambda t, kk: place(strategy, t, kk))

    outcomes = []
    for t, loads in enumerate(workloads):
        usable = {v: tree.available[v] and ledger.residual[v] > 0
                  for v in tree.nodes()}
        instance = tree.with_loads(loads).with_availability(usable)
        placement = run(instance, k)
        ledger.charge(placement)
        cost = simulate_reduce(instance, placement).total
        allred = simulate_reduce(instance, Placement()).total
        outcomes.append(WorkloadOutcome(index=t, placement=placement,
                                        cost=cost, allred_cost=allred))
    return outcomes, ledger


def gen_workloads(tree: TreeNetwork, count: int, seed: int) -> list:
    """Workload stream mixing the two load distributions by fair coin."""
    ss = np.random.SeedSequence(seed)
    coin = np.random.default_rng(ss.spawn(1)[0])
    out = []
    for t in range(count):
        dist = "uniform" if coin.random() < 0.5 else "powerlaw"
        out.append(gen_loads(tree, dist, np.random.SeedSequence([seed, t, 1])))
    return out
