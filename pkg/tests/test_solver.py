import itertools

import numpy as np
import pytest

from aggtree import (Placement, brute_force, build_tree, color, gather,
                     mincost, minsplit, simulate_reduce, solve,
                     total_utilization)
from aggtree.errors import BudgetNegative, TableMismatch
from aggtree.solver import INFEASIBLE, write_table_csv

from conftest import (close, pi_direct, pi_recursive, random_blue,
                      random_tree, subtree_nodes)


def test_gather_cells_match_worked_example(fig2):
    t = gather(fig2, 2)
    root = t.nodes["r"]
    assert root.y_red[-1][1, 2] == 20.0
    assert root.y_blue[-1][1, 2] == 25.0
    assert t.nodes["m26"].x[2, 1] == 9.0
    assert t.nodes["m54"].x[2, 1] == 11.0
    assert t.nodes["m26"].x[1, 1] == 6.0
    assert t.nodes["m54"].x[1, 0] == 18.0
    assert root.x[1, 2] == 20.0
    assert not root.blue_best[1, 2]  # red wins the 20 vs 25 comparison


def test_leaf_base_case():
    # leaf with load 6 at depth 2, unit rates: no budget costs 2*6
    t = build_tree([("r", None, 1), ("m", "r", 1), ("v", "m", 1)], "r",
                   loads={"v": 6})
    tabs = gather(t, 2)
    assert tabs.nodes["v"].x[2, 0] == 12.0
    assert tabs.nodes["v"].x[2, 1] == 2.0  # blue: one message over two hops


def test_leaf_unavailable_keeps_red_value():
    t = build_tree([("r", None, 1), ("v", "r", 1)], "r", loads={"v": 6},
                   available={"v": False})
    tabs = gather(t, 3)
    assert tabs.nodes["v"].x[2, 0] == tabs.nodes["v"].x[2, 3] == 12.0


def test_mincost_worked_examples(fig2):
    tabs = gather(fig2, 2)
    root = tabs.nodes["r"]
    x_last_child = tabs.nodes[fig2.children["r"][-1]].x
    # red root, distance 1, two units: best split is one per child (9 + 11)
    assert mincost(1, 2, root.y_red[0], x_last_child, "R") == 20.0
    # blue root: children contribute 6 + 18, root's own message adds 1
    assert mincost(1, 2, root.y_blue[0], x_last_child, "B") == 25.0
    assert mincost(1, 0, root.y_blue[0], x_last_child, "B") == INFEASIBLE


def test_minsplit_worked_examples(fig2):
    tabs = gather(fig2, 2)
    root = tabs.nodes["r"]
    x_last_child = tabs.nodes[fig2.children["r"][-1]].x
    assert minsplit(1, 2, root.y_red[0], x_last_child, "R") == 1
    assert minsplit(1, 0, root.y_red[0], x_last_child, "R") == 0


def test_minsplit_attains_mincost():
    rng = np.random.default_rng(31)
    for _ in range(60):
        tree, _ = random_tree(rng, min_n=3, max_n=12)
        k = int(rng.integers(1, 5))
        tabs = gather(tree, k)
        for v in tree.nodes():
            kids = tree.children[v]
            if len(kids) < 2:
                continue
            entry = tabs.nodes[v]
            m = int(rng.integers(2, len(kids) + 1))
            ell = int(rng.integers(0, tree.depth[v] + 2))
            i = int(rng.integers(0, k + 1))
            xc = tabs.nodes[kids[m - 1]].x
            for node_color, table in (("R", entry.y_red[m - 2]),
                                      ("B", entry.y_blue[m - 2])):
                got = mincost(ell, i, table, xc, node_color)
                j = minsplit(ell, i, table, xc, node_color)
                if node_color == "B":
                    if i == 0:
                        assert got == INFEASIBLE
                        continue
                    attained = table[ell, i - j] + xc[1, j]
                else:
                    attained = table[ell, i - j] + xc[ell + 1, j]
                if got != INFEASIBLE:
                    assert attained == got


def test_solve_costs_and_unique_optima(fig2):
    costs = {k: solve(fig2, k).cost for k in (1, 2, 3, 4)}
    assert costs == {1: 35.0, 2: 20.0, 3: 15.0, 4: 11.0}
    assert solve(fig2, 2).placement.blue == frozenset({"b6", "m54"})
    assert solve(fig2, 3).placement.blue == frozenset({"b6", "c5", "d4"})


def test_solve_all_blue_budget(fig1):
    res = solve(fig1, 5)
    assert res.cost == 5.0


def test_solve_zero_budget_is_all_red(fig2):
    res = solve(fig2, 0)
    assert res.placement.blue == frozenset()
    assert res.cost == simulate_reduce(fig2, Placement()).total == 14.0


def test_budget_negative():
    t = build_tree([("r", None, 1)], "r")
    with pytest.raises(BudgetNegative):
        gather(t, -1)


def test_table_mismatch(fig2, fig1):
    tabs = gather(fig2, 2)
    with pytest.raises(TableMismatch):
        color(fig2, tabs, 3)
    with pytest.raises(TableMismatch):
        color(fig1, tabs, 2)


def test_surplus_budget_is_absorbed():
    # a zero-load switch is never forced blue
    t = build_tree([("r", None, 1)], "r", loads={"r": 0})
    res = solve(t, 1)
    assert res.cost == 0.0 and res.placement.blue == frozenset()
    t2 = build_tree([("r", None, 1), ("a", "r", 1)], "r",
                    loads={"a": 3}, available={"r": False})
    res = solve(t2, 4)  # budget beyond the available set
    assert len(res.placement) <= 1
    assert res.cost == solve(t2, 1).cost


def test_budget_absorption_randomized():
    rng = np.random.default_rng(400)
    for _ in range(40):
        tree, _ = random_tree(rng, min_n=2, max_n=10)
        n_avail = sum(tree.available.values())
        k = n_avail + int(rng.integers(1, 4))
        res = solve(tree, k)
        assert len(res.placement) <= n_avail
        assert res.cost == solve(tree, n_avail).cost


def test_cost_matches_simulation():
    rng = np.random.default_rng(41)
    for _ in range(80):
        tree, scheme = random_tree(rng)
        k = int(rng.integers(0, 5))
        res = solve(tree, k)
        assert close(res.cost, total_utilization(tree, res.placement),
                     exact=scheme == "constant")
        assert len(res.placement) <= k
        assert all(tree.available[v] for v in res.placement)


def test_cost_non_increasing_in_budget():
    rng = np.random.default_rng(42)
    for _ in range(40):
        tree, _ = random_tree(rng)
        costs = [solve(tree, k).cost for k in range(6)]
        assert all(a >= b for a, b in zip(costs, costs[1:]))


def test_matches_brute_force():
    rng = np.random.default_rng(43)
    for _ in range(60):
        tree, scheme = random_tree(rng)
        k = int(rng.integers(0, 5))
        _, oracle_cost = brute_force(tree, k)
        assert close(solve(tree, k).cost, oracle_cost,
                     exact=scheme == "constant")


def test_tables_match_subset_enumeration():
    # X_v(l, i) is the cheapest subtree potential using at most i blues
    rng = np.random.default_rng(44)
    for _ in range(15):
        tree, scheme = random_tree(rng, min_n=2, max_n=8)
        k = 3
        tabs = gather(tree, k)
        for v in tree.nodes():
            sub = [u for u in subtree_nodes(tree, v) if tree.available[u]]
            for ell in range(tree.depth[v] + 2):
                for i in range(k + 1):
                    best = min(
                        pi_direct(tree, set(pick), v, ell)
                        for size in range(0, min(i, len(sub)) + 1)
                        for pick in itertools.combinations(sub, size))
                    assert close(float(tabs.nodes[v].x[ell, i]), best,
                                 exact=scheme == "constant")


def test_potential_recursion_matches_definition():
    rng = np.random.default_rng(45)
    for _ in range(120):
        tree, scheme = random_tree(rng, avail_p=1.0)
        blue = random_blue(rng, tree)
        v = tree.nodes()[int(rng.integers(tree.node_count))]
        ell = int(rng.integers(0, tree.depth[v] + 2))
        assert close(pi_direct(tree, blue, v, ell),
                     pi_recursive(tree, blue, v, ell),
                     exact=scheme == "constant")


def test_table_monotonicity_and_shape():
    rng = np.random.default_rng(46)
    for _ in range(25):
        tree, _ = random_tree(rng, min_n=1, max_n=12)
        k = int(rng.integers(0, 5))
        tabs = gather(tree, k)
        total_cells = 0
        for v in tree.nodes():
            x = tabs.nodes[v].x
            assert x.shape == (tree.depth[v] + 2, k + 1)
            total_cells += x.size
            finite = np.isfinite(x)
            assert finite.all()  # the red fallback is always feasible
            assert (np.diff(x, axis=1) <= 0).all()  # more budget never hurts
            assert (np.diff(x, axis=0) >= 0).all()  # longer reach never helps
        # one row per hop distance to the destination, per budget value
        assert total_cells == sum(
            (tree.depth[v] + 2) * (k + 1) for v in tree.nodes())
        assert tabs.cell_count() == total_cells


def test_solve_stats_and_tables_retention(fig2):
    res = solve(fig2, 2, keep_tables=True)
    assert res.tables is not None
    assert res.stats.nodes_visited == 7
    assert res.stats.table_cells == res.tables.cell_count()
    assert solve(fig2, 2).tables is None


def test_table_csv_dump(fig2, tmp_path):
    res = solve(fig2, 2, keep_tables=True)
    path = tmp_path / "tables.csv"
    with open(path, "w", newline="") as fh:
        write_table_csv(fh, fig2, res.tables)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "node,ell,i,x,color"
    assert len(lines) == 1 + res.stats.table_cells
    # the root's answer cell carries the optimal value and color
    row = [l for l in lines if l.startswith("r,1,2,")][0]
    assert row.endswith(",R") and "20.0" in row
