"""Builders for the bundled scenarios and a few parametric families.

The JSON files under ``bsgames/data`` are generated from these builders;
:func:`bundled` loads them back through the scenario file parser.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from .scenario import Scenario, build_scenario

BUNDLED = ("split_join", "multi_pne", "spillover", "der1")


def bundled_path(name: str) -> Path:
    if name not in BUNDLED:
        raise KeyError(f"no bundled scenario {name!r}; choose from {BUNDLED}")
    return Path(str(resources.files("bsgames") / "data" / f"{name}.json"))


def bundled(name: str) -> Scenario:
    from .io import load_scenario

    return load_scenario(bundled_path(name))


def split_join(alpha: float = 0.5, budget: float = 6.0) -> Scenario:
    """One entry edge, two parallel two-hop branches, one exit edge to the asset."""
    edges = [("vs", "v1"), ("v1", "v2"), ("v1", "v3"), ("v2", "v4"), ("v3", "v4"), ("v4", "v5")]
    return build_scenario(
        "vs", edges, [("D1", budget, alpha, {"v5": 1.0})],
        nodes=["vs", "v1", "v2", "v3", "v4", "v5"], name="split_join",
        description="Single defender; the min cut has one edge but the behavioral optimum spreads.",
    )


MULTI_PNE_EDGES = [("vs", "v1"), ("v1", "v2"), ("vs", "v3"), ("v1", "v4"), ("v2", "v5"),
                   ("v3", "v4"), ("v4", "v5")]


def multi_pne(alpha: float = 0.5, budgets=(16.0, 12.0)) -> Scenario:
    """Two behavioral defenders whose game has more than one equilibrium."""
    return build_scenario(
        "vs", MULTI_PNE_EDGES,
        [("D1", budgets[0], alpha, {"v4": 1.0}), ("D2", budgets[1], alpha, {"v5": 1.0})],
        nodes=["vs", "v1", "v2", "v3", "v4", "v5"], name="multi_pne",
        description="D1 guards v4, D2 guards v5; several equilibria exist.",
    )


def _rows(scenario: Scenario, rows: list[dict]) -> np.ndarray:
    g = scenario.graph
    out = scenario.zero_profile()
    for k, row in enumerate(rows):
        for (a, b), v in row.items():
            out[k, g.edge_index(a, b)] = v
    return out


def multi_pne_profiles(scenario: Scenario | None = None) -> dict[str, np.ndarray]:
    """The two reference equilibrium allocations of :func:`multi_pne` (rounded to 0.01)."""
    s = scenario or multi_pne()
    a = _rows(s, [
        {("vs", "v1"): 4, ("vs", "v3"): 4, ("v1", "v4"): 4, ("v3", "v4"): 4},
        {("v1", "v2"): 4, ("v2", "v5"): 4, ("v4", "v5"): 4},
    ])
    b = _rows(s, [
        {("vs", "v1"): 1, ("vs", "v3"): 5, ("v1", "v4"): 5, ("v3", "v4"): 5},
        {("vs", "v1"): 4, ("v1", "v2"): 3.14, ("v2", "v5"): 3.14, ("v4", "v5"): 1.72},
    ])
    return {"a": a, "b": b}


def spillover(alpha1: float = 1.0, alpha2: float = 1.0, budgets=(5.0, 20.0),
              losses=(200.0, 200.0)) -> Scenario:
    """D1's asset v3 sits upstream of D2's asset v4 behind a two-branch subnetwork."""
    edges = [("vs", "v1"), ("vs", "v2"), ("v1", "v3"), ("v2", "v3"), ("v3", "v4")]
    return build_scenario(
        "vs", edges,
        [("D1", budgets[0], alpha1, {"v3": losses[0]}), ("D2", budgets[1], alpha2, {"v4": losses[1]})],
        nodes=["vs", "v1", "v2", "v3", "v4"], name="spillover",
        description="A behavioral downstream defender also protects the upstream defender's subnetwork.",
    )


def line_graph(K: int, B: float, alpha: float = 0.5) -> Scenario:
    """Chain vs -> v1 -> ... -> vK; defender k owns vk, budget B/K each.

    v1 carries loss K and every other node 1/(K-1).
    """
    if K < 2:
        raise ValueError("need K >= 2")
    nodes = ["vs"] + [f"v{i}" for i in range(1, K + 1)]
    edges = list(zip(nodes[:-1], nodes[1:]))
    ds = [(f"D{k}", B / K, alpha, {f"v{k}": float(K) if k == 1 else 1.0 / (K - 1)})
          for k in range(1, K + 1)]
    return build_scenario("vs", edges, ds, nodes=nodes, name=f"line_{K}")


def line_graph_own_edge(scenario: Scenario) -> np.ndarray:
    """Each defender's whole budget on the edge entering its own node."""
    prof = scenario.zero_profile()
    for k, d in enumerate(scenario.defenders):
        (node, _), = d.assets
        e = next(e for e in scenario.graph.edges if e.dst == node)
        prof[k, e.index] = d.budget
    return prof


def line_graph_poba(K: int, B: float) -> float:
    """Closed-form ratio for the own-edge equilibrium of :func:`line_graph`."""
    num = K * np.exp(-B / K) + sum(np.exp(-j * B / K) for j in range(2, K + 1)) / (K - 1)
    return float(num / ((K + 1) * np.exp(-B)))


DER1_EDGES = [
    ("vs", "net"), ("vs", "phys"),
    ("net", "hmi"), ("net", "vendor"), ("phys", "hmi"), ("phys", "local"),
    ("hmi", "G"), ("vendor", "G"), ("local", "G"),
    ("G", "pv_set"), ("G", "pv_fw"), ("pv_set", "G0"), ("pv_fw", "G0"),
    ("G", "ev_set"), ("G", "ev_fw"), ("ev_set", "G1"), ("ev_fw", "G1"),
]


def der1(alpha: float = 1.0, budget: float = 10.0) -> Scenario:
    """Distributed-energy control network with a shared controller G.

    Stand-in topology: the entry layer reaches the controller G over three
    access routes; G then reaches the PV inverter G0 (D1) and the EV
    charger G1 (D2) over two routes each.  Each defender gets half the budget.
    """
    nodes = ["vs", "net", "phys", "hmi", "vendor", "local", "G",
             "pv_set", "pv_fw", "G0", "ev_set", "ev_fw", "G1"]
    return build_scenario(
        "vs", DER1_EDGES,
        [("D1", budget / 2, alpha, {"G0": 200.0, "G": 100.0}),
         ("D2", budget / 2, alpha, {"G1": 200.0, "G": 100.0})],
        nodes=nodes, name="der1",
        description=("Stand-in distributed-energy-resource network: an approximate topology "
                     "with losses G0/G1 200 each, shared controller G 100 per defender, and "
                     "an even budget split."),
    )


def write_bundled(directory) -> None:
    from .io import save_scenario

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, s in [("split_join", split_join()), ("multi_pne", multi_pne()),
                    ("spillover", spillover()), ("der1", der1())]:
        save_scenario(s, d / f"{name}.json")
