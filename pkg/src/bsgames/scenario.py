"""Defenders, scenarios and scenario validation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .graph import DEFAULT_PATH_CAP, AttackGraph, Node, PathSet, enumerate_paths


class ScenarioError(ValueError):
    def __init__(self, diagnostics: Sequence["Diagnostic"]):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.errors_only()))

    def errors_only(self):
        return [d for d in self.diagnostics if d.severity == "error"]


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    where: str = ""

    def __str__(self) -> str:
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.severity}: {self.message}{loc}"


@dataclass(frozen=True)
class Defender:
    id: str
    budget: float
    alpha: float
    assets: tuple[tuple[Node, float], ...]

    @classmethod
    def make(cls, id, budget, alpha, assets) -> "Defender":
        if isinstance(assets, dict):
            assets = assets.items()
        return cls(str(id), float(budget), float(alpha),
                   tuple((n, float(loss)) for n, loss in assets))


@dataclass(frozen=True)
class Scenario:
    graph: AttackGraph
    defenders: tuple[Defender, ...]
    path_cap: int = DEFAULT_PATH_CAP
    name: str = ""
    description: str = ""

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.defenders]

    @property
    def budgets(self) -> np.ndarray:
        return np.array([d.budget for d in self.defenders], dtype=float)

    def index(self, defender_id: str) -> int:
        for k, d in enumerate(self.defenders):
            if d.id == defender_id:
                return k
        raise KeyError(f"no defender {defender_id!r}")

    def defender(self, defender_id: str) -> Defender:
        return self.defenders[self.index(defender_id)]

    @cached_property
    def _path_cache(self) -> dict:
        return {}

    def paths(self, target: Node) -> PathSet:
        cache = self._path_cache
        if target not in cache:
            cache[target] = enumerate_paths(self.graph, target, cap=self.path_cap)
        return cache[target]

    def with_defenders(self, defenders: Iterable[Defender]) -> "Scenario":
        return replace(self, defenders=tuple(defenders))

    def with_alpha(self, alpha: float) -> "Scenario":
        return self.with_defenders(replace(d, alpha=float(alpha)) for d in self.defenders)

    def zero_profile(self) -> np.ndarray:
        return np.zeros((len(self.defenders), self.graph.n_edges))

    def to_dict(self) -> dict:
        g = self.graph
        out = {
            "schema_version": 1,
            "source": g.source,
            "nodes": list(g.nodes),
            "edges": [{"from": e.src, "to": e.dst, "p0": e.p0} for e in g.edges],
            "defenders": [
                {
                    "id": d.id,
                    "budget": d.budget,
                    "alpha": d.alpha,
                    "assets": [{"node": n, "loss": loss} for n, loss in d.assets],
                }
                for d in self.defenders
            ],
        }
        if self.name:
            out["name"] = self.name
        if self.description:
            out["description"] = self.description
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def validate(graph: AttackGraph, scenario: Scenario | None = None) -> list[Diagnostic]:
    """Check graph and defender invariants; empty list means valid.

    Unreachable assets only produce warnings.
    """
    diags: list[Diagnostic] = []
    err = lambda msg, where="": diags.append(Diagnostic("error", msg, where))
    warn = lambda msg, where="": diags.append(Diagnostic("warning", msg, where))

    nodes = set(graph.nodes)
    if len(nodes) != len(graph.nodes):
        err("duplicate node ids", "nodes")
    if graph.source not in nodes:
        err(f"source {graph.source!r} is not a node", "source")
    pairs = set()
    for e in graph.edges:
        where = f"edges[{e.index}]"
        if e.src not in nodes or e.dst not in nodes:
            err(f"edge {e.src!r}->{e.dst!r} references an unknown node", where)
        if e.src == e.dst:
            err(f"self-loop on {e.src!r}", where)
        if (e.src, e.dst) in pairs:
            err(f"duplicate edge {e.src!r}->{e.dst!r}", where)
        pairs.add((e.src, e.dst))
        if e.dst == graph.source:
            err("source has incoming edge", where)
        if not _finite(e.p0) or not 0.0 < e.p0 <= 1.0:
            err(f"p0 out of (0,1]: {e.p0}", f"{where}.p0")

    if scenario is None:
        return diags

    reach = graph.reachable() if graph.source in nodes else set()
    seen_ids = set()
    for k, d in enumerate(scenario.defenders):
        where = f"defenders[{k}]"
        if d.id in seen_ids:
            err(f"duplicate defender id {d.id!r}", f"{where}.id")
        seen_ids.add(d.id)
        if not _finite(d.budget) or d.budget < 0:
            err(f"budget must be finite and >= 0: {d.budget}", f"{where}.budget")
        if not _finite(d.alpha) or not 0.0 < d.alpha <= 1.0:
            err(f"alpha out of (0,1]: {d.alpha}", f"{where}.alpha")
        owned = set()
        for j, (node, loss) in enumerate(d.assets):
            aw = f"{where}.assets[{j}]"
            if node not in nodes:
                err(f"asset {node!r} is not a node", aw)
            elif node == graph.source:
                err("the source cannot be a defended asset", aw)
            elif node not in reach:
                warn(f"asset {node!r} is unreachable from the source", aw)
            if node in owned:
                err(f"asset {node!r} listed twice for {d.id!r}", aw)
            owned.add(node)
            if not _finite(loss) or loss < 0:
                err(f"loss must be finite and >= 0: {loss}", f"{aw}.loss")
    return diags


def ensure_valid(scenario: Scenario) -> Scenario:
    diags = validate(scenario.graph, scenario)
    if any(d.severity == "error" for d in diags):
        raise ScenarioError(diags)
    return scenario


def build_scenario(source, edges, defenders, nodes=None, **kw) -> Scenario:
    """Convenience constructor.

    ``defenders`` items are ``Defender`` instances or
    ``(id, budget, alpha, {node: loss})`` tuples.
    """
    graph = AttackGraph.from_edges(source, edges, nodes)
    ds = tuple(d if isinstance(d, Defender) else Defender.make(*d) for d in defenders)
    return Scenario(graph, ds, **kw)
