"""Scenario files, report files and sweep CSV."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
from json.decoder import scanstring
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .graph import AttackGraph
from .scenario import Defender, Diagnostic, Scenario, ScenarioError, validate

SCHEMA_VERSION = 1
SWEEP_HEADER = ("alpha", "budget", "pne_cost", "social_cost", "inefficiency")

_TOP_KEYS = {"schema_version", "source", "nodes", "edges", "defenders", "name", "description",
             "path_cap"}
_EDGE_KEYS = {"from", "to", "p0"}
_DEFENDER_KEYS = {"id", "budget", "alpha", "assets"}
_ASSET_KEYS = {"node", "loss"}


class ScenarioFileError(ScenarioError):
    """Unreadable or invalid scenario file; ``str()`` is the rendered report.

    ``kind`` is ``"parse"``, ``"version"`` or ``"validation"``.
    """

    def __init__(self, kind: str, diagnostics: Sequence[Diagnostic], rendered: str):
        super().__init__(diagnostics)
        self.kind = kind
        self.rendered = rendered
        self.args = (rendered,)

    def __str__(self) -> str:
        return self.rendered


# -- locating JSON paths in source text ---------------------------------------

_WS = " \t\r\n"


def _skip(text: str, i: int) -> int:
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def locate_paths(text: str) -> dict[str, int]:
    """Map ``a.b[2].c`` style paths to the character offset of their value."""
    dec = json.JSONDecoder()
    out: dict[str, int] = {}

    def value(i: int, path: str) -> int:
        i = _skip(text, i)
        out[path] = i
        if text[i] == "{":
            i = _skip(text, i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                key_at = _skip(text, i)
                key, i = scanstring(text, key_at + 1)
                i = _skip(text, i) + 1  # colon
                sub = f"{path}.{key}" if path else key
                i = _skip(text, value(i, sub))
                if text[i] == "}":
                    return i + 1
                i += 1  # comma
        if text[i] == "[":
            i = _skip(text, i + 1)
            if text[i] == "]":
                return i + 1
            n = 0
            while True:
                i = _skip(text, value(i, f"{path}[{n}]"))
                n += 1
                if text[i] == "]":
                    return i + 1
                i += 1
        _, end = dec.raw_decode(text, i)
        return end

    try:
        value(0, "")
    except (ValueError, IndexError):
        pass
    return out


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _render_one(name: str, text: str, offset: int | None, diag: Diagnostic) -> str:
    if offset is None:
        return f"{name}: {diag}"
    line, col = _line_col(text, offset)
    src = text.splitlines()[line - 1] if text else ""
    return f"{name}:{line}:{col}: {diag}\n    {src}\n    {' ' * (col - 1)}^"


def _parent(where: str) -> str:
    cut = where.rfind("[") if where.endswith("]") else where.rfind(".")
    return where[:cut] if cut > 0 else ""


def render_diagnostics(name: str, text: str, diags: Sequence[Diagnostic]) -> str:
    locs = locate_paths(text)
    parts = []
    for d in diags:
        where = d.where
        # fall back to the closest enclosing path present in the file
        while where and where not in locs:
            where = _parent(where)
        parts.append(_render_one(name, text, locs.get(where) if where else None, d))
    return "\n".join(parts)


# -- scenario files -----------------------------------------------------------

def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.diags: list[Diagnostic] = []

    def err(self, msg: str, where: str):
        self.diags.append(Diagnostic("error", msg, where))

    def keys(self, obj, allowed: set, required: set, where: str) -> bool:
        if not isinstance(obj, dict):
            self.err("expected an object", where)
            return False
        for k in obj:
            if k not in allowed:
                self.err(f"unknown field {k!r}", f"{where}.{k}" if where else k)
        for k in sorted(required - obj.keys()):
            self.err(f"missing field {k!r}", where)
        return True

    def number(self, obj, key, where) -> float | None:
        v = obj.get(key)
        if not _is_number(v) or not math.isfinite(v):
            self.err(f"{key} must be a finite number", f"{where}.{key}")
            return None
        return float(v)

    def node(self, obj, key, where):
        v = obj.get(key)
        if not isinstance(v, str):
            self.err(f"{key} must be a node id string", f"{where}.{key}")
            return None
        return v


def scenario_from_dict(data: Any) -> tuple[Scenario | None, list[Diagnostic]]:
    """Structural checks plus graph and defender validation.

    Returns the scenario (None on any error) and every diagnostic found.
    """
    c = _Checker()
    if not c.keys(data, _TOP_KEYS, _TOP_KEYS - {"name", "description", "path_cap"}, ""):
        return None, c.diags
    if "schema_version" in data and data["schema_version"] != SCHEMA_VERSION:
        c.err(f"unsupported schema_version {data['schema_version']!r} (expected {SCHEMA_VERSION})",
              "schema_version")
        return None, c.diags
    source = c.node(data, "source", "")
    nodes = data.get("nodes", [])
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        c.err("nodes must be a list of strings", "nodes")
        nodes = []
    elif source is not None and source not in nodes:
        c.err(f"source {source!r} is not a listed node", "source")
    edges = []
    raw_edges = data.get("edges", [])
    if not isinstance(raw_edges, list):
        c.err("edges must be a list", "edges")
        raw_edges = []
    for i, e in enumerate(raw_edges):
        w = f"edges[{i}]"
        if not c.keys(e, _EDGE_KEYS, {"from", "to"}, w):
            continue
        src, dst = c.node(e, "from", w), c.node(e, "to", w)
        for key, n in (("from", src), ("to", dst)):
            if n is not None and n not in nodes:
                c.err(f"edge endpoint {n!r} is not a listed node", f"{w}.{key}")
        p0 = c.number(e, "p0", w) if "p0" in e else 1.0
        if src is not None and dst is not None and p0 is not None:
            edges.append((src, dst, p0))
    defenders = []
    raw_def = data.get("defenders", [])
    if not isinstance(raw_def, list):
        c.err("defenders must be a list", "defenders")
        raw_def = []
    for k, d in enumerate(raw_def):
        w = f"defenders[{k}]"
        if not c.keys(d, _DEFENDER_KEYS, _DEFENDER_KEYS, w):
            continue
        did = d.get("id")
        if not isinstance(did, str) or not did:
            c.err("id must be a non-empty string", f"{w}.id")
        budget, alpha = c.number(d, "budget", w), c.number(d, "alpha", w)
        assets = []
        raw_assets = d.get("assets", [])
        if not isinstance(raw_assets, list):
            c.err("assets must be a list", f"{w}.assets")
            raw_assets = []
        for j, a in enumerate(raw_assets):
            aw = f"{w}.assets[{j}]"
            if not c.keys(a, _ASSET_KEYS, _ASSET_KEYS, aw):
                continue
            node, loss = c.node(a, "node", aw), c.number(a, "loss", aw)
            if node is not None and loss is not None:
                assets.append((node, loss))
        if isinstance(did, str) and budget is not None and alpha is not None:
            defenders.append(Defender(did, budget, alpha, tuple(assets)))
    path_cap = data.get("path_cap", None)
    if path_cap is not None and (not isinstance(path_cap, int) or isinstance(path_cap, bool)
                                 or path_cap < 1):
        c.err("path_cap must be a positive integer", "path_cap")
    for key in ("name", "description"):
        if key in data and not isinstance(data[key], str):
            c.err(f"{key} must be a string", key)
    if c.diags:
        return None, c.diags

    graph = AttackGraph.from_edges(source, edges, nodes)
    kw = {"name": data.get("name", ""), "description": data.get("description", "")}
    if path_cap is not None:
        kw["path_cap"] = path_cap
    scenario = Scenario(graph, tuple(defenders), **kw)
    diags = validate(graph, scenario)
    if any(d.severity == "error" for d in diags):
        return None, diags
    return scenario, diags


def parse_scenario(text: str, name: str = "<string>") -> Scenario:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        d = Diagnostic("error", exc.msg)
        src = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        rendered = f"{name}:{exc.lineno}:{exc.colno}: {d}\n    {src}\n    {' ' * (exc.colno - 1)}^"
        raise ScenarioFileError("parse", [d], rendered) from None
    except ValueError as exc:
        d = Diagnostic("error", str(exc))
        raise ScenarioFileError("parse", [d], f"{name}: {d}") from None
    scenario, diags = scenario_from_dict(data)
    if scenario is None:
        kind = "version" if any("schema_version" in x.message for x in diags) else "validation"
        errors = [x for x in diags if x.severity == "error"]
        raise ScenarioFileError(kind, diags, render_diagnostics(name, text, errors))
    return scenario


def load_scenario(path) -> Scenario:
    """Read, parse and validate a scenario file.

    Raises :class:`ScenarioFileError` with line-annotated diagnostics, or
    ``OSError`` when the file cannot be read.
    """
    path = Path(path)
    return parse_scenario(path.read_text(), str(path))


def dumps_scenario(scenario: Scenario) -> str:
    """JSON text with one edge, defender header or asset per line."""
    d = scenario.to_dict()
    j = json.dumps
    lines = ["{"]
    for key in ("schema_version", "name", "description", "source"):
        if key in d:
            lines.append(f"  {j(key)}: {j(d[key])},")
    lines.append(f'  "nodes": {j(d["nodes"])},')
    edges = [f"    {j(e)}" for e in d["edges"]]
    lines.append('  "edges": [\n' + ",\n".join(edges) + "\n  ],")
    defs = []
    for df in d["defenders"]:
        assets = ",\n".join(f"        {j(a)}" for a in df["assets"])
        head = f'      "id": {j(df["id"])}, "budget": {j(df["budget"])}, "alpha": {j(df["alpha"])},'
        defs.append("    {\n" + head + '\n      "assets": [\n' + assets + "\n      ]\n    }")
    lines.append('  "defenders": [\n' + ",\n".join(defs) + "\n  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(scenario))


# -- reports ------------------------------------------------------------------

def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else "/".join(map(str, k)): _jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def make_report(kind: str, scenario: Scenario, result: dict, *, seed=None, config=None,
                timings: dict | None = None) -> dict:
    return {
        "report": kind,
        "version": __version__,
        "scenario": scenario.to_dict(),
        "scenario_digest": scenario.digest(),
        "metadata": {
            "seed": seed,
            "config": _jsonable(config) if config is not None else None,
            "timings": timings or {},
            "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        },
        "result": _jsonable(result),
    }


def write_report(report: dict, path) -> None:
    Path(path).write_text(json.dumps(report, indent=2) + "\n")


def load_report(path) -> dict:
    return json.loads(Path(path).read_text())


def report_scenario(report: dict) -> Scenario:
    scenario, diags = scenario_from_dict(report["scenario"])
    if scenario is None:
        raise ScenarioError(diags)
    return scenario


def reverify_report(report: dict, tol: float = 1e-6, config=None) -> list[dict]:
    """Re-run the PNE check on every equilibrium profile stored in ``report``."""
    from .equilibrium import verify_pne

    scenario = report_scenario(report)
    out = []
    for eq in report["result"].get("equilibria", []):
        res = verify_pne(scenario, np.asarray(eq["profile"], dtype=float), config)
        out.append(res)
    bad = [r for r in out if max(r.values(), default=0.0) > tol]
    if bad:
        raise AssertionError(f"{len(bad)} stored profile(s) fail re-verification: {bad}")
    return out


# -- sweep CSV ----------------------------------------------------------------

def _row_values(row) -> tuple:
    if hasattr(row, "values") and callable(row.values) and not isinstance(row, dict):
        return tuple(row.values())
    if isinstance(row, dict):
        return tuple(row[c] for c in SWEEP_HEADER)
    return tuple(row)


def emit_sweep_csv(rows: Iterable, path) -> None:
    """Write sweep rows under the fixed header; floats are written with ``repr``
    so reading them back gives identical doubles."""
    rows = [_row_values(r) for r in rows]
    if not rows:
        raise ValueError("sweep table is empty")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for r in rows:
            if len(r) != len(SWEEP_HEADER):
                raise ValueError(f"row has {len(r)} fields, expected {len(SWEEP_HEADER)}")
            w.writerow([repr(float(v)) for v in r])


def read_sweep_csv(path) -> list[tuple[float, ...]]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if tuple(header) != SWEEP_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [tuple(float(v) for v in r) for r in rd]
