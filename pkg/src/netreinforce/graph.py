"""Directed network model, GraphML ingestion and synthetic topologies.

Nodes are dense integers ``0..n-1``. Undirected input edges are expanded to
two opposing arcs, self-loops are dropped and parallel edges collapsed, so a
:class:`Network` is always a simple digraph.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence
from xml.parsers import expat

from .errors import DanglingReferenceError, GraphFormatError

Arc = tuple[int, int]


@dataclass(frozen=True)
class Network:
    """Simple directed graph with optional per-node labels.

    Attributes:
        n: number of nodes.
        arcs: sorted tuple of ``(u, v)`` pairs, no self-loops or duplicates.
        labels: node labels from the source document, or ``None``.
        origin: provenance metadata; not part of equality.
    """

    n: int
    arcs: tuple[Arc, ...]
    labels: tuple[str, ...] | None = None
    origin: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("node count must be non-negative")
        seen = set()
        for u, v in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"arc ({u}, {v}) has an endpoint outside 0..{self.n - 1}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            if (u, v) in seen:
                raise ValueError(f"duplicate arc ({u}, {v})")
            seen.add((u, v))
        if self.labels is not None:
            if len(self.labels) != self.n:
                raise ValueError("labels must have one entry per node")
            if len(set(self.labels)) != self.n:
                raise ValueError("labels must be unique")

    @classmethod
    def from_arcs(
        cls,
        n: int,
        arcs: Iterable[Arc],
        labels: Sequence[str] | None = None,
        origin: dict | None = None,
    ) -> Network:
        """Build a network, dropping self-loops and collapsing duplicates."""
        clean = sorted({(int(u), int(v)) for u, v in arcs if u != v})
        return cls(
            n=n,
            arcs=tuple(clean),
            labels=tuple(labels) if labels is not None else None,
            origin=dict(origin or {}),
        )

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Arc], labels: Sequence[str] | None = None) -> Network:
        """Build a network from undirected edges (each becomes two arcs)."""
        arcs = []
        for u, v in edges:
            arcs.append((u, v))
            arcs.append((v, u))
        return cls.from_arcs(n, arcs, labels, origin={"undirected": True})

    @property
    def m(self) -> int:
        return len(self.arcs)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.arcs:
            out[u].append(v)
        return tuple(tuple(x) for x in out)

    @cached_property
    def in_neighbors(self) -> tuple[tuple[int, ...], ...]:
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.arcs:
            inc[v].append(u)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def undirected_edges(self) -> tuple[Arc, ...]:
        """Undirected support: each unordered pair once, as ``(min, max)``."""
        return tuple(sorted({(min(u, v), max(u, v)) for u, v in self.arcs}))

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Adjacency of the undirected support."""
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for u, v in self.undirected_edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(tuple(sorted(a)) for a in adj)

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def node_index(self, name: str | int) -> int:
        """Resolve a node label (or decimal index) to its dense id."""
        if self.labels is not None and str(name) in self.labels:
            return self.labels.index(str(name))
        try:
            idx = int(name)
        except (TypeError, ValueError):
            raise KeyError(f"unknown node {name!r}") from None
        if not 0 <= idx < self.n:
            raise KeyError(f"unknown node {name!r}")
        return idx

    def components(self, nodes: Iterable[int] | None = None) -> list[list[int]]:
        """Connected components of the undirected support induced by ``nodes``."""
        pool = set(range(self.n)) if nodes is None else set(nodes)
        comps = []
        for start in sorted(pool):
            if start not in pool:
                continue
            pool.discard(start)
            comp = [start]
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for y in self.neighbors[x]:
                    if y in pool:
                        pool.discard(y)
                        comp.append(y)
                        queue.append(y)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n > 0 and len(self.components()) == 1

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "arcs": [list(a) for a in self.arcs],
            "labels": list(self.labels) if self.labels is not None else None,
        }

    @classmethod
    def from_json(cls, data: dict) -> Network:
        return cls.from_arcs(
            data["n"], (tuple(a) for a in data["arcs"]), data.get("labels"), origin={"format": "json"}
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def _local(tag: str) -> str:
    return tag.rsplit(":", 1)[-1].rsplit(" ", 1)[-1]


def parse_graphml(text: str | bytes, source: str | None = None) -> Network:
    """Parse the node/edge subset of a GraphML document.

    Node order follows document order. The ``edgedefault`` attribute of the
    first ``<graph>`` element decides edge direction (undirected when
    absent); a per-edge ``directed`` attribute overrides it.
    """
    node_ids: list[str] = []
    index: dict[str, int] = {}
    raw_edges: list[tuple[str, str, bool, int]] = []
    state = {"graphs": 0, "default_directed": False, "depth": 0}
    parser = expat.ParserCreate()

    def start(name: str, attrs: dict) -> None:
        tag = _local(name)
        line = parser.CurrentLineNumber
        if tag == "graph":
            state["graphs"] += 1
            if state["graphs"] > 1:
                raise GraphFormatError("nested or multiple <graph> elements are not supported", line, source)
            state["default_directed"] = attrs.get("edgedefault", "undirected") == "directed"
        elif tag == "node":
            nid = attrs.get("id")
            if nid is None:
                raise GraphFormatError("<node> without id", line, source)
            if nid in index:
                raise GraphFormatError(f"duplicate node id {nid!r}", line, source)
            index[nid] = len(node_ids)
            node_ids.append(nid)
        elif tag == "edge":
            s, t = attrs.get("source"), attrs.get("target")
            if s is None or t is None:
                raise GraphFormatError("<edge> needs source and target", line, source)
            directed = attrs.get("directed")
            is_dir = state["default_directed"] if directed is None else directed == "true"
            raw_edges.append((s, t, is_dir, line))

    parser.StartElementHandler = start
    try:
        parser.Parse(text, True)
    except expat.ExpatError as exc:
        raise GraphFormatError(f"malformed XML: {expat.ErrorString(exc.code)}", exc.lineno, source) from None

    if not node_ids:
        raise GraphFormatError("document declares no nodes", None, source)
    arcs = []
    for s, t, is_dir, line in raw_edges:
        for end in (s, t):
            if end not in index:
                raise DanglingReferenceError(f"edge refers to undeclared node {end!r}", line, source)
        u, v = index[s], index[t]
        arcs.append((u, v))
        if not is_dir:
            arcs.append((v, u))
    origin = {"format": "graphml", "undirected": not state["default_directed"]}
    if source:
        origin["source"] = source
    return Network.from_arcs(len(node_ids), arcs, node_ids, origin)


def build_hypercube(q: int, d: int, wrap: bool = False) -> Network:
    """``q``-ary ``d``-dimensional grid on ``[q]^d`` (torus when ``wrap``).

    Node ``(c_0, ..., c_{d-1})`` has index ``sum(c_i * q**(d-1-i))``, i.e.
    lexicographic order.
    """
    if q < 2 or d < 1:
        raise ValueError(f"need q >= 2 and d >= 1, got q={q}, d={d}")
    strides = [q ** (d - 1 - i) for i in range(d)]
    edges = []
    for coords in itertools.product(range(q), repeat=d):
        idx = sum(c * s for c, s in zip(coords, strides))
        for i in range(d):
            if coords[i] + 1 < q:
                edges.append((idx, idx + strides[i]))
            elif wrap:
                edges.append((idx, idx - (q - 1) * strides[i]))
    net = Network.from_edges(q**d, edges)
    net.origin.update({"generator": f"hypercube:{q}:{d}{':wrap' if wrap else ''}", "q": q, "d": d})
    return net


def build_path(n: int) -> Network:
    """Unidirectional path ``0 -> 1 -> ... -> n-1``."""
    if n < 1:
        raise ValueError("path needs at least one node")
    return Network.from_arcs(n, [(i, i + 1) for i in range(n - 1)], origin={"generator": f"path:{n}"})


def bundled_graphml(name: str) -> str:
    """Text of a GraphML fixture shipped in ``netreinforce/data``."""
    from importlib.resources import files

    return files("netreinforce.data").joinpath(f"{name}.graphml").read_text()


def load_network(spec: str) -> Network:
    """Resolve a file path or generator spec to a :class:`Network`.

    Accepted generator specs: ``path:N``, ``hypercube:Q:D[:wrap]`` and
    ``example:NAME`` for the bundled fixtures (``small5``, ``net33``).
    """
    head, _, rest = spec.partition(":")
    if head == "path" and rest:
        return build_path(int(rest))
    if head == "hypercube" and rest:
        parts = rest.split(":")
        if len(parts) not in (2, 3) or (len(parts) == 3 and parts[2] != "wrap"):
            raise ValueError(f"bad hypercube spec {spec!r}; expected hypercube:Q:D[:wrap]")
        return build_hypercube(int(parts[0]), int(parts[1]), wrap=len(parts) == 3)
    if head == "example" and rest:
        return parse_graphml(bundled_graphml(rest), source=spec)
    path = Path(spec)
    text = path.read_text()
    if path.suffix == ".json":
        try:
            return Network.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise GraphFormatError(exc.msg, exc.lineno, spec) from None
    return parse_graphml(text, source=spec)
