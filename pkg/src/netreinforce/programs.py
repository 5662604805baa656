"""Routing programs: per-node synchronous automata run by the simulator.

A round consists of a send phase followed by a receive phase. In round
``r`` every node emits ``send(node, r, state)`` (a mapping from out-neighbour
to message bytes; omitted neighbours get nothing) and then moves to
``receive(node, r, state, inbox)`` where ``inbox`` maps in-neighbours to the
bytes they sent this round.

Programs must be deterministic and their states immutable and hashable:
copies of a node are compared against the fault-free run by ``==``.
Randomised programs draw from :func:`shared_random`, which depends only on
``(seed, node, round)`` so every copy of a node sees the same stream.
"""

from __future__ import annotations

import hashlib
import random
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .graph import Network

State = Hashable
Message = bytes


def _digest(*parts) -> int:
    return int.from_bytes(hashlib.blake2b(repr(parts).encode(), digest_size=8).digest(), "big")


def shared_random(seed: int, node: int, rnd: int) -> random.Random:
    """RNG stream shared by all copies of ``node`` in round ``rnd``."""
    return random.Random(_digest("shared", seed, node, rnd))


class RoutingProgram(ABC):
    """Scheduling algorithm for a network: what each node sends and how it updates."""

    graph: Network

    @abstractmethod
    def init(self, node: int) -> State: ...

    @abstractmethod
    def send(self, node: int, rnd: int, state: State) -> Mapping[int, Message]: ...

    @abstractmethod
    def receive(self, node: int, rnd: int, state: State, inbox: Mapping[int, Message]) -> State: ...

    @property
    def horizon(self) -> int:
        """Rounds needed for the program's demands to complete."""
        return 1


def _bfs_depth(g: Network, sources: Iterable[int]) -> int:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        x = queue.popleft()
        for y in g.out_neighbors[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return max(dist.values(), default=0)


class Flood(RoutingProgram):
    """Every node holding the token forwards it on all out-arcs, every round."""

    def __init__(self, graph: Network, sources: Sequence[int] = (0,), token: bytes = b"token"):
        self.graph = graph
        self.sources = frozenset(sources)
        self.token = token

    def init(self, node):
        return node in self.sources

    def send(self, node, rnd, state):
        if not state:
            return {}
        return {w: self.token for w in self.graph.out_neighbors[node]}

    def receive(self, node, rnd, state, inbox):
        return state or any(m == self.token for m in inbox.values())

    @property
    def horizon(self) -> int:
        return max(1, _bfs_depth(self.graph, self.sources))


@dataclass(frozen=True)
class Route:
    nodes: tuple[int, ...]
    payload: bytes
    start: int = 1  # round of the first hop


class PathRouting(RoutingProgram):
    """Store-and-forward along fixed routes, one hop per round.

    Hop ``t`` of a route (``nodes[t] -> nodes[t+1]``) happens in round
    ``start + t``. Several payloads crossing one arc in the same round are
    joined by newlines into a single message.
    """

    def __init__(self, graph: Network, routes: Iterable[Route]):
        self.graph = graph
        self.routes = tuple(routes)
        arcs = set(graph.arcs)
        for route in self.routes:
            if b"\n" in route.payload:
                raise ValueError("payloads must not contain newlines")
            if route.start < 1:
                raise ValueError("routes start in round 1 or later")
            for u, v in zip(route.nodes, route.nodes[1:]):
                if (u, v) not in arcs:
                    raise ValueError(f"route uses missing arc ({u}, {v})")

    @classmethod
    def single(cls, graph: Network, nodes: Sequence[int], payload: bytes = b"msg") -> PathRouting:
        return cls(graph, [Route(tuple(nodes), payload)])

    def init(self, node):
        return frozenset(r.payload for r in self.routes if r.nodes and r.nodes[0] == node)

    def send(self, node, rnd, state):
        out: dict[int, list[bytes]] = {}
        for r in self.routes:
            t = rnd - r.start
            if 0 <= t < len(r.nodes) - 1 and r.nodes[t] == node and r.payload in state:
                out.setdefault(r.nodes[t + 1], []).append(r.payload)
        return {w: b"\n".join(sorted(ps)) for w, ps in out.items()}

    def receive(self, node, rnd, state, inbox):
        if not inbox:
            return state
        got = set(state)
        for msg in inbox.values():
            got.update(msg.split(b"\n"))
        return frozenset(got)

    @property
    def horizon(self) -> int:
        return max([r.start + len(r.nodes) - 2 for r in self.routes if len(r.nodes) > 1], default=1)


def parse_routes(text: str, graph: Network) -> list[Route]:
    """Read routes, one per line: ``[START:] node node ...`` (labels or indices)."""
    routes = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        start = 1
        head, sep, rest = line.partition(":")
        if sep and head.strip().isdigit() and rest.strip():
            start, line = int(head), rest
        try:
            nodes = tuple(graph.node_index(tok) for tok in line.split())
        except KeyError as exc:
            raise ValueError(f"line {lineno}: {exc.args[0]}") from None
        routes.append(Route(nodes, f"route{len(routes)}".encode(), start))
    return routes


class RandomAutomaton(RoutingProgram):
    """Pseudo-random finite automaton, used to exercise arbitrary schedules."""

    def __init__(self, graph: Network, seed: int, n_states: int = 4, send_prob: float = 0.6, rounds: int = 5):
        self.graph = graph
        self.seed = seed
        self.n_states = n_states
        self.send_prob = send_prob
        self.rounds = rounds

    def init(self, node):
        return _digest(self.seed, "init", node) % self.n_states

    def send(self, node, rnd, state):
        rng = shared_random(self.seed, node, rnd)
        out = {}
        for w in self.graph.out_neighbors[node]:
            roll = rng.random()
            word = _digest(self.seed, "msg", node, rnd, state, w) % 3
            if roll < self.send_prob:
                out[w] = b"m%d" % word
        return out

    def receive(self, node, rnd, state, inbox):
        return _digest(self.seed, "step", node, rnd, state, sorted(inbox.items())) % self.n_states

    @property
    def horizon(self) -> int:
        return self.rounds


class Silent(RoutingProgram):
    """Sends nothing; the state never changes."""

    def __init__(self, graph: Network):
        self.graph = graph

    def init(self, node):
        return 0

    def send(self, node, rnd, state):
        return {}

    def receive(self, node, rnd, state, inbox):
        return state
