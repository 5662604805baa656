"""Replicated network construction.

Every node ``v`` gets ``ell`` copies with dense ids ``v + i * n`` for copy
index ``i`` in ``0..ell-1``. An arc whose endpoints share a region is copied
index-wise (``ell`` arcs); an arc crossing regions connects every pair of
copies (``ell**2`` arcs). With the singleton partition every arc crosses, which
gives the full (strong) construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property

from .graph import Network
from .partition import Partition, cut_stats, singleton_partition


class FaultKind(str, Enum):
    OMISSION = "omission"
    BYZANTINE = "byzantine"

    @classmethod
    def parse(cls, value: "str | FaultKind") -> FaultKind:
        if isinstance(value, FaultKind):
            return value
        kind = _ALIASES.get(value.lower())
        if kind is not None:
            return cls(kind)
        raise ValueError(f"unknown fault model {value!r}; expected 'omission' or 'byzantine'")


_ALIASES = {"omission": "omission", "om": "omission", "byzantine": "byzantine", "byz": "byzantine"}


@dataclass(frozen=True)
class FaultModel:
    kind: FaultKind
    p: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", FaultKind.parse(self.kind))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"fault probability must lie in [0, 1], got {self.p}")


def copies_for(f: int, kind: FaultKind | str) -> int:
    """Copies per node needed to tolerate ``f`` faults: ``f+1`` or ``2f+1``."""
    kind = FaultKind.parse(kind)
    return f + 1 if kind is FaultKind.OMISSION else 2 * f + 1


@dataclass(frozen=True)
class Overheads:
    nu: Fraction
    eta: Fraction

    def row(self) -> dict:
        return {"nu": float(self.nu), "eta": float(self.eta)}


@dataclass(frozen=True)
class ReinforcedNetwork:
    base: Network
    ell: int
    f: int
    model: FaultKind
    partition: Partition
    arcs: tuple[tuple[int, int], ...]

    @property
    def n_copies(self) -> int:
        return self.base.n * self.ell

    def copy_id(self, v: int, i: int) -> int:
        return v + i * self.base.n

    def project(self, x: int) -> int:
        return x % self.base.n

    def copy_index(self, x: int) -> int:
        return x // self.base.n

    @property
    def strong(self) -> bool:
        return self.partition.is_singleton()

    def crosses(self, u: int, v: int) -> bool:
        reg = self.partition.region_of
        return reg[u] != reg[v]

    @cached_property
    def senders(self) -> dict[tuple[int, int], tuple[int, ...]]:
        """Map ``((w, v), i)`` to the copy indices ``j`` with arc ``(w_j, v_i)``."""
        out: dict = {}
        everyone = tuple(range(self.ell))
        for w, v in self.base.arcs:
            cross = self.crosses(w, v)
            for i in range(self.ell):
                out[(w, v), i] = everyone if cross else (i,)
        return out

    @cached_property
    def in_plan(self) -> tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]:
        """Per copy id ``x = v_i``: ``(w, sender copy ids)`` for each in-neighbour ``w`` of ``v``."""
        n = self.base.n
        senders = self.senders
        plan = []
        for x in range(self.n_copies):
            v, i = x % n, x // n
            plan.append(tuple((w, tuple(w + j * n for j in senders[(w, v), i])) for w in self.base.in_neighbors[v]))
        return tuple(plan)

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "ell": self.ell,
            "f": self.f,
            "model": self.model.value,
            "partition": self.partition.to_json(),
            "arcs": [list(a) for a in self.arcs],
        }

    @classmethod
    def from_json(cls, data: dict) -> ReinforcedNetwork:
        base = Network.from_json(data["base"])
        part = Partition.from_json(data["partition"])
        rn = _construct(base, part, data["f"], FaultKind.parse(data["model"]), data["ell"])
        if [list(a) for a in rn.arcs] != sorted(list(a) for a in data["arcs"]):
            raise ValueError("arc list does not match the construction for this base/partition")
        return rn

    def dumps(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))


def _construct(g: Network, part: Partition, f: int, kind: FaultKind, ell: int) -> ReinforcedNetwork:
    if part.n != g.n:
        raise ValueError(f"partition covers {part.n} nodes but the network has {g.n}")
    n = g.n
    reg = part.region_of
    arcs = []
    for v, w in g.arcs:
        if reg[v] == reg[w]:
            arcs.extend((v + i * n, w + i * n) for i in range(ell))
        else:
            arcs.extend((v + i * n, w + j * n) for i in range(ell) for j in range(ell))
    return ReinforcedNetwork(base=g, ell=ell, f=f, model=kind, partition=part, arcs=tuple(sorted(arcs)))


def reinforce_partitioned(g: Network, part: Partition, f: int, model: FaultKind | str) -> ReinforcedNetwork:
    """Partition-aware replication tolerating ``f`` faulty copy-sets per region."""
    if f < 1:
        raise ValueError(f"fault parameter f must be >= 1, got {f}")
    kind = FaultKind.parse(model)
    return _construct(g, part, f, kind, copies_for(f, kind))


def reinforce_strong(g: Network, f: int, model: FaultKind | str) -> ReinforcedNetwork:
    """Full replication: all ``ell**2`` copies of every arc."""
    return reinforce_partitioned(g, singleton_partition(g), f, model)


def replicate(g: Network, part: Partition, f: int, model: FaultKind | str) -> ReinforcedNetwork:
    """Like :func:`reinforce_partitioned` but also accepts ``f = 0`` (the original network)."""
    if f < 0:
        raise ValueError(f"fault parameter f must be >= 0, got {f}")
    kind = FaultKind.parse(model)
    return _construct(g, part, f, kind, copies_for(f, kind))


def overheads(rn: ReinforcedNetwork) -> Overheads:
    m = rn.base.m
    eta = Fraction(len(rn.arcs), m) if m else Fraction(rn.ell)
    return Overheads(nu=Fraction(rn.n_copies, rn.base.n), eta=eta)


def predicted_eta(g: Network, part: Partition, ell: int) -> Fraction:
    """Edge overhead ``(1 - eps) * ell + eps * ell**2`` with ``eps`` over arcs.

    For networks whose arcs come in opposing pairs this equals the formula
    evaluated with the undirected cut fraction of :func:`cut_stats`.
    """
    if not g.m:
        return Fraction(ell)
    reg = part.region_of
    cross = sum(1 for u, v in g.arcs if reg[u] != reg[v])
    eps = Fraction(cross, g.m)
    return (1 - eps) * ell + eps * ell * ell


def undirected_eta(g: Network, part: Partition, ell: int) -> Fraction:
    eps = cut_stats(g, part).epsilon
    return (1 - eps) * ell + eps * ell * ell
