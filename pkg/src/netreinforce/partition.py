"""Node partitions into regions and their cut statistics.

Three partitioners are provided: axis-aligned subcubes for grids, recursive
spectral bisection for arbitrary graphs, and an exhaustive search that is
exact on graphs with at most 13 nodes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import SizeLimitError
from .graph import Network

BRUTE_FORCE_MAX_NODES = 13


@dataclass(frozen=True)
class Partition:
    """Disjoint regions covering nodes ``0..n-1``.

    Regions are stored sorted internally and ordered by their smallest node,
    so two partitions with the same blocks compare equal.
    """

    regions: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        canon = tuple(sorted((tuple(sorted(r)) for r in self.regions), key=lambda r: r[:1]))
        object.__setattr__(self, "regions", canon)
        if not canon:
            raise ValueError("partition needs at least one region")
        flat = [v for r in canon for v in r]
        if any(len(r) == 0 for r in canon):
            raise ValueError("regions must be non-empty")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("regions must be disjoint and cover 0..n-1")

    @classmethod
    def from_labels(cls, region_of: Sequence[int]) -> Partition:
        groups: dict[int, list[int]] = {}
        for v, r in enumerate(region_of):
            groups.setdefault(r, []).append(v)
        return cls(tuple(tuple(g) for g in groups.values()))

    @property
    def n(self) -> int:
        return sum(len(r) for r in self.regions)

    @property
    def k(self) -> int:
        return len(self.regions)

    @property
    def sizes(self) -> list[int]:
        return [len(r) for r in self.regions]

    @cached_property
    def region_of(self) -> tuple[int, ...]:
        out = [0] * self.n
        for idx, r in enumerate(self.regions):
            for v in r:
                out[v] = idx
        return tuple(out)

    def is_singleton(self) -> bool:
        return all(len(r) == 1 for r in self.regions)

    def to_json(self) -> dict:
        return {"regions": [list(r) for r in self.regions]}

    @classmethod
    def from_json(cls, data: dict) -> Partition:
        return cls(tuple(tuple(r) for r in data["regions"]))


@dataclass(frozen=True)
class CutStats:
    k: int
    r_min: int
    r_max: int
    cut_edges: int
    total_edges: int

    @property
    def epsilon(self) -> Fraction:
        """Fraction of undirected edges whose endpoints lie in different regions."""
        if self.total_edges == 0:
            return Fraction(0)
        return Fraction(self.cut_edges, self.total_edges)

    def row(self) -> dict:
        return {
            "k": self.k,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "cut_edges": self.cut_edges,
            "epsilon": float(self.epsilon),
        }


def _check_cover(g: Network, part: Partition) -> None:
    if part.n != g.n:
        raise ValueError(f"partition covers {part.n} nodes but the network has {g.n}")


def cut_stats(g: Network, part: Partition) -> CutStats:
    _check_cover(g, part)
    reg = part.region_of
    cut = sum(1 for u, v in g.undirected_edges if reg[u] != reg[v])
    sizes = part.sizes
    return CutStats(
        k=part.k,
        r_min=min(sizes),
        r_max=max(sizes),
        cut_edges=cut,
        total_edges=len(g.undirected_edges),
    )


def singleton_partition(g: Network) -> Partition:
    return Partition(tuple((v,) for v in range(g.n)))


def whole_partition(g: Network) -> Partition:
    """One region holding every node (naive replication when reinforced)."""
    return Partition((tuple(range(g.n)),))


def partition_hypercube(q: int, d: int, h: int) -> Partition:
    """Split ``[q]^d`` into ``(q/h)^d`` axis-aligned subcubes of side ``h``.

    Node numbering matches :func:`netreinforce.graph.build_hypercube`.
    """
    if q < 2 or d < 1:
        raise ValueError(f"need q >= 2 and d >= 1, got q={q}, d={d}")
    if h < 1 or q % h:
        raise ValueError(f"subcube side h={h} must divide q={q}")
    blocks = q // h
    region_of = []
    for coords in itertools.product(range(q), repeat=d):
        key = 0
        for c in coords:
            key = key * blocks + c // h
        region_of.append(key)
    return Partition.from_labels(region_of)


# -- spectral bisection -----------------------------------------------------

_EIG_REL_TOL = 1e-9
# Rotations tried inside a degenerate Fiedler eigenspace.
_ROTATIONS = 12


def _laplacian(g: Network, nodes: Sequence[int]) -> np.ndarray:
    pos = {v: i for i, v in enumerate(nodes)}
    L = np.zeros((len(nodes), len(nodes)))
    for v in nodes:
        i = pos[v]
        for w in g.neighbors[v]:
            j = pos.get(w)
            if j is not None:
                L[i, j] = -1.0
                L[i, i] += 1.0
    return L


def _split_by(vec: np.ndarray) -> np.ndarray:
    """Boolean mask of the non-negative side; median split if one side is empty."""
    scale = float(np.max(np.abs(vec))) or 1.0
    mask = vec >= -_EIG_REL_TOL * scale
    if mask.all() or not mask.any():
        order = np.argsort(vec, kind="stable")
        mask = np.zeros(len(vec), dtype=bool)
        mask[order[len(vec) // 2 :]] = True
    return mask


def _bisect(g: Network, nodes: list[int]) -> tuple[list[int], list[int]]:
    L = _laplacian(g, nodes)
    w, U = np.linalg.eigh(L)
    tol = _EIG_REL_TOL * max(1.0, float(w[-1]))
    space = [j for j in range(1, len(w)) if abs(w[j] - w[1]) <= tol]
    basis = U[:, space]
    candidates = [basis[:, j] for j in range(basis.shape[1])]
    if basis.shape[1] >= 2:
        for t in range(1, _ROTATIONS):
            a = math.pi * t / _ROTATIONS
            candidates.append(math.cos(a) * basis[:, 0] + math.sin(a) * basis[:, 1])

    edges = [(i, j) for i in range(len(nodes)) for j in range(i + 1, len(nodes)) if L[i, j] != 0]
    best = None
    for vec in candidates:
        mask = _split_by(vec)
        cut = sum(1 for i, j in edges if mask[i] != mask[j])
        score = (cut, abs(2 * int(mask.sum()) - len(nodes)))
        if best is None or score < best[0]:
            best = (score, mask)
    mask = best[1]
    left = [v for v, m in zip(nodes, mask) if m]
    right = [v for v, m in zip(nodes, mask) if not m]
    return left, right


def partition_spectral(g: Network, max_region: int) -> Partition:
    """Recursive spectral bisection until every region has ``<= max_region`` nodes.

    Each oversized region is first split into its connected components; a
    connected one is cut by the sign of its Fiedler vector (eigenvector of
    the second-smallest Laplacian eigenvalue of the induced undirected
    subgraph). Zero entries go to the non-negative side.
    """
    if max_region < 1:
        raise ValueError("max_region must be at least 1")
    if g.n == 0:
        raise ValueError("cannot partition an empty network")
    done: list[list[int]] = []
    pending = [list(range(g.n))]
    while pending:
        region = pending.pop()
        if len(region) <= max_region:
            done.append(region)
            continue
        comps = g.components(region)
        if len(comps) > 1:
            pending.extend(reversed(comps))
            continue
        left, right = _bisect(g, region)
        pending.append(right)
        pending.append(left)
    return Partition(tuple(tuple(r) for r in done))


# -- exhaustive search ------------------------------------------------------


def _regions_connected(g: Network, assign: list[int], k: int) -> bool:
    groups: list[list[int]] = [[] for _ in range(k)]
    for v, r in enumerate(assign):
        groups[r].append(v)
    return all(len(g.components(grp)) == 1 for grp in groups)


def partition_brute_force(g: Network, max_region: int) -> Partition:
    """Optimal partition into connected regions of at most ``max_region`` nodes.

    Minimises the number of cut edges, then the number of regions, then the
    region-assignment string in lexicographic order. Exponential; limited to
    13 nodes.
    """
    if g.n > BRUTE_FORCE_MAX_NODES:
        raise SizeLimitError(f"exhaustive partitioning supports at most {BRUTE_FORCE_MAX_NODES} nodes, got {g.n}")
    if max_region < 1:
        raise ValueError("max_region must be at least 1")
    n = g.n
    if n == 0:
        raise ValueError("cannot partition an empty network")
    earlier = [[u for u in g.neighbors[v] if u < v] for v in range(n)]

    # spectral regions split into components: a feasible starting bound
    seed = partition_spectral(g, max_region)
    seed = Partition(tuple(tuple(c) for r in seed.regions for c in g.components(r)))
    bound = (cut_stats(g, seed).cut_edges, seed.k)
    found: list[int] | None = None
    assign = [0] * n
    sizes: list[int] = []

    def rec(v: int, cut: int) -> None:
        nonlocal bound, found
        k = len(sizes)
        if v == n:
            score = (cut, k)
            if (score < bound or (found is None and score == bound)) and _regions_connected(g, assign, k):
                bound = score
                found = assign.copy()
            return
        for r in range(k + 1):
            if r < k and sizes[r] >= max_region:
                continue
            add = sum(1 for u in earlier[v] if assign[u] != r)
            new_k = k + 1 if r == k else k
            if (cut + add, new_k) > bound:
                continue
            assign[v] = r
            if r == k:
                sizes.append(1)
            else:
                sizes[r] += 1
            rec(v + 1, cut + add)
            if r == k:
                sizes.pop()
            else:
                sizes[r] -= 1

    rec(0, 0)
    assert found is not None, "search must reproduce at least the seed partition"
    return Partition.from_labels(found)


def partition_auto(g: Network, max_region: int) -> Partition:
    """Exhaustive search on small graphs, spectral bisection otherwise."""
    if g.n <= BRUTE_FORCE_MAX_NODES:
        return partition_brute_force(g, max_region)
    return partition_spectral(g, max_region)


PARTITIONERS = {
    "spectral": partition_spectral,
    "brute": partition_brute_force,
    "auto": partition_auto,
}

