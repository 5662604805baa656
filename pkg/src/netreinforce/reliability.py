"""Closed-form failure probabilities of replicated designs.

A design is summarised by its region sizes ``l_1..l_k``, the fault parameter
``f`` and the fault model. With ``q_i = (1-p)**l_i`` the probability that a
single copy of region ``i`` is entirely fault-free:

* omission (``f+1`` copies): a region fails when none of its copies is clean,
  probability ``(1 - q_i)**(f+1)``;
* Byzantine (``2f+1`` copies): a region fails when at most ``f`` copies are
  clean, probability ``P[Binomial(2f+1, q_i) <= f]``.

The network fails when any region fails. These are exactly the complements of
the sufficient conditions checked by
:func:`netreinforce.simulate.check_lemma_condition`, so ``1 - failure`` is a
lower bound on the true success probability of the simulation.

Everything is evaluated through ``log1p``/``expm1`` so that tiny ``p`` (and
large ``n``) do not round to zero.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, NamedTuple, Sequence

from .graph import Network
from .partition import PARTITIONERS, Partition, cut_stats, whole_partition
from .reinforce import FaultKind, overheads, replicate

DEFAULT_TARGET = 0.01
BISECT_TOL = 1e-12
BISECT_MAX_ITER = 200


def _dirty(p: float, size: int) -> float:
    """``1 - (1-p)**size``: probability that a copy of a region holds a fault."""
    if p >= 1.0:
        return 1.0
    return -math.expm1(size * math.log1p(-p))


def _combine(region_failures: Iterable[tuple[float, int]]) -> float:
    """``1 - prod (1 - x_i)**mult_i`` evaluated in log space."""
    log_ok = 0.0
    for x, mult in region_failures:
        if x >= 1.0:
            return 1.0
        log_ok += mult * math.log1p(-x)
    return -math.expm1(log_ok)


def _check(sizes: Sequence[int], f: int, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    if f < 0:
        raise ValueError("f must be non-negative")
    if any(s < 1 for s in sizes):
        raise ValueError("region sizes must be positive")


def failure_om(sizes: Sequence[int], f: int, p: float) -> float:
    """Failure probability of the ``f+1``-copy omission design."""
    _check(sizes, f, p)
    if p == 0.0:
        return 0.0
    return _combine((_dirty(p, size) ** (f + 1), mult) for size, mult in Counter(sizes).items())


def _binom_cdf(ell: int, f: int, q: float, one_minus_q: float) -> float:
    return sum(math.comb(ell, j) * q**j * one_minus_q ** (ell - j) for j in range(f + 1))


def failure_byz(sizes: Sequence[int], f: int, p: float) -> float:
    """Failure probability of the ``2f+1``-copy Byzantine design."""
    _check(sizes, f, p)
    if p == 0.0:
        return 0.0
    ell = 2 * f + 1

    def region(size: int) -> float:
        dirty = _dirty(p, size)
        return _binom_cdf(ell, f, 1.0 - dirty, dirty)

    return _combine((region(size), mult) for size, mult in Counter(sizes).items())


def failure(sizes: Sequence[int], f: int, model: FaultKind | str, p: float) -> float:
    kind = FaultKind.parse(model)
    return failure_om(sizes, f, p) if kind is FaultKind.OMISSION else failure_byz(sizes, f, p)


class Threshold(NamedTuple):
    p: float
    saturated: bool  # True when even p = 1 meets the target


def bisect_max_p(fail: Callable[[float], float], target: float) -> Threshold:
    """Largest ``p`` in ``[0, 1]`` with ``fail(p) <= target`` for monotone ``fail``."""
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    if fail(1.0) <= target:
        return Threshold(1.0, True)
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= BISECT_TOL * hi:
            break
        mid = 0.5 * (lo + hi)
        if fail(mid) <= target:
            lo = mid
        else:
            hi = mid
    return Threshold(lo, False)


def max_tolerable_p(
    sizes: Sequence[int], f: int, model: FaultKind | str = FaultKind.OMISSION, target: float = DEFAULT_TARGET
) -> Threshold:
    kind = FaultKind.parse(model)
    _check(sizes, f, 0.0)
    return bisect_max_p(lambda p: failure(sizes, f, kind, p), target)


def naive_replication_p(n: int, k_copies: int, target: float = DEFAULT_TARGET) -> float:
    """Tolerable ``p`` when running ``k_copies`` independent copies of an ``n``-node network.

    The system fails only if every copy contains a faulty node:
    ``(1 - (1-p)**n) ** k_copies``.
    """
    if k_copies < 1 or n < 1:
        raise ValueError("need n >= 1 and k_copies >= 1")
    return bisect_max_p(lambda p: _dirty(p, n) ** k_copies, target).p


@dataclass(frozen=True)
class ReliabilityReport:
    failure_prob: float
    max_p: float
    target: float
    saturated: bool = False


def analyze(
    sizes: Sequence[int],
    f: int,
    model: FaultKind | str,
    p: float,
    target: float = DEFAULT_TARGET,
) -> ReliabilityReport:
    thr = max_tolerable_p(sizes, f, model, target)
    return ReliabilityReport(failure(sizes, f, model, p), thr.p, target, thr.saturated)


def hypercube_threshold_factor(h: int, d: int) -> float:
    """Degradation ``h**(d - 1/2)`` of the tolerable ``p`` when regions are ``h``-ary subcubes."""
    return h ** (d - 0.5)


def segmented_path_delivery(n: int, h: int, p: float) -> float:
    """Delivery probability along a duplicated ``n``-path that crosses over every ``h`` hops."""
    if n % h:
        raise ValueError("segment length must divide the path length")
    return 1.0 - failure_om([h] * (n // h), 1, p)


def duplicated_path_survival(n: int, p: float) -> float:
    """Probability that at least one of two disjoint ``n``-node path copies is fault-free."""
    return 1.0 - _dirty(p, n) ** 2


# -- sweeps -----------------------------------------------------------------

SWEEP_COLUMNS = ("scheme", "f", "max_region", "k", "r_min", "r_max", "epsilon", "nu", "eta", "max_p")


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    f: int
    max_region: int
    k: int
    r_min: int
    r_max: int
    epsilon: float
    nu: float
    eta: float
    max_p: float

    def as_dict(self) -> dict:
        return asdict(self)


def design_row(g: Network, part: Partition, f: int, model: FaultKind | str, target: float, max_region: int) -> SweepRow:
    """Overheads and tolerable ``p`` of one replicated design."""
    kind = FaultKind.parse(model)
    rn = replicate(g, part, f, kind)
    ov = overheads(rn)
    cs = cut_stats(g, part)
    thr = max_tolerable_p(part.sizes, f, kind, target)
    return SweepRow(
        scheme="reinforced",
        f=f,
        max_region=max_region,
        k=cs.k,
        r_min=cs.r_min,
        r_max=cs.r_max,
        epsilon=float(cs.epsilon),
        nu=float(ov.nu),
        eta=float(ov.eta),
        max_p=thr.p,
    )


def pareto_sweep(
    g: Network,
    f_values: Iterable[int],
    model: FaultKind | str = FaultKind.OMISSION,
    target: float = DEFAULT_TARGET,
    max_regions: Iterable[int] | None = None,
    partitioner: str | Callable[[Network, int], Partition] = "spectral",
) -> list[SweepRow]:
    """Evaluate every ``(f, max_region)`` design; rows sorted by edge overhead.

    ``f = 0`` stands for the unmodified network and yields a single row
    whatever the grid.
    """
    kind = FaultKind.parse(model)
    f_values = sorted(set(f_values))
    if not f_values:
        return []
    part_fn = PARTITIONERS[partitioner] if isinstance(partitioner, str) else partitioner
    grid = sorted(set(max_regions)) if max_regions is not None else list(range(1, g.n + 1))
    parts = {mr: part_fn(g, mr) for mr in grid} if any(f > 0 for f in f_values) else {}
    rows = []
    for f in f_values:
        if f == 0:
            rows.append(design_row(g, whole_partition(g), 0, kind, target, g.n))
            continue
        for mr in grid:
            rows.append(design_row(g, parts[mr], f, kind, target, mr))
    rows.sort(key=lambda r: (r.eta, r.f, r.max_region))
    return rows


def naive_rows(g: Network, copies: Iterable[int], target: float = DEFAULT_TARGET) -> list[SweepRow]:
    """Baseline rows for running ``k`` independent copies of the whole network."""
    rows = []
    for k in sorted(set(copies)):
        rows.append(
            SweepRow(
                scheme="naive",
                f=k - 1,
                max_region=g.n,
                k=1,
                r_min=g.n,
                r_max=g.n,
                epsilon=0.0,
                nu=float(k),
                eta=float(k),
                max_p=naive_replication_p(g.n, k, target),
            )
        )
    return rows
