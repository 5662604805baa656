"""Round-by-round execution of replicated networks under injected faults.

Every copy ``v_i`` runs the routing program of its original ``v``. The
fault-free run on the base network (:func:`run_reference`) is the ground
truth that copies are compared against.

Omission builds (:func:`run_om`) use know-flags: a copy that misses every
copy of some in-neighbour in a round stops trusting its state and goes
silent for good. Copies that still know send either the program's message or
an explicit "nothing" marker on every copy arc, so silence is detectable.

Byzantine builds (:func:`run_byz`) update from the strict-majority message
among the copies wired to the receiver for each base arc; with no strict
majority the arc is read as carrying nothing.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import statistics
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import NetReinforceError, SizeLimitError
from .graph import Network
from .programs import RoutingProgram
from .reinforce import FaultKind, ReinforcedNetwork

EXHAUSTIVE_MAX_COPIES = 20

OMISSION_ADVERSARIES = ("omit-all", "omit-random", "crash-silent")
BYZANTINE_ADVERSARIES = ("corrupt-all", "corrupt-random", "crash-silent")
DETERMINISTIC_ADVERSARIES = ("omit-all", "crash-silent", "corrupt-all")


class _Bottom:
    __slots__ = ()

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()  # explicit "no message" sent by a copy that knows its state
_MISSING = object()


class ProgramError(NetReinforceError):
    """A routing program raised; carries the node and round."""

    def __init__(self, node: int, rnd: int, exc: BaseException):
        self.node, self.rnd = node, rnd
        super().__init__(f"program failed at node {node}, round {rnd}: {exc!r}")


class SimulationInvariantError(NetReinforceError, AssertionError):
    """Two different messages arrived for one base arc under omission faults."""


def default_adversary(model: FaultKind | str) -> str:
    return "omit-all" if FaultKind.parse(model) is FaultKind.OMISSION else "corrupt-all"


@dataclass(frozen=True)
class FaultScenario:
    faulty: frozenset[int]
    adversary: str = "omit-all"
    seed: int = 0

    def to_json(self) -> dict:
        return {"faulty": sorted(self.faulty), "adversary": self.adversary, "seed": self.seed}

    @classmethod
    def from_json(cls, data: dict) -> FaultScenario:
        return cls(frozenset(data["faulty"]), data.get("adversary", "omit-all"), data.get("seed", 0))


@dataclass
class Trace:
    states: list[list]  # states[r][v], r = 0..rounds
    messages: list[dict]  # messages[r][(u, v)], r = 1..rounds (index 0 unused)

    @property
    def rounds(self) -> int:
        return len(self.states) - 1

    def delivered(self, v: int) -> list[int]:
        """Rounds in which node ``v`` received at least one message."""
        return [r for r in range(1, len(self.messages)) if any(dst == v for _, dst in self.messages[r])]


@dataclass
class SimOutcome:
    success: bool
    strong: bool
    failed_round: int | None
    tracking: list[list[int]]  # tracking[r][v]: copies of v holding the reference state
    know: list[tuple[bool, ...]] | None = None  # per round, per copy (omission only)
    correct: list[tuple[bool, ...]] | None = None  # per round, per copy

    def trace_records(self, rn: ReinforcedNetwork) -> Iterator[dict]:
        """JSON-lines records ``(round, node, copy, know, correct)``."""
        if self.correct is None:
            raise ValueError("outcome was produced without record=True")
        n = rn.base.n
        for r, flags in enumerate(self.correct):
            for x, ok in enumerate(flags):
                yield {
                    "round": r,
                    "node": x % n,
                    "copy": x // n,
                    "know": None if self.know is None else self.know[r][x],
                    "correct": ok,
                }


def run_reference(g: Network, program: RoutingProgram, rounds: int) -> Trace:
    """Fault-free execution of ``program`` on ``g`` for ``rounds`` rounds."""
    out_sets = [set(ws) for ws in g.out_neighbors]
    states = [[_call(program.init, v, 0, v) for v in range(g.n)]]
    messages: list[dict] = [{}]
    for r in range(1, rounds + 1):
        cur = states[-1]
        sent: dict[tuple[int, int], bytes] = {}
        for v in range(g.n):
            for w, msg in _call(program.send, v, r, v, r, cur[v]).items():
                if w not in out_sets[v]:
                    raise ProgramError(v, r, ValueError(f"send to non-neighbour {w}"))
                sent[(v, w)] = msg
        nxt = []
        for v in range(g.n):
            inbox = {w: sent[(w, v)] for w in g.in_neighbors[v] if (w, v) in sent}
            nxt.append(_call(program.receive, v, r, v, r, cur[v], inbox))
        states.append(nxt)
        messages.append(sent)
    return Trace(states, messages)


def _call(fn, node, rnd, *args):
    try:
        return fn(*args)
    except NetReinforceError:
        raise
    except Exception as exc:
        raise ProgramError(node, rnd, exc) from exc


def _key(seed: int, *parts: int) -> int:
    return int.from_bytes(hashlib.blake2b(repr((seed,) + parts).encode(), digest_size=8).digest(), "big")


def _coin(seed: int, *parts: int) -> float:
    """Counter-based uniform draw in [0, 1) keyed by ``(seed, *parts)``."""
    return _key(seed, *parts) / 2.0**64


def _rng(seed: int, trial: int | None = None) -> np.random.Generator:
    entropy = [seed] if trial is None else [seed, trial]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _draw_faulty(n_copies: int, p: float, gen: np.random.Generator) -> frozenset[int]:
    draws = gen.random(n_copies)
    return frozenset(int(x) for x in np.flatnonzero(draws < p))


def sample_faults(rn: ReinforcedNetwork, p: float, seed: int, adversary: str | None = None) -> FaultScenario:
    """Mark each copy faulty independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    faulty = _draw_faulty(rn.n_copies, p, _rng(seed))
    return FaultScenario(faulty, adversary or default_adversary(rn.model), seed)


class _Memo:
    """Cache of program calls keyed by node, round and state.

    Programs are deterministic, so one cache can serve every copy of a node
    and every run of the same program.
    """

    def __init__(self, program: RoutingProgram):
        self.program = program
        self.sends: dict = {}
        self.recvs: dict = {}

    def send(self, v, r, state):
        key = (v, r, state)
        out = self.sends.get(key)
        if out is None:
            out = self.sends[key] = _call(self.program.send, v, r, v, r, state)
        return out

    def receive(self, v, r, state, inbox):
        # inbox insertion order follows in_neighbors[v], so items() is canonical
        key = (v, r, state, tuple(inbox.items()))
        out = self.recvs.get(key, _MISSING)
        if out is _MISSING:
            out = self.recvs[key] = _call(self.program.receive, v, r, v, r, state, inbox)
        return out


def _reference(rn: ReinforcedNetwork, program: RoutingProgram, rounds: int, reference: Trace | None) -> Trace:
    if reference is not None and reference.rounds >= rounds:
        return reference
    return run_reference(rn.base, program, rounds)


def run_om(
    rn: ReinforcedNetwork,
    program: RoutingProgram,
    scenario: FaultScenario,
    rounds: int | None = None,
    *,
    reference: Trace | None = None,
    record: bool = False,
    stop_on_failure: bool = False,
    cache: _Memo | None = None,
) -> SimOutcome:
    """Run the know-flag omission protocol; success needs one tracking copy per node each round."""
    if rn.model is not FaultKind.OMISSION:
        raise ValueError("run_om needs an omission build")
    if scenario.adversary not in OMISSION_ADVERSARIES:
        raise ValueError(f"adversary {scenario.adversary!r} is not an omission behaviour")
    rounds = program.horizon if rounds is None else rounds
    ref = _reference(rn, program, rounds, reference)
    n, ell = rn.base.n, rn.ell
    N = rn.n_copies
    memo = cache if cache is not None and cache.program is program else _Memo(program)
    faulty = scenario.faulty
    omit_all = scenario.adversary != "omit-random"

    state = [ref.states[0][x % n] for x in range(N)]
    know = [True] * N
    tracking = [[ell] * n]
    know_log = [tuple(know)] if record else None
    correct_log = [tuple([True] * N)] if record else None
    success, strong, failed_round = True, True, None
    plan = rn.in_plan
    node_of = [x % n for x in range(N)]
    send, receive = memo.send, memo.receive
    seed = scenario.seed

    for r in range(1, rounds + 1):
        outbox = [send(node_of[x], r, state[x]) if know[x] else None for x in range(N)]
        new_state = list(state)
        new_know = list(know)
        for x in range(N):
            if not know[x]:
                continue
            v = node_of[x]
            inbox = {}
            for w, group in plan[x]:
                got = _MISSING
                for y in group:
                    if not know[y]:
                        continue
                    if y in faulty and (omit_all or _coin(seed, r, y, x) < 0.5):
                        continue
                    msg = outbox[y].get(v, BOTTOM)
                    if got is _MISSING:
                        got = msg
                    elif got != msg:
                        raise SimulationInvariantError(
                            f"round {r}: copies of node {w} disagree on arc to copy {x // n} of node {v}"
                        )
                if got is _MISSING:
                    new_know[x] = False
                    break
                if got is not BOTTOM:
                    inbox[w] = got
            else:
                new_state[x] = receive(v, r, state[x], inbox)
        state, know = new_state, new_know

        ref_r = ref.states[r]
        ok = [know[x] and state[x] == ref_r[node_of[x]] for x in range(N)]
        counts = [sum(ok[v::n]) for v in range(n)]
        tracking.append(counts)
        if record:
            know_log.append(tuple(know))
            correct_log.append(tuple(ok))
        if strong and not all(ok):
            strong = False
        if success and min(counts, default=1) == 0:
            success, failed_round = False, r
            if stop_on_failure:
                break
    return SimOutcome(success, strong and success, failed_round, tracking, know_log, correct_log)


def _forged(w: int, v: int, r: int) -> bytes:
    return b"\x00forged:%d:%d:%d" % (w, v, r)


def run_byz(
    rn: ReinforcedNetwork,
    program: RoutingProgram,
    scenario: FaultScenario,
    rounds: int | None = None,
    *,
    reference: Trace | None = None,
    record: bool = False,
    stop_on_failure: bool = False,
    cache: _Memo | None = None,
) -> SimOutcome:
    """Run the majority-vote protocol; success needs a strict majority of tracking copies per node.

    Faulty copies do not run the program. ``corrupt-all`` makes every faulty
    copy send the same forged message on every arc (colluding);
    ``corrupt-random`` picks per arc between the fault-free message, silence
    and a forgery; ``crash-silent`` sends nothing. On a strong build the
    majority over all ``2f+1`` copies is the same as requiring ``f+1``
    identical messages.
    """
    if rn.model is not FaultKind.BYZANTINE:
        raise ValueError("run_byz needs a Byzantine build")
    if scenario.adversary not in BYZANTINE_ADVERSARIES:
        raise ValueError(f"adversary {scenario.adversary!r} is not a Byzantine behaviour")
    rounds = program.horizon if rounds is None else rounds
    ref = _reference(rn, program, rounds, reference)
    g, n, ell = rn.base, rn.base.n, rn.ell
    N = rn.n_copies
    memo = cache if cache is not None and cache.program is program else _Memo(program)
    senders = rn.senders
    faulty = scenario.faulty
    adversary = scenario.adversary
    need = ell // 2 + 1

    def forged_or_honest(y: int, x: int, w: int, v: int, r: int):
        if adversary == "corrupt-all":
            return _forged(w, v, r)
        if adversary == "crash-silent":
            return BOTTOM
        roll = _coin(scenario.seed, r, y, x)
        if roll < 1 / 3:
            return ref.messages[r].get((w, v), BOTTOM)
        if roll < 2 / 3:
            return BOTTOM
        return _forged(w, v, r)

    state = [ref.states[0][x % n] for x in range(N)]
    honest = [x not in faulty for x in range(N)]
    tracking = [[sum(honest[v + i * n] for i in range(ell)) for v in range(n)]]
    correct_log = [tuple(honest)] if record else None
    success = min(tracking[0], default=need) >= need
    failed_round = None if success else 0
    strong = success

    for r in range(1, rounds + 1):
        if not success and stop_on_failure:
            break
        outbox = [memo.send(x % n, r, state[x]) if honest[x] else None for x in range(N)]
        new_state = list(state)
        for x in range(N):
            if not honest[x]:
                continue
            v, i = x % n, x // n
            inbox = {}
            for w in g.in_neighbors[v]:
                group = senders[(w, v), i]
                votes: Counter = Counter()
                for j in group:
                    y = w + j * n
                    votes[outbox[y].get(v, BOTTOM) if honest[y] else forged_or_honest(y, x, w, v, r)] += 1
                winner, count = votes.most_common(1)[0]
                if 2 * count > len(group) and winner is not BOTTOM:
                    inbox[w] = winner
            new_state[x] = memo.receive(v, r, state[x], inbox)
        state = new_state

        ref_r = ref.states[r]
        ok = [honest[x] and state[x] == ref_r[x % n] for x in range(N)]
        counts = [sum(ok[v + i * n] for i in range(ell)) for v in range(n)]
        tracking.append(counts)
        if record:
            correct_log.append(tuple(ok))
        if strong and any(honest[x] and not ok[x] for x in range(N)):
            strong = False
        if success and min(counts, default=need) < need:
            success, failed_round = False, r
    return SimOutcome(success, strong and success, failed_round, tracking, None, correct_log)


def run(
    rn: ReinforcedNetwork,
    program: RoutingProgram,
    scenario: FaultScenario,
    rounds: int | None = None,
    **kwargs,
) -> SimOutcome:
    runner = run_om if rn.model is FaultKind.OMISSION else run_byz
    return runner(rn, program, scenario, rounds, **kwargs)


def clean_indices(rn: ReinforcedNetwork, faulty: frozenset[int] | set[int]) -> list[int]:
    """Per region, the number of copy indices with no faulty member."""
    n = rn.base.n
    out = []
    for region in rn.partition.regions:
        out.append(sum(1 for i in range(rn.ell) if not any(v + i * n in faulty for v in region)))
    return out


def check_lemma_condition(rn: ReinforcedNetwork, scenario: FaultScenario) -> bool:
    """Sufficient condition for the simulation to succeed.

    Omission: every region keeps at least one copy index whose members are all
    fault-free. Byzantine: every region keeps at least ``f+1`` such indices.
    """
    need = 1 if rn.model is FaultKind.OMISSION else rn.f + 1
    return all(c >= need for c in clean_indices(rn, scenario.faulty))


# -- estimation -------------------------------------------------------------

_Z95 = statistics.NormalDist().inv_cdf(0.975)


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, centre - half)
    high = 1.0 if successes == trials else min(1.0, centre + half)
    return low, high


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int
    low: float
    high: float

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def half_width(self) -> float:
        return (self.high - self.low) / 2

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


def monte_carlo(
    rn: ReinforcedNetwork,
    program: RoutingProgram,
    p: float,
    rounds: int | None = None,
    trials: int = 1000,
    seed: int = 0,
    adversary: str | None = None,
) -> Estimate:
    """Success rate over ``trials`` independently sampled fault sets, with a Wilson 95% interval.

    Trial ``t`` samples its fault set from a counter-based generator keyed by
    ``(seed, t)``, so results do not depend on evaluation order.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    adversary = adversary or default_adversary(rn.model)
    rounds = program.horizon if rounds is None else rounds
    ref = run_reference(rn.base, program, rounds)
    memo = _Memo(program)
    cache: dict[frozenset[int], bool] = {}
    deterministic = adversary in DETERMINISTIC_ADVERSARIES
    wins = 0
    for t in range(trials):
        faulty = _draw_faulty(rn.n_copies, p, _rng(seed, t))
        if deterministic and faulty in cache:
            wins += cache[faulty]
            continue
        scenario = FaultScenario(faulty, adversary, _key(seed, t))
        ok = run(rn, program, scenario, rounds, reference=ref, stop_on_failure=True, cache=memo).success
        if deterministic:
            cache[faulty] = ok
        wins += ok
    low, high = wilson_interval(wins, trials)
    return Estimate(wins, trials, low, high)


def success_counts(
    rn: ReinforcedNetwork, program: RoutingProgram, rounds: int | None = None, adversary: str | None = None
) -> list[int]:
    """Number of successful fault sets of each size, over all ``2**|V'|`` sets."""
    N = rn.n_copies
    if N > EXHAUSTIVE_MAX_COPIES:
        raise SizeLimitError(f"exhaustive enumeration supports at most {EXHAUSTIVE_MAX_COPIES} copies, got {N}")
    adversary = adversary or default_adversary(rn.model)
    rounds = program.horizon if rounds is None else rounds
    ref = run_reference(rn.base, program, rounds)
    memo = _Memo(program)
    counts = [0] * (N + 1)
    for size in range(N + 1):
        for combo in itertools.combinations(range(N), size):
            scenario = FaultScenario(frozenset(combo), adversary, 0)
            if run(rn, program, scenario, rounds, reference=ref, stop_on_failure=True, cache=memo).success:
                counts[size] += 1
    return counts


def exhaustive_success(
    rn: ReinforcedNetwork,
    program: RoutingProgram,
    p: float,
    rounds: int | None = None,
    adversary: str | None = None,
) -> float:
    """Exact success probability by enumerating every fault set (worst-case adversary by default)."""
    counts = success_counts(rn, program, rounds, adversary)
    return success_polynomial(counts, p)


def success_polynomial(counts: Sequence[int], p):
    """``sum_k counts[k] * p**k * (1-p)**(N-k)``; exact when ``p`` is a Fraction."""
    N = len(counts) - 1
    if isinstance(p, Fraction):
        return sum((c * p**k * (1 - p) ** (N - k) for k, c in enumerate(counts)), Fraction(0))
    misses = [math.comb(N, k) - c for k, c in enumerate(counts)]
    if sum(misses) < sum(counts):
        # mostly successes: sum the failure mass so that "all succeed" gives exactly 1
        return 1.0 - math.fsum(c * p**k * (1 - p) ** (N - k) for k, c in enumerate(misses))
    return math.fsum(c * p**k * (1 - p) ** (N - k) for k, c in enumerate(counts))
