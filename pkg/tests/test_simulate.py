import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netreinforce.errors import SizeLimitError
from netreinforce.graph import Network, build_path
from netreinforce.partition import Partition, singleton_partition
from netreinforce.programs import Flood, PathRouting, RandomAutomaton, Route, Silent
from netreinforce.reinforce import reinforce_partitioned, reinforce_strong
from netreinforce.reliability import failure_om
from netreinforce.simulate import (
    BYZANTINE_ADVERSARIES,
    OMISSION_ADVERSARIES,
    FaultScenario,
    check_lemma_condition,
    clean_indices,
    exhaustive_success,
    monte_carlo,
    run,
    run_byz,
    run_om,
    sample_faults,
    success_counts,
    success_polynomial,
    wilson_interval,
)

A, B, C, D, E = range(5)


@pytest.fixture
def om_build(small5, small5_split):
    return reinforce_partitioned(small5, small5_split, 1, "om")


@pytest.fixture
def route_acde(small5):
    return PathRouting.single(small5, [A, C, D, E])


def copy(v, i):
    # copy index i (0-based) of node v in the five-node builds
    return v + 5 * i


# -- omission hand traces ----------------------------------------------------


def test_one_faulty_copy_of_c_is_survived(om_build, route_acde):
    sc = FaultScenario(frozenset({copy(C, 0)}))
    assert check_lemma_condition(om_build, sc)
    assert clean_indices(om_build, sc.faulty) == [1, 2]
    out = run_om(om_build, route_acde, sc)
    assert out.success
    # both copies of e end up holding the message
    assert out.tracking[-1][E] == 2


def test_faulty_copies_in_both_indices_can_still_succeed(om_build, route_acde):
    sc = FaultScenario(frozenset({copy(C, 0), copy(D, 1)}))
    assert check_lemma_condition(om_build, sc)
    assert run_om(om_build, route_acde, sc).success


def test_both_copies_of_c_faulty_fails(om_build, route_acde):
    sc = FaultScenario(frozenset({copy(C, 0), copy(C, 1)}))
    assert not check_lemma_condition(om_build, sc)
    out = run_om(om_build, route_acde, sc)
    assert not out.success
    assert out.failed_round == 1


def test_condition_without_clean_index(om_build):
    sc = FaultScenario(frozenset({copy(A, 0), copy(B, 1)}))
    assert not check_lemma_condition(om_build, sc)
    assert check_lemma_condition(om_build, FaultScenario(frozenset()))


def test_no_faults_every_copy_tracks(small5, small5_split):
    prog = RandomAutomaton(small5, seed=11, rounds=6)
    for model in ("om", "byz"):
        rn = reinforce_partitioned(small5, small5_split, 1, model)
        out = run(rn, prog, FaultScenario(frozenset(), OMISSION_ADVERSARIES[0] if model == "om" else "corrupt-all"))
        assert out.success and out.strong
        assert all(c == rn.ell for row in out.tracking for c in row)


def test_know_flag_is_sticky(om_build, route_acde):
    sc = FaultScenario(frozenset({copy(C, 0), copy(C, 1)}))
    out = run_om(om_build, route_acde, sc, record=True)
    for x in range(om_build.n_copies):
        flags = [k[x] for k in out.know]
        assert flags == sorted(flags, reverse=True)


def test_trace_records(om_build, route_acde):
    out = run_om(om_build, route_acde, FaultScenario(frozenset({copy(C, 0)})), record=True)
    recs = list(out.trace_records(om_build))
    assert len(recs) == (route_acde.horizon + 1) * om_build.n_copies
    assert set(recs[0]) == {"round", "node", "copy", "know", "correct"}
    with pytest.raises(ValueError):
        list(run_om(om_build, route_acde, FaultScenario(frozenset())).trace_records(om_build))


def test_wrong_model_or_adversary(om_build, route_acde, small5):
    with pytest.raises(ValueError):
        run_byz(om_build, route_acde, FaultScenario(frozenset()))
    with pytest.raises(ValueError):
        run_om(om_build, route_acde, FaultScenario(frozenset(), "corrupt-all"))


# -- Byzantine hand traces ---------------------------------------------------


def test_byzantine_one_bad_copy_per_node(small5, route_acde):
    rn = reinforce_strong(small5, 1, "byz")
    faulty = frozenset(copy(v, v % 3) for v in range(5))
    out = run_byz(rn, route_acde, FaultScenario(faulty, "corrupt-all"))
    assert out.success and out.strong


def test_byzantine_two_bad_copies_of_sender(small5, route_acde):
    rn = reinforce_strong(small5, 1, "byz")
    faulty = frozenset({copy(C, 0), copy(C, 1)})
    sc = FaultScenario(faulty, "corrupt-all")
    assert not check_lemma_condition(rn, sc)
    out = run_byz(rn, route_acde, sc)
    assert not out.success
    assert out.failed_round == 0  # c never has an honest majority


def test_byzantine_forgery_propagates_only_without_majority(small5, route_acde):
    rn = reinforce_strong(small5, 1, "byz")
    # two bad copies of a forge the message to every copy of c
    out = run_byz(rn, route_acde, FaultScenario(frozenset({copy(A, 0), copy(A, 2)}), "corrupt-all"))
    assert not out.success
    assert out.tracking[1][C] == 0


# -- sampling and estimation ---------------------------------------------------


def test_sample_faults(om_build):
    assert sample_faults(om_build, 0.0, 1).faulty == frozenset()
    assert sample_faults(om_build, 1.0, 1).faulty == frozenset(range(10))
    assert sample_faults(om_build, 0.3, 5) == sample_faults(om_build, 0.3, 5)
    assert sample_faults(om_build, 0.3, 5).adversary == "omit-all"


def test_scenario_json_round_trip():
    sc = FaultScenario(frozenset({3, 1}), "omit-random", 9)
    assert sc.to_json() == {"faulty": [1, 3], "adversary": "omit-random", "seed": 9}
    assert FaultScenario.from_json(sc.to_json()) == sc


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.40383, abs=1e-5)
    assert hi == pytest.approx(0.59617, abs=1e-5)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    with pytest.raises(ValueError):
        wilson_interval(0, 0)


def test_monte_carlo_extremes(om_build, small5):
    flood = Flood(small5, [A])
    assert monte_carlo(om_build, flood, 0.0, trials=50).success_rate == 1.0
    assert monte_carlo(om_build, flood, 1.0, trials=50).success_rate == 0.0


def test_monte_carlo_is_deterministic(om_build, small5):
    flood = Flood(small5, [A])
    a = monte_carlo(om_build, flood, 0.1, trials=300, seed=4)
    assert a == monte_carlo(om_build, flood, 0.1, trials=300, seed=4)
    assert a.contains(a.success_rate)


def test_exhaustive_trivial_cases(om_build, small5):
    flood = Flood(small5, [A])
    assert exhaustive_success(om_build, flood, 0.0) == 1.0
    lonely = reinforce_strong(Network(1, ()), 1, "om")
    for p in (0.0, 0.3, 1.0):
        assert exhaustive_success(lonely, Silent(lonely.base), p) == 1.0


def test_exhaustive_size_limit(small5):
    with pytest.raises(SizeLimitError):
        exhaustive_success(reinforce_strong(small5, 2, "byz"), Flood(small5), 0.1)


def test_exhaustive_dominates_analytic_bound(om_build, small5):
    counts = success_counts(om_build, Flood(small5, [A]))
    for p in (Fraction(1, 100), Fraction(1, 20), Fraction(1, 10)):
        exact = success_polynomial(counts, p)
        # the analytic bound is a polynomial in p too; compare in exact arithmetic
        ok = Fraction(1)
        for size in (3, 2):
            ok *= 1 - (1 - (1 - p) ** size) ** 2
        assert exact >= ok
        assert float(exact) >= 1 - failure_om([3, 2], 1, float(p)) - 1e-15


def test_monte_carlo_agrees_with_enumeration(om_build, small5):
    flood = Flood(small5, [A])
    est = monte_carlo(om_build, flood, 0.1, trials=4000, seed=2)
    assert est.contains(exhaustive_success(om_build, flood, 0.1))


# -- soundness ----------------------------------------------------------------


def _random_case(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 6)
    g = Network.from_arcs(n, [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < 0.4])
    part = Partition.from_labels([rng.randrange(n) for _ in range(n)])
    model = rng.choice(["om", "byz"])
    rn = reinforce_partitioned(g, part, rng.choice([1, 2]), model)
    if rng.random() < 0.5:
        prog = RandomAutomaton(g, rng.randrange(1 << 30), rounds=rng.randint(1, 8))
    else:
        prog = Flood(g, [rng.randrange(n)])
    faulty = frozenset(x for x in range(rn.n_copies) if rng.random() < 0.3)
    adversary = rng.choice(OMISSION_ADVERSARIES if model == "om" else BYZANTINE_ADVERSARIES)
    return rn, prog, FaultScenario(faulty, adversary, seed)


@given(seed=st.integers(0, 2**32 - 1))
def test_condition_implies_success(seed):
    rn, prog, sc = _random_case(seed)
    if check_lemma_condition(rn, sc):
        out = run(rn, prog, sc, prog.horizon)
        assert out.success
        if rn.strong:
            assert out.strong


def test_violated_condition_can_fail():
    # negative control: the property test above would be vacuous if runs never failed
    failures = 0
    for seed in range(400):
        rn, prog, sc = _random_case(seed)
        if not check_lemma_condition(rn, sc) and not run(rn, prog, sc, prog.horizon).success:
            failures += 1
    assert failures > 20


def test_strong_build_singleton_matches_partition(small5):
    a = reinforce_strong(small5, 1, "om")
    b = reinforce_partitioned(small5, singleton_partition(small5), 1, "om")
    assert a == b


def test_path_routing_under_random_omissions(small5):
    rn = reinforce_strong(small5, 1, "om")
    prog = PathRouting(small5, [Route((A, C, D, E), b"x")])
    out = run_om(rn, prog, FaultScenario(frozenset({copy(C, 0), copy(D, 1)}), "omit-random", 3))
    assert out.success


def test_long_path_strong_build_runs():
    g = build_path(40)
    rn = reinforce_strong(g, 1, "om")
    est = monte_carlo(rn, PathRouting.single(g, range(40)), 0.02, trials=100, seed=1)
    assert est.success_rate > 0.9
