import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from netreinforce.graph import Network, build_path
from netreinforce.partition import Partition, singleton_partition, whole_partition
from netreinforce.reinforce import (
    FaultKind,
    FaultModel,
    ReinforcedNetwork,
    copies_for,
    overheads,
    predicted_eta,
    reinforce_partitioned,
    reinforce_strong,
    replicate,
    undirected_eta,
)


def test_copies_for():
    assert copies_for(1, "omission") == 2
    assert copies_for(2, "om") == 3
    assert copies_for(1, FaultKind.BYZANTINE) == 3
    assert copies_for(3, "byz") == 7


def test_fault_kind_parse():
    assert FaultKind.parse("Byzantine") is FaultKind.BYZANTINE
    with pytest.raises(ValueError):
        FaultKind.parse("crash")


def test_fault_model_checks_p():
    assert FaultModel("om", 0.1).kind is FaultKind.OMISSION
    with pytest.raises(ValueError):
        FaultModel("om", 1.5)


@pytest.mark.parametrize("model,eta", [("byzantine", 9), ("omission", 4)])
def test_strong_overheads_are_exact(small5, model, eta):
    ov = overheads(reinforce_strong(small5, 1, model))
    assert ov.eta == eta
    assert ov.nu == copies_for(1, model)


def test_partitioned_overheads_small5(small5, small5_split):
    ov = overheads(reinforce_partitioned(small5, small5_split, 1, "om"))
    assert ov.nu == 2
    assert ov.eta == Fraction(8, 3)


def _one_fifth_instance():
    # two-way path on six nodes cut in the middle: one of five edges crosses
    g = Network.from_edges(6, [(i, i + 1) for i in range(5)])
    return g, Partition(((0, 1, 2), (3, 4, 5)))


@pytest.mark.parametrize("model,eta", [("om", Fraction(12, 5)), ("byz", Fraction(21, 5))])
def test_partitioned_overheads_at_one_fifth_cut(model, eta):
    g, part = _one_fifth_instance()
    rn = reinforce_partitioned(g, part, 1, model)
    assert overheads(rn).eta == eta


def test_copy_ids_and_projection(small5, small5_split):
    rn = reinforce_partitioned(small5, small5_split, 1, "om")
    assert rn.copy_id(2, 1) == 7
    assert rn.project(7) == 2
    assert rn.copy_index(7) == 1
    # intra-region arc a->b is copied index-wise, cross arc c->d to every pair
    arcs = set(rn.arcs)
    assert (0, 1) in arcs and (5, 6) in arcs and (0, 6) not in arcs
    assert {(2, 3), (2, 8), (7, 3), (7, 8)} <= arcs


def test_every_copy_arc_projects_to_a_base_arc(small5, small5_split):
    base = set(small5.arcs)
    rn = reinforce_partitioned(small5, small5_split, 2, "byz")
    for x, y in rn.arcs:
        assert (rn.project(x), rn.project(y)) in base


def test_whole_partition_is_disjoint_copies(small5):
    rn = replicate(small5, whole_partition(small5), 2, "om")
    assert overheads(rn).eta == 3
    assert all(rn.copy_index(x) == rn.copy_index(y) for x, y in rn.arcs)


def test_f_zero_is_the_original(small5):
    rn = replicate(small5, whole_partition(small5), 0, "byz")
    assert rn.ell == 1 and rn.arcs == small5.arcs
    with pytest.raises(ValueError):
        reinforce_strong(small5, 0, "om")


def test_partition_size_mismatch(small5):
    with pytest.raises(ValueError):
        reinforce_partitioned(small5, Partition(((0, 1),)), 1, "om")


def test_edgeless_network_overheads():
    rn = reinforce_strong(Network(3, ()), 1, "om")
    assert overheads(rn).eta == 2


def test_senders(small5, small5_split):
    rn = reinforce_partitioned(small5, small5_split, 1, "byz")
    assert rn.senders[(0, 1), 2] == (2,)
    assert rn.senders[(2, 3), 0] == (0, 1, 2)


def test_json_round_trip(small5, small5_split):
    rn = reinforce_partitioned(small5, small5_split, 1, "byz")
    again = ReinforcedNetwork.from_json(json.loads(rn.dumps()))
    assert again == rn


def test_json_rejects_tampered_arcs(small5, small5_split):
    data = reinforce_partitioned(small5, small5_split, 1, "om").to_json()
    data["arcs"].pop()
    with pytest.raises(ValueError):
        ReinforcedNetwork.from_json(data)


@given(seed=st.integers(0, 2**20), n=st.integers(1, 9), f=st.integers(1, 3), model=st.sampled_from(["om", "byz"]))
def test_eta_matches_cut_formula(seed, n, f, model):
    import random

    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.4]
    g = Network.from_edges(n, edges)
    part = Partition.from_labels([rng.randrange(n) for _ in range(n)])
    rn = reinforce_partitioned(g, part, f, model)
    ell = copies_for(f, model)
    assert overheads(rn).eta == predicted_eta(g, part, ell) == undirected_eta(g, part, ell)
    assert overheads(rn).nu == ell


def test_directed_eta_uses_arcs():
    g = build_path(3)
    part = Partition(((0, 1), (2,)))
    assert predicted_eta(g, part, 2) == 3


def test_singleton_is_strong(small5):
    assert reinforce_partitioned(small5, singleton_partition(small5), 1, "om").strong
