from __future__ import annotations

import pytest

from helpers import build_descriptor_set

from ranslice.descriptors import DescriptorSet
from ranslice.topology import (
    Drb,
    DrbQos,
    NoSlicesError,
    Scenario,
    SliceAwareness,
    UnknownSliceError,
    build_instance_graph,
    route_drb,
    slice_awareness_required,
)

QOS = DrbQos(throughput_mbps=10.0, latency_ms=20.0, reliability=0.99)

# Expected (cu_count, du_count) per scenario for K slices and n DUs,
# straight from the sharing rules: dedicated components multiply by K.
def expected_counts(scenario: Scenario, k: int, n: int) -> tuple[int, int]:
    cu = 1 if scenario.cu_shared else k
    du = n if scenario.du_shared else k * n
    return cu, du


def test_instance_counts_two_slices_three_dus():
    ds = build_descriptor_set(n_slices=2)
    expected = {
        Scenario.S1_DEDICATED: (2, 6),
        Scenario.S2_ALL_SHARED: (1, 3),
        Scenario.S3_CU_SHARED: (1, 6),
        Scenario.S4_DU_SHARED: (2, 3),
    }
    for scenario, (cus, dus) in expected.items():
        graph = build_instance_graph(ds, scenario, n_dus_per_gnb=3)
        assert len(graph.cu_instances) == cus
        assert len(graph.du_instances) == dus


def test_single_slice_scenarios_coincide():
    ds = build_descriptor_set(n_slices=1)
    counts = set()
    for scenario in Scenario:
        graph = build_instance_graph(ds, scenario, n_dus_per_gnb=4)
        counts.add((len(graph.cu_instances), len(graph.du_instances)))
    assert counts == {(1, 4)}


def test_instance_count_ordering_across_grid():
    # S2 <= S4 <= S3 <= S1 in total VNF instances, strict for K >= 2
    # and n >= 2; checked exhaustively.
    for k in (2, 3, 4):
        ds = build_descriptor_set(n_slices=k)
        for n in (1, 2, 3):
            totals = {sc: build_instance_graph(ds, sc, n).total_vnf_instances()
                      for sc in Scenario}
            assert (totals[Scenario.S2_ALL_SHARED]
                    <= totals[Scenario.S4_DU_SHARED]
                    <= totals[Scenario.S3_CU_SHARED]
                    <= totals[Scenario.S1_DEDICATED])
            if n >= 2:
                assert (totals[Scenario.S2_ALL_SHARED]
                        < totals[Scenario.S4_DU_SHARED]
                        < totals[Scenario.S3_CU_SHARED]
                        < totals[Scenario.S1_DEDICATED])


def test_matching_tables_per_scenario():
    ds = build_descriptor_set(n_slices=2)
    s3 = build_instance_graph(ds, Scenario.S3_CU_SHARED, 2)
    s4 = build_instance_graph(ds, Scenario.S4_DU_SHARED, 2)
    s1 = build_instance_graph(ds, Scenario.S1_DEDICATED, 2)
    s2 = build_instance_graph(ds, Scenario.S2_ALL_SHARED, 2)

    assert set(s3.snssai_to_du) == set(ds.snssais())
    for snssai, pool in s3.snssai_to_du.items():
        assert len(pool) == 2
        assert all(snssai.key() in du for du in pool)
    assert not s3.cu_to_snssai

    # One table entry per CU, mapping its identifier to the slice it serves.
    assert len(s4.cu_to_snssai) == len(s4.cu_instances)
    assert set(s4.cu_to_snssai.values()) == set(ds.snssais())
    assert not s4.snssai_to_du

    for graph in (s1, s2):
        assert not graph.snssai_to_du
        assert not graph.cu_to_snssai


def test_owner_set_shapes_per_scenario():
    ds = build_descriptor_set(n_slices=3, du_counts=(1, 2, 3))
    all_slices = frozenset(ds.snssais())
    for scenario in Scenario:
        graph = build_instance_graph(ds, scenario, 2)
        for cu in graph.cu_instances:
            assert cu.owners == (all_slices if scenario.cu_shared
                                 else frozenset({next(iter(cu.owners))}))
            if not scenario.cu_shared:
                assert len(cu.owners) == 1
        for du in graph.du_instances:
            if scenario.du_shared:
                assert du.owners == all_slices
            else:
                assert len(du.owners) == 1


def test_rus_shared_in_every_scenario():
    ds = build_descriptor_set(n_slices=2, n_rus=3)
    for scenario in Scenario:
        graph = build_instance_graph(ds, scenario, 1)
        assert len(graph.ru_units) == 3
        for du in graph.du_instances:
            assert graph.du_to_rus[du.instance_id] == graph.ru_units


def test_no_slices_error():
    with pytest.raises(NoSlicesError):
        build_instance_graph(DescriptorSet(), Scenario.S1_DEDICATED, 1)


def test_route_s3_uses_snssai_to_du_table():
    ds = build_descriptor_set(n_slices=2)
    graph = build_instance_graph(ds, Scenario.S3_CU_SHARED, 1)
    embb, urllc = ds.snssais()
    path = route_drb(graph, Drb("d1", embb, QOS))
    assert path.du_id == graph.snssai_to_du[embb][0]
    assert path.cu_id == "cu-shared"
    path = route_drb(graph, Drb("d2", urllc, QOS))
    assert path.du_id == graph.snssai_to_du[urllc][0]


def test_route_s2_single_shared_cu():
    ds = build_descriptor_set(n_slices=2)
    graph = build_instance_graph(ds, Scenario.S2_ALL_SHARED, 3)
    for s in ds.snssais():
        path = route_drb(graph, Drb("any", s, QOS))
        assert path.cu_id == "cu-shared"
        assert path.du_id in {du.instance_id for du in graph.du_instances}


def test_route_s4_inverse_cu_lookup():
    ds = build_descriptor_set(n_slices=2)
    graph = build_instance_graph(ds, Scenario.S4_DU_SHARED, 2)
    embb, urllc = ds.snssais()
    path = route_drb(graph, Drb("d", urllc, QOS))
    assert graph.cu_to_snssai[path.cu_id] == urllc
    assert path.cu_id == "cu-uRLLC"


def test_route_total_and_deterministic():
    # Brute force over all slices x many DRBs x all scenarios: routing
    # never fails, repeats itself, and lands inside the slice's pool.
    ds = build_descriptor_set(n_slices=3, du_counts=(2, 3))
    for scenario in Scenario:
        graph = build_instance_graph(ds, scenario, 2)
        for s in ds.snssais():
            pool = {du.instance_id for du in graph.du_instances if s in du.owners}
            for i in range(40):
                drb = Drb(f"drb-{s.key()}-{i}", s, QOS)
                first = route_drb(graph, drb)
                again = route_drb(graph, drb)
                assert first == again
                assert first.du_id in pool
                assert first.ru_id in graph.ru_units


def test_route_unknown_slice():
    ds = build_descriptor_set(n_slices=1)
    graph = build_instance_graph(ds, Scenario.S1_DEDICATED, 1)
    stranger = build_descriptor_set(n_slices=2).snssais()[1]
    with pytest.raises(UnknownSliceError):
        route_drb(graph, Drb("d", stranger, QOS))


def test_slice_awareness_per_scenario():
    assert slice_awareness_required(Scenario.S1_DEDICATED) == frozenset()
    assert slice_awareness_required(Scenario.S2_ALL_SHARED) == frozenset({
        SliceAwareness.INTRA_SLICE_RRM_DU,
        SliceAwareness.INTRA_SLICE_RRM_CU,
        SliceAwareness.RRC_LAYER,
    })
    assert slice_awareness_required(Scenario.S3_CU_SHARED) == frozenset({
        SliceAwareness.INTRA_SLICE_RRM_CU,
        SliceAwareness.RRC_LAYER,
    })
    assert slice_awareness_required(Scenario.S4_DU_SHARED) == frozenset({
        SliceAwareness.INTRA_SLICE_RRM_DU,
    })


def test_counts_match_sharing_rule_oracle():
    for k in (1, 2, 3):
        ds = build_descriptor_set(n_slices=k)
        for n in (1, 2):
            for scenario in Scenario:
                graph = build_instance_graph(ds, scenario, n)
                cu, du = expected_counts(scenario, k, n)
                assert (len(graph.cu_instances), len(graph.du_instances)) == (cu, du)


def test_drb_qos_invariants():
    with pytest.raises(ValueError):
        DrbQos(throughput_mbps=0.0, latency_ms=10.0, reliability=0.9)
    with pytest.raises(ValueError):
        DrbQos(throughput_mbps=1.0, latency_ms=10.0, reliability=1.5)


def test_signalling_flag_defaults_false():
    drb = Drb("d", build_descriptor_set(n_slices=1).snssais()[0], QOS)
    assert drb.signalling is False
