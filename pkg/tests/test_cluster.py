"""Cluster: capacity accounting, first-fit placement, scaling rule."""

import math

import pytest

from mlvsim.cluster import (CapacityViolation, Cluster, NoCapacity,
                            WorkerNode, scaling_action)
from mlvsim.domain import ResourceVector, default_models


def node(nid, layer="edge", cpu=32.0, ram=32.0, disk=math.inf, delay=1.0):
    return WorkerNode(id=nid, layer=layer,
                      capacity=ResourceVector(cpu, ram, disk),
                      transmission_delay_ms=delay)


@pytest.fixture
def pool():
    return [node("edge-1"), node("edge-2"),
            node("regional", layer="regional", cpu=math.inf, ram=math.inf,
                 delay=10.0),
            node("central", layer="central", cpu=math.inf, ram=math.inf,
                 delay=50.0)]


def test_admits():
    n = node("n", cpu=32, ram=32)
    models = default_models()
    assert n.admits(models["ML-x1"].footprint)       # 16 cpu / 32 ram
    assert not n.admits(models["ML-r1"].footprint)   # needs 48 GB RAM
    assert n.admits(models["ML-d1"].footprint)


def test_load(pool):
    cluster = Cluster(pool)
    n = pool[0]
    assert n.load() == 0.0
    cluster.allocate(n, ResourceVector(16, 32, 0.1))
    assert n.load() == 0.5
    assert pool[2].load() == 0.0  # unlimited nodes report 0 by convention


def test_allocate_free_exact(pool):
    cluster = Cluster(pool)
    fp = ResourceVector(16, 32, 0.1)
    n = pool[0]
    cluster.allocate(n, fp)
    with pytest.raises(CapacityViolation):
        cluster.allocate(n, ResourceVector(17, 0, 0))
    cluster.allocate(n, ResourceVector(16, 0, 0))
    cluster.free(n, fp)
    cluster.free(n, ResourceVector(16, 0, 0))
    assert n.allocated == ResourceVector()
    with pytest.raises(CapacityViolation):
        cluster.free(n, fp)


def test_free_tolerates_float_residue():
    # 0.02 - 0.01 sits a few ulps below 0.01 in binary; freeing the last
    # 0.01 must clamp to zero instead of raising.
    n = node("n")
    cluster = Cluster([n])
    cluster.allocate(n, ResourceVector(1, 1, 0.01))
    cluster.allocate(n, ResourceVector(1, 1, 0.01))
    cluster.free(n, ResourceVector(1, 1, 0.01))
    cluster.free(n, ResourceVector(1, 1, 0.01))
    assert n.allocated.disk == 0.0


def test_first_fit_order(pool):
    cluster = Cluster(pool)
    x1 = default_models()["ML-x1"].footprint  # 16 cpu
    assert cluster.place_first_fit(x1).id == "edge-1"
    cluster.allocate(pool[0], x1)
    # A second ML-x1 is CPU-feasible but RAM-bound on edge-1 (32+32 > 32 GB).
    assert cluster.place_first_fit(x1).id == "edge-2"
    cluster.allocate(pool[1], x1)
    # One ML-x1 fills a node's RAM, so even the 1 GB model overflows.
    d1 = default_models()["ML-d1"].footprint
    assert cluster.place_first_fit(d1).id == "regional"
    # ML-r1 never fits a 32 GB edge node and falls through to regional.
    r1 = default_models()["ML-r1"].footprint
    assert cluster.place_first_fit(r1).id == "regional"


def test_no_capacity():
    n = node("only", cpu=2, ram=2)
    cluster = Cluster([n])
    with pytest.raises(NoCapacity):
        cluster.place_first_fit(ResourceVector(4, 1, 0))


def test_duplicate_node_ids_rejected():
    with pytest.raises(ValueError):
        Cluster([node("a"), node("a")])


def test_check_capacity(pool):
    cluster = Cluster(pool)
    assert cluster.check_capacity() == len(pool)
    # Corrupt the books directly; the audit must notice.
    pool[0].allocated = ResourceVector(64, 0, 0)
    with pytest.raises(CapacityViolation):
        cluster.check_capacity()


def test_worker_node_validation():
    with pytest.raises(ValueError):
        WorkerNode(id="n", layer="space", capacity=ResourceVector())
    with pytest.raises(ValueError):
        WorkerNode(id="n", layer="edge", capacity=ResourceVector(),
                   transmission_delay_ms=-1.0)


def test_scaling_action():
    # Spawn when backlog pressure per replica exceeds the threshold.
    assert scaling_action(5, 2, 2.0) == "spawn"
    assert scaling_action(4, 2, 2.0) == "none"
    # Remove an idle replica only while another remains.
    assert scaling_action(0, 2, 2.0, idle_replica=True) == "remove"
    assert scaling_action(0, 1, 2.0, idle_replica=True) == "none"
    assert scaling_action(0, 2, 2.0, idle_replica=False) == "none"
    # Disabled scaling and the empty pool never act.
    assert scaling_action(100, 2, None) == "none"
    assert scaling_action(100, 0, 2.0) == "none"
