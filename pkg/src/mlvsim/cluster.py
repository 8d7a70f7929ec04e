"""Capacitated worker pool: placement, replica lifecycle, scaling rules.

Nodes are kept in a fixed deterministic order (edge, then regional, then
central by default) and first-fit walks that order. Capacity constraints are
asserted on every allocation change.
"""

import math
from collections import deque
from dataclasses import dataclass, field

from .domain import ResourceVector


class ClusterError(Exception):
    pass


class NoCapacity(ClusterError):
    pass


class CapacityViolation(ClusterError):
    pass


LAYERS = ("edge", "regional", "central")


@dataclass
class WorkerNode:
    id: str
    layer: str
    capacity: ResourceVector
    transmission_delay_ms: float = 0.0
    allocated: ResourceVector = field(default_factory=ResourceVector)

    def __post_init__(self):
        if self.layer not in LAYERS:
            raise ValueError(f"unknown layer {self.layer!r}")
        if self.transmission_delay_ms < 0:
            raise ValueError("transmission delay must be >= 0")

    @property
    def unlimited(self):
        return math.isinf(self.capacity.cpu)

    def admits(self, footprint):
        return (self.allocated + footprint).fits_within(self.capacity)

    def load(self):
        """CPU-allocation fraction; unlimited nodes report 0 by convention."""
        if math.isinf(self.capacity.cpu) or self.capacity.cpu == 0:
            return 0.0
        return self.allocated.cpu / self.capacity.cpu


@dataclass
class Replica:
    """One running inference instance of a (model, version) pair."""

    id: int
    model_id: str
    version: int
    node: WorkerNode
    spawn_complete_ms: float = 0.0
    queue: deque = field(default_factory=deque)
    in_service: object = None
    # Spawn latency charged to the first request this replica serves.
    spawn_charge_ms: float = 0.0
    # Last (state, action) the learning policy took for this replica lineage.
    pending_decision: object = None
    dead: bool = False

    @property
    def busy(self):
        return self.in_service is not None

    def backlog(self):
        return len(self.queue) + (1 if self.busy else 0)


class Cluster:
    """Ordered node list with first-fit placement and capacity accounting."""

    def __init__(self, nodes):
        ids = [n.id for n in nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        self.nodes = list(nodes)

    def allocate(self, node, footprint):
        new = node.allocated + footprint
        if not new.fits_within(node.capacity):
            raise CapacityViolation(
                f"{node.id}: allocation {new} exceeds capacity {node.capacity}")
        node.allocated = new

    def free(self, node, footprint):
        # Computed per component: rounding residue from summed footprints may
        # leave the difference a few ulps below zero, which the vector type
        # itself would reject.
        cpu = node.allocated.cpu - footprint.cpu
        ram = node.allocated.ram - footprint.ram
        disk = node.allocated.disk - footprint.disk
        if cpu < -1e-9 or ram < -1e-9 or disk < -1e-9:
            raise CapacityViolation(f"{node.id}: freeing more than allocated")
        node.allocated = ResourceVector(max(cpu, 0.0), max(ram, 0.0),
                                        max(disk, 0.0))

    def place_first_fit(self, footprint):
        """First node, in declared order, whose remaining capacity admits."""
        for node in self.nodes:
            if node.admits(footprint):
                return node
        raise NoCapacity(f"no node admits footprint {footprint}")

    def check_capacity(self):
        """Assert the capacity constraints on every node; returns check count."""
        for node in self.nodes:
            if not node.allocated.fits_within(node.capacity):
                raise CapacityViolation(
                    f"{node.id}: {node.allocated} exceeds {node.capacity}")
        return len(self.nodes)


def scaling_action(backlog, replica_count, threshold, idle_replica=False):
    """Monitoring-based scaling rule evaluated per model.

    "spawn" when queued+in-service pressure per replica exceeds the
    threshold; "remove" when a replica sits idle and at least one other
    replica of the model remains (floor of one); otherwise "none".
    threshold=None disables scaling entirely.
    """
    if threshold is None or replica_count == 0:
        return "none"
    if backlog / replica_count > threshold:
        return "spawn"
    if idle_replica and replica_count > 1:
        return "remove"
    return "none"
