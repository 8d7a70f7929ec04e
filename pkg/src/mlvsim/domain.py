"""Core domain model: versions, resources, ML model classes, attribute curves.

A model version is a plain integer release index in [0, V_MAX]. The familiar
"X.Y" form is a derived display: X = index // minors_per_major,
Y = index % minors_per_major. Everything here is pure and immutable.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from . import kernels

V_MAX = 2000
MINORS_PER_MAJOR = 200

# Per-release multiplicative steps used by the "percent-step" curve mode.
ACCURACY_MAJOR_STEP = 0.02
ACCURACY_MINOR_STEP = 0.001
STABILITY_MAJOR_STEP = -0.02
STABILITY_MINOR_STEP = -0.001
SERVICE_MAJOR_STEP = -0.07

UNLIMITED = math.inf


class DomainError(Exception):
    pass


class UnknownVersion(DomainError):
    pass


class NoNewerVersion(DomainError):
    pass


class AppClass(Enum):
    DAPP = "dApp"
    XAPP = "xApp"
    RAPP = "rApp"


# Control-loop latency budgets per application class, in ms.
DELAY_BUDGET_MS = {
    AppClass.DAPP: 10.0,
    AppClass.XAPP: 1000.0,
    AppClass.RAPP: 10000.0,
}


@dataclass(frozen=True)
class ResourceVector:
    """CPU units, RAM GB, disk GB. math.inf marks an unlimited dimension."""

    cpu: float = 0.0
    ram: float = 0.0
    disk: float = 0.0

    def __post_init__(self):
        if self.cpu < 0 or self.ram < 0 or self.disk < 0:
            raise ValueError("resource components must be >= 0")

    def __add__(self, other):
        return ResourceVector(self.cpu + other.cpu, self.ram + other.ram,
                              self.disk + other.disk)

    def __sub__(self, other):
        return ResourceVector(self.cpu - other.cpu, self.ram - other.ram,
                              self.disk - other.disk)

    def fits_within(self, capacity):
        """Componentwise <=; an unlimited capacity dimension always passes."""
        return (self.cpu <= capacity.cpu and self.ram <= capacity.ram
                and self.disk <= capacity.disk)


@dataclass(frozen=True)
class ModelClass:
    """Static parameters of one ML model family (one Table-style row)."""

    id: str
    app_class: AppClass
    mean_interarrival_ms: float
    spawn_time_ms: float
    footprint: ResourceVector
    service_time_start_ms: float
    service_time_end_ms: float
    accuracy_start: float
    accuracy_end: float
    stability_start: float
    stability_end: float
    processing_delay_ms: float = 0.0
    delay_budget_ms: float = field(default=0.0)

    def __post_init__(self):
        if self.accuracy_start > self.accuracy_end:
            raise ValueError(f"{self.id}: accuracy must not degrade with version")
        if self.stability_start < self.stability_end:
            raise ValueError(f"{self.id}: stability must not improve with version")
        if self.service_time_start_ms < self.service_time_end_ms:
            raise ValueError(f"{self.id}: service time must not grow with version")
        if self.delay_budget_ms == 0.0:
            object.__setattr__(self, "delay_budget_ms",
                               DELAY_BUDGET_MS[self.app_class])
        if self.delay_budget_ms <= 0:
            raise ValueError(f"{self.id}: delay budget must be positive")


@dataclass(frozen=True)
class VersionAttributes:
    """Quality attributes of one (model, version) pair."""

    accuracy: float
    stability: float
    mean_service_time_ms: float
    footprint: ResourceVector


def check_version(index, v_max=V_MAX):
    if not (0 <= index <= v_max):
        raise UnknownVersion(f"version index {index} outside [0, {v_max}]")
    return index


def version_display(index, minors_per_major=MINORS_PER_MAJOR):
    """Render a release index as the conventional "X.Y" string."""
    check_version(index)
    return f"{index // minors_per_major}.{index % minors_per_major}"


def major_of(index, minors_per_major=MINORS_PER_MAJOR):
    return index // minors_per_major


def apply_update(current, decision, latest, jump_to_latest=True):
    """Map a (version, decision bit) pair to the version run afterwards.

    decision=0 keeps the current version. decision=1 moves to the latest
    published version, or to current+1 when jump_to_latest is off.
    """
    check_version(current)
    if decision == 0:
        return current
    if latest <= current:
        raise NoNewerVersion(
            f"no version newer than {current} is published (latest={latest})")
    return latest if jump_to_latest else current + 1


def attributes_of(model, version, mode="geometric", v_max=V_MAX,
                  minors_per_major=MINORS_PER_MAJOR):
    """Evaluate the model's attribute curves at one release index.

    "geometric" interpolates each attribute between its endpoints on a
    geometric curve (service time moves only at major boundaries).
    "percent-step" compounds fixed per-release percentages, clamped so no
    attribute ever leaves its endpoint range.
    """
    check_version(version, v_max)
    if mode == "geometric":
        frac = version / v_max if v_max else 0.0
        major_max = v_max // minors_per_major
        major_frac = major_of(version, minors_per_major) / major_max if major_max else 0.0
        accuracy = kernels.geometric_attr(model.accuracy_start,
                                          model.accuracy_end, frac)
        stability = kernels.geometric_attr(model.stability_start,
                                           model.stability_end, frac)
        service = kernels.geometric_attr(model.service_time_start_ms,
                                         model.service_time_end_ms, major_frac)
    elif mode == "percent-step":
        # Steps compound release by release, so the minor exponent counts
        # every minor release on the path from version 0, not just the ones
        # since the last major.
        major = major_of(version, minors_per_major)
        minor = version - major
        accuracy = kernels.percent_step_attr(
            model.accuracy_start, model.accuracy_end, major, minor,
            ACCURACY_MAJOR_STEP, ACCURACY_MINOR_STEP)
        stability = kernels.percent_step_attr(
            model.stability_start, model.stability_end, major, minor,
            STABILITY_MAJOR_STEP, STABILITY_MINOR_STEP)
        service = kernels.percent_step_attr(
            model.service_time_start_ms, model.service_time_end_ms, major, 0,
            SERVICE_MAJOR_STEP, 0.0)
    else:
        raise ValueError(f"unknown curve mode {mode!r}")
    return VersionAttributes(accuracy=accuracy, stability=stability,
                             mean_service_time_ms=service,
                             footprint=model.footprint)


def default_models():
    """The six simulated model classes with their published parameters."""

    def mk(mid, app, inter, spawn, cpu, ram, disk, st, acc):
        return ModelClass(
            id=mid, app_class=app, mean_interarrival_ms=inter,
            spawn_time_ms=spawn,
            footprint=ResourceVector(cpu=cpu, ram=ram, disk=disk),
            service_time_start_ms=st[0], service_time_end_ms=st[1],
            accuracy_start=acc[0], accuracy_end=acc[1],
            stability_start=1.0, stability_end=0.7)

    models = [
        mk("ML-d1", AppClass.DAPP, 3.0, 3.0, 1, 1, 0.01, (2.0, 0.5), (0.7, 1.0)),
        mk("ML-d2", AppClass.DAPP, 4.0, 3.0, 2, 1, 0.02, (4.0, 0.8), (0.7, 1.0)),
        mk("ML-x1", AppClass.XAPP, 350.0, 100.0, 16, 32, 0.1, (200.0, 100.0), (0.75, 1.0)),
        mk("ML-x2", AppClass.XAPP, 525.0, 100.0, 8, 32, 0.2, (300.0, 200.0), (0.75, 1.0)),
        mk("ML-r1", AppClass.RAPP, 1750.0, 1000.0, 32, 48, 1.0, (1000.0, 900.0), (0.8, 1.0)),
        mk("ML-r2", AppClass.RAPP, 3500.0, 1000.0, 32, 64, 2.0, (2000.0, 1800.0), (0.8, 1.0)),
    ]
    return {m.id: m for m in models}
