"""Scenario files: schema, validation, and the bundled evaluation preset.

A scenario is one YAML document declaring topology, the model table, the
release schedule, the policy roster, seeds, and the horizon. Validation
rejects unknown keys and reports diagnostics with field paths.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field

import yaml

from . import domain
from .cluster import LAYERS, WorkerNode
from .domain import AppClass, ModelClass, ResourceVector
from .repository import ReleaseSchedule


class InvalidScenario(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid scenario:\n" +
                         "\n".join(f"  {d}" for d in self.diagnostics))


_APP_CLASSES = {c.value: c for c in AppClass}

_TOP_KEYS = {"name", "horizon", "nodes", "models", "releases", "curve_mode",
             "minors_per_major", "max_version", "scaling", "update",
             "policies", "seeds"}
_NODE_KEYS = {"id", "layer", "role", "cpu", "ram", "disk",
              "transmission_delay_ms"}
_MODEL_KEYS = {"id", "app_class", "mean_interarrival_ms", "spawn_time_ms",
               "cpu", "ram", "disk", "service_time_ms", "accuracy",
               "stability", "processing_delay_ms", "delay_budget_ms"}
_POLICY_NAMES = ("always", "never", "random", "load_based", "rl")


def _cap(value, path, errors):
    if value == "unlimited":
        return math.inf
    if isinstance(value, (int, float)) and value >= 0:
        return float(value)
    errors.append(f"{path}: expected non-negative number or 'unlimited', "
                  f"got {value!r}")
    return 0.0


@dataclass
class Scenario:
    name: str
    nodes: list
    models: list
    horizon_events: int | None = None
    horizon_time_ms: float | None = None
    release_schedule: ReleaseSchedule | None = None
    curve_mode: str = "geometric"
    minors_per_major: int = domain.MINORS_PER_MAJOR
    max_version: int = domain.V_MAX
    scale_threshold: float | None = 2.0
    jump_to_latest: bool = True
    never_spawn_version: object = 0
    policies: dict = field(default_factory=lambda: {n: {} for n in _POLICY_NAMES})
    seeds: list = field(default_factory=lambda: list(range(1, 11)))

    # -- construction -----------------------------------------------------

    def build_nodes(self):
        """Fresh placement pool (ML-role nodes only), in declared order."""
        out = []
        for spec in self.nodes:
            if spec.get("role", "ml") != "ml":
                continue
            out.append(WorkerNode(
                id=spec["id"], layer=spec["layer"],
                capacity=ResourceVector(cpu=spec["cpu"], ram=spec["ram"],
                                        disk=spec["disk"]),
                transmission_delay_ms=spec.get("transmission_delay_ms", 0.0)))
        return out

    def build_models(self):
        out = {}
        for spec in self.models:
            model = ModelClass(
                id=spec["id"], app_class=_APP_CLASSES[spec["app_class"]],
                mean_interarrival_ms=spec["mean_interarrival_ms"],
                spawn_time_ms=spec["spawn_time_ms"],
                footprint=ResourceVector(cpu=spec["cpu"], ram=spec["ram"],
                                         disk=spec["disk"]),
                service_time_start_ms=spec["service_time_ms"][0],
                service_time_end_ms=spec["service_time_ms"][1],
                accuracy_start=spec["accuracy"][0],
                accuracy_end=spec["accuracy"][1],
                stability_start=spec["stability"][0],
                stability_end=spec["stability"][1],
                processing_delay_ms=spec.get("processing_delay_ms", 0.0),
                delay_budget_ms=spec.get("delay_budget_ms", 0.0))
            out[model.id] = model
        return out

    def policy_params(self, name):
        if name not in self.policies:
            raise KeyError(f"policy {name!r} not in scenario roster")
        params = dict(self.policies[name])
        if name == "never" and "spawn_pinned_version" not in params:
            params["spawn_pinned_version"] = self.never_spawn_version
        return params

    # -- serialization ----------------------------------------------------

    def canonical(self):
        sched = self.release_schedule
        return {
            "name": self.name,
            "horizon": ({"events": self.horizon_events}
                        if self.horizon_events is not None
                        else {"time_ms": self.horizon_time_ms}),
            "nodes": self.nodes,
            "models": self.models,
            "releases": (None if sched is None else {
                "mode": sched.mode,
                "mean_interrelease_ms": sched.mean_interrelease_ms,
                "max_version": sched.max_version}),
            "curve_mode": self.curve_mode,
            "minors_per_major": self.minors_per_major,
            "max_version": self.max_version,
            "scaling": {"threshold": self.scale_threshold},
            "update": {"jump_to_latest": self.jump_to_latest,
                       "never_spawn_version": self.never_spawn_version},
            "policies": self.policies,
            "seeds": self.seeds,
        }

    def digest(self):
        blob = json.dumps(self.canonical(), sort_keys=True,
                          default=lambda o: "inf" if o == math.inf else str(o))
        return hashlib.sha256(blob.encode()).hexdigest()

    def save(self, path):
        with open(path, "w") as fh:
            yaml.safe_dump(self.canonical(), fh, sort_keys=False)


def _validate_node(i, spec, errors):
    path = f"nodes[{i}]"
    if not isinstance(spec, dict):
        errors.append(f"{path}: expected a mapping")
        return None
    for key in spec:
        if key not in _NODE_KEYS:
            errors.append(f"{path}.{key}: unknown key")
    out = dict(spec)
    for req in ("id", "layer"):
        if req not in spec:
            errors.append(f"{path}.{req}: required")
            return None
    if spec["layer"] not in LAYERS:
        errors.append(f"{path}.layer: must be one of {LAYERS}")
        return None
    if spec.get("role", "ml") not in ("ml", "oran"):
        errors.append(f"{path}.role: must be 'ml' or 'oran'")
    for dim in ("cpu", "ram", "disk"):
        out[dim] = _cap(spec.get(dim, "unlimited"), f"{path}.{dim}", errors)
    td = spec.get("transmission_delay_ms", 0.0)
    if not isinstance(td, (int, float)) or td < 0:
        errors.append(f"{path}.transmission_delay_ms: must be >= 0")
    return out


def _validate_model(i, spec, errors):
    path = f"models[{i}]"
    if not isinstance(spec, dict):
        errors.append(f"{path}: expected a mapping")
        return None
    for key in spec:
        if key not in _MODEL_KEYS:
            errors.append(f"{path}.{key}: unknown key")
    for req in ("id", "app_class", "mean_interarrival_ms", "spawn_time_ms",
                "cpu", "ram", "disk", "service_time_ms", "accuracy",
                "stability"):
        if req not in spec:
            errors.append(f"{path}.{req}: required")
            return None
    if spec["app_class"] not in _APP_CLASSES:
        errors.append(f"{path}.app_class: must be one of "
                      f"{sorted(_APP_CLASSES)}")
        return None
    for pair in ("service_time_ms", "accuracy", "stability"):
        v = spec[pair]
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            errors.append(f"{path}.{pair}: expected [start, end]")
            return None
    for num in ("mean_interarrival_ms", "spawn_time_ms", "cpu", "ram", "disk"):
        v = spec[num]
        if not isinstance(v, (int, float)) or v < 0:
            errors.append(f"{path}.{num}: must be a non-negative number")
    if spec["mean_interarrival_ms"] == 0:
        errors.append(f"{path}.mean_interarrival_ms: must be > 0")
    return dict(spec)


def from_dict(raw):
    """Build a validated Scenario; raises InvalidScenario on errors."""
    errors = []
    if not isinstance(raw, dict):
        raise InvalidScenario(["document root must be a mapping"])
    for key in raw:
        if key not in _TOP_KEYS:
            errors.append(f"{key}: unknown key")

    horizon = raw.get("horizon") or {}
    horizon_events = horizon.get("events")
    horizon_time = horizon.get("time_ms")
    for key in horizon:
        if key not in ("events", "time_ms"):
            errors.append(f"horizon.{key}: unknown key")
    if horizon_events is None and horizon_time is None:
        errors.append("horizon: one of events/time_ms is required")
    if horizon_events is not None and (not isinstance(horizon_events, int)
                                       or horizon_events <= 0):
        errors.append("horizon.events: must be a positive integer")

    nodes, models = [], []
    for i, spec in enumerate(raw.get("nodes") or []):
        out = _validate_node(i, spec, errors)
        if out:
            nodes.append(out)
    if not any(n.get("role", "ml") == "ml" for n in nodes):
        errors.append("nodes: at least one ml-role node is required")
    for i, spec in enumerate(raw.get("models") or []):
        out = _validate_model(i, spec, errors)
        if out:
            models.append(out)
    if not models:
        errors.append("models: at least one model is required")

    schedule = None
    rel = raw.get("releases")
    if rel is not None:
        for key in rel:
            if key not in ("mode", "mean_interrelease_ms", "max_version"):
                errors.append(f"releases.{key}: unknown key")
        try:
            schedule = ReleaseSchedule(
                mode=rel.get("mode", "periodic"),
                mean_interrelease_ms=rel.get("mean_interrelease_ms", 1000.0),
                max_version=rel.get("max_version", domain.V_MAX))
        except ValueError as exc:
            errors.append(f"releases: {exc}")

    curve_mode = raw.get("curve_mode", "geometric")
    if curve_mode not in ("geometric", "percent-step"):
        errors.append("curve_mode: must be 'geometric' or 'percent-step'")

    scaling = raw.get("scaling") or {}
    threshold = scaling.get("threshold", 2.0)
    if threshold is not None and (not isinstance(threshold, (int, float))
                                  or threshold <= 0):
        errors.append("scaling.threshold: must be > 0 or null")

    update = raw.get("update") or {}
    roster = raw.get("policies") or {n: {} for n in _POLICY_NAMES}
    for name in roster:
        if name not in _POLICY_NAMES:
            errors.append(f"policies.{name}: unknown policy")

    seeds = raw.get("seeds", list(range(1, 11)))
    if not (isinstance(seeds, list) and seeds
            and all(isinstance(s, int) for s in seeds)):
        errors.append("seeds: must be a non-empty list of integers")

    if errors:
        raise InvalidScenario(errors)

    scenario = Scenario(
        name=raw.get("name", "unnamed"),
        nodes=nodes, models=models,
        horizon_events=horizon_events, horizon_time_ms=horizon_time,
        release_schedule=schedule, curve_mode=curve_mode,
        minors_per_major=raw.get("minors_per_major", domain.MINORS_PER_MAJOR),
        max_version=raw.get("max_version", domain.V_MAX),
        scale_threshold=threshold,
        jump_to_latest=update.get("jump_to_latest", True),
        never_spawn_version=update.get("never_spawn_version", 0),
        policies=roster, seeds=seeds)
    # Instantiating domain objects surfaces the remaining invariant errors.
    try:
        scenario.build_models()
        scenario.build_nodes()
    except (ValueError, KeyError) as exc:
        raise InvalidScenario([str(exc)]) from exc
    return scenario


def load(path):
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    return from_dict(raw)


def semantic_warnings(scn):
    """Non-fatal checks: e.g. footprints that no finite node ever admits."""
    warnings = []
    nodes = scn.build_nodes()
    for model in scn.build_models().values():
        if not any(model.footprint.fits_within(n.capacity) for n in nodes):
            warnings.append(f"model {model.id}: footprint fits no node; "
                            "all its requests will be dropped")
    return warnings


def paper_preset(events=1_000_000, seeds=None):
    """The bundled evaluation scenario: 6 models, 4-node placement pool.

    Edge has two 32-CPU/32-GB ML workers (plus the two non-placement
    O-RAN workers), regional and central each contribute one unlimited
    inference node. Releases are periodic and spaced so the whole version
    range is published within the expected run duration.
    """
    models = domain.default_models()
    rate = sum(1.0 / m.mean_interarrival_ms for m in models.values())
    expected_duration_ms = (events / 2) / rate
    interrelease = expected_duration_ms / domain.V_MAX

    model_specs = []
    for m in models.values():
        model_specs.append({
            "id": m.id, "app_class": m.app_class.value,
            "mean_interarrival_ms": m.mean_interarrival_ms,
            "spawn_time_ms": m.spawn_time_ms,
            "cpu": m.footprint.cpu, "ram": m.footprint.ram,
            "disk": m.footprint.disk,
            "service_time_ms": [m.service_time_start_ms, m.service_time_end_ms],
            "accuracy": [m.accuracy_start, m.accuracy_end],
            "stability": [m.stability_start, m.stability_end],
            "processing_delay_ms": 0.0,
        })

    def node(nid, layer, role, cpu, ram, delay):
        return {"id": nid, "layer": layer, "role": role, "cpu": cpu,
                "ram": ram, "disk": "unlimited",
                "transmission_delay_ms": delay}

    raw = {
        "name": "paper-s5",
        "horizon": {"events": events},
        "nodes": [
            node("edge-oran-1", "edge", "oran", 32, 32, 1.0),
            node("edge-oran-2", "edge", "oran", 32, 32, 1.0),
            node("edge-ml-1", "edge", "ml", 32, 32, 1.0),
            node("edge-ml-2", "edge", "ml", 32, 32, 1.0),
            node("regional-ml", "regional", "ml", "unlimited", "unlimited", 10.0),
            node("central-ml", "central", "ml", "unlimited", "unlimited", 50.0),
        ],
        "models": model_specs,
        "releases": {"mode": "periodic",
                     "mean_interrelease_ms": interrelease,
                     "max_version": domain.V_MAX},
        "curve_mode": "geometric",
        "scaling": {"threshold": 2.0},
        "policies": {
            "always": {},
            "never": {},
            "random": {},
            "load_based": {"load_threshold": 0.5},
            "rl": {"learning_rate": 0.01, "discount": 0.99,
                   "epsilon0": 1.0, "epsilon_min": 0.001,
                   "reward": {"w1": 0.025, "w2": 1.0, "w3": 2.0,
                              "alpha": 0.5}},
        },
        "seeds": seeds or list(range(1, 11)),
    }
    return from_dict(raw)


PRESETS = {"paper-s5": paper_preset}
