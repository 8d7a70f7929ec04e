"""Deterministic discrete-event engine.

One run owns a heap-ordered event list (arrivals, departures, releases,
spawn completions), a capacitated cluster, a version repository, and one
update policy. All randomness flows through named Philox substreams derived
from (seed, stream name), so adding a model or policy never perturbs another
stream's draws, and a fixed (scenario, policy, seed) triple replays
bit-exactly.
"""

import hashlib
import heapq
from dataclasses import dataclass, field

import numpy as np

from . import cluster as clustermod
from . import domain, kernels, policies, repository
from .cluster import Cluster, NoCapacity, Replica
from .policies import DecisionContext

ARRIVAL, DEPARTURE, RELEASE, SPAWN_COMPLETE = 0, 1, 2, 3


class EngineError(Exception):
    pass


class HorizonZero(EngineError):
    pass


def substream(seed, name):
    """Named, seedable substream: independent Philox generator per purpose."""
    digest = hashlib.sha256(name.encode()).digest()
    key = (int.from_bytes(digest[:4], "little"),
           int.from_bytes(digest[4:8], "little"))
    ss = np.random.SeedSequence(entropy=seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def queueing_delay(arrival_ms, departure_ms, tau_t, tau_s, tau_p, tau_i):
    """Residual wait: total sojourn minus the four accounted components,
    floored at zero."""
    return max(0.0, departure_ms - arrival_ms - (tau_t + tau_s + tau_p + tau_i))


@dataclass
class Request:
    id: int
    model_id: str
    arrival_ms: float
    # Filled at service start.
    service_start_ms: float = 0.0
    service_time_ms: float = 0.0
    tau_s_ms: float = 0.0
    served_version: int = 0
    node_id: str = ""
    accuracy: float = 0.0
    stability: float = 0.0


@dataclass
class RequestRecord:
    """One completed inference request with its five delay components."""

    id: int
    model_id: str
    app_class: str
    arrival_ms: float
    node_id: str
    served_version: int
    tau_p_ms: float
    tau_i_ms: float
    tau_t_ms: float
    tau_s_ms: float
    tau_q_ms: float
    total_ms: float
    accuracy: float
    stability: float

    CSV_HEADER = ("id,model,app_class,arrival_ms,node,served_version,"
                  "tau_p_ms,tau_i_ms,tau_t_ms,tau_s_ms,tau_q_ms,total_ms,"
                  "accuracy,stability")

    def csv_row(self):
        return (f"{self.id},{self.model_id},{self.app_class},"
                f"{self.arrival_ms!r},{self.node_id},{self.served_version},"
                f"{self.tau_p_ms!r},{self.tau_i_ms!r},{self.tau_t_ms!r},"
                f"{self.tau_s_ms!r},{self.tau_q_ms!r},{self.total_ms!r},"
                f"{self.accuracy!r},{self.stability!r}")


@dataclass
class PolicyLogEntry:
    """One update decision; learning fields fill in when the reward for the
    decision is realized at the next completed request on the lineage."""

    time_ms: float
    model_id: str
    replica_id: int
    old_version: int
    new_version: int
    action: int
    forced: str = ""  # "no-capacity" or "latest" when the action was forced
    epsilon: float | None = None
    state: tuple | None = None
    reward: float | None = None
    next_state: tuple | None = None
    q_before: float | None = None
    q_after: float | None = None
    max_next: float | None = None
    reward_total_ms: float | None = None
    reward_accuracy: float | None = None
    reward_stability: float | None = None
    delay_budget_ms: float | None = None

    CSV_HEADER = ("time_ms,model,replica,old_version,new_version,action,"
                  "forced,epsilon,state,reward,next_state,q_before,q_after,"
                  "max_next,reward_total_ms,reward_accuracy,reward_stability,"
                  "delay_budget_ms")

    @staticmethod
    def _opt(value):
        if value is None:
            return ""
        if isinstance(value, tuple):
            return ";".join(str(v) for v in value)
        return repr(value)

    def csv_row(self):
        cols = [repr(self.time_ms), self.model_id, str(self.replica_id),
                str(self.old_version), str(self.new_version), str(self.action),
                self.forced, self._opt(self.epsilon), self._opt(self.state),
                self._opt(self.reward), self._opt(self.next_state),
                self._opt(self.q_before), self._opt(self.q_after),
                self._opt(self.max_next), self._opt(self.reward_total_ms),
                self._opt(self.reward_accuracy),
                self._opt(self.reward_stability),
                self._opt(self.delay_budget_ms)]
        return ",".join(cols)


@dataclass
class SimResult:
    policy_name: str
    seed: int
    records: list
    policy_log: list
    events_processed: int
    arrivals: int
    capacity_checks: int
    qtable: object = None

    def in_flight(self):
        return self.arrivals - len(self.records)


@dataclass
class _ModelRuntime:
    model: domain.ModelClass
    index: int
    replicas: list = field(default_factory=list)
    arrival_rng: object = None
    service_rng: object = None

    def queued(self):
        return sum(len(r.queue) for r in self.replicas)

    def backlog(self):
        return sum(r.backlog() for r in self.replicas)


class Simulation:
    """One deterministic run of (scenario, policy, seed)."""

    def __init__(self, scenario, policy, seed, audit_capacity=False):
        if scenario.horizon_events is not None and scenario.horizon_events <= 0:
            raise HorizonZero("event horizon must be > 0")
        if scenario.horizon_events is None and not scenario.horizon_time_ms:
            raise HorizonZero("scenario declares no horizon")
        self.scenario = scenario
        self.policy = policy
        self.seed = seed
        self.audit_capacity = audit_capacity

        self.cluster = Cluster(scenario.build_nodes())
        self.models = scenario.build_models()
        self.repo = repository.VersionRepository(
            self.models, curve_mode=scenario.curve_mode,
            v_max=scenario.max_version,
            minors_per_major=scenario.minors_per_major)

        self.runtimes = {}
        for index, (mid, model) in enumerate(self.models.items()):
            self.runtimes[mid] = _ModelRuntime(
                model=model, index=index,
                arrival_rng=substream(seed, f"arrival/{mid}"),
                service_rng=substream(seed, f"service/{mid}"))
        if policy.uses_rng:
            policy.bind_rng(substream(seed, f"policy/{policy.name}"))
        if policy.is_learning:
            policy.set_total_events(self._total_events_estimate())

        self.heap = []
        self.seq = 0
        self.now = 0.0
        self.records = []
        self.policy_log = []
        self.events_processed = 0
        self.arrivals = 0
        self.capacity_checks = 0
        self._next_request_id = 0
        self._next_replica_id = 0

        for mid, rt in self.runtimes.items():
            gap = self._exp(rt.arrival_rng, rt.model.mean_interarrival_ms)
            self._push(gap, ARRIVAL, rt)
        self._schedule_releases()

    # -- plumbing ---------------------------------------------------------

    def _total_events_estimate(self):
        if self.scenario.horizon_events is not None:
            return self.scenario.horizon_events
        rate = sum(1.0 / m.mean_interarrival_ms for m in self.models.values())
        releases = len(self.models) * self.scenario.release_schedule.max_version
        return int(2 * rate * self.scenario.horizon_time_ms) + releases

    @staticmethod
    def _exp(rng, mean):
        return kernels.exp_interval(rng.random(), mean)

    def _push(self, time_ms, kind, payload, extra=None):
        heapq.heappush(self.heap, (time_ms, self.seq, kind, payload, extra))
        self.seq += 1

    def _schedule_releases(self):
        sched = self.scenario.release_schedule
        if sched is None or sched.max_version == 0:
            return
        for mid in self.models:
            rng = (substream(self.seed, f"release/{mid}")
                   if sched.mode == "poisson" else None)
            for version, t in repository.release_times(sched, rng):
                self._push(t, RELEASE, mid, version)

    # -- replica lifecycle ------------------------------------------------

    def _spawn_replica(self, rt, now):
        """Scale-out or first-demand spawn; returns the replica or None."""
        latest = self.repo.latest_version(rt.model.id)
        production = max((r.version for r in rt.replicas), default=0)
        version = self.policy.spawn_version(latest, production)
        try:
            node = self.cluster.place_first_fit(rt.model.footprint)
        except NoCapacity:
            return None
        self.cluster.allocate(node, rt.model.footprint)
        self.capacity_checks += 1
        replica = Replica(id=self._next_replica_id, model_id=rt.model.id,
                          version=version, node=node,
                          spawn_complete_ms=now + rt.model.spawn_time_ms,
                          spawn_charge_ms=rt.model.spawn_time_ms)
        self._next_replica_id += 1
        rt.replicas.append(replica)
        self._push(replica.spawn_complete_ms, SPAWN_COMPLETE, replica)
        return replica

    def _remove_replica(self, rt, replica):
        self.cluster.free(replica.node, rt.model.footprint)
        self.capacity_checks += 1
        replica.dead = True
        rt.replicas.remove(replica)

    def _replace_replica(self, rt, old, new_version, now):
        """Terminate a replica and spawn its successor at new_version.

        The queued requests migrate to the successor; resources are freed
        before first-fit runs again. Returns the successor, or None when no
        node admits the footprint (caller then forces the keep decision)."""
        fp = rt.model.footprint
        self.cluster.free(old.node, fp)
        try:
            node = self.cluster.place_first_fit(fp)
        except NoCapacity:
            self.cluster.allocate(old.node, fp)  # roll back, keep running
            return None
        self.cluster.allocate(node, fp)
        self.capacity_checks += 2
        successor = Replica(id=self._next_replica_id, model_id=old.model_id,
                            version=new_version, node=node,
                            spawn_complete_ms=now + rt.model.spawn_time_ms,
                            spawn_charge_ms=rt.model.spawn_time_ms,
                            queue=old.queue)
        successor.pending_decision = old.pending_decision
        self._next_replica_id += 1
        old.dead = True
        rt.replicas[rt.replicas.index(old)] = successor
        self._push(successor.spawn_complete_ms, SPAWN_COMPLETE, successor)
        return successor

    def _try_start_service(self, rt, replica, now):
        if replica.dead or replica.busy or not replica.queue:
            return
        if now + 1e-12 < replica.spawn_complete_ms:
            return  # the spawn-complete event will start service
        request = replica.queue.popleft()
        attrs = self.repo.attributes(rt.model.id, replica.version)
        request.service_start_ms = now
        request.service_time_ms = self._exp(rt.service_rng,
                                            attrs.mean_service_time_ms)
        request.tau_s_ms = replica.spawn_charge_ms
        replica.spawn_charge_ms = 0.0
        request.served_version = replica.version
        request.node_id = replica.node.id
        request.accuracy = attrs.accuracy
        request.stability = attrs.stability
        replica.in_service = request
        self._push(now + request.service_time_ms, DEPARTURE, replica, request)

    def _scaling_check(self, rt, now, candidate_idle=None):
        action = clustermod.scaling_action(
            rt.backlog(), len(rt.replicas), self.scenario.scale_threshold,
            idle_replica=candidate_idle is not None)
        if action == "spawn":
            self._spawn_replica(rt, now)
        elif action == "remove" and candidate_idle is not None:
            self._remove_replica(rt, candidate_idle)

    # -- event handlers ---------------------------------------------------

    def _on_arrival(self, rt, now):
        self._push(now + self._exp(rt.arrival_rng,
                                   rt.model.mean_interarrival_ms), ARRIVAL, rt)
        if not rt.replicas:
            self._spawn_replica(rt, now)
        if not rt.replicas:
            return  # nothing admits the footprint; request never enters
        request = Request(id=self._next_request_id, model_id=rt.model.id,
                          arrival_ms=now)
        self._next_request_id += 1
        self.arrivals += 1
        target = min(rt.replicas, key=lambda r: (r.backlog(), r.id))
        target.queue.append(request)
        self._try_start_service(rt, target, now)
        self._scaling_check(rt, now)

    def _complete(self, rt, replica, request, now):
        model = rt.model
        tau_i = request.service_time_ms
        tau_t = replica.node.transmission_delay_ms
        tau_p = model.processing_delay_ms
        tau_s = request.tau_s_ms
        tau_q = max(0.0, request.service_start_ms - request.arrival_ms - tau_s)
        total = tau_p + tau_i + tau_t + tau_s + tau_q
        record = RequestRecord(
            id=request.id, model_id=model.id,
            app_class=model.app_class.value, arrival_ms=request.arrival_ms,
            node_id=request.node_id, served_version=request.served_version,
            tau_p_ms=tau_p, tau_i_ms=tau_i, tau_t_ms=tau_t, tau_s_ms=tau_s,
            tau_q_ms=tau_q, total_ms=total, accuracy=request.accuracy,
            stability=request.stability)
        self.records.append(record)
        return record

    def _update_hook(self, rt, replica, record, now):
        """Per-departure decision point; may replace the replica."""
        policy = self.policy
        latest = self.repo.latest_version(rt.model.id)
        gap = latest - replica.version
        ctx = DecisionContext(node_load=replica.node.load(),
                              queue_len=rt.queued(),
                              model_index=rt.index, version_gap=gap)
        state = ctx.state()

        if policy.is_learning and replica.pending_decision is not None:
            prev_state, prev_action, prev_entry = replica.pending_decision
            reward = policies.reward_for_record(record, policy.reward_weights,
                                                rt.model.delay_budget_ms)
            before, after, max_next = policy.table.update(
                prev_state, prev_action, reward, state)
            prev_entry.reward = reward
            prev_entry.next_state = state
            prev_entry.q_before = before
            prev_entry.q_after = after
            prev_entry.max_next = max_next
            prev_entry.reward_total_ms = record.total_ms
            prev_entry.reward_accuracy = record.accuracy
            prev_entry.reward_stability = record.stability
            prev_entry.delay_budget_ms = rt.model.delay_budget_ms

        action = 0
        forced = ""
        if gap >= 1:
            action = policy.decide(ctx)
        else:
            forced = "latest"

        entry = None
        if gap >= 1 or policy.is_learning:
            entry = PolicyLogEntry(
                time_ms=now, model_id=rt.model.id, replica_id=replica.id,
                old_version=replica.version, new_version=replica.version,
                action=action, forced=forced,
                epsilon=policy.epsilon if policy.is_learning else None,
                state=state)
            self.policy_log.append(entry)

        survivor = replica
        if action == 1:
            new_version = domain.apply_update(
                replica.version, 1, latest,
                jump_to_latest=self.scenario.jump_to_latest)
            successor = self._replace_replica(rt, replica, new_version, now)
            if successor is None:
                action = 0
                entry.action = 0
                entry.forced = "no-capacity"
            else:
                survivor = successor
                entry.new_version = new_version
        if policy.is_learning:
            survivor.pending_decision = (state, action, entry)
        return survivor

    def _on_departure(self, rt, replica, request, now):
        replica.in_service = None
        record = self._complete(rt, replica, request, now)
        survivor = self._update_hook(rt, replica, record, now)
        self._try_start_service(rt, survivor, now)
        idle = (not survivor.busy and not survivor.queue
                and now + 1e-12 >= survivor.spawn_complete_ms)
        self._scaling_check(rt, now, candidate_idle=survivor if idle else None)

    def _on_release(self, model_id, version, now):
        self.repo.publish(model_id, version, now)

    def _on_spawn_complete(self, rt, replica, now):
        if not replica.dead:
            self._try_start_service(rt, replica, now)
            idle = not replica.busy and not replica.queue
            self._scaling_check(rt, now,
                                candidate_idle=replica if idle else None)

    # -- main loop --------------------------------------------------------

    def run(self):
        max_events = self.scenario.horizon_events
        max_time = self.scenario.horizon_time_ms
        while self.heap:
            if max_events is not None and self.events_processed >= max_events:
                break
            time_ms, _seq, kind, payload, extra = heapq.heappop(self.heap)
            if max_time is not None and time_ms > max_time:
                break
            assert time_ms >= self.now - 1e-9
            self.now = time_ms
            self.events_processed += 1
            self.policy.on_event()
            if kind == ARRIVAL:
                self._on_arrival(payload, time_ms)
            elif kind == DEPARTURE:
                self._on_departure(self.runtimes[payload.model_id], payload,
                                   extra, time_ms)
            elif kind == RELEASE:
                self._on_release(payload, extra, time_ms)
            else:
                self._on_spawn_complete(self.runtimes[payload.model_id],
                                        payload, time_ms)
            if self.audit_capacity:
                self.cluster.check_capacity()
                self.capacity_checks += len(self.cluster.nodes)
        self.cluster.check_capacity()
        self.capacity_checks += len(self.cluster.nodes)
        return SimResult(
            policy_name=self.policy.name, seed=self.seed,
            records=self.records, policy_log=self.policy_log,
            events_processed=self.events_processed, arrivals=self.arrivals,
            capacity_checks=self.capacity_checks,
            qtable=self.policy.table if self.policy.is_learning else None)


def run_simulation(scenario, policy_name, seed, policy_params=None,
                   audit_capacity=False):
    """Build the policy from the scenario roster and run one simulation."""
    params = dict(scenario.policy_params(policy_name))
    params.update(policy_params or {})
    policy = policies.make_policy(policy_name, params)
    return Simulation(scenario, policy, seed,
                      audit_capacity=audit_capacity).run()
