"""Update agents: always / never / random / server-load-based / Q-learning.

All agents sit behind one interface: decide() answers "replace this replica
with the latest version?" when a fresher release exists, and spawn_version()
picks the version for a scale-out replica. The learning agent keeps a tabular
state-action store over a small discretized state.
"""

from dataclasses import dataclass, field

from . import kernels

LOAD_BIN_EDGES = (0.125, 0.375, 0.625, 0.875)
MAX_VERSION_GAP_BIN = 5


class PolicyError(Exception):
    pass


def load_bin(load):
    """Quantize a CPU-load fraction to the nearest of {0, .25, .5, .75, 1}."""
    for i, edge in enumerate(LOAD_BIN_EDGES):
        if load < edge:
            return i
    return 4


def queue_bin(queue_len):
    """Model queue length bucketed as 0 / 1-2 / 3-5 / 6-10 / >10."""
    if queue_len <= 0:
        return 0
    if queue_len <= 2:
        return 1
    if queue_len <= 5:
        return 2
    if queue_len <= 10:
        return 3
    return 4


def encode_state(node_load, queue_len, model_index, version_gap):
    """Discretized decision state: (load bin, queue bin, model id, gap bin)."""
    return (load_bin(node_load), queue_bin(queue_len), model_index,
            min(version_gap, MAX_VERSION_GAP_BIN))


@dataclass(frozen=True)
class DecisionContext:
    """Everything a policy may look at when deciding on one replica."""

    node_load: float
    queue_len: int
    model_index: int
    version_gap: int

    def state(self):
        return encode_state(self.node_load, self.queue_len, self.model_index,
                            self.version_gap)


@dataclass(frozen=True)
class RewardWeights:
    w1: float = 0.025
    w2: float = 1.0
    w3: float = 2.0
    alpha: float = 0.5  # trade-off coefficient, not the learning rate

    def __post_init__(self):
        if min(self.w1, self.w2, self.w3) < 0:
            raise ValueError("weights must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")


def reward_for_record(record, weights, delay_budget_ms):
    """Reward of one served request: budget-relative delay and
    destabilization are penalized, accuracy is rewarded."""
    psi = record.total_ms / delay_budget_ms
    sigma = 1.0 - record.stability
    return kernels.reward_value(psi, sigma, record.accuracy, weights.alpha,
                                weights.w1, weights.w2, weights.w3)


def epsilon_decay_factor(total_events, epsilon0=1.0, epsilon_min=0.001):
    """Per-event multiplicative decay hitting epsilon_min at total_events/2."""
    if total_events <= 0:
        raise ValueError("total_events must be > 0")
    return (epsilon_min / epsilon0) ** (2.0 / total_events)


def epsilon_at(event_index, total_events, epsilon0=1.0, epsilon_min=0.001):
    """Exploration rate after event_index events have been processed."""
    d = epsilon_decay_factor(total_events, epsilon0, epsilon_min)
    return max(epsilon_min, epsilon0 * d ** event_index)


class QTable:
    """Sparse state-action value store; missing entries read as 0."""

    def __init__(self, learning_rate=0.01, discount=0.99):
        self.learning_rate = learning_rate
        self.discount = discount
        self.values = {}

    def get(self, state, action):
        return self.values.get((state, action), 0.0)

    def max_value(self, state):
        return max(self.get(state, 0), self.get(state, 1))

    def greedy_action(self, state):
        q0, q1 = self.get(state, 0), self.get(state, 1)
        return 1 if q1 > q0 else 0

    def update(self, state, action, reward, next_state):
        """One-step TD update; returns (before, after, max_next)."""
        before = self.get(state, action)
        max_next = self.max_value(next_state)
        after = kernels.q_step(before, self.learning_rate, reward,
                               self.discount, max_next)
        self.values[(state, action)] = after
        return before, after, max_next

    def save(self, path):
        with open(path, "w") as fh:
            fh.write("load_bin,queue_bin,model_index,gap_bin,action,value\n")
            for (state, action) in sorted(self.values):
                value = self.values[(state, action)]
                fh.write(",".join(str(c) for c in state)
                         + f",{action},{value!r}\n")

    @classmethod
    def load(cls, path, learning_rate=0.01, discount=0.99):
        table = cls(learning_rate=learning_rate, discount=discount)
        with open(path) as fh:
            next(fh)  # header
            for line in fh:
                parts = line.strip().split(",")
                state = tuple(int(c) for c in parts[:4])
                table.values[(state, int(parts[4]))] = float(parts[5])
        return table


class UpdatePolicy:
    """Base update agent. Subclasses override decide() and spawn_version()."""

    name = "base"
    uses_rng = False
    is_learning = False

    def bind_rng(self, rng):
        self.rng = rng

    def decide(self, ctx):
        raise NotImplementedError

    def spawn_version(self, latest, production):
        raise NotImplementedError

    def on_event(self):
        """Called once per processed simulation event."""


class AlwaysUpdate(UpdatePolicy):
    name = "always"

    def decide(self, ctx):
        return 1

    def spawn_version(self, latest, production):
        return latest


class NeverUpdate(UpdatePolicy):
    name = "never"

    def __init__(self, spawn_pinned_version=0):
        self.spawn_pinned_version = spawn_pinned_version

    def decide(self, ctx):
        return 0

    def spawn_version(self, latest, production):
        if self.spawn_pinned_version == "production":
            return production
        return min(self.spawn_pinned_version, latest)


class RandomUpdate(UpdatePolicy):
    name = "random"
    uses_rng = True

    def decide(self, ctx):
        return 1 if self.rng.random() < 0.5 else 0

    def spawn_version(self, latest, production):
        return int(self.rng.integers(0, latest + 1))


class LoadBasedUpdate(UpdatePolicy):
    """Update only while the hosting node's load sits below a threshold.

    Scale-out replicas get a uniformly random published version: at spawn
    time the target node is not yet known, so no load estimate exists.
    """

    name = "load_based"
    uses_rng = True

    def __init__(self, load_threshold=0.5):
        self.load_threshold = load_threshold

    def decide(self, ctx):
        return 1 if ctx.node_load < self.load_threshold else 0

    def spawn_version(self, latest, production):
        return int(self.rng.integers(0, latest + 1))


class QLearningPolicy(UpdatePolicy):
    """Tabular epsilon-greedy agent over the discretized decision state."""

    name = "rl"
    uses_rng = True
    is_learning = True

    def __init__(self, learning_rate=0.01, discount=0.99, epsilon0=1.0,
                 epsilon_min=0.001, total_events=None,
                 reward_weights=RewardWeights(), qtable=None):
        self.table = qtable or QTable(learning_rate=learning_rate,
                                      discount=discount)
        self.epsilon = epsilon0
        self.epsilon_min = epsilon_min
        self.reward_weights = reward_weights
        self.decay = (epsilon_decay_factor(total_events, epsilon0, epsilon_min)
                      if total_events else 1.0)

    def set_total_events(self, total_events, epsilon0=1.0):
        self.decay = epsilon_decay_factor(total_events, epsilon0,
                                          self.epsilon_min)

    def on_event(self):
        if self.epsilon > self.epsilon_min:
            self.epsilon = max(self.epsilon * self.decay, self.epsilon_min)

    def decide(self, ctx):
        if self.rng.random() < self.epsilon:
            return 1 if self.rng.random() < 0.5 else 0
        return self.table.greedy_action(ctx.state())

    def spawn_version(self, latest, production):
        if production >= latest:
            return latest
        ctx = DecisionContext(node_load=0.0, queue_len=0, model_index=0,
                              version_gap=latest - production)
        return latest if self.decide(ctx) else production


def make_policy(name, params=None):
    params = dict(params or {})
    if name == "always":
        return AlwaysUpdate()
    if name == "never":
        return NeverUpdate(**params)
    if name == "random":
        return RandomUpdate()
    if name == "load_based":
        return LoadBasedUpdate(**params)
    if name == "rl":
        if "reward" in params:
            params["reward_weights"] = RewardWeights(**params.pop("reward"))
        return QLearningPolicy(**params)
    raise PolicyError(f"unknown policy {name!r}")
