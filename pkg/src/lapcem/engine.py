"""Single-instance cross-entropy generation loop.

Graphs are built one edge slot at a time.  The policy sees the current edge
bits followed by a one-hot marker of the slot being decided, and its boolean
action is XOR-ed into that slot.  Starting from all-zero bits this is plain
edge insertion; starting from the incumbent best graph it is a local search
around it.
"""

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import ConfigError, LifecycleError, NumericalFailure
from .graph import Graph, n_slots
from .policy import (
    DEFAULT_HIDDEN,
    DEFAULT_LR,
    NetworkArchitecture,
    PolicyNetwork,
    TrainBatch,
    forward,
    init_network,
    train_step,
)


@dataclass(frozen=True)
class GenerationConfig:
    batch_size: int = 200
    elite_learn_frac: float = 0.10
    elite_survive_frac: float = 0.05
    seed_fraction: float = 0.0
    epsilon_random_frac: float = 0.0005
    learning_rate: float = DEFAULT_LR
    hidden_sizes: tuple = DEFAULT_HIDDEN
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        self.validate()

    def validate(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if not 0 < self.elite_survive_frac <= self.elite_learn_frac < 1:
            raise ConfigError(
                "need 0 < elite_survive_frac <= elite_learn_frac < 1, got "
                f"{self.elite_survive_frac} and {self.elite_learn_frac}"
            )
        for name in ("seed_fraction", "epsilon_random_frac"):
            val = getattr(self, name)
            if not 0 <= val <= 1:
                raise ConfigError(f"{name} must be in [0, 1], got {val}")
        if self.learning_rate < 0:
            raise ConfigError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ConfigError("hidden_sizes must list at least one positive width")

    @property
    def n_learn(self) -> int:
        return math.ceil(self.elite_learn_frac * self.batch_size)

    @property
    def n_survive(self) -> int:
        return math.ceil(self.elite_survive_frac * self.batch_size)

    def batch_split(self, have_incumbent: bool) -> tuple:
        """(seeded, random, zero-start) rollout counts for one generation."""
        b = self.batch_size
        n_rand = min(b, math.ceil(self.epsilon_random_frac * b))
        n_seed = math.ceil(self.seed_fraction * b) if have_incumbent else 0
        n_seed = min(n_seed, b - n_rand)
        return n_seed, n_rand, b - n_seed - n_rand


@dataclass
class RolloutState:
    edge_bits: np.ndarray
    position: int = 0
    done: bool = False

    def __post_init__(self):
        self.edge_bits = np.asarray(self.edge_bits, dtype=np.uint8).copy()
        if self.position >= len(self.edge_bits):
            self.done = True


def build_observation(state: RolloutState) -> np.ndarray:
    if state.done:
        raise LifecycleError("rollout already finished")
    e = len(state.edge_bits)
    obs = np.zeros(2 * e, dtype=np.uint8)
    obs[:e] = state.edge_bits
    obs[e + state.position] = 1
    return obs


def apply_action(state: RolloutState, action) -> RolloutState:
    if state.done:
        raise LifecycleError("rollout already finished")
    bits = state.edge_bits.copy()
    bits[state.position] ^= int(bool(action))
    return RolloutState(bits, state.position + 1)


def rollout_trace(net: PolicyNetwork, initial_bits, epsilon_active: bool, rng):
    """Step-by-step rollout; returns ``(graph, actions)``.

    Draws one uniform per slot up front, in the same order as the batch
    kernel, so both give the same graph for the same generator state.
    """
    init = np.asarray(initial_bits, dtype=np.uint8)
    e = len(init)
    n = int(round((1 + math.sqrt(1 + 8 * e)) / 2))
    if n_slots(n) != e:
        raise ValueError(f"{e} is not a triangular edge-slot count")
    u = rng.random(e)
    state = RolloutState(init)
    actions = np.zeros(e, dtype=np.uint8)
    for k in range(e):
        p1 = 0.5 if epsilon_active else forward(net, build_observation(state))[1]
        actions[k] = u[k] < p1
        state = apply_action(state, actions[k])
    return Graph(n, state.edge_bits), actions


def rollout(net: PolicyNetwork, initial_bits, epsilon_active: bool, rng) -> Graph:
    return rollout_trace(net, initial_bits, epsilon_active, rng)[0]


def trace_observations(init_bits, actions) -> np.ndarray:
    """Observations seen along a rollout, one row per step."""
    init = np.asarray(init_bits, dtype=np.uint8)
    acts = np.asarray(actions, dtype=np.uint8)
    e = len(init)
    before = np.tri(e, e, -1, dtype=np.uint8)  # before[k, j] = j < k
    bits = init[None, :] ^ (acts[None, :] & before)
    return np.hstack([bits, np.eye(e, dtype=np.uint8)])


def select_elites(rewards, cfg: GenerationConfig):
    """Indices of the learning set and the survivors, best first.

    Ties keep batch order, so earlier entries (survivors first) win.
    """
    r = np.asarray(rewards, dtype=np.float64)
    if r.size == 0:
        raise ValueError("no scored graphs")
    order = np.argsort(-r, kind="stable")
    return order[:cfg.n_learn], order[:cfg.n_survive]


@dataclass
class Candidate:
    bits: np.ndarray
    init_bits: np.ndarray
    actions: np.ndarray
    reward: float


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    instance_id: int
    best_reward: float
    mean_reward: float
    global_best_reward: float
    edges_in_best: int
    counterexample_found: bool
    wall_time: float
    loss: float = float("nan")

    CSV_FIELDS = (
        "generation", "instance_id", "best_reward", "mean_reward",
        "global_best_reward", "edges_in_best", "wall_ms",
    )

    def csv_row(self) -> dict:
        return {
            "generation": self.generation,
            "instance_id": self.instance_id,
            "best_reward": repr(self.best_reward),
            "mean_reward": repr(self.mean_reward),
            "global_best_reward": repr(self.global_best_reward),
            "edges_in_best": self.edges_in_best,
            "wall_ms": f"{self.wall_time * 1000:.3f}",
        }

    def same_trajectory(self, other) -> bool:
        """Equality ignoring wall time."""
        return replace(self, wall_time=0.0) == replace(other, wall_time=0.0)


def instance_seed(master_seed: int, instance_id: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(instance_id,))


class CEInstance:
    """One policy network plus its private population state."""

    def __init__(self, n: int, scorer, cfg: GenerationConfig, instance_id: int = 0,
                 halt_on_counterexample: bool = True):
        if n < 2:
            raise ConfigError(f"n must be >= 2, got {n}")
        self.n = n
        self.n_slots = n_slots(n)
        self.scorer = scorer
        self.cfg = cfg
        self.instance_id = instance_id
        self.halt_on_counterexample = halt_on_counterexample
        seq = instance_seed(cfg.rng_seed, instance_id)
        net_seq, rng_seq = (np.random.SeedSequence(seq.entropy, spawn_key=seq.spawn_key + (k,)) for k in range(2))
        arch = NetworkArchitecture.for_vertices(n, cfg.hidden_sizes)
        self.net = init_network(arch, net_seq)
        self._sizes = np.array(arch.sizes, dtype=np.int64)
        self.rng = np.random.default_rng(rng_seq)
        self.generation = 0
        self.survivors: list = []
        self.best = None
        self.counterexamples: list = []
        self._certified = set()
        self.history: list = []

    @property
    def global_best_reward(self) -> float:
        return -math.inf if self.best is None else self.best.reward

    @property
    def halted(self) -> bool:
        return self.halt_on_counterexample and bool(self.counterexamples)

    def best_graph(self):
        return None if self.best is None else Graph(self.n, self.best.bits)

    def _rollouts(self):
        cfg = self.cfg
        e = self.n_slots
        n_seed, n_rand, _ = cfg.batch_split(self.best is not None)
        init = np.zeros((cfg.batch_size, e), dtype=np.uint8)
        if n_seed:
            init[:n_seed] = self.best.bits
        random_rows = np.zeros(cfg.batch_size, dtype=np.bool_)
        random_rows[n_seed:n_seed + n_rand] = True
        u = self.rng.random((cfg.batch_size, e))
        bits, actions = kernels.rollout_batch(init, u, random_rows, self.net.theta, self._sizes)
        return init, bits, actions

    def run_generation(self) -> GenerationStats:
        if self.halted:
            raise LifecycleError("instance halted after certifying a counterexample")
        t0 = time.perf_counter()
        rng_state = self.rng.bit_generator.state
        try:
            init, bits, actions = self._rollouts()
            new_rewards = self.scorer.score(bits)
            pool = list(self.survivors) + [
                Candidate(bits[i], init[i], actions[i], float(new_rewards[i]))
                for i in range(len(bits))
            ]
            rewards = np.array([c.reward for c in pool])
            learn_idx, surv_idx = select_elites(rewards, self.cfg)
            found = []
            for i in np.flatnonzero(rewards > getattr(self.scorer, "strict_tol", math.inf)):
                key = pool[i].bits.tobytes()
                if key in self._certified:
                    continue
                try:
                    rec = self.scorer.certify(pool[i].bits)
                except NumericalFailure:
                    rec = None
                if rec is not None:
                    found.append((key, rec))
            obs = np.vstack([trace_observations(pool[i].init_bits, pool[i].actions) for i in learn_idx])
            acts = np.concatenate([pool[i].actions for i in learn_idx])
            loss = train_step(self.net, TrainBatch(obs, acts), self.cfg.learning_rate)
        except Exception:
            self.rng.bit_generator.state = rng_state
            raise

        self.survivors = [pool[i] for i in surv_idx]
        top = pool[surv_idx[0]]
        if self.best is None or top.reward > self.best.reward:
            self.best = top
        for key, rec in found:
            self._certified.add(key)
            self.counterexamples.append(rec)
        stats = GenerationStats(
            generation=self.generation,
            instance_id=self.instance_id,
            best_reward=float(rewards.max()),
            mean_reward=float(rewards.mean()),
            global_best_reward=self.best.reward,
            edges_in_best=int(self.best.bits.sum()),
            counterexample_found=bool(self.counterexamples),
            wall_time=time.perf_counter() - t0,
            loss=loss,
        )
        self.generation += 1
        self.history.append(stats)
        return stats

    def run(self, max_generations: int, stop=None, on_generation=None) -> list:
        """Run until the budget is spent, a counterexample halts it, or ``stop()`` is true."""
        out = []
        while self.generation < max_generations and not self.halted:
            if stop is not None and stop():
                break
            stats = self.run_generation()
            out.append(stats)
            if on_generation is not None:
                on_generation(self, stats)
        return out
