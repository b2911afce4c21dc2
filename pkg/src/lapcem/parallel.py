"""Decentralized search: independent CE instances over a split batch.

Instances never exchange policies or elites.  The shared global-best record
is for reporting only and never feeds back into any instance.
"""

import logging
import math
import threading
import time
from dataclasses import dataclass, field, replace

from .conjectures import ConjectureReward, EdgeCountReward, get_conjecture
from .engine import CEInstance, GenerationConfig
from .errors import ConfigError
from .graph import DEFAULT_TOL, Graph

log = logging.getLogger(__name__)


def split_batch(total: int, instances: int) -> list:
    """Shares differing by at most one; lower indices take the remainder."""
    if instances < 1:
        raise ConfigError(f"instances must be >= 1, got {instances}")
    if total < instances:
        raise ConfigError(f"total batch {total} is smaller than the instance count {instances}")
    q, r = divmod(total, instances)
    return [q + (i < r) for i in range(instances)]


@dataclass
class SearchConfig:
    n: int
    conjecture: int
    total_batch: int = 1000
    instances: int = 1
    max_generations: int = 400
    master_seed: int = 0
    halt_on_counterexample: bool = True
    eigen_tol: float = DEFAULT_TOL
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    overrides: dict = field(default_factory=dict)  # instance index -> GenerationConfig field overrides
    reward: str = "conjecture"  # or "edge_count"

    def validate(self):
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if self.reward == "conjecture":
            get_conjecture(self.conjecture)
        elif self.reward != "edge_count":
            raise ConfigError(f"reward must be 'conjecture' or 'edge_count', got {self.reward!r}")
        if self.max_generations < 0:
            raise ConfigError(f"max_generations must be >= 0, got {self.max_generations}")
        if not self.eigen_tol > 0:
            raise ConfigError(f"eigen_tol must be positive, got {self.eigen_tol}")
        split_batch(self.total_batch, self.instances)
        for idx in self.overrides:
            if not 0 <= int(idx) < self.instances:
                raise ConfigError(f"overrides: instance {idx} does not exist")
        for i in range(self.instances):
            self.instance_config(i)

    def instance_config(self, i: int) -> GenerationConfig:
        share = split_batch(self.total_batch, self.instances)[i]
        extra = dict(self.overrides.get(i, self.overrides.get(str(i), {})))
        for key in ("batch_size", "rng_seed"):
            if key in extra:
                raise ConfigError(f"overrides: {key} is derived per instance and cannot be overridden")
        try:
            return replace(self.generation, batch_size=share, rng_seed=self.master_seed, **extra)
        except TypeError as exc:
            raise ConfigError(f"overrides for instance {i}: {exc}") from None

    def make_scorer(self):
        if self.reward == "edge_count":
            return EdgeCountReward(self.n)
        return ConjectureReward(self.conjecture, self.n, self.eigen_tol)

    def make_instance(self, i: int) -> CEInstance:
        return CEInstance(self.n, self.make_scorer(), self.instance_config(i), instance_id=i,
                          halt_on_counterexample=self.halt_on_counterexample)


@dataclass
class SearchResult:
    best_graph: Graph
    best_reward: float
    counterexamples: list
    stats: dict  # instance id -> list of GenerationStats
    wall_time: float
    failures: dict = field(default_factory=dict)  # instance id -> error message
    halted: bool = False
    networks: dict = field(default_factory=dict)  # instance id -> final PolicyNetwork

    @property
    def found(self) -> bool:
        return bool(self.counterexamples)


class GlobalBest:
    """Lock-protected best-so-far record, written at generation boundaries."""

    def __init__(self):
        self._lock = threading.Lock()
        self.reward = -math.inf
        self.bits = None
        self.instance_id = None
        self.counterexamples = []
        self._seen = set()
        self.per_instance = {}

    def update(self, inst: CEInstance, stats) -> None:
        with self._lock:
            self.per_instance[inst.instance_id] = stats.global_best_reward
            if inst.best is not None and inst.best.reward > self.reward:
                self.reward = inst.best.reward
                self.bits = inst.best.bits.copy()
                self.instance_id = inst.instance_id
            for rec in inst.counterexamples:
                key = (rec.conjecture, rec.graph)
                if key not in self._seen:
                    self._seen.add(key)
                    self.counterexamples.append(rec)


def run_parallel(cfg: SearchConfig, on_generation=None, threads: bool = True) -> SearchResult:
    """Run ``cfg.instances`` independent instances, one thread each.

    ``on_generation(instance, stats)`` is called after every generation, from
    the instance's own thread, after the global record has been updated.
    With ``threads=False`` the instances run back to back on the caller's
    thread, which yields the same per-instance trajectories.
    """
    cfg.validate()
    t0 = time.perf_counter()
    record = GlobalBest()
    stop = threading.Event()
    stats = {i: [] for i in range(cfg.instances)}
    failures = {}
    instances = [cfg.make_instance(i) for i in range(cfg.instances)]

    def after(inst, st):
        stats[inst.instance_id].append(st)
        record.update(inst, st)
        if inst.counterexamples and cfg.halt_on_counterexample:
            stop.set()
        if on_generation is not None:
            on_generation(inst, st)

    def work(inst):
        try:
            inst.run(cfg.max_generations, stop=stop.is_set, on_generation=after)
        except Exception as exc:  # isolate: other instances keep going
            log.exception("instance %d failed", inst.instance_id)
            failures[inst.instance_id] = f"{type(exc).__name__}: {exc}"

    if threads and cfg.instances > 1:
        workers = [threading.Thread(target=work, args=(inst,), name=f"ce-{inst.instance_id}")
                   for inst in instances]
        for w in workers:
            w.start()
        for w in workers:
            w.join()
    else:
        for inst in instances:
            work(inst)

    best = None if record.bits is None else Graph(cfg.n, record.bits)
    return SearchResult(
        best_graph=best,
        best_reward=record.reward,
        counterexamples=list(record.counterexamples),
        stats=stats,
        wall_time=time.perf_counter() - t0,
        failures=failures,
        halted=stop.is_set(),
        networks={inst.instance_id: inst.net for inst in instances},
    )

