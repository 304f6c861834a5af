"""Run lifecycle: configuration, seeding, the concurrent agent pool and reports.

Workers loop steal -> agent_step -> insert against the shared repository.
Each worker owns a fixed objective at any moment and advances through the
objective schedule when its improvement attempts stagnate. A run stops on its
hop budget, an optional wall-clock budget, or (if configured) the first
polytope satisfying the scenario target.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .arrangement import enumerate_arrangement
from .engine import GuardConfig, agent_step, deck_partition
from .errors import SeedingFailed
from .hull import facet_enumeration
from .objectives import (
    Objective,
    ObjectiveSchedule,
    hirsch_objectives,
    monotone_objective,
    neighbourly_objective,
)
from .policy import ScoreClient
from .polytope import Polytope
from .repository import (
    Repository,
    RepositoryEntry,
    SampleSilo,
    lattice_hash,
    write_silo_file,
    write_snapshot,
)

KNOWN_MONOTONE_BOUNDS = {
    (9, 5): 30,
    (10, 5): 41,
    (11, 5): 55,
    (9, 6): 29,
}

ENV_PREFIX = "HOPPER_"


@dataclass
class RunConfig:
    scenario: str = "hirsch"  # hirsch | monotone | neighbourly
    d: int = 5
    deck_sizes: tuple = (12, 12)
    n: int = 9
    mode: str = "flexible"
    agents: int = 1
    hop_budget: int = 100
    seed: int = 0
    seed_population: int = 8
    stop_on_first: bool = False
    time_budget: Optional[float] = None
    stagnation_threshold: int = 25
    objectives: Optional[list] = None  # subset of the width-heuristic registry
    target_width: int = 6
    known_bound: Optional[int] = None
    max_size: int = 512
    eviction_sample: int = 8
    p_read: float = 0.9
    silo_capacity: int = 10**6
    brain: Optional[str] = None
    brain_timeout: float = 1.0
    brain_batch: int = 256
    guards: GuardConfig = field(default_factory=GuardConfig)
    output_dir: Optional[str] = None
    # optional early stop: halt once the best scalar reaches stop_scalar AND
    # at least min_samples hop samples are recorded
    stop_scalar: Optional[float] = None
    min_samples: int = 0

    def validate(self):
        if self.scenario not in ("hirsch", "monotone", "neighbourly"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.hop_budget < 0 or self.agents < 1 or self.seed_population < 1:
            raise ValueError("budgets and counts must be positive")
        if self.mode not in ("rigid", "flexible"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.scenario == "hirsch" and len(self.deck_sizes) != 2:
            raise ValueError("hirsch runs need two deck sizes")
        return self

    @staticmethod
    def from_file(path, env=None) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return RunConfig.from_dict(raw, env)

    @staticmethod
    def from_dict(raw: dict, env=None) -> "RunConfig":
        env = dict(os.environ if env is None else env)
        cfg = RunConfig()
        guards = raw.pop("guards", {})
        for key, value in raw.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
        for key, value in guards.items():
            if not hasattr(cfg.guards, key):
                raise ValueError(f"unknown guard key {key!r}")
            setattr(cfg.guards, key, value)
        # environment overrides for scalar keys, HOPPER_HOP_BUDGET etc.
        for key in vars(cfg):
            env_key = ENV_PREFIX + key.upper()
            if env_key in env:
                current = getattr(cfg, key)
                text = env[env_key]
                if isinstance(current, bool):
                    setattr(cfg, key, text.lower() in ("1", "true", "yes"))
                elif isinstance(current, int):
                    setattr(cfg, key, int(text))
                elif isinstance(current, float) or key == "time_budget":
                    setattr(cfg, key, float(text))
                elif key in ("deck_sizes", "objectives"):
                    setattr(cfg, key, json.loads(text))
                else:
                    setattr(cfg, key, text)
        if isinstance(cfg.deck_sizes, list):
            cfg.deck_sizes = tuple(cfg.deck_sizes)
        return cfg.validate()


# ---------------------------------------------------------------------------
# seeding


def random_seed_polytope(config: RunConfig, rng) -> Polytope:
    """Scenario-appropriate random vertices, resampled until valid."""
    if config.scenario == "hirsch":
        return _seed_prismatoid(config.d, config.deck_sizes, rng)
    return _seed_sphere(config.n, config.d, rng)


def _seed_prismatoid(d, deck_sizes, rng, digits=6):
    from .engine import _deck_structure_ok, _float_proper_spanning

    scale = 10**digits
    for _ in range(1000):
        rows = []
        for size, z in zip(deck_sizes, (1, -1)):
            pts = _ball_points(rng, size, d - 1)
            for p in pts:
                row = [Fraction(round(float(x) * scale), scale) for x in p]
                row.append(Fraction(z))
                rows.append(row)
        P = Polytope(rows, validate=False)
        if _deck_structure_ok(P) and _float_proper_spanning(P.float_vertices()):
            return P
    raise SeedingFailed("could not seed a valid prismatoid in 1000 attempts")


def _ball_points(rng, count, dim):
    x = rng.normal(size=(count, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    radii = rng.random(size=(count, 1)) ** (1.0 / dim)
    return x * radii


def _seed_sphere(n, d, rng, digits=6):
    from .engine import _float_proper_spanning

    scale = 10**digits
    for _ in range(1000):
        x = rng.normal(size=(n, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        rows = [[Fraction(round(float(v) * scale), scale) for v in row] for row in x]
        try:
            P = Polytope(rows)
        except Exception:
            continue
        if _float_proper_spanning(P.float_vertices()):
            return P
    raise SeedingFailed("could not seed a valid polytope in 1000 attempts")


def build_objectives(config: RunConfig) -> list:
    if config.scenario == "hirsch":
        registry = hirsch_objectives(config.target_width)
        if config.objectives:
            chosen = [o for o in registry if o.name in set(config.objectives)]
            if not chosen:
                raise ValueError("no known objective names selected")
            return chosen
        return registry
    if config.scenario == "monotone":
        bound = config.known_bound
        if bound is None:
            bound = KNOWN_MONOTONE_BOUNDS.get((config.n, config.d))
        return [monotone_objective(bound)]
    return [neighbourly_objective(config.d)]


# ---------------------------------------------------------------------------
# the run


@dataclass
class RunReport:
    config: dict
    best_trajectory: list = field(default_factory=list)  # (hop, n, scalar)
    ascensions: list = field(default_factory=list)
    hops_attempted: int = 0
    hops_accepted: int = 0
    sample_count: int = 0
    best: Optional[dict] = None
    seed_best: Optional[float] = None
    seed_scalars: list = field(default_factory=list)
    target_found: bool = False

    def to_json(self):
        return {
            "config": self.config,
            "bestTrajectory": self.best_trajectory,
            "ascensions": self.ascensions,
            "hopsAttempted": self.hops_attempted,
            "hopsAccepted": self.hops_accepted,
            "sampleCount": self.sample_count,
            "best": self.best,
            "seedBest": self.seed_best,
            "seedScalars": self.seed_scalars,
            "targetFound": self.target_found,
        }


class _RunState:
    def __init__(self, config):
        self.lock = threading.Lock()
        self.hops = 0
        self.accepted = 0
        self.best_scalar = None
        self.trajectory = []
        self.ascensions = []
        self.stop = threading.Event()
        self.config = config
        self.deadline = (
            time.monotonic() + config.time_budget if config.time_budget else None
        )

    def take_hop(self):
        with self.lock:
            if self.hops >= self.config.hop_budget:
                return None
            self.hops += 1
            return self.hops

    def out_of_time(self):
        return self.deadline is not None and time.monotonic() > self.deadline


def run_scenario(config: RunConfig, progress=None) -> RunReport:
    """Execute one search run; returns the report (and writes output files)."""
    config.validate()
    repo = Repository(
        max_size=config.max_size,
        eviction_sample=config.eviction_sample,
        p_read=config.p_read,
    )
    silo = SampleSilo(capacity=config.silo_capacity)
    objectives = build_objectives(config)
    client = (
        ScoreClient(config.brain, timeout=config.brain_timeout, batch_size=config.brain_batch)
        if config.brain
        else None
    )
    report = RunReport(config=_config_dict(config))
    state = _RunState(config)

    seed_rng = np.random.default_rng([config.seed, 0xFEED])
    for s in range(config.seed_population):
        P = random_seed_polytope(config, seed_rng)
        fv = objectives[0].evaluate(P, "exact")
        entry = RepositoryEntry(
            polytope=P, fitness=fv, generation=0, lattice_key=lattice_hash(P)
        )
        repo.insert(entry)
        report.seed_scalars.append(fv.scalar())
        _note_best(state, report, 0, P, fv)
    report.seed_best = max(report.seed_scalars)

    workers = []
    for wid in range(config.agents):
        t = threading.Thread(
            target=_worker_loop,
            args=(wid, config, repo, silo, objectives, client, state, report),
            daemon=True,
        )
        workers.append(t)
    for t in workers:
        t.start()
    for t in workers:
        t.join()

    report.hops_attempted = state.hops if state.hops <= config.hop_budget else config.hop_budget
    report.hops_accepted = state.accepted
    report.sample_count = len(silo)
    best_entry = repo.best()
    if best_entry is not None:
        report.best = {
            "n": best_entry.polytope.n,
            "d": best_entry.polytope.d,
            "scalar": best_entry.fitness.scalar(),
            "key": list(best_entry.fitness.key),
            "width": best_entry.fitness.width,
            "defect": best_entry.fitness.defect,
            "monotoneLength": best_entry.fitness.monotone_length,
            "neighbourlyK": best_entry.fitness.neighbourly_k,
            "targetMet": best_entry.fitness.target_met,
            "generation": best_entry.generation,
            "ascensionGeneration": best_entry.ascension_generation,
        }
        report.target_found = bool(best_entry.fitness.target_met)
    report.best_trajectory = state.trajectory
    report.ascensions = state.ascensions

    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        with open(os.path.join(config.output_dir, "report.json"), "w") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        write_snapshot(os.path.join(config.output_dir, "repository.snapshot"), repo.entries())
        write_silo_file(os.path.join(config.output_dir, "samples.silo"), silo.read_all())
    if client is not None:
        client.close()
    report._repo = repo  # handed back for in-process callers; not serialized
    report._silo = silo
    return report


def _config_dict(config: RunConfig) -> dict:
    out = asdict(config)
    out["guards"] = asdict(config.guards)
    out["deck_sizes"] = list(config.deck_sizes)
    return out


def _note_best(state, report, hop, P, fv):
    with state.lock:
        scalar = fv.scalar()
        if state.best_scalar is None or scalar > state.best_scalar:
            state.best_scalar = scalar
            state.trajectory.append([hop, P.n, scalar])


def _worker_loop(wid, config, repo, silo, objectives, client, state, report):
    rng = np.random.default_rng([config.seed, wid + 1])
    schedule = ObjectiveSchedule(objectives, config.stagnation_threshold,
                                 index=wid % len(objectives))
    stagnation = 0
    cache = None
    cache_owner = None

    while not state.stop.is_set() and not state.out_of_time():
        if config.stop_scalar is not None:
            with state.lock:
                reached = state.best_scalar is not None and state.best_scalar >= config.stop_scalar
            if reached and len(silo) >= config.min_samples:
                state.stop.set()
                return
        hop = state.take_hop()
        if hop is None:
            return
        objective = schedule.current()

        entry = repo.steal(rng)
        if entry is None:
            try:
                P = random_seed_polytope(config, rng)
            except SeedingFailed:
                continue
            fv = objective.evaluate(P, "exact")
            entry = RepositoryEntry(polytope=P, fitness=fv, generation=0,
                                    lattice_key=lattice_hash(P))
            repo.insert(entry)
        elif entry.fitness.active_objective != objective.name:
            fv = objective.evaluate(entry.polytope, "exact")
            entry = RepositoryEntry(
                polytope=entry.polytope, fitness=fv, generation=entry.generation,
                improvement_history=list(entry.improvement_history),
                failure_count=entry.failure_count,
                ascension_generation=entry.ascension_generation,
                lattice_key=entry.lattice_key,
            )

        step_cache = cache if cache_owner == hash(entry.polytope) else None
        result = agent_step(
            entry, objective, config.mode, config.guards, rng,
            cache=step_cache, client=client, scenario=config.scenario,
        )
        if result.samples:
            silo.append(result.samples)
            if client is not None:
                client.train(result.samples)

        if result.polytope is None:
            cache = result.cache
            cache_owner = hash(entry.polytope)
            if entry.lattice_key:
                repo.record_failure(entry.lattice_key)
            stagnation += 1
        else:
            generation = entry.generation + 1
            fv = result.fitness
            improved = fv.key > entry.fitness.key
            history = list(entry.improvement_history)
            if improved:
                history.append((generation, objective.name, fv.scalar()))
            ascension = entry.ascension_generation
            if fv.target_met and ascension is None:
                ascension = generation
                with state.lock:
                    state.ascensions.append([hop, generation, result.polytope.n])
                if config.stop_on_first:
                    state.stop.set()
            new_entry = RepositoryEntry(
                polytope=result.polytope, fitness=fv, generation=generation,
                improvement_history=history, failure_count=0,
                ascension_generation=ascension,
            )
            repo.insert(new_entry)
            with state.lock:
                state.accepted += 1
            _note_best(state, report, hop, result.polytope, fv)
            cache = result.cache
            cache_owner = hash(result.polytope)
            stagnation = 0 if improved else stagnation + 1

        before = schedule.index
        schedule.next_objective(stagnation)
        if schedule.index != before:
            stagnation = 0
