"""Population loop: evaluation, truncation selection, elite reproduction.

Each generation every individual (elites included) is re-evaluated, the
top E become parents, and the next population is those E unchanged plus
E*N self-generated offspring. Genealogy records are append-only and allow
any individual's genome to be reconstructed later from the run seed.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist

from .envs.base import Environment, apply_switch, rollout
from .ghn import Ghn, GhnConfig, build_mlp_graph, generate_policy_params, init_ghn
from .nets import PURPOSE_DELTA, PURPOSE_INIT, RngStream, assign_params, episode_stream
from .variation import FixedBasis, MutationReport, make_offspring_with_report, mean_mutation_rate

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvoConfig:
    population_size: int
    elite_size: int
    offspring_per_elite: int
    generations: int
    episodes_per_eval: int = 1
    run_seed: int = 0

    def __post_init__(self):
        if self.elite_size < 1 or self.offspring_per_elite < 1:
            raise ValueError("elite_size and offspring_per_elite must be >= 1")
        expected = self.elite_size * (self.offspring_per_elite + 1)
        if self.population_size != expected:
            raise ValueError(
                f"population_size must equal elite_size * (offspring_per_elite + 1); "
                f"got {self.population_size} != {expected}"
            )
        if self.generations < 1 or self.episodes_per_eval < 1:
            raise ValueError("generations and episodes_per_eval must be >= 1")


@dataclass
class GenealogyRecord:
    id: int
    parent_id: int | None
    birth_generation: int
    fitness_history: list[tuple[int, float]] = field(default_factory=list)
    mean_mutation_rate: float = 0.0

    def final_fitness(self) -> float | None:
        return self.fitness_history[-1][1] if self.fitness_history else None

    def best_fitness(self) -> float | None:
        if not self.fitness_history:
            return None
        return max(f for _, f in self.fitness_history)


@dataclass
class PopulationState:
    generation: int
    individuals: list[Ghn]
    fitnesses: np.ndarray | None
    genealogy: list[GenealogyRecord]
    records_by_id: dict[int, GenealogyRecord]
    next_id: int
    run_seed: int

    def record(self, individual_id: int) -> GenealogyRecord:
        return self.records_by_id[individual_id]


@dataclass
class GenerationMetrics:
    """One row of the per-generation log, plus the reports of new births."""

    generation: int
    best_fitness: float
    mean_fitness: float
    mean_pairwise_distance: float
    mean_mutation_rate: float
    switch_phase: int
    births: list[tuple[int, MutationReport]] = field(default_factory=list)


def init_population(cfg: EvoConfig, ghn_cfg: GhnConfig, basis: FixedBasis | None = None) -> PopulationState:
    """P independently initialized individuals at generation 0."""
    basis_ref = basis.sha256() if basis is not None else ""
    individuals = []
    genealogy = []
    records = {}
    for i in range(cfg.population_size):
        stream = RngStream(cfg.run_seed, 0, i, PURPOSE_INIT)
        ghn = init_ghn(ghn_cfg, stream, ghn_id=i, birth_generation=0, basis_ref=basis_ref)
        individuals.append(ghn)
        rec = GenealogyRecord(i, None, 0, [], mean_mutation_rate(ghn))
        genealogy.append(rec)
        records[i] = rec
    return PopulationState(
        generation=0,
        individuals=individuals,
        fitnesses=None,
        genealogy=genealogy,
        records_by_id=records,
        next_id=cfg.population_size,
        run_seed=cfg.run_seed,
    )


def _evaluate_one(ghn: Ghn, env: Environment, generation: int, episodes: int, run_seed: int):
    """Mean score over the individual's episodes; env faults score the minimum."""
    pset = generate_policy_params(ghn, build_mlp_graph(ghn.config.policy_spec))
    net = assign_params(ghn.config.policy_spec, pset)
    scores = []
    for ep in range(episodes):
        try:
            scores.append(rollout(env, net, episode_stream(run_seed, generation, ghn.id, ep)))
        except Exception as exc:
            log.warning("environment fault for individual %d: %s", ghn.id, exc)
            scores.append(env.spec.score_range[0])
    return float(np.mean(scores))


_WORKER_ENV: Environment | None = None


def _worker_init(env_factory):
    global _WORKER_ENV
    _WORKER_ENV = env_factory()


def _worker_eval(args):
    ghn, generation, episodes, run_seed = args
    apply_switch(_WORKER_ENV, generation)
    return _evaluate_one(ghn, _WORKER_ENV, generation, episodes, run_seed)


class Evaluator:
    """Maps a population to fitnesses, serially or over a process pool.

    Results are identical for any worker count because every episode has
    its own keyed random stream.
    """

    def __init__(self, env_factory, episodes_per_eval: int = 1, workers: int = 0):
        self.env_factory = env_factory
        self.env = env_factory()
        self.episodes = episodes_per_eval
        self.workers = workers
        self._pool = None

    def _ensure_pool(self):
        if self._pool is None:
            self._pool = ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=_worker_init,
                initargs=(self.env_factory,),
            )
        return self._pool

    def __call__(self, individuals, generation: int, run_seed: int) -> np.ndarray:
        if self.workers and len(individuals) > 1:
            pool = self._ensure_pool()
            tasks = [(g, generation, self.episodes, run_seed) for g in individuals]
            return np.array(list(pool.map(_worker_eval, tasks)))
        apply_switch(self.env, generation)
        return np.array(
            [_evaluate_one(g, self.env, generation, self.episodes, run_seed) for g in individuals]
        )

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None
        self.env.close()


def evaluate(pop: PopulationState, env: Environment, generation: int,
             episodes_per_eval: int = 1) -> np.ndarray:
    """Evaluate every individual (elites included) at this generation's phase."""
    apply_switch(env, generation)
    fits = np.array(
        [_evaluate_one(g, env, generation, episodes_per_eval, pop.run_seed) for g in pop.individuals]
    )
    _record_fitnesses(pop, generation, fits)
    return fits


def _record_fitnesses(pop: PopulationState, generation: int, fits: np.ndarray):
    pop.fitnesses = fits
    for ghn, f in zip(pop.individuals, fits):
        pop.record(ghn.id).fitness_history.append((generation, float(f)))


def select_elites(fitnesses, elite_size: int, ids=None) -> list[int]:
    """Indices of the top elite_size fitnesses; ties go to the lower id."""
    fitnesses = list(fitnesses)
    if elite_size > len(fitnesses):
        raise ValueError(f"elite_size {elite_size} > population {len(fitnesses)}")
    if ids is None:
        ids = range(len(fitnesses))
    order = sorted(zip(fitnesses, ids, range(len(fitnesses))), key=lambda t: (-t[0], t[1]))
    return [idx for _, _, idx in order[:elite_size]]


def flat_matrix(individuals) -> np.ndarray:
    return np.stack([g.flat.values for g in individuals])


def mean_pairwise_distance(pop) -> float:
    """Mean Euclidean distance over all unordered genome pairs."""
    if isinstance(pop, PopulationState):
        matrix = flat_matrix(pop.individuals)
    elif isinstance(pop, np.ndarray):
        matrix = pop
    else:
        matrix = flat_matrix(pop)
    if matrix.shape[0] < 2:
        raise ValueError("need at least two individuals for pairwise distance")
    return float(pdist(matrix).mean())


def evaluate_with_metrics(state: PopulationState, env_or_evaluator, cfg: EvoConfig) -> GenerationMetrics:
    """Evaluate the current population and summarize one log row."""
    g = state.generation
    if isinstance(env_or_evaluator, Evaluator):
        fits = env_or_evaluator(state.individuals, g, state.run_seed)
        _record_fitnesses(state, g, fits)
        schedule = env_or_evaluator.env.schedule
    else:
        fits = evaluate(state, env_or_evaluator, g, cfg.episodes_per_eval)
        schedule = env_or_evaluator.schedule
    return GenerationMetrics(
        generation=g,
        best_fitness=float(fits.max()),
        mean_fitness=float(fits.mean()),
        mean_pairwise_distance=mean_pairwise_distance(state),
        mean_mutation_rate=float(np.mean([mean_mutation_rate(i) for i in state.individuals])),
        switch_phase=schedule.phase_at(g),
    )


def reproduce(
    state: PopulationState,
    basis: FixedBasis,
    cfg: EvoConfig,
    metrics: GenerationMetrics | None = None,
) -> PopulationState:
    """Truncation-select elites and fill the next population with offspring."""
    g = state.generation
    ids = [i.id for i in state.individuals]
    elite_idx = select_elites(state.fitnesses, cfg.elite_size, ids)
    new_individuals = [state.individuals[i] for i in elite_idx]
    next_id = state.next_id
    for i in elite_idx:
        parent = state.individuals[i]
        for _ in range(cfg.offspring_per_elite):
            child_id = next_id
            next_id += 1
            stream = RngStream(state.run_seed, g + 1, child_id, PURPOSE_DELTA)
            child, report = make_offspring_with_report(parent, basis, stream, child_id, g + 1)
            rec = GenealogyRecord(child_id, parent.id, g + 1, [], report.mean_rate)
            state.genealogy.append(rec)
            state.records_by_id[child_id] = rec
            if metrics is not None:
                metrics.births.append((child_id, report))
            new_individuals.append(child)

    return PopulationState(
        generation=g + 1,
        individuals=new_individuals,
        fitnesses=None,
        genealogy=state.genealogy,
        records_by_id=state.records_by_id,
        next_id=next_id,
        run_seed=state.run_seed,
    )


def step_generation(
    state: PopulationState,
    env_or_evaluator,
    basis: FixedBasis,
    cfg: EvoConfig,
) -> tuple[PopulationState, GenerationMetrics]:
    """One generation: evaluate, select elites, reproduce, advance the counter."""
    metrics = evaluate_with_metrics(state, env_or_evaluator, cfg)
    new_state = reproduce(state, basis, cfg, metrics)
    return new_state, metrics


def champion_lineage(genealogy, champion_id: int) -> list[GenealogyRecord]:
    """Ancestor chain from a generation-0 root down to the champion."""
    if isinstance(genealogy, dict):
        by_id = genealogy
    else:
        by_id = {r.id: r for r in genealogy}
    if champion_id not in by_id:
        raise ValueError(f"corrupt genealogy: unknown individual {champion_id}")
    chain = []
    current = by_id[champion_id]
    while True:
        chain.append(current)
        if current.parent_id is None:
            break
        if current.parent_id not in by_id:
            raise ValueError(f"corrupt genealogy: dangling parent_id {current.parent_id}")
        parent = by_id[current.parent_id]
        if parent.birth_generation >= current.birth_generation:
            raise ValueError("corrupt genealogy: parent born after child")
        current = parent
    chain.reverse()
    return chain
