"""NSGA-II over refactoring sequences with frozen-prefix segments.

The genetic loop is the classic one: binary tournament on (rank, crowding),
single-point crossover restricted to the non-frozen suffix, single-gene
replacement mutation, and (mu+lambda) elitist replacement via non-dominated
sorting plus crowding truncation. All randomness flows through one explicit
``random.Random`` so runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .evaluation import SENTINEL_COST, SENTINEL_PAS, Evaluator, ObjectiveVector
from .model import ArchsteerError
from .refactoring import RefactoringSequence, repair_sequence, stable_hash


class ConfigError(ArchsteerError):
    """A search configuration violates its invariants."""


@dataclass(frozen=True)
class SearchConfig:
    iterations: int = 100
    chromosome_length: int = 4
    interactions: int = 0
    population_size: int = 16
    p_crossover: float = 0.8
    p_mutation: float = 0.2
    seed: int = 0
    independent_runs: int = 31

    # Fixed operator suite; alternatives would plug in via evolve_segment.
    SELECTION = "binary_tournament"
    CROSSOVER = "single_point"
    MUTATION = "replace_one_gene"

    def violations(self) -> list[str]:
        out = []
        segments = self.interactions + 1
        if self.iterations % segments != 0:
            out.append(
                f"divisibility: iterations N={self.iterations} not divisible by "
                f"k+1={segments} (k={self.interactions})"
            )
        if self.chromosome_length % segments != 0:
            out.append(
                f"divisibility: chromosome length L={self.chromosome_length} not divisible "
                f"by k+1={segments} (k={self.interactions})"
            )
        if self.population_size < 2 or self.population_size % 2 != 0:
            out.append(f"population_size must be even and >= 2, got {self.population_size}")
        if not 0.0 <= self.p_crossover <= 1.0:
            out.append(f"p_crossover {self.p_crossover:g} outside [0, 1]")
        if not 0.0 <= self.p_mutation <= 1.0:
            out.append(f"p_mutation {self.p_mutation:g} outside [0, 1]")
        if self.independent_runs < 1:
            out.append(f"independent_runs must be >= 1, got {self.independent_runs}")
        return out

    def check(self) -> "SearchConfig":
        problems = self.violations()
        if problems:
            raise ConfigError("; ".join(problems))
        return self


CONFIG_FORMAT = 1

_CONFIG_FIELDS = (
    "iterations",
    "chromosome_length",
    "interactions",
    "population_size",
    "p_crossover",
    "p_mutation",
    "seed",
    "independent_runs",
)


def search_config_to_document(config: SearchConfig) -> dict:
    doc = {"format": CONFIG_FORMAT}
    for name in _CONFIG_FIELDS:
        doc[name] = getattr(config, name)
    return doc


def search_config_from_document(doc: dict) -> SearchConfig:
    if doc.get("format") != CONFIG_FORMAT:
        raise ConfigError(
            f"unsupported or missing run-config format version {doc.get('format')!r}"
        )
    unknown = set(doc) - set(_CONFIG_FIELDS) - {"format"}
    if unknown:
        raise ConfigError(f"unknown run-config keys: {', '.join(sorted(unknown))}")
    kwargs = {name: doc[name] for name in _CONFIG_FIELDS if name in doc}
    return SearchConfig(**kwargs).check()


def segment_plan(n: int, length: int, k: int) -> list[tuple[int, int]]:
    """k+1 equal segments of (iterations, genes); errors if k+1 divides neither."""
    segments = k + 1
    problems = []
    if n % segments != 0:
        problems.append(f"N={n} not divisible by k+1={segments}")
    if length % segments != 0:
        problems.append(f"L={length} not divisible by k+1={segments}")
    if problems:
        raise ConfigError(f"segment plan (k={k}): " + "; ".join(problems))
    return [(n // segments, length // segments)] * segments


def run_seed(master_seed: int, *path) -> int:
    """Deterministic, portable child seed for an independent run or segment."""
    return stable_hash("archsteer-rng", master_seed, *path)


@dataclass
class Individual:
    sequence: RefactoringSequence
    objectives: ObjectiveVector
    rank: int = -1
    crowding: float = 0.0
    generation: int = 0

    @property
    def key(self) -> tuple:
        return self.sequence.key


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """True iff a is at least as good everywhere and strictly better somewhere."""
    return dominates_min(a.to_min(), b.to_min())


def dominates_min(a: Sequence[float], b: Sequence[float]) -> bool:
    """Pareto dominance for minimization vectors."""
    better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            better = True
    return better


def weakly_dominates_min(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def fast_nondominated_sort_min(points: Sequence[Sequence[float]]) -> list[list[int]]:
    """Deb's fast non-dominated sort; returns fronts of indices."""
    n = len(points)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    domination_count = [0] * n
    fronts: list[list[int]] = [[]]
    for i in range(n):
        for j in range(i + 1, n):
            if dominates_min(points[i], points[j]):
                dominated_by[i].append(j)
                domination_count[j] += 1
            elif dominates_min(points[j], points[i]):
                dominated_by[j].append(i)
                domination_count[i] += 1
    for i in range(n):
        if domination_count[i] == 0:
            fronts[0].append(i)
    current = 0
    while fronts[current]:
        nxt: list[int] = []
        for i in fronts[current]:
            for j in dominated_by[i]:
                domination_count[j] -= 1
                if domination_count[j] == 0:
                    nxt.append(j)
        current += 1
        fronts.append(nxt)
    fronts.pop()
    return fronts


def fast_nondominated_sort(population: list[Individual]) -> list[list[Individual]]:
    points = [ind.objectives.to_min() for ind in population]
    fronts = fast_nondominated_sort_min(points)
    out: list[list[Individual]] = []
    for rank, front in enumerate(fronts):
        members = []
        for i in front:
            population[i].rank = rank
            members.append(population[i])
        out.append(members)
    return out


def crowding_distance(front: list[Individual]) -> None:
    """Assign crowding distances in place (boundary members get +inf).

    Gaps are normalized per objective by the front's min/max range; a
    zero-range objective contributes nothing.
    """
    n = len(front)
    if n == 0:
        return
    for ind in front:
        ind.crowding = 0.0
    dims = len(front[0].objectives.to_min())
    values = [ind.objectives.to_min() for ind in front]
    for d in range(dims):
        order = sorted(range(n), key=lambda i: values[i][d])  # stable
        front[order[0]].crowding = math.inf
        front[order[-1]].crowding = math.inf
        lo = values[order[0]][d]
        hi = values[order[-1]][d]
        if hi <= lo:
            continue
        for pos in range(1, n - 1):
            i = order[pos]
            if front[i].crowding != math.inf:
                gap = values[order[pos + 1]][d] - values[order[pos - 1]][d]
                front[i].crowding += gap / (hi - lo)


def _tournament(pop: list[Individual], rng: random.Random) -> Individual:
    a, b = rng.choice(pop), rng.choice(pop)
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if rng.random() < 0.5 else b


def nondominated_subset(individuals: list[Individual]) -> list[Individual]:
    """Deduplicated (by chromosome) mutually non-dominated members."""
    unique: dict[tuple, Individual] = {}
    for ind in individuals:
        unique.setdefault(ind.key, ind)
    items = list(unique.values())
    points = [ind.objectives.to_min() for ind in items]
    keep = []
    for i, ind in enumerate(items):
        if not any(dominates_min(points[j], points[i]) for j in range(len(items)) if j != i):
            keep.append(ind)
    return keep


@dataclass
class RunArchive:
    """Everything a finished segment run exposes for analysis and steering.

    The non-dominated front over all evaluated individuals is maintained
    incrementally: a new point enters only if no member strictly dominates
    it, evicting the members it strictly dominates.
    """

    seed: int
    prefix_len: int
    segment_iters: int
    segment_genes: int
    config: SearchConfig
    individuals: dict[tuple, Individual] = field(default_factory=dict)
    _front: dict[tuple, Individual] = field(default_factory=dict, repr=False)
    generation_fronts: list[list[tuple]] = field(default_factory=list)
    front_hv_trace: list[float] = field(default_factory=list)
    final_front: list[Individual] = field(default_factory=list)
    generations_run: int = 0

    def record(self, batch: list[Individual]):
        for ind in batch:
            if ind.key in self.individuals:
                continue
            self.individuals[ind.key] = ind
            point = ind.objectives.to_min()
            members = list(self._front.items())
            if any(dominates_min(m.objectives.to_min(), point) for _, m in members):
                continue
            for key, member in members:
                if dominates_min(point, member.objectives.to_min()):
                    del self._front[key]
            self._front[ind.key] = ind

    def archive_front(self) -> list[Individual]:
        return list(self._front.values())


# Fixed minimization-space bounds used to scale archive fronts into the unit
# box before the per-generation hypervolume check (keeps FP noise benign).
_HV_BOX = (
    (-1.0, 1.0),  # -perfq
    (-1.0, 0.0),  # -reliability
    (0.0, SENTINEL_COST),
    (0.0, float(SENTINEL_PAS)),
)


def _front_hypervolume(front: list[Individual]) -> float:
    """Archive-front volume in a fixed, unit-scaled worst-case box."""
    from .indicators import hypervolume_min

    pts = []
    for ind in front:
        raw = ind.objectives.to_min()
        pts.append(
            tuple(
                min(max((v - lo) / (hi - lo), 0.0), 1.0)
                for v, (lo, hi) in zip(raw, _HV_BOX)
            )
        )
    ref = (1.0 + 1e-6,) * 4
    return hypervolume_min(pts, ref)


def evolve_segment(
    evaluator: Evaluator,
    prefix: RefactoringSequence,
    config: SearchConfig,
    segment_iters: int,
    segment_genes: int,
    rng: random.Random,
    progress=None,
    check_front_hv: bool = True,
) -> RunArchive:
    """Run one NSGA-II segment with `prefix` frozen in every chromosome.

    The initial population extends the prefix with `segment_genes` random
    feasible genes per member; exactly `segment_iters` generations follow.
    """
    if segment_genes < 1:
        raise ConfigError("segment_genes must be >= 1")
    config.check()
    initial = evaluator.initial
    prefix_len = len(prefix.actions)
    total_len = prefix_len + segment_genes

    archive = RunArchive(
        seed=0,
        prefix_len=prefix_len,
        segment_iters=segment_iters,
        segment_genes=segment_genes,
        config=config,
    )

    def make_individual(actions, generation) -> Individual:
        seq = RefactoringSequence(tuple(actions), prefix_len)
        objectives, _, _ = evaluator.evaluate(seq, on_infeasible="sentinel")
        return Individual(sequence=seq, objectives=objectives, generation=generation)

    def fresh(generation: int) -> Individual:
        holes = prefix.actions + (None,) * segment_genes
        seq = repair_sequence(initial, holes, prefix_len, rng, evaluator.cost_params)
        return make_individual(seq.actions, generation)

    population = [fresh(0) for _ in range(config.population_size)]
    archive.record(population)
    for front in fast_nondominated_sort(population):
        crowding_distance(front)
    _snapshot_generation(archive, check_front_hv)

    for generation in range(1, segment_iters + 1):
        offspring: list[Individual] = []
        while len(offspring) < config.population_size:
            p1 = _tournament(population, rng)
            p2 = _tournament(population, rng)
            s1 = list(p1.sequence.actions)
            s2 = list(p2.sequence.actions)
            if segment_genes >= 2 and rng.random() < config.p_crossover:
                cut = prefix_len + rng.randrange(1, segment_genes)
                s1, s2 = s1[:cut] + s2[cut:], s2[:cut] + s1[cut:]
            for child in (s1, s2):
                if rng.random() < config.p_mutation:
                    child[prefix_len + rng.randrange(segment_genes)] = None
                seq = repair_sequence(
                    initial, tuple(child), prefix_len, rng, evaluator.cost_params
                )
                offspring.append(make_individual(seq.actions, generation))
        offspring = offspring[: config.population_size]
        population = _truncate(population + offspring, config.population_size)
        archive.record(offspring)
        _snapshot_generation(archive, check_front_hv)
        if progress is not None:
            progress(generation, segment_iters)

    archive.generations_run = segment_iters
    # The run's output is the best non-dominated set found across all
    # generations (the elitist archive front), not just the last population.
    for ind in archive.individuals.values():
        if ind.sequence.actions[:prefix_len] != prefix.actions:  # pragma: no cover
            raise ArchsteerError("frozen prefix was altered during the segment")
    archive.final_front = sorted(archive.archive_front(), key=lambda ind: ind.key)
    return archive


def _truncate(combined: list[Individual], size: int) -> list[Individual]:
    fronts = fast_nondominated_sort(combined)
    survivors: list[Individual] = []
    for front in fronts:
        crowding_distance(front)
        if len(survivors) + len(front) <= size:
            survivors.extend(front)
        else:
            rest = sorted(front, key=lambda ind: -ind.crowding)
            survivors.extend(rest[: size - len(survivors)])
            break
    return survivors


def _snapshot_generation(archive: RunArchive, check_front_hv: bool):
    front = archive.archive_front()
    keys = sorted(ind.key for ind in front)
    archive.generation_fronts.append(keys)
    if not check_front_hv:
        return
    if archive.front_hv_trace and archive.generation_fronts[-2] == keys:
        archive.front_hv_trace.append(archive.front_hv_trace[-1])
        return
    hv = _front_hypervolume(front)
    if archive.front_hv_trace and hv < archive.front_hv_trace[-1] - 1e-9:  # pragma: no cover
        raise ArchsteerError(
            f"archive-front hypervolume decreased: {archive.front_hv_trace[-1]} -> {hv}"
        )
    archive.front_hv_trace.append(hv)


def solutions_document(archive: RunArchive) -> dict:
    """Stable serialization of a run: one record per evaluated individual."""
    items = list(archive.individuals.values())
    fronts = fast_nondominated_sort_min([ind.objectives.to_min() for ind in items])
    rank_of: dict[int, int] = {}
    for rank, front in enumerate(fronts):
        for i in front:
            rank_of[i] = rank
    records = []
    for i, ind in enumerate(items):
        records.append(
            {
                "chromosome": [list(a.key) for a in ind.sequence.actions],
                "frozen_prefix_len": ind.sequence.frozen_prefix_len,
                "objectives": {
                    "perfq": ind.objectives.perfq,
                    "reliability": ind.objectives.reliability,
                    "cost": ind.objectives.cost,
                    "pas": ind.objectives.pas,
                },
                "rank": rank_of[i],
                "generation": ind.generation,
            }
        )
    records.sort(key=lambda r: (r["generation"], r["chromosome"]))
    return {
        "format": 1,
        "seed": archive.seed,
        "prefix_len": archive.prefix_len,
        "segment_iters": archive.segment_iters,
        "segment_genes": archive.segment_genes,
        "solutions": records,
        "final_front": sorted(
            [[list(a.key) for a in ind.sequence.actions] for ind in archive.final_front]
        ),
    }


def archive_from_solutions_document(doc: dict, config: SearchConfig) -> RunArchive:
    """Rebuild a RunArchive (individuals + final front) from its document."""
    from .refactoring import RefactoringAction

    archive = RunArchive(
        seed=doc.get("seed", 0),
        prefix_len=doc["prefix_len"],
        segment_iters=doc["segment_iters"],
        segment_genes=doc["segment_genes"],
        config=config,
    )
    for record in doc["solutions"]:
        actions = tuple(
            RefactoringAction(kind=row[0], params=tuple(row[1:]))
            for row in record["chromosome"]
        )
        o = record["objectives"]
        ind = Individual(
            sequence=RefactoringSequence(actions, record["frozen_prefix_len"]),
            objectives=ObjectiveVector(
                perfq=o["perfq"], reliability=o["reliability"],
                cost=o["cost"], pas=int(o["pas"]),
            ),
            rank=record.get("rank", -1),
            generation=record.get("generation", 0),
        )
        archive.individuals[ind.key] = ind
    front_keys = {
        tuple(tuple(row) for row in chromosome) for chromosome in doc["final_front"]
    }
    archive.final_front = sorted(
        (ind for key, ind in archive.individuals.items() if key in front_keys),
        key=lambda ind: ind.key,
    )
    return archive
