"""Front clustering, ordinal labeling, and the session navigation tree.

A finished segment's front is standardized and clustered with PAM k-medoids
(Euclidean distance, silhouette-selected k). Each cluster's medoid gets a
four-word ordinal label; choosing a medoid freezes its segment genes as the
prefix of the next search segment, growing a tree of interaction points.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

import numpy as np

from .evaluation import Evaluator, ObjectiveVector
from .model import ArchsteerError
from .optimizer import Individual, RunArchive, SearchConfig, evolve_segment
from .refactoring import RefactoringSequence

VOCABULARY = {
    "perfq": ("very-slow", "slow", "average", "fast", "very-fast"),
    "reliability": ("unreliable", "minimally-reliable", "average", "reliable", "very-reliable"),
    "cost": ("very-few", "few", "average", "many", "very-many"),
    "pas": ("very-few", "few", "average", "many", "very-many"),
}

OBJECTIVE_ORDER = ("perfq", "reliability", "cost", "pas")


@dataclass(frozen=True)
class OrdinalLabel:
    """Per-objective 5-point levels; words read level-order per vocabulary."""

    levels: tuple[int, int, int, int]

    def __post_init__(self):
        for level in self.levels:
            if not 0 <= level <= 4:
                raise ValueError(f"label level {level} outside [0, 4]")

    @property
    def words(self) -> tuple[str, str, str, str]:
        return tuple(
            VOCABULARY[name][level] for name, level in zip(OBJECTIVE_ORDER, self.levels)
        )

    def phrase(self) -> str:
        return " / ".join(self.words)


def _level(value: float, lo: float, hi: float) -> int:
    if hi <= lo:
        return 2
    raw = math.floor(4.0 * (value - lo) / (hi - lo))
    return min(max(int(raw), 0), 4)


def discretize(front: list[ObjectiveVector], strategy: str = "equal-width") -> list[OrdinalLabel]:
    """5-point discretization of each objective over the front's own range.

    Equal-width is the default; "quantile" buckets by rank instead. A
    zero-range objective maps everything to the middle level.
    """
    if not front:
        raise ArchsteerError("discretize of an empty front")
    columns = list(zip(*(v.as_tuple() for v in front)))
    labels = []
    if strategy == "equal-width":
        bounds = [(min(col), max(col)) for col in columns]
        for vec in front:
            values = vec.as_tuple()
            labels.append(
                OrdinalLabel(
                    tuple(_level(v, lo, hi) for v, (lo, hi) in zip(values, bounds))
                )
            )
    elif strategy == "quantile":
        sorted_cols = [sorted(col) for col in columns]
        n = len(front)
        for vec in front:
            levels = []
            for value, col in zip(vec.as_tuple(), sorted_cols):
                if col[0] == col[-1]:
                    levels.append(2)
                    continue
                rank = col.index(value)
                levels.append(min(4, int(5 * rank / n)))
            labels.append(OrdinalLabel(tuple(levels)))
    else:
        raise ArchsteerError(f"unknown discretization strategy '{strategy}'")
    return labels


# ---------------------------------------------------------------------------
# PAM k-medoids with silhouette model selection


@dataclass
class ClusterSet:
    k: int
    assignments: list[int]
    medoid_indices: list[int]
    silhouette: float
    labels: list[OrdinalLabel]
    degenerate: bool = False


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def silhouette(assignments: list[int], distances: np.ndarray) -> float:
    """Mean silhouette (b - a) / max(a, b); singleton members contribute 0."""
    clusters: dict[int, list[int]] = {}
    for idx, c in enumerate(assignments):
        clusters.setdefault(c, []).append(idx)
    if len(clusters) < 2:
        raise ArchsteerError("silhouette requires at least 2 clusters")
    total = 0.0
    n = len(assignments)
    for idx in range(n):
        own = clusters[assignments[idx]]
        if len(own) == 1:
            continue  # contributes 0
        a = sum(distances[idx, j] for j in own if j != idx) / (len(own) - 1)
        b = math.inf
        for cid, members in clusters.items():
            if cid == assignments[idx]:
                continue
            b = min(b, sum(distances[idx, j] for j in members) / len(members))
        denom = max(a, b)
        total += 0.0 if denom == 0 else (b - a) / denom
    return total / n


def _assign(distances: np.ndarray, medoids: list[int]) -> list[int]:
    cols = distances[:, medoids]
    return [medoids[int(i)] for i in cols.argmin(axis=1)]


def _pam(distances: np.ndarray, k: int, rng: random.Random) -> list[int]:
    """PAM: greedy k-medoids++-style init then swap until no improvement."""
    n = distances.shape[0]
    first = rng.randrange(n)
    medoids = [first]
    while len(medoids) < k:
        best_cost = np.array([distances[i, medoids].min() for i in range(n)])
        weights = best_cost**2
        total = weights.sum()
        if total <= 0:
            candidates = [i for i in range(n) if i not in medoids]
            medoids.append(candidates[rng.randrange(len(candidates))])
            continue
        pick = rng.random() * total
        acc = 0.0
        chosen = n - 1
        for i in range(n):
            acc += weights[i]
            if acc >= pick:
                chosen = i
                break
        if chosen in medoids:
            chosen = next(i for i in range(n) if i not in medoids)
        medoids.append(chosen)

    def total_cost(meds: list[int]) -> float:
        return float(distances[:, meds].min(axis=1).sum())

    improved = True
    cost = total_cost(medoids)
    while improved:
        improved = False
        for mi in range(len(medoids)):
            for candidate in range(n):
                if candidate in medoids:
                    continue
                trial = list(medoids)
                trial[mi] = candidate
                trial_cost = total_cost(trial)
                if trial_cost < cost - 1e-12:
                    medoids, cost = trial, trial_cost
                    improved = True
    return sorted(medoids)


def _refine_medoids(distances: np.ndarray, assignments: list[int]) -> tuple[list[int], list[int]]:
    """Re-center each cluster on its true medoid and re-assign until stable."""
    while True:
        clusters: dict[int, list[int]] = {}
        for idx, c in enumerate(assignments):
            clusters.setdefault(c, []).append(idx)
        medoids = []
        for members in clusters.values():
            sub = distances[np.ix_(members, members)]
            medoids.append(members[int(sub.mean(axis=1).argmin())])
        medoids = sorted(medoids)
        new_assignments = _assign(distances, medoids)
        if new_assignments == assignments:
            return medoids, assignments
        assignments = new_assignments


def cluster_front(
    front: list[ObjectiveVector],
    k_range: tuple[int, int] = (2, 8),
    rng: random.Random | None = None,
    label_strategy: str = "equal-width",
) -> ClusterSet:
    """Standardize, run PAM for each candidate k, keep the best silhouette.

    Fronts too small (or fully degenerate) collapse to a single cluster with
    silhouette 0. Cluster ids are ordered by medoid perfq descending.
    """
    rng = rng or random.Random(0)
    labels = discretize(front, label_strategy)
    n = len(front)

    def single() -> ClusterSet:
        medoid = 0
        if n > 1:
            pts = standardized_objectives(front)
            d = _pairwise_distances(pts)
            medoid = int(d.mean(axis=1).argmin())
        return ClusterSet(
            k=1,
            assignments=[0] * n,
            medoid_indices=[medoid],
            silhouette=0.0,
            labels=labels,
            degenerate=True,
        )

    lo = max(2, k_range[0])
    hi = min(k_range[1], n - 1)
    if n < 2 or lo > hi:
        return single()
    pts = standardized_objectives(front)
    if pts.shape[1] == 0 or np.allclose(pts, pts[0]):
        return single()
    distances = _pairwise_distances(pts)

    best: tuple[float, int, list[int], list[int]] | None = None
    for k in range(lo, hi + 1):
        medoids = _pam(distances, k, rng)
        medoids, assignments = _refine_medoids(distances, _assign(distances, medoids))
        if len(set(assignments)) < 2:
            continue
        score = silhouette(assignments, distances)
        if best is None or score > best[0] + 1e-12:
            best = (score, k, medoids, assignments)
    if best is None:
        return single()
    score, k, medoids, assignments = best

    # stable presentation order: medoid perfq descending
    order = sorted(range(len(medoids)), key=lambda i: -front[medoids[i]].perfq)
    medoids_ordered = [medoids[i] for i in order]
    renumber = {old: new for new, old in enumerate(medoids_ordered)}
    cluster_ids = [renumber[m] for m in assignments]
    return ClusterSet(
        k=len(medoids_ordered),
        assignments=cluster_ids,
        medoid_indices=medoids_ordered,
        silhouette=score,
        labels=labels,
    )


def standardized_objectives(front: list[ObjectiveVector]) -> np.ndarray:
    """Zero-mean unit-variance columns; zero-variance columns are dropped."""
    arr = np.array([v.as_tuple() for v in front], dtype=float)
    std = arr.std(axis=0)
    keep = std > 0
    if not keep.any():
        return np.zeros((len(front), 0))
    arr = arr[:, keep]
    return (arr - arr.mean(axis=0)) / arr.std(axis=0)


# ---------------------------------------------------------------------------
# Interaction points


@dataclass
class InteractionPoint:
    """One node of the steering tree: a frozen prefix plus its search result."""

    id: str
    parent_id: str | None
    depth: int
    prefix: RefactoringSequence
    archive: RunArchive | None = None
    clusters: ClusterSet | None = None
    # the solution list the clusters index into (front, or the full archive
    # when clustering was configured over every evaluated solution)
    clustered: list[Individual] = field(default_factory=list)
    children: dict[int, str] = field(default_factory=dict)

    def front(self) -> list[Individual]:
        return [] if self.archive is None else self.archive.final_front

    def archive_solutions(self) -> list[Individual]:
        if self.archive is None:
            return []
        return sorted(self.archive.individuals.values(), key=lambda ind: ind.key)


class DepthExceededError(ArchsteerError):
    pass


class UnknownClusterError(ArchsteerError):
    pass


def cluster_point(
    point: InteractionPoint,
    k_pin: int | None,
    seed: int,
    scope: str = "front",
    label_strategy: str = "equal-width",
) -> None:
    """Cluster a finished point's solutions.

    scope picks the clustered set: the non-dominated front (default) or the
    full archive of evaluated solutions. k_pin forces the cluster count when
    the set is large enough (n > k_pin); smaller sets fall back to
    silhouette-selected k.
    """
    if scope == "archive":
        point.clustered = point.archive_solutions()
    elif scope == "front":
        point.clustered = list(point.front())
    else:
        raise ArchsteerError(f"unknown cluster scope '{scope}'")
    objectives = [ind.objectives for ind in point.clustered]
    if k_pin and len(objectives) > k_pin:
        k_range = (k_pin, k_pin)
    else:
        k_range = (2, 8)
    point.clusters = cluster_front(objectives, k_range, random.Random(seed), label_strategy)


def expand(
    point: InteractionPoint,
    cluster_id: int,
    evaluator: Evaluator,
    config: SearchConfig,
    segment_iters: int,
    segment_genes: int,
    rng: random.Random,
    registry: dict[str, InteractionPoint],
    k_pin: int | None = None,
    cluster_seed: int = 0,
    scope: str = "front",
    progress=None,
) -> InteractionPoint:
    """Freeze the chosen medoid's segment genes and run the next segment.

    Idempotent per (point, cluster): an existing child is returned as-is.
    """
    if point.depth >= config.interactions:
        raise DepthExceededError(
            f"node '{point.id}' at depth {point.depth} cannot expand (k={config.interactions})"
        )
    if point.clusters is None or cluster_id not in range(point.clusters.k):
        raise UnknownClusterError(f"node '{point.id}' has no cluster {cluster_id}")
    existing = point.children.get(cluster_id)
    if existing is not None:
        return registry[existing]

    medoid_idx = point.clusters.medoid_indices[cluster_id]
    medoid = point.clustered[medoid_idx]
    child_prefix = RefactoringSequence(
        medoid.sequence.actions, frozen_prefix_len=len(medoid.sequence.actions)
    )
    child = InteractionPoint(
        id=f"{point.id}.{cluster_id}",
        parent_id=point.id,
        depth=point.depth + 1,
        prefix=child_prefix,
    )
    child.archive = evolve_segment(
        evaluator, child_prefix, config, segment_iters, segment_genes, rng, progress=progress
    )
    cluster_point(child, k_pin, cluster_seed, scope)
    registry[child.id] = child
    point.children[cluster_id] = child.id
    return child


def session_tree(root_id: str, registry: dict[str, InteractionPoint]) -> list[dict]:
    """Preorder summary: id, depth, labels of medoids, front size, child slots."""
    out: list[dict] = []

    def visit(node_id: str):
        point = registry[node_id]
        clusters = point.clusters
        out.append(
            {
                "id": point.id,
                "parent": point.parent_id,
                "depth": point.depth,
                "prefix_len": point.prefix.frozen_prefix_len,
                "nps": len(point.front()),
                "cluster_count": 0 if clusters is None else clusters.k,
                "medoid_labels": []
                if clusters is None
                else [
                    clusters.labels[m].phrase() for m in clusters.medoid_indices
                ],
                "children": {str(cid): nid for cid, nid in sorted(point.children.items())},
            }
        )
        for _, child_id in sorted(point.children.items()):
            visit(child_id)

    visit(root_id)
    return out
