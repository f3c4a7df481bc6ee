"""Steering sessions: background segment runs, node lifecycle, persistence.

One session = one initial model + one search configuration + a tree of
interaction points. Search runs on a worker pool; endpoints only read state
or enqueue work. Every session persists as a single JSON document replaced
atomically (write-temp-rename), so a crash loses at most the in-flight node:
on reload, nodes caught mid-run come back as ``failed``.
"""

from __future__ import annotations

import json
import os
import random
import tempfile
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from .evaluation import Evaluator, ObjectiveVector
from .interaction import (
    ClusterSet,
    InteractionPoint,
    OrdinalLabel,
    cluster_point,
    session_tree,
)
from .model import ArchitectureModel, ArchsteerError, load_model, to_document
from .optimizer import (
    ConfigError,
    RunArchive,
    SearchConfig,
    archive_from_solutions_document,
    evolve_segment,
    run_seed,
    segment_plan,
    solutions_document,
)
from .refactoring import RefactoringAction, RefactoringSequence

SESSION_FORMAT = 1


class SessionNotFound(ArchsteerError):
    pass


class NodeNotFound(ArchsteerError):
    pass


class NodeNotReady(ArchsteerError):
    """The node is not done yet; choosing a centroid is premature."""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class NodeState:
    point: InteractionPoint
    status: str = "idle"
    cluster_of_parent: int | None = None
    generation: int = 0
    of: int = 0
    error: str | None = None


@dataclass
class Session:
    id: str
    model: ArchitectureModel
    config: SearchConfig
    cluster_k: int | None
    cluster_scope: str = "front"
    discretization: str = "equal-width"
    detectors: dict | None = None
    nodes: dict[str, NodeState] = field(default_factory=dict)
    created: str = field(default_factory=_now)
    updated: str = field(default_factory=_now)
    evaluator: Evaluator | None = None
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)

    @property
    def root_id(self) -> str:
        return "root"

    def registry(self) -> dict[str, InteractionPoint]:
        return {nid: state.point for nid, state in self.nodes.items()}

    def plan(self):
        return segment_plan(self.config.iterations, self.config.chromosome_length,
                            self.config.interactions)


def _actions_to_json(actions) -> list[list[str]]:
    return [list(a.key) for a in actions]


def _actions_from_json(rows) -> tuple[RefactoringAction, ...]:
    return tuple(RefactoringAction(kind=row[0], params=tuple(row[1:])) for row in rows)


def _archive_to_json(archive: RunArchive | None) -> dict | None:
    if archive is None:
        return None
    return solutions_document(archive)


def _archive_from_json(doc: dict | None, config: SearchConfig) -> RunArchive | None:
    if doc is None:
        return None
    return archive_from_solutions_document(doc, config)


def _clusters_to_json(clusters: ClusterSet | None) -> dict | None:
    if clusters is None:
        return None
    return {
        "k": clusters.k,
        "assignments": clusters.assignments,
        "medoid_indices": clusters.medoid_indices,
        "silhouette": clusters.silhouette,
        "labels": [list(l.levels) for l in clusters.labels],
        "degenerate": clusters.degenerate,
    }


def _clusters_from_json(doc: dict | None) -> ClusterSet | None:
    if doc is None:
        return None
    return ClusterSet(
        k=doc["k"],
        assignments=list(doc["assignments"]),
        medoid_indices=list(doc["medoid_indices"]),
        silhouette=doc["silhouette"],
        labels=[OrdinalLabel(tuple(levels)) for levels in doc["labels"]],
        degenerate=doc.get("degenerate", False),
    )


def session_to_document(session: Session) -> dict:
    nodes = {}
    for nid, state in session.nodes.items():
        nodes[nid] = {
            "id": nid,
            "parent": state.point.parent_id,
            "depth": state.point.depth,
            "status": state.status,
            "cluster_of_parent": state.cluster_of_parent,
            "prefix": _actions_to_json(state.point.prefix.actions),
            "generation": state.generation,
            "of": state.of,
            "error": state.error,
            "archive": _archive_to_json(state.point.archive),
            "clusters": _clusters_to_json(state.point.clusters),
            "children": {str(k): v for k, v in state.point.children.items()},
        }
    return {
        "format": SESSION_FORMAT,
        "id": session.id,
        "created": session.created,
        "updated": session.updated,
        "model": to_document(session.model),
        "config": {
            "iterations": session.config.iterations,
            "chromosome_length": session.config.chromosome_length,
            "interactions": session.config.interactions,
            "population_size": session.config.population_size,
            "p_crossover": session.config.p_crossover,
            "p_mutation": session.config.p_mutation,
            "seed": session.config.seed,
            "cluster_k": session.cluster_k,
            "cluster_scope": session.cluster_scope,
            "discretization": session.discretization,
            "detectors": session.detectors,
        },
        "root": session.root_id,
        "nodes": nodes,
    }


def session_from_document(doc: dict) -> Session:
    cfg = doc["config"]
    config = SearchConfig(
        iterations=cfg["iterations"],
        chromosome_length=cfg["chromosome_length"],
        interactions=cfg["interactions"],
        population_size=cfg["population_size"],
        p_crossover=cfg["p_crossover"],
        p_mutation=cfg["p_mutation"],
        seed=cfg["seed"],
    )
    model = load_model(json.dumps(doc["model"]))
    session = Session(
        id=doc["id"],
        model=model,
        config=config,
        cluster_k=cfg.get("cluster_k"),
        cluster_scope=cfg.get("cluster_scope", "front"),
        discretization=cfg.get("discretization", "equal-width"),
        detectors=cfg.get("detectors"),
        created=doc["created"],
        updated=doc["updated"],
    )
    session.evaluator = Evaluator(model, thresholds=session.detectors)
    for nid, row in doc["nodes"].items():
        prefix_actions = _actions_from_json(row["prefix"])
        point = InteractionPoint(
            id=nid,
            parent_id=row["parent"],
            depth=row["depth"],
            prefix=RefactoringSequence(prefix_actions, len(prefix_actions)),
            archive=_archive_from_json(row["archive"], config),
            clusters=_clusters_from_json(row["clusters"]),
            children={int(k): v for k, v in row["children"].items()},
        )
        if point.archive is not None:
            point.clustered = (
                point.archive_solutions()
                if session.cluster_scope == "archive"
                else list(point.front())
            )
        status = row["status"]
        error = row["error"]
        if status in ("running", "idle"):
            # the in-flight (or queued) run died with the process
            status, error = "failed", "interrupted by shutdown"
        session.nodes[nid] = NodeState(
            point=point,
            status=status,
            cluster_of_parent=row.get("cluster_of_parent"),
            generation=row["generation"],
            of=row["of"],
            error=error,
        )
    return session


class SessionStore:
    """Directory-backed registry of sessions plus the background worker pool."""

    def __init__(self, data_dir: str, workers: int = 2):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._pool = ThreadPoolExecutor(max_workers=workers, thread_name_prefix="archsteer")
        self._store_lock = threading.Lock()
        self._load_existing()

    # -- persistence --------------------------------------------------------

    def _path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.session.json")

    def persist(self, session: Session) -> None:
        session.updated = _now()
        doc = session_to_document(session)
        directory = self.data_dir
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._path(session.id))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def _load_existing(self) -> None:
        for name in sorted(os.listdir(self.data_dir)):
            if not name.endswith(".session.json"):
                continue
            with open(os.path.join(self.data_dir, name), encoding="utf-8") as fh:
                doc = json.load(fh)
            session = session_from_document(doc)
            self.sessions[session.id] = session

    # -- lookup -------------------------------------------------------------

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionNotFound(f"unknown session '{session_id}'")
        return session

    def get_node(self, session_id: str, node_id: str) -> tuple[Session, NodeState]:
        session = self.get(session_id)
        state = session.nodes.get(node_id)
        if state is None:
            raise NodeNotFound(f"unknown node '{node_id}' in session '{session_id}'")
        return session, state

    # -- lifecycle ----------------------------------------------------------

    def create_session(
        self,
        model: ArchitectureModel,
        config: SearchConfig,
        cluster_k: int | None = 4,
        cluster_scope: str = "front",
        detectors: dict | None = None,
        discretization: str = "equal-width",
    ) -> Session:
        config.check()
        if cluster_scope not in ("front", "archive"):
            raise ConfigError(f"cluster_scope must be 'front' or 'archive', got '{cluster_scope}'")
        if discretization not in ("equal-width", "quantile"):
            raise ConfigError(
                f"discretization must be 'equal-width' or 'quantile', got '{discretization}'"
            )
        session = Session(
            id=uuid.uuid4().hex[:12],
            model=model,
            config=config,
            cluster_k=cluster_k,
            cluster_scope=cluster_scope,
            discretization=discretization,
            detectors=detectors,
        )
        session.evaluator = Evaluator(model, thresholds=detectors)
        root = InteractionPoint(
            id="root", parent_id=None, depth=0, prefix=RefactoringSequence()
        )
        iters, genes = session.plan()[0]
        session.nodes["root"] = NodeState(point=root, status="running", of=iters)
        with self._store_lock:
            self.sessions[session.id] = session
        self.persist(session)
        self._pool.submit(self._run_node, session.id, "root")
        return session

    def choose_centroid(self, session_id: str, node_id: str, cluster_id: int) -> tuple[str, bool]:
        """Return (child id, created). Idempotent per (node, cluster)."""
        session, state = self.get_node(session_id, node_id)
        with session.lock:
            if state.status != "done":
                raise NodeNotReady(
                    f"node '{node_id}' is {state.status}; choose requires a finished node"
                )
            point = state.point
            if point.depth >= session.config.interactions:
                raise ConfigError(
                    f"interaction budget exhausted: depth {point.depth} of "
                    f"k={session.config.interactions}"
                )
            if point.clusters is None or cluster_id not in range(point.clusters.k):
                raise NodeNotFound(f"node '{node_id}' has no cluster {cluster_id}")
            existing = point.children.get(cluster_id)
            if existing is not None and session.nodes[existing].status != "failed":
                return existing, False
            child_id = f"{node_id}.{cluster_id}"
            medoid = point.front()[point.clusters.medoid_indices[cluster_id]]
            child_prefix = RefactoringSequence(
                medoid.sequence.actions, frozen_prefix_len=len(medoid.sequence.actions)
            )
            child_point = InteractionPoint(
                id=child_id,
                parent_id=node_id,
                depth=point.depth + 1,
                prefix=child_prefix,
            )
            iters, _ = session.plan()[child_point.depth]
            session.nodes[child_id] = NodeState(
                point=child_point,
                status="running",
                cluster_of_parent=cluster_id,
                of=iters,
            )
            point.children[cluster_id] = child_id
        self.persist(session)
        self._pool.submit(self._run_node, session_id, child_id)
        return child_id, True

    def _run_node(self, session_id: str, node_id: str) -> None:
        session, state = self.get_node(session_id, node_id)
        point = state.point
        try:
            iters, genes = session.plan()[point.depth]

            def on_progress(generation, of):
                state.generation, state.of = generation, of

            state.status = "running"
            state.of = iters
            rng = random.Random(run_seed(session.config.seed, "node", node_id))
            archive = evolve_segment(
                session.evaluator,
                point.prefix,
                session.config,
                iters,
                genes,
                rng,
                progress=on_progress,
            )
            with session.lock:
                point.archive = archive
                cluster_point(
                    point,
                    session.cluster_k,
                    run_seed(session.config.seed, "cluster", node_id),
                    session.cluster_scope,
                    session.discretization,
                )
                state.status = "done"
        except Exception as exc:  # noqa: BLE001 - background job boundary
            with session.lock:
                state.status = "failed"
                state.error = str(exc)
        self.persist(session)

    # -- views ---------------------------------------------------------------

    def session_view(self, session_id: str) -> dict:
        session = self.get(session_id)
        counts: dict[str, int] = {}
        for state in session.nodes.values():
            counts[state.status] = counts.get(state.status, 0) + 1
        return {
            "id": session.id,
            "created": session.created,
            "updated": session.updated,
            "root": session.root_id,
            "model": session.model.name,
            "status_counts": counts,
            "config": {
                "iterations": session.config.iterations,
                "chromosome_length": session.config.chromosome_length,
                "interactions": session.config.interactions,
                "population_size": session.config.population_size,
                "seed": session.config.seed,
                "cluster_k": session.cluster_k,
                "segment_plan": [list(seg) for seg in session.plan()],
            },
        }

    def node_view(self, session_id: str, node_id: str, include_archive: bool = False) -> dict:
        session, state = self.get_node(session_id, node_id)
        point = state.point
        base = {
            "id": node_id,
            "parent": point.parent_id,
            "depth": point.depth,
            "status": state.status,
            "prefix_len": point.prefix.frozen_prefix_len,
            "prefix": _actions_to_json(point.prefix.actions),
            "generation": state.generation,
            "of": state.of,
            "error": state.error,
            "children": {str(k): v for k, v in point.children.items()},
            "max_depth": session.config.interactions,
        }
        if state.status != "done":
            return base
        clusters = point.clusters
        shown = point.clustered
        labels = clusters.labels if clusters else []
        solutions = []
        for idx, ind in enumerate(shown):
            solutions.append(
                {
                    "chromosome": _actions_to_json(ind.sequence.actions),
                    "objectives": _objectives_view(ind.objectives),
                    "cluster": clusters.assignments[idx] if clusters else 0,
                    "medoid": bool(clusters and idx in clusters.medoid_indices),
                    "label": labels[idx].phrase() if labels else "",
                }
            )
        cluster_rows = []
        if clusters:
            for cid in range(clusters.k):
                medoid_idx = clusters.medoid_indices[cid]
                cluster_rows.append(
                    {
                        "id": cid,
                        "size": sum(1 for a in clusters.assignments if a == cid),
                        "label": labels[medoid_idx].phrase(),
                        "label_words": list(labels[medoid_idx].words),
                        "medoid_objectives": _objectives_view(shown[medoid_idx].objectives),
                        "medoid_chromosome": _actions_to_json(shown[medoid_idx].sequence.actions),
                        "child": point.children.get(cid),
                    }
                )
        base.update(
            {
                "nps": len(point.front()),
                "front": solutions,
                "scope": session.cluster_scope,
                "silhouette": clusters.silhouette if clusters else 0.0,
                "clusters": cluster_rows,
            }
        )
        if include_archive:
            base["archive_solutions"] = [
                {
                    "chromosome": _actions_to_json(ind.sequence.actions),
                    "objectives": _objectives_view(ind.objectives),
                }
                for ind in point.archive_solutions()
            ]
        return base

    def tree_view(self, session_id: str) -> dict:
        session = self.get(session_id)
        nodes = session_tree(session.root_id, session.registry())
        for row in nodes:
            state = session.nodes[row["id"]]
            row["status"] = state.status
            row["generation"] = state.generation
            row["of"] = state.of
        return {"session": session_id, "nodes": nodes}

    def landscape_view(self, session_id: str, node_id: str) -> dict:
        from .indicators import kde_grid, pca_project

        session, state = self.get_node(session_id, node_id)
        if state.status != "done":
            raise NodeNotReady(f"node '{node_id}' is {state.status}")
        individuals = list(state.point.archive.individuals.values())
        points = [ind.objectives.as_tuple() for ind in individuals]
        if len(points) < 3:
            raise NodeNotReady("landscape needs at least 3 evaluated solutions")
        projected, fractions = pca_project(points)
        grid = kde_grid(projected.tolist())
        return {
            "node": node_id,
            "points": [[float(x), float(y)] for x, y in projected],
            "explained_variance": fractions,
            "kde": grid,
        }

    def shutdown(self) -> None:
        self._pool.shutdown(wait=True)


def _objectives_view(objectives: ObjectiveVector) -> dict:
    return {
        "perfq": objectives.perfq,
        "reliability": objectives.reliability,
        "cost": objectives.cost,
        "pas": objectives.pas,
    }
