import itertools
import math
import random

import numpy as np
import pytest

from archsteer.evaluation import Evaluator, ObjectiveVector
from archsteer.interaction import (
    DepthExceededError,
    InteractionPoint,
    OrdinalLabel,
    UnknownClusterError,
    cluster_front,
    cluster_point,
    discretize,
    expand,
    session_tree,
    silhouette,
    standardized_objectives,
    _pairwise_distances,
)
from archsteer.optimizer import SearchConfig, evolve_segment, run_seed
from archsteer.refactoring import RefactoringSequence


def vec(perfq=0.0, reliability=0.5, cost=1.0, pas=0):
    return ObjectiveVector(perfq=perfq, reliability=reliability, cost=cost, pas=pas)


# ---------------------------------------------------------------------------
# Discretization and labels


def test_discretize_boundaries():
    front = [vec(reliability=r) for r in (0.0, 0.5, 1.0)]
    labels = discretize(front)
    assert labels[0].words[1] == "unreliable"  # minimum reliability
    assert labels[1].words[1] == "average"  # midpoint
    assert labels[2].words[1] == "very-reliable"


def test_discretize_zero_range_is_average():
    front = [vec(), vec(), vec()]
    for label in discretize(front):
        assert label.words == ("average", "average", "average", "average")


def test_discretize_direction_vocabularies():
    # minimized objectives: low value -> best word at level 0
    front = [vec(cost=c, pas=p) for c, p in ((0.0, 0), (10.0, 8))]
    labels = discretize(front)
    assert labels[0].words[2] == "very-few" and labels[1].words[2] == "very-many"
    assert labels[0].words[3] == "very-few" and labels[1].words[3] == "very-many"
    # maximized perfq: high value -> best word at level 4
    front = [vec(perfq=-1.0), vec(perfq=1.0)]
    labels = discretize(front)
    assert labels[0].words[0] == "very-slow" and labels[1].words[0] == "very-fast"


def test_discretize_monotone_per_objective():
    rng = random.Random(4)
    values = sorted(rng.uniform(0, 5) for _ in range(20))
    front = [vec(cost=v) for v in values]
    labels = discretize(front)
    levels = [l.levels[2] for l in labels]
    assert levels == sorted(levels)


def test_ordinal_label_level_bounds():
    with pytest.raises(ValueError):
        OrdinalLabel((0, 1, 2, 5))


def test_label_phrase_format():
    assert OrdinalLabel((3, 4, 0, 2)).phrase() == "fast / very-reliable / very-few / average"


# ---------------------------------------------------------------------------
# Clustering


def one_dim_front(values):
    return [vec(cost=v) for v in values]


def exhaustive_two_medoids(values):
    """Oracle: the medoid pair minimizing total dissimilarity in 1-D."""
    pts = standardized_objectives(one_dim_front(values))
    d = _pairwise_distances(pts)
    best, best_cost = None, math.inf
    for pair in itertools.combinations(range(len(values)), 2):
        cost = sum(min(d[i, pair[0]], d[i, pair[1]]) for i in range(len(values)))
        if cost < best_cost:
            best, best_cost = pair, cost
    return set(best)


def test_cluster_two_separated_pairs():
    values = [0.0, 1.0, 10.0, 11.0]
    result = cluster_front(one_dim_front(values), k_range=(2, 2), rng=random.Random(0))
    assert result.k == 2
    groups = {}
    for idx, cid in enumerate(result.assignments):
        groups.setdefault(cid, set()).add(values[idx])
    assert set(map(frozenset, groups.values())) == {frozenset({0.0, 1.0}), frozenset({10.0, 11.0})}
    # PAM medoids agree with the exhaustive-search oracle
    oracle = exhaustive_two_medoids(values)
    assert any(m in oracle for m in result.medoid_indices)
    for cid, members in groups.items():
        medoid_value = values[result.medoid_indices[cid]]
        assert medoid_value in members


def test_cluster_two_identical_points_degenerates():
    result = cluster_front([vec(), vec()], k_range=(2, 2), rng=random.Random(0))
    assert result.degenerate
    assert result.k == 1
    assert result.silhouette == 0.0


def test_cluster_two_gaussian_blobs_selects_k2():
    rng = random.Random(6)
    front = []
    for _ in range(8):
        front.append(vec(perfq=rng.gauss(0.8, 0.02), reliability=rng.gauss(0.9, 0.02),
                         cost=rng.gauss(1.0, 0.05), pas=0))
    for _ in range(8):
        front.append(vec(perfq=rng.gauss(-0.8, 0.02), reliability=rng.gauss(0.2, 0.02),
                         cost=rng.gauss(9.0, 0.05), pas=4))
    result = cluster_front(front, k_range=(2, 5), rng=random.Random(1))
    assert result.k == 2
    assert result.silhouette > 0.7
    # brute-force silhouette over k in 2..5 confirms k=2 is the best choice
    pts = standardized_objectives(front)
    d = _pairwise_distances(pts)
    assert result.silhouette == pytest.approx(
        silhouette(result.assignments, d), abs=1e-12
    )


def test_cluster_medoid_optimality_exact():
    rng = random.Random(12)
    front = [vec(perfq=rng.uniform(-1, 1), reliability=rng.uniform(0, 1),
                 cost=rng.uniform(0, 20), pas=rng.randint(0, 6)) for _ in range(24)]
    result = cluster_front(front, rng=random.Random(2))
    pts = standardized_objectives(front)
    d = _pairwise_distances(pts)
    for cid in range(result.k):
        members = [i for i, c in enumerate(result.assignments) if c == cid]
        medoid = result.medoid_indices[cid]
        assert medoid in members
        medoid_cost = d[medoid, members].mean()
        for candidate in members:
            assert medoid_cost <= d[candidate, members].mean() + 1e-12


def test_cluster_assignments_invariant_to_affine_rescale():
    rng = random.Random(8)
    front = [vec(perfq=rng.uniform(-1, 1), reliability=rng.uniform(0, 1),
                 cost=rng.uniform(0, 5), pas=rng.randint(0, 3)) for _ in range(12)]
    doubled = [vec(v.perfq, v.reliability, v.cost * 2.0, v.pas) for v in front]
    a = cluster_front(front, k_range=(3, 3), rng=random.Random(3))
    b = cluster_front(doubled, k_range=(3, 3), rng=random.Random(3))
    assert a.assignments == b.assignments


def test_cluster_ids_ordered_by_medoid_perfq():
    rng = random.Random(10)
    front = [vec(perfq=rng.uniform(-1, 1), reliability=rng.uniform(0, 1),
                 cost=rng.uniform(0, 5), pas=rng.randint(0, 3)) for _ in range(16)]
    result = cluster_front(front, rng=random.Random(5))
    perfqs = [front[m].perfq for m in result.medoid_indices]
    assert perfqs == sorted(perfqs, reverse=True)


# ---------------------------------------------------------------------------
# Silhouette


def test_silhouette_two_tight_pairs_near_one():
    pts = np.array([[0.0], [0.01], [10.0], [10.01]])
    d = _pairwise_distances(pts)
    value = silhouette([0, 0, 1, 1], d)
    assert value > 0.9


def test_silhouette_identical_points_zero():
    pts = np.zeros((4, 2))
    d = _pairwise_distances(pts)
    assert silhouette([0, 0, 1, 1], d) == 0.0


def test_silhouette_singletons_zero():
    pts = np.array([[0.0], [5.0]])
    d = _pairwise_distances(pts)
    assert silhouette([0, 1], d) == 0.0


def test_silhouette_range_bounds():
    rng = random.Random(9)
    for _ in range(20):
        n = rng.randint(4, 12)
        pts = np.array([[rng.uniform(0, 1), rng.uniform(0, 1)] for _ in range(n)])
        d = _pairwise_distances(pts)
        assignments = [rng.randint(0, 1) for _ in range(n)]
        if len(set(assignments)) < 2:
            continue
        value = silhouette(assignments, d)
        assert -1.0 <= value <= 1.0


# ---------------------------------------------------------------------------
# Interaction points


@pytest.fixture(scope="module")
def rooted_session():
    from archsteer.fixtures_io import load_fixture

    evaluator = Evaluator(load_fixture("ttbs"))
    config = SearchConfig(iterations=8, chromosome_length=8, interactions=3,
                          population_size=8, seed=17)
    root = InteractionPoint(id="root", parent_id=None, depth=0, prefix=RefactoringSequence())
    root.archive = evolve_segment(
        evaluator, root.prefix, config, 2, 2, random.Random(run_seed(17, "root"))
    )
    cluster_point(root, None, seed=run_seed(17, "cluster", "root"))
    registry = {"root": root}
    return evaluator, config, root, registry


def test_expand_child_prefix_arithmetic(rooted_session):
    evaluator, config, root, registry = rooted_session
    child = expand(root, 0, evaluator, config, 2, 2, random.Random(1), registry,
                   cluster_seed=2)
    assert child.depth == 1
    assert child.prefix.frozen_prefix_len == root.prefix.frozen_prefix_len + 2
    # grandchild: 2 frozen from the parent + 2 from the chosen medoid = 4
    grandchild = expand(child, 0, evaluator, config, 2, 2, random.Random(2), registry,
                        cluster_seed=3)
    assert grandchild.prefix.frozen_prefix_len == 4
    for ind in grandchild.front():
        assert ind.sequence.actions[:4] == grandchild.prefix.actions


def test_expand_idempotent(rooted_session):
    evaluator, config, root, registry = rooted_session
    first = expand(root, 1, evaluator, config, 2, 2, random.Random(4), registry,
                   cluster_seed=5)
    again = expand(root, 1, evaluator, config, 2, 2, random.Random(999), registry,
                   cluster_seed=999)
    assert first is again


def test_expand_depth_bound(rooted_session):
    evaluator, config, root, registry = rooted_session
    node = root
    while node.depth < config.interactions:
        node = expand(node, 0, evaluator, config, 2, 2,
                      random.Random(node.depth + 7), registry, cluster_seed=node.depth)
    with pytest.raises(DepthExceededError):
        expand(node, 0, evaluator, config, 2, 2, random.Random(0), registry)


def test_expand_unknown_cluster(rooted_session):
    evaluator, config, root, registry = rooted_session
    with pytest.raises(UnknownClusterError):
        expand(root, 99, evaluator, config, 2, 2, random.Random(0), registry)


def test_expand_deterministic_along_path():
    from archsteer.fixtures_io import load_fixture

    def run():
        evaluator = Evaluator(load_fixture("hotspot"))
        config = SearchConfig(iterations=4, chromosome_length=4, interactions=1,
                              population_size=8, seed=5)
        root = InteractionPoint(id="root", parent_id=None, depth=0,
                                prefix=RefactoringSequence())
        root.archive = evolve_segment(
            evaluator, root.prefix, config, 2, 2, random.Random(run_seed(5, "root"))
        )
        cluster_point(root, None, seed=run_seed(5, "cluster", "root"))
        registry = {"root": root}
        child = expand(root, 0, evaluator, config, 2, 2,
                       random.Random(run_seed(5, "child", 0)), registry,
                       cluster_seed=run_seed(5, "cluster", "child"))
        return [(ind.key, ind.objectives.as_tuple()) for ind in child.front()]

    assert run() == run()


def test_session_tree_single_root():
    root = InteractionPoint(id="root", parent_id=None, depth=0, prefix=RefactoringSequence())
    tree = session_tree("root", {"root": root})
    assert len(tree) == 1
    assert tree[0]["id"] == "root"
    assert tree[0]["nps"] == 0


def test_session_tree_full_depth3_k4_has_85_nodes():
    # geometric sum 1 + 4 + 16 + 64 built synthetically
    registry = {}

    def build(node_id, parent, depth):
        point = InteractionPoint(id=node_id, parent_id=parent, depth=depth,
                                 prefix=RefactoringSequence())
        registry[node_id] = point
        if depth < 3:
            for c in range(4):
                child_id = f"{node_id}.{c}"
                point.children[c] = child_id
                build(child_id, node_id, depth + 1)
        return point

    build("root", None, 0)
    tree = session_tree("root", registry)
    assert len(tree) == 1 + 4 + 16 + 64
    assert tree[0]["id"] == "root"
    # preorder: a child directly follows its ancestor chain
    ids = [n["id"] for n in tree]
    assert ids[1] == "root.0"
