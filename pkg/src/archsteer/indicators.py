"""Front quality indicators, landscape metrics, and nonparametric statistics.

All front indicators operate in minimization space. Fronts are normalized to
the unit box using the *reference front's* per-dimension bounds, so values
are comparable across experiments; coordinates are clamped into [0, 1]
(points outside the reference envelope saturate at the boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import ArchsteerError
from .optimizer import dominates_min, weakly_dominates_min

NADIR_EPS = 1e-6


def to_min_space(vectors: Sequence) -> list[tuple[float, ...]]:
    """ObjectiveVector list -> minimization-space tuples (maximized negated)."""
    return [v.to_min() if hasattr(v, "to_min") else tuple(v) for v in vectors]


def reference_bounds(reference_front: Sequence[Sequence[float]]) -> tuple[list, list]:
    arr = np.asarray(reference_front, dtype=float)
    return arr.min(axis=0).tolist(), arr.max(axis=0).tolist()


def normalize_front(
    front: Sequence[Sequence[float]],
    bounds: tuple[list, list],
) -> list[tuple[float, ...]]:
    """Scale a minimization-space front into [0, 1] by reference bounds."""
    lo, hi = bounds
    out = []
    for point in front:
        coords = []
        for v, l, h in zip(point, lo, hi):
            if h > l:
                coords.append(min(max((v - l) / (h - l), 0.0), 1.0))
            else:
                coords.append(0.5)
        out.append(tuple(coords))
    return out


def nadir(reference_front: Sequence[Sequence[float]], eps: float = NADIR_EPS) -> tuple:
    """Componentwise worst (max in minimization space) plus a small offset."""
    if not len(reference_front):
        raise ArchsteerError("nadir of an empty front")
    arr = np.asarray(reference_front, dtype=float)
    return tuple((arr.max(axis=0) + eps).tolist())


def _nondominated_min(points: list[tuple[float, ...]]) -> list[tuple[float, ...]]:
    out = []
    for i, p in enumerate(points):
        if not any(dominates_min(q, p) for j, q in enumerate(points) if j != i):
            out.append(p)
    # drop exact duplicates to keep the WFG recursion lean
    return list(dict.fromkeys(out))


def hypervolume_min(
    points: Sequence[Sequence[float]], ref_point: Sequence[float]
) -> float:
    """Exact hypervolume (WFG recursive slicing) in minimization space.

    Points that do not strictly dominate the reference point contribute no
    volume and are dropped.
    """
    ref = tuple(float(r) for r in ref_point)
    pts = []
    for p in points:
        p = tuple(float(v) for v in p)
        if len(p) != len(ref):
            raise ArchsteerError(f"dimension mismatch: point {len(p)}D vs ref {len(ref)}D")
        if all(v < r for v, r in zip(p, ref)):
            pts.append(p)
    pts = _nondominated_min(pts)
    pts.sort()
    return _wfg(pts, ref)


def _wfg(pts: list[tuple[float, ...]], ref: tuple[float, ...]) -> float:
    total = 0.0
    for i, p in enumerate(pts):
        incl = 1.0
        for v, r in zip(p, ref):
            incl *= r - v
        limited = [tuple(max(v, w) for v, w in zip(p, q)) for q in pts[i + 1:]]
        limited = [q for q in limited if all(v < r for v, r in zip(q, ref))]
        limited = _nondominated_min(limited)
        total += incl - _wfg(limited, ref)
    return total


def hypervolume(
    front: Sequence[Sequence[float]], ref_point: Sequence[float]
) -> float:
    return hypervolume_min(front, ref_point)


def igd_plus(
    front: Sequence[Sequence[float]], reference_front: Sequence[Sequence[float]]
) -> float:
    """Mean over reference points of the dominance-aware distance
    d+(a, r) = sqrt(sum_i max(a_i - r_i, 0)^2) to the closest front point."""
    if not len(front) or not len(reference_front):
        raise ArchsteerError("igd_plus requires non-empty fronts")
    f = np.asarray(front, dtype=float)
    r = np.asarray(reference_front, dtype=float)
    if f.shape[1] != r.shape[1]:
        raise ArchsteerError("dimension mismatch between front and reference")
    diffs = np.maximum(f[None, :, :] - r[:, None, :], 0.0)  # (ref, front, d)
    dists = np.sqrt((diffs**2).sum(axis=2))
    return float(dists.min(axis=1).mean())


def epsilon(
    front: Sequence[Sequence[float]], reference_front: Sequence[Sequence[float]]
) -> float:
    """Additive epsilon indicator: smallest shift making the front weakly
    dominate every reference point."""
    if not len(front) or not len(reference_front):
        raise ArchsteerError("epsilon requires non-empty fronts")
    f = np.asarray(front, dtype=float)
    r = np.asarray(reference_front, dtype=float)
    if f.shape[1] != r.shape[1]:
        raise ArchsteerError("dimension mismatch between front and reference")
    worst_coord = (f[None, :, :] - r[:, None, :]).max(axis=2)  # (ref, front)
    return float(worst_coord.min(axis=1).max())


def coverage(
    a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]
) -> float:
    """C(A, B): fraction of B weakly dominated (dominated or equal) by A."""
    if not len(b):
        raise ArchsteerError("coverage requires a non-empty second front")
    if len(a) and len(a[0]) != len(b[0]):
        raise ArchsteerError("dimension mismatch between fronts")
    covered = 0
    for q in b:
        if any(weakly_dominates_min(p, q) for p in a):
            covered += 1
    return covered / len(b)


# ---------------------------------------------------------------------------
# Trade-off landscape metrics


def entropy_tradeoff(solutions: Sequence) -> float:
    """Normalized Shannon entropy of the 5^4 ordinal-label histogram.

    1 means mass spreads flat over the whole label space; 0 means a single
    peak. Reported as `entropy_definition: normalized-shannon-5x5x5x5`.
    """
    from .interaction import discretize

    if not len(solutions):
        raise ArchsteerError("entropy of an empty solution set")
    labels = discretize(list(solutions))
    bins: dict[tuple[int, ...], int] = {}
    for label in labels:
        bins[label.levels] = bins.get(label.levels, 0) + 1
    total = len(labels)
    h = -sum((c / total) * math.log(c / total) for c in bins.values())
    return h / math.log(5**4)


# ---------------------------------------------------------------------------
# Refactoring-sequence trees


@dataclass
class SequenceTree:
    """Trie of canonicalized action records; a node is identified by its
    root path, a leaf counts the architectural models reached through it."""

    nodes: set[tuple]
    leaf_weight: dict[tuple, int]

    @property
    def size(self) -> int:
        return len(self.nodes)


def canonical_chromosome(actions, initial_model=None) -> tuple[tuple, ...]:
    """Rename generated element ids by creation order so structurally equal
    sequences from different runs compare equal.

    With a model given, created ids are discovered by replaying the sequence;
    without one, ids are taken verbatim.
    """
    keys = [a.key if hasattr(a, "key") else tuple(a) for a in actions]
    if initial_model is None:
        return tuple(keys)
    from .model import model_ids
    from .refactoring import RefactoringAction, action_seed, apply_action, check_action

    known = model_ids(initial_model)
    renames: dict[str, str] = {}
    counter = 0
    current = initial_model
    out = []
    for position, key in enumerate(keys):
        kind, *params = key
        mapped = tuple(renames.get(p, p) for p in params)
        out.append((kind,) + mapped)
        action = RefactoringAction(kind, tuple(params))
        if check_action(current, action) is not None:
            # Infeasible tail genes cannot create ids; keep them verbatim.
            continue
        nxt = apply_action(current, action, action_seed(position, action))
        for new_id in sorted(model_ids(nxt) - model_ids(current)):
            counter += 1
            renames[new_id] = f"@{counter}"
        current = nxt
    return tuple(out)


def build_sequence_tree(chromosomes, initial_model=None) -> SequenceTree:
    nodes: set[tuple] = set()
    leaf_weight: dict[tuple, int] = {}
    for actions in chromosomes:
        canon = canonical_chromosome(actions, initial_model)
        for depth in range(1, len(canon) + 1):
            nodes.add(canon[:depth])
        leaf_weight[canon] = leaf_weight.get(canon, 0) + 1
    return SequenceTree(nodes=nodes, leaf_weight=leaf_weight)


def tree_coverage(tree: SequenceTree, reference: SequenceTree) -> float:
    """Proportion of reference-tree nodes that also appear in `tree`."""
    if not reference.nodes:
        raise ArchsteerError("tree coverage against an empty reference tree")
    return len(reference.nodes & tree.nodes) / len(reference.nodes)


# ---------------------------------------------------------------------------
# Landscape export: PCA projection and kernel density grid


def standardize(points: Sequence[Sequence[float]]) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)
    std_safe = np.where(std > 0, std, 1.0)
    centered = (arr - mean) / std_safe
    centered[:, std == 0] = 0.0
    return centered


def pca_project(points: Sequence[Sequence[float]]) -> tuple[np.ndarray, list[float]]:
    """Standardize, eigen-decompose the covariance, project onto the top two
    components (sign fixed: largest-magnitude loading positive).

    Returns (n x 2 projected points, explained-variance fractions per kept
    component). Degenerate covariance yields fewer nonzero fractions, with
    missing projection axes rendered as zeros.
    """
    arr = standardize(points)
    if arr.shape[0] < 3:
        raise ArchsteerError("pca_project requires at least 3 solutions")
    cov = np.cov(arr, rowvar=False)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]
    for c in range(eigvecs.shape[1]):
        pivot = np.argmax(np.abs(eigvecs[:, c]))
        if eigvecs[pivot, c] < 0:
            eigvecs[:, c] = -eigvecs[:, c]
    total = eigvals.sum()
    if total <= 0:
        fractions: list[float] = []
    else:
        fractions = [float(v / total) for v in eigvals if v / total > 1e-12]
    projected = arr @ eigvecs[:, :2]
    if eigvecs.shape[1] < 2:  # pragma: no cover - 1-D objective spaces
        projected = np.pad(projected, ((0, 0), (0, 2 - projected.shape[1])))
    return projected, fractions


def kde_grid(
    points2d: Sequence[Sequence[float]],
    bandwidth: float | None = None,
    grid_size: int = 64,
) -> dict:
    """Isotropic Gaussian KDE evaluated on a grid covering the data plus a
    4-bandwidth margin; the Riemann sum of density x cell area is ~1."""
    arr = np.asarray(points2d, dtype=float)
    n = len(arr)
    if n == 0:
        raise ArchsteerError("kde_grid of an empty point set")
    if bandwidth is None:
        spread = arr.std(axis=0).mean()
        bandwidth = float(n ** (-1.0 / 6.0) * spread) if spread > 0 else 1.0
    if bandwidth <= 0:
        bandwidth = 1.0
    margin = 4.0 * bandwidth
    x_lo, y_lo = arr.min(axis=0) - margin
    x_hi, y_hi = arr.max(axis=0) + margin
    xs = np.linspace(x_lo, x_hi, grid_size)
    ys = np.linspace(y_lo, y_hi, grid_size)
    gx, gy = np.meshgrid(xs, ys)
    density = np.zeros_like(gx)
    inv = 1.0 / (2.0 * bandwidth * bandwidth)
    for px, py in arr:
        density += np.exp(-((gx - px) ** 2 + (gy - py) ** 2) * inv)
    density /= n * 2.0 * math.pi * bandwidth * bandwidth
    return {
        "grid": density.tolist(),
        "extent": [float(x_lo), float(x_hi), float(y_lo), float(y_hi)],
        "bandwidth": float(bandwidth),
        "grid_size": grid_size,
    }


# ---------------------------------------------------------------------------
# Nonparametric statistics


@dataclass(frozen=True)
class StatReport:
    p_value: float
    a12: float
    magnitude: str


MAGNITUDE_THRESHOLDS = (0.147, 0.33, 0.474)


def a12_magnitude(a12_value: float) -> str:
    d = abs(a12_value - 0.5)
    if d < MAGNITUDE_THRESHOLDS[0]:
        return "negligible"
    if d < MAGNITUDE_THRESHOLDS[1]:
        return "small"
    if d < MAGNITUDE_THRESHOLDS[2]:
        return "medium"
    return "large"


def a12(a: Sequence[float], b: Sequence[float]) -> StatReport:
    """Vargha-Delaney effect size with Mann-Whitney p-value attached."""
    if not len(a) or not len(b):
        raise ArchsteerError("a12 requires non-empty samples")
    more = same = 0
    for x in a:
        for y in b:
            if x > y:
                more += 1
            elif x == y:
                same += 1
    value = (more + 0.5 * same) / (len(a) * len(b))
    return StatReport(
        p_value=mann_whitney_u(a, b), a12=value, magnitude=a12_magnitude(value)
    )


def _u_statistic(a: Sequence[float], b: Sequence[float]) -> tuple[float, bool]:
    """Return (U for sample a, ties-present) using midranks."""
    pooled = sorted((v, 0) for v in a) + sorted((v, 1) for v in b)
    pooled.sort(key=lambda t: t[0])
    n = len(pooled)
    ranks = [0.0] * n
    ties = False
    i = 0
    while i < n:
        j = i
        while j + 1 < n and pooled[j + 1][0] == pooled[i][0]:
            j += 1
        if j > i:
            ties = True
        midrank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[k] = midrank
        i = j + 1
    r_a = sum(rank for rank, (_, who) in zip(ranks, pooled) if who == 0)
    n_a, n_b = len(a), len(b)
    u_a = r_a - n_a * (n_a + 1) / 2.0
    return u_a, ties


def _exact_u_cdf(u: int, n: int, m: int) -> float:
    """P(U <= u) under H0, via the classic counting recurrence (no ties)."""

    # count[u] = number of arrangements of n 'a' among n+m with statistic u
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def count(nn: int, mm: int, uu: int) -> int:
        if uu < 0:
            return 0
        if nn == 0 or mm == 0:
            return 1 if uu >= 0 else 0
        # capped: total arrangements with U <= uu
        return count(nn - 1, mm, uu - mm) + count(nn, mm - 1, uu)

    total = math.comb(n + m, n)
    return count(n, m, u) / total


def mann_whitney_u(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided Mann-Whitney p-value.

    Exact distribution when min(|a|, |b|) <= 20 and there are no ties;
    otherwise the normal approximation with tie correction and continuity
    correction.
    """
    if not len(a) or not len(b):
        raise ArchsteerError("mann_whitney_u requires non-empty samples")
    n_a, n_b = len(a), len(b)
    u_a, ties = _u_statistic(a, b)
    u_b = n_a * n_b - u_a
    u_min = min(u_a, u_b)
    if not ties and min(n_a, n_b) <= 20:
        p = 2.0 * _exact_u_cdf(int(round(u_min)), n_a, n_b)
        return min(p, 1.0)
    mean = n_a * n_b / 2.0
    n = n_a + n_b
    pooled = sorted(list(a) + list(b))
    tie_term = 0.0
    i = 0
    while i < len(pooled):
        j = i
        while j + 1 < len(pooled) and pooled[j + 1] == pooled[i]:
            j += 1
        t = j - i + 1
        tie_term += t**3 - t
        i = j + 1
    var = n_a * n_b / 12.0 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return 1.0
    z = (abs(u_a - mean) - 0.5) / math.sqrt(var)
    z = max(z, 0.0)
    p = math.erfc(z / math.sqrt(2.0))
    return min(p, 1.0)
