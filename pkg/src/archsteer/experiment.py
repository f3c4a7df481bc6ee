"""Batch experiments: reference vs baseline vs scripted-interactive runs.

Each experiment arm executes a set of independent seeded runs; the reference
arm's merged front supplies the normalization bounds, the hypervolume
reference point (nadir), and the reference sequence tree. Reports are fully
deterministic for a given master seed: no timestamps, sorted keys, stable
float formatting.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import statistics
from dataclasses import dataclass, field

from .evaluation import Evaluator
from .indicators import (
    a12,
    build_sequence_tree,
    coverage,
    entropy_tradeoff,
    epsilon,
    hypervolume,
    igd_plus,
    nadir,
    normalize_front,
    reference_bounds,
    tree_coverage,
)
from .interaction import cluster_front
from .model import ArchitectureModel, ArchsteerError
from .optimizer import (
    Individual,
    SearchConfig,
    evolve_segment,
    nondominated_subset,
    run_seed,
    segment_plan,
)
from .refactoring import RefactoringSequence

INDICATOR_NAMES = ("hv", "igd_plus", "epsilon", "nps")

CSV_HEADER = (
    "experiment,nps,hv,igd_plus,epsilon,coverage_ab,coverage_ba,entropy,"
    "p_value,a12,magnitude"
)


@dataclass(frozen=True)
class ScalePreset:
    name: str
    iterations: int
    chromosome_length: int
    population_size: int
    runs: int
    reference_iterations: int
    interactions: int = 1
    note: str = ""


SCALES = {
    "paper": ScalePreset(
        name="paper",
        iterations=100,
        chromosome_length=4,
        population_size=16,
        runs=31,
        reference_iterations=1000,
        note="full-size configuration (expect a long runtime)",
    ),
    "desk": ScalePreset(
        name="desk",
        iterations=60,
        chromosome_length=6,
        population_size=8,
        runs=10,
        reference_iterations=300,
        note="paper numbers shrunk proportionally for desk-scale runs "
        "(iterations x0.6, population x0.5, runs x0.32, reference x0.3)",
    ),
    "smoke": ScalePreset(
        name="smoke",
        iterations=8,
        chromosome_length=2,
        population_size=4,
        runs=2,
        reference_iterations=16,
        note="minutes-scale determinism/plumbing checks only",
    ),
}

CENTROID_POLICIES = (
    "best_perfq",
    "best_reliability",
    "lowest_cost",
    "largest_cluster",
    "random",
)


def pick_centroid(clusters, front: list[Individual], policy: str, rng: random.Random) -> int:
    medoids = [front[m] for m in clusters.medoid_indices]
    if policy == "best_perfq":
        return max(range(len(medoids)), key=lambda i: medoids[i].objectives.perfq)
    if policy == "best_reliability":
        return max(range(len(medoids)), key=lambda i: medoids[i].objectives.reliability)
    if policy == "lowest_cost":
        return min(range(len(medoids)), key=lambda i: medoids[i].objectives.cost)
    if policy == "largest_cluster":
        sizes = [sum(1 for a in clusters.assignments if a == cid)
                 for cid in range(clusters.k)]
        return max(range(len(medoids)), key=lambda i: sizes[i])
    if policy == "random":
        return rng.randrange(len(medoids))
    raise ArchsteerError(f"unknown centroid policy '{policy}'")


@dataclass
class RunResult:
    seed: int
    front: list[Individual]
    # full-length chromosomes evaluated by this run (the final segment's
    # archive); short lead-segment chromosomes are excluded from trees
    evaluated: list[Individual]
    evaluations: int


@dataclass
class ExperimentResult:
    name: str
    runs: list[RunResult] = field(default_factory=list)
    # shared lead segments of an interactive arm (run once, then frozen)
    lead_prefix: tuple = ()

    def merged_front(self) -> list[Individual]:
        return nondominated_subset([ind for run in self.runs for ind in run.front])

    def all_evaluated(self) -> list[Individual]:
        unique: dict[tuple, Individual] = {}
        for run in self.runs:
            for ind in run.evaluated:
                unique.setdefault(ind.key, ind)
        return list(unique.values())


def _run_baseline(
    evaluator: Evaluator, config: SearchConfig, iterations: int, seed: int
) -> RunResult:
    rng = random.Random(seed)
    archive = evolve_segment(
        evaluator,
        RefactoringSequence(),
        config,
        iterations,
        config.chromosome_length,
        rng,
    )
    return RunResult(
        seed=seed,
        front=archive.final_front,
        evaluated=list(archive.individuals.values()),
        evaluations=len(archive.individuals),
    )


def _interactive_prefix(
    evaluator: Evaluator,
    config: SearchConfig,
    master_seed: int,
    policy: str,
    log=None,
) -> RefactoringSequence:
    """Run the lead segments once, choosing one centroid per interaction.

    Every seeded run of the arm then starts from the same frozen prefix, the
    way a designer's choice fixes the restart point for subsequent searches.
    """
    plan = segment_plan(config.iterations, config.chromosome_length, config.interactions)
    prefix = RefactoringSequence()
    for depth, (iters, genes) in enumerate(plan[:-1]):
        if log is not None:
            log(f"interactive lead segment {depth + 1}/{len(plan) - 1}")
        rng = random.Random(run_seed(master_seed, "interactive-lead", depth))
        archive = evolve_segment(evaluator, prefix, config, iters, genes, rng)
        clusters = cluster_front(
            [ind.objectives for ind in archive.final_front],
            k_range=(2, 8),
            rng=random.Random(run_seed(master_seed, "interactive-cluster", depth)),
        )
        choice = pick_centroid(
            clusters, archive.final_front, policy,
            random.Random(run_seed(master_seed, "interactive-pick", depth)),
        )
        medoid = archive.final_front[clusters.medoid_indices[choice]]
        prefix = RefactoringSequence(
            medoid.sequence.actions, frozen_prefix_len=len(medoid.sequence.actions)
        )
    return prefix


def _run_interactive(
    evaluator: Evaluator,
    config: SearchConfig,
    prefix: RefactoringSequence,
    seed: int,
) -> RunResult:
    """One seeded run of the final segment from the shared frozen prefix."""
    plan = segment_plan(config.iterations, config.chromosome_length, config.interactions)
    iters, genes = plan[-1]
    archive = evolve_segment(evaluator, prefix, config, iters, genes, random.Random(seed))
    return RunResult(
        seed=seed,
        front=archive.final_front,
        evaluated=list(archive.individuals.values()),
        evaluations=len(archive.individuals),
    )


def resolve_preset(scale: str, config_doc: dict | None) -> ScalePreset:
    """Scale preset, optionally overridden by a version-keyed run-config doc."""
    if scale not in SCALES:
        raise ArchsteerError(f"unknown scale '{scale}' (have: {', '.join(sorted(SCALES))})")
    preset = SCALES[scale]
    if config_doc is None:
        return preset
    from .optimizer import search_config_from_document

    overrides = dict(config_doc)
    reference_iterations = overrides.pop("reference_iterations", None)
    cfg = search_config_from_document(
        {
            "format": overrides.pop("format", None),
            "iterations": preset.iterations,
            "chromosome_length": preset.chromosome_length,
            "interactions": preset.interactions,
            "population_size": preset.population_size,
            "independent_runs": preset.runs,
            **overrides,
        }
    )
    return ScalePreset(
        name=f"{preset.name} (run-config overrides)",
        iterations=cfg.iterations,
        chromosome_length=cfg.chromosome_length,
        population_size=cfg.population_size,
        runs=cfg.independent_runs,
        reference_iterations=reference_iterations or preset.reference_iterations,
        interactions=cfg.interactions,
        note=preset.note,
    )


def run_experiment(
    model: ArchitectureModel,
    scale: str = "desk",
    master_seed: int = 42,
    policy: str = "best_perfq",
    log=None,
    config_doc: dict | None = None,
    thresholds: dict | None = None,
    trace_path: str | None = None,
) -> tuple[dict, dict[str, ExperimentResult]]:
    """Run the three experiment arms and assemble the analysis report."""
    preset = resolve_preset(scale, config_doc)
    if policy not in CENTROID_POLICIES:
        raise ArchsteerError(
            f"unknown centroid policy '{policy}' (have: {', '.join(CENTROID_POLICIES)})"
        )
    experiments: dict[str, ExperimentResult] = {}
    report = _run_and_collect(
        model, preset, master_seed, policy, experiments, log, thresholds, trace_path
    )
    return report, experiments


def _min_points(individuals: list[Individual]) -> list[tuple[float, ...]]:
    return [ind.objectives.to_min() for ind in individuals]


def build_report(
    model: ArchitectureModel,
    experiments: dict[str, ExperimentResult],
    preset: ScalePreset,
    master_seed: int,
    policy: str,
) -> dict:
    reference_front = _min_points(experiments["reference"].merged_front())
    bounds = reference_bounds(reference_front)
    ref_norm = normalize_front(reference_front, bounds)
    ref_point = nadir(ref_norm)
    reference_tree = build_sequence_tree(
        [ind.sequence.actions for ind in experiments["reference"].all_evaluated()], model
    )

    per_experiment: dict[str, dict] = {}
    for name, result in sorted(experiments.items()):
        rows: dict[str, list[float]] = {k: [] for k in INDICATOR_NAMES}
        tree_cov: list[float] = []
        for run in result.runs:
            front_norm = normalize_front(_min_points(run.front), bounds)
            rows["hv"].append(hypervolume(front_norm, ref_point))
            rows["igd_plus"].append(igd_plus(front_norm, ref_norm))
            rows["epsilon"].append(epsilon(front_norm, ref_norm))
            rows["nps"].append(float(len(run.front)))
            run_tree = build_sequence_tree(
                [ind.sequence.actions for ind in run.evaluated], model
            )
            tree_cov.append(tree_coverage(run_tree, reference_tree))
        merged = result.merged_front()
        per_experiment[name] = {
            "runs": len(result.runs),
            "per_run": rows,
            "tree_coverage_per_run": tree_cov,
            "medians": {k: statistics.median(v) for k, v in rows.items()},
            "tree_coverage_median": statistics.median(tree_cov),
            "nps_merged": len(merged),
            "entropy": entropy_tradeoff([ind.objectives for ind in result.all_evaluated()]),
            "evaluations": sum(run.evaluations for run in result.runs),
        }

    baseline_merged = _min_points(experiments["baseline"].merged_front())
    comparisons = []
    for name in sorted(experiments):
        if name == "baseline":
            continue
        merged = _min_points(experiments[name].merged_front())
        stats = {}
        for indicator in INDICATOR_NAMES:
            sample_a = per_experiment[name]["per_run"][indicator]
            sample_b = per_experiment["baseline"]["per_run"][indicator]
            report = a12(sample_a, sample_b)
            stats[indicator] = {
                "p_value": report.p_value,
                "a12": report.a12,
                "magnitude": report.magnitude,
            }
        comparisons.append(
            {
                "experiment": name,
                "against": "baseline",
                "coverage_ab": coverage(merged, baseline_merged),
                "coverage_ba": coverage(baseline_merged, merged),
                "stats": stats,
            }
        )

    base = per_experiment["baseline"]
    inter = per_experiment["interactive"]
    hv_pairs = list(zip(base["per_run"]["hv"], inter["per_run"]["hv"]))
    qualitative = {
        "median_nps_baseline": base["medians"]["nps"],
        "median_nps_interactive": inter["medians"]["nps"],
        "nps_reduced_by_interaction": inter["medians"]["nps"] < base["medians"]["nps"],
        "hv_baseline_ge_interactive_fraction": sum(
            1 for b, i in hv_pairs if b >= i
        ) / len(hv_pairs),
        "tree_coverage_median_baseline": base["tree_coverage_median"],
        "tree_coverage_median_interactive": inter["tree_coverage_median"],
        "tree_coverage_asymmetry": base["tree_coverage_median"]
        > inter["tree_coverage_median"],
    }

    return {
        "format": 1,
        "model": model.name,
        "master_seed": master_seed,
        "centroid_policy": policy,
        "interactive_prefix": [list(k) for k in experiments["interactive"].lead_prefix],
        "entropy_definition": "normalized-shannon-5x5x5x5",
        "scale": {
            "name": preset.name,
            "iterations": preset.iterations,
            "chromosome_length": preset.chromosome_length,
            "population_size": preset.population_size,
            "independent_runs": preset.runs,
            "reference_iterations": preset.reference_iterations,
            "interactions": preset.interactions,
            "note": preset.note,
        },
        "reference_point": list(ref_point),
        "experiments": per_experiment,
        "comparisons": comparisons,
        "qualitative": qualitative,
    }


def fronts_document(result: ExperimentResult) -> dict:
    return {
        "format": 1,
        "experiment": result.name,
        "objective_order": ["perfq", "reliability", "cost", "pas"],
        "runs": [
            {
                "seed": run.seed,
                "front": sorted(list(ind.objectives.as_tuple()) for ind in run.front),
                "evaluations": run.evaluations,
            }
            for run in result.runs
        ],
    }


def report_csv(report: dict) -> str:
    """Column-stable CSV: one row per experiment, stats taken against the
    baseline's hypervolume distribution."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    comparisons = {c["experiment"]: c for c in report["comparisons"]}
    for name in sorted(report["experiments"]):
        exp = report["experiments"][name]
        comp = comparisons.get(name)
        writer.writerow(
            [
                name,
                exp["nps_merged"],
                _fmt(exp["medians"]["hv"]),
                _fmt(exp["medians"]["igd_plus"]),
                _fmt(exp["medians"]["epsilon"]),
                _fmt(comp["coverage_ab"]) if comp else "",
                _fmt(comp["coverage_ba"]) if comp else "",
                _fmt(exp["entropy"]),
                _fmt(comp["stats"]["hv"]["p_value"]) if comp else "",
                _fmt(comp["stats"]["hv"]["a12"]) if comp else "",
                comp["stats"]["hv"]["magnitude"] if comp else "",
            ]
        )
    return buf.getvalue()


def _fmt(value: float) -> str:
    return repr(float(value))


def write_report_files(report: dict, experiments: dict[str, ExperimentResult], out_dir: str):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w", encoding="utf-8") as fh:
        fh.write(report_csv(report))
    for name, result in sorted(experiments.items()):
        with open(os.path.join(out_dir, f"fronts_{name}.json"), "w", encoding="utf-8") as fh:
            json.dump(fronts_document(result), fh, indent=2, sort_keys=True)
            fh.write("\n")


def run_experiment_to_files(
    model: ArchitectureModel,
    out_dir: str,
    scale: str = "desk",
    master_seed: int = 42,
    policy: str = "best_perfq",
    log=None,
    config_doc: dict | None = None,
    thresholds: dict | None = None,
    trace_path: str | None = None,
) -> dict:
    """Run the arms, write report.json / report.csv / fronts_*.json.

    On failure a partial-report marker is left in the output directory."""
    os.makedirs(out_dir, exist_ok=True)
    marker = os.path.join(out_dir, "PARTIAL")
    try:
        report, experiments = run_experiment(
            model, scale, master_seed, policy, log,
            config_doc=config_doc, thresholds=thresholds, trace_path=trace_path,
        )
        write_report_files(report, experiments, out_dir)
        if os.path.exists(marker):
            os.unlink(marker)
        return report
    except Exception as exc:
        with open(marker, "w", encoding="utf-8") as fh:
            fh.write(f"experiment failed: {exc}\n")
        raise


def _run_and_collect(
    model, preset, master_seed, policy, experiments_out, log,
    thresholds=None, trace_path=None,
) -> dict:
    evaluator = Evaluator(model, thresholds=thresholds, trace_path=trace_path)

    def say(msg):
        if log is not None:
            log(msg)

    base_cfg = SearchConfig(
        iterations=preset.iterations,
        chromosome_length=preset.chromosome_length,
        interactions=0,
        population_size=preset.population_size,
        seed=master_seed,
        independent_runs=preset.runs,
    ).check()
    inter_cfg = SearchConfig(
        iterations=preset.iterations,
        chromosome_length=preset.chromosome_length,
        interactions=preset.interactions,
        population_size=preset.population_size,
        seed=master_seed,
        independent_runs=preset.runs,
    ).check()

    shared_prefix = _interactive_prefix(evaluator, inter_cfg, master_seed, policy, say)

    for name, runner in (
        ("reference", lambda r: _run_baseline(
            evaluator, base_cfg, preset.reference_iterations,
            run_seed(master_seed, "reference", r))),
        ("baseline", lambda r: _run_baseline(
            evaluator, base_cfg, preset.iterations, run_seed(master_seed, "baseline", r))),
        ("interactive", lambda r: _run_interactive(
            evaluator, inter_cfg, shared_prefix, run_seed(master_seed, "interactive", r))),
    ):
        result = ExperimentResult(name)
        if name == "interactive":
            result.lead_prefix = tuple(a.key for a in shared_prefix.actions)
        for r in range(preset.runs):
            say(f"{name} run {r + 1}/{preset.runs}")
            result.runs.append(runner(r))
        experiments_out[name] = result

    return build_report(model, experiments_out, preset, master_seed, policy)


# ---------------------------------------------------------------------------
# Standalone analysis of saved fronts documents


def analyze_fronts(front_docs: list[dict], reference_doc: dict) -> dict:
    """Indicator/statistics report for saved fronts; the first document is
    the comparator for coverage and statistical tests."""
    if not front_docs:
        raise ArchsteerError("no fronts documents given")

    def doc_runs(doc) -> list[list[tuple[float, ...]]]:
        # raw objective rows -> minimization space
        return [
            [(-p, -r, c, float(pas)) for p, r, c, pas in run["front"]]
            for run in doc["runs"]
        ]

    reference_runs = doc_runs(reference_doc)
    ref_merged = _merge_min([pt for run in reference_runs for pt in run])
    bounds = reference_bounds(ref_merged)
    ref_norm = normalize_front(ref_merged, bounds)
    ref_point = nadir(ref_norm)

    per_experiment = {}
    merged_by_name = {}
    for doc in front_docs:
        name = doc["experiment"]
        rows = {k: [] for k in INDICATOR_NAMES}
        for run_front in doc_runs(doc):
            norm = normalize_front(run_front, bounds)
            rows["hv"].append(hypervolume(norm, ref_point))
            rows["igd_plus"].append(igd_plus(norm, ref_norm))
            rows["epsilon"].append(epsilon(norm, ref_norm))
            rows["nps"].append(float(len(run_front)))
        merged_by_name[name] = _merge_min([pt for rf in doc_runs(doc) for pt in rf])
        from .evaluation import ObjectiveVector

        solutions = [
            ObjectiveVector(perfq=p, reliability=r, cost=c, pas=int(pas))
            for run in doc["runs"]
            for p, r, c, pas in run["front"]
        ]
        per_experiment[name] = {
            "per_run": rows,
            "medians": {k: statistics.median(v) for k, v in rows.items()},
            "nps_merged": len(merged_by_name[name]),
            "entropy": entropy_tradeoff(solutions),
        }

    comparator = front_docs[0]["experiment"]
    comparisons = []
    for doc in front_docs[1:]:
        name = doc["experiment"]
        stats = {}
        for indicator in INDICATOR_NAMES:
            report = a12(
                per_experiment[name]["per_run"][indicator],
                per_experiment[comparator]["per_run"][indicator],
            )
            stats[indicator] = {
                "p_value": report.p_value,
                "a12": report.a12,
                "magnitude": report.magnitude,
            }
        comparisons.append(
            {
                "experiment": name,
                "against": comparator,
                "coverage_ab": coverage(merged_by_name[name], merged_by_name[comparator]),
                "coverage_ba": coverage(merged_by_name[comparator], merged_by_name[name]),
                "stats": stats,
            }
        )
    return {
        "format": 1,
        "entropy_definition": "normalized-shannon-5x5x5x5",
        "comparator": comparator,
        "reference_point": list(ref_point),
        "experiments": per_experiment,
        "comparisons": comparisons,
    }


def _merge_min(points: list[tuple[float, ...]]) -> list[tuple[float, ...]]:
    from .optimizer import dominates_min

    unique = list(dict.fromkeys(points))
    return [
        p
        for i, p in enumerate(unique)
        if not any(dominates_min(q, p) for j, q in enumerate(unique) if j != i)
    ]
