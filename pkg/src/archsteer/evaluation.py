"""Objective evaluation: queueing performance, reliability, cost, antipatterns.

Performance comes from an exact single-class mean value analysis over the
deployment nodes, one closed workload per scenario solved independently.
Reliability follows the closed-form system failure probability combining
per-component failure probabilities (exponent: invocation counts) and
per-link failure probabilities (exponent: message volume in KB).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from .model import ArchitectureModel, ArchsteerError, derive_demands, iter_calls
from .refactoring import CostParams, RefactoringSequence

# Sentinel objectives assigned to unfeasible individuals during search.
SENTINEL_COST = 1_000_000.0
SENTINEL_PAS = 1000

U_CLAMP = 1.0 - 1e-9


class DegenerateModelError(ArchsteerError):
    """The queueing model has no service demand anywhere."""


@dataclass(frozen=True)
class ScenarioPerf:
    response_time: float
    throughput: float
    utilization: dict[str, float]
    demands: dict[str, float]

    @property
    def bottleneck_bound(self) -> float:
        dmax = max(self.demands.values(), default=0.0)
        return math.inf if dmax == 0 else 1.0 / dmax


@dataclass(frozen=True)
class PerfIndices:
    """Per-scenario response time/throughput plus mixed per-node utilization."""

    scenarios: dict[str, ScenarioPerf]
    utilization: dict[str, float]

    def index_terms(self) -> dict[str, tuple[str, float]]:
        """Flat map index-name -> (direction, value); R minimized, X maximized."""
        out: dict[str, tuple[str, float]] = {}
        for sid, perf in self.scenarios.items():
            out[f"R:{sid}"] = ("min", perf.response_time)
            out[f"X:{sid}"] = ("max", perf.throughput)
        return out


@dataclass(frozen=True)
class ObjectiveVector:
    """The four objectives with fixed senses (max, max, min, min)."""

    perfq: float
    reliability: float
    cost: float
    pas: int

    SENSES = ("max", "max", "min", "min")

    def as_tuple(self) -> tuple[float, float, float, int]:
        return (self.perfq, self.reliability, self.cost, self.pas)

    def to_min(self) -> tuple[float, float, float, float]:
        """Minimization-space image (maximized coordinates negated)."""
        return (-self.perfq, -self.reliability, self.cost, float(self.pas))


WORST_OBJECTIVES = ObjectiveVector(
    perfq=-1.0, reliability=0.0, cost=SENTINEL_COST, pas=SENTINEL_PAS
)


@dataclass(frozen=True)
class AntipatternOccurrence:
    name: str
    culprits: tuple[str, ...]
    values: dict[str, float]


@dataclass(frozen=True)
class AntipatternReport:
    occurrences: tuple[AntipatternOccurrence, ...]

    @property
    def count(self) -> int:
        return len(self.occurrences)

    def names(self) -> list[str]:
        return [o.name for o in self.occurrences]


def solve_mva(demands: dict[str, float], population: int, think_time: float) -> ScenarioPerf:
    """Exact MVA for one closed class.

    Recursion over n = 1..N:
        R_k(n) = D_k * (1 + Q_k(n-1));  R(n) = sum_k R_k(n)
        X(n)   = n / (Z + R(n));        Q_k(n) = X(n) * R_k(n)
    """
    stations = [(k, d) for k, d in demands.items() if d > 0.0]
    if not stations:
        raise DegenerateModelError("all service demands are zero")
    q = [0.0] * len(stations)
    x = 0.0
    r_total = 0.0
    for n in range(1, population + 1):
        r_k = [d * (1.0 + q[i]) for i, (_, d) in enumerate(stations)]
        r_total = sum(r_k)
        x = n / (think_time + r_total)
        q = [x * r for r in r_k]
    util = {k: 0.0 for k in demands}
    for i, (k, d) in enumerate(stations):
        util[k] = min(x * d, U_CLAMP)
    perf = ScenarioPerf(
        response_time=r_total, throughput=x, utilization=util, demands=dict(demands)
    )
    _assert_mva_sanity(demands, population, think_time, perf)
    return perf


def _assert_mva_sanity(
    demands: dict[str, float], population: int, think_time: float, perf: ScenarioPerf
):
    d_max = max(demands.values())
    d_sum = sum(demands.values())
    tol = 1e-9
    if perf.throughput > 1.0 / d_max + tol:
        raise ArchsteerError("MVA bottleneck bound violated")
    if perf.throughput > population / (think_time + d_sum) + tol:
        raise ArchsteerError("MVA population bound violated")


def solve_model_perf(model: ArchitectureModel) -> PerfIndices:
    """Solve every scenario independently; node utilization is the
    scenario-probability-weighted mix of the per-class utilizations."""
    demands = derive_demands(model)
    per_scenario: dict[str, ScenarioPerf] = {}
    mixed = {n.id: 0.0 for n in model.nodes}
    for sc in model.scenarios:
        perf = solve_mva(demands[sc.id], sc.population, sc.think_time)
        per_scenario[sc.id] = perf
        for node_id, u in perf.utilization.items():
            mixed[node_id] = mixed.get(node_id, 0.0) + sc.prob * u
    mixed = {k: min(v, U_CLAMP) for k, v in mixed.items()}
    return PerfIndices(scenarios=per_scenario, utilization=mixed)


def perf_q(initial: PerfIndices, refactored: PerfIndices) -> float:
    """Mean of per-index terms p * (F - I) / (F + I) with p = -1 for response
    times and p = +1 for throughputs; F refactored, I initial."""
    init_terms = initial.index_terms()
    ref_terms = refactored.index_terms()
    if set(init_terms) != set(ref_terms):
        raise ArchsteerError(
            f"mismatched performance index sets: {sorted(init_terms)} vs {sorted(ref_terms)}"
        )
    total = 0.0
    for name, (sense, i_val) in init_terms.items():
        f_val = ref_terms[name][1]
        if f_val + i_val <= 0:
            raise ArchsteerError(f"index {name}: F + I must be positive")
        p = 1.0 if sense == "max" else -1.0
        total += p * (f_val - i_val) / (f_val + i_val)
    return total / len(init_terms)


def system_reliability(model: ArchitectureModel) -> tuple[float, float]:
    """Return (failure probability, reliability = 1 - failure probability).

    Per scenario, components contribute (1-theta_i)^InvNr and links
    contribute (1-psi_l)^MsgSize, where MsgSize totals the KB carried by
    steps whose caller and callee nodes are the link's endpoints.
    """
    survival_sum = 0.0
    for sc in model.scenarios:
        inv: dict[str, int] = {}
        msg: dict[str, float] = {}
        for caller_node, callee_node, step in iter_calls(model, sc):
            comp_id = model.operation_owner[step.operation_ref]
            inv[comp_id] = inv.get(comp_id, 0) + 1
            if caller_node != callee_node:
                for link in model.links:
                    if set(link.endpoints) == {caller_node, callee_node}:
                        msg[link.id] = msg.get(link.id, 0.0) + step.msg_size
        survival = 1.0
        for comp_id, count in inv.items():
            survival *= (1.0 - model.component_by_id[comp_id].failure_prob) ** count
        for link_id, size in msg.items():
            survival *= (1.0 - model.link_by_id[link_id].failure_prob) ** size
        survival_sum += sc.prob * survival
    theta_s = 1.0 - survival_sum
    theta_s = min(max(theta_s, 0.0), 1.0)
    return theta_s, 1.0 - theta_s


DEFAULT_DETECTOR_THRESHOLDS = {
    "blob_work_share": 0.5,
    "pipe_filter_step_share": 0.6,
    "pipe_filter_throughput_ratio": 0.9,
    "cps_utilization_gap": 0.6,
    "cps_utilization_max": 0.7,
    "extensive_processing_share": 0.5,
    "est_min_messages": 8,
    "est_max_mean_size_kb": 1.0,
    "tower_of_babel_min_crossings": 2,
}


def detect_antipatterns(
    model: ArchitectureModel,
    indices: PerfIndices,
    thresholds: dict | None = None,
) -> AntipatternReport:
    """Run the six threshold detectors; each fires independently per culprit."""
    th = dict(DEFAULT_DETECTOR_THRESHOLDS)
    if thresholds:
        th.update(thresholds)
    found: list[AntipatternOccurrence] = []

    steps = [(sc, step) for sc in model.scenarios for step in sc.steps]
    total_demand = sum(model.operation_by_id[s.operation_ref].demand for _, s in steps)

    # Blob: one component performs the dominant share of all work.
    if total_demand > 0:
        for comp in model.components:
            owned = {o.id for o in comp.operations}
            share = (
                sum(
                    model.operation_by_id[s.operation_ref].demand
                    for _, s in steps
                    if s.operation_ref in owned
                )
                / total_demand
            )
            if share >= th["blob_work_share"]:
                found.append(
                    AntipatternOccurrence("Blob", (comp.id,), {"work_share": share})
                )

    # Pipe and Filter: a single slow step dominates a scenario whose
    # throughput sits well under its bottleneck bound.
    for sc in model.scenarios:
        sc_demand = sum(model.operation_by_id[s.operation_ref].demand for s in sc.steps)
        if sc_demand <= 0:
            continue
        perf = indices.scenarios[sc.id]
        bound = perf.bottleneck_bound
        for idx, step in enumerate(sc.steps):
            share = model.operation_by_id[step.operation_ref].demand / sc_demand
            if share >= th["pipe_filter_step_share"] and perf.throughput < (
                th["pipe_filter_throughput_ratio"] * bound
            ):
                found.append(
                    AntipatternOccurrence(
                        "Pipe and Filter",
                        (sc.id, step.operation_ref),
                        {"step_share": share, "throughput": perf.throughput, "bound": bound},
                    )
                )
                break  # one occurrence per scenario

    # Concurrent Processing System: load cannot use the available processors.
    if model.nodes:
        utils = indices.utilization
        u_max = max(utils.values())
        u_min = min(utils.values())
        if (u_max - u_min) >= th["cps_utilization_gap"] and u_max >= th["cps_utilization_max"]:
            hot = max(utils, key=utils.get)
            cold = min(utils, key=utils.get)
            found.append(
                AntipatternOccurrence(
                    "Concurrent Processing System",
                    (hot, cold),
                    {"u_max": u_max, "u_min": u_min},
                )
            )

    # Extensive Processing: consecutive heavy work on one component.
    if total_demand > 0:
        seen_pairs: set[tuple[str, str]] = set()
        for sc in model.scenarios:
            for a, b in zip(sc.steps, sc.steps[1:]):
                ca = model.operation_owner[a.operation_ref]
                cb = model.operation_owner[b.operation_ref]
                if ca != cb or (sc.id, ca) in seen_pairs:
                    continue
                combined = (
                    model.operation_by_id[a.operation_ref].demand
                    + model.operation_by_id[b.operation_ref].demand
                ) / total_demand
                if combined >= th["extensive_processing_share"]:
                    seen_pairs.add((sc.id, ca))
                    found.append(
                        AntipatternOccurrence(
                            "Extensive Processing", (sc.id, ca), {"combined_share": combined}
                        )
                    )

    # Empty Semi-Truck: many small inter-node messages in one scenario.
    for sc in model.scenarios:
        sizes = [
            step.msg_size
            for caller, callee, step in iter_calls(model, sc)
            if caller != callee and caller != "@user"
        ]
        if len(sizes) >= th["est_min_messages"]:
            mean_size = sum(sizes) / len(sizes)
            if mean_size <= th["est_max_mean_size_kb"]:
                found.append(
                    AntipatternOccurrence(
                        "Empty Semi-Truck",
                        (sc.id,),
                        {"messages": float(len(sizes)), "mean_size_kb": mean_size},
                    )
                )

    # Tower of Babel: repeated format conversions across node boundaries.
    for sc in model.scenarios:
        crossings = 0
        prev_comp: str | None = None
        for caller, callee, step in iter_calls(model, sc):
            comp_id = model.operation_owner[step.operation_ref]
            if prev_comp is not None and caller != callee:
                fmt_a = model.component_by_id[prev_comp].data_format
                fmt_b = model.component_by_id[comp_id].data_format
                if fmt_a != fmt_b:
                    crossings += 1
            prev_comp = comp_id
        if crossings >= th["tower_of_babel_min_crossings"]:
            found.append(
                AntipatternOccurrence(
                    "The Tower of Babel", (sc.id,), {"format_crossings": float(crossings)}
                )
            )

    return AntipatternReport(tuple(found))


@dataclass
class Evaluator:
    """Turns refactoring sequences into objective vectors, with memoization.

    The cache key is the chromosome (ordered action records); evaluation is
    pure, so concurrent lookups/inserts are safe under the internal lock.
    With `trace_path` set, every fresh evaluation appends one JSON line
    {chromosome, objectives, feasible} for debugging.
    """

    initial: ArchitectureModel
    cost_params: CostParams = field(default_factory=CostParams)
    thresholds: dict | None = None
    trace_path: str | None = None
    initial_indices: PerfIndices = None  # type: ignore[assignment]
    _cache: dict = field(default_factory=dict, repr=False)
    _prefix_cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.initial_indices is None:
            self.initial_indices = solve_model_perf(self.initial)

    def evaluations(self) -> int:
        return len(self._cache)

    def _trace(self, seq: RefactoringSequence, objectives: ObjectiveVector, feasible: bool):
        if self.trace_path is None:
            return
        import json

        record = {
            "chromosome": [list(a.key) for a in seq.actions],
            "objectives": {
                "perfq": objectives.perfq,
                "reliability": objectives.reliability,
                "cost": objectives.cost,
                "pas": objectives.pas,
            },
            "feasible": feasible,
        }
        with self._lock:
            with open(self.trace_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _walk(
        self, base: ArchitectureModel, seq: RefactoringSequence, start: int, stop: int
    ) -> tuple[ArchitectureModel, float]:
        """Apply actions [start, stop) from `base`, accumulating their cost.

        Positions are absolute within the chromosome so generated ids match
        what apply_sequence would produce for the full sequence.
        """
        from .refactoring import (
            PreconditionError,
            action_element,
            action_seed,
            apply_action,
            architectural_weight,
            check_action,
        )

        current, cost = base, 0.0
        for position in range(start, stop):
            action = seq.actions[position]
            problem = check_action(current, action)
            if problem is not None:
                raise PreconditionError(f"action {position}: {problem}")
            cost += self.cost_params.brf[action.kind] * architectural_weight(
                current, action_element(action), self.cost_params
            )
            current = apply_action(current, action, action_seed(position, action), self.cost_params)
        return current, cost

    def _apply_and_cost(self, seq: RefactoringSequence) -> tuple[ArchitectureModel, float]:
        prefix_len = seq.frozen_prefix_len
        prefix_key = tuple(a.key for a in seq.actions[:prefix_len])
        with self._lock:
            cached = self._prefix_cache.get(prefix_key)
        if cached is None:
            cached = self._walk(self.initial, seq, 0, prefix_len)
            with self._lock:
                self._prefix_cache[prefix_key] = cached
        base, base_cost = cached
        refactored, suffix_cost = self._walk(base, seq, prefix_len, len(seq.actions))
        return refactored, base_cost + suffix_cost

    def evaluate(
        self, seq: RefactoringSequence, on_infeasible: str = "raise"
    ) -> tuple[ObjectiveVector, AntipatternReport, PerfIndices]:
        key = seq.key
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        try:
            refactored, cost = self._apply_and_cost(seq)
            indices = solve_model_perf(refactored)
            perfq = perf_q(self.initial_indices, indices)
            _, reliability = system_reliability(refactored)
            report = detect_antipatterns(refactored, indices, self.thresholds)
            objectives = ObjectiveVector(
                perfq=perfq, reliability=reliability, cost=cost, pas=report.count
            )
            result = (objectives, report, indices)
            self._trace(seq, objectives, feasible=True)
        except ArchsteerError:
            if on_infeasible != "sentinel":
                raise
            result = (
                WORST_OBJECTIVES,
                AntipatternReport(()),
                self.initial_indices,
            )
            self._trace(seq, WORST_OBJECTIVES, feasible=False)
        with self._lock:
            self._cache.setdefault(key, result)
        return result
