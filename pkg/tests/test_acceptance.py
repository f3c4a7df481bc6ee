"""Acceptance suite: one test per release criterion, each printing a
[PASS]/[FAIL] line. Run with `pytest tests/test_acceptance.py -s`."""

import random
import time
from contextlib import contextmanager

import numpy as np
import pytest

from archsteer.evaluation import Evaluator, solve_mva, system_reliability
from archsteer.fixtures_io import load_fixture
from archsteer.indicators import (
    a12,
    a12_magnitude,
    coverage,
    entropy_tradeoff,
    epsilon,
    hypervolume,
    igd_plus,
    mann_whitney_u,
)
from archsteer.interaction import (
    cluster_front,
    standardized_objectives,
    _pairwise_distances,
)
from archsteer.optimizer import (
    SearchConfig,
    dominates,
    dominates_min,
    evolve_segment,
    fast_nondominated_sort_min,
    run_seed,
    segment_plan,
)
from archsteer.refactoring import RefactoringSequence
from conftest import make_random_model
from test_evaluation import reliability_oracle
from test_indicators import (
    coverage_oracle,
    epsilon_oracle,
    exact_p_by_enumeration,
    igd_plus_oracle,
)
from test_optimizer import brute_force_fronts


@contextmanager
def criterion(name: str):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name} ({time.monotonic() - started:.1f}s)")


def _vec(perfq, reliability, cost, pas):
    from archsteer.evaluation import ObjectiveVector

    return ObjectiveVector(perfq=perfq, reliability=reliability, cost=cost, pas=int(pas))


# ---------------------------------------------------------------------------


def test_indicator_oracle_suite():
    with criterion(
        "indicator oracles: HV within 0.5% of 1e6-sample Monte Carlo, "
        "IGD+/epsilon/coverage exact vs exhaustive loops, 200 fronts, <60s"
    ):
        started = time.monotonic()
        rng = np.random.default_rng(424242)
        pyrng = random.Random(424242)
        samples = {d: rng.random((1_000_000, d), dtype=np.float32) for d in (2, 3, 4)}
        for front_idx in range(200):
            d = pyrng.choice([2, 3, 4])
            n = pyrng.randint(1, 9)
            points = [
                tuple(pyrng.uniform(0.05, 0.95) for _ in range(d)) for _ in range(n)
            ]
            points.append(tuple(pyrng.uniform(0.05, 0.25) for _ in range(d)))
            points = [
                p
                for i, p in enumerate(points)
                if not any(dominates_min(q, p) for j, q in enumerate(points) if j != i)
            ]
            ref = (1.0,) * d
            hv = hypervolume(points, ref)
            sample = samples[d]
            covered = np.zeros(sample.shape[0], dtype=bool)
            for p in points:
                covered |= (sample >= np.asarray(p, dtype=np.float32)).all(axis=1)
            mc = covered.mean()
            assert abs(hv - mc) <= 0.005 * max(hv, mc), (hv, mc, points)

            reference = [
                tuple(pyrng.uniform(0.0, 1.0) for _ in range(d))
                for _ in range(pyrng.randint(1, 10))
            ]
            assert abs(igd_plus(points, reference) - igd_plus_oracle(points, reference)) <= 1e-12
            assert abs(epsilon(points, reference) - epsilon_oracle(points, reference)) <= 1e-12
            assert abs(coverage(points, reference) - coverage_oracle(points, reference)) <= 1e-12
        assert time.monotonic() - started < 60.0


def test_mva_correctness():
    with criterion(
        "MVA: single-station closed form R(N)=N*D within 1e-12 (N<=50); "
        "bottleneck/population bounds on 1000 random models, <10s"
    ):
        started = time.monotonic()
        rng = random.Random(7)
        for n in range(1, 51):
            d = rng.uniform(0.01, 2.0)
            perf = solve_mva({"k": d}, population=n, think_time=0.0)
            assert abs(perf.response_time - n * d) <= 1e-12 * max(1.0, n * d)
        for _ in range(1000):
            stations = {
                f"k{i}": rng.uniform(0.01, 1.5) for i in range(rng.randint(1, 8))
            }
            n = rng.randint(1, 40)
            z = rng.uniform(0.0, 5.0)
            perf = solve_mva(stations, population=n, think_time=z)
            assert perf.throughput <= 1.0 / max(stations.values()) + 1e-9
            assert perf.throughput <= n / (z + sum(stations.values())) + 1e-9
        assert time.monotonic() - started < 10.0


def test_reliability_formula():
    with criterion(
        "reliability: 100 random models match independent direct enumeration within 1e-12"
    ):
        rng = random.Random(99)
        for _ in range(100):
            model = make_random_model(rng)
            theta_s, rel = system_reliability(model)
            assert abs(theta_s - reliability_oracle(model)) <= 1e-12
            assert abs(rel - (1.0 - theta_s)) <= 1e-15


def test_nsga2_invariants():
    with criterion(
        "NSGA-II: final front mutually non-dominated, archive-front HV "
        "non-decreasing per generation, frozen prefix preserved, sort matches "
        "O(n^2) oracle on 100 random populations"
    ):
        evaluator = Evaluator(load_fixture("hotspot"))
        config = SearchConfig(
            iterations=20, chromosome_length=6, interactions=1,
            population_size=8, seed=3,
        )
        from archsteer.refactoring import clon

        prefix = RefactoringSequence((clon("n2"),), frozen_prefix_len=1)
        archive = evolve_segment(
            evaluator, prefix, config, 10, 5, random.Random(run_seed(3, "acc"))
        )
        front = archive.final_front
        for a in front:
            for b in front:
                if a is not b:
                    assert not dominates(a.objectives, b.objectives)
        trace = archive.front_hv_trace
        assert len(trace) == 11
        assert all(later >= earlier - 1e-9 for earlier, later in zip(trace, trace[1:]))
        for ind in archive.individuals.values():
            assert ind.sequence.actions[:1] == prefix.actions

        rng = random.Random(31)
        for _ in range(100):
            n = rng.randint(1, 64)
            d = rng.choice([2, 3, 4])
            pts = [tuple(rng.randint(0, 6) for _ in range(d)) for _ in range(n)]
            assert [sorted(f) for f in fast_nondominated_sort_min(pts)] == brute_force_fronts(pts)


def test_segment_arithmetic():
    with criterion(
        "segment arithmetic: (N=100,L=8,k=3) -> 4x(25,2); (N=100,L=4,k=1) -> 2x(50,2)"
    ):
        assert segment_plan(100, 8, 3) == [(25, 2)] * 4
        assert segment_plan(100, 4, 1) == [(50, 2)] * 2


def test_clustering_criteria():
    with criterion(
        "clustering: exact medoid optimality on every clustered front, "
        "silhouette in [-1,1], 1-D {0,1,10,11} splits into {0,1}/{10,11}"
    ):
        rng = random.Random(55)
        for trial in range(25):
            front = [
                _vec(rng.uniform(-1, 1), rng.uniform(0, 1), rng.uniform(0, 20),
                     rng.randint(0, 8))
                for _ in range(rng.randint(5, 30))
            ]
            result = cluster_front(front, rng=random.Random(trial))
            assert -1.0 <= result.silhouette <= 1.0
            pts = standardized_objectives(front)
            dist = _pairwise_distances(pts)
            for cid in range(result.k):
                members = [i for i, c in enumerate(result.assignments) if c == cid]
                medoid = result.medoid_indices[cid]
                assert medoid in members
                medoid_cost = dist[medoid, members].mean()
                for candidate in members:
                    assert medoid_cost <= dist[candidate, members].mean() + 1e-12

        values = [0.0, 1.0, 10.0, 11.0]
        front = [_vec(0.0, 0.5, v, 0) for v in values]
        result = cluster_front(front, k_range=(2, 2), rng=random.Random(0))
        groups = {}
        for idx, cid in enumerate(result.assignments):
            groups.setdefault(cid, set()).add(values[idx])
        assert set(map(frozenset, groups.values())) == {
            frozenset({0.0, 1.0}),
            frozenset({10.0, 11.0}),
        }


@pytest.fixture(scope="module")
def desk_report(tmp_path_factory):
    from archsteer.experiment import run_experiment_to_files

    out = tmp_path_factory.mktemp("desk")
    started = time.monotonic()
    report = run_experiment_to_files(
        load_fixture("hotspot"), str(out), scale="desk", master_seed=42,
        policy="best_perfq",
    )
    report["_runtime"] = time.monotonic() - started
    return report


def test_desk_scale_qualitative_replication(desk_report):
    with criterion(
        "desk-scale replication: median interactive NPS < median baseline NPS; "
        "baseline HV >= interactive HV in >=70% of seeds; "
        "tree coverage(baseline) > tree coverage(interactive) in median; <15min"
    ):
        q = desk_report["qualitative"]
        assert q["median_nps_interactive"] < q["median_nps_baseline"], q
        assert q["hv_baseline_ge_interactive_fraction"] >= 0.70, q
        assert (
            q["tree_coverage_median_baseline"] > q["tree_coverage_median_interactive"]
        ), q
        assert desk_report["_runtime"] < 15 * 60


def test_statistics_criteria():
    with criterion(
        "statistics: exact Mann-Whitney p matches full enumeration for sizes <=8; "
        "A12([1,2],[1,3]) = 0.375; magnitude thresholds 0.147/0.33/0.474"
    ):
        rng = random.Random(77)
        for _ in range(10):
            n = rng.randint(2, 8)
            m = rng.randint(2, 8)
            values = rng.sample(range(10_000), n + m)
            a = [float(v) for v in values[:n]]
            b = [float(v) for v in values[n:]]
            assert abs(mann_whitney_u(a, b) - min(1.0, exact_p_by_enumeration(a, b))) <= 1e-12
        assert mann_whitney_u([1, 2, 3], [4, 5, 6]) == pytest.approx(0.1, abs=1e-15)
        assert a12([1, 2], [1, 3]).a12 == pytest.approx(0.375, abs=1e-15)
        assert a12_magnitude(0.5) == "negligible"
        assert a12_magnitude(0.5 + 0.146999) == "negligible"
        assert a12_magnitude(0.5 + 0.147) == "small"
        assert a12_magnitude(0.5 + 0.33) == "medium"
        assert a12_magnitude(0.5 + 0.474) == "large"


def test_determinism_and_resume(tmp_path):
    with criterion(
        "determinism: `archsteer experiment --seed 42` twice is byte-identical; "
        "a resumed session loses only the in-flight node"
    ):
        import os

        from click.testing import CliRunner

        from archsteer.cli import main as cli_main

        fixture = os.path.join(
            os.path.dirname(__file__), "..", "src", "archsteer", "fixtures",
            "hotspot.arch",
        )
        runner = CliRunner()
        outputs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            result = runner.invoke(
                cli_main,
                ["experiment", "--model", fixture, "--scale", "smoke",
                 "--seed", "42", "--out", str(out), "--quiet"],
            )
            assert result.exit_code == 0, result.output
            outputs.append(out)
        for name in ("report.json", "report.csv", "fronts_reference.json",
                     "fronts_baseline.json", "fronts_interactive.json"):
            a = (outputs[0] / name).read_bytes()
            b = (outputs[1] / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"

        # crash-resume: abandon a store while a child node is in flight
        from fastapi.testclient import TestClient

        from archsteer.service import create_app

        data_dir = tmp_path / "sessions"
        app = create_app(data_dir=str(data_dir), workers=1)
        config = {"iterations": 4, "chromosome_length": 4, "interactions": 1,
                  "population_size": 8, "seed": 5}
        with TestClient(app) as client:
            session_id = client.post(
                "/sessions", json={"model_fixture": "hotspot", "config": config}
            ).json()["id"]
            deadline = time.monotonic() + 60
            while time.monotonic() < deadline:
                if client.get(
                    f"/sessions/{session_id}/nodes/root"
                ).json()["status"] == "done":
                    break
                time.sleep(0.05)
            client.post(f"/sessions/{session_id}/nodes/root/choose", json={"cluster": 0})
            # leave scope without waiting: simulates the process dying
        app2 = create_app(data_dir=str(data_dir), workers=1)
        with TestClient(app2) as client2:
            tree = client2.get(f"/sessions/{session_id}/tree").json()
            statuses = {n["id"]: n["status"] for n in tree["nodes"]}
            assert statuses["root"] == "done"  # finished work survives intact
            for node_id, status in statuses.items():
                assert status in ("done", "failed")
            root_view = client2.get(f"/sessions/{session_id}/nodes/root").json()
            assert root_view["nps"] >= 1
        app2.state.store.shutdown()


def test_entropy_endpoints():
    with criterion("entropy endpoints: single-bin 0, uniform-625 1, uniform-25 0.5 (1e-12)"):
        single = [_vec(0.1, 0.5, 2.0, 1)] * 16
        assert abs(entropy_tradeoff(single) - 0.0) <= 1e-12
        reps = [0.0, 0.25, 0.5, 0.75, 1.0]
        full = [
            _vec(reps[i], reps[j], reps[k], l)
            for i in range(5)
            for j in range(5)
            for k in range(5)
            for l in range(5)
        ]
        assert abs(entropy_tradeoff(full) - 1.0) <= 1e-12
        quarter = [_vec(reps[i], reps[j], reps[i], j) for i in range(5) for j in range(5)]
        assert abs(entropy_tradeoff(quarter) - 0.5) <= 1e-12
