import random

import pytest

from archsteer.fixtures_io import load_fixture
from archsteer.model import (
    ArchitectureModel,
    Component,
    Link,
    Operation,
    ProcNode,
    Scenario,
    Step,
    canonical,
)


@pytest.fixture(scope="session")
def ttbs():
    return load_fixture("ttbs")


@pytest.fixture(scope="session")
def cocome():
    return load_fixture("cocome")


@pytest.fixture(scope="session")
def hotspot():
    return load_fixture("hotspot")


@pytest.fixture(scope="session")
def blobby():
    return load_fixture("blobby")


def make_random_model(rng: random.Random, max_components: int = 4) -> ArchitectureModel:
    """Small random valid model for property and oracle tests."""
    n_comp = rng.randint(1, max_components)
    n_nodes = rng.randint(1, 3)
    nodes = tuple(
        ProcNode(id=f"n{i}", speed_factor=rng.choice([0.5, 1.0, 2.0])) for i in range(n_nodes)
    )
    components = []
    ops = []
    for c in range(n_comp):
        count = rng.randint(1, 3)
        comp_ops = tuple(
            Operation(id=f"op{c}_{k}", demand=rng.uniform(0.01, 0.5)) for k in range(count)
        )
        ops.extend(comp_ops)
        components.append(
            Component(
                id=f"c{c}",
                operations=comp_ops,
                failure_prob=rng.uniform(0.0, 0.05),
                data_format=rng.choice(["json", "xml"]),
            )
        )
    deployment = {c.id: rng.choice(nodes).id for c in components}
    links = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < 0.7:
                links.append(
                    Link(
                        id=f"l{i}_{j}",
                        endpoints=(f"n{i}", f"n{j}"),
                        failure_prob=rng.uniform(0.0, 0.02),
                    )
                )
    n_scen = rng.randint(1, 3)
    probs = [rng.uniform(0.1, 1.0) for _ in range(n_scen)]
    total = sum(probs)
    scenarios = []
    for s in range(n_scen):
        steps = tuple(
            Step(operation_ref=rng.choice(ops).id, msg_size=rng.uniform(0.0, 3.0))
            for _ in range(rng.randint(1, 6))
        )
        scenarios.append(
            Scenario(
                id=f"s{s}",
                prob=probs[s] / total,
                population=rng.randint(1, 8),
                think_time=rng.uniform(0.0, 4.0),
                steps=steps,
            )
        )
    return canonical(
        ArchitectureModel(
            name="random",
            components=tuple(components),
            nodes=nodes,
            links=tuple(links),
            scenarios=tuple(scenarios),
            deployment=deployment,
        )
    )
