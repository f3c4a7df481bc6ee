import random

import pytest

from archsteer.model import (
    ArchitectureModel,
    Component,
    Link,
    Operation,
    ProcNode,
    Scenario,
    Step,
    canonical,
    derive_demands,
    serialize,
    validate,
)
from archsteer.refactoring import (
    CostParams,
    PreconditionError,
    RefactoringSequence,
    apply_action,
    apply_sequence,
    architectural_weight,
    clon,
    mo2c,
    mo2n,
    random_feasible_action,
    rede,
    repair_sequence,
    sequence_cost,
)
from conftest import make_random_model


def two_component_model():
    return canonical(
        ArchitectureModel(
            name="two",
            components=(
                Component(id="c1", operations=(Operation("o1", 0.2), Operation("o2", 0.1))),
                Component(id="c2", operations=(Operation("o3", 0.3),)),
            ),
            nodes=(ProcNode(id="n1"), ProcNode(id="n2")),
            links=(Link(id="l1", endpoints=("n1", "n2"), failure_prob=0.01),),
            scenarios=(
                Scenario(
                    id="s",
                    prob=1.0,
                    population=2,
                    think_time=1.0,
                    steps=(Step("o1", 1.0), Step("o3", 1.0), Step("o2", 1.0)),
                ),
            ),
            deployment={"c1": "n1", "c2": "n2"},
        )
    )


def test_mo2c_transfers_ownership_and_demand():
    model = two_component_model()
    before = derive_demands(model)["s"]
    out = apply_action(model, mo2c("o1", "c2"))
    assert out.operation_owner["o1"] == "c2"
    assert "o1" in {o.id for o in out.component_by_id["c2"].operations}
    assert "o1" not in {o.id for o in out.component_by_id["c1"].operations}
    after = derive_demands(out)["s"]
    assert after["n2"] == pytest.approx(before["n2"] + 0.2)
    assert after["n1"] == pytest.approx(before["n1"] - 0.2)
    # steps untouched, in order
    assert [s.operation_ref for s in out.scenarios[0].steps] == ["o1", "o3", "o2"]


def test_clon_produces_replica_and_duplicated_links():
    model = two_component_model()
    out = apply_action(model, clon("n1"))
    assert "n1_r1" in out.node_by_id
    assert out.node_by_id["n1"].replica_group == out.node_by_id["n1_r1"].replica_group
    group = out.node_by_id["n1"].replica_group
    members = {n.id for n in out.nodes if n.replica_group == group}
    assert members == {"n1", "n1_r1"}
    dup = [l for l in out.links if set(l.endpoints) == {"n1_r1", "n2"}]
    assert len(dup) == 1
    assert dup[0].failure_prob == 0.01  # copied from the original link


def test_rede_links_new_host_to_all_neighbours():
    # host n1 linked to 3 other nodes
    model = canonical(
        ArchitectureModel(
            name="star",
            components=(
                Component(id="c1", operations=(Operation("o1", 0.2),)),
                Component(id="c2", operations=(Operation("o2", 0.1),)),
            ),
            nodes=(ProcNode(id="n1"), ProcNode(id="n2"), ProcNode(id="n3"), ProcNode(id="n4")),
            links=(
                Link(id="a", endpoints=("n1", "n2"), failure_prob=0.02),
                Link(id="b", endpoints=("n1", "n3"), failure_prob=0.04),
                Link(id="c", endpoints=("n3", "n4"), failure_prob=0.00),
            ),
            scenarios=(
                Scenario(id="s", prob=1.0, population=1, think_time=0.0,
                         steps=(Step("o1"), Step("o2"))),
            ),
            deployment={"c1": "n1", "c2": "n3"},
        )
    )
    # graph-enumeration oracle: neighbours of n1 before the move
    neighbours = {e for l in model.links for e in l.endpoints if "n1" in l.endpoints} - {"n1"}
    out = apply_action(model, rede("c1"))
    assert len(out.components) == len(model.components)
    new_host = out.deployment["c1"]
    assert new_host != "n1"
    new_neighbours = {
        e for l in out.links for e in l.endpoints if new_host in l.endpoints
    } - {new_host}
    assert new_neighbours == neighbours
    new_links = [l for l in out.links if new_host in l.endpoints]
    assert len(new_links) == 2
    # default psi = mean of existing link failure probabilities
    assert all(l.failure_prob == pytest.approx((0.02 + 0.04 + 0.0) / 3) for l in new_links)


def test_mo2n_moves_operation_to_fresh_component_and_node():
    model = two_component_model()
    out = apply_action(model, mo2n("o1"))
    owner = out.operation_owner["o1"]
    assert owner not in model.component_by_id
    new_node = out.deployment[owner]
    assert new_node not in model.node_by_id
    # linked back to the former host
    assert any(set(l.endpoints) == {new_node, "n1"} for l in out.links)
    # attribute inheritance from the source component
    assert out.component_by_id[owner].failure_prob == model.component_by_id["c1"].failure_prob


def test_apply_action_never_mutates_input():
    model = two_component_model()
    frozen = serialize(model)
    for action in (mo2c("o1", "c2"), clon("n1"), rede("c1"), mo2n("o3")):
        apply_action(model, action)
        assert serialize(model) == frozen


def test_precondition_errors_name_the_check():
    model = two_component_model()
    with pytest.raises(PreconditionError, match="ghost"):
        apply_action(model, rede("ghost"))
    with pytest.raises(PreconditionError, match="already owned"):
        apply_action(model, mo2c("o1", "c1"))


def test_apply_sequence_empty_is_identity():
    model = two_component_model()
    assert apply_sequence(model, RefactoringSequence()) == model


def test_apply_sequence_move_and_move_back():
    model = two_component_model()
    seq = RefactoringSequence((mo2c("o1", "c2"), mo2c("o1", "c1")))
    assert apply_sequence(model, seq) == model


def test_apply_sequence_deterministic():
    model = two_component_model()
    seq = RefactoringSequence((mo2n("o1"), clon("n1"), rede("c2")))
    assert serialize(apply_sequence(model, seq)) == serialize(apply_sequence(model, seq))


def test_apply_sequence_reports_position():
    model = two_component_model()
    seq = RefactoringSequence((mo2c("o1", "c2"), mo2c("o1", "c2")))
    with pytest.raises(PreconditionError, match="action 1"):
        apply_sequence(model, seq)


def test_generated_sequences_stay_feasible_stepwise():
    # oracle replays step-by-step checking validity of every intermediate model
    rng = random.Random(3)
    for _ in range(20):
        model = make_random_model(rng)
        seq = repair_sequence(model, (None,) * 4, 0, rng)
        current = model
        for pos, action in enumerate(seq.actions):
            from archsteer.refactoring import action_seed, check_action

            assert check_action(current, action) is None
            current = apply_action(current, action, action_seed(pos, action))
            assert validate(current) == []


def test_random_feasible_action_kinds_on_minimal_model():
    tiny = canonical(
        ArchitectureModel(
            name="tiny",
            components=(Component(id="c", operations=(Operation("o", 0.1),)),),
            nodes=(ProcNode(id="n"),),
            links=(),
            scenarios=(Scenario(id="s", prob=1.0, population=1, think_time=0.0,
                                steps=(Step("o"),)),),
            deployment={"c": "n"},
        )
    )
    kinds = {random_feasible_action(tiny, random.Random(i)).kind for i in range(200)}
    assert kinds == {"ReDe", "Clon", "MO2N"}  # MO2C needs a second component


def test_random_feasible_action_deterministic(ttbs):
    a = random_feasible_action(ttbs, random.Random(99))
    b = random_feasible_action(ttbs, random.Random(99))
    assert a == b


def test_random_feasible_action_covers_all_kinds(ttbs):
    rng = random.Random(5)
    kinds = {random_feasible_action(ttbs, rng).kind for _ in range(10_000)}
    assert kinds == {"ReDe", "MO2C", "Clon", "MO2N"}


def weight_model():
    return canonical(
        ArchitectureModel(
            name="w",
            components=(
                Component(id="c1", operations=(Operation("o1", 0.1), Operation("o2", 0.1))),
                Component(id="c2", operations=(Operation("o3", 0.1), Operation("lonely", 0.1))),
            ),
            nodes=(ProcNode(id="n1"), ProcNode(id="n2"), ProcNode(id="n3")),
            links=(
                Link(id="l1", endpoints=("n1", "n2")),
                Link(id="l2", endpoints=("n1", "n3")),
            ),
            scenarios=(
                Scenario(
                    id="s",
                    prob=1.0,
                    population=1,
                    think_time=0.0,
                    steps=(Step("o1"), Step("o2"), Step("o1"), Step("o3")),
                ),
            ),
            deployment={"c1": "n1", "c2": "n1"},
        )
    )


def test_architectural_weight_component():
    # 2 operations + 3 touching steps + 1 = 6
    assert architectural_weight(weight_model(), "c1") == 6.0


def test_architectural_weight_unused_operation():
    assert architectural_weight(weight_model(), "lonely") == 1.0


def test_architectural_weight_node():
    # 2 deployed components + 2 links + 1 = 5
    assert architectural_weight(weight_model(), "n1") == 5.0


def test_sequence_cost_empty():
    assert sequence_cost(two_component_model(), RefactoringSequence()) == 0.0


def test_sequence_cost_single_product():
    model = weight_model()
    params = CostParams(brf={"ReDe": 1.5, "Clon": 1.0, "MO2C": 1.0, "MO2N": 1.0})
    # ReDe on c2: AW(c2) = 1 + 2 ops + 1 step = 4 -> 1.5 * 4 = 6
    assert sequence_cost(model, RefactoringSequence((rede("c2"),)), params) == pytest.approx(6.0)


def test_sequence_cost_is_additive():
    model = two_component_model()
    params = CostParams()
    s1 = RefactoringSequence((mo2c("o1", "c2"),))
    s12 = RefactoringSequence((mo2c("o1", "c2"), clon("n2")))
    intermediate = apply_sequence(model, s1, params)
    from archsteer.refactoring import architectural_weight as aw

    second_cost = params.brf["Clon"] * aw(intermediate, "n2", params)
    assert sequence_cost(model, s12, params) == pytest.approx(
        sequence_cost(model, s1, params) + second_cost
    )


def test_aw_monotone_in_usage():
    model = weight_model()
    sc = model.scenarios[0]
    more_steps = sc.steps + (Step("o3"),)
    bigger = canonical(
        ArchitectureModel(
            name="w2",
            components=model.components,
            nodes=model.nodes,
            links=model.links,
            scenarios=(
                Scenario(id="s", prob=1.0, population=1, think_time=0.0, steps=more_steps),
            ),
            deployment=dict(model.deployment),
        )
    )
    assert architectural_weight(bigger, "o3") >= architectural_weight(model, "o3")
    assert architectural_weight(bigger, "c2") >= architectural_weight(model, "c2")


def test_outputs_always_validate():
    rng = random.Random(13)
    for _ in range(30):
        model = make_random_model(rng)
        action = random_feasible_action(model, rng)
        out = apply_action(model, action, rng.randrange(1 << 30))
        assert validate(out) == []
