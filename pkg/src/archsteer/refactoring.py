"""Refactoring actions over architecture models.

Four action kinds are supported:

* ``ReDe``  — redeploy a component on a fresh node, wired to every node the
  old host was directly linked to.
* ``MO2C``  — move an operation to an existing component.
* ``Clon``  — clone a node (links duplicated, load split via replica group).
* ``MO2N``  — move an operation to a fresh component on a fresh node linked
  to the operation's former host.

Actions are pure: they return a new model value and never touch the input.
New-element ids derive deterministically from (base id, position, seed) so
identical chromosomes always produce identical phenotypes.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace

from .model import (
    ArchitectureModel,
    ArchsteerError,
    Component,
    Link,
    ProcNode,
    canonical,
    validate,
)

KINDS = ("ReDe", "MO2C", "Clon", "MO2N")

DEFAULT_BRF = {"ReDe": 1.2, "Clon": 1.0, "MO2C": 1.5, "MO2N": 2.0}

RESAMPLE_TRIES = 100


class PreconditionError(ArchsteerError):
    """A refactoring action's precondition does not hold."""


class ExhaustionError(ArchsteerError):
    """No feasible action exists for the given model."""


def stable_hash(*parts) -> int:
    digest = hashlib.sha256(repr(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _token(seed: int) -> str:
    return f"{seed % 16**6:06x}"


@dataclass(frozen=True)
class RefactoringAction:
    kind: str
    params: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown action kind '{self.kind}'")

    @property
    def key(self) -> tuple:
        return (self.kind,) + tuple(self.params)

    def describe(self) -> str:
        return f"{self.kind}({', '.join(self.params)})"


def rede(component_id: str) -> RefactoringAction:
    return RefactoringAction("ReDe", (component_id,))


def mo2c(operation_id: str, target_component_id: str) -> RefactoringAction:
    return RefactoringAction("MO2C", (operation_id, target_component_id))


def clon(node_id: str) -> RefactoringAction:
    return RefactoringAction("Clon", (node_id,))


def mo2n(operation_id: str) -> RefactoringAction:
    return RefactoringAction("MO2N", (operation_id,))


@dataclass(frozen=True)
class RefactoringSequence:
    actions: tuple[RefactoringAction, ...] = ()
    frozen_prefix_len: int = 0

    def __post_init__(self):
        if not 0 <= self.frozen_prefix_len <= len(self.actions):
            raise ValueError(
                f"frozen prefix {self.frozen_prefix_len} outside [0, {len(self.actions)}]"
            )

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def key(self) -> tuple:
        return tuple(a.key for a in self.actions)

    @property
    def suffix(self) -> tuple[RefactoringAction, ...]:
        return self.actions[self.frozen_prefix_len:]


@dataclass(frozen=True)
class CostParams:
    brf: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BRF))
    aw_weights: dict[str, float] = field(
        default_factory=lambda: {"component": 1.0, "operation": 1.0, "node": 1.0}
    )
    # Reliability assigned to links created by ReDe/MO2N; None = mean of
    # the model's existing link failure probabilities (0 if there are none).
    new_link_failure_prob: float | None = None

    def __post_init__(self):
        for kind, value in self.brf.items():
            if not value > 0:
                raise ValueError(f"BRF for {kind} must be > 0, got {value:g}")


def _default_psi(model: ArchitectureModel, params: CostParams | None) -> float:
    if params is not None and params.new_link_failure_prob is not None:
        return params.new_link_failure_prob
    if not model.links:
        return 0.0
    return sum(l.failure_prob for l in model.links) / len(model.links)


def _fresh_id(base: str, taken: set[str], seed: int) -> str:
    attempt = seed
    while True:
        candidate = f"{base}_{_token(attempt)}"
        if candidate not in taken:
            return candidate
        attempt += 1


def _fresh_replica_id(base: str, taken: set[str]) -> str:
    i = 1
    while f"{base}_r{i}" in taken:
        i += 1
    return f"{base}_r{i}"


def check_action(model: ArchitectureModel, action: RefactoringAction) -> str | None:
    """Return a violated-precondition description, or None if applicable."""
    kind, params = action.kind, action.params
    if kind == "ReDe":
        (comp_id,) = params
        if comp_id not in model.component_by_id:
            return f"ReDe: component '{comp_id}' does not exist"
    elif kind == "MO2C":
        op_id, target_id = params
        owner = model.operation_owner.get(op_id)
        if owner is None:
            return f"MO2C: operation '{op_id}' does not exist"
        if target_id not in model.component_by_id:
            return f"MO2C: target component '{target_id}' does not exist"
        if target_id == owner:
            return f"MO2C: operation '{op_id}' already owned by '{target_id}'"
    elif kind == "Clon":
        (node_id,) = params
        if node_id not in model.node_by_id:
            return f"Clon: node '{node_id}' does not exist"
    elif kind == "MO2N":
        (op_id,) = params
        if op_id not in model.operation_owner:
            return f"MO2N: operation '{op_id}' does not exist"
    return None


def is_feasible(model: ArchitectureModel, action: RefactoringAction) -> bool:
    return check_action(model, action) is None


def _move_operation(model: ArchitectureModel, op_id: str, target_id: str) -> tuple:
    """Detach op from its owner and return (components-with-op-moved, op)."""
    owner_id = model.operation_owner[op_id]
    op = model.operation_by_id[op_id]
    comps = []
    for comp in model.components:
        if comp.id == owner_id:
            comps.append(
                replace(comp, operations=tuple(o for o in comp.operations if o.id != op_id))
            )
        elif comp.id == target_id:
            comps.append(replace(comp, operations=comp.operations + (op,)))
        else:
            comps.append(comp)
    return tuple(comps), op


def apply_action(
    model: ArchitectureModel,
    action: RefactoringAction,
    id_seed: int = 0,
    params: CostParams | None = None,
) -> ArchitectureModel:
    """Apply a single action, returning a new validated model value."""
    problem = check_action(model, action)
    if problem is not None:
        raise PreconditionError(problem)

    from .model import model_ids  # local import to avoid cycle at module load

    taken = model_ids(model)
    kind = action.kind

    if kind == "ReDe":
        (comp_id,) = action.params
        old_host_id = model.deployment[comp_id]
        old_host = model.node_by_id[old_host_id]
        new_node_id = _fresh_id(f"{comp_id}_host", taken, stable_hash("ReDe", comp_id, id_seed))
        new_node = ProcNode(id=new_node_id, speed_factor=old_host.speed_factor)
        psi = _default_psi(model, params)
        new_links = []
        taken.add(new_node_id)
        for link in model.links_of_node(old_host_id):
            other = link.endpoints[0] if link.endpoints[1] == old_host_id else link.endpoints[1]
            link_id = _fresh_id(f"{new_node_id}_{other}", taken, stable_hash("link", link.id, id_seed))
            taken.add(link_id)
            new_links.append(Link(id=link_id, endpoints=(new_node_id, other), failure_prob=psi))
        deployment = dict(model.deployment)
        deployment[comp_id] = new_node_id
        result = replace(
            model,
            nodes=model.nodes + (new_node,),
            links=model.links + tuple(new_links),
            deployment=deployment,
        )

    elif kind == "MO2C":
        op_id, target_id = action.params
        comps, _ = _move_operation(model, op_id, target_id)
        result = replace(model, components=comps)

    elif kind == "Clon":
        (node_id,) = action.params
        original = model.node_by_id[node_id]
        clone_id = _fresh_replica_id(node_id, taken)
        taken.add(clone_id)
        group = original.replica_group or node_id
        nodes = [
            replace(node, replica_group=group) if node.id == node_id else node
            for node in model.nodes
        ]
        nodes.append(ProcNode(id=clone_id, speed_factor=original.speed_factor, replica_group=group))
        new_links = []
        for link in model.links_of_node(node_id):
            other = link.endpoints[0] if link.endpoints[1] == node_id else link.endpoints[1]
            link_id = _fresh_id(f"{clone_id}_{other}", taken, stable_hash("clonlink", link.id, id_seed))
            taken.add(link_id)
            new_links.append(
                Link(id=link_id, endpoints=(clone_id, other), failure_prob=link.failure_prob)
            )
        result = replace(model, nodes=tuple(nodes), links=model.links + tuple(new_links))

    else:  # MO2N
        (op_id,) = action.params
        former_host = model.node_of_operation(op_id)
        source = model.component_by_id[model.operation_owner[op_id]]
        new_comp_id = _fresh_id(f"{op_id}_comp", taken, stable_hash("MO2N-c", op_id, id_seed))
        taken.add(new_comp_id)
        new_node_id = _fresh_id(f"{op_id}_node", taken, stable_hash("MO2N-n", op_id, id_seed))
        taken.add(new_node_id)
        comps, op = _move_operation(model, op_id, new_comp_id)
        new_comp = Component(
            id=new_comp_id,
            operations=(op,),
            failure_prob=source.failure_prob,
            data_format=source.data_format,
        )
        new_node = ProcNode(
            id=new_node_id, speed_factor=model.node_by_id[former_host].speed_factor
        )
        link_id = _fresh_id(
            f"{new_node_id}_{former_host}", taken, stable_hash("MO2N-l", op_id, id_seed)
        )
        new_link = Link(
            id=link_id,
            endpoints=(new_node_id, former_host),
            failure_prob=_default_psi(model, params),
        )
        deployment = dict(model.deployment)
        deployment[new_comp_id] = new_node_id
        result = replace(
            model,
            components=comps + (new_comp,),
            nodes=model.nodes + (new_node,),
            links=model.links + (new_link,),
            deployment=deployment,
        )

    result = canonical(result)
    violations = validate(result)
    if violations:  # pragma: no cover - guards against action bugs
        raise ArchsteerError(f"action {action.describe()} broke the model: {violations}")
    return result


def action_seed(position: int, action: RefactoringAction) -> int:
    return stable_hash(position, action.key)


def apply_sequence(
    model: ArchitectureModel,
    seq: RefactoringSequence,
    params: CostParams | None = None,
) -> ArchitectureModel:
    """Left-fold of apply_action with per-position deterministic id seeds."""
    current = model
    for position, action in enumerate(seq.actions):
        problem = check_action(current, action)
        if problem is not None:
            raise PreconditionError(f"action {position}: {problem}")
        current = apply_action(current, action, action_seed(position, action), params)
    return current


def _feasible_kinds(model: ArchitectureModel) -> list[str]:
    kinds = []
    has_ops = bool(model.operation_owner)
    if model.components:
        kinds.append("ReDe")
    if has_ops and len(model.components) >= 2:
        kinds.append("MO2C")
    if model.nodes:
        kinds.append("Clon")
    if has_ops:
        kinds.append("MO2N")
    return kinds


def random_feasible_action(model: ArchitectureModel, rng: random.Random) -> RefactoringAction:
    """Draw an action uniformly over feasible kinds, then uniform parameters."""
    kinds = _feasible_kinds(model)
    if not kinds:
        raise ExhaustionError("no feasible refactoring action for this model")
    kind = rng.choice(kinds)
    if kind == "ReDe":
        return rede(rng.choice([c.id for c in model.components]))
    if kind == "Clon":
        return clon(rng.choice([n.id for n in model.nodes]))
    ops = sorted(model.operation_owner)
    if kind == "MO2N":
        return mo2n(rng.choice(ops))
    # MO2C: any operation, any component other than the owner
    for _ in range(RESAMPLE_TRIES):
        op_id = rng.choice(ops)
        owner = model.operation_owner[op_id]
        targets = [c.id for c in model.components if c.id != owner]
        if targets:
            return mo2c(op_id, rng.choice(targets))
    raise ExhaustionError("could not parameterize MO2C")  # pragma: no cover


def architectural_weight(
    model: ArchitectureModel, element_id: str, params: CostParams | None = None
) -> float:
    """Effort weight of a model element, scaled by the per-type coefficient.

    component: 1 + #operations + #scenario steps touching it
    operation: 1 + #scenario steps invoking it
    node:      1 + #deployed components + #links
    """
    weights = params.aw_weights if params is not None else {}
    steps = [step for sc in model.scenarios for step in sc.steps]
    if element_id in model.component_by_id:
        comp = model.component_by_id[element_id]
        owned = {o.id for o in comp.operations}
        touching = sum(1 for s in steps if s.operation_ref in owned)
        return weights.get("component", 1.0) * (1 + len(comp.operations) + touching)
    if element_id in model.operation_by_id:
        invoking = sum(1 for s in steps if s.operation_ref == element_id)
        return weights.get("operation", 1.0) * (1 + invoking)
    if element_id in model.node_by_id:
        deployed = sum(1 for target in model.deployment.values() if target == element_id)
        n_links = len(model.links_of_node(element_id))
        return weights.get("node", 1.0) * (1 + deployed + n_links)
    raise ArchsteerError(f"unknown element id '{element_id}'")


def action_element(action: RefactoringAction) -> str:
    """The model element whose weight prices this action.

    ReDe: the redeployed component; Clon: the cloned node;
    MO2C / MO2N: the moved operation.
    """
    return action.params[0]


def sequence_cost(
    model: ArchitectureModel,
    seq: RefactoringSequence,
    params: CostParams | None = None,
) -> float:
    """Total effort: sum of BRF(kind) x AW(element) against intermediate models."""
    params = params or CostParams()
    total = 0.0
    current = model
    for position, action in enumerate(seq.actions):
        problem = check_action(current, action)
        if problem is not None:
            raise PreconditionError(f"action {position}: {problem}")
        total += params.brf[action.kind] * architectural_weight(
            current, action_element(action), params
        )
        current = apply_action(current, action, action_seed(position, action), params)
    return total


def repair_sequence(
    initial: ArchitectureModel,
    actions: tuple[RefactoringAction | None, ...],
    frozen_prefix_len: int,
    rng: random.Random,
    params: CostParams | None = None,
) -> RefactoringSequence:
    """Resample infeasible (or None) genes left-to-right until feasible.

    Gene positions are absolute: id seeds derive from the position within the
    whole chromosome, so the repaired sequence evaluates to the same phenotype
    as apply_sequence would produce. Genes in the frozen prefix are assumed
    feasible (they came from a feasible sequence over the same initial model).
    """
    repaired: list[RefactoringAction] = []
    current = initial
    for position, action in enumerate(actions):
        if action is None or check_action(current, action) is not None:
            if position < frozen_prefix_len:  # pragma: no cover - contract guard
                raise PreconditionError(f"frozen gene {position} infeasible")
            action = random_feasible_action(current, rng)
        repaired.append(action)
        current = apply_action(current, action, action_seed(position, action), params)
    return RefactoringSequence(tuple(repaired), frozen_prefix_len)


def random_sequence(
    initial: ArchitectureModel,
    prefix: tuple[RefactoringAction, ...],
    suffix_len: int,
    rng: random.Random,
    params: CostParams | None = None,
) -> RefactoringSequence:
    """Prefix plus `suffix_len` freshly sampled feasible genes."""
    holes: tuple[RefactoringAction | None, ...] = prefix + (None,) * suffix_len
    return repair_sequence(initial, holes, len(prefix), rng, params)
