"""Annotated architecture model: components, deployment, scenarios.

The model is the phenotype of a refactoring sequence. It is immutable after
construction; refactoring actions build new model values instead of mutating.
Collections are kept in canonical (id-sorted) order so that structurally
equal models compare equal regardless of construction history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterable, Mapping

FORMAT_VERSION = 1

# Caller of a scenario's first step; it is not a deployable node and
# traverses no links.
USER_NODE = "@user"


class ArchsteerError(Exception):
    """Base class for domain errors."""


class ModelParseError(ArchsteerError):
    def __init__(self, message: str, line: int | None = None, fieldpath: str | None = None):
        detail = message
        if line is not None:
            detail += f" (line {line})"
        if fieldpath is not None:
            detail += f" (field {fieldpath})"
        super().__init__(detail)
        self.line = line
        self.fieldpath = fieldpath


class ModelValidationError(ArchsteerError):
    def __init__(self, violations: list[str]):
        super().__init__("invalid model: " + "; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class Operation:
    """A component-owned operation with a CPU demand in seconds per call."""

    id: str
    demand: float


@dataclass(frozen=True)
class Component:
    id: str
    operations: tuple[Operation, ...]
    failure_prob: float = 0.0
    data_format: str = "default"


@dataclass(frozen=True)
class ProcNode:
    """Processing node; effective demand of hosted work is demand/speed_factor."""

    id: str
    speed_factor: float = 1.0
    replica_group: str | None = None


@dataclass(frozen=True)
class Link:
    id: str
    endpoints: tuple[str, str]
    failure_prob: float = 0.0


@dataclass(frozen=True)
class Step:
    """One invocation in a scenario; msg_size is the carried payload in KB."""

    operation_ref: str
    msg_size: float = 0.0


@dataclass(frozen=True)
class Scenario:
    id: str
    prob: float
    population: int
    think_time: float
    steps: tuple[Step, ...]


@dataclass(frozen=True)
class ArchitectureModel:
    name: str
    components: tuple[Component, ...]
    nodes: tuple[ProcNode, ...]
    links: tuple[Link, ...]
    scenarios: tuple[Scenario, ...]
    deployment: dict[str, str] = field(default_factory=dict)

    @cached_property
    def component_by_id(self) -> dict[str, Component]:
        return {c.id: c for c in self.components}

    @cached_property
    def node_by_id(self) -> dict[str, ProcNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def link_by_id(self) -> dict[str, Link]:
        return {l.id: l for l in self.links}

    @cached_property
    def operation_owner(self) -> dict[str, str]:
        """Map operation id -> owning component id (first owner wins)."""
        owner: dict[str, str] = {}
        for comp in self.components:
            for op in comp.operations:
                owner.setdefault(op.id, comp.id)
        return owner

    @cached_property
    def operation_by_id(self) -> dict[str, Operation]:
        ops: dict[str, Operation] = {}
        for comp in self.components:
            for op in comp.operations:
                ops.setdefault(op.id, op)
        return ops

    @cached_property
    def replica_groups(self) -> dict[str, tuple[str, ...]]:
        groups: dict[str, list[str]] = {}
        for node in self.nodes:
            if node.replica_group is not None:
                groups.setdefault(node.replica_group, []).append(node.id)
        return {g: tuple(members) for g, members in groups.items()}

    def node_of_component(self, component_id: str) -> str:
        return self.deployment[component_id]

    def node_of_operation(self, operation_id: str) -> str:
        return self.deployment[self.operation_owner[operation_id]]

    def links_of_node(self, node_id: str) -> tuple[Link, ...]:
        return tuple(l for l in self.links if node_id in l.endpoints)


def canonical(model: ArchitectureModel) -> ArchitectureModel:
    """Return the model with all id-keyed collections sorted by id."""
    comps = tuple(
        replace(c, operations=tuple(sorted(c.operations, key=lambda o: o.id)))
        for c in sorted(model.components, key=lambda c: c.id)
    )
    return ArchitectureModel(
        name=model.name,
        components=comps,
        nodes=tuple(sorted(model.nodes, key=lambda n: n.id)),
        links=tuple(sorted(model.links, key=lambda l: l.id)),
        scenarios=tuple(sorted(model.scenarios, key=lambda s: s.id)),
        deployment=dict(sorted(model.deployment.items())),
    )


PROB_SUM_TOL = 1e-9


def validate(model: ArchitectureModel) -> list[str]:
    """Return one description per violated invariant; [] iff the model is valid."""
    out: list[str] = []

    def dup_check(kind: str, ids: list[str]):
        seen = set()
        for i in ids:
            if i in seen:
                out.append(f"duplicate {kind} id '{i}'")
            seen.add(i)

    dup_check("component", [c.id for c in model.components])
    dup_check("node", [n.id for n in model.nodes])
    dup_check("link", [l.id for l in model.links])
    dup_check("scenario", [s.id for s in model.scenarios])

    op_owners: dict[str, list[str]] = {}
    for comp in model.components:
        for op in comp.operations:
            op_owners.setdefault(op.id, []).append(comp.id)
            if not op.demand > 0:
                out.append(f"operation '{op.id}' demand must be > 0, got {op.demand:g}")
        if not 0.0 <= comp.failure_prob <= 1.0:
            out.append(
                f"component '{comp.id}' failure probability {comp.failure_prob:g} outside [0, 1]"
            )
    for op_id, owners in op_owners.items():
        if len(owners) > 1:
            out.append(f"operation '{op_id}' owned by multiple components: {', '.join(owners)}")

    node_ids = {n.id for n in model.nodes}
    for node in model.nodes:
        if not node.speed_factor > 0:
            out.append(f"node '{node.id}' speed_factor must be > 0, got {node.speed_factor:g}")

    for link in model.links:
        a, b = link.endpoints
        if a == b:
            out.append(f"link '{link.id}' endpoints must be distinct, got '{a}' twice")
        for end in link.endpoints:
            if end not in node_ids:
                out.append(f"link '{link.id}' references missing node '{end}'")
        if not 0.0 <= link.failure_prob <= 1.0:
            out.append(
                f"link '{link.id}' failure probability {link.failure_prob:g} outside [0, 1]"
            )

    for comp in model.components:
        target = model.deployment.get(comp.id)
        if target is None:
            out.append(f"component '{comp.id}' is not deployed on any node")
        elif target not in node_ids:
            out.append(f"component '{comp.id}' deployed on missing node '{target}'")
    comp_ids = {c.id for c in model.components}
    for deployed in model.deployment:
        if deployed not in comp_ids:
            out.append(f"deployment references missing component '{deployed}'")

    if model.scenarios:
        psum = sum(s.prob for s in model.scenarios)
        if abs(psum - 1.0) > PROB_SUM_TOL:
            out.append(f"scenario probabilities sum to {psum:g}")
    for sc in model.scenarios:
        if not 0.0 <= sc.prob <= 1.0:
            out.append(f"scenario '{sc.id}' probability {sc.prob:g} outside [0, 1]")
        if sc.population < 1:
            out.append(f"scenario '{sc.id}' population must be >= 1, got {sc.population}")
        if sc.think_time < 0:
            out.append(f"scenario '{sc.id}' think_time must be >= 0, got {sc.think_time:g}")
        if not sc.steps:
            out.append(f"scenario '{sc.id}' has no steps")
        for idx, step in enumerate(sc.steps):
            if step.operation_ref not in model.operation_owner:
                out.append(
                    f"scenario '{sc.id}' step {idx} references missing operation "
                    f"'{step.operation_ref}'"
                )
            if step.msg_size < 0:
                out.append(f"scenario '{sc.id}' step {idx} msg_size must be >= 0")

    return out


def _require(obj: Mapping[str, Any], key: str, ctx: str) -> Any:
    if key not in obj:
        raise ModelParseError(f"missing required field '{key}'", fieldpath=ctx)
    return obj[key]


def _from_document(doc: Mapping[str, Any]) -> ArchitectureModel:
    if doc.get("format") != FORMAT_VERSION:
        raise ModelParseError(
            f"unsupported or missing format version {doc.get('format')!r}", fieldpath="format"
        )
    try:
        components = tuple(
            Component(
                id=_require(c, "id", "components[]"),
                operations=tuple(
                    Operation(id=_require(o, "id", "operations[]"), demand=float(o["demand"]))
                    for o in c.get("operations", [])
                ),
                failure_prob=float(c.get("failure_prob", 0.0)),
                data_format=str(c.get("data_format", "default")),
            )
            for c in _require(doc, "components", "$")
        )
        nodes = tuple(
            ProcNode(
                id=_require(n, "id", "nodes[]"),
                speed_factor=float(n.get("speed_factor", 1.0)),
                replica_group=n.get("replica_group"),
            )
            for n in _require(doc, "nodes", "$")
        )
        links = tuple(
            Link(
                id=_require(l, "id", "links[]"),
                endpoints=(str(l["endpoints"][0]), str(l["endpoints"][1])),
                failure_prob=float(l.get("failure_prob", 0.0)),
            )
            for l in doc.get("links", [])
        )
        scenarios = tuple(
            Scenario(
                id=_require(s, "id", "scenarios[]"),
                prob=float(_require(s, "prob", "scenarios[]")),
                population=int(s.get("population", 1)),
                think_time=float(s.get("think_time", 0.0)),
                steps=tuple(
                    Step(
                        operation_ref=str(_require(st, "operation_ref", "steps[]")),
                        msg_size=float(st.get("msg_size", 0.0)),
                    )
                    for st in _require(s, "steps", "scenarios[]")
                ),
            )
            for s in _require(doc, "scenarios", "$")
        )
        deployment = {str(k): str(v) for k, v in _require(doc, "deployment", "$").items()}
        name = str(doc.get("name", "unnamed"))
    except (TypeError, ValueError, KeyError, IndexError) as exc:
        raise ModelParseError(f"malformed model document: {exc}") from exc
    return canonical(
        ArchitectureModel(
            name=name,
            components=components,
            nodes=nodes,
            links=links,
            scenarios=scenarios,
            deployment=deployment,
        )
    )


def load_model(data: bytes | str) -> ArchitectureModel:
    """Parse and validate a serialized model document.

    Raises ModelParseError on malformed input (with line/field info) and
    ModelValidationError listing every violated invariant.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ModelParseError("top-level document must be an object")
    model = _from_document(doc)
    violations = validate(model)
    if violations:
        raise ModelValidationError(violations)
    return model


def load_model_file(path: str) -> ArchitectureModel:
    with open(path, "rb") as fh:
        return load_model(fh.read())


def to_document(model: ArchitectureModel) -> dict[str, Any]:
    model = canonical(model)
    return {
        "format": FORMAT_VERSION,
        "name": model.name,
        "components": [
            {
                "id": c.id,
                "operations": [{"id": o.id, "demand": o.demand} for o in c.operations],
                "failure_prob": c.failure_prob,
                "data_format": c.data_format,
            }
            for c in model.components
        ],
        "nodes": [
            {
                "id": n.id,
                "speed_factor": n.speed_factor,
                **({"replica_group": n.replica_group} if n.replica_group else {}),
            }
            for n in model.nodes
        ],
        "links": [
            {"id": l.id, "endpoints": list(l.endpoints), "failure_prob": l.failure_prob}
            for l in model.links
        ],
        "scenarios": [
            {
                "id": s.id,
                "prob": s.prob,
                "population": s.population,
                "think_time": s.think_time,
                "steps": [
                    {"operation_ref": st.operation_ref, "msg_size": st.msg_size}
                    for st in s.steps
                ],
            }
            for s in model.scenarios
        ],
        "deployment": dict(model.deployment),
    }


def serialize(model: ArchitectureModel) -> str:
    return json.dumps(to_document(model), indent=2, sort_keys=True)


def derive_demands(
    model: ArchitectureModel,
    replica_weights: Mapping[str, float] | None = None,
) -> dict[str, dict[str, float]]:
    """Per-scenario aggregated service demand per node.

    A step contributes demand/speed_factor to the node hosting its operation's
    component. Replica groups then split their aggregate demand across group
    members: evenly by default (uniform load balancing), or proportionally to
    `replica_weights` (node-id -> weight, missing nodes weigh 1).
    """
    demands: dict[str, dict[str, float]] = {}
    for sc in model.scenarios:
        per_node = {n.id: 0.0 for n in model.nodes}
        for step in sc.steps:
            node_id = model.node_of_operation(step.operation_ref)
            op = model.operation_by_id[step.operation_ref]
            per_node[node_id] += op.demand / model.node_by_id[node_id].speed_factor
        for members in model.replica_groups.values():
            total = sum(per_node[m] for m in members)
            if replica_weights is None:
                weights = {m: 1.0 for m in members}
            else:
                weights = {m: replica_weights.get(m, 1.0) for m in members}
            weight_sum = sum(weights.values())
            for m in members:
                per_node[m] = total * weights[m] / weight_sum
        demands[sc.id] = per_node
    return demands


def model_ids(model: ArchitectureModel) -> set[str]:
    """Every id in use (components, operations, nodes, links, scenarios)."""
    ids: set[str] = set()
    for c in model.components:
        ids.add(c.id)
        ids.update(o.id for o in c.operations)
    ids.update(n.id for n in model.nodes)
    ids.update(l.id for l in model.links)
    ids.update(s.id for s in model.scenarios)
    return ids


def iter_calls(model: ArchitectureModel, scenario: Scenario) -> Iterable[tuple[str, str, Step]]:
    """Yield (caller_node, callee_node, step) for every step of a scenario.

    The caller of step i is the component of step i-1; the first step is
    triggered by the user pseudo-node and traverses no links.
    """
    prev_node = USER_NODE
    for step in scenario.steps:
        callee = model.node_of_operation(step.operation_ref)
        yield prev_node, callee, step
        prev_node = callee
