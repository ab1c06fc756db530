"""Bond-graph descriptions and their reduction to linear-graph netlists.

Junction roles depend on the domain view. In an Eulerian domain the
0-junctions conserve flow = through, so they are the continuity nodes; the
1-junctions share one flow and are series chains between nodes. In a
Lagrangian domain the roles swap: 1-junctions are the nodes, 0-junctions
the series chains. A one-port bonded straight to a node-junction spans that
node and the domain ground (the absolute reference every bond graph keeps
implicit); a one-port on a series junction occupies one slot of the chain
between the junction's two endpoint nodes.

Element kinds map per view: in an Eulerian domain effort sources become
across sources and capacitors A-type storage; in a Lagrangian domain effort
sources become through sources, capacitors T-type storage, and inductors
A-type storage. Two-ports map by comparing side views: a gyrator spanning
one Eulerian and one Lagrangian domain degenerates to a plain transformer
in across/through coordinates (the motor case), and a transformer spanning
mixed views becomes a gyrator. Coupling constants convert to the canonical
linear form y_a = p * y_b (transformer) or y_a = p * U_b, y_b = p * U_a
(gyrator) with p = parameter when side a is Eulerian, 1/parameter when
Lagrangian.

Bond-graph parameters are the bond-native constants: effort per flow for R,
flow storage per effort rate for C (compliance 1/k for a spring), effort
per flow rate for I (mass for a mass).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .domains import Domain, View, domain_view, parse_domain
from .errors import UnknownDomainError, UnsupportedJunctionTopologyError
from .model import (
    Element,
    Kind,
    Node,
    SampledSeries,
    Step,
    SystemModel,
    _signal_from_json,
)

EFFORT_SOURCE = "effort_source"
FLOW_SOURCE = "flow_source"
RESISTOR = "resistor"
CAPACITOR = "capacitor"
INDUCTOR = "inductor"
TRANSFORMER = "transformer"
GYRATOR = "gyrator"

ONE_PORT_KINDS = (EFFORT_SOURCE, FLOW_SOURCE, RESISTOR, CAPACITOR, INDUCTOR)
TWO_PORT_KINDS = (TRANSFORMER, GYRATOR)

_ONE_PORT_MAP = {
    View.EULERIAN: {
        EFFORT_SOURCE: Kind.ACROSS_SOURCE,
        FLOW_SOURCE: Kind.THROUGH_SOURCE,
        RESISTOR: Kind.D_TYPE,
        CAPACITOR: Kind.A_TYPE,
        INDUCTOR: Kind.T_TYPE,
    },
    View.LAGRANGIAN: {
        EFFORT_SOURCE: Kind.THROUGH_SOURCE,
        FLOW_SOURCE: Kind.ACROSS_SOURCE,
        RESISTOR: Kind.D_TYPE,
        CAPACITOR: Kind.T_TYPE,
        INDUCTOR: Kind.A_TYPE,
    },
}


@dataclass(frozen=True)
class BondGraphElement:
    id: str
    kind: str
    parameter: float = 0.0
    signal: Step | SampledSeries | None = None
    domains: tuple[Domain | None, ...] = (None,)

    @property
    def sides(self) -> tuple[str, ...]:
        if self.kind in TWO_PORT_KINDS:
            return (f"{self.id}.a", f"{self.id}.b")
        return (self.id,)


@dataclass(frozen=True)
class BondGraphJunction:
    id: str
    kind: int  # 0 or 1
    domain: Domain
    is_ground: bool = False
    node: str = ""  # emitted node id; defaults to the junction id
    internal_nodes: tuple[str, ...] = ()

    @property
    def node_id(self) -> str:
        return self.node or self.id

    def is_node_junction(self) -> bool:
        view = domain_view(self.domain)
        return (self.kind == 0) == (view is View.EULERIAN)


@dataclass(frozen=True)
class BondGraphModel:
    name: str
    elements: tuple[BondGraphElement, ...]
    junctions: tuple[BondGraphJunction, ...]
    bonds: tuple[tuple[str, str], ...]


def bondgraph_from_dict(doc: dict) -> BondGraphModel:
    elements = []
    for ej in doc.get("elements", []):
        kind = ej["kind"]
        if kind not in ONE_PORT_KINDS + TWO_PORT_KINDS:
            raise UnknownDomainError(
                f"bond-graph element {ej.get('id')}: unknown kind {kind!r}"
            )
        if kind in TWO_PORT_KINDS:
            raw = ej.get("domains", [None, None])
            domains = tuple(parse_domain(d) if d else None for d in raw)
        else:
            d = ej.get("domain")
            domains = (parse_domain(d) if d else None,)
        signal = None
        if kind in (EFFORT_SOURCE, FLOW_SOURCE):
            signal = _signal_from_json(ej.get("signal"))
        elements.append(
            BondGraphElement(
                id=ej["id"],
                kind=kind,
                parameter=float(ej.get("parameter", 0.0)),
                signal=signal,
                domains=domains,
            )
        )
    junctions = tuple(
        BondGraphJunction(
            id=jj["id"],
            kind=int(jj["kind"]),
            domain=parse_domain(jj["domain"]),
            is_ground=bool(jj.get("ground", False)),
            node=jj.get("node", ""),
            internal_nodes=tuple(jj.get("internal_nodes", [])),
        )
        for jj in doc.get("junctions", [])
    )
    bonds = tuple((str(a), str(b)) for a, b in doc.get("bonds", []))
    return BondGraphModel(doc.get("name", "bondgraph"), elements, junctions, bonds)


def load_bondgraph(path) -> BondGraphModel:
    with open(path, "r", encoding="utf-8") as fh:
        return bondgraph_from_dict(json.load(fh))


def bondgraph_to_lineargraph(bg: BondGraphModel) -> SystemModel:
    junction_by_id = {j.id: j for j in bg.junctions}
    side_owner = {}
    for e in bg.elements:
        for s in e.sides:
            side_owner[s] = e

    # each element side must sit on exactly one junction
    attach: dict[str, str] = {}
    junction_bonds: dict[str, list[str]] = {j.id: [] for j in bg.junctions}
    for a, b in bg.bonds:
        ends = {a, b}
        js = [x for x in ends if x in junction_by_id]
        es = [x for x in ends if x in side_owner]
        if len(js) + len(es) != 2:
            raise UnsupportedJunctionTopologyError(
                f"bond ({a}, {b}) must connect declared junctions/elements"
            )
        if len(js) == 2:
            junction_bonds[a].append(b)
            junction_bonds[b].append(a)
            continue
        if len(es) == 2:
            raise UnsupportedJunctionTopologyError(
                f"bond ({a}, {b}) connects two elements; simplify via a junction"
            )
        side, junc = es[0], js[0]
        if side in attach:
            raise UnsupportedJunctionTopologyError(
                f"element port {side} attaches to more than one junction"
            )
        attach[side] = junc
        junction_bonds[junc].append(side)
    missing = [s for s in side_owner if s not in attach]
    if missing:
        raise UnsupportedJunctionTopologyError(
            "element ports without a junction: " + ", ".join(sorted(missing))
        )

    def side_domain(side: str) -> Domain:
        elem = side_owner[side]
        junc = junction_by_id[attach[side]]
        declared = elem.domains[0 if not side.endswith(".b") else -1]
        if declared is not None and declared is not junc.domain:
            raise UnknownDomainError(
                f"element {elem.id}: declared {declared.value} but attaches "
                f"to a {junc.domain.value} junction"
            )
        return junc.domain

    grounds: dict[Domain, str] = {}
    for j in bg.junctions:
        if j.is_ground:
            if not j.is_node_junction():
                raise UnsupportedJunctionTopologyError(
                    f"ground junction {j.id} must be a continuity junction"
                )
            grounds[j.domain] = j.node_id

    def ground_of(domain: Domain) -> str:
        if domain not in grounds:
            raise UnsupportedJunctionTopologyError(
                f"no ground junction declared in the {domain.value} domain"
            )
        return grounds[domain]

    # expand series junctions into chains with intermediate nodes
    terminal_of: dict[str, tuple[str, str]] = {}
    internals: dict[str, list[str]] = {}
    for j in bg.junctions:
        if j.is_node_junction():
            for ref in junction_bonds[j.id]:
                if ref in junction_by_id and junction_by_id[ref].is_node_junction():
                    raise UnsupportedJunctionTopologyError(
                        f"junctions {j.id} and {ref} are both continuity "
                        "junctions; a direct bond between them is degenerate"
                    )
                if ref in side_owner:
                    terminal_of[ref] = (j.node_id, ground_of(j.domain))
            continue
        members = [r for r in junction_bonds[j.id] if r in side_owner]
        neighbors = []
        for ref in junction_bonds[j.id]:
            if ref in junction_by_id:
                other = junction_by_id[ref]
                if not other.is_node_junction():
                    raise UnsupportedJunctionTopologyError(
                        f"series junctions {j.id} and {ref} are bonded "
                        "directly; merge them"
                    )
                neighbors.append(other.node_id)
        if len(neighbors) > 2:
            raise UnsupportedJunctionTopologyError(
                f"series junction {j.id} joins {len(neighbors)} continuity "
                "junctions; not reducible to a two-terminal chain"
            )
        if not members:
            raise UnsupportedJunctionTopologyError(
                f"series junction {j.id} carries no elements"
            )
        while len(neighbors) < 2:
            neighbors.append(ground_of(j.domain))
        start, end = neighbors
        names = list(j.internal_nodes) or [
            f"{j.id}_n{i}" for i in range(1, len(members))
        ]
        if len(names) != len(members) - 1:
            raise UnsupportedJunctionTopologyError(
                f"series junction {j.id}: {len(members)} chain members need "
                f"{len(members) - 1} internal nodes, got {len(names)}"
            )
        internals[j.id] = names
        path = [start] + names + [end]
        for ref, t1, t2 in zip(members, path[:-1], path[1:]):
            terminal_of[ref] = (t1, t2)

    # nodes in junction declaration order, chain internals in place
    nodes: list[Node] = []
    for j in bg.junctions:
        if j.is_node_junction():
            nodes.append(Node(j.node_id, j.domain, j.is_ground))
        else:
            nodes.extend(Node(n, j.domain, False) for n in internals[j.id])

    elements: list[Element] = []
    for e in bg.elements:
        if e.kind in ONE_PORT_KINDS:
            domain = side_domain(e.id)
            view = domain_view(domain)
            kind = _ONE_PORT_MAP[view][e.kind]
            parameter = e.parameter
            if view is View.LAGRANGIAN and e.kind == CAPACITOR:
                parameter = 1.0 / e.parameter  # compliance -> stiffness
            t1, t2 = terminal_of[e.id]
            if kind in Kind.SOURCES:
                gnd = ground_of(domain)
                t1, t2 = (t2, t1) if t1 == gnd else (t1, t2)
                elements.append(
                    Element(e.id, kind, ((t1, t2),), signal=e.signal)
                )
            else:
                elements.append(Element(e.id, kind, ((t1, t2),), parameter))
        else:
            view_a = domain_view(side_domain(f"{e.id}.a"))
            view_b = domain_view(side_domain(f"{e.id}.b"))
            same_view = view_a is view_b
            if e.kind == TRANSFORMER:
                kind = Kind.TRANSFORMER if same_view else Kind.GYRATOR
            else:
                kind = Kind.GYRATOR if same_view else Kind.TRANSFORMER
            p = e.parameter if view_a is View.EULERIAN else 1.0 / e.parameter
            ports = (terminal_of[f"{e.id}.a"], terminal_of[f"{e.id}.b"])
            elements.append(Element(e.id, kind, ports, p))

    return SystemModel(bg.name, tuple(nodes), tuple(elements))
