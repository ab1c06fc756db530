"""Netlist data model for multi-domain lumped-parameter systems.

A system model is a set of typed nodes (points with distinct absolute
across values, one ground per connected same-domain subnet) and elements
connecting them. One-port elements live in a single domain; transformers
and gyrators couple two node pairs that may sit in different domains.

Sign convention: positive through flows from terminal 1 to terminal 2, and
an element's across drop is y(terminal 1) - y(terminal 2) with grounds at 0.

Element parameters are the domain-standard constants (ohms, farads, henries;
damping N.s/m, stiffness N/m, mass kg; fluidic R/C/I; thermal R/C). The
constitutive coefficient actually used in the laws depends on the domain
view, see `d_gain` / `a_capacitance` / `t_gain`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .domains import Domain, View, domain_view, parse_domain
from .errors import HfnetError


class Kind:
    """Element kind tags (string constants keep the JSON form readable)."""

    ACROSS_SOURCE = "across_source"
    THROUGH_SOURCE = "through_source"
    D_TYPE = "d_type"
    A_TYPE = "a_type"
    T_TYPE = "t_type"
    TRANSFORMER = "transformer"
    GYRATOR = "gyrator"

    ONE_PORT = (ACROSS_SOURCE, THROUGH_SOURCE, D_TYPE, A_TYPE, T_TYPE)
    TWO_PORT = (TRANSFORMER, GYRATOR)
    SOURCES = (ACROSS_SOURCE, THROUGH_SOURCE)
    STORAGE = (A_TYPE, T_TYPE)
    ALL = ONE_PORT + TWO_PORT


@dataclass(frozen=True)
class Step:
    """Constant signal: evaluates to `amplitude` at every grid step."""

    amplitude: float = 1.0

    def value_at(self, t: float) -> float:
        return self.amplitude


@dataclass(frozen=True)
class SampledSeries:
    """Zero-order-hold series; samples are (time, value) sorted by time."""

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.samples:
            raise HfnetError("sampled series needs at least one sample")
        times = [t for t, _ in self.samples]
        if times != sorted(times):
            raise HfnetError("sampled series times must be increasing")

    def check_coverage(self, t_first: float, t_last: float):
        if self.samples[0][0] > t_first or self.samples[-1][0] < t_last:
            raise HfnetError(
                f"sampled series covers [{self.samples[0][0]}, {self.samples[-1][0]}]"
                f" but the grid spans [{t_first}, {t_last}]"
            )

    def value_at(self, t: float) -> float:
        value = self.samples[0][1]
        for st, sv in self.samples:
            if st > t:
                break
            value = sv
        return value


@dataclass(frozen=True)
class Node:
    id: str
    domain: Domain
    is_ground: bool = False


@dataclass(frozen=True)
class Element:
    """A netlist element.

    `ports` holds one (t1, t2) node-id pair for one-port kinds and two pairs
    (side a, side b) for transformers and gyrators.
    """

    id: str
    kind: str
    ports: tuple[tuple[str, str], ...]
    parameter: float = 0.0
    signal: Step | SampledSeries | None = None

    @property
    def is_source(self) -> bool:
        return self.kind in Kind.SOURCES

    @property
    def is_two_port(self) -> bool:
        return self.kind in Kind.TWO_PORT

    @property
    def terminals(self) -> tuple[str, str]:
        if self.is_two_port:
            raise HfnetError(f"{self.id} is a two-port; use ports[0]/ports[1]")
        return self.ports[0]


@dataclass(frozen=True)
class SystemModel:
    name: str
    nodes: tuple[Node, ...]
    elements: tuple[Element, ...]
    _node_index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_node_index", {n.id: n for n in self.nodes}
        )

    def node(self, node_id: str) -> Node:
        return self._node_index[node_id]

    def element(self, element_id: str) -> Element:
        for e in self.elements:
            if e.id == element_id:
                return e
        raise KeyError(element_id)

    @property
    def ground_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.nodes if n.is_ground)

    def sources(self) -> tuple[Element, ...]:
        return tuple(e for e in self.elements if e.is_source)

    def source_node(self, elem: Element) -> str:
        """The non-ground terminal a source injects into (sources are
        required to reference ground on exactly one terminal)."""
        t1, t2 = elem.ports[0]
        return t2 if self._node_index[t1].is_ground else t1

    def element_domain(self, elem: Element, side: int = 0) -> Domain:
        return self._node_index[elem.ports[side][0]].domain

    def element_view(self, elem: Element, side: int = 0) -> View:
        return domain_view(self.element_domain(elem, side))


# --- constitutive coefficients ------------------------------------------
#
# The stored parameter is the bond-graph-style constant (effort per flow for
# dissipators, etc). In the across/through frame that means the D and T laws
# flip between reciprocal and direct forms with the domain view, while A-type
# storage is always U = c * d(across)/dt with c the stored parameter.


def d_gain(model: SystemModel, elem: Element) -> float:
    """U = d_gain * across_drop for a D-type element."""
    if model.element_view(elem) is View.EULERIAN:
        return 1.0 / elem.parameter
    return elem.parameter


def a_capacitance(model: SystemModel, elem: Element) -> float:
    """U = a_capacitance * d(across_drop)/dt for an A-type element."""
    return elem.parameter


def t_gain(model: SystemModel, elem: Element) -> float:
    """d(U)/dt = t_gain * across_drop for a T-type element."""
    if model.element_view(elem) is View.EULERIAN:
        return 1.0 / elem.parameter
    return elem.parameter


# --- validation -----------------------------------------------------------


def _adjacency(model: SystemModel, skip_kinds=()):
    adj = {n.id: set() for n in model.nodes}
    for e in model.elements:
        if e.kind in skip_kinds:
            continue
        for t1, t2 in e.ports:
            if t1 in adj and t2 in adj:
                adj[t1].add(t2)
                adj[t2].add(t1)
    return adj


def _components(node_ids, adj):
    """Connected components by breadth-first traversal."""
    seen = set()
    comps = []
    for start in node_ids:
        if start in seen:
            continue
        comp = []
        queue = [start]
        seen.add(start)
        while queue:
            nid = queue.pop()
            comp.append(nid)
            for other in adj[nid]:
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
        comps.append(comp)
    return comps


def validate_model(model: SystemModel) -> list[str]:
    """Collect every invariant violation; an empty list means well-formed."""
    report = []
    node_ids = [n.id for n in model.nodes]
    if len(set(node_ids)) != len(node_ids):
        dupes = sorted({i for i in node_ids if node_ids.count(i) > 1})
        report.append(f"duplicate node ids: {', '.join(dupes)}")
    elem_ids = [e.id for e in model.elements]
    if len(set(elem_ids)) != len(elem_ids):
        dupes = sorted({i for i in elem_ids if elem_ids.count(i) > 1})
        report.append(f"duplicate element ids: {', '.join(dupes)}")

    if not model.nodes:
        report.append("model has no nodes and no ground node")
        return report

    known = set(node_ids)
    for e in model.elements:
        n_ports = len(e.ports)
        if e.is_two_port and n_ports != 2 or not e.is_two_port and n_ports != 1:
            report.append(f"element {e.id}: wrong port count for kind {e.kind}")
            continue
        bad_ref = False
        for t1, t2 in e.ports:
            for t in (t1, t2):
                if t not in known:
                    report.append(f"element {e.id}: unknown node {t!r}")
                    bad_ref = True
        if bad_ref:
            continue
        for t1, t2 in e.ports:
            if model.node(t1).domain is not model.node(t2).domain:
                report.append(
                    f"element {e.id}: terminals {t1}/{t2} span different domains"
                )
        if e.kind in (Kind.D_TYPE, Kind.A_TYPE, Kind.T_TYPE):
            if not e.parameter > 0:
                report.append(f"element {e.id}: parameter must be > 0")
        if e.kind in Kind.TWO_PORT and e.parameter == 0:
            report.append(f"element {e.id}: coupling ratio must be nonzero")
        if e.kind == Kind.T_TYPE and model.element_domain(e) is Domain.THERMAL:
            report.append(
                f"element {e.id}: thermal domain admits no T-type storage"
            )
        if e.is_source:
            t1, t2 = e.ports[0]
            grounded = model.node(t1).is_ground + model.node(t2).is_ground
            if grounded != 1:
                report.append(
                    f"source {e.id}: exactly one terminal must be a ground node"
                )
            if e.signal is None:
                report.append(f"source {e.id}: missing signal")

    if not any(e.is_source for e in model.elements):
        report.append("model has no source element")

    # ground / connectivity per same-domain subnet
    adj = _adjacency(model)
    for domain in Domain:
        ids = {n.id for n in model.nodes if n.domain is domain}
        if not ids:
            continue
        sub_adj = {k: {o for o in adj[k] if o in ids} for k in ids}
        comps = _components(sorted(ids), sub_adj)
        for comp in comps:
            grounds = sorted(i for i in comp if model.node(i).is_ground)
            if len(grounds) > 1:
                report.append(
                    f"multiple ground nodes in one {domain.value} subnet: "
                    + ", ".join(grounds)
                )
            elif not grounds:
                if len(comps) > 1:
                    report.append(
                        f"disconnected subnet in {domain.value} domain with no "
                        f"ground node: {', '.join(sorted(comp))}"
                    )
                else:
                    report.append(
                        f"no ground node in {domain.value} subnet: "
                        + ", ".join(sorted(comp))
                    )

    # loop of across sources: union-find over across-source edges only
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in model.elements:
        if e.kind != Kind.ACROSS_SOURCE:
            continue
        t1, t2 = e.ports[0]
        if t1 not in known or t2 not in known:
            continue
        r1, r2 = find(t1), find(t2)
        if r1 == r2:
            report.append(f"loop of across-variable sources closed by {e.id}")
        else:
            parent[r1] = r2

    # cutset of through sources: dropping them must not disconnect anything
    full = _adjacency(model)
    reduced = _adjacency(model, skip_kinds=(Kind.THROUGH_SOURCE,))
    full_comps = {frozenset(c) for c in _components(node_ids, full)}
    reduced_comps = {frozenset(c) for c in _components(node_ids, reduced)}
    if full_comps != reduced_comps:
        cut = sorted(
            e.id for e in model.elements if e.kind == Kind.THROUGH_SOURCE
        )
        report.append(
            "cutset of through-variable sources (removing "
            + ", ".join(cut)
            + " disconnects the graph)"
        )

    return report


# --- JSON I/O --------------------------------------------------------------


def _signal_from_json(obj) -> Step | SampledSeries:
    if obj is None:
        return Step(1.0)
    kind = obj.get("kind", "step")
    if kind == "step":
        return Step(float(obj.get("amplitude", 1.0)))
    if kind == "samples":
        return SampledSeries(tuple((float(t), float(v)) for t, v in obj["samples"]))
    raise HfnetError(f"unknown signal kind {kind!r}")


def _signal_to_json(sig) -> dict:
    if isinstance(sig, Step):
        return {"kind": "step", "amplitude": sig.amplitude}
    return {"kind": "samples", "samples": [list(s) for s in sig.samples]}


def model_from_dict(doc: dict) -> SystemModel:
    nodes = tuple(
        Node(n["id"], parse_domain(n["domain"]), bool(n.get("ground", False)))
        for n in doc.get("nodes", [])
    )
    elements = []
    for ej in doc.get("elements", []):
        kind = ej["kind"]
        if kind not in Kind.ALL:
            raise HfnetError(f"element {ej.get('id')}: unknown kind {kind!r}")
        raw = ej["terminals"]
        if kind in Kind.TWO_PORT:
            ports = tuple((str(a), str(b)) for a, b in raw)
        else:
            ports = ((str(raw[0]), str(raw[1])),)
        signal = None
        if kind in Kind.SOURCES:
            signal = _signal_from_json(ej.get("signal"))
        elements.append(
            Element(
                id=ej["id"],
                kind=kind,
                ports=ports,
                parameter=float(ej.get("parameter", 0.0)),
                signal=signal,
            )
        )
    return SystemModel(doc.get("name", "model"), nodes, tuple(elements))


def model_to_dict(model: SystemModel) -> dict:
    elements = []
    for e in model.elements:
        ej = {"id": e.id, "kind": e.kind}
        if e.is_two_port:
            ej["terminals"] = [list(p) for p in e.ports]
        else:
            ej["terminals"] = list(e.ports[0])
        if e.kind not in Kind.SOURCES:
            ej["parameter"] = e.parameter
        elif e.parameter:
            ej["parameter"] = e.parameter
        if e.signal is not None:
            ej["signal"] = _signal_to_json(e.signal)
        elements.append(ej)
    return {
        "name": model.name,
        "nodes": [
            {"id": n.id, "domain": n.domain.value, "ground": n.is_ground}
            for n in model.nodes
        ],
        "elements": elements,
    }


def load_model(path) -> SystemModel:
    """Load a model file; dispatches to the bond-graph converter when the
    document carries `bondgraph: true`."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("bondgraph"):
        from .bondgraph import bondgraph_from_dict, bondgraph_to_lineargraph

        return bondgraph_to_lineargraph(bondgraph_from_dict(doc))
    return model_from_dict(doc)


def save_model(model: SystemModel, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
