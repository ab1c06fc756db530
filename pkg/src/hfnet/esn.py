"""Engineering system net: buffers, capabilities, weighted incidence.

The net is the Petri-net view of a system model: one place (buffer) per
node, one transition (capability) per element, except gyrators which carry
one capability per side because their two port flows are independent
unknowns. Incidence weights are 1 everywhere except transformer side-b
arcs, which carry the coupling ratio so the foreign-domain continuity row
picks up ratio * U directly.

Column orientation: a capability pulls from its side-a terminal 1 and
injects into terminal 2; two-port side b uses the delivery orientation
(injects into b1, pulls from b2) so that coupled power balances exactly.
Source capabilities inject into their non-ground terminal and have no pull
arc: the injected power crosses the system boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidModelError,
    RankDeficientError,
)
from .model import Kind, SystemModel, validate_model

PROCESS_BY_KIND = {
    Kind.ACROSS_SOURCE: "InjectPowerAcrossImposed",
    Kind.THROUGH_SOURCE: "InjectPowerThroughImposed",
    Kind.D_TYPE: "DissipatePower",
    Kind.A_TYPE: "StorePotentialEnergy",
    Kind.T_TYPE: "StoreKineticEnergy",
    Kind.TRANSFORMER: "TransformPower",
    Kind.GYRATOR: "GyratePower",
}


@dataclass(frozen=True)
class Capability:
    id: str
    element_id: str
    process: str
    pulls: tuple[tuple[str, float], ...]
    injects: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class Marking:
    q_buffers: np.ndarray
    q_capabilities: np.ndarray


class EngineeringSystemNet:
    """Immutable net over a validated system model."""

    def __init__(self, model: SystemModel, buffers, capabilities, m_plus, m_minus):
        self.model = model
        self.buffers = tuple(buffers)          # node ids, declaration order
        self.capabilities = tuple(capabilities)
        self.m_plus = m_plus
        self.m_minus = m_minus
        self.m = m_plus - m_minus
        self.m.setflags(write=False)
        self.m_plus.setflags(write=False)
        self.m_minus.setflags(write=False)
        self._row = {b: i for i, b in enumerate(self.buffers)}
        self._col = {c.id: i for i, c in enumerate(self.capabilities)}
        self.ground_rows = tuple(
            self._row[n.id] for n in model.nodes if n.is_ground
        )

    @property
    def n_buffers(self) -> int:
        return len(self.buffers)

    @property
    def n_capabilities(self) -> int:
        return len(self.capabilities)

    def buffer_row(self, node_id: str) -> int:
        return self._row[node_id]

    def capability_col(self, cap_id: str) -> int:
        return self._col[cap_id]

    def capability_for_element(self, element_id: str, side: str = "") -> Capability:
        cap_id = f"{element_id}.{side}" if side else element_id
        return self.capabilities[self._col[cap_id]]

    @property
    def reduced_buffers(self) -> tuple[str, ...]:
        return tuple(
            b for i, b in enumerate(self.buffers) if i not in self.ground_rows
        )


def build_esn(model: SystemModel, validate: bool = True) -> EngineeringSystemNet:
    """Construct the net; row order follows node declaration order, column
    order element declaration order (gyrator sides as consecutive columns)."""
    if validate:
        report = validate_model(model)
        if report:
            raise InvalidModelError(report)

    buffers = [n.id for n in model.nodes]
    row = {b: i for i, b in enumerate(buffers)}
    caps: list[Capability] = []
    cols: list[dict[int, tuple[float, float]]] = []  # row -> (plus, minus)

    def add_capability(cap_id, elem, pulls, injects):
        col: dict[int, list[float]] = {}
        for node_id, w in pulls + injects:
            col.setdefault(row[node_id], [0.0, 0.0])
        for node_id, w in pulls:
            col[row[node_id]][1] += w
        for node_id, w in injects:
            col[row[node_id]][0] += w
        caps.append(
            Capability(
                id=cap_id,
                element_id=elem.id,
                process=PROCESS_BY_KIND[elem.kind],
                pulls=tuple(pulls),
                injects=tuple(injects),
            )
        )
        cols.append({r: (p, m) for r, (p, m) in col.items()})

    for elem in model.elements:
        if elem.is_source:
            add_capability(elem.id, elem, [], [(model.source_node(elem), 1.0)])
        elif elem.kind in (Kind.D_TYPE, Kind.A_TYPE, Kind.T_TYPE):
            t1, t2 = elem.ports[0]
            add_capability(elem.id, elem, [(t1, 1.0)], [(t2, 1.0)])
        elif elem.kind == Kind.TRANSFORMER:
            (a1, a2), (b1, b2) = elem.ports
            r = elem.parameter
            if r > 0:
                pulls = [(a1, 1.0), (b2, r)]
                injects = [(a2, 1.0), (b1, r)]
            else:
                pulls = [(a1, 1.0), (b1, -r)]
                injects = [(a2, 1.0), (b2, -r)]
            add_capability(elem.id, elem, pulls, injects)
        elif elem.kind == Kind.GYRATOR:
            (a1, a2), (b1, b2) = elem.ports
            add_capability(f"{elem.id}.a", elem, [(a1, 1.0)], [(a2, 1.0)])
            add_capability(f"{elem.id}.b", elem, [(b2, 1.0)], [(b1, 1.0)])
        else:  # pragma: no cover - loader rejects unknown kinds
            raise InvalidModelError([f"element {elem.id}: unknown kind"])

    n_rows, n_cols = len(buffers), len(caps)
    m_plus = np.zeros((n_rows, n_cols))
    m_minus = np.zeros((n_rows, n_cols))
    for j, col in enumerate(cols):
        for r, (p, m) in col.items():
            m_plus[r, j] = p
            m_minus[r, j] = m
    return EngineeringSystemNet(model, buffers, caps, m_plus, m_minus)


def reduced_incidence(esn: EngineeringSystemNet) -> np.ndarray:
    """M with ground rows removed; full row rank for well-posed models."""
    keep = [i for i in range(esn.n_buffers) if i not in esn.ground_rows]
    reduced = esn.m[keep, :]
    if reduced.shape[0] == 0:
        return reduced
    rank = np.linalg.matrix_rank(reduced)
    if rank < reduced.shape[0]:
        offenders = _groundless_nodes(esn)
        raise RankDeficientError(
            "reduced incidence is rank deficient "
            f"({rank} < {reduced.shape[0]}); floating subnetwork: "
            + (", ".join(offenders) if offenders else "unidentified"),
            nodes=offenders,
        )
    return reduced


def _groundless_nodes(esn: EngineeringSystemNet) -> list[str]:
    """Nodes in connected pieces that contain no ground (the dependency
    witnesses for a rank-deficient reduced incidence)."""
    adj = {b: set() for b in esn.buffers}
    for j in range(esn.n_capabilities):
        touched = [esn.buffers[i] for i in np.nonzero(esn.m[:, j])[0]]
        for a in touched:
            for b in touched:
                if a != b:
                    adj[a].add(b)
    grounds = {esn.buffers[i] for i in esn.ground_rows}
    seen = set()
    out = []
    for start in esn.buffers:
        if start in seen:
            continue
        comp, queue = [], [start]
        seen.add(start)
        while queue:
            nid = queue.pop()
            comp.append(nid)
            for other in adj[nid]:
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
        if not grounds & set(comp):
            out.extend(sorted(comp))
    return out


def esn_step(
    esn: EngineeringSystemNet,
    marking: Marking,
    u_minus: np.ndarray,
    u_plus: np.ndarray,
    dt: float,
) -> Marking:
    """One firing of the net's state transition function."""
    u_minus = np.asarray(u_minus, dtype=float)
    u_plus = np.asarray(u_plus, dtype=float)
    if u_minus.shape != (esn.n_capabilities,) or u_plus.shape != (esn.n_capabilities,):
        raise DimensionMismatchError(
            f"firing vectors must have length {esn.n_capabilities}"
        )
    if marking.q_buffers.shape != (esn.n_buffers,):
        raise DimensionMismatchError(
            f"buffer marking must have length {esn.n_buffers}"
        )
    q_b = marking.q_buffers + (esn.m_plus @ u_plus - esn.m_minus @ u_minus) * dt
    q_e = marking.q_capabilities + (u_minus - u_plus) * dt
    return Marking(q_b, q_e)


# --- exports ----------------------------------------------------------------


def write_matrix_csv(matrix: np.ndarray, path, row_labels, col_labels):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("," + ",".join(col_labels) + "\n")
        for label, mrow in zip(row_labels, matrix):
            fh.write(label + "," + ",".join(repr(float(v)) for v in mrow) + "\n")


def write_matrix_triplets(matrix: np.ndarray, path):
    """Sparse text dump, one `row col value` line per nonzero."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j in zip(*np.nonzero(matrix)):
            fh.write(f"{i} {j} {matrix[i, j]!r}\n")
