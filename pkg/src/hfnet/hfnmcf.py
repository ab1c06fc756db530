"""Specialized network-flow constraint system over a discrete time grid.

With a null objective, no capacities, instantaneous transitions, and no
operand state, the flow program collapses to one sparse linear feasibility
system in the per-step through vector U[k] and non-ground across vector
y[k]. Continuity rows come straight from the reduced incidence matrix; the
element laws discretize storage with a forward difference, placing dt so
each row is dimensionally a plain balance:

  D:           U[k]           = gain * drop[k]
  T (storage): U[k+1] - U[k]  = gain * drop[k] * dt
  A (storage): U[k] * dt      = cap  * (drop[k+1] - drop[k])
  transformer: drop[k]        = 0        (drop includes the -ratio coupling)
  gyrator:     drop_a[k]      = g * U_b[k]   and   drop_b[k] = -g * U_a[k]

where drop = (-M_reduced)^T y is each capability's across drop. Sources pin
their own variable per step; initial conditions pin T through values and
tree A-type across drops at the first sample.

Solved square via sparse LU; a least-squares pass classifies failures as
underdetermined (free variables named) or inconsistent (conflicting rows
named).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    HfnetError,
    InconsistentError,
    UnderdeterminedError,
)
from .esn import EngineeringSystemNet, reduced_incidence
from .model import Kind, SampledSeries, SystemModel, a_capacitance, d_gain, t_gain
from .normal_tree import NormalTree, build_normal_tree
from .trajectories import TimeGrid, Trajectories

DEFAULT_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class RowTag:
    kind: str
    key: str
    k: int | None = None

    def __str__(self):
        return f"{self.kind}@{self.key}" + (f"[k={self.k}]" if self.k else "")


class VariableLayout:
    """Bijection (kind, id, k) <-> flat column index; U block then y block
    per step, steps ordered k = 1..K."""

    def __init__(self, esn: EngineeringSystemNet, grid: TimeGrid):
        self.u_labels = tuple(c.id for c in esn.capabilities)
        self.y_labels = esn.reduced_buffers
        self.steps = grid.steps
        self.n_u = len(self.u_labels)
        self.n_y = len(self.y_labels)
        self._u = {c: i for i, c in enumerate(self.u_labels)}
        self._y = {b: i for i, b in enumerate(self.y_labels)}

    @property
    def block(self) -> int:
        return self.n_u + self.n_y

    @property
    def size(self) -> int:
        return self.steps * self.block

    def u_index(self, cap_id: str, k: int) -> int:
        return (k - 1) * self.block + self._u[cap_id]

    def y_index(self, node_id: str, k: int) -> int:
        return (k - 1) * self.block + self.n_u + self._y[node_id]

    def label(self, flat: int) -> str:
        k, offset = divmod(flat, self.block)
        if offset < self.n_u:
            return f"U({self.u_labels[offset]})[k={k + 1}]"
        return f"y({self.y_labels[offset - self.n_u]})[k={k + 1}]"


@dataclass
class ConstraintSystem:
    layout: VariableLayout
    dt: float
    rows: list = field(default_factory=list)
    cols: list = field(default_factory=list)
    vals: list = field(default_factory=list)
    rhs: list = field(default_factory=list)
    row_tags: list = field(default_factory=list)

    def add_row(self, tag: RowTag, coeffs: dict[int, float], rhs: float = 0.0):
        r = len(self.rhs)
        for col, val in coeffs.items():
            if val != 0.0:
                self.rows.append(r)
                self.cols.append(col)
                self.vals.append(val)
        self.rhs.append(rhs)
        self.row_tags.append(tag)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def n_unknowns(self) -> int:
        return self.layout.size

    def matrix(self) -> sp.csr_matrix:
        return sp.coo_matrix(
            (self.vals, (self.rows, self.cols)),
            shape=(self.n_rows, self.n_unknowns),
        ).tocsr()

    def rows_tagged(self, kind: str, k: int | None = None):
        """(tag, coeff dict, rhs) for every row of one kind, for audits."""
        by_row: dict[int, dict[int, float]] = {}
        for r, c, v in zip(self.rows, self.cols, self.vals):
            row = by_row.setdefault(r, {})
            row[c] = row.get(c, 0.0) + v
        out = []
        for r, tag in enumerate(self.row_tags):
            if tag.kind == kind and (k is None or tag.k == k):
                out.append((tag, by_row.get(r, {}), self.rhs[r]))
        return out

    def dump(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# {self.n_rows} rows, {self.n_unknowns} unknowns\n")
            for r, c, v in zip(self.rows, self.cols, self.vals):
                fh.write(f"{r} {c} {v!r}\n")
            fh.write("# rhs\n")
            for r, v in enumerate(self.rhs):
                if v:
                    fh.write(f"{r} {v!r}\n")
            fh.write("# row tags\n")
            for r, tag in enumerate(self.row_tags):
                fh.write(f"{r} {tag}\n")


def assemble(
    model: SystemModel,
    esn: EngineeringSystemNet,
    grid: TimeGrid,
    overrides: dict | None = None,
    tree: NormalTree | None = None,
) -> ConstraintSystem:
    """Emit the full row set; always square for well-formed models (storage
    elements trade their missing last-step law row for an initial condition
    row)."""
    if tree is None:
        tree = build_normal_tree(model)
    m_red = reduced_incidence(esn)
    drops = -m_red.T  # capability across-drop coefficients over y
    y_ids = esn.reduced_buffers
    times = grid.times
    layout = VariableLayout(esn, grid)
    cs = ConstraintSystem(layout, dt=grid.dt)

    for elem in model.sources():
        if isinstance(elem.signal, SampledSeries):
            elem.signal.check_coverage(float(times[0]), float(times[-1]))

    ics = _initial_conditions(model, tree, overrides or {})

    def drop_coeffs(cap_id: str, k: int) -> dict[int, float]:
        j = esn.capability_col(cap_id)
        return {
            layout.y_index(y_ids[i], k): drops[j, i]
            for i in np.nonzero(drops[j, :])[0]
        }

    last = grid.steps
    for k in range(1, last + 1):
        t_k = float(times[k - 1])
        for i, node_id in enumerate(y_ids):
            coeffs = {
                layout.u_index(layout.u_labels[j], k): m_red[i, j]
                for j in np.nonzero(m_red[i, :])[0]
            }
            cs.add_row(RowTag("Continuity", node_id, k), coeffs)
        for elem in model.elements:
            if elem.kind == Kind.THROUGH_SOURCE:
                cs.add_row(
                    RowTag("SourceU", elem.id, k),
                    {layout.u_index(elem.id, k): 1.0},
                    elem.signal.value_at(t_k),
                )
            elif elem.kind == Kind.ACROSS_SOURCE:
                cs.add_row(
                    RowTag("SourceY", elem.id, k),
                    {layout.y_index(model.source_node(elem), k): 1.0},
                    elem.signal.value_at(t_k),
                )
            elif elem.kind == Kind.D_TYPE:
                coeffs = {layout.u_index(elem.id, k): 1.0}
                gain = d_gain(model, elem)
                for col, v in drop_coeffs(elem.id, k).items():
                    coeffs[col] = -gain * v
                cs.add_row(RowTag("RLaw", elem.id, k), coeffs)
            elif elem.kind == Kind.T_TYPE and k < last:
                coeffs = {
                    layout.u_index(elem.id, k + 1): 1.0,
                    layout.u_index(elem.id, k): -1.0,
                }
                gain = t_gain(model, elem) * grid.dt
                for col, v in drop_coeffs(elem.id, k).items():
                    coeffs[col] = -gain * v
                cs.add_row(RowTag("LLaw", elem.id, k), coeffs)
            elif elem.kind == Kind.A_TYPE and k < last:
                coeffs = {layout.u_index(elem.id, k): grid.dt}
                cap = a_capacitance(model, elem)
                for col, v in drop_coeffs(elem.id, k + 1).items():
                    coeffs[col] = coeffs.get(col, 0.0) - cap * v
                for col, v in drop_coeffs(elem.id, k).items():
                    coeffs[col] = coeffs.get(col, 0.0) + cap * v
                cs.add_row(RowTag("CLaw", elem.id, k), coeffs)
            elif elem.kind == Kind.TRANSFORMER:
                cs.add_row(
                    RowTag("TransformerLaw", elem.id, k),
                    drop_coeffs(elem.id, k),
                )
            elif elem.kind == Kind.GYRATOR:
                g = elem.parameter
                coeffs = dict(drop_coeffs(f"{elem.id}.a", k))
                coeffs[layout.u_index(f"{elem.id}.b", k)] = -g
                cs.add_row(RowTag("GyratorLaw", f"{elem.id}.a", k), coeffs)
                coeffs = dict(drop_coeffs(f"{elem.id}.b", k))
                coeffs[layout.u_index(f"{elem.id}.a", k)] = g
                cs.add_row(RowTag("GyratorLaw", f"{elem.id}.b", k), coeffs)

    tree_set = set(tree.tree_elements)
    for elem in model.elements:
        if elem.kind == Kind.T_TYPE:
            cs.add_row(
                RowTag("InitU", elem.id),
                {layout.u_index(elem.id, 1): 1.0},
                ics.get(elem.id, 0.0),
            )
        elif elem.kind == Kind.A_TYPE and elem.id in tree_set:
            cs.add_row(
                RowTag("InitY", elem.id),
                drop_coeffs(elem.id, 1),
                ics.get(elem.id, 0.0),
            )
    return cs


def _initial_conditions(model, tree, overrides) -> dict[str, float]:
    """Normalize override keys (element id or state name) and reject keys
    that do not pin a state."""
    settable = {s.element for s in tree.state_variables}
    by_name = {s.name: s.element for s in tree.state_variables}
    out = {}
    for key, value in overrides.items():
        elem = by_name.get(key, key)
        if elem not in settable:
            raise HfnetError(
                f"initial condition {key!r} does not name a state variable; "
                f"states: {', '.join(sorted(by_name))}"
            )
        out[elem] = float(value)
    return out


@dataclass(frozen=True)
class Solution:
    trajectories: Trajectories
    residual: float
    method: str


def solve(
    cs: ConstraintSystem,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
) -> Solution:
    matrix = cs.matrix()
    b = np.asarray(cs.rhs, dtype=float)
    n_rows, n_cols = matrix.shape

    if n_rows < n_cols:
        free = _free_variables(matrix, cs.layout)
        raise UnderdeterminedError(
            f"{n_cols - n_rows} missing equation(s); variables lacking a "
            "defining row: " + ", ".join(free),
            variables=free,
        )

    z = None
    method = "sparse-lu"
    if n_rows == n_cols:
        try:
            z = spla.splu(matrix.tocsc()).solve(b)
        except RuntimeError:
            z = None  # exactly singular; classify below
        if z is not None and not np.all(np.isfinite(z)):
            z = None

    if z is None or _residual_inf(matrix, z, b) > residual_tol * _scale(b):
        method = "least-squares"
        z = spla.lsqr(matrix, b, atol=1e-14, btol=1e-14)[0]
        resid = _residual_inf(matrix, z, b)
        if resid > residual_tol * _scale(b):
            tags = _conflicting_rows(matrix, z, b, cs.row_tags)
            raise InconsistentError(
                f"no solution (residual {resid:.3e}); conflicting rows: "
                + ", ".join(str(t) for t in tags),
                row_tags=tags,
                residual=resid,
            )
        if n_rows == n_cols:
            free = _free_variables(matrix, cs.layout)
            raise UnderdeterminedError(
                "square but singular system; free variables: "
                + ", ".join(free),
                variables=free,
            )

    resid = _residual_inf(matrix, z, b)
    layout = cs.layout
    per_step = z.reshape(layout.steps, layout.block)
    times = np.arange(1, layout.steps + 1) * cs.dt
    traj = Trajectories(
        times=times,
        u=per_step[:, : layout.n_u].copy(),
        y=per_step[:, layout.n_u :].copy(),
        u_labels=layout.u_labels,
        y_labels=layout.y_labels,
    )
    return Solution(traj, resid, method)


def _scale(b: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(b))) if b.size else 1.0)


def _residual_inf(matrix, z, b) -> float:
    return float(np.max(np.abs(matrix @ z - b))) if b.size else 0.0


def _free_variables(matrix, layout, limit: int = 4000) -> list[str]:
    """Null-space witnesses mapped back to variable labels."""
    if matrix.shape[1] > limit:
        return ["(system too large for null-space diagnosis)"]
    from scipy.linalg import null_space

    basis = null_space(matrix.toarray())
    names = set()
    for i in range(basis.shape[1]):
        vec = np.abs(basis[:, i])
        for j in np.nonzero(vec > 0.3 * vec.max())[0]:
            names.add(layout.label(int(j)))
    return sorted(names)


def _conflicting_rows(matrix, z, b, row_tags, top: int = 8):
    resid = np.abs(matrix @ z - b)
    cutoff = 0.5 * resid.max()
    idx = [int(i) for i in np.argsort(resid)[::-1] if resid[i] >= cutoff]
    return [row_tags[i] for i in idx[:top]]
