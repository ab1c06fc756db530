"""State-space derivation by linear elimination of the algebraic block.

At any instant the model's variables satisfy one linear system over
(node across values y, element through values U, state derivatives xdot)
with the states x and source inputs u on the right-hand side:

  * continuity at each non-ground node (reduced incidence over U),
  * one constitutive row per capability (two for storage elements, where
    the state definition joins the law), and
  * one imposed-value row per source.

Solving that square system against basis right-hand sides yields xdot as a
linear map of (x, u) - the A and B matrices - plus the reconstruction map
from (x, u) to every element through value and node across value, which the
integrators reuse so all trajectory labels line up.

Compatibility laws never appear: across values are absolute, grounds are 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DerivativeFeedthroughError, SingularAlgebraicSystemError
from .esn import EngineeringSystemNet, build_esn, reduced_incidence
from .model import Kind, SystemModel, a_capacitance, d_gain, t_gain
from .normal_tree import A_STATE, NormalTree, build_normal_tree


@dataclass(frozen=True)
class AlgebraicMap:
    """Linear reconstruction of all net variables from states and inputs.

    u_labels/y_labels follow the net's capability and non-ground buffer
    ordering; rows of u_map/y_map map [x; u_src] to those variables.
    """

    state_names: tuple[str, ...]
    input_names: tuple[str, ...]
    u_labels: tuple[str, ...]
    y_labels: tuple[str, ...]
    u_map: np.ndarray
    y_map: np.ndarray

    def reconstruct(self, x: np.ndarray, u_src: np.ndarray):
        z = np.concatenate([np.atleast_1d(x), np.atleast_1d(u_src)])
        return self.u_map @ z, self.y_map @ z


@dataclass(frozen=True)
class StateSpace:
    a: np.ndarray
    b: np.ndarray
    state_names: tuple[str, ...]
    input_names: tuple[str, ...]
    algebra: AlgebraicMap


def _element_across_coeffs(model, esn, row_of, ports):
    """Coefficients of y(t1) - y(t2) over the reduced y vector."""
    coeffs = {}
    t1, t2 = ports
    if t1 in row_of:
        coeffs[row_of[t1]] = coeffs.get(row_of[t1], 0.0) + 1.0
    if t2 in row_of:
        coeffs[row_of[t2]] = coeffs.get(row_of[t2], 0.0) - 1.0
    return coeffs


def derive_state_space(
    model: SystemModel,
    tree: NormalTree | None = None,
    esn: EngineeringSystemNet | None = None,
) -> StateSpace:
    if tree is None:
        tree = build_normal_tree(model)
    if tree.has_dependent_storage:
        raise DerivativeFeedthroughError(
            "dependent storage (input-derivative feedthrough) is unsupported: "
            + ", ".join(tree.dependent_storage)
        )
    if esn is None:
        esn = build_esn(model)

    m_red = reduced_incidence(esn)
    across_rows = -m_red.T  # capability across drops as rows over y
    y_ids = esn.reduced_buffers
    row_of = {b: i for i, b in enumerate(y_ids)}
    n_y = len(y_ids)
    n_u = esn.n_capabilities
    states = tree.state_variables
    n_x = len(states)
    state_index = {s.element: i for i, s in enumerate(states)}
    sources = model.sources()
    n_in = len(sources)
    input_index = {e.id: j for j, e in enumerate(sources)}

    n = n_y + n_u + n_x
    sys = np.zeros((n, n))
    rhs = np.zeros((n, n_x + n_in))
    row_names: list[str] = []

    def u_col(cap_id):
        return n_y + esn.capability_col(cap_id)

    r = 0
    for i in range(n_y):
        sys[r, n_y : n_y + n_u] = m_red[i, :]
        row_names.append(f"continuity@{y_ids[i]}")
        r += 1

    for elem in model.elements:
        if elem.kind == Kind.THROUGH_SOURCE:
            sys[r, u_col(elem.id)] = 1.0
            rhs[r, n_x + input_index[elem.id]] = 1.0
            row_names.append(f"source_u@{elem.id}")
            r += 1
        elif elem.kind == Kind.ACROSS_SOURCE:
            sys[r, row_of[model.source_node(elem)]] = 1.0
            rhs[r, n_x + input_index[elem.id]] = 1.0
            row_names.append(f"source_y@{elem.id}")
            r += 1
        elif elem.kind == Kind.D_TYPE:
            j = esn.capability_col(elem.id)
            sys[r, u_col(elem.id)] = 1.0
            sys[r, :n_y] -= d_gain(model, elem) * across_rows[j, :]
            row_names.append(f"d_law@{elem.id}")
            r += 1
        elif elem.kind == Kind.A_TYPE:
            i = state_index[elem.id]
            for col, val in _element_across_coeffs(
                model, esn, row_of, elem.ports[0]
            ).items():
                sys[r, col] = val
            rhs[r, i] = 1.0
            row_names.append(f"a_state@{elem.id}")
            r += 1
            sys[r, u_col(elem.id)] = 1.0
            sys[r, n_y + n_u + i] = -a_capacitance(model, elem)
            row_names.append(f"a_law@{elem.id}")
            r += 1
        elif elem.kind == Kind.T_TYPE:
            i = state_index[elem.id]
            j = esn.capability_col(elem.id)
            sys[r, u_col(elem.id)] = 1.0
            rhs[r, i] = 1.0
            row_names.append(f"t_state@{elem.id}")
            r += 1
            sys[r, n_y + n_u + i] = 1.0
            sys[r, :n_y] -= t_gain(model, elem) * across_rows[j, :]
            row_names.append(f"t_law@{elem.id}")
            r += 1
        elif elem.kind == Kind.TRANSFORMER:
            j = esn.capability_col(elem.id)
            sys[r, :n_y] = across_rows[j, :]
            row_names.append(f"transformer_law@{elem.id}")
            r += 1
        elif elem.kind == Kind.GYRATOR:
            ja = esn.capability_col(f"{elem.id}.a")
            jb = esn.capability_col(f"{elem.id}.b")
            g = elem.parameter
            sys[r, :n_y] = across_rows[ja, :]
            sys[r, u_col(f"{elem.id}.b")] = -g
            row_names.append(f"gyrator_law@{elem.id}.a")
            r += 1
            sys[r, :n_y] = across_rows[jb, :]
            sys[r, u_col(f"{elem.id}.a")] = g
            row_names.append(f"gyrator_law@{elem.id}.b")
            r += 1

    assert r == n, f"algebraic block is not square: {r} rows, {n} unknowns"

    try:
        sol = np.linalg.solve(sys, rhs)
    except np.linalg.LinAlgError:
        bad = _null_variables(sys, y_ids, esn, states)
        raise SingularAlgebraicSystemError(
            "algebraic elimination is singular; unsolvable variables: "
            + ", ".join(bad),
            variables=bad,
        ) from None

    xdot_rows = sol[n_y + n_u :, :]
    algebra = AlgebraicMap(
        state_names=tuple(s.name for s in states),
        input_names=tuple(e.id for e in sources),
        u_labels=tuple(c.id for c in esn.capabilities),
        y_labels=tuple(y_ids),
        u_map=sol[n_y : n_y + n_u, :],
        y_map=sol[:n_y, :],
    )
    return StateSpace(
        a=xdot_rows[:, :n_x],
        b=xdot_rows[:, n_x:],
        state_names=algebra.state_names,
        input_names=algebra.input_names,
        algebra=algebra,
    )


def _null_variables(sys, y_ids, esn, states):
    """Names of unknowns with weight in the (near-)null space."""
    labels = (
        [f"y({b})" for b in y_ids]
        + [f"U({c.id})" for c in esn.capabilities]
        + [f"d/dt {s.name}" for s in states]
    )
    _, sigma, vt = np.linalg.svd(sys)
    tol = max(sys.shape) * np.finfo(float).eps * (sigma[0] if sigma.size else 1.0)
    names = []
    for i, s in enumerate(sigma):
        if s <= tol:
            vec = np.abs(vt[i])
            for j in np.nonzero(vec > 0.3 * vec.max())[0]:
                names.append(labels[j])
    return sorted(set(names))


def law_listing(model: SystemModel, esn: EngineeringSystemNet | None = None):
    """Human-readable continuity and constitutive laws, for audit output."""
    if esn is None:
        esn = build_esn(model)
    m_red = reduced_incidence(esn)
    y_ids = esn.reduced_buffers
    lines = []
    for i, node_id in enumerate(y_ids):
        terms = []
        for j, cap in enumerate(esn.capabilities):
            v = m_red[i, j]
            if v:
                sign = "+" if v > 0 else "-"
                mag = "" if abs(v) == 1 else f"{abs(v):g}*"
                terms.append(f"{sign} {mag}U({cap.id})")
        lines.append(f"continuity @ {node_id}: {' '.join(terms)} = 0")
    for elem in model.elements:
        t = elem.ports[0]
        if elem.kind == Kind.ACROSS_SOURCE:
            lines.append(f"source {elem.id}: y({model.source_node(elem)}) imposed")
        elif elem.kind == Kind.THROUGH_SOURCE:
            lines.append(f"source {elem.id}: U({elem.id}) imposed")
        elif elem.kind == Kind.D_TYPE:
            lines.append(
                f"dissipation {elem.id}: U = {d_gain(model, elem):g} * (y({t[0]}) - y({t[1]}))"
            )
        elif elem.kind == Kind.A_TYPE:
            lines.append(
                f"across storage {elem.id}: U = {a_capacitance(model, elem):g}"
                f" * d/dt (y({t[0]}) - y({t[1]}))"
            )
        elif elem.kind == Kind.T_TYPE:
            lines.append(
                f"through storage {elem.id}: dU/dt = {t_gain(model, elem):g}"
                f" * (y({t[0]}) - y({t[1]}))"
            )
        elif elem.kind == Kind.TRANSFORMER:
            (a1, a2), (b1, b2) = elem.ports
            lines.append(
                f"transformer {elem.id}: y({a1})-y({a2}) = {elem.parameter:g}"
                f" * (y({b1})-y({b2})); delivered U_b = {elem.parameter:g} * U_a"
            )
        elif elem.kind == Kind.GYRATOR:
            (a1, a2), (b1, b2) = elem.ports
            g = elem.parameter
            lines.append(
                f"gyrator {elem.id}: y({a1})-y({a2}) = {g:g} * U({elem.id}.b); "
                f"y({b1})-y({b2}) = {g:g} * U({elem.id}.a)"
            )
    return lines
