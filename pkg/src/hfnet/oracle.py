"""Reference integrators and closed-form checks for the flow-solver path.

Both integrators march the derived state-space model on the same grid the
constraint solver uses and rebuild every element through value and node
across value at each sample via the shared algebraic map, so trajectory
labels line up exactly with the solver output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, SingularAError
from .model import SystemModel
from .statespace import StateSpace, derive_state_space
from .trajectories import TimeGrid, Trajectories


@dataclass(frozen=True)
class OdeRun:
    ss: StateSpace
    signals: tuple  # one signal (value_at(t)) per input, input order
    grid: TimeGrid
    x0: np.ndarray

    def __post_init__(self):
        n = self.ss.a.shape[0]
        if np.atleast_1d(self.x0).shape != (n,):
            raise DimensionMismatchError(
                f"x0 must have length {n}, got {np.atleast_1d(self.x0).shape}"
            )
        if len(self.signals) != len(self.ss.input_names):
            raise DimensionMismatchError(
                f"need {len(self.ss.input_names)} input signals"
            )

    def inputs_at(self, t: float) -> np.ndarray:
        return np.array([sig.value_at(t) for sig in self.signals])


def make_ode_run(
    model: SystemModel,
    grid: TimeGrid,
    ic_overrides: dict | None = None,
    ss: StateSpace | None = None,
) -> OdeRun:
    """Bundle a derived model with its source signals and initial state."""
    if ss is None:
        ss = derive_state_space(model)
    signals = tuple(model.element(name).signal for name in ss.input_names)
    x0 = np.zeros(len(ss.state_names))
    for key, value in (ic_overrides or {}).items():
        x0[_state_slot(ss, key)] = value
    return OdeRun(ss, signals, grid, x0)


def _state_slot(ss: StateSpace, key: str) -> int:
    for i, name in enumerate(ss.state_names):
        if key == name or key == name.split(".")[0]:
            return i
    raise KeyError(f"no state variable for {key!r}; have {ss.state_names}")


def _roll_out(run: OdeRun, stepper) -> Trajectories:
    ss, grid = run.ss, run.grid
    times = grid.times
    k_steps, n_x = grid.steps, len(ss.state_names)
    xs = np.zeros((k_steps, n_x))
    x = np.asarray(run.x0, dtype=float)
    for k in range(k_steps):
        xs[k] = x
        if k + 1 < k_steps:
            x = stepper(x, times[k], grid.dt)
    n_u = len(ss.algebra.u_labels)
    n_y = len(ss.algebra.y_labels)
    u = np.zeros((k_steps, n_u))
    y = np.zeros((k_steps, n_y))
    for k in range(k_steps):
        u[k], y[k] = ss.algebra.reconstruct(xs[k], run.inputs_at(times[k]))
    return Trajectories(times, u, y, ss.algebra.u_labels, ss.algebra.y_labels)


def euler_integrate(run: OdeRun) -> Trajectories:
    """Forward Euler: x[k+1] = x[k] + dt * (A x[k] + B u[k])."""
    a, b = run.ss.a, run.ss.b

    def step(x, t, dt):
        return x + dt * (a @ x + b @ run.inputs_at(t))

    return _roll_out(run, step)


def rk4_integrate(run: OdeRun) -> Trajectories:
    """Classical 4th-order Runge-Kutta on the same fixed grid."""
    a, b = run.ss.a, run.ss.b

    def f(x, t):
        return a @ x + b @ run.inputs_at(t)

    def step(x, t, dt):
        k1 = f(x, t)
        k2 = f(x + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = f(x + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = f(x + dt * k3, t + dt)
        return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)

    return _roll_out(run, step)


def dc_steady_state(ss: StateSpace, u_const) -> np.ndarray:
    """x* = -A^-1 B u for a constant input vector."""
    u = np.atleast_1d(np.asarray(u_const, dtype=float))
    n = ss.a.shape[0]
    if n == 0:
        return np.zeros(0)
    if np.linalg.matrix_rank(ss.a) < n:
        raise SingularAError(
            "state matrix is singular; no unique DC operating point"
        )
    return np.linalg.solve(ss.a, -ss.b @ u)
