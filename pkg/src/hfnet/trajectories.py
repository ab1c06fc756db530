"""Time grid, labeled trajectory container, and trajectory comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import HfnetError, LabelMismatchError


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of K samples at times k*dt, k = 1..K; the initial
    conditions land on the first sample."""

    dt: float
    steps: int

    def __post_init__(self):
        if not self.dt > 0:
            raise HfnetError(f"time step must be positive, got {self.dt}")
        if self.steps < 2:
            raise HfnetError(f"need at least 2 steps, got {self.steps}")

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.steps + 1) * self.dt


@dataclass(frozen=True)
class Trajectories:
    """Through (u) and across (y) series on a grid, column per variable."""

    times: np.ndarray
    u: np.ndarray  # K x n_capabilities
    y: np.ndarray  # K x n_nonground_buffers
    u_labels: tuple[str, ...]
    y_labels: tuple[str, ...]

    def column(self, label: str) -> np.ndarray:
        if label in self.u_labels:
            return self.u[:, self.u_labels.index(label)]
        if label in self.y_labels:
            return self.y[:, self.y_labels.index(label)]
        raise KeyError(label)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(f"U_{c}" for c in self.u_labels) + tuple(
            f"y_{b}" for b in self.y_labels
        )

    def to_csv(self, path):
        header = "time," + ",".join(self.labels)
        data = np.column_stack([self.times, self.u, self.y])
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for sample in data:
                fh.write(",".join(repr(float(v)) for v in sample) + "\n")


@dataclass(frozen=True)
class Deviation:
    label: str
    max_abs: float
    max_rel: float


@dataclass(frozen=True)
class ComparisonReport:
    deviations: tuple[Deviation, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return all(d.max_rel <= self.tol for d in self.deviations)

    @property
    def worst(self) -> Deviation:
        return max(self.deviations, key=lambda d: d.max_rel)

    def lines(self) -> list[str]:
        out = []
        for d in self.deviations:
            verdict = "ok" if d.max_rel <= self.tol else "FAIL"
            out.append(
                f"{d.label}: max |dev| = {d.max_abs:.3e}, "
                f"relative = {d.max_rel:.3e} [{verdict}]"
            )
        status = "PASS" if self.passed else "FAIL"
        out.append(f"comparison {status} at tolerance {self.tol:g}")
        return out


def compare(a: Trajectories, b: Trajectories, tol: float = 1e-6) -> ComparisonReport:
    """Per-variable deviations between two runs on the same grid.

    The relative deviation is scale-normalized: max |a-b| over the variable's
    peak magnitude across both runs. Pointwise ratios would be meaningless at
    the rest samples every fixture starts from.
    """
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times):
        raise LabelMismatchError("trajectory grids differ")
    if set(a.u_labels) != set(b.u_labels) or set(a.y_labels) != set(b.y_labels):
        raise LabelMismatchError(
            "variable label sets differ: "
            f"{sorted(set(a.u_labels) ^ set(b.u_labels))} "
            f"{sorted(set(a.y_labels) ^ set(b.y_labels))}"
        )
    devs = []
    for label in a.u_labels + a.y_labels:
        sa, sb = a.column(label), b.column(label)
        max_abs = float(np.max(np.abs(sa - sb)))
        scale = max(float(np.max(np.abs(sa))), float(np.max(np.abs(sb))))
        max_rel = max_abs / scale if scale > 0 else 0.0
        prefix = "U_" if label in a.u_labels else "y_"
        devs.append(Deviation(prefix + label, max_abs, max_rel))
    return ComparisonReport(tuple(devs), tol)
