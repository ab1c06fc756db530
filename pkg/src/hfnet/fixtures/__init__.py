"""Bundled example systems with their published simulation grids.

`HFNET_FIXTURES` in the environment points fixture lookup at an alternate
directory (same file names).
"""

from __future__ import annotations

import os
from importlib import resources

from ..model import SystemModel, load_model
from ..trajectories import TimeGrid

# name -> (dt seconds, steps); horizons as used in the source experiments
FIXTURE_GRIDS: dict[str, tuple[float, int]] = {
    "electrical": (1e-4, 100),
    "translational": (0.02, 1000),
    "rotational": (0.1, 150),
    "fluidic": (0.02, 500),
    "thermal": (0.1, 50),
    "electromechanical": (0.001, 300),
}

FIXTURE_NAMES = tuple(FIXTURE_GRIDS)


def fixture_dir() -> str | None:
    return os.environ.get("HFNET_FIXTURES")


def fixture_path(name: str, bondgraph: bool = False) -> str:
    fname = f"{name}_bg.json" if bondgraph else f"{name}.json"
    override = fixture_dir()
    if override:
        return os.path.join(override, fname)
    return str(resources.files(__package__).joinpath(fname))


def fixture_grid(name: str) -> TimeGrid:
    dt, steps = FIXTURE_GRIDS[name]
    return TimeGrid(dt, steps)


def load_fixture(name: str, bondgraph: bool = False) -> SystemModel:
    return load_model(fixture_path(name, bondgraph))
