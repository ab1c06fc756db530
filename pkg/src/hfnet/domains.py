"""Physical domains, observer views, and per-domain variable names.

Every lumped-parameter domain handled here carries one across quantity
(measured between a point and the domain reference) and one through quantity
(flowing along an element). Which of the pair acts as the bond-graph effort
variable is fixed by the domain's observer view: electrical, fluidic, and
thermal systems are described from a fixed spatial frame (Eulerian), the two
mechanical domains from the body frame (Lagrangian).
"""

from __future__ import annotations

import enum


class Domain(enum.Enum):
    ELECTRICAL = "electrical"
    TRANSLATIONAL = "translational"
    ROTATIONAL = "rotational"
    FLUIDIC = "fluidic"
    THERMAL = "thermal"


class View(enum.Enum):
    EULERIAN = "eulerian"
    LAGRANGIAN = "lagrangian"


_VIEW = {
    Domain.ELECTRICAL: View.EULERIAN,
    Domain.FLUIDIC: View.EULERIAN,
    Domain.THERMAL: View.EULERIAN,
    Domain.TRANSLATIONAL: View.LAGRANGIAN,
    Domain.ROTATIONAL: View.LAGRANGIAN,
}

ACROSS_QUANTITY = {
    Domain.ELECTRICAL: "voltage",
    Domain.TRANSLATIONAL: "velocity",
    Domain.ROTATIONAL: "angular velocity",
    Domain.FLUIDIC: "pressure",
    Domain.THERMAL: "temperature",
}

THROUGH_QUANTITY = {
    Domain.ELECTRICAL: "current",
    Domain.TRANSLATIONAL: "force",
    Domain.ROTATIONAL: "torque",
    Domain.FLUIDIC: "volumetric flow rate",
    Domain.THERMAL: "heat flow rate",
}


def domain_view(domain: Domain) -> View:
    """Observer view fixed per domain (decides the effort/across pairing)."""
    return _VIEW[domain]


def parse_domain(text: str) -> Domain:
    try:
        return Domain(text.lower())
    except ValueError:
        raise ValueError(f"unknown physical domain {text!r}") from None
