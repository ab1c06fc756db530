"""hfnet: lumped-parameter netlists, engineering system nets, and their
discrete-time flow solution, with state-space derivation as the cross-check.
"""

from .bondgraph import (
    BondGraphModel,
    bondgraph_from_dict,
    bondgraph_to_lineargraph,
    load_bondgraph,
)
from .domains import Domain, View, domain_view
from .errors import (
    AcrossSourceLoopError,
    DerivativeFeedthroughError,
    DimensionMismatchError,
    HfnetError,
    InconsistentError,
    InvalidModelError,
    LabelMismatchError,
    RankDeficientError,
    SingularAError,
    SingularAlgebraicSystemError,
    ThroughSourceCutsetError,
    UnderdeterminedError,
    UnknownDomainError,
    UnsupportedJunctionTopologyError,
)
from .esn import (
    Capability,
    EngineeringSystemNet,
    Marking,
    build_esn,
    esn_step,
    reduced_incidence,
)
from .hfnmcf import ConstraintSystem, RowTag, Solution, VariableLayout, assemble, solve
from .model import (
    Element,
    Kind,
    Node,
    SampledSeries,
    Step,
    SystemModel,
    load_model,
    save_model,
    validate_model,
)
from .normal_tree import NormalTree, StateVar, build_normal_tree
from .oracle import OdeRun, dc_steady_state, euler_integrate, make_ode_run, rk4_integrate
from .statespace import StateSpace, derive_state_space, law_listing
from .trajectories import ComparisonReport, TimeGrid, Trajectories, compare

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
