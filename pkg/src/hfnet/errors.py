"""Exception types shared across the package."""


class HfnetError(Exception):
    """Base class for all hfnet errors."""


class InvalidModelError(HfnetError):
    """A model failed validation where a clean model was required."""

    def __init__(self, report):
        self.report = report
        super().__init__("model failed validation:\n" + "\n".join(report))


class UnknownDomainError(HfnetError):
    """A bond-graph element or junction has no resolvable physical domain."""


class UnsupportedJunctionTopologyError(HfnetError):
    """The junction structure cannot be reduced to a node-element graph."""


class AcrossSourceLoopError(HfnetError):
    """An across-variable source closes a loop of across-variable sources."""


class ThroughSourceCutsetError(HfnetError):
    """The spanning tree cannot be completed without a through-variable source."""


class DimensionMismatchError(HfnetError):
    """Vector or matrix dimensions do not match the net or state space."""


class RankDeficientError(HfnetError):
    """The reduced incidence matrix is rank deficient (floating subnetwork)."""

    def __init__(self, message, nodes=()):
        self.nodes = tuple(nodes)
        super().__init__(message)


class SingularAlgebraicSystemError(HfnetError):
    """The algebraic elimination block has no unique solution."""

    def __init__(self, message, variables=()):
        self.variables = tuple(variables)
        super().__init__(message)


class DerivativeFeedthroughError(HfnetError):
    """The model needs input-derivative terms (dependent storage); unsupported."""


class UnderdeterminedError(HfnetError):
    """The assembled constraint system has free variables."""

    def __init__(self, message, variables=()):
        self.variables = tuple(variables)
        super().__init__(message)


class InconsistentError(HfnetError):
    """The assembled constraint system has no solution."""

    def __init__(self, message, row_tags=(), residual=None):
        self.row_tags = tuple(row_tags)
        self.residual = residual
        super().__init__(message)


class LabelMismatchError(HfnetError):
    """Two trajectory sets do not share grids or variable labels."""


class SingularAError(HfnetError):
    """The state matrix is singular; no unique DC operating point."""
