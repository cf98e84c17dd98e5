"""Typed errors shared across the package.

Every precondition failure raises one of these, so callers (and the CLI)
can name the failure class instead of pattern-matching messages.
"""


class LatdualError(Exception):
    """Base class for all package errors."""


class MalformedRotation(LatdualError):
    """A dart is missing, duplicated, or unpaired in a rotation system."""


class EulerMismatch(LatdualError):
    """Computed Euler characteristic contradicts the declared surface."""


class NotATorus(LatdualError):
    """Operation requires a torus map."""


class DegenerateMap(LatdualError):
    """Map has a loop or bridge edge that breaks the quadrangulation."""


class DegenerateDual(LatdualError):
    """Dual map has a loop edge (primal bridge); duality prefactor invalid."""


class SizeTooSmall(LatdualError):
    """Requested grid is below the minimum supported size."""


class TooLarge(LatdualError):
    """Enumeration would exceed the configured work cap."""


class WrongGroup(LatdualError):
    """Operation is specific to another spin group (e.g. Ising-only)."""


class SpecInvalid(LatdualError):
    """A correlator specification violates its invariants."""


class NotAdjacent(LatdualError):
    """Vertex and face of a spinor insertion are not incident."""


class PathInvalid(LatdualError):
    """A supplied path is not a valid walk on the intended graph."""


class SingularSystem(LatdualError):
    """Linear system is singular (e.g. empty boundary on the sphere)."""


class ChargeImbalance(LatdualError):
    """Charge distribution does not sum to zero where required."""


class TruncationInsufficient(LatdualError):
    """Lattice-sum truncation cannot certify the requested tail bound."""


class CoincidentPoints(LatdualError):
    """Continuum correlator evaluated at coincident points."""


class DomainError(LatdualError):
    """Numeric parameter outside its allowed range."""


class ZeroWeightEdge(LatdualError):
    """Dual FK weight q/w undefined because w(e) = 0."""


class NotInteger(LatdualError):
    """Operation requires integer q."""


class NotFourRegular(LatdualError):
    """Six-vertex model requires a 4-regular map."""


class InvalidIce(LatdualError):
    """Edge orientation violates the ice rule."""


class NotPerfectMatching(LatdualError):
    """Edge set is not a perfect matching."""


class NotBipartite(LatdualError):
    """Kasteleyn solver requires a bipartite graph."""


class NotPlanar(LatdualError):
    """Kasteleyn solver requires a sphere embedding."""


class QOutOfRange(LatdualError):
    """Baxter measure requires 0 < q < 4."""


class ParseError(LatdualError):
    """Malformed structured-text input file."""


class UnknownSuite(LatdualError):
    """Named check suite does not exist."""


class ModelError(LatdualError):
    """Task references a model inconsistent with the requested operation."""
