"""
exceptions

Errors raised by the toolkit. Gate rejections (no metric exists for the requested data) derive
from GateRejection so the command line can tell them apart from failures.
"""


class GateRejection(Exception):
    """
    GateRejection is the base class for mathematically meaningful negatives: the requested
    object does not exist for the given cone data.
    """

    pass


class NotSpherical(GateRejection):
    """
    NotSpherical is raised when a cone-angle vector does not classify as Spherical on the
    2-sphere (or has no projection onto the Euclidean slice).
    """

    pass


class NotUniformizable(GateRejection):
    """
    NotUniformizable is raised when the classification gate rejects a spec before solving:
    outside the Troyanov region, two unequal cones, or a case the existence theorem does not
    cover.
    """

    def __init__(self, message: str, tag=None):
        super().__init__(message)
        self.tag = tag


class OutOfChart(Exception):
    """
    OutOfChart is raised when a model metric is evaluated outside its chart domain.
    """

    pass


class GridTooCoarse(Exception):
    """
    GridTooCoarse is raised when a radial mode problem has fewer than 64 grid nodes.
    """

    pass


class NoDiscreteSpectrum(Exception):
    """
    NoDiscreteSpectrum is raised when asking for eigenvalues of a problem without an outer
    boundary condition (the open cusp has continuous spectrum).
    """

    pass


class BoundViolated(Exception):
    """
    BoundViolated is raised when a football mode violates the first eigenvalue bound, or when
    equality shows up somewhere rigidity forbids it.
    """

    def __init__(self, message: str, mode: int):
        super().__init__(message)
        self.mode = mode


class DegenerateFit(Exception):
    """
    DegenerateFit is raised when an exponent fit has nothing to fit (the signal underflows or
    vanishes on the fitting window).
    """

    pass


class NotIndicialRoot(Exception):
    """
    NotIndicialRoot is raised when an intertwining check is requested at an exponent that is
    not an indicial root of the source operator on the given mode.
    """

    pass


class InvalidNu(Exception):
    """
    InvalidNu is raised when the weight parameter nu is not admissible for some cone; the
    largest admissible value is attached.
    """

    def __init__(self, message: str, max_admissible=None):
        super().__init__(message)
        self.max_admissible = max_admissible


class NewtonDiverged(Exception):
    """
    NewtonDiverged is raised when the line search cannot decrease the residual norm.
    """

    pass


class SingularLinearization(Exception):
    """
    SingularLinearization is raised when the monitored eigenvalue of the linearized Liouville
    operator drops below the singular floor.
    """

    pass


class MeshTooCoarse(Exception):
    """
    MeshTooCoarse is raised when a mesh cannot support the requested computation, for example
    too few graded rings for an exponent fit.
    """

    pass


class ConfigError(Exception):
    """
    ConfigError is raised for unreadable or invalid configuration and spec files. The message
    carries the line/column or field path of the problem.
    """

    pass


class AcceptanceFailure(Exception):
    """
    AcceptanceFailure is raised by an acceptance criterion whose check does not hold.
    """

    pass
