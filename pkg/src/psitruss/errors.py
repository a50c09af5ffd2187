"""Exception types shared across the solver library."""


class ShapeMismatchError(ValueError):
    """Array lengths disagree with the mesh (wrong number of elements/DOFs)."""


class GeometryError(ValueError):
    """Degenerate geometry, e.g. a zero-length bar."""


class ModelingError(RuntimeError):
    """The model is ill-posed: condensed stiffness is not SPD (rigid-body
    modes remain) or an iteration matrix became singular."""


class FileFormatError(ValueError):
    """A problem/results/weight file failed validation.

    ``location`` pins the offending entry, e.g. ``elements[3]``.
    """

    def __init__(self, message, path=None, location=None):
        self.path = path
        self.location = location
        prefix = ""
        if path is not None:
            prefix += f"{path}: "
        if location is not None:
            prefix += f"{location}: "
        super().__init__(prefix + message)


class ProjectionError(RuntimeError):
    """A per-element material projection failed to converge.

    Carries the element index (when known) and the last strain iterate so a
    failing run can be diagnosed post mortem.
    """

    def __init__(self, message, element=None, last_strain=None):
        self.element = element
        self.last_strain = last_strain
        if element is not None:
            message = f"element {element}: {message}"
        super().__init__(message)


class RateFitError(ValueError):
    """An error sequence is unsuitable for convergence-rate estimation."""
