"""Exception hierarchy.

Input problems derive from :class:`InputError`, numerical breakdowns from
:class:`NumericalError`; the CLI maps these to exit codes 2 and 3.
"""


class IntertwineError(Exception):
    pass


class InputError(IntertwineError, ValueError):
    pass


class NumericalError(IntertwineError, ArithmeticError):
    pass


# graph model
class ParseError(InputError):
    pass


class LoopEdge(InputError):
    def __init__(self, vertex):
        super().__init__(f"loop edge at vertex {vertex!r}")
        self.vertex = vertex


class DuplicateEdge(InputError):
    def __init__(self, u, v):
        super().__init__(f"duplicate edge {{{u!r}, {v!r}}}")
        self.edge = (u, v)


class Disconnected(InputError):
    def __init__(self, vertex):
        super().__init__(f"vertex {vertex!r} is not reachable from the first vertex")
        self.vertex = vertex


class UnknownVertex(InputError):
    def __init__(self, vertex):
        super().__init__(f"edge refers to unknown vertex {vertex!r}")
        self.vertex = vertex


class InvalidSize(InputError):
    pass


class GraphMismatch(InputError):
    pass


# spectral data
class ConvergenceFailure(NumericalError):
    def __init__(self, tol, achieved):
        super().__init__(f"eigen-residual {achieved:.3e} exceeds tolerance {tol:.3e}")
        self.tol = tol
        self.achieved = achieved


class AmbiguousBoundary(InputError):
    def __init__(self, eigenvalue, endpoint):
        super().__init__(
            f"interval endpoint {endpoint!r} is too close to spectral point {eigenvalue!r}"
        )
        self.eigenvalue = eigenvalue
        self.endpoint = endpoint


class EndpointOnSpectrum(InputError):
    def __init__(self, endpoint, reason=""):
        msg = f"interval endpoint {endpoint!r} violates the admissibility condition"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.endpoint = endpoint


# scalar maps
class SigmaCollision(InputError):
    def __init__(self, band, mu):
        super().__init__(f"preimage of mu={mu!r} in band {band} lies in the forbidden set")
        self.band = band
        self.mu = mu


class OutOfRange(InputError):
    pass


class SigmaPole(NumericalError):
    def __init__(self, z):
        super().__init__(f"z={z!r} is a pole (forbidden set: sin(sqrt z) = 0)")
        self.z = z


class SingularWeyl(NumericalError):
    def __init__(self, z, inv_norm):
        super().__init__(f"Weyl matrix nearly singular at z={z!r} (|M^-1| = {inv_norm:.3e})")
        self.z = z
        self.inv_norm = inv_norm


# oracle
class MultiplicityMismatch(NumericalError):
    pass


class NearSingular(NumericalError):
    pass
