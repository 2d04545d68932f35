"""Exception hierarchy.

Each error carries an ``exit_code`` used by the command-line interface:
2 for bad input, 3 for geometric or numerical failures, 4 for resource caps.
"""

from __future__ import annotations


class ConvexCoreError(Exception):
    exit_code = 3


class InputError(ConvexCoreError):
    exit_code = 2


class GeometryError(ConvexCoreError):
    exit_code = 3


class ResourceError(ConvexCoreError):
    exit_code = 4


# projlin
class ZeroVector(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotInvertible(InputError):
    pass


class NotCollinear(GeometryError):
    pass


class DegenerateQuadruple(GeometryError):
    pass


class NumericalFailure(GeometryError):
    pass


class NotProximal(GeometryError):
    pass


# domains
class NotInterior(GeometryError):
    pass


class CoincidentPoints(GeometryError):
    pass


class NotProperlyConvex(GeometryError):
    pass


class HyperplaneMeetsClosure(GeometryError):
    pass


class ChartDoesNotBound(GeometryError):
    pass


class NoConsistentLift(GeometryError):
    pass


# groups
class BallTooLarge(ResourceError):
    pass


class DomainNotInvariant(GeometryError):
    pass


# limitsets
class Degenerate(GeometryError):
    pass


# pqgeom
class NotOnBoundary(GeometryError):
    pass


class NotTransverse(GeometryError):
    pass


class OutsideChart(GeometryError):
    pass


# gallery
class BadParameters(InputError):
    pass


class BadDimension(InputError):
    pass


class PingPongFailed(GeometryError):
    pass


class LiftMissing(InputError):
    pass


class SelfCheckFailed(GeometryError):
    pass
