"""Exception hierarchy. Each class carries the CLI exit status it maps to."""


class DbarError(Exception):
    exit_code = 1


class InvariantError(DbarError):
    exit_code = 1


class ParameterError(DbarError, ValueError):
    exit_code = 2


class GeometryError(DbarError, ValueError):
    exit_code = 3


class DomainMembershipError(DbarError, ValueError):
    exit_code = 3


class SingularityError(DbarError, ZeroDivisionError):
    exit_code = 3


class DataError(DbarError, ValueError):
    exit_code = 3


class PreconditionError(DbarError):
    exit_code = 3


class UnsupportedError(DbarError, NotImplementedError):
    exit_code = 3
