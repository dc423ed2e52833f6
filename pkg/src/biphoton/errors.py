"""Exception hierarchy shared by all modules (mapped to CLI exit codes)."""


class BiphotonError(Exception):
    exit_code = 1


class InvalidArgument(BiphotonError, ValueError):
    exit_code = 2


class FormatError(BiphotonError, ValueError):
    exit_code = 2


class NumericalError(BiphotonError, ArithmeticError):
    exit_code = 3


class DesignInfeasible(BiphotonError):
    exit_code = 4
