"""Exception and warning types.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its documented exit statuses without a lookup table.
"""

from __future__ import annotations


class PhaseError(Exception):
    """Base class for all library errors."""

    exit_code = 4


class ConfigError(PhaseError):
    exit_code = 2


class SchemaError(ConfigError):
    """Missing or ill-typed configuration field.

    ``pointer`` is a JSON pointer to the offending location.
    """

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer or "/"
        self.message = message
        super().__init__(f"{self.pointer}: {message}")


class DomainError(ConfigError):
    pass


# -- matrix level -----------------------------------------------------------

class NotHermitian(PhaseError):
    pass


class NotUnitTrace(PhaseError):
    pass


class NotPositive(PhaseError):
    pass


class ZeroTrace(PhaseError):
    """Trace of a unitary vanishes, so its scalar phase is undefined."""

    def __init__(self, dist: float):
        self.dist = dist
        super().__init__(f"trace vanishes; distance from scalar set is {dist:.6g}")


class NearZeroCrossing(PhaseError):
    pass


class JumpTooLarge(PhaseError):
    pass


# -- evolution ----------------------------------------------------------------

class EmptySpec(ConfigError):
    pass


class MissingSample(PhaseError):
    pass


class NonUnitaryPulse(ConfigError):
    pass


class OutOfRange(ConfigError):
    pass


class DimensionMismatch(ConfigError):
    pass


class NotCyclic(PhaseError):
    exit_code = 3


class MissingGenerators(PhaseError):
    pass


# -- gauge ----------------------------------------------------------------------

class DegenerateSpectrum(ConfigError):
    pass


class CountMismatch(ConfigError):
    pass


class GridMismatch(PhaseError):
    pass


class DegenerateSpectrumWarning(UserWarning):
    pass


class NonGlobalCyclicWarning(UserWarning):
    pass
