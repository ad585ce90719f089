"""Exception hierarchy. Each class carries the process exit code the CLI uses."""

from __future__ import annotations


class PhononHeraldError(Exception):
    exit_code = 1


class ConfigError(PhononHeraldError):
    exit_code = 2


class ParameterError(PhononHeraldError, ValueError):
    """A physical parameter is outside its domain or produced a non-finite value."""

    exit_code = 2

    def __init__(self, message: str, fields: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.fields = fields


class StabilityError(PhononHeraldError):
    """The linearized dynamics is unstable or too close to the stability boundary."""

    exit_code = 3


class ZeroHeraldingError(PhononHeraldError):
    """The field mode carries no excitation, so a photon subtraction cannot happen."""

    exit_code = 4


class NumericalIntegrityError(PhononHeraldError):
    exit_code = 5


class UnphysicalStateError(PhononHeraldError, ValueError):
    exit_code = 5


class TruncationError(PhononHeraldError):
    """Fock-space cutoff too small for the requested accuracy."""

    exit_code = 5
