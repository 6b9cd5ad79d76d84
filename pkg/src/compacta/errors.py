"""Exception types shared across the package.

Each CLI-facing failure mode maps to one subclass so the command layer can
translate exceptions into stable exit codes without string matching.
"""

from __future__ import annotations


class CompactaError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(CompactaError):
    """Invalid input data (parameter ranges, config schema, grid specs).

    ``field`` holds a dotted path such as ``"materials.rho_s"`` when the
    error originates from a config file, so diagnostics can point at the
    offending entry.
    """

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


class SingularModelError(CompactaError):
    """A model quantity required for elimination or recovery vanished.

    Typical trigger: the fluid-gradient coupling of the first descriptor is
    zero, which makes the volume constraint unsolvable for Q1.
    """


class UnsupportedGeometryError(CompactaError):
    """An operation restricted to cubic cells received a non-cubic cell."""


class BracketingError(CompactaError):
    """A root bracket did not contain a sign change."""


class DivergenceError(CompactaError):
    """The fixed-step integrator produced a non-finite state."""

    def __init__(self, message: str, first_bad_time: float | None = None):
        self.first_bad_time = first_bad_time
        super().__init__(message)


class OracleConvergenceError(CompactaError):
    """Step halving hit its cap before reaching the requested tolerance.

    ``last_gap`` records the self-consistency gap of the final attempt so a
    caller can judge how far away convergence was.
    """

    def __init__(self, message: str, last_gap: float | None = None):
        self.last_gap = last_gap
        super().__init__(message)


class RegimeError(CompactaError):
    """An operation is undefined in the current damping regime.

    Example: auditing the reference constant formulas at critical damping,
    where the root separation they divide by is zero.
    """
