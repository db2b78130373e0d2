"""Error types shared across modules.

The CLI maps these onto exit codes: ConfigError -> 2, ConvergenceError -> 3,
DimensionCapError -> 4, everything else -> 1.
"""


class GravlatError(Exception):
    """Base class for all library errors."""


class DegenerateMetricError(GravlatError):
    """Metric signature violated: a spatial diagonal entry is <= 0."""


class TopologicalLimitError(GravlatError):
    """G = 0: the momentum-sector coefficient of the quadratic form diverges."""


class MasslessLimitError(GravlatError):
    """mu = 0: the Gaussian elimination of the geometry has no inverse."""


class DiracRegimeError(GravlatError):
    """Couplings outside 0 < J_z < 2*J_x: no isolated conical points."""


class InversionError(GravlatError):
    """Coupling <-> fluctuation dictionary hit an unreachable value."""


class DimensionCapError(GravlatError):
    """Requested many-body object exceeds the configured size cap."""


class ConvergenceError(GravlatError):
    """Iterative eigensolver failed to reach the required residual."""


class ConfigError(GravlatError):
    """Invalid run configuration; carries the full list of problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
