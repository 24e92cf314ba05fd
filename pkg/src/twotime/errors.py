"""Exception types shared across the package."""


class TwoTimeError(Exception):
    """Base class for errors raised by this package."""


class LayoutError(TwoTimeError, ValueError):
    """Bad subsystem layout, unknown label or label collision."""

    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class NotHermitianError(TwoTimeError, ValueError):
    pass


class NormalizationError(TwoTimeError, ValueError):
    """An amplitude set that must be normalized is not."""

    def __init__(self, message, field=None, norm=None):
        super().__init__(message)
        self.field = field
        self.norm = norm


class NearOrthogonalBoundaries(TwoTimeError, ValueError):
    """History and destiny vectors are (numerically) orthogonal."""

    def __init__(self, overlap_abs, eps):
        super().__init__(
            f"boundary vectors are orthogonal: |<des|his>| = {overlap_abs:.3e} <= {eps:.1e}"
        )
        self.overlap_abs = overlap_abs
        self.eps = eps


class NotDensityLike(TwoTimeError, ValueError):
    """Destiny is not (a phase times) the history vector."""

    def __init__(self, deviation):
        super().__init__(f"destiny differs from history, deviation {deviation:.3e}")
        self.deviation = deviation


class ImpossibleBoundaryPair(TwoTimeError, ValueError):
    """ABL denominator vanishes: the final state cannot follow the initial one."""

    def __init__(self, denominator):
        super().__init__(f"ABL denominator {denominator:.3e} vanishes")
        self.denominator = denominator


class DenseLimitExceeded(TwoTimeError, ValueError):
    def __init__(self, required, limit):
        super().__init__(f"dense backend needs {required} qubits, limit is {limit}")
        self.required = required
        self.limit = limit


class GridTooNarrow(TwoTimeError, ValueError):
    def __init__(self, outside_mass):
        super().__init__(f"grid misses probability mass {outside_mass:.3e}")
        self.outside_mass = outside_mass


class NumericGuardError(TwoTimeError, ArithmeticError):
    """A cross-check between two computation routes failed."""


class ScenarioError(TwoTimeError, ValueError):
    """Scenario validation failed.

    ``errors`` lists every problem found, each an exception instance
    (``NormalizationError`` for amplitude fields, plain ``ValueError`` or
    ``KeyError``-like messages otherwise).
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors))
