"""Error taxonomy.

Everything raised on purpose derives from BecausError so callers can catch
one type. The CLI maps subclasses onto exit codes: input problems exit 3,
numerical/solver problems exit 4, outcome-assertion mismatches exit 2.
"""


class BecausError(Exception):
    """Base class for all errors raised by this package."""


# --- input / shape problems (CLI exit 3) ---

class LengthTooShortError(BecausError):
    """A time series is too short for the requested window depth."""


class DimensionMismatchError(BecausError):
    """Matrix or series dimensions are inconsistent with each other."""


class SeriesTooShortError(BecausError):
    """A statistical test needs more samples than were given."""


class InputFormatError(BecausError):
    """A file or argument could not be parsed; message names the location."""


# --- model-structure problems ---

class UnobservableSystemError(BecausError):
    """The (C, A) pair never reaches full observability rank up to tau=n."""


class GenerationExhaustedError(BecausError):
    """Rejection sampling hit its attempt bound; dimensions are likely
    structurally incompatible with the requested relation."""


class IdentifiabilityError(BecausError):
    """Generated data failed the Hankel rank condition after all retries."""


class DataIntegrityError(BecausError):
    """The initial window is not consistent with the data's own Hankel
    column space; the series do not come from a single trajectory."""


# --- statistics problems (CLI exit 4) ---

class DegenerateRegressionError(BecausError):
    """The unrestricted regression fits (numerically) perfectly, so the
    F-test's error variance is zero and no verdict is defined."""


class RankDeficientRegressionError(BecausError):
    """Collinear lag regressors; the OLS design has no unique fit."""


class DegenerateVarianceError(BecausError):
    """A series is constant (zero variance); the test statistic is undefined."""


# --- solver problems (CLI exit 4) ---

class SolverFailureError(BecausError):
    """The convex solver did not return a usable solution; carries the
    solver status string for diagnostics."""


class DegenerateReferenceError(BecausError):
    """Probe reference r = 0 with a zero initial window: both fictitious
    targets are identically zero and the ratios are meaningless."""


class OutcomeMismatchError(BecausError):
    """A reproduction run produced a different qualitative outcome than the
    one it asserts (CLI exit 2)."""
