"""Exception hierarchy shared by all ghartree modules."""


class GHartreeError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(GHartreeError, ValueError):
    pass


class PoisonedField(GHartreeError, FloatingPointError):
    """A field contains NaN or Inf samples."""


class KernelGridMismatch(GHartreeError, ValueError):
    pass


class OutOfRange(GHartreeError, ValueError):
    pass


class DomainError(GHartreeError, ValueError):
    pass


class WrongRegime(GHartreeError, ValueError):
    """The requested quantity is not defined for this criticality class."""


class NonpositiveEnergy(GHartreeError, ValueError):
    pass


class NoConvergence(GHartreeError, RuntimeError):
    pass


class Divergence(GHartreeError, RuntimeError):
    pass


class UnconvergedInput(GHartreeError, ValueError):
    pass


class NoRootInBracket(GHartreeError, ValueError):
    pass


class InsufficientSamples(GHartreeError, ValueError):
    pass


class CheckpointError(GHartreeError, IOError):
    pass
