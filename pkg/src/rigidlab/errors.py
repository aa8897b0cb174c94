"""Exception types shared across the package."""


class RigidLabError(Exception):
    """Base class for every error raised by rigidlab."""


class PrecisionExhausted(RigidLabError):
    """A certified decision needed more quotients or bits than available."""


class SequenceTooShort(RigidLabError):
    """A rigidity sequence without a tail law ran out of materialized terms."""


class RetriesExhausted(RigidLabError):
    """The measure extension kept failing verification."""


class VerificationFailed(RigidLabError):
    """A certified inequality was violated."""

    def __init__(self, message, check=None):
        super().__init__(message)
        self.check = check


class CertificationFailed(RigidLabError):
    """A trigonometric polynomial could not be certified within the degree cap."""


class BlockTooLarge(RigidLabError):
    """A sequence block is too wide to enumerate and no cap was given."""


class ResonanceDetected(RigidLabError):
    """Resonance could not be decided at the available precision."""


class ResourceLimit(RigidLabError):
    """A configured time or size budget was exceeded."""
