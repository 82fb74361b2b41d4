"""Exception types shared across the package."""


class HtplusError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(HtplusError, ValueError):
    """Code parameters violate a construction invariant."""


class ZeroInverse(HtplusError, ZeroDivisionError):
    """Multiplicative inverse of zero requested."""


class SingularMatrix(HtplusError):
    """A linear system has no unique solution."""


class SingularSubmatrix(SingularMatrix):
    """A k-subset generator submatrix is rank deficient (non-MDS witness)."""


class SingularRepairSystem(SingularMatrix):
    """A repair-time linear system is singular; unreachable for verified codes."""


class SingularPairing(SingularMatrix):
    """A paired 2x2 block system is singular; unreachable for valid theta."""


class DimensionMismatch(HtplusError, ValueError):
    """Input array dimensions do not match the code parameters."""


class SchedulingInfeasible(HtplusError):
    """The index-array scheduler could not place every required pair."""


class FieldTooSmall(HtplusError):
    """Coefficient search exhausted and the field is below the sufficiency bound."""


class MdsSearchExhausted(HtplusError):
    """Coefficient search exhausted despite a sufficiently large field."""


class NotEnoughShards(HtplusError):
    """Fewer than k distinct node columns supplied to a decode."""


class InvalidNode(HtplusError, ValueError):
    """Node id out of range for the requested operation."""


class MissingRead(HtplusError):
    """A repair plan read references a shard that was not supplied."""


class VerificationFailure(HtplusError):
    """A verified property does not hold; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class RepairMismatch(VerificationFailure):
    """Executed repair output differs from the original column."""


class BoundViolation(VerificationFailure):
    """A measured repair read count falls outside its proven bounds."""


class ShardFormatError(HtplusError):
    """Base class for shard (de)serialization failures."""


class CorruptHeader(ShardFormatError):
    """Bad magic, failed CRC, or inconsistent header fields."""


class TruncatedPayload(ShardFormatError):
    """Shard payload shorter than the header promises."""


class UnsupportedVersion(ShardFormatError):
    """Shard format version not understood by this implementation."""


class HeaderMismatch(ShardFormatError):
    """Shards from incompatible encode runs mixed in one decode."""
