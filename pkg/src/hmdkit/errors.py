"""Exception hierarchy shared by the operators, the container reader and the CLI."""


class HmdError(Exception):
    """Base class for every error raised by hmdkit."""


class ShapeError(HmdError, ValueError):
    """Operand dimensions do not line up."""


class ParameterError(HmdError, ValueError):
    """A size, rank or factor argument is out of its admissible range."""


class InfeasibleError(HmdError, ValueError):
    """A requested compression factor cannot be met by the scheme."""


class FormatError(HmdError):
    """A weight container could not be decoded.

    Every subclass carries a distinct ``code`` so callers (and the CLI) can
    tell failure modes apart without string matching.
    """

    code = "format"


class BadMagicError(FormatError):
    code = "bad_magic"


class TruncatedError(FormatError):
    """The file ends before the header or manifest is complete."""

    code = "truncated"


class LengthMismatchError(FormatError):
    """Payload size disagrees with the manifest-declared total."""

    code = "length_mismatch"


class UnknownKindError(FormatError):
    code = "unknown_kind"


class ManifestError(FormatError):
    """Manifest parses but describes an invalid object."""

    code = "bad_manifest"
