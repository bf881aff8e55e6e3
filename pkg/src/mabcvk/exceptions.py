"""Exception hierarchy.

Everything raised on purpose by the package derives from :class:`MABCVKError`.
The two middle layers, :class:`KeyProblem` and :class:`DataProblem`, are what
the command line maps onto exit codes 2 and 3.
"""


class MABCVKError(Exception):
    pass


# --- arithmetic -----------------------------------------------------------

class InvalidModulusError(MABCVKError, ValueError):
    pass


class NoInverseError(MABCVKError, ValueError):
    pass


class CapacityError(MABCVKError, ValueError):
    """Input exceeds a configured arithmetic bound."""

    def __init__(self, value, bound, what="value"):
        self.value = value
        self.bound = bound
        super().__init__(f"{what} {value} exceeds bound {bound}")


class DomainError(MABCVKError, ValueError):
    pass


class GenerationError(MABCVKError, RuntimeError):
    def __init__(self, message, attempts):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempts)")


# --- keys -----------------------------------------------------------------

class KeyProblem(MABCVKError, ValueError):
    pass


class MalformedKeyError(KeyProblem):
    pass


class NonPrimeKeyError(KeyProblem):
    pass


class AlphaRangeError(KeyProblem):
    pass


class KeyOrderError(KeyProblem):
    pass


class BlockWidthError(KeyProblem):
    pass


class InvalidKeyError(KeyProblem):
    """A key pair failed exhaustive validation for its block width."""

    def __init__(self, block, width):
        self.block = block
        self.width = width
        super().__init__(f"block value {block} has no substitution candidates at width {width}")


class EmptyCandidateError(KeyProblem):
    def __init__(self, p):
        self.p = p
        super().__init__(f"no substitution candidates for block value {p}")


class InvalidSubstitutionError(MABCVKError, ValueError):
    pass


# --- data -----------------------------------------------------------------

class DataProblem(MABCVKError, ValueError):
    pass


class CorruptBlockError(DataProblem):
    pass


class ContainerError(DataProblem):
    pass


class BadMagicError(ContainerError):
    pass


class BadFormatError(ContainerError):
    pass


class TruncatedPayloadError(ContainerError):
    pass


class KeyNotFoundError(MABCVKError, LookupError):
    def __init__(self, searched):
        self.searched = searched
        super().__init__(f"no key found after testing {searched} candidate keys")
