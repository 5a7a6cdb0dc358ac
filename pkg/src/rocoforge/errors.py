"""Exception types shared across the toolkit."""


class RocoforgeError(Exception):
    """Base class for all toolkit errors."""


class CorpusError(RocoforgeError):
    """Malformed or inconsistent corpus input."""


class RegistryError(RocoforgeError):
    """Concept registry file missing required content."""


class UnmappedWord(RocoforgeError):
    """A word has no concept group."""


class NoCandidate(RocoforgeError):
    """A sampling pool is empty after exclusions."""


class ProviderUnavailable(RocoforgeError):
    """Embedding backend unreachable after bounded retries."""


class ProviderContractViolation(RocoforgeError):
    """Embedding backend response breaks the wire contract."""


class NumericalDegeneracy(RocoforgeError):
    """A zero-norm embedding was produced; cosine is undefined."""


class NoSourceWord(RocoforgeError):
    """Caption has no eligible noun to score."""


class EmptyConsensus(RocoforgeError):
    """Consensus requested over zero model choices."""


class NoOpSubstitution(RocoforgeError):
    """Target word equals the source word."""


class InvalidImage(RocoforgeError):
    """Image is degenerate (zero-sized) or a patch cannot fit."""


class ManifestError(RocoforgeError):
    """A manifest references an id that is not in the corpus."""


class ShapeError(RocoforgeError):
    """Embedding matrices disagree on provider or dimensionality."""


class UndefinedDropRate(RocoforgeError):
    """Drop rate is undefined for a zero base recall."""
