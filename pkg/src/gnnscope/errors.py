"""Engine error types.

Every error carries a stable machine-readable ``name`` (the class name) that
is used verbatim in CLI messages and service error payloads, so scripted
consumers can match on it.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all engine errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# graph construction / access
class IndexOutOfRange(EngineError):
    pass


class RaggedFeatures(EngineError):
    pass


class DuplicateEdge(EngineError):
    pass


class NotANeighbor(EngineError):
    pass


class EmptySeeds(EngineError):
    pass


class NotAPermutation(EngineError):
    pass


# numeric kernels
class NonFiniteInput(EngineError):
    pass


class ShapeMismatch(EngineError):
    pass


class EmptyGraph(EngineError):
    pass


# bundles / model assembly
class ParseError(EngineError):
    pass


class UnsupportedVersion(EngineError):
    pass


class NonFiniteWeight(EngineError):
    pass


class SpecMismatch(EngineError):
    pass


class InvalidTarget(EngineError):
    pass


class UnknownModel(EngineError):
    pass


# datasets
class UnknownDataset(EngineError):
    pass


class CorruptDataFile(EngineError):
    pass


class SchemaError(EngineError):
    pass


class InvalidSelector(EngineError):
    pass


# tracing
class StageOrderViolation(EngineError):
    pass


class UnknownStep(EngineError):
    pass


class InputStepHasNoProvenance(EngineError):
    pass


class UnknownLayer(EngineError):
    pass


class UnknownNode(EngineError):
    pass


class IncompleteTrace(EngineError):
    pass


class TooLargeToTrace(EngineError):
    pass


# service
class TraceEvicted(EngineError):
    pass


class UnknownTrace(EngineError):
    pass
