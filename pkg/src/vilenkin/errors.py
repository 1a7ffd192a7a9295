"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class VilenkinError(ValueError):
    """Base class for every error raised by this package."""


class InvalidRadixError(VilenkinError):
    pass


class CapacityError(VilenkinError):
    pass


class OutOfRangeError(VilenkinError):
    pass


class SpecMismatchError(VilenkinError):
    pass


class EmptySumError(VilenkinError):
    pass


class InvalidExponentError(VilenkinError):
    pass


class SupportViolationError(VilenkinError):
    pass


class DegenerateAtomError(VilenkinError):
    pass


class HypothesisViolationError(VilenkinError):
    """An argument lies outside the hypotheses of the identity being checked."""


class SelectionFailureError(VilenkinError):
    pass


class ConfigError(VilenkinError):
    pass
