# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

"""
Exceptions raised by the numerical layer.
Orchestration code converts them to Status objects; proof routines convert them
to certificates with a failure reason.
"""


class LibrateError(Exception):
    """Base class of every error raised inside librate."""


"""Interval core."""

class DivisionByZeroInterval(LibrateError, ZeroDivisionError):
    pass

class DomainError(LibrateError, ValueError):
    pass

class SingularEnclosure(LibrateError):
    """Some member of an interval matrix may be singular."""

class IsolationFailed(LibrateError):
    pass


"""Model and integrator."""

class CollisionBox(LibrateError):
    """A box comes closer to a primary than the collision threshold."""

class StepFailure(LibrateError):
    pass

class BlowUp(LibrateError):
    pass

class NoTransversalCrossing(LibrateError):
    pass

class ConstraintUndecided(LibrateError):
    pass


"""Proof routines."""

class EigenFailure(LibrateError):
    pass

class ResonanceDivisionFailure(LibrateError):
    pass

class InclusionFailed(LibrateError):
    pass

class BadBlockStructure(LibrateError):
    pass

class DenominatorZero(LibrateError):
    pass

class SignUndecided(LibrateError):
    pass

class ChainGap(LibrateError):
    pass


"""Orchestration."""

class ConfigError(LibrateError):
    pass

class MissingCertificate(LibrateError):
    pass


INTEGRATOR_ERRORS = (CollisionBox, StepFailure, BlowUp, NoTransversalCrossing, ConstraintUndecided)
PROOF_ERRORS = INTEGRATOR_ERRORS + (DivisionByZeroInterval, SingularEnclosure)
