# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

from enum import Enum


"""Status signals."""

class StatusFlags(Enum):
    SUCCESS = 1
    FAILED = -1
    ABORTED = -2
    UNEXPECTED = -3
    SKIPPED = -4
    UNKNOWN = -6

class StatusReason(Enum):
    NONE = 0
    SUCCESSFUL_TERMINATION = 1
    CONFIG_ERROR = 2
    PROOF_FAILURE = 3  # a certificate came back Failed
    MISSING_CERTIFICATE = 4
    OTHER = 5

"""Certificate states."""

class CertificateStatus(Enum):
    VERIFIED = 1
    FAILED = -1

class FailureReason(Enum):
    NONE = 0
    NEWTON_FAILED = 1
    SLOPE_FAILED = 2
    INTEGRATOR_ERROR = 3
    ENERGY_DERIVATIVE_VANISHES = 4
    EIG_SPLIT_FAILED = 5
    CC1_FAILED = 6
    CC2_FAILED = 7
    INCLUSION_FAILED = 8
    SIGN_UNDECIDED = 9
    SLOPE_NOT_POSITIVE = 10
    PREREQUISITE_FAILED = 11
    SINGULAR_ENCLOSURE = 12
    RECIPROCITY_FAILED = 13

class CertificateKind(Enum):
    FAMILY = "family"
    HYPERBOLICITY = "hyperbolicity"
    FIBER = "fiber"
    TRANSVERSAL = "transversal"

"""Interval Newton."""

class NewtonStatus(Enum):
    UNIQUE_ZERO_PROVEN = 1
    INCONCLUSIVE = 0

"""Sections of the flow."""

class SectionKind(Enum):
    HALF_TURN = "y=0 half-turn"
    FULL_TURN = "y=0 full-turn"
    CUSTOM = "custom"

class HillRegion(Enum):
    INSIDE = 1
    OUTSIDE = -1
    BOUNDARY = 0

class SqrtPolicy(Enum):
    STRICT = 0
    TRUNCATE = 1


"""Pipeline stage names, in dependency order."""

PIPELINE_ORDER = ["family", "hyperbolicity", "fibers", "transversal"]

"""Model defaults."""

DEFAULT_MU = 0.0009537
COLLISION_RADIUS = 1e-4
