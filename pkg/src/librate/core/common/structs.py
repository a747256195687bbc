# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

from __future__ import annotations
import typing
import numpy as np

import librate.core.common.constants as lr_constants
import librate.core.common.errors as lr_errors
from librate.core.ivl.interval import Interval
from librate.core.ivl.iarray import IVector


class Status:
    def __init__(self, status: lr_constants.StatusFlags, reason: lr_constants.StatusReason=lr_constants.StatusReason.NONE, message: str=""):
        """
        status:  success or failure pattern used at pipeline level
        reason:  a more detailed category within the success or failure pattern
        message: messages if any
        """
        self.status = status
        self.reason = reason
        self.message = message

    @property
    def ok(self) -> bool:
        return self.status == lr_constants.StatusFlags.SUCCESS


class ModelParams(typing.NamedTuple):
    mu: float = lr_constants.DEFAULT_MU

    def validate(self) -> ModelParams:
        if not (0.0 < self.mu < 0.5):
            raise lr_errors.ConfigError("model params error: mu must satisfy 0 < mu < 1/2, got %r" % self.mu)
        return self


class State(typing.NamedTuple):
    """Rotating-frame canonical coordinates; a point is a zero-width box."""
    x: Interval
    y: Interval
    p_x: Interval
    p_y: Interval

    @classmethod
    def point(cls, x: float, y: float, p_x: float, p_y: float) -> State:
        return cls(Interval(x), Interval(y), Interval(p_x), Interval(p_y))

    @classmethod
    def from_ivector(cls, v: IVector) -> State:
        if len(v) != 4: raise lr_errors.DomainError("state error: expected 4 components, got %d" % len(v))
        return cls(*[Interval(v.lo[i], v.hi[i]) for i in range(4)])

    @classmethod
    def coerce(cls, value) -> State:
        if isinstance(value, State): return value
        if isinstance(value, IVector): return cls.from_ivector(value)
        arr = np.asarray(value, dtype=np.float64)
        return cls.point(*arr.tolist())

    def to_ivector(self) -> IVector:
        return IVector([c.lo for c in self], [c.hi for c in self])

    def mid(self) -> np.ndarray:
        return np.array([c.mid for c in self])

    def to_json(self) -> dict:
        return {name: getattr(self, name).to_json() for name in self._fields}

    @classmethod
    def from_json(cls, data: dict) -> State:
        return cls(*[Interval.from_json(data[name]) for name in cls._fields])


class EnergyLevel(typing.NamedTuple):
    """Value of the Hamiltonian H (about -1.515 for the comet Oterma level)."""
    h: Interval


class IntegratorOptions(typing.NamedTuple):
    taylor_order: int = 20
    abs_tolerance: float = 1e-16
    max_step: float = 0.1
    min_step: float = 1e-6
    width_cap: float = 1e-1
    crossing_window: float = 1e-3  # half-width of the time bracket around an estimated section crossing
    section_time_cap: float = 20.0  # longest flight searched for a section crossing

    @classmethod
    def from_config(cls, configs: dict) -> IntegratorOptions:
        return cls(**{k: v for k, v in configs.items() if k in cls._fields})

    def validate(self) -> IntegratorOptions:
        if self.taylor_order < 2:
            raise lr_errors.ConfigError("integrator options error: taylor_order must be >= 2, got %r" % self.taylor_order)
        if not (0.0 < self.min_step <= self.max_step):
            raise lr_errors.ConfigError("integrator options error: expected 0 < min_step <= max_step")
        return self


class Verdict(typing.NamedTuple):
    """Outcome of a verification: Verified, or Failed with a reason and message."""
    status: lr_constants.CertificateStatus
    reason: lr_constants.FailureReason = lr_constants.FailureReason.NONE
    message: str = ""

    @property
    def verified(self) -> bool:
        return self.status == lr_constants.CertificateStatus.VERIFIED

    @classmethod
    def passed(cls) -> Verdict:
        return cls(lr_constants.CertificateStatus.VERIFIED)

    @classmethod
    def failed(cls, reason: lr_constants.FailureReason, message: str="") -> Verdict:
        return cls(lr_constants.CertificateStatus.FAILED, reason, message)

    def to_json(self) -> dict:
        return {"status": self.status.name, "reason": self.reason.name, "message": self.message}

    @classmethod
    def from_json(cls, data: dict) -> Verdict:
        return cls(lr_constants.CertificateStatus[data["status"]], lr_constants.FailureReason[data["reason"]], data.get("message", ""))
