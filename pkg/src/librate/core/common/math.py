# --------------------------------------------------------------------------------------------
# Copyright (c) Microsoft Corporation.
# Licensed under the MIT License.
# --------------------------------------------------------------------------------------------

import numpy as np


"""
Frame calculations (plain floating point, used to pick coordinates; never part of a bound).
"""

def ordered_qr(M: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """
    Orthogonal factor of M after sorting its columns by decreasing weighted norm.
    M:       square matrix whose column span is to be followed
    weights: nonnegative size of the set along each column of M
    """
    sizes = np.linalg.norm(M, axis=0) * np.asarray(weights)
    order = np.argsort(-sizes, kind="stable")
    Q, R = np.linalg.qr(M[:, order])
    signs = np.where(np.diag(R) < 0.0, -1.0, 1.0)
    return Q * signs[None, :]

def is_well_conditioned(M: np.ndarray, limit: float=1e12) -> bool:
    if not np.all(np.isfinite(M)): return False
    return bool(np.linalg.cond(M) < limit)

def normalize_component(v: np.ndarray, index: int, target: float=1.0) -> np.ndarray:
    """Scale v so that v[index] == target."""
    if v[index] == 0.0: raise ZeroDivisionError("normalize_component: zero pivot component %d" % index)
    return v * (target / v[index])
