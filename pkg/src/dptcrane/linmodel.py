"""Linearization of the crane control system about the target state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import ActuationVariant, CraneParams, vector_field


@dataclass(frozen=True, eq=False)
class LinearModel:
    """``xdot = A x + B u`` about ``(x, u) = (0, 0)``."""

    A: np.ndarray
    B: np.ndarray
    variant: ActuationVariant

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]


def _denominator(p: CraneParams) -> float:
    return p.I_p * p.sigma_m + p.l_2**2 * p.m_h * p.m_p + p.M * p.l_2**2 * p.m_p


def analytic_linearization(p: CraneParams, variant=ActuationVariant.UNDERACTUATED) -> LinearModel:
    """Closed-form Jacobians of the control system at the origin.

    Only the payload angle couples into the trolley and payload
    accelerations; the hoist and hook channels are pure double integrators.
    """
    variant = ActuationVariant.parse(variant)
    p.require_inertias()
    D = _denominator(p)
    g, l2, mp, S = p.g, p.l_2, p.m_p, p.sigma_m

    A = np.zeros((8, 8))
    A[:4, 4:] = np.eye(4)
    A[4, 3] = g * l2**2 * mp**2 / D
    A[7, 3] = -g * l2 * mp * S / D

    B = np.zeros((8, variant.n_inputs))
    B[4, 0] = (mp * l2**2 + p.I_p) / D
    B[5, 1] = 1.0 / (2 * p.I_h * p.hanging_mass * D)
    B[6, 2] = 1.0 / p.I_h
    B[7, 0] = -l2 * mp / D
    if variant is ActuationVariant.FULLY_ACTUATED:
        B[4, 3] = -l2 * mp / D
        B[7, 3] = S / D
    return LinearModel(A, B, variant)


def fd_linearization(p: CraneParams, variant=ActuationVariant.UNDERACTUATED, rel_step=1e-6) -> LinearModel:
    """Central-difference Jacobians of ``vector_field`` at the origin."""
    variant = ActuationVariant.parse(variant)
    m = variant.n_inputs
    x0 = np.zeros(8)
    u0 = np.zeros(m)

    A = np.empty((8, 8))
    for i in range(8):
        h = rel_step * max(1.0, abs(x0[i]))
        dx = np.zeros(8)
        dx[i] = h
        A[:, i] = (vector_field(p, x0 + dx, u0, variant) - vector_field(p, x0 - dx, u0, variant)) / (2 * h)

    B = np.empty((8, m))
    for j in range(m):
        h = rel_step * max(1.0, abs(u0[j]))
        du = np.zeros(m)
        du[j] = h
        B[:, j] = (vector_field(p, x0, u0 + du, variant) - vector_field(p, x0, u0 - du, variant)) / (2 * h)
    return LinearModel(A, B, variant)
