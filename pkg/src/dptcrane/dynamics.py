"""Nonlinear equations of motion of the double-pendulum-type overhead crane.

Generalized coordinates are ``q = (z, l1, th1, th2)``: trolley position,
hoist rope length, hook angle and payload angle (both measured from the
downward vertical). The full state is ``x = (q, qdot)``.

The Lagrange equations are written in mass-matrix form::

    M(q) qddot + h(q, qdot) = F

with ``F = (F_z, F_l1, F_th1, F_th2)``. Every function here broadcasts
over leading axes, so a stack of states of shape ``(N, 8)`` is evaluated in
one call.

Masses and inertias follow the scaled units of the reference data set
(thousands of kg); forces come out in the same scaled unit.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParameters, SingularConfiguration

#: Mass-matrix condition numbers above this are treated as singular.
SINGULAR_COND = 1e12


class ActuationVariant(enum.Enum):
    """Which generalized forces are actuated.

    ``UNDERACTUATED`` has no payload torque (``F_th2 = 0``) and three
    inputs; ``FULLY_ACTUATED`` adds the payload torque as a fourth input.
    """

    UNDERACTUATED = "underactuated"
    FULLY_ACTUATED = "fully_actuated"

    @property
    def n_inputs(self) -> int:
        return 3 if self is ActuationVariant.UNDERACTUATED else 4

    @classmethod
    def parse(cls, value) -> "ActuationVariant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"under": "underactuated", "full": "fully_actuated", "fully": "fully_actuated"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise InvalidParameters(f"unknown actuation variant {value!r}") from None


@dataclass(frozen=True)
class CraneParams:
    """Physical constants of the crane.

    Attributes:
        M: trolley mass.
        m_h: hook mass.
        m_p: payload mass.
        I_h: hook moment of inertia about its centre of mass.
        I_p: payload moment of inertia about its centre of mass.
        l_2: hook-to-payload rope length (constant).
        g: gravitational acceleration.
    """

    M: float = 0.2
    m_h: float = 0.1
    m_p: float = 10.0
    I_h: float = 0.05
    I_p: float = 4.0
    l_2: float = 2.0
    g: float = 9.81

    def __post_init__(self):
        for name in ("M", "m_h", "m_p", "l_2", "g"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise InvalidParameters(f"{name} must be positive and finite, got {v!r}")
        for name in ("I_h", "I_p"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidParameters(f"{name} must be non-negative and finite, got {v!r}")

    @property
    def sigma_m(self) -> float:
        """Total translating mass ``M + m_h + m_p``."""
        return self.M + self.m_h + self.m_p

    @property
    def hanging_mass(self) -> float:
        """Hook plus payload mass ``m_h + m_p``."""
        return self.m_h + self.m_p

    def require_inertias(self):
        """Raise unless both inertias are strictly positive (needed for synthesis)."""
        if self.I_h <= 0 or self.I_p <= 0:
            raise InvalidParameters("controller synthesis requires I_h > 0 and I_p > 0")

    def to_dict(self) -> dict:
        return asdict(self)


REFERENCE_PARAMS = CraneParams()


def _split(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 8:
        raise InvalidParameters(f"state must have 8 components, got shape {x.shape}")
    return x[..., :4], x[..., 4:]


def mass_matrix(p: CraneParams, q) -> np.ndarray:
    """Mass matrix M(q), rows and columns ordered (z, l1, th1, th2)."""
    q = np.asarray(q, dtype=float)
    l1, t1, t2 = q[..., 1], q[..., 2], q[..., 3]
    mhp = p.hanging_mass
    s1, c1 = np.sin(t1), np.cos(t1)
    s12, c12 = np.sin(t1 - t2), np.cos(t1 - t2)
    lm = p.l_2 * p.m_p

    out = np.empty(q.shape[:-1] + (4, 4))
    out[..., 0, 0] = p.sigma_m
    out[..., 0, 1] = out[..., 1, 0] = mhp * s1
    out[..., 0, 2] = out[..., 2, 0] = mhp * l1 * c1
    out[..., 0, 3] = out[..., 3, 0] = lm * np.cos(t2)
    out[..., 1, 1] = mhp
    out[..., 1, 2] = out[..., 2, 1] = 0.0
    out[..., 1, 3] = out[..., 3, 1] = lm * s12
    out[..., 2, 2] = p.I_h + mhp * l1**2
    out[..., 2, 3] = out[..., 3, 2] = lm * l1 * c12
    out[..., 3, 3] = p.I_p + p.l_2**2 * p.m_p
    return out


def bias_vector(p: CraneParams, s) -> np.ndarray:
    """Coriolis, centrifugal and gravity terms h(q, qdot)."""
    (q, v) = _split(s)
    l1, t1, t2 = q[..., 1], q[..., 2], q[..., 3]
    dl1, dt1, dt2 = v[..., 1], v[..., 2], v[..., 3]
    mhp, g = p.hanging_mass, p.g
    lm = p.l_2 * p.m_p
    s1, c1 = np.sin(t1), np.cos(t1)
    s12, c12 = np.sin(t1 - t2), np.cos(t1 - t2)

    h = np.empty(q.shape)
    h[..., 0] = -mhp * s1 * l1 * dt1**2 + 2 * mhp * c1 * dl1 * dt1 - lm * np.sin(t2) * dt2**2
    h[..., 1] = -g * mhp * c1 - mhp * l1 * dt1**2 - lm * c12 * dt2**2
    h[..., 2] = 2 * mhp * l1 * dl1 * dt1 + g * mhp * l1 * s1 + lm * l1 * s12 * dt2**2
    h[..., 3] = g * lm * np.sin(t2) - lm * l1 * s12 * dt1**2 + 2 * lm * c12 * dl1 * dt1
    return h


def accel(p: CraneParams, s, f) -> np.ndarray:
    """Generalized accelerations ``M(q)^-1 (F - h)``.

    Raises:
        SingularConfiguration: if the mass matrix condition number exceeds
            ``SINGULAR_COND`` anywhere in the batch.
    """
    s = np.asarray(s, dtype=float)
    Mq = mass_matrix(p, s[..., :4])
    cond = mass_matrix_cond(Mq)
    if np.any(~np.isfinite(cond) | (cond > SINGULAR_COND)):
        raise SingularConfiguration(f"mass matrix condition {np.max(cond):.3g} exceeds {SINGULAR_COND:.0e}")
    rhs = np.asarray(f, dtype=float) - bias_vector(p, s)
    return np.linalg.solve(Mq, rhs[..., None])[..., 0]


def mass_matrix_cond(Mq) -> np.ndarray:
    """2-norm condition number of symmetric positive semidefinite mass matrices."""
    ev = np.linalg.eigvalsh(Mq)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ev[..., 0] > 0, ev[..., -1] / ev[..., 0], np.inf)


def delta(p: CraneParams, s) -> np.ndarray:
    """Common denominator of the explicit acceleration formulas.

    Equals ``2 det M(q)``. With ``I_h = 0`` it vanishes like ``l1**2``,
    which is where the explicit model becomes singular.
    """
    s = np.asarray(s, dtype=float)
    x2, x3, x4 = s[..., 1], s[..., 2], s[..., 3]
    M, mh, mp, Ih, Ip, l2 = p.M, p.m_h, p.m_p, p.I_h, p.I_p, p.l_2
    c3 = np.cos(2 * x3)
    c34 = np.cos(2 * x3 - 2 * x4)
    return (
        Ih * Ip * mh**2 + Ih * Ip * mp**2 + Ih * M * l2**2 * mp**2
        + 2 * Ip * M * mh**2 * x2**2 + 2 * Ip * M * mp**2 * x2**2
        + 2 * Ih * Ip * M * mh + 2 * Ih * Ip * M * mp + Ih * l2**2 * mh * mp**2
        + Ih * l2**2 * mh**2 * mp + 2 * Ih * Ip * mh * mp
        + Ih * Ip * mh**2 * c3 + Ih * Ip * mp**2 * c3 + Ih * M * l2**2 * mp**2 * c34
        + 2 * Ih * Ip * mh * mp * c3
        + 2 * M * l2**2 * mh * mp**2 * x2**2 + 2 * M * l2**2 * mh**2 * mp * x2**2
        + 2 * Ih * M * l2**2 * mh * mp
        + 4 * Ip * M * mh * mp * x2**2
        + Ih * l2**2 * mh * mp**2 * c3 + Ih * l2**2 * mh**2 * mp * c3
    )


def _theta_bracket(p: CraneParams, x4):
    M, mh, mp, Ip, l2 = p.M, p.m_h, p.m_p, p.I_p, p.l_2
    return (
        2 * Ip * mh + 2 * Ip * mp + 2 * Ip * M + l2**2 * mp**2 + 2 * l2**2 * mh * mp
        - l2**2 * mp**2 * np.cos(2 * x4) + 2 * M * l2**2 * mp
    )


def theta_l1(p: CraneParams, s) -> np.ndarray:
    """Coefficient of ``F_l1`` in the hoist-force balance (depends on th2 only)."""
    s = np.asarray(s, dtype=float)
    return p.I_h * _theta_bracket(p, s[..., 3])


def feedforward_hoist_force(p: CraneParams, s, u2) -> np.ndarray:
    """Gravity-compensating hoist force with feedback offset ``u2``.

    At rest in the target position with ``u2 = 0`` this is the hanging
    weight ``-g (m_h + m_p)``, so the origin is an equilibrium of the
    closed loop.

    Raises:
        SingularConfiguration: when the coefficient ``theta_l1`` is
            negligible (``I_h`` effectively zero).
    """
    s = np.asarray(s, dtype=float)
    x3, x4 = s[..., 2], s[..., 3]
    M, mh, mp, Ih, Ip, l2, g = p.M, p.m_h, p.m_p, p.I_h, p.I_p, p.l_2, p.g

    theta = theta_l1(p, s)
    scale = np.abs(_theta_bracket(p, x4)) + 1.0
    if np.any(np.abs(theta) < 1e-12 * scale):
        raise SingularConfiguration("hoist feedforward undefined: theta_l1 vanishes (I_h = 0?)")

    c3 = np.cos(x3)
    gravity = (
        2 * Ih * Ip * g * mh**2 * c3 + 2 * Ih * Ip * g * mp**2 * c3
        + Ih * M * g * l2**2 * mp**2 * np.cos(x3 - 2 * x4)
        + 4 * Ih * Ip * g * mh * mp * c3 + Ih * M * g * l2**2 * mp**2 * c3
        + 2 * Ih * Ip * M * g * mh * c3 + 2 * Ih * Ip * M * g * mp * c3
        + 2 * Ih * g * l2**2 * mh * mp**2 * c3 + 2 * Ih * g * l2**2 * mh**2 * mp * c3
        + 2 * Ih * M * g * l2**2 * mh * mp * c3
    )
    return -(gravity - np.asarray(u2, dtype=float)) / theta


def control_forces(p: CraneParams, s, u, variant: ActuationVariant) -> np.ndarray:
    """Map a control input to generalized forces ``(F_z, F_l1, F_th1, F_th2)``.

    ``u`` has 3 components for the underactuated crane and 4 for the fully
    actuated one; ``u[1]`` is the offset fed into the hoist feedforward.
    """
    variant = ActuationVariant.parse(variant)
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != variant.n_inputs:
        raise InvalidParameters(
            f"{variant.value} crane expects {variant.n_inputs} inputs, got {u.shape[-1]}"
        )
    s = np.asarray(s, dtype=float)
    shape = np.broadcast_shapes(s.shape[:-1], u.shape[:-1])
    F = np.zeros(shape + (4,))
    F[..., 0] = u[..., 0]
    F[..., 1] = feedforward_hoist_force(p, s, u[..., 1])
    F[..., 2] = u[..., 2]
    if variant is ActuationVariant.FULLY_ACTUATED:
        F[..., 3] = u[..., 3]
    return F


def vector_field(p: CraneParams, s, u, variant: ActuationVariant) -> np.ndarray:
    """Closed-form control system ``xdot = G(x, u)``; vanishes at ``(0, 0)``."""
    s = np.asarray(s, dtype=float)
    F = control_forces(p, s, u, variant)
    xdot = np.empty(F.shape[:-1] + (8,))
    xdot[..., :4] = np.broadcast_to(s[..., 4:], F.shape)
    xdot[..., 4:] = accel(p, np.broadcast_to(s, F.shape[:-1] + (8,)), F)
    return xdot


def closed_loop_field(p: CraneParams, K, variant: ActuationVariant, s) -> np.ndarray:
    """``G(x, -K x)`` for a gain matrix of shape (m, 8); batched over ``s``."""
    K = np.asarray(K, dtype=float)
    s = np.asarray(s, dtype=float)
    return vector_field(p, s, -(s @ K.T), variant)


def energy(p: CraneParams, s):
    """Kinetic and potential energy ``(KE, PE)``.

    The potential reference is chosen so that PE vanishes with both ropes
    horizontal.
    """
    (q, v) = _split(s)
    l1, t1, t2 = q[..., 1], q[..., 2], q[..., 3]
    dz, dl1, dt1, dt2 = v[..., 0], v[..., 1], v[..., 2], v[..., 3]
    s1, c1, s2, c2 = np.sin(t1), np.cos(t1), np.sin(t2), np.cos(t2)

    zh_dot = dz + dl1 * s1 + l1 * c1 * dt1
    yh_dot = -dl1 * c1 + l1 * s1 * dt1
    zp_dot = zh_dot + p.l_2 * c2 * dt2
    yp_dot = yh_dot + p.l_2 * s2 * dt2

    ke = 0.5 * (
        p.M * dz**2
        + p.m_h * (zh_dot**2 + yh_dot**2) + p.I_h * dt1**2
        + p.m_p * (zp_dot**2 + yp_dot**2) + p.I_p * dt2**2
    )
    pe = -p.g * p.m_h * l1 * c1 - p.g * p.m_p * (l1 * c1 + p.l_2 * c2)
    return ke, pe
