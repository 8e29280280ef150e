"""Equations of motion derived symbolically from the crane geometry.

Used only as a test oracle: positions are written down from the geometry
and the Lagrange equations are formed by sympy, independently of the
hand-expanded expressions in the package.
"""

from functools import lru_cache

import numpy as np
import sympy as sp


@lru_cache(maxsize=None)
def _derive():
    M, mh, mp, Ih, Ip, l2, g = sp.symbols("M m_h m_p I_h I_p l_2 g", positive=True)
    q = sp.symbols("z l1 th1 th2")
    v = sp.symbols("dz dl1 dth1 dth2")
    z, l1, t1, t2 = q

    hook = sp.Matrix([z + l1 * sp.sin(t1), -l1 * sp.cos(t1)])
    load = hook + l2 * sp.Matrix([sp.sin(t2), -sp.cos(t2)])
    J_h = hook.jacobian(q)
    J_p = load.jacobian(q)
    vv = sp.Matrix(v)
    vh, vp = J_h * vv, J_p * vv
    ke = (M * v[0] ** 2 + mh * vh.dot(vh) + mp * vp.dot(vp) + Ih * v[2] ** 2 + Ip * v[3] ** 2) / 2
    pe = g * (mh * hook[1] + mp * load[1])

    dKdv = sp.Matrix([sp.diff(ke, vi) for vi in v])
    Mq = dKdv.jacobian(v)
    h = dKdv.jacobian(q) * vv - sp.Matrix([sp.diff(ke, qi) for qi in q]) + sp.Matrix([sp.diff(pe, qi) for qi in q])
    args = (M, mh, mp, Ih, Ip, l2, g, *q, *v)
    return (
        sp.lambdify(args, sp.simplify(Mq), "numpy"),
        sp.lambdify(args, h, "numpy"),
        sp.lambdify(args, [ke, pe], "numpy"),
    )


def _args(p, s):
    return (p.M, p.m_h, p.m_p, p.I_h, p.I_p, p.l_2, p.g, *np.asarray(s, dtype=float))


def mass_matrix(p, s):
    return np.array(_derive()[0](*_args(p, s)), dtype=float)


def bias(p, s):
    return np.array(_derive()[1](*_args(p, s)), dtype=float).ravel()


def energy(p, s):
    ke, pe = _derive()[2](*_args(p, s))
    return float(ke), float(pe)
