"""Explicit Runge-Kutta integrators used by the simulator.

Two steppers share one driver contract: integrate ``y' = f(t, y)`` and
return the solution sampled on a requested time grid.

* ``dopri45``: adaptive Dormand-Prince 5(4) with FSAL and its 4th-order
  continuous extension for dense sampling.
* ``rk4``: classical fixed-step RK4, for deterministic snapshots.

If ``f`` raises a :class:`~dptcrane.errors.CraneError`, integration stops
and the samples reached so far are returned with ``success=False``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CraneError, StepSizeUnderflow, TrajectoryDiverged

# Dormand-Prince 5(4) tableau.
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# b - b_hat (5th minus embedded 4th order weights)
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# Dense-output polynomial coefficients (Shampine), columns are theta^1..theta^4.
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0


@dataclass
class OdeResult:
    t: np.ndarray
    y: np.ndarray  # shape (len(t), n)
    success: bool
    message: str
    n_steps: int = 0
    n_rejected: int = 0
    n_fev: int = 0


def _rms(x):
    return np.sqrt(np.mean(x * x))


def _initial_step(f, t0, y0, f0, rtol, atol, max_step):
    scale = atol + np.abs(y0) * rtol
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    f1 = f(t0 + h0, y0 + h0 * f0)
    d2 = _rms((f1 - f0) / scale) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, max_step)


def _check_bound(t, y, bound, dims):
    nrm = np.linalg.norm(y[:dims])
    if not nrm <= bound:
        raise TrajectoryDiverged(f"|x| = {nrm:.3g} exceeds {bound:g} at t = {t:.6g}")


def dopri45(f, t_eval, y0, rtol=1e-8, atol=1e-10, max_step=np.inf, first_step=None,
            bound=np.inf, bound_dims=None) -> OdeResult:
    """Adaptive Dormand-Prince integration sampled at ``t_eval``.

    ``t_eval`` must be strictly increasing; its first entry is the initial
    time and its last the final time. Integration stops with
    ``success=False`` once the norm of the first ``bound_dims`` components
    (all by default) exceeds ``bound``.
    """
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=float)
    n = y.size
    t, t_end = t_eval[0], t_eval[-1]
    out = np.empty((t_eval.size, n))
    out[0] = y
    filled = 1
    n_steps = n_rej = n_fev = 0

    try:
        fy = f(t, y)
        n_fev += 1
        if t_end == t:
            return OdeResult(t_eval[:1], out[:1], True, "done", 0, 0, n_fev)
        h = first_step if first_step else _initial_step(f, t, y, fy, rtol, atol, max_step)
        n_fev += 0 if first_step else 1
        k = np.empty((7, n))
        while t < t_end:
            h = min(h, max_step, t_end - t)
            if h < 10 * np.finfo(float).eps * max(1.0, abs(t)):
                raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}")
            k[0] = fy
            for s in range(1, 7):
                k[s] = f(t + _C[s] * h, y + h * (np.asarray(_A[s]) @ k[:s]))
            n_fev += 6
            y_new = y + h * (_B[:6] @ k[:6])
            fy_new = k[6]
            err = h * (_E @ k)
            scale = atol + np.maximum(np.abs(y), np.abs(y_new)) * rtol
            en = _rms(err / scale)
            if en <= 1.0:
                t_new = t + h
                # Dense samples inside (t, t_new].
                stop = np.searchsorted(t_eval, t_new, side="right")
                if stop > filled:
                    theta = (t_eval[filled:stop] - t) / h
                    powers = np.cumprod(np.repeat(theta[:, None], 4, axis=1), axis=1)
                    out[filled:stop] = y + h * (powers @ (k.T @ _P).T)
                    if t_eval[stop - 1] == t_new:
                        out[stop - 1] = y_new
                    filled = stop
                t, y, fy = t_new, y_new, fy_new
                n_steps += 1
                _check_bound(t, y, bound, bound_dims)
                factor = MAX_FACTOR if en == 0 else min(MAX_FACTOR, SAFETY * en ** -0.2)
                h *= factor
            else:
                n_rej += 1
                h *= max(MIN_FACTOR, SAFETY * en ** -0.2)
        return OdeResult(t_eval[:filled], out[:filled], True, "done", n_steps, n_rej, n_fev)
    except CraneError as exc:
        return OdeResult(t_eval[:filled], out[:filled], False, f"{type(exc).__name__}: {exc}", n_steps, n_rej, n_fev)


def rk4(f, t_eval, y0, step, bound=np.inf, bound_dims=None) -> OdeResult:
    """Classical RK4 with fixed ``step``; samples by cubic Hermite interpolation."""
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=float)
    t, t_end = t_eval[0], t_eval[-1]
    out = np.empty((t_eval.size, y.size))
    out[0] = y
    filled = 1
    n_steps = n_fev = 0
    try:
        fy = f(t, y)
        n_fev += 1
        n_total = int(np.ceil((t_end - t) / step - 1e-12))
        for i in range(n_total):
            h = min(step, t_end - t)
            k1 = fy
            k2 = f(t + h / 2, y + h / 2 * k1)
            k3 = f(t + h / 2, y + h / 2 * k2)
            k4 = f(t + h, y + h * k3)
            y_new = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t_new = t + h if i < n_total - 1 else t_end
            fy_new = f(t_new, y_new)
            n_fev += 4
            stop = np.searchsorted(t_eval, t_new, side="right")
            if stop > filled:
                s = (t_eval[filled:stop] - t) / h
                h00 = 2 * s**3 - 3 * s**2 + 1
                h10 = s**3 - 2 * s**2 + s
                h01 = -2 * s**3 + 3 * s**2
                h11 = s**3 - s**2
                out[filled:stop] = (h00[:, None] * y + h10[:, None] * h * fy
                                    + h01[:, None] * y_new + h11[:, None] * h * fy_new)
                if t_eval[stop - 1] == t_new:
                    out[stop - 1] = y_new
                filled = stop
            t, y, fy = t_new, y_new, fy_new
            n_steps += 1
            _check_bound(t, y, bound, bound_dims)
        return OdeResult(t_eval[:filled], out[:filled], True, "done", n_steps, 0, n_fev)
    except CraneError as exc:
        return OdeResult(t_eval[:filled], out[:filled], False, f"{type(exc).__name__}: {exc}", n_steps, 0, n_fev)
