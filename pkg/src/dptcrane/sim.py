"""Closed- and open-loop simulation of the crane, with run metrics.

Trajectories record the realized generalized forces at every sample so the
hoist feedforward can be inspected and the work-energy balance audited.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .dynamics import (
    ActuationVariant,
    CraneParams,
    accel,
    control_forces,
    energy,
)
from .errors import EmptyTrajectory, InvalidParameters
from .integrators import dopri45, rk4
from .linmodel import analytic_linearization
from .synthesis import PoleSet, place_poles

log = logging.getLogger(__name__)

DEFAULT_T_END = {ActuationVariant.UNDERACTUATED: 40.0, ActuationVariant.FULLY_ACTUATED: 15.0}
CSV_HEADER = ["t", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "Fz", "Fl1", "Fth1", "Fth2"]


@dataclass(frozen=True)
class IntegratorOptions:
    """Integration settings.

    ``t_end=None`` picks the per-variant default (40 underactuated, 15
    fully actuated). Samples are spaced ``min(sample_dt, max_step)`` apart.
    A run stops early once the state norm exceeds ``divergence_norm``.
    """

    method: str = "rk45"
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_step: float = 0.1
    fixed_step: float = 1e-3
    t_end: float | None = None
    sample_dt: float = 0.01
    divergence_norm: float = 1e3

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise InvalidParameters(f"unknown integration method {self.method!r}")
        for name in ("rel_tol", "abs_tol", "max_step", "fixed_step", "sample_dt", "divergence_norm"):
            if not getattr(self, name) > 0:
                raise InvalidParameters(f"{name} must be positive")
        if self.t_end is not None and not self.t_end >= 0:
            raise InvalidParameters("t_end must be non-negative")

    def resolved_t_end(self, variant) -> float:
        if self.t_end is not None:
            return float(self.t_end)
        return DEFAULT_T_END[ActuationVariant.parse(variant)]

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    forces: np.ndarray
    params: CraneParams
    variant: ActuationVariant | None = None
    K: np.ndarray | None = None
    options: IntegratorOptions | None = None
    success: bool = True
    message: str = "done"
    meta: dict = field(default_factory=dict)
    work: np.ndarray | None = None

    def __len__(self):
        return self.times.size

    @property
    def x0(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def hoist_went_negative(self) -> bool:
        return bool(np.any(self.states[:, 1] < 0))

    def to_csv(self, path):
        """Write ``t, x1..x8, Fz, Fl1, Fth1, Fth2`` rows with 15 significant digits."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for t, x, F in zip(self.times, self.states, self.forces):
                w.writerow([f"{v:.15g}" for v in (t, *x, *F)])


def read_trajectory_csv(path, params: CraneParams) -> Trajectory:
    """Load a trajectory written by :meth:`Trajectory.to_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != CSV_HEADER:
        raise InvalidParameters(f"{path}: unexpected CSV header")
    data = np.array(rows[1:], dtype=float).reshape(-1, len(CSV_HEADER))
    return Trajectory(data[:, 0], data[:, 1:9], data[:, 9:13], params)


def _sample_grid(t_end, opts: IntegratorOptions):
    dt = min(opts.sample_dt, opts.max_step)
    n = int(np.floor(t_end / dt + 1e-9))
    grid = np.arange(n + 1) * dt
    if t_end - grid[-1] > 1e-9 * max(1.0, t_end):
        grid = np.append(grid, t_end)
    return grid


def _solve(rhs, x0, t_end, opts: IntegratorOptions):
    grid = _sample_grid(t_end, opts)
    if opts.method == "rk4":
        return rk4(rhs, grid, x0, opts.fixed_step, bound=opts.divergence_norm, bound_dims=8)
    return dopri45(rhs, grid, x0, rtol=opts.rel_tol, atol=opts.abs_tol, max_step=opts.max_step,
                   bound=opts.divergence_norm, bound_dims=8)


def integrate(p: CraneParams, K, variant, x0, opts: IntegratorOptions | None = None,
              disturbance=None) -> Trajectory:
    """Simulate ``xdot = G(x, -K x) (+ disturbance(t))`` from ``x0``.

    On a singular configuration the integration halts and the partial
    trajectory is returned with ``success=False``.
    """
    variant = ActuationVariant.parse(variant)
    opts = opts or IntegratorOptions()
    K = np.asarray(K, dtype=float)
    if K.shape != (variant.n_inputs, 8):
        raise InvalidParameters(f"gain shape {K.shape} does not match {variant.value}")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (8,) or not np.all(np.isfinite(x0)):
        raise InvalidParameters("x0 must be 8 finite numbers")

    # The ninth component accumulates the work done by the generalized forces.
    def rhs(t, y):
        x = y[:8]
        F = control_forces(p, x, -(K @ x), variant)
        xdot = np.concatenate([x[4:], accel(p, x, F)])
        if disturbance is not None:
            xdot = xdot + np.asarray(disturbance(t), dtype=float)
        return np.append(xdot, F @ x[4:])

    t_end = opts.resolved_t_end(variant)
    res = _solve(rhs, np.append(x0, 0.0), t_end, opts)
    if not res.success:
        log.warning("integration stopped early at t = %.4g: %s", res.t[-1], res.message)

    states = res.y[:, :8]
    forces = control_forces(p, states, -(states @ K.T), variant)
    tr = Trajectory(res.t, states, forces, p, variant, K, opts, res.success, res.message,
                    {"n_steps": res.n_steps, "n_rejected": res.n_rejected, "n_fev": res.n_fev,
                     "disturbed": disturbance is not None}, work=res.y[:, 8])
    if tr.hoist_went_negative:
        log.info("hoist length l1 went negative during the run")
    return tr


def integrate_open_loop(p: CraneParams, forces, x0, opts: IntegratorOptions | None = None) -> Trajectory:
    """Simulate with constant generalized forces ``(F_z, F_l1, F_th1, F_th2)``."""
    opts = opts or IntegratorOptions()
    F = np.asarray(forces, dtype=float)
    if F.shape != (4,):
        raise InvalidParameters("open-loop forces must have 4 components")
    x0 = np.asarray(x0, dtype=float)

    def rhs(t, y):
        x = y[:8]
        return np.concatenate([x[4:], accel(p, x, F), [F @ x[4:]]])

    t_end = opts.t_end if opts.t_end is not None else 10.0
    res = _solve(rhs, np.append(x0, 0.0), t_end, opts)
    return Trajectory(res.t, res.y[:, :8], np.tile(F, (res.t.size, 1)), p, None, None, opts,
                      res.success, res.message,
                      {"n_steps": res.n_steps, "n_rejected": res.n_rejected, "n_fev": res.n_fev},
                      work=res.y[:, 8])


def settling_time(tr: Trajectory, fraction: float = 0.02):
    """Earliest sample time after which ``|x| <= fraction * |x(0)|`` holds.

    Returns ``None`` if the trajectory never settles within its horizon.
    """
    if not 0 < fraction < 1:
        raise InvalidParameters("fraction must lie in (0, 1)")
    if len(tr) == 0:
        raise EmptyTrajectory("empty trajectory")
    norms = np.linalg.norm(tr.states, axis=1)
    bad = np.nonzero(norms > fraction * norms[0])[0]
    if bad.size == 0:
        return float(tr.times[0])
    last = bad[-1]
    if last + 1 >= len(tr):
        return None
    return float(tr.times[last + 1])


def energy_audit(tr: Trajectory) -> float:
    """Worst work-energy imbalance along the trajectory.

    ``max_t |E(t) - E(0) - W(t)|`` normalized by ``max(1, |E(0)|)``, where
    ``W`` is the work of the generalized forces. Simulated runs carry ``W``
    integrated alongside the state; for trajectories loaded from CSV it is
    rebuilt from the samples by the trapezoidal rule, which is only
    second-order accurate in the sample spacing.
    """
    if len(tr) < 2:
        raise EmptyTrajectory("energy audit needs at least two samples")
    ke, pe = energy(tr.params, tr.states)
    E = ke + pe
    if tr.work is not None:
        work = tr.work
    else:
        power = np.sum(tr.forces * tr.states[:, 4:], axis=1)
        work = cumulative_trapezoid(power, tr.times, initial=0.0)
    return float(np.max(np.abs(E - E[0] - work)) / max(1.0, abs(E[0])))


def trajectory_divergence(a: Trajectory, b: Trajectory) -> float:
    """Largest state distance between two runs over their common samples."""
    n = min(len(a), len(b))
    if n == 0:
        raise EmptyTrajectory("empty trajectory")
    if not np.allclose(a.times[:n], b.times[:n]):
        raise InvalidParameters("trajectories are sampled on different grids")
    return float(np.max(np.linalg.norm(a.states[:n] - b.states[:n], axis=1)))


def terminal_report(tr: Trajectory) -> dict:
    F = tr.forces[-1]
    return {
        "t_end": float(tr.times[-1]),
        "final_state_norm": float(np.linalg.norm(tr.final_state)),
        "terminal_forces": {"Fz": float(F[0]), "Fl1": float(F[1]), "Fth1": float(F[2]), "Fth2": float(F[3])},
        "peak_abs_forces": dict(zip(("Fz", "Fl1", "Fth1", "Fth2"), map(float, np.max(np.abs(tr.forces), axis=0)))),
    }


@dataclass
class VariantComparison:
    under: Trajectory
    full: Trajectory
    settling_under: float | None
    settling_full: float | None
    reduction_percent: float | None
    fraction: float
    perturbed: Trajectory | None = None
    divergence: float | None = None

    def to_dict(self) -> dict:
        out = {
            "fraction": self.fraction,
            "settling_time_underactuated": self.settling_under,
            "settling_time_fully_actuated": self.settling_full,
            "reduction_percent": self.reduction_percent,
            "underactuated": terminal_report(self.under),
            "fully_actuated": terminal_report(self.full),
        }
        if self.divergence is not None:
            out["perturbed_x0"] = self.perturbed.x0.tolist()
            out["divergence_underactuated"] = self.divergence
        return out


def reduction_percent(t_ref, t_new):
    """Relative settling-time reduction in percent; ``None`` if either run never settles."""
    if t_ref is None or t_new is None:
        return None
    if t_ref == 0:
        return 0.0
    return 100.0 * (1.0 - t_new / t_ref)


def compare_variants(p: CraneParams, poles, x0, opts: IntegratorOptions | None = None,
                     gains=None, perturbed_x0=None, fraction: float = 0.02) -> VariantComparison:
    """Run both actuation variants with the same pole set from the same state.

    ``gains`` may supply ``(K_under, K_full)`` instead of placing poles.
    With ``perturbed_x0`` the underactuated run is repeated from that state
    and the largest state divergence between the two is reported.
    """
    poles = poles if isinstance(poles, PoleSet) else PoleSet(poles)
    if gains is None:
        gains = tuple(
            place_poles(analytic_linearization(p, v), poles).K
            for v in (ActuationVariant.UNDERACTUATED, ActuationVariant.FULLY_ACTUATED)
        )
    K_under, K_full = (np.asarray(k, dtype=float) for k in gains)
    opts = opts or IntegratorOptions()
    under = integrate(p, K_under, ActuationVariant.UNDERACTUATED, x0, opts)
    full = integrate(p, K_full, ActuationVariant.FULLY_ACTUATED, x0,
                     opts if opts.t_end is not None else replace(opts, t_end=DEFAULT_T_END[ActuationVariant.UNDERACTUATED]))
    ts_u, ts_f = settling_time(under, fraction), settling_time(full, fraction)
    cmp = VariantComparison(under, full, ts_u, ts_f, reduction_percent(ts_u, ts_f), fraction)
    if perturbed_x0 is not None:
        cmp.perturbed = integrate(p, K_under, ActuationVariant.UNDERACTUATED, perturbed_x0, opts)
        cmp.divergence = trajectory_divergence(under, cmp.perturbed)
    return cmp
