"""End-to-end design study: linearize, check, place, certify, simulate."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .certify import RoaCertificate, region_of_attraction
from .config import ScenarioConfig
from .errors import SingularConfiguration, Uncontrollable
from .linmodel import LinearModel, analytic_linearization, fd_linearization
from .sim import Trajectory, energy_audit, integrate, settling_time, terminal_report, trajectory_divergence, reduction_percent
from .synthesis import GainMatrix, closed_loop_eigs, controllability_rank, reference_gain, place_poles, sort_eigs


def _complex_list(values):
    return [[float(z.real), float(z.imag)] for z in values]


@dataclass(eq=False)
class ScenarioResult:
    config: ScenarioConfig
    model: LinearModel
    rank: int
    gain: GainMatrix
    eigs: np.ndarray
    certificate: RoaCertificate | None
    trajectory: Trajectory | None

    @property
    def max_eig_error(self) -> float:
        return float(np.max(np.abs(self.eigs - sort_eigs(self.config.poles.poles))))

    def summary(self) -> dict:
        """Fixed-key, JSON-ready report embedding the resolved config."""
        tr = self.trajectory
        out = {
            "config": self.config.to_dict(),
            "controllability_rank": self.rank,
            "gain_source": self.config.gains,
            "gain": self.gain.K.tolist(),
            "closed_loop_eigs": _complex_list(self.eigs),
            "max_eig_error": self.max_eig_error,
            "certificate": None if self.certificate is None else self.certificate.to_dict(),
            "simulation": None,
        }
        if tr is not None:
            sim = {
                "success": tr.success,
                "message": tr.message,
                "settling_time": settling_time(tr) if len(tr) else None,
                "energy_audit": energy_audit(tr) if len(tr) > 1 else None,
                "hoist_went_negative": tr.hoist_went_negative,
            }
            sim.update(terminal_report(tr))
            out["simulation"] = sim
        return out


def linearize(cfg: ScenarioConfig) -> tuple[LinearModel, float]:
    """Analytic model plus its max deviation from the finite-difference Jacobians."""
    m = analytic_linearization(cfg.params, cfg.variant)
    fd = fd_linearization(cfg.params, cfg.variant)
    dev = max(np.max(np.abs(m.A - fd.A)), np.max(np.abs(m.B - fd.B)))
    return m, float(dev)


def design(cfg: ScenarioConfig):
    """Linear model, controllability rank and gain for a scenario."""
    m = analytic_linearization(cfg.params, cfg.variant)
    rank = controllability_rank(m)
    if rank < m.n_states:
        raise Uncontrollable(f"controllability rank {rank} < {m.n_states}")
    gain = place_poles(m, cfg.poles) if cfg.gains == "place" else reference_gain(cfg.variant)
    return m, rank, gain


def run_scenario(cfg: ScenarioConfig, certify: bool = True, simulate: bool = True) -> ScenarioResult:
    m, rank, gain = design(cfg)
    eigs = closed_loop_eigs(m, gain.K)
    cert = None
    if certify:
        cert = region_of_attraction(cfg.params, m, gain.K, n_samples=cfg.n_samples, seed=cfg.seed)
    tr = None
    if simulate:
        tr = integrate(cfg.params, gain.K, cfg.variant, cfg.x0, cfg.integrator)
    return ScenarioResult(cfg, m, rank, gain, eigs, cert, tr)


def write_outputs(result: ScenarioResult, out_dir) -> dict:
    """Write the trajectory CSV and summary JSON; returns the summary."""
    os.makedirs(out_dir, exist_ok=True)
    summary = result.summary()
    if result.trajectory is not None:
        result.trajectory.to_csv(os.path.join(out_dir, result.config.csv))
    with open(os.path.join(out_dir, result.config.summary), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def compare_scenarios(a: ScenarioResult, b: ScenarioResult, fraction: float = 0.02) -> dict:
    """Side-by-side settling times, reduction of ``b`` relative to ``a`` and divergence."""
    ts_a, ts_b = settling_time(a.trajectory, fraction), settling_time(b.trajectory, fraction)
    try:
        div = trajectory_divergence(a.trajectory, b.trajectory)
    except ValueError:
        div = None
    return {
        "a": {"name": a.config.name, "variant": a.config.variant.value, "settling_time": ts_a,
              **terminal_report(a.trajectory)},
        "b": {"name": b.config.name, "variant": b.config.variant.value, "settling_time": ts_b,
              **terminal_report(b.trajectory)},
        "fraction": fraction,
        "reduction_percent": reduction_percent(ts_a, ts_b),
        "divergence": div,
        "configs": [a.config.to_dict(), b.config.to_dict()],
    }


def raise_if_failed(tr: Trajectory):
    if tr is not None and not tr.success and tr.message.startswith("SingularConfiguration"):
        raise SingularConfiguration(tr.message)
