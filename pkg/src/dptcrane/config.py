"""Scenario configuration and the reference figure presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .certify import DEFAULT_SAMPLES, DEFAULT_SEED
from .dynamics import ActuationVariant, CraneParams
from .errors import InvalidParameters
from .sim import IntegratorOptions
from .synthesis import REFERENCE_POLES, PoleSet

FIG3_X0 = (0.234, 0.2, 0.0, -0.001, 0.0, 0.0, 0.0, 0.0)
FIG5_X0 = (0.235, 0.2, 0.0, -0.001, 0.0, 0.0, 0.0, 0.0)
FIG8_X0 = (3.0, 1.0, 0.0, -0.001, 0.0, 0.0, 0.0, 0.0)

_KEYS = {"name", "params", "variant", "poles", "x0", "integrator", "gains", "certify", "outputs"}


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str = "custom"
    params: CraneParams = field(default_factory=CraneParams)
    variant: ActuationVariant = ActuationVariant.UNDERACTUATED
    poles: PoleSet = REFERENCE_POLES
    x0: tuple = FIG3_X0
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    gains: str = "place"
    n_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    csv: str = "trajectory.csv"
    summary: str = "summary.json"

    def __post_init__(self):
        object.__setattr__(self, "variant", ActuationVariant.parse(self.variant))
        x0 = tuple(float(v) for v in self.x0)
        if len(x0) != 8 or not np.all(np.isfinite(x0)):
            raise InvalidParameters("x0 must be 8 finite numbers")
        object.__setattr__(self, "x0", x0)
        if self.gains not in ("place", "reference"):
            raise InvalidParameters("gains must be 'place' or 'reference'")
        if len(self.poles) != 8:
            raise InvalidParameters("exactly 8 poles are required")
        if self.n_samples < 1:
            raise InvalidParameters("n_samples must be positive")
        self.params.require_inertias()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params.to_dict(),
            "variant": self.variant.value,
            "poles": self.poles.to_list(),
            "x0": list(self.x0),
            "integrator": self.integrator.to_dict(),
            "gains": self.gains,
            "certify": {"n_samples": self.n_samples, "seed": self.seed},
            "outputs": {"csv": self.csv, "summary": self.summary},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise InvalidParameters("config must be a JSON object")
        unknown = set(data) - _KEYS
        if unknown:
            raise InvalidParameters(f"unknown config keys: {sorted(unknown)}")
        kw = {}
        try:
            if "name" in data:
                kw["name"] = str(data["name"])
            if "params" in data:
                kw["params"] = CraneParams(**{k: float(v) for k, v in data["params"].items()})
            if "variant" in data:
                kw["variant"] = ActuationVariant.parse(data["variant"])
            if "poles" in data:
                kw["poles"] = PoleSet.from_list(data["poles"])
            if "x0" in data:
                kw["x0"] = tuple(data["x0"])
            if "integrator" in data:
                integ = dict(data["integrator"])
                kw["integrator"] = IntegratorOptions(**integ)
            if "gains" in data:
                kw["gains"] = data["gains"]
            cert = data.get("certify", {})
            if "n_samples" in cert:
                kw["n_samples"] = int(cert["n_samples"])
            if "seed" in cert:
                kw["seed"] = int(cert["seed"])
            out = data.get("outputs", {})
            if "csv" in out:
                kw["csv"] = str(out["csv"])
            if "summary" in out:
                kw["summary"] = str(out["summary"])
        except (TypeError, ValueError) as exc:
            raise InvalidParameters(f"malformed config: {exc}") from exc
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameters(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def with_overrides(self, **kw) -> "ScenarioConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if "t_end" in kw:
            kw["integrator"] = replace(kw.get("integrator", self.integrator), t_end=float(kw.pop("t_end")))
        return replace(self, **kw)

    @property
    def t_end(self) -> float:
        return self.integrator.resolved_t_end(self.variant)


def figure_preset(number: int) -> ScenarioConfig:
    """Scenario behind one of the reference simulation figures (3 to 8).

    Figures 4 and 7 show the forces of the runs in figures 3 and 6. Figure 8
    starts far from the target and uses the printed fully actuated gain:
    convergence from there depends on which of the many gains with the
    same poles is used, and the robust placement gain does not converge.
    """
    u, f = ActuationVariant.UNDERACTUATED, ActuationVariant.FULLY_ACTUATED
    table = {
        3: (u, FIG3_X0, "place", None),
        4: (u, FIG3_X0, "place", None),
        5: (u, FIG5_X0, "place", None),
        6: (f, FIG3_X0, "place", None),
        7: (f, FIG3_X0, "place", None),
        8: (f, FIG8_X0, "reference", 20.0),
    }
    if number not in table:
        raise InvalidParameters(f"no preset for figure {number}; choose from 3 to 8")
    variant, x0, gains, t_end = table[number]
    return ScenarioConfig(name=f"figure-{number}", variant=variant, x0=x0, gains=gains,
                          integrator=IntegratorOptions(t_end=t_end),
                          csv=f"figure{number}.csv", summary=f"figure{number}.json")
