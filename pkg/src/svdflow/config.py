"""Run configuration: defaults, JSON config files, flag overrides.

Config file schema (JSON, all fields optional):

    {
      "model": {"name": "two_state_demo", "params": {"k0_da": 8.5, ...}},
      "t_seed": 50.0,
      "t_f": 10000.0,
      "n_steps": 400,
      "n_shots": 1000000,
      "mode": "exact" | "sampled" | "noisy",
      "noise": {"p1": 0.0, "p2": 0.0, "p_ro": 0.0},
      "rng_seed": 1234,
      "seed_substeps": 100000,
      "ref_refine": 50,
      "tol_degen": 1e-8,
      "tol_sat": 1e-6,
      "sign_floor": null,
      "project": false,
      "dilation": false
    }

Command-line flags win over file values.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError, InvalidInputError
from .models import DEFAULT_DEMO_MODEL, RateChannel, RateModel, synthetic_generator, two_state_generator
from .odeflow import Generator
from .qsim import MODES, NoiseSpec


@dataclass
class RunConfig:
    model_name: str = "two_state_demo"
    model_params: dict = field(default_factory=dict)
    t_seed: float = 50.0
    t_f: float = 1.0e4
    n_steps: int = 400
    n_shots: int = 1_000_000
    mode: str = "exact"
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    rng_seed: int = 1234
    seed_substeps: int = 100_000
    ref_refine: int = 50
    tol_degen: float = 1e-8
    tol_sat: float = 1e-6
    sign_floor: float | None = None
    project: bool = False
    dilation: bool = False

    @property
    def step_size(self) -> float:
        return (self.t_f - self.t_seed) / self.n_steps

    def validate(self) -> "RunConfig":
        if self.t_seed <= 0 or self.t_f <= self.t_seed:
            raise ConfigError(f"need 0 < t_seed < t_f, got {self.t_seed}, {self.t_f}")
        if self.n_steps < 3:
            raise ConfigError("n_steps must be >= 3 (extrapolation history)")
        if self.t_seed - 2 * self.step_size <= 0:
            raise ConfigError("t_seed - 2h must be positive for seeding")
        if self.n_shots < 1:
            raise ConfigError("n_shots must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.seed_substeps < 3 or self.ref_refine < 1:
            raise ConfigError("seed_substeps must be >= 3 and ref_refine >= 1")
        return self


def _demo_rate_model(params: dict) -> RateModel:
    d = DEFAULT_DEMO_MODEL
    merged = {
        "k0_da": d.donor_to_acceptor.k0,
        "kinf_da": d.donor_to_acceptor.k_inf,
        "tau_da": d.donor_to_acceptor.tau,
        "k0_ad": d.acceptor_to_donor.k0,
        "kinf_ad": d.acceptor_to_donor.k_inf,
        "tau_ad": d.acceptor_to_donor.tau,
    }
    unknown = set(params) - set(merged)
    if unknown:
        raise ConfigError(f"unknown two_state_demo parameters: {sorted(unknown)}")
    merged.update(params)
    return RateModel(
        donor_to_acceptor=RateChannel(merged["k0_da"], merged["kinf_da"], merged["tau_da"]),
        acceptor_to_donor=RateChannel(merged["k0_ad"], merged["kinf_ad"], merged["tau_ad"]),
    )


def build_generator(cfg: RunConfig) -> Generator:
    try:
        if cfg.model_name == "two_state_demo":
            return two_state_generator(_demo_rate_model(cfg.model_params))
        if cfg.model_name == "synthetic":
            p = dict(cfg.model_params)
            return synthetic_generator(
                n=int(p.pop("n", 2)), seed=int(p.pop("seed", 0)),
                smoothness=float(p.pop("smoothness", 0.1)), **p)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown model {cfg.model_name!r}")


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        cfg = _apply_mapping(cfg, data)
    if overrides:
        cfg = _apply_mapping(cfg, overrides)
    return cfg.validate()


def _apply_mapping(cfg: RunConfig, data: dict) -> RunConfig:
    known = {f.name for f in dataclasses.fields(RunConfig)}
    updates = {}
    for key, value in data.items():
        if key == "model":
            if not isinstance(value, dict):
                raise ConfigError("'model' must be an object with name/params")
            if "name" in value:
                updates["model_name"] = str(value["name"])
            if "params" in value:
                updates["model_params"] = dict(value["params"])
        elif key == "noise":
            if isinstance(value, NoiseSpec):
                updates["noise"] = value
            else:
                try:
                    updates["noise"] = NoiseSpec(**value)
                except (TypeError, InvalidInputError) as exc:
                    raise ConfigError(f"bad noise spec: {exc}") from exc
        elif key in known:
            updates[key] = value
        else:
            raise ConfigError(f"unknown config field {key!r}")
    try:
        return dataclasses.replace(cfg, **updates)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def config_as_dict(cfg: RunConfig) -> dict:
    out = dataclasses.asdict(cfg)
    out["noise"] = {"p1": cfg.noise.p1, "p2": cfg.noise.p2, "p_ro": cfg.noise.p_ro}
    return out
