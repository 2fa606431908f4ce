"""Pipelines shared by the CLI and the test harness: reference integration,
factor-flow propagation (classical-exact or emulated-quantum), and CSV/JSON
output."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .config import RunConfig, build_generator, config_as_dict
from .odeflow import Generator, propagator, rk2_step, seed_factors
from .qsim import (
    QsvdState,
    ShotPlan,
    derive_rng,
    dilation_circuit,
    qsvd_step,
)
from .svdeom import (
    SvdFactors,
    compute_snapshot,
    reconstruct_phi,
    sigma_plus,
    step_factors,
)

TRAJECTORY_COLUMNS = (
    "t", "P_D_ref", "P_A_ref", "P_D_qsvd", "P_A_qsvd", "sigma1",
    "ortho_err_U", "ortho_err_V", "sigma_mod_err", "acceptance_rate",
)
REFERENCE_COLUMNS = ("t", "P_D_ref", "P_A_ref")


def initial_state(dim: int) -> np.ndarray:
    v0 = np.zeros(dim)
    v0[0] = 1.0
    return v0


@dataclass(frozen=True)
class ReferenceResult:
    times: np.ndarray       # 0 followed by the factor-flow grid
    states: np.ndarray      # populations at those times

    @property
    def grid_states(self) -> np.ndarray:
        return self.states[1:]


def compute_reference(cfg: RunConfig, gen: Generator | None = None) -> ReferenceResult:
    """RK2 populations at t=0 and on the factor-flow grid [t_seed, t_f].

    The segment [0, t_seed] uses the seeding grid; each of the n_steps
    output intervals uses ref_refine substeps.
    """
    gen = build_generator(cfg) if gen is None else gen
    h = cfg.step_size
    v = initial_state(gen.dim)
    times = [0.0]
    states = [v.copy()]
    hs = cfg.t_seed / cfg.seed_substeps
    for i in range(cfg.seed_substeps):
        v = rk2_step(gen, v, i * hs, hs)
    times.append(cfg.t_seed)
    states.append(v.copy())
    for i in range(cfg.n_steps):
        t0 = cfg.t_seed + i * h
        hr = h / cfg.ref_refine
        for j in range(cfg.ref_refine):
            v = rk2_step(gen, v, t0 + j * hr, hr)
        times.append(t0 + h)
        states.append(v.copy())
    return ReferenceResult(times=np.array(times), states=np.array(states))


def oracle_propagators(cfg: RunConfig, gen: Generator) -> list[np.ndarray]:
    """Finely integrated propagators at every factor-flow grid point."""
    h = cfg.step_size
    phi = propagator(gen, 0.0, cfg.t_seed, cfg.seed_substeps)
    out = [phi]
    for i in range(cfg.n_steps):
        t0 = cfg.t_seed + i * h
        phi = propagator(gen, t0, t0 + h, cfg.ref_refine, phi0=phi)
        out.append(phi)
    return out


@dataclass(frozen=True)
class QsvdRunResult:
    columns: tuple
    rows: np.ndarray      # shape (n_steps + 1, len(columns))
    summary: dict
    factors: list         # SvdFactors at every grid point


def _record_row(t, p_ref, f: SvdFactors, acc: float) -> list[float]:
    v0 = initial_state(f.dim)
    p_q = reconstruct_phi(f) @ v0
    eye = np.eye(f.dim)
    return [
        t, p_ref[0], p_ref[1], p_q[0], p_q[1], f.sigma1,
        float(np.linalg.norm(f.u.T @ f.u - eye)),
        float(np.linalg.norm(f.v.T @ f.v - eye)),
        float(np.max(np.abs(np.abs(sigma_plus(f.tilde)) - 1.0))),
        acc,
    ]


def _acceptance(cfg: RunConfig, f: SvdFactors, step: int) -> float:
    v0 = initial_state(f.dim)
    if cfg.dilation and cfg.mode != "exact":
        plan = ShotPlan(cfg.n_shots, cfg.rng_seed)
        res = dilation_circuit(v0, f, plan, cfg.noise, cfg.mode,
                               rng=derive_rng(cfg.rng_seed, step, 3))
        return res.acceptance_rate
    w = reconstruct_phi(f) @ v0
    return float(w @ w / f.sigma1**2)


def run_qsvd(cfg: RunConfig, gen: Generator | None = None,
             seeds: tuple | None = None,
             reference: ReferenceResult | None = None) -> QsvdRunResult:
    """Seed, propagate the SVD factors over [t_seed, t_f], and tabulate
    populations against the classical reference.

    mode "exact" runs the noise-free classical factor flow; "sampled" and
    "noisy" run the emulated-quantum path (measured rows and phases).
    """
    t_start = time.perf_counter()
    gen = build_generator(cfg) if gen is None else gen
    h = cfg.step_size
    if seeds is None:
        seeds = seed_factors(gen, cfg.t_seed, h, nsub=cfg.seed_substeps,
                             tol_degen=cfg.tol_degen)
    if reference is None:
        reference = compute_reference(cfg, gen)
    ref_grid = reference.grid_states

    f_m2, f_m1, f0 = seeds
    history = [
        compute_snapshot(f_m2, gen, cfg.tol_degen, cfg.tol_sat),
        compute_snapshot(f_m1, gen, cfg.tol_degen, cfg.tol_sat),
    ]
    rows = [_record_row(f0.t, ref_grid[0], f0, _acceptance(cfg, f0, 0))]
    factors = [f0]

    plan = ShotPlan(cfg.n_shots, cfg.rng_seed)
    if cfg.mode == "exact":
        f = f0
        for i in range(cfg.n_steps):
            snap = compute_snapshot(f, gen, cfg.tol_degen, cfg.tol_sat)
            f = step_factors(f, history, gen, h, snapshot=snap,
                             tol_degen=cfg.tol_degen, tol_sat=cfg.tol_sat)
            history = [history[1], snap]
            rows.append(_record_row(f.t, ref_grid[i + 1], f,
                                    _acceptance(cfg, f, i + 1)))
            factors.append(f)
    else:
        state = QsvdState.from_factors(f0)
        for i in range(cfg.n_steps):
            state, snap = qsvd_step(
                state, history, gen, h, plan, cfg.noise, cfg.mode,
                master_seed=cfg.rng_seed, step_index=i, project=cfg.project,
                sign_floor=cfg.sign_floor, tol_degen=cfg.tol_degen,
                tol_sat=cfg.tol_sat)
            history = [history[1], snap]
            f = state.to_factors()
            rows.append(_record_row(f.t, ref_grid[i + 1], f,
                                    _acceptance(cfg, f, i + 1)))
            factors.append(f)

    table = np.array(rows)
    dpd = np.abs(table[:, 3] - table[:, 1])
    dpa = np.abs(table[:, 4] - table[:, 2])
    summary = {
        "mode": cfg.mode,
        "rng_seed": cfg.rng_seed,
        "n_steps": cfg.n_steps,
        "n_shots": cfg.n_shots,
        "max_abs_dP_D": float(dpd.max()),
        "mean_abs_dP_D": float(dpd.mean()),
        "max_abs_dP_A": float(dpa.max()),
        "mean_abs_dP_A": float(dpa.mean()),
        "wall_time_s": time.perf_counter() - t_start,
        "config": config_as_dict(cfg),
    }
    return QsvdRunResult(columns=TRAJECTORY_COLUMNS, rows=table,
                         summary=summary, factors=factors)


def write_csv(path: str, columns, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")


def write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(path: str) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data
