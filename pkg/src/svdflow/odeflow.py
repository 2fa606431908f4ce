"""Time-dependent generators, RK2 reference integration and classical seeding.

The explicit midpoint rule is used throughout:

    k1 = A(t) v
    v(t+h) = v + h * A(t + h/2) @ (v + (h/2) k1)

which matches the midpoint-centered Cayley updates used by the factor flow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateSingularValuesError, InvalidInputError, OverflowGuardError
from .matcore import svd
from .svdeom import DEFAULT_TOL_DEGEN, SvdFactors


@dataclass(frozen=True)
class Generator:
    """Evaluable time-dependent coefficient matrix A(t), shape (dim, dim)."""

    dim: int
    matrix: Callable[[float], np.ndarray]

    def __call__(self, t: float) -> np.ndarray:
        return self.matrix(t)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise InvalidInputError("trajectory times must be strictly increasing")


def rk2_step(a: Generator, v: np.ndarray, t: float, h: float) -> np.ndarray:
    if h <= 0:
        raise InvalidInputError(f"step size must be positive, got {h}")
    k1 = a(t) @ v
    out = v + h * (a(t + h / 2.0) @ (v + (h / 2.0) * k1))
    if not np.all(np.isfinite(out)):
        raise OverflowGuardError(f"non-finite state after step at t={t:g}")
    return out


def integrate(a: Generator, v0: np.ndarray, t0: float, t1: float,
              nsteps: int) -> Trajectory:
    if t1 <= t0:
        raise InvalidInputError(f"need t1 > t0, got [{t0}, {t1}]")
    if nsteps < 1:
        raise InvalidInputError("nsteps must be >= 1")
    h = (t1 - t0) / nsteps
    states = np.empty((nsteps + 1, len(v0)))
    states[0] = v0
    v = np.asarray(v0, dtype=float)
    for i in range(nsteps):
        t = t0 + i * h
        try:
            v = rk2_step(a, v, t, h)
        except OverflowGuardError as exc:
            exc.step = i
            raise
        states[i + 1] = v
    times = t0 + h * np.arange(nsteps + 1)
    return Trajectory(times=times, states=states)


def propagator(a: Generator, t0: float, t1: float, nsteps: int,
               phi0: np.ndarray | None = None) -> np.ndarray:
    """Integrate Phi' = A(t) Phi by matrix RK2 from Phi(t0) = phi0 (default I)."""
    if t1 < t0:
        raise InvalidInputError(f"need t1 >= t0, got [{t0}, {t1}]")
    phi = np.eye(a.dim) if phi0 is None else np.array(phi0, dtype=float)
    if t1 == t0:
        return phi
    if nsteps < 1:
        raise InvalidInputError("nsteps must be >= 1")
    h = (t1 - t0) / nsteps
    for i in range(nsteps):
        t = t0 + i * h
        k1 = a(t) @ phi
        phi = phi + h * (a(t + h / 2.0) @ (phi + (h / 2.0) * k1))
        if not np.all(np.isfinite(phi)):
            raise OverflowGuardError(f"non-finite propagator at t={t:g}", step=i)
    return phi


def _check_seed_gaps(s: np.ndarray, t: float, tol_degen: float):
    rel = np.abs(s[:, None] - s[None, :]) / s[0]
    gaps = rel[np.triu_indices(len(s), k=1)]
    if gaps.size and gaps.min() < tol_degen:
        raise DegenerateSingularValuesError(
            f"seed propagator at t={t:g} has near-degenerate singular values "
            f"(relative gap {gaps.min():.3e} < {tol_degen:.3e}); "
            "increase the seed time so the flow separates them"
        )


def seed_factors(a: Generator, t_seed: float, h: float, nsub: int = 500,
                 tol_degen: float = DEFAULT_TOL_DEGEN
                 ) -> tuple[SvdFactors, SvdFactors, SvdFactors]:
    """Classical seeding: SVD factors at t_seed - 2h, t_seed - h, t_seed.

    The propagator is integrated once from 0 and continued across the three
    seed times; nsub substeps are distributed over [0, t_seed] in proportion
    to segment length.
    """
    if t_seed - 2.0 * h <= 0:
        raise InvalidInputError(
            f"t_seed - 2h = {t_seed - 2 * h:g} must be positive")
    if nsub < 3:
        raise InvalidInputError("nsub must be >= 3")
    times = [0.0, t_seed - 2.0 * h, t_seed - h, t_seed]
    phi = None
    out = []
    for lo, hi in zip(times[:-1], times[1:]):
        n_seg = max(1, int(round(nsub * (hi - lo) / t_seed)))
        phi = propagator(a, lo, hi, n_seg, phi0=phi)
        u, s, v = svd(phi)
        _check_seed_gaps(s, hi, tol_degen)
        out.append(SvdFactors.from_svd(u, s, v, hi))
    return tuple(out)
