"""Concrete generators: the two-state charge-transfer population model and
synthetic test generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .matcore import skew_part
from .odeflow import Generator


@dataclass(frozen=True)
class RateChannel:
    """Smoothly decaying rate k(t) = k_inf + (k0 - k_inf) exp(-t / tau)."""

    k0: float
    k_inf: float
    tau: float

    def __post_init__(self):
        if self.k0 < 0 or self.k_inf < 0:
            raise InvalidInputError("rates must be nonnegative")
        if self.tau <= 0:
            raise InvalidInputError("rate decay time must be positive")

    def rate(self, t):
        return self.k_inf + (self.k0 - self.k_inf) * np.exp(-t / self.tau)


@dataclass(frozen=True)
class RateModel:
    donor_to_acceptor: RateChannel
    acceptor_to_donor: RateChannel


# Demo parameter set: a strong sub-atomic-unit transient burst (mimicking the
# short-time spike of nonequilibrium golden-rule rate coefficients) followed
# by a small plateau. The burst separates the propagator's singular values
# well before the earliest seed time, keeping every factor-flow guard clear
# over a [50, 1e4] au run with 400 steps.
DEFAULT_DEMO_MODEL = RateModel(
    donor_to_acceptor=RateChannel(k0=8.5, k_inf=1.5e-4, tau=0.012),
    acceptor_to_donor=RateChannel(k0=4.25, k_inf=7.5e-5, tau=0.012),
)


def two_state_generator(m: RateModel) -> Generator:
    """Population rate matrix [[-k_da, k_ad], [k_da, -k_ad]]; columns sum to
    zero at every time, so total population is conserved."""

    def matrix(t):
        k_da = m.donor_to_acceptor.rate(t)
        k_ad = m.acceptor_to_donor.rate(t)
        return np.array([[-k_da, k_ad], [k_da, -k_ad]])

    return Generator(dim=2, matrix=matrix)


def analytic_two_state(k_da: float, k_ad: float, t: float) -> tuple[float, float]:
    """Closed-form populations for constant rates and P_D(0) = 1."""
    k = k_da + k_ad
    if k == 0.0:
        return 1.0, 0.0
    p_d = k_ad / k + (k_da / k) * np.exp(-k * t)
    return float(p_d), float(1.0 - p_d)


def synthetic_generator(n: int, seed: int, smoothness: float,
                        omega: float = 0.7, decay: float = 2.0) -> Generator:
    """Seeded random generator A(t) = A0 + smoothness*(A1 sin(wt) + A2 e^{-t/decay})."""
    if n < 2:
        raise InvalidInputError("dimension must be >= 2")
    rng = np.random.default_rng(seed)
    a0, a1, a2 = (rng.standard_normal((n, n)) for _ in range(3))

    def matrix(t):
        return a0 + smoothness * (a1 * np.sin(omega * t) + a2 * np.exp(-t / decay))

    return Generator(dim=n, matrix=matrix)


def skew_generator(n: int, seed: int, smoothness: float = 0.0) -> Generator:
    """Skew-projected synthetic generator; its exact flow is orthogonal."""
    base = synthetic_generator(n, seed, smoothness)
    return Generator(dim=n, matrix=lambda t: skew_part(base(t)))
