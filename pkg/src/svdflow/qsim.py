"""Statevector circuit emulator for the factor-flow updates.

Registers are little-endian: qubit 0 is the least significant bit of the
basis-state index. Vectors of dimension N are embedded into the next power
of two with zero padding.

Three fidelity modes drive every operation here:
  exact   - amplitudes are read directly, no sampling
  sampled - multinomial shot sampling of measurement probabilities
  noisy   - shots plus a parametric noise model (per-gate depolarizing and
            symmetric readout flips)

Gate noise is trajectory-unraveled at the single-execution level
(`apply_unitary` stochastically applies one uniform Pauli string with the
per-gate probability). Shot-based estimators instead use the exact
channel-averaged distribution (`circuit_probs`), which is distributionally
identical to running every shot as its own independent trajectory - the
granularity at which hardware repeats a circuit.

Determinism: every stochastic sub-task derives its own RNG from
(master_seed, step_index, task_kind, ...) via numpy's SeedSequence, so runs
with identical configurations are bit-identical regardless of evaluation
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    InvalidGateError,
    InvalidInputError,
    PhaseReconstructionError,
    PostSelectionStarvedError,
    RowReconstructionError,
    SvdFlowError,
)
from .matcore import cayley, cayley_diag, nearest_orthogonal
from .svdeom import (
    DEFAULT_TOL_DEGEN,
    DEFAULT_TOL_SAT,
    GeneratorSnapshot,
    SvdFactors,
    midpoint_generators,
    sigma_plus,
    snapshot_from_arrays,
)

MODES = ("exact", "sampled", "noisy")

_PAULIS = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Deterministic per-task RNG from the master seed and an integer path."""
    return np.random.default_rng([int(master_seed), *map(int, path)])


def pad_dim(n: int) -> int:
    k = 1
    while k < n:
        k *= 2
    return k


def embed_unitary(u: np.ndarray, dim: int) -> np.ndarray:
    """Pad a unitary acting on the first len(u) basis states with identity."""
    n = u.shape[0]
    if n == dim:
        return u
    out = np.eye(dim, dtype=complex)
    out[:n, :n] = u
    return out


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing probabilities per gate plus symmetric readout flips."""

    p1: float = 0.0
    p2: float = 0.0
    p_ro: float = 0.0

    def __post_init__(self):
        for name in ("p1", "p2", "p_ro"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidInputError(f"noise probability {name}={v} outside [0, 1]")

    @property
    def any_gate_noise(self) -> bool:
        return self.p1 > 0.0 or self.p2 > 0.0


@dataclass(frozen=True)
class ShotPlan:
    n_shots: int
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_shots < 1:
            raise InvalidInputError("n_shots must be >= 1")


@dataclass(frozen=True)
class MeasRecord:
    """Counts per basis state with derived estimates."""

    counts: np.ndarray
    n_shots: int

    @property
    def probs(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    @property
    def stderr(self) -> np.ndarray:
        p = self.probs
        return np.sqrt(p * (1.0 - p) / self.counts.sum())


@dataclass(frozen=True)
class StateVec:
    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if len(self.amps) != 2**self.n_qubits:
            raise InvalidInputError("amplitude count must be 2**n_qubits")
        norm = np.linalg.norm(self.amps)
        if abs(norm - 1.0) > 1e-12:
            raise InvalidInputError(f"state norm {norm} deviates from 1")

    @classmethod
    def from_amplitudes(cls, vec: Sequence[complex]) -> "StateVec":
        vec = np.asarray(vec, dtype=complex)
        dim = max(2, pad_dim(len(vec)))
        amps = np.zeros(dim, dtype=complex)
        amps[: len(vec)] = vec
        return cls(n_qubits=int(np.log2(dim)), amps=amps)

    @property
    def dim(self) -> int:
        return len(self.amps)


def _apply_matrix(amps: np.ndarray, u: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply a 2^k x 2^k matrix on the given qubits of a statevector."""
    n = int(np.log2(len(amps)))
    k = len(qubits)
    tensor = amps.reshape([2] * n)
    # numpy axis 0 is the most significant bit; qubit q lives on axis n-1-q.
    # The gate index uses qubits[0] as its least significant bit, so the
    # axes are pulled to the front in reversed qubit order.
    axes = [n - 1 - q for q in reversed(qubits)]
    moved = np.moveaxis(tensor, axes, range(k))
    shape = moved.shape
    out = (u @ moved.reshape(2**k, -1)).reshape(shape)
    return np.moveaxis(out, range(k), axes).reshape(-1)


def _pauli_string(idx: int, k: int) -> list[np.ndarray]:
    return [_PAULIS[(idx >> (2 * j)) & 3] for j in range(k)]


def apply_unitary(state: StateVec, u: np.ndarray, qubits: Sequence[int] | None = None,
                  noise: NoiseSpec | None = None,
                  rng: np.random.Generator | None = None) -> StateVec:
    """Apply a unitary on a qubit subset, then (optionally) one stochastic
    depolarizing event on the touched qubits.

    With probability p (p1 for one touched qubit, p2 otherwise) a Pauli
    string drawn uniformly from all 4^k strings is applied; averaging over
    trajectories reproduces the depolarizing channel of strength p.
    """
    u = np.asarray(u, dtype=complex)
    if qubits is None:
        qubits = list(range(int(np.log2(u.shape[0]))))
    k = len(qubits)
    if u.shape != (2**k, 2**k):
        raise InvalidInputError(
            f"gate shape {u.shape} does not match {k} target qubits")
    if np.linalg.norm(u.conj().T @ u - np.eye(2**k)) > 1e-10:
        raise InvalidGateError("gate matrix is not unitary")
    amps = _apply_matrix(state.amps, u, qubits)
    if noise is not None and noise.any_gate_noise and rng is not None:
        p = noise.p1 if k == 1 else noise.p2
        if p > 0.0 and rng.random() < p:
            idx = int(rng.integers(4**k))
            for q, pauli in zip(qubits, _pauli_string(idx, k)):
                amps = _apply_matrix(amps, pauli, [q])
    return StateVec(n_qubits=state.n_qubits, amps=amps)


def _apply_channel_unitary(rho: np.ndarray, u: np.ndarray,
                           qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """U rho U^dagger, treating rho.flatten() as a 2n-qubit vector: ket qubit
    q sits at flattened position q + n_qubits, bra qubit q at position q."""
    flat = rho.reshape(-1)
    flat = _apply_matrix(flat, u, [q + n_qubits for q in qubits])
    flat = _apply_matrix(flat, np.conj(u), list(qubits))
    return flat.reshape(rho.shape)


def _depolarize(rho: np.ndarray, qubits: Sequence[int], n_qubits: int,
                p: float) -> np.ndarray:
    """Exact depolarizing channel on a qubit subset: uniform Pauli average."""
    k = len(qubits)
    acc = np.zeros_like(rho)
    for idx in range(4**k):
        term = rho
        for q, pauli in zip(qubits, _pauli_string(idx, k)):
            term = _apply_channel_unitary(term, pauli, [q], n_qubits)
        acc += term
    return (1.0 - p) * rho + (p / 4**k) * acc


def circuit_probs(state: StateVec, gates: Sequence[tuple], noise: NoiseSpec | None
                  ) -> np.ndarray:
    """Measurement probabilities after a gate list [(u, qubits), ...].

    Without gate noise this is a pure statevector run. With gate noise the
    exact depolarizing channel is applied per gate on a density matrix; a
    multinomial draw from the result is distributionally identical to
    running each shot as an independent Pauli trajectory (iid per shot),
    which is how hardware executes repeated circuits.
    """
    if noise is None or not noise.any_gate_noise:
        for u, qubits in gates:
            state = apply_unitary(state, u, qubits)
        return np.abs(state.amps) ** 2
    n = state.n_qubits
    rho = np.outer(state.amps, state.amps.conj())
    for u, qubits in gates:
        u = np.asarray(u, dtype=complex)
        if qubits is None:
            qubits = list(range(int(np.log2(u.shape[0]))))
        k = len(qubits)
        if np.linalg.norm(u.conj().T @ u - np.eye(2**k)) > 1e-10:
            raise InvalidGateError("gate matrix is not unitary")
        rho = _apply_channel_unitary(rho, u, qubits, n)
        p = noise.p1 if k == 1 else noise.p2
        if p > 0.0:
            rho = _depolarize(rho, qubits, n, p)
    probs = np.real(np.diag(rho))
    return np.clip(probs, 0.0, None)


def readout_confusion(n_qubits: int, p_ro: float) -> np.ndarray:
    """Full-register confusion matrix for independent symmetric bit flips."""
    r1 = np.array([[1.0 - p_ro, p_ro], [p_ro, 1.0 - p_ro]])
    out = np.array([[1.0]])
    for _ in range(n_qubits):
        out = np.kron(r1, out)
    return out


def sample(state: StateVec, plan: ShotPlan, noise: NoiseSpec | None = None,
           rng: np.random.Generator | None = None) -> MeasRecord:
    """Multinomial draw from |amps|^2 with per-qubit readout flips.

    Independent per-shot bit flips compose with the multinomial draw into a
    single multinomial over the confusion-mixed distribution, which is what
    is sampled here (identical in distribution, far cheaper).
    """
    return sample_probs(np.abs(state.amps) ** 2, state.n_qubits, plan,
                        noise, rng)


def sample_probs(probs: np.ndarray, n_qubits: int, plan: ShotPlan,
                 noise: NoiseSpec | None = None,
                 rng: np.random.Generator | None = None) -> MeasRecord:
    """Multinomial draw from a probability vector with readout flips mixed in."""
    if rng is None:
        rng = np.random.default_rng(plan.rng_seed)
    probs = probs / probs.sum()
    if noise is not None and noise.p_ro > 0.0:
        probs = readout_confusion(n_qubits, noise.p_ro) @ probs
        probs = probs / probs.sum()
    counts = rng.multinomial(plan.n_shots, probs)
    return MeasRecord(counts=counts, n_shots=plan.n_shots)


def _sign_or(values: np.ndarray, fallback: float = 1.0) -> np.ndarray:
    s = np.sign(values)
    s[s == 0.0] = fallback
    return s


def default_sign_floor(n_shots: int) -> float:
    return 10.0 / np.sqrt(n_shots)


def propagate_row(row: np.ndarray, cay_zt: np.ndarray, prev_signs: np.ndarray,
                  plan: ShotPlan | None = None, noise: NoiseSpec | None = None,
                  mode: str = "exact", rng: np.random.Generator | None = None,
                  sign_floor: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Advance one row of an orthogonal factor under the transposed Cayley map.

    In sampled/noisy modes the updated row is encoded as a quantum state,
    measured, and rebuilt as sign * sqrt(p_hat). Signs carry over from the
    previous step; entries whose measured magnitude falls below the sign
    floor take the sign of the noise-free classical prediction instead.
    """
    row = np.asarray(row, dtype=float)
    n = len(row)
    if cay_zt.shape != (n, n):
        raise InvalidInputError("row/matrix dimension mismatch")
    predicted = cay_zt @ row
    if mode == "exact":
        return predicted, _sign_or(predicted)
    if plan is None:
        raise InvalidInputError("sampled/noisy modes require a ShotPlan")
    gate_noise = noise if mode == "noisy" else None
    state = StateVec.from_amplitudes(row)
    gate = embed_unitary(cay_zt.astype(complex), state.dim)
    probs = circuit_probs(state, [(gate, None)], gate_noise)
    rec = sample_probs(probs, state.n_qubits, plan, gate_noise, rng)
    p = rec.counts[:n].astype(float)
    total = p.sum()
    if total == 0.0:
        raise RowReconstructionError("all sampled row magnitudes are zero")
    mags = np.sqrt(p / total)
    floor = default_sign_floor(plan.n_shots) if sign_floor is None else sign_floor
    signs = np.where(mags >= floor, prev_signs, _sign_or(predicted))
    new_row = signs * mags
    return new_row, signs


def _givens_hadamard(dim: int, j: int) -> np.ndarray:
    """Hadamard-type mixing of basis states 0 and j, identity elsewhere."""
    g = np.eye(dim, dtype=complex)
    r = 1.0 / np.sqrt(2.0)
    g[0, 0] = r
    g[0, j] = r
    g[j, 0] = r
    g[j, j] = -r
    return g


def evolve_sigma_phase(phases: np.ndarray, lplus_mid: np.ndarray, h: float,
                       plan: ShotPlan | None = None,
                       noise: NoiseSpec | None = None, mode: str = "exact",
                       rng_factory: Callable[..., np.random.Generator] | None = None,
                       contrast_floor: float = 0.5) -> np.ndarray:
    """Advance the diagonal-unitary phases by a Cayley step of -i L.

    The state (1/sqrt(N)) sum_j e^{i phi_j} |j> is evolved under the diagonal
    Cayley unitary. In sampled/noisy modes each relative phase is recovered
    from a pair of two-level interferometers on {|0>, |j>}: a Hadamard-type
    mixing yields cos(phi_j), the same mixing preceded by an S^dagger phase
    on |j> yields sin(phi_j), and phi_j = atan2(sin, cos). Phase 0 is the
    reference and stays 0.
    """
    phases = np.asarray(phases, dtype=float)
    if np.any(np.abs(phases) >= np.pi):
        raise InvalidInputError("phases must lie inside (-pi, pi)")
    n = len(phases)
    factors = cayley_diag(lplus_mid, h)
    if mode == "exact":
        new = phases + np.angle(factors)
        new = np.angle(np.exp(1j * new))  # wrap into (-pi, pi]
        new[0] = 0.0
        return new
    if plan is None:
        raise InvalidInputError("sampled/noisy modes require a ShotPlan")
    if rng_factory is None:
        raise InvalidInputError("sampled/noisy modes require an rng factory")
    gate_noise = noise if mode == "noisy" else None
    base = StateVec.from_amplitudes(np.exp(1j * phases) / np.sqrt(n))
    dim = base.dim
    evo = embed_unitary(np.diag(factors), dim)
    new = np.zeros(n)
    for j in range(1, n):
        estimates = []
        for which, pre in enumerate((None, "sdg")):
            rng = rng_factory(j, which)
            gates = [(evo, None)]
            if pre == "sdg":
                sdg = np.eye(dim, dtype=complex)
                sdg[j, j] = -1j
                gates.append((sdg, None))
            gates.append((_givens_hadamard(dim, j), None))
            probs = circuit_probs(base, gates, gate_noise)
            rec = sample_probs(probs, base.n_qubits, plan, gate_noise, rng)
            p = rec.probs
            denom = p[0] + p[j]
            if denom <= 0.0:
                raise PhaseReconstructionError(
                    f"no counts in the interferometer subspace for phase {j}")
            estimates.append((p[0] - p[j]) / denom)
        c, s = estimates
        if c * c + s * s < contrast_floor:
            raise PhaseReconstructionError(
                f"interferometer contrast {c*c + s*s:.3f} below "
                f"{contrast_floor} for phase {j}; decoherence too strong")
        new[j] = np.arctan2(s, c)
    return new


@dataclass(frozen=True)
class DilationResult:
    probs: np.ndarray
    acceptance_rate: float
    amplitudes: np.ndarray | None = None
    record: MeasRecord | None = None


def dilation_circuit(v0: np.ndarray, f: SvdFactors, plan: ShotPlan | None = None,
                     noise: NoiseSpec | None = None, mode: str = "exact",
                     rng: np.random.Generator | None = None) -> DilationResult:
    """One-ancilla dilation circuit applying the nonunitary propagator.

    Circuit: H(ancilla) -> V^T (system) -> block-diagonal Sp (+) conj(Sp)
    selected by the ancilla -> U (system) -> H(ancilla) -> measure.
    Conditioned on ancilla 0 the system state is Phi v0 / sigma1 up to
    normalization; the acceptance rate ||Phi v0||^2 / sigma1^2 recovers the
    norm.
    """
    v0 = np.asarray(v0, dtype=float)
    if abs(np.linalg.norm(v0) - 1.0) > 1e-10:
        raise InvalidInputError("initial vector must have unit norm")
    n = len(v0)
    dim = pad_dim(n)
    n_sys = int(np.log2(dim)) if dim > 1 else 1
    dim = 2**n_sys
    anc = n_sys  # ancilla is the most significant qubit
    amps = np.zeros(2 * dim, dtype=complex)
    amps[:n] = v0
    state = StateVec(n_qubits=n_sys + 1, amps=amps)
    gate_noise = noise if mode == "noisy" else None
    had = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
    sys_qubits = list(range(n_sys))

    sp = np.ones(dim, dtype=complex)
    sp[:n] = sigma_plus(f.tilde)
    u_sigma = np.diag(np.concatenate([sp, np.conj(sp)]))

    gates = [
        (had, [anc]),
        (embed_unitary(f.v.T.astype(complex), dim), sys_qubits),
        (u_sigma, list(range(n_sys + 1))),
        (embed_unitary(f.u.astype(complex), dim), sys_qubits),
        (had, [anc]),
    ]

    if mode == "exact":
        for u, qubits in gates:
            state = apply_unitary(state, u, qubits)
        block = state.amps[:dim]
        acceptance = float(np.sum(np.abs(block) ** 2))
        if acceptance == 0.0:
            raise PostSelectionStarvedError("post-selected branch has zero weight")
        probs = np.abs(block[:n]) ** 2 / acceptance
        return DilationResult(probs=probs, acceptance_rate=acceptance,
                              amplitudes=block[:n] / np.sqrt(acceptance))
    if plan is None:
        raise InvalidInputError("sampled/noisy modes require a ShotPlan")
    full_probs = circuit_probs(state, gates, gate_noise)
    rec = sample_probs(full_probs, state.n_qubits, plan, gate_noise, rng)
    accepted = rec.counts[:dim].astype(float)
    n_acc = accepted.sum()
    if n_acc == 0.0:
        raise PostSelectionStarvedError("no shots survived ancilla post-selection")
    kept = accepted[:n]
    probs = kept / n_acc
    return DilationResult(probs=probs, acceptance_rate=float(n_acc / plan.n_shots),
                          record=rec)


@dataclass(frozen=True)
class QsvdState:
    """Quantum-side representation: factor matrices rebuilt from measured
    rows (their entries carry the tracked signs), diagonal-unitary phases,
    and the classically integrated leading singular value."""

    u: np.ndarray
    v: np.ndarray
    phases: np.ndarray
    sigma1: float
    t: float

    @classmethod
    def from_factors(cls, f: SvdFactors) -> "QsvdState":
        phases = np.arccos(np.clip(f.tilde, -1.0, 1.0))
        phases[0] = 0.0
        return cls(u=f.u.copy(), v=f.v.copy(), phases=phases,
                   sigma1=f.sigma1, t=f.t)

    @property
    def tilde(self) -> np.ndarray:
        tz = np.cos(self.phases)
        tz[0] = 1.0
        return tz

    def to_factors(self) -> SvdFactors:
        tz = self.tilde
        return SvdFactors(u=self.u, v=self.v, sigma=tz * self.sigma1,
                          sigma1=self.sigma1, tilde=tz, t=self.t)


def qsvd_step(state: QsvdState, history: Sequence[GeneratorSnapshot], a,
              h: float, plan: ShotPlan | None = None,
              noise: NoiseSpec | None = None, mode: str = "exact",
              master_seed: int = 0, step_index: int = 0,
              project: bool = False, sign_floor: float | None = None,
              tol_degen: float = DEFAULT_TOL_DEGEN,
              tol_sat: float = DEFAULT_TOL_SAT
              ) -> tuple[QsvdState, GeneratorSnapshot]:
    """One full step of the emulated-quantum factor propagation.

    Returns the advanced state together with the generator snapshot taken at
    the pre-step factors (the caller rolls it into the extrapolation
    history). Generators are rebuilt from the measured factors and
    skew-symmetrized, so every Cayley update uses an exactly skew generator.
    """
    if mode not in MODES:
        raise InvalidInputError(f"unknown fidelity mode {mode!r}")
    try:
        snap = snapshot_from_arrays(state.u, state.tilde, a, state.t,
                                    tol_degen, tol_sat)
        z_mid, w_mid, l_mid, g11_mid = midpoint_generators(snap, history)
        cay_zt = cayley(z_mid, h).T
        cay_wt = cayley(w_mid, h).T
        n = state.u.shape[0]
        u_new = np.empty_like(state.u)
        v_new = np.empty_like(state.v)
        for i in range(n):
            rng = derive_rng(master_seed, step_index, 0, i)
            u_new[i], _ = propagate_row(state.u[i], cay_zt, _sign_or(state.u[i]),
                                        plan, noise, mode, rng, sign_floor)
            rng = derive_rng(master_seed, step_index, 1, i)
            v_new[i], _ = propagate_row(state.v[i], cay_wt, _sign_or(state.v[i]),
                                        plan, noise, mode, rng, sign_floor)
        if project:
            u_new = nearest_orthogonal(u_new)
            v_new = nearest_orthogonal(v_new)
        phases_new = evolve_sigma_phase(
            state.phases, l_mid, h, plan, noise, mode,
            rng_factory=lambda j, w: derive_rng(master_seed, step_index, 2, j, w))
        sigma1_new = state.sigma1 * float(np.exp(h * g11_mid))
    except SvdFlowError as exc:
        if exc.step is None:
            exc.step = step_index
        raise
    return (QsvdState(u=u_new, v=v_new, phases=phases_new,
                      sigma1=sigma1_new, t=state.t + h), snap)
