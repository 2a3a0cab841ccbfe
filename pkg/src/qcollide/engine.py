"""Collision engine: per-step interaction plans, steppers and trajectories.

A collision advances the joint state over one grid interval under
H = omega0 |e><e| + sum_m g(n-m) (|g><e| adag_m + h.c.), where the sum runs
over every lag the kernel stores.  Ancilla indices extend below 1: early
collisions of a kernel with memory couple to pre-history input modes that are
still in vacuum, which is what produces the full decay rate before any
feedback arrives.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, Tuple

import numpy as np

from .coupling import WeightMatrix, collision_weights, coupling_strengths, time_kernel
from .states import SingleExcitationState, TruncatedFockState, init_single_excitation

if TYPE_CHECKING:  # pragma: no cover
    from .config import SimulationConfig

__all__ = [
    "Stepper",
    "Representation",
    "CollisionPlan",
    "Trajectory",
    "MirrorRecursionState",
    "build_plan",
    "step_single_excitation",
    "step_full",
    "mirror_recursion_step",
    "run",
]


class Stepper(str, Enum):
    """Per-collision propagator arithmetic."""

    EXACT = "exact"  # exact matrix exponential on the touched subspace
    SECOND_ORDER = "second_order"  # 1 - i H dt - V^2 dt^2 / 2, as is

    def __str__(self) -> str:  # keep config round-trips readable
        return self.value


class Representation(str, Enum):
    SINGLE_EXCITATION = "single_excitation"
    FULL_FOCK = "full_fock"
    MIRROR_RECURSION = "mirror_recursion"

    def __str__(self) -> str:
        return self.value


@dataclass
class CollisionPlan:
    """Interaction data for each collision, derived from a stationary strength table."""

    strengths: WeightMatrix
    omega0: float
    n_steps: int
    _unitaries: Dict[tuple, np.ndarray] = field(default_factory=dict, repr=False, compare=False)

    @property
    def dt(self) -> float:
        return self.strengths.dt

    @property
    def couplings(self) -> Tuple[Tuple[int, complex], ...]:
        """Nonzero (lag, strength) pairs, ascending lag."""
        return tuple((lag, self.strengths.w(lag)) for lag in self.strengths.lags_present)

    @property
    def max_lag(self) -> int:
        return self.strengths.max_lag

    @property
    def min_ancilla(self) -> int:
        return 1 - self.max_lag

    def touched(self, step: int) -> List[Tuple[int, complex]]:
        """Ancillas hit during collision ``step`` (1-based) with their strengths.

        Collision k couples to ancilla k - lag for every stored lag; indices
        at or below zero are pre-history vacuum modes and are kept.
        """
        if not 1 <= step <= self.n_steps:
            raise ValueError(f"step must be in 1..{self.n_steps}, got {step}")
        return [(step - lag, g) for lag, g in self.couplings]


def build_plan(strengths: WeightMatrix, omega0: float, n_steps: int) -> CollisionPlan:
    """Wrap scaled strengths into a per-step collision plan."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}")
    return CollisionPlan(strengths=strengths, omega0=float(omega0), n_steps=int(n_steps))


def _expm_hermitian(h: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i h dt) for Hermitian h via its eigendecomposition (unitary to roundoff)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def _sector_unitary(plan: CollisionPlan, gs: Tuple[complex, ...]) -> np.ndarray:
    """Collision unitary restricted to span{|e,vac>, |g,1_m>} for the touched modes."""
    key = ("sector", gs)
    u = plan._unitaries.get(key)
    if u is None:
        n = len(gs) + 1
        h = np.zeros((n, n), dtype=complex)
        h[0, 0] = plan.omega0
        for j, g in enumerate(gs):
            h[j + 1, 0] = g
            h[0, j + 1] = np.conj(g)
        u = _expm_hermitian(h, plan.dt)
        plan._unitaries[key] = u
    return u


def step_single_excitation(
    state: SingleExcitationState,
    plan: CollisionPlan,
    step: int,
    kind: Stepper = Stepper.EXACT,
) -> SingleExcitationState:
    """Advance one collision in the one-excitation sector, in place.

    The vacuum amplitude and untouched ancillas are left untouched exactly
    (both are dark under the collision Hamiltonian).
    """
    touched = plan.touched(step)
    idx = []
    for m, _ in touched:
        i = m - state.min_index
        if not 0 <= i < len(state.c):
            raise RuntimeError(
                f"plan/state mismatch: collision {step} touches ancilla {m}, outside the "
                f"allocated range {state.min_index}..{state.max_index}"
            )
        idx.append(i)

    if kind == Stepper.EXACT:
        if not touched:
            state.eps *= cmath.exp(-1j * plan.omega0 * plan.dt)
            return state
        u = _sector_unitary(plan, tuple(g for _, g in touched))
        vec = np.empty(len(touched) + 1, dtype=complex)
        vec[0] = state.eps
        vec[1:] = state.c[idx]
        vec = u @ vec
        state.eps = complex(vec[0])
        state.c[idx] = vec[1:]
        return state

    if kind == Stepper.SECOND_ORDER:
        dt = plan.dt
        eps = state.eps
        overlap = sum(np.conj(g) * state.c[i] for (_, g), i in zip(touched, idx))
        strength_sq = sum(abs(g) ** 2 for _, g in touched)
        state.eps = eps - 1j * dt * (plan.omega0 * eps + overlap) - 0.5 * dt * dt * strength_sq * eps
        for (_, g), i in zip(touched, idx):
            state.c[i] += -1j * dt * g * eps - 0.5 * dt * dt * g * overlap
        return state

    raise ValueError(f"unknown stepper kind: {kind!r}")


def _fock_operators(n_max: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    annihilate = np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|
    excited = np.array([[0, 0], [0, 1]], dtype=complex)
    return annihilate, lower, excited


def _kron_chain(ops: List[np.ndarray]) -> np.ndarray:
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def _fock_unitary(plan: CollisionPlan, state: TruncatedFockState, slots_gs: tuple) -> np.ndarray:
    key = ("fock", state.n_max, len(state.active_modes), slots_gs)
    u = plan._unitaries.get(key)
    if u is None:
        annihilate, lower, excited = _fock_operators(state.n_max)
        eye = np.eye(state.n_max + 1, dtype=complex)
        n_modes = len(state.active_modes)
        h = plan.omega0 * _kron_chain([excited] + [eye] * n_modes)
        for slot, g in slots_gs:
            ops = [lower] + [eye] * n_modes
            ops[1 + slot] = annihilate.conj().T
            v = g * _kron_chain(ops)
            h = h + v + v.conj().T
        u = _expm_hermitian(h, plan.dt)
        plan._unitaries[key] = u
    return u


def step_full(state: TruncatedFockState, plan: CollisionPlan, step: int) -> TruncatedFockState:
    """Advance one collision of the truncated-Fock register, in place.

    Exact dense exponential of H on qubit x active modes; every touched
    ancilla must already sit inside the active window.
    """
    touched = plan.touched(step)
    for m, _ in touched:
        if m not in state.active_modes:
            raise ValueError(
                f"collision {step} touches ancilla {m}, which is outside the active window "
                f"{state.active_modes}"
            )
    slots_gs = tuple((state.active_modes.index(m), g) for m, g in touched)
    u = _fock_unitary(plan, state, slots_gs)
    state.amplitudes = (u @ state.amplitudes.ravel()).reshape(state.amplitudes.shape)
    return state


@dataclass
class MirrorRecursionState:
    """Ring-buffer state of the delayed-feedback recursion.

    Each ancilla collides twice, d steps apart; between the two collisions its
    amplitude is frozen, so only the last d first-collision amplitudes need to
    be stored.  ``occupied_weight`` accumulates |c|^2 of ancillas whose second
    collision has been applied, which keeps the full norm reconstructible.
    """

    eps: complex
    ring: np.ndarray
    step: int = 0
    a_vac: float = 0.0
    ring_weight: float = 0.0
    occupied_weight: float = 0.0

    def norm(self) -> float:
        return math.sqrt(
            self.a_vac**2 + abs(self.eps) ** 2 + self.ring_weight + self.occupied_weight
        )


def mirror_recursion_step(
    state: MirrorRecursionState, gamma: float, phi: float, d: int, omega0: float, dt: float
) -> MirrorRecursionState:
    """One step of the two-collision recursion (second-order arithmetic).

    eps gains the free decay -(i*omega0 + gamma)*dt*eps plus the feedback
    i*sqrt(gamma*dt)*e^{i*phi}*c from the ancilla emitted d steps earlier; the
    fresh ancilla amplitude is -i*sqrt(gamma*dt)*eps plus the second-order
    feedback echo (gamma*dt/2)*e^{i*phi}*c.
    """
    if d < 1:
        raise ValueError("the recursion needs a delay of at least one step (d >= 1)")
    n = state.step
    feedback = state.ring[(n - d) % d] if n >= d else 0j
    root = math.sqrt(gamma * dt)
    phase = cmath.exp(1j * phi)
    eps = state.eps

    state.eps = eps - (1j * omega0 + gamma) * dt * eps + 1j * root * phase * feedback
    fresh = -1j * root * eps + 0.5 * gamma * dt * phase * feedback
    # last collision of ancilla n-d (a pre-history vacuum mode when n < d):
    # its amplitude stops evolving afterwards, so only its weight is kept
    final = feedback * (1.0 - 0.5 * gamma * dt) + 1j * root * phase.conjugate() * eps
    state.occupied_weight += abs(final) ** 2
    if n >= d:
        state.ring_weight -= abs(feedback) ** 2
    state.ring[n % d] = fresh
    state.ring_weight += abs(fresh) ** 2
    state.step = n + 1
    return state


@dataclass
class Trajectory:
    """Per-collision record of a simulation run."""

    steps: np.ndarray
    times: np.ndarray
    eps: np.ndarray
    excited_population: np.ndarray
    norms: np.ndarray
    wall_times: np.ndarray
    config: dict
    notes: Tuple[str, ...] = ()

    @property
    def n_steps(self) -> int:
        return len(self.steps) - 1

    @property
    def final_eps(self) -> complex:
        return complex(self.eps[-1])

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norms - self.norms[0])))


def _run_single_excitation(config, plan, n_steps: int):
    state = init_single_excitation(n_steps, config.beta, n_history=plan.max_lag)
    eps = np.empty(n_steps + 1, dtype=complex)
    norm_sq = np.empty(n_steps + 1, dtype=float)
    wall = np.zeros(n_steps + 1, dtype=float)
    eps[0] = state.eps
    total = abs(state.a_vac) ** 2 + abs(state.eps) ** 2
    norm_sq[0] = total
    start = time.perf_counter()
    for k in range(1, n_steps + 1):
        idx = [m - state.min_index for m, _ in plan.touched(k)]
        before = abs(state.eps) ** 2 + float(np.sum(np.abs(state.c[idx]) ** 2))
        step_single_excitation(state, plan, k, config.stepper)
        after = abs(state.eps) ** 2 + float(np.sum(np.abs(state.c[idx]) ** 2))
        total += after - before  # untouched amplitudes are bitwise unchanged
        eps[k] = state.eps
        norm_sq[k] = total
        wall[k] = time.perf_counter() - start
    return eps, np.sqrt(norm_sq), wall


def _run_full_fock(config, plan, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    state = init_single_excitation(0, config.beta)
    fock = TruncatedFockState(
        amplitudes=np.array([state.a_vac, state.eps], dtype=complex),
        active_modes=(),
        n_max=config.n_max,
    )
    window_cap = config.window if config.window is not None else plan.max_lag + 1
    eps = np.empty(n_steps + 1, dtype=complex)
    norms = np.empty(n_steps + 1, dtype=float)
    wall = np.zeros(n_steps + 1, dtype=float)
    eps[0] = fock.excited_vacuum_amplitude()
    norms[0] = fock.norm()
    start = time.perf_counter()
    for k in range(1, n_steps + 1):
        for m, _ in plan.touched(k):
            if m not in fock.active_modes:
                fock.add_mode(m)
        if len(fock.active_modes) > window_cap:
            raise ValueError(
                f"collision {k} needs {len(fock.active_modes)} active modes, more than the "
                f"window of {window_cap}"
            )
        step_full(fock, plan, k)
        for m in [m for m in fock.active_modes if m + plan.max_lag <= k]:
            fock.retire_mode(m)
        eps[k] = fock.excited_vacuum_amplitude()
        norms[k] = fock.norm()
        wall[k] = time.perf_counter() - start
    return eps, norms, wall


def _run_mirror_recursion(config, plan, n_steps: int) -> Tuple[np.ndarray, np.ndarray]:
    gamma = config.coupling.gamma
    phi = config.coupling.phi
    d = int(round(config.coupling.tau / config.dt))
    omega0 = plan.omega0
    beta = complex(config.beta)
    state = MirrorRecursionState(
        eps=beta,
        ring=np.zeros(d, dtype=complex),
        a_vac=math.sqrt(max(0.0, 1.0 - abs(beta) ** 2)),
    )
    eps = np.empty(n_steps + 1, dtype=complex)
    norms = np.empty(n_steps + 1, dtype=float)
    wall = np.zeros(n_steps + 1, dtype=float)
    eps[0] = state.eps
    norms[0] = state.norm()
    start = time.perf_counter()
    for k in range(1, n_steps + 1):
        mirror_recursion_step(state, gamma, phi, d, omega0, config.dt)
        eps[k] = state.eps
        norms[k] = state.norm()
        wall[k] = time.perf_counter() - start
    return eps, norms, wall


def run(config: "SimulationConfig") -> Trajectory:
    """Run a full collision sequence and record the trajectory.

    Deterministic: identical configs produce identical arrays.  Wall times are
    recorded per step for the summary but never enter the data columns.
    """
    spec = config.coupling_spec()
    n_steps, note = config.effective_steps()
    notes: List[str] = [] if note is None else [note]

    weights = collision_weights(time_kernel(spec), config.dt, n_steps)
    notes.extend(weights.warnings)
    strengths = coupling_strengths(weights, spec.gamma)
    omega0 = 0.0 if config.rotating_frame else config.omega0
    if config.rotating_frame and config.omega0 != 0:
        notes.append(
            f"rotating frame: dynamics run with omega0=0; multiply eps by "
            f"exp(-i*{config.omega0!r}*t) to recover lab-frame amplitudes"
        )
    plan = build_plan(strengths, omega0, n_steps)

    if config.representation == Representation.SINGLE_EXCITATION:
        eps, norms, wall = _run_single_excitation(config, plan, n_steps)
    elif config.representation == Representation.FULL_FOCK:
        eps, norms, wall = _run_full_fock(config, plan, n_steps)
    elif config.representation == Representation.MIRROR_RECURSION:
        eps, norms, wall = _run_mirror_recursion(config, plan, n_steps)
    else:  # pragma: no cover
        raise ValueError(f"unknown representation: {config.representation!r}")

    steps = np.arange(n_steps + 1)
    return Trajectory(
        steps=steps,
        times=steps * config.dt,
        eps=eps,
        excited_population=np.abs(eps) ** 2,
        norms=norms,
        wall_times=wall,
        config=config.to_dict(),
        notes=tuple(notes),
    )
