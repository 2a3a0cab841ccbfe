"""Joint emitter+ancilla states in two representations.

``SingleExcitationState`` spans the number-conserving one-excitation sector
exactly (plus the invariant vacuum amplitude, which allows superposition
initial states and nonzero reduced coherences).  ``TruncatedFockState`` is a
brute-force dense vector over the qubit and a sliding window of bosonic modes
truncated at ``n_max`` photons, used as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

__all__ = [
    "SingleExcitationState",
    "TruncatedFockState",
    "QubitDensityMatrix",
    "init_single_excitation",
    "reduced_qubit_state",
    "embed_single_excitation",
]

# amplitude of an occupied branch outside |g> x vacuum above which a mode
# retirement would be lossy and is refused
_DARK_BRANCH_TOL = 1e-12


@dataclass
class SingleExcitationState:
    """Amplitudes (a_vac, eps, c_m) of the one-excitation sector.

    ``c`` holds ancilla amplitudes for indices ``min_index .. min_index +
    len(c) - 1``.  Indices below 1 are pre-history input modes (initially in
    vacuum) that kernels with memory still couple to during early collisions.
    """

    a_vac: complex
    eps: complex
    c: np.ndarray
    min_index: int = 1

    @property
    def max_index(self) -> int:
        return self.min_index + len(self.c) - 1

    def amplitude(self, m: int) -> complex:
        return complex(self.c[m - self.min_index])

    def norm(self) -> float:
        return math.sqrt(
            abs(self.a_vac) ** 2 + abs(self.eps) ** 2 + float(np.sum(np.abs(self.c) ** 2))
        )

    def copy(self) -> "SingleExcitationState":
        return SingleExcitationState(self.a_vac, self.eps, self.c.copy(), self.min_index)


def init_single_excitation(
    n_steps: int, beta: complex, n_history: int = 0
) -> SingleExcitationState:
    """Initial state beta|e>|vac> + sqrt(1-|beta|^2)|g>|vac>.

    ``n_history`` extra pre-history modes (indices 0, -1, ...) are allocated
    for kernels whose maximum lag reaches below the first collision.
    """
    beta = complex(beta)
    if abs(beta) > 1 + 1e-12:
        raise ValueError(f"initial amplitude must satisfy |beta| <= 1, got |{beta}| = {abs(beta)}")
    if n_steps < 0 or n_history < 0:
        raise ValueError("n_steps and n_history must be nonnegative")
    a_vac = math.sqrt(max(0.0, 1.0 - abs(beta) ** 2))
    c = np.zeros(n_steps + n_history, dtype=complex)
    return SingleExcitationState(a_vac=a_vac, eps=beta, c=c, min_index=1 - n_history)


@dataclass(frozen=True)
class QubitDensityMatrix:
    """2x2 reduced state of the emitter, basis order (excited, ground)."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix must be Hermitian")
        if abs(np.trace(rho) - 1) > 1e-12:
            raise ValueError(f"density matrix must have unit trace, got {np.trace(rho)}")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-10:
            raise ValueError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", rho)

    @property
    def excited_population(self) -> float:
        return float(self.matrix[0, 0].real)

    @property
    def coherence(self) -> complex:
        """The <g|rho|e> entry."""
        return complex(self.matrix[1, 0])


def reduced_qubit_state(state: SingleExcitationState) -> QubitDensityMatrix:
    """Trace out all field modes: populations from |eps|^2, coherence a_vac*conj(eps)."""
    pop = abs(state.eps) ** 2
    rho_ge = state.a_vac * np.conj(state.eps)
    rho = np.array([[pop, np.conj(rho_ge)], [rho_ge, 1.0 - pop]], dtype=complex)
    return QubitDensityMatrix(rho)


@dataclass
class TruncatedFockState:
    """Dense joint state over the qubit and a window of truncated modes.

    ``amplitudes`` has the qubit on axis 0 (index 0 = ground, 1 = excited) and
    one axis of size ``n_max + 1`` per entry of ``active_modes``, in order.
    Modes that can no longer couple are retired: in the one-excitation sector
    their occupied branch is exactly dark (qubit down, everything else in
    vacuum), so only its squared weight needs to be kept.  ``norm`` includes
    that retired weight, which keeps the total conserved.
    """

    amplitudes: np.ndarray
    active_modes: Tuple[int, ...] = ()
    n_max: int = 1
    retired_weight: float = 0.0

    def mode_axis(self, m: int) -> int:
        return 1 + self.active_modes.index(m)

    def excited_vacuum_amplitude(self) -> complex:
        """Amplitude of |e> with every active mode in vacuum."""
        return complex(self.amplitudes[(1,) + (0,) * len(self.active_modes)])

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.amplitudes) ** 2)) + self.retired_weight)

    def occupation(self, m: int) -> float:
        """Expected photon number in active mode m."""
        amp = np.moveaxis(self.amplitudes, self.mode_axis(m), -1)
        weights = np.arange(self.n_max + 1)
        return float(np.sum(np.abs(amp) ** 2 * weights))

    def excitation_moments(self) -> Tuple[float, float]:
        """Mean and variance of the total excitation number, retired modes included."""
        occ = np.zeros(self.amplitudes.shape, dtype=float)
        occ += np.reshape(
            np.arange(2), (2,) + (1,) * len(self.active_modes)
        )  # qubit contributes 0 or 1
        for m in self.active_modes:
            shape = [1] * self.amplitudes.ndim
            shape[self.mode_axis(m)] = self.n_max + 1
            occ = occ + np.reshape(np.arange(self.n_max + 1), shape)
        p = np.abs(self.amplitudes) ** 2
        mean = float(np.sum(p * occ)) + self.retired_weight
        second = float(np.sum(p * occ**2)) + self.retired_weight
        return mean, second - mean**2

    def add_mode(self, m: int) -> None:
        """Append a fresh vacuum mode to the window."""
        if m in self.active_modes:
            raise ValueError(f"mode {m} is already active")
        new = np.zeros(self.amplitudes.shape + (self.n_max + 1,), dtype=complex)
        new[..., 0] = self.amplitudes
        self.amplitudes = new
        self.active_modes = self.active_modes + (m,)

    def retire_mode(self, m: int) -> None:
        """Drop a mode that can no longer couple.

        The vacuum branch is kept; the occupied branch must be dark (all of
        its weight on the qubit ground state with the remaining modes in
        vacuum), otherwise retiring it would not be exact and a RuntimeError
        is raised.
        """
        axis = self.mode_axis(m)
        amp = np.moveaxis(self.amplitudes, axis, -1)
        keep = np.ascontiguousarray(amp[..., 0])
        occupied = amp[..., 1:]
        weight = float(np.sum(np.abs(occupied) ** 2))
        dark = float(np.sum(np.abs(occupied[(0,) + (0,) * (occupied.ndim - 2)]) ** 2))
        if abs(weight - dark) > _DARK_BRANCH_TOL:
            raise RuntimeError(
                f"mode {m} is still entangled with the active dynamics; retiring it would "
                f"lose {abs(weight - dark):.3e} of coherent weight"
            )
        self.retired_weight += weight
        self.amplitudes = keep
        self.active_modes = tuple(i for i in self.active_modes if i != m)

    def project_single_excitation(self) -> Tuple[complex, complex, Dict[int, complex]]:
        """Read back (a_vac, eps, {m: c_m}); multi-photon weight must be negligible."""
        zeros = (0,) * len(self.active_modes)
        a_vac = complex(self.amplitudes[(0,) + zeros])
        eps = complex(self.amplitudes[(1,) + zeros])
        c: Dict[int, complex] = {}
        total = abs(a_vac) ** 2 + abs(eps) ** 2
        for m in self.active_modes:
            idx = [0] * self.amplitudes.ndim
            idx[self.mode_axis(m)] = 1
            c[m] = complex(self.amplitudes[tuple(idx)])
            total += abs(c[m]) ** 2
        rest = float(np.sum(np.abs(self.amplitudes) ** 2)) - total
        if rest > 1e-10:
            raise ValueError(f"state has weight {rest:.3e} outside the one-excitation sector")
        return a_vac, eps, c


def embed_single_excitation(
    state: SingleExcitationState, n_max: int, window: Sequence[int]
) -> TruncatedFockState:
    """Embed a one-excitation state into a truncated Fock register.

    ``window`` lists the ancilla indices to represent; it must cover every
    mode carrying a nonzero amplitude.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    window = tuple(int(m) for m in window)
    if len(set(window)) != len(window):
        raise ValueError("window contains duplicate mode indices")
    occupied = {
        state.min_index + i for i in np.flatnonzero(np.abs(state.c) > 0)
    }
    missing = occupied - set(window)
    if missing:
        raise ValueError(f"window does not cover occupied ancillas {sorted(missing)}")

    shape = (2,) + (n_max + 1,) * len(window)
    amp = np.zeros(shape, dtype=complex)
    amp[(0,) + (0,) * len(window)] = state.a_vac
    amp[(1,) + (0,) * len(window)] = state.eps
    for slot, m in enumerate(window):
        if state.min_index <= m <= state.max_index:
            idx = [0] * len(shape)
            idx[1 + slot] = 1
            amp[tuple(idx)] = state.amplitude(m)
    return TruncatedFockState(amplitudes=amp, active_modes=window, n_max=n_max)
