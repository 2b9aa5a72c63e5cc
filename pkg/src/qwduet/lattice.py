"""Exact state-vector evolution of two walkers and two coins on a bounded lattice."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gates import HADAMARD, _check_tau, initial_joint_coin, swap_tau_matrix
from .kernels import get_kernel


class StepBudgetExceeded(RuntimeError):
    """Raised when a step would need lattice sites beyond the allocated budget."""


@dataclass(frozen=True)
class StepParameters:
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "tau", _check_tau(self.tau))


@dataclass(frozen=True, eq=False)
class LatticeStateVector:
    """Pure state of both walkers and both coins.

    ``amplitudes[c, i, j]`` is the amplitude for joint coin index ``c`` (see
    :data:`qwduet.gates.JOINT_COIN_LABELS`), walker 1 at ``x = i - T_max`` and
    walker 2 at ``y = j - T_max``.
    """

    amplitudes: np.ndarray
    t: int
    T_max: int

    @property
    def size(self) -> int:
        return 2 * self.T_max + 1

    @property
    def positions(self) -> np.ndarray:
        """Lattice coordinates of the array axes 1 and 2."""
        return np.arange(-self.T_max, self.T_max + 1)

    def amplitude(self, c: int, x: int, y: int) -> complex:
        return complex(self.amplitudes[c, x + self.T_max, y + self.T_max])


def initial_state(T_max: int) -> LatticeStateVector:
    """Both walkers at the origin, each coin in (|+1> + i|-1>)/sqrt(2)."""
    if isinstance(T_max, bool) or int(T_max) != T_max or T_max < 1:
        raise ValueError(f"T_max must be a positive integer, got {T_max!r}")
    T_max = int(T_max)
    size = 2 * T_max + 1
    amps = np.zeros((4, size, size), dtype=complex)
    amps[:, T_max, T_max] = initial_joint_coin()
    return LatticeStateVector(amps, 0, T_max)


def apply_step(
    state: LatticeStateVector,
    params: StepParameters | float,
    *,
    backend: str | None = None,
) -> LatticeStateVector:
    """One step ``SWAP**tau (U kron U)``: coin flips, shifts, then the partial swap."""
    if not isinstance(params, StepParameters):
        params = StepParameters(params)
    if state.t >= state.T_max:
        raise StepBudgetExceeded(
            f"step budget exhausted: t={state.t} reached T_max={state.T_max}"
        )
    kernel = get_kernel(backend)
    out = np.zeros_like(state.amplitudes)
    kernel(
        np.ascontiguousarray(state.amplitudes),
        out,
        _HH,
        swap_tau_matrix(params.tau),
        state.T_max,
        state.t,
    )
    return LatticeStateVector(out, state.t + 1, state.T_max)


def evolve(
    state: LatticeStateVector,
    params: StepParameters | float,
    steps: int,
    *,
    backend: str | None = None,
) -> LatticeStateVector:
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    if state.t + steps > state.T_max:
        raise StepBudgetExceeded(
            f"cannot take {steps} steps from t={state.t} with T_max={state.T_max}"
        )
    for _ in range(steps):
        state = apply_step(state, params, backend=backend)
    return state


def trajectory(tau: float, steps: int, *, backend: str | None = None):
    """Yield the states at t = 0, 1, ..., steps for a fresh walk."""
    params = StepParameters(tau)
    state = initial_state(max(steps, 1))
    yield state
    for _ in range(steps):
        state = apply_step(state, params, backend=backend)
        yield state


def state_norm(state: LatticeStateVector | np.ndarray) -> float:
    amps = state.amplitudes if isinstance(state, LatticeStateVector) else np.asarray(state)
    return float(np.sqrt(np.sum(amps.real**2 + amps.imag**2)))


_HH = np.ascontiguousarray(np.kron(HADAMARD, HADAMARD))
