"""Exact classical two-walker random walk with probabilistic coin swapping.

Each step: both coins are re-flipped fairly, each walker moves one site in
the direction of its coin, then the two coin values are exchanged with
probability ``swap_prob``.  The full distribution is propagated by dynamic
programming, no sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlations import JointDistribution
from .lattice import StepBudgetExceeded


@dataclass(frozen=True, eq=False)
class ClassicalJointState:
    """``q[c1, c2, i, j]`` over coin values (index 0 is +1) and positions
    ``x = i - T_max``, ``y = j - T_max``."""

    q: np.ndarray
    t: int
    T_max: int
    swap_prob: float

    @property
    def total(self) -> float:
        return float(self.q.sum())


def classical_initial_state(T_max: int, swap_prob: float) -> ClassicalJointState:
    if int(T_max) != T_max or T_max < 1:
        raise ValueError(f"T_max must be a positive integer, got {T_max!r}")
    swap_prob = float(swap_prob)
    if not 0.0 <= swap_prob <= 1.0:
        raise ValueError(f"swap_prob must lie in [0, 1], got {swap_prob!r}")
    size = 2 * int(T_max) + 1
    q = np.zeros((2, 2, size, size))
    q[:, :, T_max, T_max] = 0.25
    return ClassicalJointState(q, 0, int(T_max), swap_prob)


def classical_step(s: ClassicalJointState) -> ClassicalJointState:
    if s.t >= s.T_max:
        raise StepBudgetExceeded(f"step budget exhausted: t={s.t} reached T_max={s.T_max}")
    # fair re-flip: coin values forget their past
    positions = s.q.sum(axis=(0, 1))
    moved = np.zeros_like(s.q)
    for c1, dx in enumerate((1, -1)):
        for c2, dy in enumerate((1, -1)):
            moved[c1, c2] = 0.25 * np.roll(np.roll(positions, dx, axis=0), dy, axis=1)
    p = s.swap_prob
    swapped = (1.0 - p) * moved + p * moved.transpose(1, 0, 2, 3)
    return ClassicalJointState(swapped, s.t + 1, s.T_max, p)


def classical_evolve(s: ClassicalJointState, steps: int) -> ClassicalJointState:
    if s.t + steps > s.T_max:
        raise StepBudgetExceeded(f"cannot take {steps} steps from t={s.t} with T_max={s.T_max}")
    for _ in range(steps):
        s = classical_step(s)
    return s


def classical_joint_distribution(s: ClassicalJointState) -> JointDistribution:
    positions = np.arange(-s.t, s.t + 1, 2)
    idx = positions + s.T_max
    table = s.q.sum(axis=(0, 1))[idx[:, None], idx[None, :]]
    return JointDistribution(table, positions, s.t, s.swap_prob)
