"""Coin-space gates.

Coin basis ordering is fixed globally: label ``+1`` is index 0, label ``-1``
is index 1.  Two-coin states use the tensor ordering
``(+1,+1), (+1,-1), (-1,+1), (-1,-1)``.
"""

from __future__ import annotations

import numpy as np

COIN_LABELS = (+1, -1)
JOINT_COIN_LABELS = ((+1, +1), (+1, -1), (-1, +1), (-1, -1))

#: Lattice displacement of each walker for every joint-coin index.
JOINT_COIN_SHIFTS = ((+1, +1), (+1, -1), (-1, +1), (-1, -1))

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)

#: Single-coin initial state (|+1> + i|-1>)/sqrt(2).
INITIAL_COIN = np.array([1.0, 1.0j]) / np.sqrt(2.0)


def _check_tau(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau < 0.0 or tau > 1.0:
        raise ValueError(f"SWAP power tau must lie in [0, 1], got {tau!r}")
    return tau


def swap_tau_matrix(tau: float) -> np.ndarray:
    """Fractional SWAP gate ``SWAP**tau`` on two coins.

    The -1 eigenvalue of SWAP is raised on the principal branch, so
    ``(-1)**tau`` becomes ``exp(i*pi*tau)``.
    """
    tau = _check_tau(tau)
    phase = np.exp(1j * np.pi * tau)
    gate = np.eye(4, dtype=complex)
    gate[1, 1] = gate[2, 2] = (1.0 + phase) / 2.0
    gate[1, 2] = gate[2, 1] = (1.0 - phase) / 2.0
    return gate


def joint_coin_matrix(tau: float) -> np.ndarray:
    """``SWAP**tau @ (H kron H)``: the coin part of one two-walker step.

    Note that in the walk itself the shift sits between the two factors;
    this product is only the coin-space skeleton of the step.
    """
    return swap_tau_matrix(tau) @ np.kron(HADAMARD, HADAMARD)


def initial_joint_coin() -> np.ndarray:
    return np.kron(INITIAL_COIN, INITIAL_COIN)
