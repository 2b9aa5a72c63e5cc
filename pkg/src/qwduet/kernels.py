"""Step-kernel selection.

The compiled kernel (``qwduet._kernels``) is used when it was built; the
NumPy kernel below is the fallback and is always available.  Both write
``swap @ shift(coin @ psi)`` into a zero-initialised output buffer.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .gates import JOINT_COIN_SHIFTS

StepKernel = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray, int, int], None]


def numpy_step(psi, out, coin, swap, center, radius):
    lo, hi = center - radius, center + radius
    window = psi[:, lo : hi + 1, lo : hi + 1]
    flipped = np.einsum("ab,bxy->axy", coin, window)

    moved = np.zeros((4, 2 * radius + 3, 2 * radius + 3), dtype=complex)
    n = 2 * radius + 1
    for a, (dx, dy) in enumerate(JOINT_COIN_SHIFTS):
        moved[a, 1 + dx : 1 + dx + n, 1 + dy : 1 + dy + n] = flipped[a]

    out[:, lo - 1 : hi + 2, lo - 1 : hi + 2] = np.einsum("ab,bxy->axy", swap, moved)


_KERNELS: dict[str, StepKernel] = {"numpy": numpy_step}

try:
    from ._kernels import coin_shift_swap_step as _compiled_step
except ImportError:  # pragma: no cover - depends on the build
    _compiled_step = None
else:
    _KERNELS["cython"] = _compiled_step

DEFAULT_BACKEND = "cython" if "cython" in _KERNELS else "numpy"


def available_backends() -> list[str]:
    return sorted(_KERNELS)


def get_kernel(backend: str | None = None) -> StepKernel:
    name = DEFAULT_BACKEND if backend is None else backend
    try:
        return _KERNELS[name]
    except KeyError:
        raise ValueError(
            f"unknown or unavailable step backend {name!r}; available: {available_backends()}"
        ) from None
