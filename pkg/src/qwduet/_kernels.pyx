# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled two-walker step kernel.

Same contract as ``qwduet.kernels.numpy_step``.
"""

# Displacements per joint-coin index (+1,+1), (+1,-1), (-1,+1), (-1,-1).
cdef int[4] DX = [1, 1, -1, -1]
cdef int[4] DY = [1, -1, 1, -1]


def coin_shift_swap_step(const double complex[:, :, ::1] psi,
                         double complex[:, :, ::1] out,
                         const double complex[:, ::1] coin,
                         const double complex[:, ::1] swap,
                         Py_ssize_t center,
                         Py_ssize_t radius):
    """Write ``swap . shift . coin`` applied to ``psi`` into ``out``.

    ``psi`` must vanish outside the box ``|x|, |y| <= radius`` around
    ``center``; only the output box of radius ``radius + 1`` is written,
    on the parity sublattice reachable in one step.
    """
    cdef Py_ssize_t lo = center - radius
    cdef Py_ssize_t hi = center + radius
    cdef Py_ssize_t x, y, xs, ys
    cdef int a, b
    cdef double complex v[4]
    cdef double complex acc

    with nogil:
        x = lo - 1
        while x <= hi + 1:
            y = lo - 1
            while y <= hi + 1:
                for a in range(4):
                    xs = x - DX[a]
                    ys = y - DY[a]
                    if xs < lo or xs > hi or ys < lo or ys > hi:
                        v[a] = 0
                    else:
                        acc = 0
                        for b in range(4):
                            acc = acc + coin[a, b] * psi[b, xs, ys]
                        v[a] = acc
                for a in range(4):
                    acc = 0
                    for b in range(4):
                        acc = acc + swap[a, b] * v[b]
                    out[a, x, y] = acc
                y += 2
            x += 2
