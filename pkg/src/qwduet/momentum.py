"""Momentum-space backend.

At fixed walker momenta ``(k, j)`` the walk acts on the two coins alone via
``U_kj = SWAP**tau (U_k kron U_j)``, with ``U_k = diag(e^{-ik}, e^{ik}) H``.
Conjugation by ``U_kj`` is represented as a 16x16 transfer matrix on
coordinates in the product Pauli basis

    B[4*a + b] = P_a kron P_b,   P = (I, X, Y, Z),

normalised so that ``Tr[B_a B_b] = 4 delta_ab`` and ``r_a = Tr[B_a O] / 4``.
Index 0 is the identity, so ``Tr[O] = 4 r_0``.

Position moments are momentum-space integrals of trigonometric polynomials
and are evaluated exactly with the periodic trapezoid rule.  The position
observable's generator is the *velocity operator* ``V = SWAP**tau Z_1
SWAP**-tau``: walker 1 moves according to its coin before the partial swap,
so the plain ``Z kron I`` only works at ``tau = 0`` (and, by symmetry of the
initial coins, ``tau = 1``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .correlations import NumericalError
from .gates import HADAMARD, SIGMA_Z, _check_tau, initial_joint_coin, swap_tau_matrix

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
PAULI_LABELS = tuple(a + b for a in "IXYZ" for b in "IXYZ")
BASIS = np.array([np.kron(a, b) for a in _PAULI for b in _PAULI])
SINGLE_BASIS = np.array(_PAULI)

DEFAULT_CUTOFF = 1.0 - 1e-9
_CHUNK = 4096


@dataclass(frozen=True)
class MomentumPair:
    k: float
    j: float

    def __post_init__(self):
        for name in ("k", "j"):
            v = getattr(self, name)
            if not -np.pi <= v <= np.pi:
                raise ValueError(f"momentum {name}={v!r} outside [-pi, pi]")


@dataclass(frozen=True)
class AsymptoticsRecord:
    """Long-time behaviour ``<x>_t ~ slope*t`` and ``<x^2>_t ~ C2*t^2``."""

    tau: float
    slope: float | None = None
    C2: float | None = None
    eigenfilter_cutoff: float = DEFAULT_CUTOFF
    grid: int = 0


# -- coin-space matrices ------------------------------------------------------


def momentum_coin(k) -> np.ndarray:
    """``U_k = diag(e^{-ik}, e^{ik}) H``; vectorised over ``k``."""
    k = np.asarray(k, dtype=float)
    phase = np.stack([np.exp(-1j * k), np.exp(1j * k)], axis=-1)
    return phase[..., :, None] * HADAMARD


def coin_step_matrix(kp: MomentumPair, tau: float) -> np.ndarray:
    tau = _check_tau(tau)
    return swap_tau_matrix(tau) @ np.kron(momentum_coin(kp.k), momentum_coin(kp.j))


def _coin_step_batch(k: np.ndarray, j: np.ndarray, tau: float) -> np.ndarray:
    uk = momentum_coin(k)
    uj = momentum_coin(j)
    prod = np.einsum("gab,gcd->gacbd", uk, uj).reshape(-1, 4, 4)
    return swap_tau_matrix(tau) @ prod


def velocity_operator(tau: float, walker: int = 1) -> np.ndarray:
    """Generator of walker displacement: ``SWAP**tau Z_w SWAP**-tau``."""
    if walker == 1:
        z = np.kron(SIGMA_Z, np.eye(2))
    elif walker == 2:
        z = np.kron(np.eye(2), SIGMA_Z)
    else:
        raise ValueError(f"walker must be 1 or 2, got {walker}")
    sw = swap_tau_matrix(tau)
    return sw @ z @ sw.conj().T


# -- coordinate representation ------------------------------------------------


def operator_coordinates(op: np.ndarray) -> np.ndarray:
    """Pauli coordinates ``r_a = Tr[B_a O] / 4`` (vectorised over leading axes)."""
    return np.einsum("aij,...ji->...a", BASIS, op) / 4.0


def operator_from_coordinates(r: np.ndarray) -> np.ndarray:
    return np.einsum("...a,aij->...ij", r, BASIS)


def left_multiplication_matrix(op: np.ndarray) -> np.ndarray:
    """Coordinate matrix of ``O -> op @ O``."""
    return np.einsum("aij,jk,bki->ab", BASIS, op, BASIS) / 4.0


def right_multiplication_matrix(op: np.ndarray) -> np.ndarray:
    """Coordinate matrix of ``O -> O @ op``."""
    return np.einsum("aij,bjk,ki->ab", BASIS, BASIS, op) / 4.0


def _conjugation_matrices(unitaries: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Transfer matrices of ``O -> U O U^dag`` for a batch of unitaries."""
    norm = np.vdot(basis[0], basis[0]).real
    images = np.einsum("gij,bjk,glk->gbil", unitaries, basis, unitaries.conj())
    return np.einsum("aij,gbij->gab", basis.conj(), images) / norm


def transfer_matrix_from_conjugation(kp: MomentumPair, tau: float) -> np.ndarray:
    u = coin_step_matrix(kp, tau)
    return _conjugation_matrices(u[None], BASIS)[0]


def single_walker_transfer_matrix(k: float) -> np.ndarray:
    """4x4 transfer matrix of ``O -> U_k O U_k^dag`` in the basis (I, X, Y, Z)."""
    return _conjugation_matrices(momentum_coin(k)[None], SINGLE_BASIS)[0]


# -- closed-form element table ------------------------------------------------


def transfer_matrix_tabulated(kp: MomentumPair, tau: float) -> np.ndarray:
    """Closed-form nonzero elements of the 16x16 coin transfer matrix.

    Entries are placed at their 1-based ``(row, col)`` positions; every
    other entry is zero.  ``(-1)**tau`` is read as ``exp(i*pi*tau)``.  This
    table is kept for comparison only, see :func:`compare_transfer_matrices`.
    """
    tau = _check_tau(tau)
    k, j = kp.k, kp.j
    e = np.exp(1j * np.pi * tau)
    m = np.zeros((16, 16), dtype=complex)

    def put(entries, value):
        for (row, col), factor in entries:
            m[row - 1, col - 1] = factor * value

    diag_like = 0.25 * (-(1 + e) * np.cos(k - j) + 2 * np.cos(k + j))
    anti_like = 0.25 * ((1 + e) * np.cos(k - j) + 2 * np.cos(k + j))
    pref = np.exp(-1j * (k + j)) / 8.0
    ej2, ek2 = np.exp(2j * j), np.exp(2j * k)
    b = pref * (2 + (1 + e) * ej2 - (1 + e + 2 * ej2) * ek2)
    c = pref * (2 - (1 + e) * ej2 + (1 + e - 2 * ej2) * ek2)
    g = -0.25 * (-1 + e) * np.exp(1j * (j - k))
    h = 0.25j * (-1 + e) * np.exp(1j * (j - k))

    put([((1, 1), 1), ((4, 4), 1), ((13, 13), 1), ((16, 16), 1)], diag_like)
    put([((1, 4), 1), ((4, 1), 1), ((13, 16), 1), ((16, 13), 1)], b)
    put([((1, 13), 1), ((4, 16), 1), ((13, 1), 1), ((16, 4), 1)], c)
    put([((1, 16), 1), ((4, 13), 1), ((13, 4), 1), ((16, 1), 1)], anti_like)
    # rows given as chained equalities "factor * M[r,c] = g"
    put(
        [((6, 6), 1), ((6, 7), -1j), ((7, 6), 1j), ((7, 7), 1),
         ((10, 6), -1j), ((10, 7), -1), ((11, 6), 1), ((11, 7), -1j)],
        g,
    )
    put(
        [((6, 10), 1), ((6, 11), -1j), ((7, 10), -1j), ((7, 11), -1),
         ((10, 10), 1j), ((10, 11), 1), ((11, 10), 1), ((11, 11), -1j)],
        h,
    )
    return m


def _matrix_unit_basis() -> np.ndarray:
    units = []
    for a in range(2):
        for b in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[a, b] = 1.0
            units.append(e)
    return np.array([np.kron(p, q) for p in units for q in units])


_MATRIX_UNITS = _matrix_unit_basis()


def _candidate_conventions(kp: MomentumPair, tau: float) -> dict[str, np.ndarray]:
    u = coin_step_matrix(kp, tau)[None]
    pauli = _conjugation_matrices(u, BASIS)[0]
    units = _conjugation_matrices(u, _MATRIX_UNITS)[0]
    return {
        "pauli": pauli,
        "pauli-transposed": pauli.T,
        "matrix-units": units,
        "matrix-units-transposed": units.T,
    }


@dataclass
class TransferDiscrepancyReport:
    """Per-entry comparison of the closed-form table against the conjugation construction.

    ``mismatches`` lists every 1-based ``(row, col)`` where any sample
    disagreed by more than ``tolerance`` against the reference (Pauli)
    convention.  ``conventions`` gives the worst-case deviation of the
    table from each candidate coordinate convention that was tried.
    """

    tolerance: float
    samples: int
    seed: int
    reference_convention: str = "pauli"
    conventions: dict[str, float] = field(default_factory=dict)
    mismatches: list[dict] = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {
            "tolerance": self.tolerance,
            "samples": self.samples,
            "seed": self.seed,
            "agree": self.agree,
            "reference_convention": self.reference_convention,
            "conventions": dict(self.conventions),
            "mismatches": list(self.mismatches),
        }

    def summary(self) -> str:
        if self.agree:
            return f"tabulated transfer matrix agrees on {self.samples} samples (tol {self.tolerance:g})"
        names = ", ".join(f"({m['row']},{m['col']})" for m in self.mismatches)
        return (
            f"tabulated transfer matrix disagrees at {len(self.mismatches)} entries "
            f"over {self.samples} samples (tol {self.tolerance:g}): {names}"
        )


def compare_transfer_matrices(
    samples: int = 100, seed: int = 0, tolerance: float = 1e-12
) -> TransferDiscrepancyReport:
    rng = np.random.default_rng(seed)
    report = TransferDiscrepancyReport(tolerance, samples, seed)
    worst = {}
    per_entry: dict[tuple[int, int], dict] = {}
    for _ in range(samples):
        kp = MomentumPair(*rng.uniform(-np.pi, np.pi, size=2))
        tau = float(rng.uniform(0.0, 1.0))
        table = transfer_matrix_tabulated(kp, tau)
        for name, built in _candidate_conventions(kp, tau).items():
            worst[name] = max(worst.get(name, 0.0), float(np.max(np.abs(table - built))))
        built = _candidate_conventions(kp, tau)[report.reference_convention]
        diff = np.abs(table - built)
        for r, c in zip(*np.nonzero(diff > tolerance)):
            key = (int(r) + 1, int(c) + 1)
            entry = per_entry.setdefault(
                key, {"row": key[0], "col": key[1], "max_abs_diff": 0.0, "samples_failing": 0}
            )
            entry["samples_failing"] += 1
            if diff[r, c] > entry["max_abs_diff"]:
                entry["max_abs_diff"] = float(diff[r, c])
                entry["worst_case"] = {
                    "k": kp.k,
                    "j": kp.j,
                    "tau": tau,
                    "tabulated": [float(table[r, c].real), float(table[r, c].imag)],
                    "constructed": [float(built[r, c].real), float(built[r, c].imag)],
                }
    report.conventions = worst
    report.mismatches = [per_entry[key] for key in sorted(per_entry)]
    return report


# -- quadrature ---------------------------------------------------------------


def minimum_grid(t: int) -> int:
    return 4 * t + 2


def quadrature_nodes(n: int) -> np.ndarray:
    """Uniform periodic nodes on [-pi, pi); the trapezoid rule is exact for
    trigonometric polynomials of degree below ``n``."""
    return -np.pi + 2.0 * np.pi * np.arange(n) / n


def _grid_chunks(n: int):
    nodes = quadrature_nodes(n)
    kk, jj = np.meshgrid(nodes, nodes, indexing="ij")
    kk, jj = kk.ravel(), jj.ravel()
    for start in range(0, kk.size, _CHUNK):
        yield kk[start : start + _CHUNK], jj[start : start + _CHUNK]


def _resolve_grid(t: int, grid: int | None) -> int:
    need = minimum_grid(t)
    if grid is None:
        return need
    if int(grid) != grid or grid < need:
        raise ValueError(f"quadrature grid {grid!r} too small for t={t}: need at least {need} nodes per axis")
    return int(grid)


def _check_steps(t: int) -> int:
    if isinstance(t, bool) or int(t) != t or t < 1:
        raise ValueError(f"t must be a positive integer, got {t!r}")
    return int(t)


def _initial_coordinates() -> np.ndarray:
    phi = initial_joint_coin()
    return operator_coordinates(np.outer(phi, phi.conj()))


def _transfer_batch(k, j, tau) -> np.ndarray:
    return _conjugation_matrices(_coin_step_batch(k, j, tau), BASIS)


def exact_first_moment(tau: float, t: int, grid: int | None = None, walker: int = 1) -> float:
    """``<x>_t = sum_{l=1}^t Tr[V L^l rho0]`` averaged over the momentum torus."""
    tau = _check_tau(tau)
    t = _check_steps(t)
    n = _resolve_grid(t, grid)
    v = operator_coordinates(velocity_operator(tau, walker))
    r0 = _initial_coordinates()
    partial = []
    for k, j in _grid_chunks(n):
        m = _transfer_batch(k, j, tau)
        r = np.broadcast_to(r0, (len(k), 16))
        acc = np.zeros(len(k))
        for _ in range(t):
            r = np.einsum("gab,gb->ga", m, r)
            acc += 4.0 * (r @ v).real
        partial.append(acc.sum())
    return float(np.sum(partial) / n**2)


def exact_second_moment(tau: float, t: int, grid: int | None = None, walker: int = 1) -> float:
    """Second position moment from the velocity double sum.

    With ``rho_l = L^l rho0`` and ``w_m = v^T M^m``,

        <x^2>_t = sum_l  sum_{m=0}^{t-l} Tr[V L^m (V rho_l)]
                       + sum_{m=1}^{t-l} Tr[V L^m (rho_l V)],

    evaluated with cumulative sums of ``w_m`` so the cost is linear in ``t``.
    """
    tau = _check_tau(tau)
    t = _check_steps(t)
    n = _resolve_grid(t, grid)
    vel = velocity_operator(tau, walker)
    v = operator_coordinates(vel)
    left = left_multiplication_matrix(vel)
    right = right_multiplication_matrix(vel)
    r0 = _initial_coordinates()
    partial = []
    for k, j in _grid_chunks(n):
        g = len(k)
        m = _transfer_batch(k, j, tau)
        # cumulative[:, s] = sum_{m=0}^{s} v^T M^m
        w = np.broadcast_to(v.astype(complex), (g, 16)).copy()
        cumulative = np.empty((g, t, 16), dtype=complex)
        running = np.zeros((g, 16), dtype=complex)
        for s in range(t):
            running = running + w
            cumulative[:, s] = running
            w = np.einsum("ga,gab->gb", w, m)
        r = np.broadcast_to(r0, (g, 16))
        acc = np.zeros(g)
        for l in range(1, t + 1):
            r = np.einsum("gab,gb->ga", m, r)
            cw = cumulative[:, t - l]
            term = np.einsum("ga,ga->g", cw, r @ left.T) + np.einsum("ga,ga->g", cw - v, r @ right.T)
            acc += 4.0 * term.real
        partial.append(acc.sum())
    return float(np.sum(partial) / n**2)


# -- long-time asymptotics ----------------------------------------------------


def _stationary_part(m: np.ndarray, v: np.ndarray, eta: float, k, j) -> np.ndarray:
    """Project coordinates ``v`` onto the fixed space of each transfer matrix.

    The fixed space of ``O -> U O U^dag`` is the commutant of ``U``; the
    projection equals pinching ``V`` onto the eigenspaces of ``U``.  Modes
    with ``|lambda - 1| < eta`` count as fixed.
    """
    a = m.real - np.eye(16)
    try:
        _, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError:
        for i in range(len(a)):
            try:
                np.linalg.svd(a[i])
            except np.linalg.LinAlgError as exc:
                raise NumericalError(
                    f"spectral decomposition failed at (k, j) = ({k[i]!r}, {j[i]!r}): {exc}"
                ) from exc
        raise
    keep = s < eta
    coeff = np.einsum("gij,j->gi", vh, v) * keep
    return np.einsum("gij,gi->gj", vh, coeff)


def _check_cutoff(cutoff: float) -> float:
    cutoff = float(cutoff)
    if not 0.0 < cutoff < 1.0:
        raise ValueError(f"eigenfilter cutoff must lie in (0, 1), got {cutoff!r}")
    return cutoff


def asymptotics(
    tau: float,
    grid: int | None = None,
    cutoff: float = DEFAULT_CUTOFF,
    walker: int = 1,
) -> AsymptoticsRecord:
    """Slope of ``<x>_t`` and coefficient ``C2`` of ``<x^2>_t`` as ``t -> inf``.

    Only transfer-matrix modes with eigenvalue 1 grow with ``t``; all other
    eigenvalues lie on the unit circle away from 1 and give bounded,
    oscillating contributions.  If ``E(V)`` is the velocity operator
    projected onto the fixed space then ``slope = <Tr[E(V) rho0]>`` and
    ``C2 = <Tr[E(V)^2 rho0]>``, averages taken over the momentum torus.
    ``cutoff`` sets the fixed-mode filter ``|lambda - 1| < 1 - cutoff``.
    """
    tau = _check_tau(tau)
    cutoff = _check_cutoff(cutoff)
    n = minimum_grid(60) if grid is None else int(grid)
    if n < 2:
        raise ValueError(f"quadrature grid must have at least 2 nodes, got {grid!r}")
    eta = 1.0 - cutoff
    v = operator_coordinates(velocity_operator(tau, walker)).real
    phi = initial_joint_coin()
    slope_parts, c2_parts = [], []
    for k, j in _grid_chunks(n):
        m = _transfer_batch(k, j, tau)
        e = operator_from_coordinates(_stationary_part(m, v, eta, k, j).astype(complex))
        e_phi = e @ phi
        slope_parts.append(np.sum((e_phi @ phi.conj()).real))
        c2_parts.append(np.sum(np.abs(e_phi) ** 2))
    return AsymptoticsRecord(
        tau=tau,
        slope=float(np.sum(slope_parts) / n**2),
        C2=float(np.sum(c2_parts) / n**2),
        eigenfilter_cutoff=cutoff,
        grid=n,
    )


def asymptotic_slope(tau: float, grid: int | None = None, cutoff: float = DEFAULT_CUTOFF) -> AsymptoticsRecord:
    rec = asymptotics(tau, grid, cutoff)
    return AsymptoticsRecord(tau=rec.tau, slope=rec.slope, eigenfilter_cutoff=cutoff, grid=rec.grid)


def ballistic_C2(tau: float, grid: int | None = None, cutoff: float = DEFAULT_CUTOFF) -> AsymptoticsRecord:
    rec = asymptotics(tau, grid, cutoff)
    return AsymptoticsRecord(tau=rec.tau, C2=rec.C2, eigenfilter_cutoff=cutoff, grid=rec.grid)
