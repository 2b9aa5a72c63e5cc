"""Reduced two-walker state, position statistics and correlation measures.

All entropies and mutual informations are in bits.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeStateVector

#: Probabilities below this are treated as a bug rather than rounding noise.
NEGATIVE_PROBABILITY_ERROR = -1e-12
#: Local eigenvalues at or below this are treated as zero (their sector is dropped).
ZERO_EIGENVALUE = 1e-14
#: Gap between nonzero local eigenvalues below which the eigenbasis is flagged as not unique.
DEGENERACY_GAP = 1e-10


class NumericalError(RuntimeError):
    pass


class DegenerateSpectrumWarning(UserWarning):
    """Local eigenbasis is not unique, so the dephasing map (and MID) depend on the solver."""


@dataclass(frozen=True, eq=False)
class ReducedWalkerState:
    """Walker state with both coins traced out.

    ``rho_w = sum_c |phi_c><phi_c|`` where ``components[c]`` is the walker-space
    vector for joint coin index ``c``, laid out as an ``(n, n)`` array over the
    parity support ``positions`` (shared by both walkers).
    """

    components: np.ndarray
    positions: np.ndarray
    t: int
    tau: float | None = None

    @property
    def trace(self) -> float:
        c = self.components
        return float(np.sum(c.real**2 + c.imag**2))

    def dense(self) -> np.ndarray:
        """Materialise ``rho_w`` as an ``(n*n, n*n)`` matrix (walker-1 index major)."""
        flat = self.components.reshape(4, -1)
        return flat.T @ flat.conj()


@dataclass(frozen=True, eq=False)
class JointDistribution:
    probabilities: np.ndarray
    positions: np.ndarray
    t: int
    tau: float | None = None

    def sparse_entries(self):
        """``(x, y, p)`` triplets over the support, sorted by ``(x, y)``."""
        pos = self.positions
        return [
            (int(pos[i]), int(pos[j]), float(self.probabilities[i, j]))
            for i in range(len(pos))
            for j in range(len(pos))
        ]


@dataclass(frozen=True, eq=False)
class MarginalDistribution:
    probabilities: np.ndarray
    positions: np.ndarray
    walker: int


@dataclass(frozen=True)
class MomentsRecord:
    mean: float
    second_moment: float
    variance: float
    spread: float


@dataclass(eq=False)
class DephasedJointTable:
    """Joint probabilities after local dephasing in the eigenbases of rho_1, rho_2."""

    p: np.ndarray
    eigenvalues1: np.ndarray
    eigenvalues2: np.ndarray
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class CorrelationMeasures:
    mi_bits: float
    qmi_bits: float
    mid_bits: float
    classical_mi_of_dephased_bits: float
    warnings: tuple[str, ...] = ()


def reduce_to_walkers(state: LatticeStateVector, tau: float | None = None) -> ReducedWalkerState:
    t, T = state.t, state.T_max
    positions = np.arange(-t, t + 1, 2)
    idx = positions + T
    comps = state.amplitudes[:, idx[:, None], idx[None, :]].copy()
    return ReducedWalkerState(comps, positions, t, tau)


def reduced_density_matrix(rw: ReducedWalkerState, walker: int) -> np.ndarray:
    """Single-walker density matrix on the parity support."""
    c = rw.components
    if walker == 1:
        return np.einsum("cxy,czy->xz", c, c.conj())
    if walker == 2:
        return np.einsum("cxy,cxz->yz", c, c.conj())
    raise ValueError(f"walker must be 1 or 2, got {walker}")


def _clip_probabilities(p: np.ndarray, what: str) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.size and p.min() < NEGATIVE_PROBABILITY_ERROR:
        raise NumericalError(f"{what} has a negative entry {p.min():.3e}")
    return np.clip(p, 0.0, None)


def joint_distribution(rw: ReducedWalkerState) -> JointDistribution:
    c = rw.components
    p = np.sum(c.real**2 + c.imag**2, axis=0)
    return JointDistribution(p, rw.positions.copy(), rw.t, rw.tau)


def marginals(jd: JointDistribution) -> tuple[MarginalDistribution, MarginalDistribution]:
    p = jd.probabilities
    return (
        MarginalDistribution(p.sum(axis=1), jd.positions, 1),
        MarginalDistribution(p.sum(axis=0), jd.positions, 2),
    )


def position_moments(md: MarginalDistribution) -> MomentsRecord:
    p = np.asarray(md.probabilities, dtype=float)
    x = np.asarray(md.positions, dtype=float)
    mean = float(np.dot(p, x))
    second = float(np.dot(p, x * x))
    variance = max(second - mean * mean, 0.0)
    return MomentsRecord(mean, second, variance, float(np.sqrt(variance)))


def shannon_entropy(p) -> float:
    p = _clip_probabilities(np.ravel(p), "distribution")
    nz = p[p > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def shannon_mutual_information(table) -> float:
    """Mutual information of a 2-D joint probability table, 0 log 0 = 0."""
    p = _clip_probabilities(table, "joint table")
    p1 = p.sum(axis=1)
    p2 = p.sum(axis=0)
    mask = p > 0.0
    outer = np.outer(p1, p2)
    return float(np.sum(p[mask] * np.log2(p[mask] / outer[mask])))


def mutual_information(jd: JointDistribution) -> float:
    return shannon_mutual_information(jd.probabilities)


def von_neumann_entropy(spectrum) -> float:
    lam = np.asarray(spectrum, dtype=float).ravel()
    if lam.size == 0:
        raise ValueError("empty spectrum")
    if lam.min() < -1e-12:
        raise ValueError(f"spectrum has a negative eigenvalue {lam.min():.3e}")
    total = lam.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"spectrum sums to {total!r}, not 1")
    lam = np.clip(lam, 0.0, None)
    nz = lam[lam > 0.0]
    return float(-np.sum(nz * np.log2(nz)))


def gram_matrix(rw: ReducedWalkerState) -> np.ndarray:
    """``G[c, c'] = <phi_c'|phi_c>``; its spectrum is the nonzero spectrum of rho_w."""
    flat = rw.components.reshape(4, -1)
    return flat @ flat.conj().T


def _eigh_desc(matrix: np.ndarray, context: str):
    try:
        vals, vecs = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed for {context}: {exc}") from exc
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def _context(rw: ReducedWalkerState, what: str) -> str:
    return f"{what} (t={rw.t}, tau={rw.tau})"


def walker_entropies(rw: ReducedWalkerState) -> tuple[float, float, float]:
    """``(S(rho_1), S(rho_2), S(rho_w))``."""
    s1 = von_neumann_entropy(_eigh_desc(reduced_density_matrix(rw, 1), _context(rw, "rho_1"))[0])
    s2 = von_neumann_entropy(_eigh_desc(reduced_density_matrix(rw, 2), _context(rw, "rho_2"))[0])
    sw = von_neumann_entropy(_eigh_desc(gram_matrix(rw), _context(rw, "Gram matrix"))[0])
    return s1, s2, sw


def quantum_mutual_information(rw: ReducedWalkerState) -> float:
    s1, s2, sw = walker_entropies(rw)
    return s1 + s2 - sw


def _nonzero_sector(vals, vecs, label, rw, notes):
    keep = vals > ZERO_EIGENVALUE
    vals, vecs = vals[keep], vecs[:, keep]
    gaps = vals[:-1] - vals[1:]
    for i in np.flatnonzero(gaps < DEGENERACY_GAP):
        notes.append(
            f"{label} eigenvalues {vals[i]:.6e} and {vals[i + 1]:.6e} are degenerate "
            f"(gap {gaps[i]:.1e}) at t={rw.t}, tau={rw.tau}; dephasing basis not unique"
        )
    return vals, vecs


def dephase_local(rw: ReducedWalkerState) -> DephasedJointTable:
    notes: list[str] = []
    v1, e1 = _eigh_desc(reduced_density_matrix(rw, 1), _context(rw, "rho_1"))
    v2, e2 = _eigh_desc(reduced_density_matrix(rw, 2), _context(rw, "rho_2"))
    v1, e1 = _nonzero_sector(v1, e1, "rho_1", rw, notes)
    v2, e2 = _nonzero_sector(v2, e2, "rho_2", rw, notes)
    # <e_j (x) f_k | phi_c> for every c, summed in modulus squared
    amps = np.einsum("xj,cxy,yk->cjk", e1.conj(), rw.components, e2.conj())
    p = np.sum(amps.real**2 + amps.imag**2, axis=0)
    return DephasedJointTable(p, v1, v2, notes)


def _warn(notes):
    for note in notes:
        warnings.warn(note, DegenerateSpectrumWarning, stacklevel=3)


def measurement_induced_disturbance(rw: ReducedWalkerState) -> float:
    """QMI minus the mutual information left after local eigenbasis dephasing."""
    table = dephase_local(rw)
    _warn(table.warnings)
    return quantum_mutual_information(rw) - shannon_mutual_information(table.p)


def correlation_measures(rw: ReducedWalkerState) -> CorrelationMeasures:
    """MI, QMI and MID of one reduced state; degeneracy notes are returned, not warned."""
    qmi = quantum_mutual_information(rw)
    table = dephase_local(rw)
    cmi = shannon_mutual_information(table.p)
    mi = mutual_information(joint_distribution(rw))
    return CorrelationMeasures(mi, qmi, qmi - cmi, cmi, tuple(table.warnings))
