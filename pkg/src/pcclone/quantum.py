"""Dense linear algebra for small qubit registers.

States are plain ``numpy`` arrays: a pure state is a complex vector of length
``2**n`` (slot 0 is the leftmost ket label), a density operator is a square
complex matrix. Everything here is a pure function of its inputs.
"""
from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
EIG_CUTOFF = 1e-12


def n_qubits(dim: int) -> int:
    n = int(round(np.log2(dim)))
    if dim < 1 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of 2")
    return n


def ket(bits: str) -> np.ndarray:
    """Computational basis ket, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def equatorial(phase: float) -> np.ndarray:
    """(|0> + e^{i phase}|1>)/sqrt(2)."""
    return np.array([1.0, np.exp(1j * phase)], dtype=complex) / np.sqrt(2)


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product; slots of the first operand come first."""
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def norm_sq(psi: np.ndarray) -> float:
    return float(np.vdot(psi, psi).real)


def normalize(psi: np.ndarray) -> np.ndarray:
    return psi / np.sqrt(norm_sq(psi))


def to_density(psi: np.ndarray, normalized: bool = True) -> np.ndarray:
    rho = projector(psi)
    if normalized:
        rho = rho / np.trace(rho).real
    return rho


def check_density(rho: np.ndarray, normalized: bool = True) -> None:
    """Raise ``ValueError`` if ``rho`` is not a valid density operator."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density operator must be square")
    if not np.all(np.isfinite(rho)):
        raise ValueError("density operator has non-finite entries")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise ValueError("density operator is not Hermitian")
    if np.linalg.eigvalsh(rho).min() < -PSD_TOL:
        raise ValueError("density operator is not positive semidefinite")
    if normalized and abs(np.trace(rho).real - 1.0) > TRACE_TOL:
        raise ValueError("density operator is not unit trace")


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduce ``rho`` to the qubit slots in ``keep``.

    The kept slots appear in the order given, so ``keep=[1, 0]`` also swaps
    them. Trace is preserved.
    """
    rho = np.asarray(rho, dtype=complex)
    n = n_qubits(rho.shape[0])
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one slot")
    if len(set(keep)) != len(keep):
        raise ValueError("duplicate slot in keep")
    for k in keep:
        if not 0 <= k < n:
            raise ValueError(f"slot {k} out of range for {n} qubits")
    traced = [i for i in range(n) if i not in keep]
    t = rho.reshape([2] * (2 * n))
    order = keep + traced
    t = t.transpose(order + [n + i for i in order])
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def fidelity_pure_mixed(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi|rho|psi>, clamped to [0, 1]."""
    rho = np.asarray(rho)
    psi = np.asarray(psi)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: {rho.shape} vs {psi.size}")
    f = np.vdot(psi, rho @ psi).real
    return float(min(1.0, max(0.0, f)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in bits; eigenvalues below 1e-12 count as zero."""
    w = np.linalg.eigvalsh(rho)
    w = w[w > EIG_CUTOFF]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def holevo_bound(ensemble: Sequence[tuple[float, np.ndarray]]) -> float:
    """S(sum p_i rho_i) - sum p_i S(rho_i) for ``[(p_i, rho_i), ...]``."""
    priors = np.array([p for p, _ in ensemble], dtype=float)
    states = [np.asarray(r) for _, r in ensemble]
    if np.any(priors <= 0) or abs(priors.sum() - 1.0) > 1e-12:
        raise ValueError("priors must be positive and sum to 1")
    if len({s.shape for s in states}) != 1:
        raise ValueError("ensemble members differ in dimension")
    avg = sum(p * s for p, s in zip(priors, states))
    chi = von_neumann_entropy(avg) - sum(
        p * von_neumann_entropy(s) for p, s in zip(priors, states)
    )
    return max(0.0, chi)


def local_phase(phase: float, n: int) -> np.ndarray:
    """diag(1, e^{i phase}) on each of ``n`` slots."""
    return tensor(*[np.diag([1.0, np.exp(1j * phase)])] * n)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over gamma of ||e^{i gamma} a - b||."""
    overlap = np.vdot(a, b)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(phase * a - b))
