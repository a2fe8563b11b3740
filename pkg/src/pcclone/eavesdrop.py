"""Eve's side of the attack: QBER, her two-state ensembles and measurements."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import cloner
from . import quantum as qc
from .cloner import Basis, Branch, CloneParams, Party

POVM_TOL = 1e-10


@dataclass(frozen=True)
class ChannelParams:
    p_d: float = 0.0
    p_b0: float = 0.0

    def __post_init__(self):
        for name in ("p_d", "p_b0"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v!r} outside [0, 1]")
        if self.denominator <= 0.0:
            raise ValueError(
                "undefined error rate: Bob never clicks (p_b0=1 and p_d=0)"
            )

    @property
    def denominator(self) -> float:
        return 1.0 - self.p_b0 + 2.0 * self.p_b0 * self.p_d


def qber(d: float, ch: ChannelParams) -> float:
    """Error rate seen by Bob given disturbance ``d`` and dark counts."""
    if not 0.0 <= d <= cloner.MAX_DISTURBANCE + 1e-15:
        raise ValueError(f"disturbance {d!r} outside [0, 1/6]")
    return ((1.0 - ch.p_b0) * d + ch.p_b0 * ch.p_d) / ch.denominator


@dataclass(frozen=True)
class Povm:
    """Ordered POVM; validated on construction."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        els = tuple(np.asarray(m, dtype=complex) for m in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise ValueError("empty POVM")
        dim = els[0].shape[0]
        for m in els:
            if m.shape != (dim, dim):
                raise ValueError("POVM elements differ in shape")
            if np.max(np.abs(m - m.conj().T)) > POVM_TOL:
                raise ValueError("POVM element is not Hermitian")
            if np.linalg.eigvalsh(m).min() < -POVM_TOL:
                raise ValueError("POVM element is not positive semidefinite")
        if np.max(np.abs(sum(els) - np.eye(dim))) > POVM_TOL:
            raise ValueError("POVM elements do not sum to identity")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def rotated(self, u: np.ndarray) -> "Povm":
        return Povm(tuple(u @ m @ u.conj().T for m in self.elements))


@dataclass(frozen=True)
class EveEnsemble:
    basis: Basis
    states: tuple[np.ndarray, np.ndarray]
    priors: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        for rho in self.states:
            qc.check_density(rho)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def holevo(self) -> float:
        return qc.holevo_bound(list(zip(self.priors, self.states)))


def eve_ensemble(r: float, basis: Basis = Basis.X, slots=cloner.DEFAULT_SLOTS) -> EveEnsemble:
    """Eve's two-qubit states for bit 0 and bit 1 of ``basis``."""
    states = tuple(
        cloner.reduced_state(
            CloneParams(r, cloner.BB84_PHASES[(basis, bit)]), Party.EVE_PAIR, slots
        )
        for bit in (0, 1)
    )
    return EveEnsemble(basis, states)


def joint_distribution(priors: Sequence[float], states, elements) -> np.ndarray:
    """p[j, k] = prior_j Tr(rho_j M_k)."""
    rho = np.stack([p * s for p, s in zip(priors, states)])
    m = np.stack(elements)
    return np.einsum("jab,kba->jk", rho, m).real


def shannon_information(p: np.ndarray) -> float:
    """Mutual information (bits) of a joint distribution table."""
    p = np.clip(p, 0.0, None)
    pj = p.sum(axis=1, keepdims=True)
    pk = p.sum(axis=0, keepdims=True)
    mask = p > 0
    pj, pk = np.broadcast_to(pj, p.shape), np.broadcast_to(pk, p.shape)
    log_ratio = np.log2(p[mask]) - np.log2(pj[mask]) - np.log2(pk[mask])
    return float(max(0.0, np.sum(p[mask] * log_ratio)))


def mutual_information(ens: EveEnsemble, m: Povm) -> float:
    if m.dim != ens.dim:
        raise ValueError(f"POVM dim {m.dim} does not match ensemble dim {ens.dim}")
    return shannon_information(joint_distribution(ens.priors, ens.states, m.elements))


def _product_povm(first: Sequence[float], second: Sequence[float]) -> Povm:
    return Povm(
        tuple(
            qc.tensor(qc.projector(qc.equatorial(a)), qc.projector(qc.equatorial(b)))
            for a in first
            for b in second
        )
    )


def conventional_povm() -> Povm:
    """|+-x> product projectors, ordered ++, +-, -+, --."""
    return _product_povm((0.0, np.pi), (0.0, np.pi))


# Moving from the X ensemble (phi = 0, pi) to the Y ensemble (phi = -pi/2, pi/2)
# is the local phase diag(1, e^{-i pi/2}) on both qubits.
BASIS_SHIFT = {Basis.X: 0.0, Basis.Y: -np.pi / 2}


def rotated_conventional_povm(basis: Basis) -> Povm:
    s = BASIS_SHIFT[basis]
    return _product_povm((s, np.pi + s), (s, np.pi + s))


@dataclass(frozen=True)
class ThetaSetting:
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi / 2 + 1e-15:
            raise ValueError(f"theta={self.theta!r} outside [0, pi/2]")


def theta_of_disturbance(d: float) -> ThetaSetting:
    if not 0.0 <= d <= cloner.MAX_DISTURBANCE + 1e-15:
        raise ValueError(f"disturbance {d!r} outside [0, 1/6]; arccos undefined")
    c = 2.0 * np.sqrt(d) / np.sqrt(1.0 - 2.0 * d)
    return ThetaSetting(float(np.arccos(min(1.0, c))))


def optimal_povm(d: float, basis: Basis = Basis.X, branch: Branch = Branch.LOW) -> Povm:
    """Closed-form separable measurement for Eve's qubit pair.

    Elements are chi(-t) x chi(t), chi(-t) x chi(pi+t), chi(pi-t) x chi(t),
    chi(pi-t) x chi(pi+t) with t = theta(d). On the high branch (r > 1/3) the
    roles of the two qubits swap, which is the same as t -> -t.
    """
    t = theta_of_disturbance(d).theta
    if branch is Branch.HIGH:
        t = -t
    s = BASIS_SHIFT[basis]
    return _product_povm((-t + s, np.pi - t + s), (t + s, np.pi + t + s))


class Scheme(enum.Enum):
    CONVENTIONAL = "conventional"
    OPTIMAL_CLOSED_FORM = "optimal_closed"
    OPTIMAL_NUMERIC = "optimal_numeric"


@dataclass(frozen=True)
class InfoRow:
    r: float
    d: float
    info: float
    branch: Branch
    converged: bool = True


def information_at(r: float, scheme: Scheme, optimizer_config=None) -> InfoRow:
    d = min(max(cloner.disturbance(r), 0.0), cloner.MAX_DISTURBANCE)
    branch = cloner.branch_of(r)
    ens = eve_ensemble(r, Basis.X)
    converged = True
    if scheme is Scheme.CONVENTIONAL:
        info = mutual_information(ens, conventional_povm())
    elif scheme is Scheme.OPTIMAL_CLOSED_FORM:
        info = mutual_information(ens, optimal_povm(d, Basis.X, branch))
    else:
        from .povm_opt import OptimizerConfig, optimize_accessible_info

        report = optimize_accessible_info(ens, optimizer_config or OptimizerConfig())
        info, converged = report.best_info, report.converged
    return InfoRow(r, d, info, branch, converged)


def information_curve(
    grid: Sequence[float],
    branch: Branch | None = Branch.LOW,
    scheme: Scheme = Scheme.CONVENTIONAL,
    optimizer_config=None,
) -> list[InfoRow]:
    """(r, D, I) rows for the r values lying on ``branch``, sorted by D.

    ``branch=None`` keeps every r. r = 1/3 belongs to both branches.
    """
    rows = []
    for r in grid:
        r = float(r)
        cloner._check_r(r)
        if branch is Branch.LOW and r > cloner.R_STAR + 1e-15:
            continue
        if branch is Branch.HIGH and r < cloner.R_STAR - 1e-15:
            continue
        rows.append(information_at(r, scheme, optimizer_config))
    return sorted(rows, key=lambda row: (row.d, row.r))
