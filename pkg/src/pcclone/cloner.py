"""Analytic model of the linear-optics 1->3 phase-covariant cloner.

The post-selected three-qubit state is kept unnormalized; its squared norm is
the success probability of the post-selection. Which register slot belongs
to Bob and which to Eve's two qubits is configurable through
:class:`SlotAssignment`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import quantum as qc

R_STAR = 1.0 / 3.0
MAX_DISTURBANCE = 1.0 / 6.0


class Basis(enum.Enum):
    X = "x"
    Y = "y"


class Branch(enum.Enum):
    LOW = "low"
    HIGH = "high"


class Party(enum.Enum):
    BOB = "bob"
    EVE1 = "eve1"
    EVE2 = "eve2"
    EVE_PAIR = "eve_pair"


@dataclass(frozen=True)
class CloneParams:
    r: float
    phi: float = 0.0

    def __post_init__(self):
        _check_r(self.r)
        if not np.isfinite(self.phi):
            raise ValueError("phi must be finite")


@dataclass(frozen=True)
class Bb84Symbol:
    basis: Basis
    bit: int

    @property
    def phi(self) -> float:
        return BB84_PHASES[(self.basis, self.bit)]


BB84_PHASES = {
    (Basis.X, 0): 0.0,
    (Basis.X, 1): np.pi,
    (Basis.Y, 0): -np.pi / 2,
    (Basis.Y, 1): np.pi / 2,
}


@dataclass(frozen=True)
class SlotAssignment:
    eve1: int
    eve2: int
    bob: int

    def __post_init__(self):
        if sorted((self.eve1, self.eve2, self.bob)) != [0, 1, 2]:
            raise ValueError("slot assignment must be a permutation of 0, 1, 2")

    def slots(self, party: Party) -> list[int]:
        if party is Party.EVE_PAIR:
            return [self.eve1, self.eve2]
        return [getattr(self, party.value)]


# Ket subscripts taken at face value: (Bob, Eve1, Eve2) = (0, 1, 2).
NAIVE_SLOTS = SlotAssignment(eve1=1, eve2=2, bob=0)
# Bob and Eve2 swapped relative to the face-value labels. This is the labelling
# under which both the closed-form fidelities and the closed-form optimal
# measurement (low branch) hold; see tests/test_cloner.py.
DEFAULT_SLOTS = SlotAssignment(eve1=1, eve2=0, bob=2)


def _check_r(r: float) -> None:
    if not (np.isfinite(r) and 0.0 <= r <= 1.0):
        raise ValueError(f"branching ratio r={r!r} outside [0, 1]")


def input_state(phi: float) -> np.ndarray:
    return qc.equatorial(phi)


def xi_state(params: CloneParams) -> np.ndarray:
    """Unnormalized post-selected three-qubit state."""
    r, s = params.r, np.sqrt(params.r)
    e = np.exp(1j * params.phi)
    a = 1j * (r - 1) * s / 2
    b = (2j * r * s + 3 * r - 2j * s - 1) / 4
    c = (2j * r * s - 3 * r - 2j * s + 1) / 4
    psi = np.zeros(8, dtype=complex)
    psi[0b001] = a
    psi[0b010] = b
    psi[0b100] = c
    psi[0b110] = e * a
    psi[0b101] = e * c
    psi[0b011] = e * b
    return psi


def success_probability(r: float) -> float:
    _check_r(r)
    return (1 - 3 * r**2 + 6 * r**3) / 4


def bob_fidelity(r: float) -> float:
    _check_r(r)
    return -(-1 + r + r**2 - 5 * r**3) / (1 - 3 * r**2 + 6 * r**3)


def eve_fidelity(r: float) -> float:
    _check_r(r)
    return (1 + 4 * r - 11 * r**2 + 10 * r**3) / (2 - 6 * r**2 + 12 * r**3)


def disturbance(r: float) -> float:
    return 1.0 - bob_fidelity(r)


def branch_of(r: float) -> Branch:
    return Branch.LOW if r <= R_STAR else Branch.HIGH


def r_for_disturbance(d: float, branch: Branch = Branch.LOW, tol: float = 1e-12) -> float:
    """Invert :func:`disturbance` on one monotone branch by bisection."""
    if not (0.0 <= d <= MAX_DISTURBANCE + 1e-15):
        raise ValueError(f"disturbance {d!r} is not reachable (max 1/6)")
    lo, hi = (0.0, R_STAR) if branch is Branch.LOW else (R_STAR, 1.0)
    rising = branch is Branch.LOW
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        below = disturbance(mid) < d
        if below == rising:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def reduced_state(
    params: CloneParams,
    party: Party,
    slots: SlotAssignment = DEFAULT_SLOTS,
) -> np.ndarray:
    """Normalized reduced density operator of one party (or Eve's pair)."""
    rho = qc.to_density(xi_state(params), normalized=True)
    return qc.partial_trace(rho, slots.slots(party))


def party_fidelity(
    params: CloneParams, party: Party, slots: SlotAssignment = DEFAULT_SLOTS
) -> float:
    if party is Party.EVE_PAIR:
        raise ValueError("fidelity is defined per single-qubit clone")
    return qc.fidelity_pure_mixed(
        reduced_state(params, party, slots), input_state(params.phi)
    )


def check_slot_assignment(
    slots: SlotAssignment,
    r_grid=np.linspace(0.0, 1.0, 101),
    phis=tuple(BB84_PHASES.values()),
    tol: float = 1e-12,
) -> float:
    """Max deviation of the reduced fidelities from the closed forms.

    Raises ``ValueError`` when the deviation exceeds ``tol``.
    """
    worst = 0.0
    for r in r_grid:
        fb, fe = bob_fidelity(r), eve_fidelity(r)
        for phi in phis:
            p = CloneParams(float(r), phi)
            worst = max(
                worst,
                abs(party_fidelity(p, Party.BOB, slots) - fb),
                abs(party_fidelity(p, Party.EVE1, slots) - fe),
                abs(party_fidelity(p, Party.EVE2, slots) - fe),
            )
    if worst > tol:
        raise ValueError(f"slot assignment {slots} off by {worst:.3g}")
    return worst
