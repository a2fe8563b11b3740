"""Bosonic simulation of the dual-rail cloning circuit.

Three spatial modes, each with two rails (a, b), give six optical modes
indexed ``2 * spatial + rail`` (spatial 0..2, rail 0 = a, 1 = b). Alice's
photon enters spatial mode 0, the ancillas enter spatial mode 1 on rail a
and spatial mode 2 on rail b. Beam splitters act identically on both rails
of their spatial pair. Post-selection keeps one photon per spatial mode and
reads rail a as |0>, rail b as |1>.
"""
from __future__ import annotations

import enum
import itertools
from collections import defaultdict
from dataclasses import dataclass, replace
from math import factorial, sqrt
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import cloner
from .quantum import phase_aligned_distance

N_SPATIAL = 3
N_MODES = 2 * N_SPATIAL
PRUNE = 1e-14
CALIBRATION_TOL = 1e-9

FockState = dict  # occupation tuple (len 6) -> complex amplitude


class Convention(enum.Enum):
    SYMMETRIC_I = "symmetric_i"
    REAL_ASYM = "real_asym"


class RMeaning(enum.Enum):
    TRANSMITTANCE = "transmittance"
    REFLECTANCE = "reflectance"


@dataclass(frozen=True)
class BeamSplitterSpec:
    modes: tuple[int, int]
    t: float
    convention: Convention = Convention.SYMMETRIC_I

    def __post_init__(self):
        i, j = self.modes
        if i == j or min(i, j) < 0:
            raise ValueError(f"bad spatial mode pair {self.modes}")
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"transmittance {self.t!r} outside [0, 1]")

    def matrix(self) -> np.ndarray:
        """2x2 map: column c gives the images of input mode c on (i, j)."""
        st, rt = sqrt(self.t), sqrt(1.0 - self.t)
        if self.convention is Convention.SYMMETRIC_I:
            return np.array([[st, 1j * rt], [1j * rt, st]])
        return np.array([[st, rt], [-rt, st]], dtype=complex)


def encode_inputs(phi: float) -> FockState:
    s = 1.0 / sqrt(2.0)
    return {
        (1, 0, 1, 0, 0, 1): complex(s),
        (0, 1, 1, 0, 0, 1): s * np.exp(1j * phi),
    }


def _creation_list(occ: Sequence[int]) -> list[int]:
    return [m for m, n in enumerate(occ) for _ in range(n)]


def _boson_norm(occ: Iterable[int]) -> float:
    return float(np.prod([sqrt(factorial(n)) for n in occ]))


def apply_beam_splitter(state: FockState, spec: BeamSplitterSpec) -> FockState:
    """Rewrite each creation operator on the pair and re-expand the product."""
    i, j = spec.modes
    u = spec.matrix()
    pair = (i, j)
    out: dict[tuple[int, ...], complex] = defaultdict(complex)
    for occ, amp in state.items():
        if 2 * max(pair) + 1 >= len(occ):
            raise ValueError(f"mode pair {pair} outside a {len(occ)}-mode state")
        branches = []
        for m in _creation_list(occ):
            spatial, rail = divmod(m, 2)
            if spatial in pair:
                col = pair.index(spatial)
                branches.append(
                    [(2 * pair[row] + rail, u[row, col]) for row in (0, 1)]
                )
            else:
                branches.append([(m, 1.0)])
        base = amp / _boson_norm(occ)
        for combo in itertools.product(*branches):
            new = [0] * len(occ)
            a = base
            for m, c in combo:
                new[m] += 1
                a *= c
            out[tuple(new)] += a * _boson_norm(new)
    return {k: v for k, v in out.items() if abs(v) > PRUNE}


def post_select(state: FockState) -> tuple[np.ndarray, float]:
    """Keep one photon per spatial mode; returns (unnormalized 3-qubit state, probability)."""
    psi = np.zeros(2**N_SPATIAL, dtype=complex)
    for occ, amp in state.items():
        if all(occ[2 * s] + occ[2 * s + 1] == 1 for s in range(N_SPATIAL)):
            index = 0
            for s in range(N_SPATIAL):
                index = 2 * index + occ[2 * s + 1]
            psi[index] += amp
    return psi, float(np.vdot(psi, psi).real)


def permute_slots(psi: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Output slot k takes qubit ``perm[k]``."""
    return psi.reshape([2] * N_SPATIAL).transpose(list(perm)).reshape(-1)


@dataclass(frozen=True)
class CircuitTopology:
    """Beam splitters in application order; ``vbs_index`` marks the variable one."""

    splitters: tuple[BeamSplitterSpec, ...]
    vbs_index: int
    r_meaning: RMeaning
    output_permutation: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.vbs_index < len(self.splitters):
            raise ValueError("vbs_index out of range")
        if sorted(self.output_permutation) != list(range(N_SPATIAL)):
            raise ValueError("output_permutation is not a permutation")

    def at_ratio(self, r: float) -> list[BeamSplitterSpec]:
        t = r if self.r_meaning is RMeaning.TRANSMITTANCE else 1.0 - r
        specs = list(self.splitters)
        specs[self.vbs_index] = replace(specs[self.vbs_index], t=t)
        return specs

    def with_permutation(self, perm: Sequence[int]) -> "CircuitTopology":
        return replace(self, output_permutation=tuple(perm))

    def to_text(self) -> str:
        lines = [
            f"vbs_index={self.vbs_index}",
            f"r_meaning={self.r_meaning.value}",
            "output_permutation=" + ",".join(map(str, self.output_permutation)),
        ]
        for k, bs in enumerate(self.splitters):
            lines.append(f"bs{k}.modes={bs.modes[0]},{bs.modes[1]}")
            lines.append(f"bs{k}.t={bs.t!r}")
            lines.append(f"bs{k}.convention={bs.convention.value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CircuitTopology":
        kv = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
        splitters = []
        k = 0
        while f"bs{k}.modes" in kv:
            i, j = (int(x) for x in kv[f"bs{k}.modes"].split(","))
            splitters.append(
                BeamSplitterSpec(
                    (i, j), float(kv[f"bs{k}.t"]), Convention(kv[f"bs{k}.convention"])
                )
            )
            k += 1
        return cls(
            tuple(splitters),
            int(kv["vbs_index"]),
            RMeaning(kv["r_meaning"]),
            tuple(int(x) for x in kv["output_permutation"].split(",")),
        )


def save_topology(topology: CircuitTopology, path) -> None:
    Path(path).write_text(topology.to_text())


def load_topology(path) -> CircuitTopology:
    return CircuitTopology.from_text(Path(path).read_text())


def run_cloner_circuit(r: float, phi: float, topology: CircuitTopology) -> tuple[np.ndarray, float]:
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"r={r!r} outside [0, 1]")
    state = encode_inputs(phi)
    for spec in topology.at_ratio(r):
        state = apply_beam_splitter(state, spec)
    psi, prob = post_select(state)
    return permute_slots(psi, topology.output_permutation), prob


CALIBRATION_R = tuple(k / 10 for k in range(11))
CALIBRATION_PHI = (0.0, np.pi, -np.pi / 2, np.pi / 2)


def candidate_topologies(conventions: Sequence[Convention] = tuple(Convention)) -> list[CircuitTopology]:
    """HBS1 on spatial (1, 2) at t=1/2, then the VBS and HBS2 each on (0, 1) or
    (0, 2); one convention for all three; both r meanings; all output orders."""
    out = []
    for vbs_pair, hbs2_pair, conv, meaning in itertools.product(
        ((0, 1), (0, 2)), ((0, 1), (0, 2)), conventions, tuple(RMeaning)
    ):
        splitters = (
            BeamSplitterSpec((1, 2), 0.5, conv),
            BeamSplitterSpec(vbs_pair, 0.5, conv),
            BeamSplitterSpec(hbs2_pair, 0.5, conv),
        )
        for perm in itertools.permutations(range(N_SPATIAL)):
            out.append(CircuitTopology(splitters, 1, meaning, perm))
    return out


@dataclass(frozen=True)
class GridPoint:
    r: float
    phi: float
    distance: float
    shape_distance: float
    probability: float
    target_probability: float


@dataclass(frozen=True)
class CalibrationResult:
    topology: CircuitTopology
    residual: float
    points: tuple[GridPoint, ...]

    @property
    def shape_residual(self) -> float:
        """Worst distance between the normalized states."""
        return max(p.shape_distance for p in self.points)

    @property
    def probability_ratios(self) -> np.ndarray:
        return np.array([p.probability / p.target_probability for p in self.points])

    @property
    def ok(self) -> bool:
        return self.residual <= CALIBRATION_TOL


def _normalized(psi: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(psi)
    return psi / n if n > 0 else psi


def evaluate_topology(
    topology: CircuitTopology,
    r_grid: Sequence[float] = CALIBRATION_R,
    phis: Sequence[float] = CALIBRATION_PHI,
    _cache: dict | None = None,
) -> CalibrationResult:
    points = []
    for r in r_grid:
        for phi in phis:
            key = (topology.splitters, topology.r_meaning, r, phi)
            if _cache is not None and key in _cache:
                raw, prob = _cache[key]
            else:
                raw, prob = run_cloner_circuit(r, phi, replace(topology, output_permutation=(0, 1, 2)))
                if _cache is not None:
                    _cache[key] = (raw, prob)
            psi = permute_slots(raw, topology.output_permutation)
            target = cloner.xi_state(cloner.CloneParams(r, phi))
            points.append(
                GridPoint(
                    r,
                    phi,
                    phase_aligned_distance(psi, target),
                    phase_aligned_distance(_normalized(psi), _normalized(target)),
                    prob,
                    cloner.success_probability(r),
                )
            )
    return CalibrationResult(topology, max(p.distance for p in points), tuple(points))


def calibrate_topology(
    candidates: Sequence[CircuitTopology] | None = None,
    r_grid: Sequence[float] = CALIBRATION_R,
    phis: Sequence[float] = CALIBRATION_PHI,
) -> CalibrationResult:
    """Exhaustive search; first candidate wins ties. Never raises on a bad fit."""
    if candidates is None:
        candidates = candidate_topologies()
    cache: dict = {}
    best = None
    for topo in candidates:
        result = evaluate_topology(topo, r_grid, phis, cache)
        if best is None or result.residual < best.residual:
            best = result
    return best
