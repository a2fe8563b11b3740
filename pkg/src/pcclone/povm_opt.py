"""Numerical search for the accessible information of a two-state ensemble.

Each restart draws a random full-rank POVM and climbs the mutual information
with a multiplicative fixed-point update: every element is conjugated by
``I + eps * G_k``, where ``G_k`` is the gradient of the information with
respect to ``M_k`` (a prior-weighted sum of the states times the per-outcome
log-likelihood ratios), and the result is mapped back onto the POVM set by
symmetric normalization. Steps that would lower the information are rejected
and ``eps`` is halved, so every restart ascends monotonically.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import cloner
from .cloner import Basis
from .eavesdrop import (
    EveEnsemble,
    Povm,
    eve_ensemble,
    joint_distribution,
    mutual_information,
    optimal_povm,
    shannon_information,
)

log = logging.getLogger(__name__)

GAP_BELOW = 1e-4
GAP_ABOVE = 1e-3


@dataclass(frozen=True)
class OptimizerConfig:
    n_elements: int = 4
    max_iter: int = 2000
    tol: float = 1e-10
    restarts: int = 16
    seed: int = 42

    def __post_init__(self):
        if not 2 <= self.n_elements <= 16:
            raise ValueError("n_elements must be between 2 and 16")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class OptimizationReport:
    best_info: float
    best_povm: Povm
    iterations_used: int
    restart_index: int
    converged: bool
    history: tuple[float, ...] = field(default=(), repr=False)


class DegeneratePovmError(ValueError):
    pass


def _inv_sqrt(s: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(s)
    if w.min() <= 1e-13 * max(1.0, w.max()):
        raise DegeneratePovmError("element sum is singular")
    return (v / np.sqrt(w)) @ v.conj().T


def project_to_valid_povm(raw: Sequence[np.ndarray]) -> Povm:
    """Clip negative eigenvalues, then rescale so the elements sum to identity."""
    clipped = []
    for m in raw:
        m = np.asarray(m, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        w, v = np.linalg.eigh(m)
        clipped.append((v * np.clip(w, 0.0, None)) @ v.conj().T)
    t = _inv_sqrt(sum(clipped))
    out = []
    for m in clipped:
        m = t @ m @ t
        out.append(0.5 * (m + m.conj().T))
    return Povm(tuple(out))


def _info_and_gradients(ens: EveEnsemble, elements) -> tuple[float, np.ndarray]:
    p = joint_distribution(ens.priors, ens.states, elements)
    info = shannon_information(p)
    pj = p.sum(axis=1, keepdims=True)
    pk = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(p > 0, np.log2(p) - np.log2(pj) - np.log2(pk), 0.0)
    weighted = np.stack([q * s for q, s in zip(ens.priors, ens.states)])
    grads = np.einsum("jab,jk->kab", weighted, w)
    return info, grads


def _renormalize(stack: np.ndarray) -> np.ndarray:
    """Batched version of :func:`project_to_valid_povm` for the inner loop.

    Clipping is only done when round-off has pushed an eigenvalue below zero.
    """
    t = _inv_sqrt(stack.sum(axis=0))
    out = t @ stack @ t
    out = 0.5 * (out + out.conj().transpose(0, 2, 1))
    if np.linalg.eigvalsh(out).min() < -1e-13:
        w, v = np.linalg.eigh(out)
        out = (v * np.clip(w, 0.0, None)[:, None, :]) @ v.conj().transpose(0, 2, 1)
        t = _inv_sqrt(out.sum(axis=0))
        out = t @ out @ t
        out = 0.5 * (out + out.conj().transpose(0, 2, 1))
    return out


def ascend(
    ens: EveEnsemble, povm: Povm, max_iter: int = 2000, tol: float = 1e-10
) -> tuple[Povm, list[float], bool]:
    """Run the fixed-point ascent from ``povm``.

    Returns the final POVM, the information after each accepted iteration
    (starting value first) and whether the gain fell below ``tol``.
    """
    eye = np.eye(povm.dim)
    elements = np.stack(povm.elements)
    info, grads = _info_and_gradients(ens, elements)
    history = [info]
    eps = 1.0
    converged = False
    for _ in range(max_iter):
        while True:
            a = eye + eps * grads
            with np.errstate(all="ignore"):
                cand = a @ elements @ a
            new = None
            if np.all(np.isfinite(cand)):
                try:
                    with np.errstate(all="ignore"):
                        new = _renormalize(cand)
                except (DegeneratePovmError, np.linalg.LinAlgError):
                    pass
            if new is not None and np.all(np.isfinite(new)):
                new_info, new_grads = _info_and_gradients(ens, new)
                if new_info >= info:
                    break
            eps *= 0.5
            if eps < 1e-14:
                break
        if eps < 1e-14:
            converged = True
            break
        gain = new_info - info
        elements, info, grads = new, new_info, new_grads
        history.append(info)
        eps = min(2.0 * eps, 16.0)
        if gain < tol:
            converged = True
            break
    return project_to_valid_povm(list(elements)), history, converged


def split_to_rank_one(povm: Povm, cutoff: float = 1e-9) -> Povm:
    """Replace every element by its weighted eigenprojectors."""
    pieces = []
    for m in povm.elements:
        w, v = np.linalg.eigh(m)
        for lam, vec in zip(w, v.T):
            if lam > cutoff:
                pieces.append(lam * np.outer(vec, vec.conj()))
    return project_to_valid_povm(pieces)


def random_povm(dim: int, n_elements: int, rng: np.random.Generator) -> Povm:
    gens = rng.standard_normal((n_elements, dim, dim)) + 1j * rng.standard_normal(
        (n_elements, dim, dim)
    )
    return project_to_valid_povm([g @ g.conj().T for g in gens])


def _single_restart(ens: EveEnsemble, cfg: OptimizerConfig, index: int):
    rng = np.random.default_rng([cfg.seed, index])
    start = random_povm(ens.dim, cfg.n_elements, rng)
    povm, history, converged = ascend(ens, start, cfg.max_iter, cfg.tol)
    refined, more, converged2 = ascend(
        ens, split_to_rank_one(povm), cfg.max_iter, cfg.tol
    )
    # splitting never lowers the information, but keep the better one anyway
    if more[-1] >= history[-1]:
        povm, converged = refined, converged2
        history = history + more[1:]
    return povm, history, converged


def optimize_accessible_info(ens: EveEnsemble, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizationReport:
    """Best mutual information over ``cfg.restarts`` seeded ascents."""
    best = None
    for index in range(cfg.restarts):
        povm, history, converged = _single_restart(ens, cfg, index)
        if best is None or history[-1] > best.best_info:
            best = OptimizationReport(
                best_info=history[-1],
                best_povm=povm,
                iterations_used=len(history) - 1,
                restart_index=index,
                converged=converged,
                history=tuple(history),
            )
    return best


@dataclass(frozen=True)
class SweepRow:
    r: float
    d: float
    i_numeric: float
    i_closed_form: float
    converged: bool

    @property
    def gap(self) -> float:
        return self.i_numeric - self.i_closed_form

    @property
    def within_band(self) -> bool:
        return -GAP_BELOW <= self.gap <= GAP_ABOVE


def sweep_optimal_info(
    r_grid: Sequence[float], cfg: OptimizerConfig = OptimizerConfig()
) -> list[SweepRow]:
    """Numerical vs closed-form optimum on the X-basis ensemble for each r."""
    rows = []
    for r in r_grid:
        r = float(r)
        ens = eve_ensemble(r, Basis.X)
        d = min(max(cloner.disturbance(r), 0.0), cloner.MAX_DISTURBANCE)
        closed = mutual_information(ens, optimal_povm(d, Basis.X, cloner.branch_of(r)))
        report = optimize_accessible_info(ens, cfg)
        row = SweepRow(r, d, report.best_info, closed, report.converged)
        if row.gap > GAP_ABOVE:
            log.warning(
                "numerical optimum exceeds closed form at r=%.6g by %.3g bits",
                r,
                row.gap,
            )
        rows.append(row)
    return rows
