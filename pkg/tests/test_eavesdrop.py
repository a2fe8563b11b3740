from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pcclone import cloner, quantum as qc
from pcclone.cloner import Basis, Branch, SlotAssignment
from pcclone.eavesdrop import (
    ChannelParams,
    EveEnsemble,
    Povm,
    Scheme,
    conventional_povm,
    eve_ensemble,
    information_curve,
    mutual_information,
    optimal_povm,
    qber,
    rotated_conventional_povm,
    theta_of_disturbance,
)

from conftest import random_density, random_unitary

R_GRID = np.linspace(0, 1, 41)


def brute_information(states, elements, priors=(0.5, 0.5)):
    """Mutual information by explicit double loop."""
    p = [[priors[j] * np.trace(states[j] @ m).real for m in elements] for j in range(len(states))]
    pk = [sum(p[j][k] for j in range(len(states))) for k in range(len(elements))]
    total = 0.0
    for j in range(len(states)):
        for k in range(len(elements)):
            if p[j][k] > 0:
                total += p[j][k] * np.log2(p[j][k] / (priors[j] * pk[k]))
    return total


def is_complete_projective(povm, tol=1e-12):
    total = sum(povm.elements)
    idem = all(np.max(np.abs(m @ m - m)) <= tol for m in povm.elements)
    return np.max(np.abs(total - np.eye(povm.dim))) <= tol and idem


class TestQber:
    def test_no_dark_counts(self):
        assert qber(0.1, ChannelParams(0.0, 0.3)) == pytest.approx(0.1, abs=1e-15)

    @pytest.mark.parametrize("d", [0.0, 0.05, 1 / 6])
    def test_dark_dominated(self, d):
        assert qber(d, ChannelParams(0.2, 1.0)) == pytest.approx(0.5, abs=1e-15)

    def test_substitution(self):
        exact = (Fraction("0.5") * Fraction("0.1") + Fraction("0.5") * Fraction("1e-5")) / (
            1 - Fraction("0.5") + 2 * Fraction("0.5") * Fraction("1e-5")
        )
        got = qber(0.1, ChannelParams(1e-5, 0.5))
        assert got == pytest.approx(float(exact), rel=1e-14)
        assert f"{got:.6f}" == "0.100008"

    def test_degenerate_channel(self):
        with pytest.raises(ValueError, match="undefined"):
            ChannelParams(0.0, 1.0)

    def test_bad_disturbance(self):
        with pytest.raises(ValueError):
            qber(0.3, ChannelParams())

    def test_monotone_in_dark_counts(self):
        for d in np.linspace(0, 1 / 6, 7):
            for pb0 in np.linspace(0, 0.9, 7):
                vals = [qber(d, ChannelParams(pd, pb0)) for pd in np.linspace(0, 1, 21)]
                assert np.all(np.diff(vals) >= -1e-15)


class TestEnsemble:
    def test_r0_identical(self):
        ens = eve_ensemble(0.0)
        assert np.allclose(ens.states[0], ens.states[1], atol=1e-15)

    def test_x_and_y_related_by_local_phase(self):
        ex, ey = eve_ensemble(1 / 3, Basis.X), eve_ensemble(1 / 3, Basis.Y)
        u = qc.local_phase(-np.pi / 2, 2)
        for a, b in zip(ex.states, ey.states):
            assert np.allclose(u @ a @ u.conj().T, b, atol=1e-12)

    @pytest.mark.parametrize("r", [0.1, 1 / 3, 0.6, 0.95])
    def test_equal_spectra(self, r):
        a, b = eve_ensemble(r).states
        assert np.allclose(np.linalg.eigvalsh(a), np.linalg.eigvalsh(b), atol=1e-12)

    def test_holevo_at_third(self):
        # frozen from an independent matrix-logarithm evaluation
        assert eve_ensemble(1 / 3).holevo() == pytest.approx(0.601607, abs=1e-6)


class TestMutualInformation:
    def test_perfect_discrimination(self):
        states = (qc.projector(qc.ket("00")), qc.projector(qc.ket("11")))
        ens = EveEnsemble(Basis.X, states)
        comp = Povm(tuple(qc.projector(qc.ket(b)) for b in ("00", "01", "10", "11")))
        assert mutual_information(ens, comp) == pytest.approx(1.0, abs=1e-15)

    def test_identical_states(self, rng):
        rho = random_density(rng, 4)
        ens = EveEnsemble(Basis.X, (rho, rho))
        assert mutual_information(ens, conventional_povm()) == pytest.approx(0, abs=1e-15)

    def test_conventional_at_peak_regression(self):
        ens = eve_ensemble(1 / 3)
        value = mutual_information(ens, conventional_povm())
        assert value == pytest.approx(brute_information(ens.states, conventional_povm().elements), abs=1e-14)
        assert value == pytest.approx(0.442503672008933, abs=1e-12)

    def test_dimension_mismatch(self):
        ens = EveEnsemble(Basis.X, (np.eye(2) / 2, np.eye(2) / 2))
        with pytest.raises(ValueError):
            mutual_information(ens, conventional_povm())

    @given(st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        states = (random_density(rng, 4, 2), random_density(rng, 4))
        u = random_unitary(rng, 4)
        m = conventional_povm().rotated(u)
        ens = EveEnsemble(Basis.X, states)
        assert mutual_information(ens, m) == pytest.approx(brute_information(states, m.elements), abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.floats(0, 1))
    def test_unitary_invariance(self, seed, r):
        rng = np.random.default_rng(seed)
        u = random_unitary(rng, 4)
        ens = eve_ensemble(r)
        rot = EveEnsemble(Basis.X, tuple(u @ s @ u.conj().T for s in ens.states))
        m = optimal_povm(min(cloner.disturbance(r), 1 / 6))
        assert mutual_information(rot, m.rotated(u)) == pytest.approx(mutual_information(ens, m), abs=1e-12)


class TestMeasurements:
    def test_conventional(self):
        m = conventional_povm()
        assert len(m) == 4
        assert np.max(np.abs(sum(m.elements) - np.eye(4))) <= 1e-14
        assert is_complete_projective(m)
        plus2 = qc.projector(qc.tensor(qc.equatorial(0), qc.equatorial(0)))
        assert np.trace(m.elements[0] @ plus2).real == pytest.approx(1.0)

    def test_povm_rejects_incomplete(self):
        with pytest.raises(ValueError):
            Povm((np.eye(4) / 2,))
        with pytest.raises(ValueError):
            Povm((np.diag([2, 2, 0, 0]), np.diag([-1, -1, 1, 1])))

    def test_theta_endpoints(self):
        assert theta_of_disturbance(0).theta == pytest.approx(np.pi / 2, abs=1e-15)
        assert theta_of_disturbance(1 / 6).theta == pytest.approx(0, abs=1e-7)

    def test_theta_domain(self):
        with pytest.raises(ValueError):
            theta_of_disturbance(0.17)
        with pytest.raises(ValueError):
            theta_of_disturbance(-0.01)

    def test_theta_decreasing(self):
        thetas = [theta_of_disturbance(d).theta for d in np.linspace(0, 1 / 6, 200)]
        assert np.all(np.diff(thetas) < 0)

    @pytest.mark.parametrize("basis", list(Basis))
    @pytest.mark.parametrize("branch", list(Branch))
    def test_optimal_is_complete_projective(self, basis, branch):
        for d in np.linspace(0, 1 / 6, 50):
            assert is_complete_projective(optimal_povm(d, basis, branch))

    def test_optimal_at_peak_is_x_products(self):
        m = optimal_povm(1 / 6)
        conv = conventional_povm()
        # same set of projectors, possibly reordered
        for e in m.elements:
            assert min(np.max(np.abs(e - c)) for c in conv.elements) < 1e-7

    def test_dominance_on_grid(self):
        for r in R_GRID:
            ens = eve_ensemble(r)
            d = min(cloner.disturbance(r), 1 / 6)
            opt = mutual_information(ens, optimal_povm(d, Basis.X, cloner.branch_of(r)))
            conv = mutual_information(ens, conventional_povm())
            assert opt >= conv - 1e-12
            assert opt <= ens.holevo() + 1e-9

    def test_bounds_all_grid_both_bases(self):
        for r in R_GRID:
            for basis in Basis:
                ens = eve_ensemble(r, basis)
                chi = ens.holevo()
                d = min(cloner.disturbance(r), 1 / 6)
                for m in (conventional_povm(), rotated_conventional_povm(basis),
                          optimal_povm(d, basis, cloner.branch_of(r))):
                    i = mutual_information(ens, m)
                    assert 0 <= i <= chi + 1e-9

    def test_basis_symmetry(self):
        for r in R_GRID:
            ix = mutual_information(eve_ensemble(r, Basis.X), conventional_povm())
            iy = mutual_information(eve_ensemble(r, Basis.Y), rotated_conventional_povm(Basis.Y))
            assert iy == pytest.approx(ix, abs=1e-12)

    def test_closed_form_basis_symmetry(self):
        for r in R_GRID:
            d, b = min(cloner.disturbance(r), 1 / 6), cloner.branch_of(r)
            ix = mutual_information(eve_ensemble(r, Basis.X), optimal_povm(d, Basis.X, b))
            iy = mutual_information(eve_ensemble(r, Basis.Y), optimal_povm(d, Basis.Y, b))
            assert iy == pytest.approx(ix, abs=1e-12)

    def test_unrotated_measurement_on_y_is_reported(self):
        # not claimed equal to the X value; only sanity bounds
        ens = eve_ensemble(1 / 3, Basis.Y)
        iy = mutual_information(ens, conventional_povm())
        assert 0 <= iy <= ens.holevo() + 1e-9


class TestBranchSign:
    """Which qubit gets chi(-theta) matters, and it flips between branches."""

    def test_mirrored_measurement_loses_on_low_branch(self):
        ens = eve_ensemble(0.1)
        d = cloner.disturbance(0.1)
        good = mutual_information(ens, optimal_povm(d, Basis.X, Branch.LOW))
        mirrored = mutual_information(ens, optimal_povm(d, Basis.X, Branch.HIGH))
        assert good - mirrored > 0.1

    def test_cyclic_labels_break_dominance(self):
        # with Eve1 on slot 0 the closed-form measurement underperforms at r = 0.1
        cyclic = SlotAssignment(eve1=0, eve2=1, bob=2)
        ens = eve_ensemble(0.1, Basis.X, cyclic)
        d = cloner.disturbance(0.1)
        assert mutual_information(ens, optimal_povm(d)) < mutual_information(ens, conventional_povm())


class TestCurve:
    def test_rows(self):
        rows = information_curve(np.linspace(0, 1, 13), Branch.LOW, Scheme.OPTIMAL_CLOSED_FORM)
        assert all(row.r <= 1 / 3 + 1e-15 for row in rows)
        assert [row.d for row in rows] == sorted(row.d for row in rows)
        assert rows[0].r == 0 and rows[0].info == pytest.approx(0, abs=1e-12)
        assert rows[-1].d == pytest.approx(1 / 6, abs=1e-12)

    def test_high_branch_filter(self):
        rows = information_curve(np.linspace(0, 1, 13), Branch.HIGH)
        assert all(row.r >= 1 / 3 - 1e-15 for row in rows)
        assert all(row.branch is Branch.HIGH for row in rows if row.r > 1 / 3 + 1e-12)

    def test_dominates(self):
        grid = np.linspace(0, 1, 25)
        conv = information_curve(grid, None, Scheme.CONVENTIONAL)
        opt = information_curve(grid, None, Scheme.OPTIMAL_CLOSED_FORM)
        for a, b in zip(conv, opt):
            assert a.r == b.r
            assert b.info >= a.info - 1e-12

    def test_zero_for_every_scheme(self):
        for scheme in Scheme:
            (row,) = information_curve([0.0], None, scheme)
            assert row.info == pytest.approx(0, abs=1e-12)
