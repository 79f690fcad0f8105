import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from bosonsculpt import fock, protocols
from bosonsculpt.fock import FockState, Statistics
from bosonsculpt.slater import (
    extract_beta,
    is_slater_determinant,
    purity,
    slater_rank,
    slater_report,
    slater_spectrum,
    takagi,
    takagi_factor,
)
from conftest import random_unit

B, F = Statistics.BOSON, Statistics.FERMION


def state_from_beta(beta):
    """sum_ij beta_ij a_i^+ a_j^+ |0>, built with creation operators."""
    d = beta.shape[0]
    psi = FockState(d, B, {})
    vac = fock.vacuum(d)
    terms = {}
    for i in range(d):
        for j in range(d):
            if beta[i, j] == 0:
                continue
            e_i, e_j = np.eye(d)[i], np.eye(d)[j]
            part = fock.add(fock.add(vac, e_j), e_i).scaled(beta[i, j])
            for k, v in part.terms.items():
                terms[k] = terms.get(k, 0) + v
    return FockState(d, B, terms) if terms else psi


def random_two_boson(rng, d):
    beta = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    beta = beta + beta.T
    return fock.normalize(state_from_beta(beta))[0]


class TestExtractBeta:
    def test_pair_state(self):
        beta = extract_beta(protocols.target_phi(2))
        want = np.zeros((4, 4))
        want[0, 1] = want[1, 0] = -1 / (2 * math.sqrt(2))
        want[2, 3] = want[3, 2] = 1 / (2 * math.sqrt(2))
        np.testing.assert_allclose(beta, want, atol=1e-15)

    def test_double_occupation(self):
        # |2> = (1/sqrt2) a^+ a^+ |0>, so beta_11 = 1/sqrt2 and 2 tr(beta beta^+) = 1
        beta = extract_beta(fock.basis_state((2,)))
        assert beta[0, 0] == pytest.approx(1 / math.sqrt(2))
        assert 2 * np.trace(beta @ beta.conj().T).real == pytest.approx(1.0)

    def test_unnormalized_diagonal_amplitude(self):
        # Fock amplitude 1/sqrt2 on |2> carries squared norm 1/2
        beta = extract_beta(FockState(1, B, {(2,): 1 / math.sqrt(2)}))
        assert beta[0, 0] == pytest.approx(0.5)

    def test_product_pair(self):
        beta = extract_beta(fock.basis_state((1, 1)))
        np.testing.assert_allclose(beta, [[0, 0.5], [0.5, 0]])

    def test_round_trip_and_norm(self, rng):
        for d in (2, 3, 5):
            psi = random_two_boson(rng, d)
            beta = extract_beta(psi)
            np.testing.assert_array_equal(beta, beta.T)
            assert 2 * np.trace(beta @ beta.conj().T).real == pytest.approx(psi.norm_squared())
            assert fock.fidelity(state_from_beta(beta), psi) == pytest.approx(1.0)

    def test_errors(self):
        with pytest.raises(ValueError):
            extract_beta(fock.sym_state(3))
        with pytest.raises(ValueError):
            extract_beta(fock.asym_state(2))


class TestTakagi:
    def test_single_mode(self):
        s = takagi(np.array([[1 / math.sqrt(2)]]))
        np.testing.assert_allclose(s.r, [1.0])

    def test_phi4(self):
        s = slater_spectrum(protocols.target_phi(2))
        np.testing.assert_allclose(s.r, [0.25] * 4, atol=1e-12)
        assert slater_rank(s, 1e-8) == 4
        assert purity(s) == pytest.approx(0.25, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_psi_2n(self, n):
        s = slater_spectrum(protocols.target_phi(n))
        np.testing.assert_allclose(s.r, [1 / (2 * n)] * (2 * n), atol=1e-12)
        assert slater_rank(s) == 2 * n
        assert purity(s) == pytest.approx(1 / (2 * n), abs=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_psi_2n_explicit_slater_modes(self, n):
        # c-modes (a_{2k-1} -+ (-1)^k a_{2k})/sqrt2 with coefficients +-1/(2 sqrt n)
        c = np.zeros((2 * n, 2 * n))
        sig = np.zeros(2 * n)
        for k in range(1, n + 1):
            s = (-1) ** k
            c[2 * k - 2, k - 1], c[2 * k - 1, k - 1] = 1 / math.sqrt(2), s / math.sqrt(2)
            c[2 * k - 2, n + k - 1], c[2 * k - 1, n + k - 1] = 1 / math.sqrt(2), -s / math.sqrt(2)
            sig[k - 1] = sig[n + k - 1] = 1 / (2 * math.sqrt(n))
        sig[n:] *= -1  # the negative half is absorbed into phases by takagi
        beta = extract_beta(protocols.target_phi(n))
        np.testing.assert_allclose(c @ np.diag(sig) @ c.T, beta, atol=1e-15)
        np.testing.assert_allclose(2 * sig**2, takagi(beta).r, atol=1e-12)

    def test_reconstruction_and_unitarity(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 13))
            a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            a = a + a.T
            v, sigma = takagi_factor(a)
            assert np.all(np.diff(sigma) <= 0) and np.all(sigma >= 0)
            assert np.abs(v @ np.diag(sigma) @ v.T - a).max() <= 1e-9
            assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-10

    @pytest.mark.parametrize("spectrum", [[1, 1, 1, 1], [1, 1, 0.5, 0.5, 0], [2, 0, 0], [1e-3] * 5])
    def test_degenerate(self, rng, spectrum):
        d = len(spectrum)
        for _ in range(20):
            u = unitary_group.rvs(d, random_state=rng)
            a = u @ np.diag(spectrum) @ u.T
            v, sigma = takagi_factor(a)
            np.testing.assert_allclose(sigma, sorted(spectrum, reverse=True), atol=1e-12)
            assert np.abs(v @ np.diag(sigma) @ v.T - a).max() <= 1e-12
            assert np.abs(v.conj().T @ v - np.eye(d)).max() <= 1e-10

    def test_spectrum_invariants(self, rng):
        for d in (2, 4, 7):
            psi = random_two_boson(rng, d)
            s = slater_spectrum(psi)
            assert s.r.sum() == pytest.approx(1.0, abs=1e-10)
            assert np.all(np.diff(s.r) <= 0)
            assert np.abs(s.reconstruct() - extract_beta(psi)).max() <= 1e-9
            assert s.residual <= 1e-9
            assert np.abs(s.basis.conj().T @ s.basis - np.eye(d)).max() <= 1e-10

    def test_rejects_non_symmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            takagi_factor(np.array([[0, 1], [0, 0]]))

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="normalized"):
            takagi(np.eye(2))


class TestPurity:
    def test_rank_one(self):
        s = slater_spectrum(fock.basis_state((0, 2)))
        assert purity(s) == pytest.approx(1.0)
        assert slater_rank(s) == 1

    def test_product_state_rank(self):
        # a_1^+ a_2^+ |0> = ((c_+)^2 - (c_-)^2)/2: two modes, rank 2
        s = slater_spectrum(fock.basis_state((1, 1)))
        np.testing.assert_allclose(s.r, [0.5, 0.5])

    def test_bounds(self, rng):
        for d in range(1, 9):
            p = purity(slater_spectrum(random_two_boson(rng, d)))
            assert 1 / d - 1e-12 <= p <= 1 + 1e-12

    def test_unitary_invariance(self, rng):
        for d in (2, 3, 5, 8):
            beta = extract_beta(random_two_boson(rng, d))
            u = unitary_group.rvs(d, random_state=rng)
            s1, s2 = takagi(beta), takagi(u @ beta @ u.T)
            assert purity(s1) == pytest.approx(purity(s2), abs=1e-9)
            assert slater_rank(s1) == slater_rank(s2)

    def test_fock_basis_change_invariance(self, rng):
        for d in (3, 4, 6):
            psi = random_two_boson(rng, d)
            u = unitary_group.rvs(d, random_state=rng)
            moved = fock.apply_mode_unitary(psi, u)
            assert purity(slater_spectrum(moved)) == pytest.approx(
                purity(slater_spectrum(psi)), abs=1e-9
            )

    def test_rank_tol(self):
        with pytest.raises(ValueError):
            slater_rank(slater_spectrum(protocols.target_phi(2)), 0)

    def test_report(self):
        r = slater_report(protocols.target_phi(3))
        assert set(r) == {"r", "purity", "rank", "residual"}
        assert r["rank"] == 6 and r["purity"] == pytest.approx(1 / 6)


class TestSlaterDeterminant:
    def test_one_subtraction(self, rng):
        s = fock.normalize(fock.subtract(fock.asym_state(4), random_unit(rng, 4)))[0]
        assert is_slater_determinant(s)

    def test_three_subtractions(self, rng):
        s = fock.asym_state(5)
        for _ in range(3):
            s = fock.normalize(fock.subtract(s, random_unit(rng, 5)))[0]
        assert is_slater_determinant(s)

    def test_entangled_pair_is_not(self):
        r = 1 / math.sqrt(2)
        s = FockState(4, F, {(1, 1, 0, 0): r, (0, 0, 1, 1): r})
        assert not is_slater_determinant(s)

    def test_wrong_statistics(self):
        with pytest.raises(ValueError):
            is_slater_determinant(fock.sym_state(2))
