"""Slater representation of two-boson states.

A two-boson state is written as ``sum_ij beta_ij a_i^+ a_j^+ |0>`` with a
symmetric ``beta``. Since ``<psi|psi> = 2 tr(beta beta^+)``, the Takagi
factorization ``beta = V diag(sigma) V^T`` gives Slater coefficients
``r_i = 2 sigma_i^2`` that sum to one for a normalized state, and new modes
``c_k^+ = sum_i V[i, k] a_i^+`` in which the state reads
``sum_k sqrt(r_k / 2) c_k^+ c_k^+ |0>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm

from .fock import FockState, Statistics, single_particle_rdm

DEFAULT_RANK_TOL = 1e-8
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SlaterSpectrum:
    r: np.ndarray
    basis: np.ndarray
    residual: float

    @property
    def d(self) -> int:
        return self.r.size

    def reconstruct(self) -> np.ndarray:
        v = self.basis
        return v @ np.diag(np.sqrt(self.r / 2)) @ v.T


def extract_beta(state: FockState) -> np.ndarray:
    """Symmetric amplitude matrix of a two-boson state.

    ``a_i^+ a_j^+ |0>`` with ``i != j`` collects ``beta_ij + beta_ji``, and
    ``a_i^+ a_i^+ |0> = sqrt(2) |2_i>``.
    """
    if state.statistics is not Statistics.BOSON:
        raise ValueError("extract_beta needs a bosonic state")
    if state.n_particles != 2:
        raise ValueError(f"extract_beta needs exactly 2 particles, got {state.n_particles}")
    beta = np.zeros((state.modes, state.modes), dtype=complex)
    for occ, amp in state.terms.items():
        occupied = [i for i, n in enumerate(occ) if n]
        if len(occupied) == 1:
            i = occupied[0]
            beta[i, i] = amp / math.sqrt(2)
        else:
            i, j = occupied
            beta[i, j] = beta[j, i] = amp / 2
    return beta


def _clusters(sigma: np.ndarray, rtol: float) -> list[slice]:
    scale = max(float(sigma[0]), 1e-300) if sigma.size else 1.0
    groups, start = [], 0
    for k in range(1, sigma.size + 1):
        if k == sigma.size or sigma[k - 1] - sigma[k] > rtol * scale:
            groups.append(slice(start, k))
            start = k
    return groups


def takagi_factor(a: np.ndarray, rtol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Takagi factorization of a complex symmetric matrix.

    Returns ``(v, sigma)`` with ``v`` unitary, ``sigma`` non-negative and
    descending, and ``a = v @ diag(sigma) @ v.T``.

    Starts from the SVD ``a = U S W^+``. Symmetry forces ``U_b = conj(W_b) Z_b``
    on every block of equal singular values, with ``Z_b = W_b^T U_b`` unitary
    and symmetric. The symmetric square root ``Y_b`` of ``Z_b`` then gives
    ``v_b = conj(W_b) Y_b``. Null singular vectors need no phase fix.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(float(np.max(np.abs(a))), 1.0) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    u, sigma, wh = np.linalg.svd(a)
    w_conj = wh.T  # conj(W)
    v = np.array(w_conj, dtype=complex)
    null = 1e-14 * max(float(sigma[0]), 1e-300) if sigma.size else 0.0
    for block in _clusters(sigma, rtol):
        if sigma[block.start] <= null:
            continue
        z = wh.conj()[block, :] @ u[:, block]  # W_b^T U_b
        z = (z + z.T) / 2
        y = sqrtm(z) if z.shape[0] > 1 else np.sqrt(z)
        y = (y + y.T) / 2
        v[:, block] = w_conj[:, block] @ y
    return v, sigma


def takagi(beta: np.ndarray) -> SlaterSpectrum:
    """Slater spectrum of a normalized two-boson amplitude matrix."""
    v, sigma = takagi_factor(beta)
    r = 2 * sigma**2
    total = float(r.sum())
    if abs(total - 1.0) > 1e-10:
        raise ValueError(
            f"Slater coefficients sum to {total:.12g}; beta must come from a normalized state"
        )
    residual = float(np.max(np.abs(v @ np.diag(sigma) @ v.T - beta), initial=0.0))
    return SlaterSpectrum(r=r, basis=v, residual=residual)


def slater_spectrum(state: FockState) -> SlaterSpectrum:
    return takagi(extract_beta(state))


def purity(s: SlaterSpectrum) -> float:
    return float(np.sum(s.r**2))


def slater_rank(s: SlaterSpectrum, tol: float = DEFAULT_RANK_TOL) -> int:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return int(np.count_nonzero(s.r > tol))


def is_slater_determinant(state: FockState, tol: float = 1e-9) -> bool:
    """True iff the K-fermion state has K one-body eigenvalues 1/K and the rest 0."""
    if state.statistics is not Statistics.FERMION:
        raise ValueError("is_slater_determinant needs a fermionic state")
    k = state.n_particles
    if not k:
        raise ValueError("need at least one fermion")
    ev = np.sort(np.linalg.eigvalsh(single_particle_rdm(state)))[::-1]
    return bool(np.all(np.abs(ev[:k] - 1.0 / k) <= tol) and np.all(np.abs(ev[k:]) <= tol))


def slater_report(state: FockState, tol: float = DEFAULT_RANK_TOL) -> dict:
    s = slater_spectrum(state)
    return {
        "r": [float(x) for x in s.r],
        "purity": purity(s),
        "rank": slater_rank(s, tol),
        "residual": s.residual,
    }
