"""Sparse Fock states of bosons and fermions over a fixed number of modes.

A state is a map from occupation vectors to complex amplitudes. All states
hold a single particle-number sector. Modes are indexed from 0.

Fermionic operators use the Jordan-Wigner ordering by ascending mode index:
``|n_0, n_1, ...> = (f_0^+)^{n_0} (f_1^+)^{n_1} ... |0>``, so that ``f_i`` and
``f_i^+`` pick up the sign ``(-1)^(n_0 + ... + n_{i-1})``.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

PRUNE_TOL = 1e-12

Occupation = tuple  # tuple[int, ...]


class Statistics(str, Enum):
    BOSON = "boson"
    FERMION = "fermion"


class ModeMismatchError(ValueError):
    pass


class ZeroStateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FockState:
    """Immutable sparse state in the occupation-number basis.

    Amplitudes with modulus below ``PRUNE_TOL`` are dropped on construction.
    The state is not normalized automatically.
    """

    modes: int
    statistics: Statistics = Statistics.BOSON
    terms: Mapping[Occupation, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError(f"need at least one mode, got {self.modes}")
        stats = Statistics(self.statistics)
        clean = {}
        total = None
        for occ, amp in self.terms.items():
            occ = tuple(int(n) for n in occ)
            if len(occ) != self.modes:
                raise ModeMismatchError(
                    f"occupation {occ} has length {len(occ)}, expected {self.modes}"
                )
            if any(n < 0 for n in occ):
                raise ValueError(f"negative occupation in {occ}")
            if stats is Statistics.FERMION and any(n > 1 for n in occ):
                raise ValueError(f"fermionic occupation above 1 in {occ}")
            amp = complex(amp)
            if abs(amp) < PRUNE_TOL:
                continue
            n = sum(occ)
            if total is None:
                total = n
            elif n != total:
                raise ValueError("terms span more than one particle-number sector")
            clean[occ] = amp
        object.__setattr__(self, "statistics", stats)
        object.__setattr__(self, "terms", MappingProxyType(clean))

    @property
    def n_particles(self) -> int | None:
        """Particle number, or None for the zero state."""
        for occ in self.terms:
            return sum(occ)
        return None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_fermionic(self) -> bool:
        return self.statistics is Statistics.FERMION

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def amplitude(self, occ: Sequence[int]) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def max_occupation(self) -> int:
        return max((max(occ) for occ in self.terms), default=0)

    def scaled(self, factor: complex) -> FockState:
        return FockState(
            self.modes, self.statistics, {k: v * factor for k, v in self.terms.items()}
        )

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        body = ", ".join(f"{list(k)}: {v:.6g}" for k, v in sorted(self.terms.items()))
        return f"FockState(modes={self.modes}, {self.statistics.value}, {{{body}}})"


@dataclass(frozen=True, eq=False)
class ModeSuperposition:
    """Coefficients of the collective mode operator ``sum_i coeffs[i] a_i``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        if c.size == 0 or not np.any(np.abs(c) > 0):
            raise ValueError("mode superposition needs at least one nonzero coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self) -> int:
        return self.coeffs.size

    @property
    def normalized(self) -> bool:
        return abs(float(np.vdot(self.coeffs, self.coeffs).real) - 1.0) < 1e-10

    def unit(self) -> ModeSuperposition:
        return ModeSuperposition(self.coeffs / np.linalg.norm(self.coeffs))

    def conj(self) -> ModeSuperposition:
        return ModeSuperposition(self.coeffs.conj())

    def __repr__(self):
        return f"ModeSuperposition({np.array2string(self.coeffs, precision=4)})"


SuperpositionLike = Union[ModeSuperposition, Sequence[complex], np.ndarray]


def as_superposition(s: SuperpositionLike) -> ModeSuperposition:
    return s if isinstance(s, ModeSuperposition) else ModeSuperposition(s)


def basis_mode(n_modes: int, i: int) -> ModeSuperposition:
    c = np.zeros(n_modes, dtype=complex)
    c[i] = 1.0
    return ModeSuperposition(c)


def _coeffs_for(state: FockState, s: SuperpositionLike) -> np.ndarray:
    c = as_superposition(s).coeffs
    if c.size != state.modes:
        raise ModeMismatchError(
            f"superposition has {c.size} coefficients, state has {state.modes} modes"
        )
    return c


# -- constructors -----------------------------------------------------------


def vacuum(n_modes: int, statistics: Statistics = Statistics.BOSON) -> FockState:
    return FockState(n_modes, statistics, {(0,) * n_modes: 1.0})


def basis_state(
    occ: Sequence[int], statistics: Statistics = Statistics.BOSON
) -> FockState:
    return FockState(len(occ), statistics, {tuple(occ): 1.0})


def sym_state(n_modes: int) -> FockState:
    """One boson in each of ``n_modes`` modes."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    return basis_state((1,) * n_modes, Statistics.BOSON)


def asym_state(n_modes: int) -> FockState:
    """One fermion in each of ``n_modes`` modes."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    return basis_state((1,) * n_modes, Statistics.FERMION)


# -- ladder operators ------------------------------------------------------


def subtract(state: FockState, s: SuperpositionLike) -> FockState:
    """Apply ``sum_i alpha_i a_i``. The result is unnormalized and may be zero.

    Acting on the vacuum gives the zero state.
    """
    alpha = _coeffs_for(state, s)
    fermi = state.is_fermionic
    out: dict = defaultdict(complex)
    for occ, amp in state.terms.items():
        parity = 0
        for i, n in enumerate(occ):
            if n and alpha[i] != 0:
                if fermi:
                    factor = -1.0 if parity else 1.0
                else:
                    factor = math.sqrt(n)
                new = occ[:i] + (n - 1,) + occ[i + 1 :]
                out[new] += amp * alpha[i] * factor
            parity ^= n & 1
    return FockState(state.modes, state.statistics, out)


def add(state: FockState, s: SuperpositionLike) -> FockState:
    """Apply ``sum_i alpha_i a_i^+``. Pauli-blocked fermionic terms vanish."""
    alpha = _coeffs_for(state, s)
    fermi = state.is_fermionic
    out: dict = defaultdict(complex)
    for occ, amp in state.terms.items():
        parity = 0
        for i, n in enumerate(occ):
            if alpha[i] != 0 and not (fermi and n):
                if fermi:
                    factor = -1.0 if parity else 1.0
                else:
                    factor = math.sqrt(n + 1)
                new = occ[:i] + (n + 1,) + occ[i + 1 :]
                out[new] += amp * alpha[i] * factor
            parity ^= n & 1
    return FockState(state.modes, state.statistics, out)


def lower(state: FockState, mode: int) -> FockState:
    return subtract(state, basis_mode(state.modes, mode))


def raise_(state: FockState, mode: int) -> FockState:
    return add(state, basis_mode(state.modes, mode))


# -- inner products and normalization --------------------------------------


def _check_compatible(a: FockState, b: FockState):
    if a.modes != b.modes:
        raise ModeMismatchError(f"mode counts differ: {a.modes} vs {b.modes}")
    if a.statistics is not b.statistics:
        raise ValueError("cannot compare bosonic and fermionic states")


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, antilinear in the first argument."""
    _check_compatible(a, b)
    bt = b.terms
    return complex(sum(amp.conjugate() * bt[occ] for occ, amp in a.terms.items() if occ in bt))


def normalize(state: FockState) -> tuple[FockState, float]:
    """Return the unit-norm state and its former squared norm."""
    w = state.norm_squared()
    if w == 0.0:
        raise ZeroStateError("cannot normalize the zero state")
    return state.scaled(1.0 / math.sqrt(w)), w


def fidelity(a: FockState, b: FockState) -> float:
    """|<a|b>|^2 / (<a|a><b|b>), i.e. overlap maximized over a global phase.

    States in different particle-number sectors have fidelity 0.
    """
    na, nb = a.norm_squared(), b.norm_squared()
    if na == 0.0 or nb == 0.0:
        raise ZeroStateError("fidelity with the zero state is undefined")
    f = abs(inner_product(a, b)) ** 2 / (na * nb)
    return float(min(f, 1.0))


def is_normalized(state: FockState, tol: float = 1e-10) -> bool:
    return abs(state.norm_squared() - 1.0) <= tol


# -- reduced density matrix ------------------------------------------------


def single_particle_rdm(state: FockState) -> np.ndarray:
    """Trace-one one-body density matrix ``rho[i, j] = <a_j^+ a_i> / N``."""
    n = state.n_particles
    if n is None:
        raise ZeroStateError("zero state has no density matrix")
    if n == 0:
        raise ValueError("vacuum has no one-body density matrix")
    lowered = [lower(state, i) for i in range(state.modes)]
    rho = np.zeros((state.modes, state.modes), dtype=complex)
    for i in range(state.modes):
        for j in range(i, state.modes):
            v = inner_product(lowered[j], lowered[i])
            rho[i, j] = v
            rho[j, i] = v.conjugate()
    return rho / (state.norm_squared() * n)


# -- mode bookkeeping ------------------------------------------------------


def pad_modes(state: FockState, extra: int) -> FockState:
    """Append ``extra`` empty modes after the existing ones."""
    if extra < 0:
        raise ValueError("extra must be non-negative")
    pad = (0,) * extra
    return FockState(
        state.modes + extra, state.statistics, {k + pad: v for k, v in state.terms.items()}
    )


def drop_modes(state: FockState, modes: Iterable[int]) -> FockState:
    """Remove modes that are empty in every term."""
    drop = set(modes)
    keep = [i for i in range(state.modes) if i not in drop]
    out = {}
    for occ, amp in state.terms.items():
        if any(occ[i] for i in drop):
            raise ValueError(f"cannot drop occupied mode(s) {sorted(drop)} from {occ}")
        out[tuple(occ[i] for i in keep)] = amp
    return FockState(len(keep), state.statistics, out)


def permute_modes(state: FockState, perm: Sequence[int]) -> FockState:
    """Relabel mode ``i`` as ``perm[i]`` (bosonic states only)."""
    if state.is_fermionic:
        raise ValueError("fermionic mode permutations need reordering signs")
    if sorted(perm) != list(range(state.modes)):
        raise ValueError(f"{perm} is not a permutation of {state.modes} modes")
    out = {}
    for occ, amp in state.terms.items():
        new = [0] * state.modes
        for i, n in enumerate(occ):
            new[perm[i]] = n
        out[tuple(new)] = amp
    return FockState(state.modes, state.statistics, out)


def apply_mode_unitary(state: FockState, u: np.ndarray) -> FockState:
    """Transform creation operators as ``a_i^+ -> sum_j u[j, i] a_j^+``.

    Each basis term is rebuilt from the vacuum with the transformed creation
    operators, highest mode first so the fermionic ordering is respected.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (state.modes, state.modes):
        raise ModeMismatchError(f"unitary shape {u.shape} does not match {state.modes} modes")
    vac = vacuum(state.modes, state.statistics)
    out: dict = defaultdict(complex)
    for occ, amp in state.terms.items():
        psi = vac
        for i in reversed(range(state.modes)):
            for _ in range(occ[i]):
                psi = add(psi, u[:, i])
        norm = 1.0 if state.is_fermionic else math.prod(math.factorial(n) for n in occ)
        scale = amp / math.sqrt(norm)
        for k, v in psi.terms.items():
            out[k] += scale * v
    return FockState(state.modes, state.statistics, out)


# -- JSON ------------------------------------------------------------------


def state_to_dict(state: FockState) -> dict:
    return {
        "modes": state.modes,
        "statistics": state.statistics.value,
        "terms": [
            {"occ": list(occ), "re": amp.real, "im": amp.imag}
            for occ, amp in sorted(state.terms.items())
        ],
    }


def state_from_dict(d: Mapping) -> FockState:
    try:
        terms = {tuple(t["occ"]): complex(t["re"], t["im"]) for t in d["terms"]}
        return FockState(int(d["modes"]), Statistics(d["statistics"]), terms)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed state document: {exc}") from exc


def save_state(state: FockState, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh, indent=1)
        fh.write("\n")


def load_state(path) -> FockState:
    with open(path) as fh:
        return state_from_dict(json.load(fh))
