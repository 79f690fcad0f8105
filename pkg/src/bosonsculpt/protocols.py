"""Sculpting protocols: subtraction sequences on maximally symmetric states.

Mode ``k`` in the formulas below is 1-based; the arrays are 0-based. In the
dual-rail picture qubit ``k`` lives on modes ``2k-1`` (bit 0) and ``2k``
(bit 1).

Step lists are in application order: ``steps[0]`` acts first. Every step is
a unit vector, so ``success_weight`` is the squared norm left after the
whole sequence acting on a normalized input.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import fock
from .fock import FockState, ModeSuperposition, Statistics

FAMILIES = ("bipartite", "ghz", "w", "dicke", "w_stage1", "w_stage2", "custom")


class ProtocolFailure(RuntimeError):
    """A subtraction step annihilated the state."""

    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"step {step} annihilates the state")


def expected_step_count(family: str, n: int, m: int | None = None) -> int | None:
    if family == "bipartite":
        return 2 * (n - 1)
    if family == "ghz":
        return n
    if family in ("w", "dicke"):
        return 3 * n
    if family == "w_stage1":
        return 2 * n
    if family == "w_stage2":
        return n
    return None


@dataclass(frozen=True)
class Protocol:
    n_modes: int
    steps: tuple[ModeSuperposition, ...]
    family: str = "custom"
    n: int | None = None
    m: int | None = None
    keep_modes: int | None = None  # trailing modes dropped from the output

    def __post_init__(self):
        steps = tuple(fock.as_superposition(s) for s in self.steps)
        object.__setattr__(self, "steps", steps)
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        for i, s in enumerate(steps):
            if s.modes != self.n_modes:
                raise ValueError(f"step {i} has {s.modes} coefficients, expected {self.n_modes}")
            if not s.normalized:
                raise ValueError(f"step {i} is not unit-norm")
        if self.n is not None:
            want = expected_step_count(self.family, self.n, self.m)
            if want is not None and want != len(steps):
                raise ValueError(
                    f"{self.family} with n={self.n} needs {want} steps, got {len(steps)}"
                )
        if self.keep_modes is not None and not 0 < self.keep_modes <= self.n_modes:
            raise ValueError("keep_modes out of range")


@dataclass(frozen=True)
class ProtocolResult:
    final_state: FockState
    success_weight: float
    per_step_weights: tuple[float, ...]
    fidelity_to_target: float | None = None
    history: tuple[FockState, ...] = field(default=(), repr=False)


def _unit(entries: Mapping[int, complex], n_modes: int) -> ModeSuperposition:
    c = np.zeros(n_modes, dtype=complex)
    for k, v in entries.items():
        c[k - 1] = v
    return ModeSuperposition(c / np.linalg.norm(c))


def _product_state(n_modes: int, factors: Sequence[Mapping[int, complex]]) -> FockState:
    """Normalized ``prod_f (sum_{pair} amp a_i^+ a_j^+ ...) |0>`` over 1-based modes.

    Each factor maps a tuple of distinct modes to an amplitude.
    """
    terms: dict = {(): 1.0 + 0j}
    for factor in factors:
        new: dict = {}
        for modes, amp in terms.items():
            for extra, c in factor.items():
                key = tuple(sorted(modes + tuple(extra)))
                if len(set(key)) != len(key):
                    raise ValueError("factors overlap on a mode")
                new[key] = new.get(key, 0j) + amp * c
        terms = new
    out = {}
    for modes, amp in terms.items():
        occ = [0] * n_modes
        for k in modes:
            occ[k - 1] = 1
        out[tuple(occ)] = amp
    state, _ = fock.normalize(FockState(n_modes, Statistics.BOSON, out))
    return state


# -- dual rail --------------------------------------------------------------


def dual_rail_state(amplitudes: Mapping[str, complex]) -> FockState:
    """Normalized bosonic state from qubit bitstrings, e.g. ``{"000": 1, "111": 1}``."""
    if not amplitudes:
        raise ValueError("no amplitudes given")
    n = {len(b) for b in amplitudes}
    if len(n) != 1:
        raise ValueError("bitstrings of different lengths")
    (nq,) = n
    out = {}
    for bits, amp in amplitudes.items():
        occ = [0] * (2 * nq)
        for k, b in enumerate(bits):
            if b not in "01":
                raise ValueError(f"bad bitstring {bits!r}")
            occ[2 * k + int(b)] = 1
        out[tuple(occ)] = amp
    state, _ = fock.normalize(FockState(2 * nq, Statistics.BOSON, out))
    return state


def to_qubits(state: FockState) -> dict[str, complex]:
    """Read a dual-rail state back as bitstring amplitudes.

    Raises ValueError if a term does not hold exactly one boson per pair.
    """
    if state.modes % 2:
        raise ValueError("dual-rail states need an even number of modes")
    out = {}
    for occ, amp in state.terms.items():
        bits = []
        for k in range(state.modes // 2):
            pair = occ[2 * k], occ[2 * k + 1]
            if pair == (1, 0):
                bits.append("0")
            elif pair == (0, 1):
                bits.append("1")
            else:
                raise ValueError(f"term {list(occ)} is not a valid dual-rail encoding")
        out["".join(bits)] = amp
    return dict(sorted(out.items()))


def is_dual_rail(state: FockState) -> bool:
    try:
        to_qubits(state)
    except ValueError:
        return False
    return True


def flip_qubits(state: FockState) -> FockState:
    """Swap modes ``2k-1 <-> 2k`` for every qubit pair."""
    if state.modes % 2:
        raise ValueError("need an even number of modes")
    perm = [i + 1 if i % 2 == 0 else i - 1 for i in range(state.modes)]
    return fock.permute_modes(state, perm)


# -- targets ----------------------------------------------------------------


def target_phi(n: int) -> FockState:
    """``(1/sqrt n) sum_k (-1)^k a_{2k-1}^+ a_{2k}^+ |0>`` on 2n modes."""
    if n < 2:
        raise ValueError("target_phi needs n >= 2")
    return _product_state(2 * n, [{(2 * k - 1, 2 * k): (-1) ** k for k in range(1, n + 1)}])


def target_ghz(n: int, relative_phase: complex | None = None) -> FockState:
    """``(a_1^+ a_3^+ ... + phase * a_2^+ a_4^+ ...)|0> / sqrt 2``.

    The default phase is ``(-1)^(n+1)``. ghz_sequence produces a
    relative phase of +1 for every n; pass ``relative_phase=1`` for that state.
    """
    if n < 2:
        raise ValueError("target_ghz needs n >= 2")
    phase = (-1) ** (n + 1) if relative_phase is None else relative_phase
    return dual_rail_state({"0" * n: 1.0, "1" * n: phase})


def target_w(n: int, flipped: bool = False) -> FockState:
    """Uniform superposition of the n bitstrings with a single 1 (single 0 if flipped)."""
    if n < 2:
        raise ValueError("target_w needs n >= 2")
    base, odd = ("1", "0") if flipped else ("0", "1")
    return dual_rail_state({base * k + odd + base * (n - k - 1): 1.0 for k in range(n)})


def target_dicke(n: int, zeros: int) -> FockState:
    """Uniform superposition of all n-bit strings holding ``zeros`` zeros."""
    if not 0 <= zeros <= n:
        raise ValueError("zeros out of range")
    amps = {}
    for pos in itertools.combinations(range(n), zeros):
        bits = ["1"] * n
        for p in pos:
            bits[p] = "0"
        amps["".join(bits)] = 1.0
    return dual_rail_state(amps)


def target_stage1(n: int, pair_sign: int = 1) -> FockState:
    """``prod_i (a_{2i-1}^+ a_{2n+2i-1}^+ + s a_{2i}^+ a_{2n+2i}^+)|0>``, normalized.

    ``pair_sign=1`` is the intended stage-one state; the stage-one
    subtractions give ``pair_sign=-1``, which differs by a Z on every qubit.
    """
    if n < 1:
        raise ValueError("n must be positive")
    factors = [
        {(2 * i - 1, 2 * n + 2 * i - 1): 1.0, (2 * i, 2 * n + 2 * i): float(pair_sign)}
        for i in range(1, n + 1)
    ]
    return _product_state(4 * n, factors)


# -- sequences --------------------------------------------------------------


def bipartite_sequence(n: int) -> Protocol:
    """Pairs ``a''(j)`` then ``a'(j)`` for j = 1..n-1 on 2n modes.

    ``a'(j) = (a_{2j-1} + a_{2j} + a_{2j+1} + a_{2j+2}) / 2`` and ``a''(j)``
    flips the sign of the last two modes.
    """
    if n < 2:
        raise ValueError("bipartite_sequence needs n >= 2")
    steps = []
    for j in range(1, n):
        lo, hi = (2 * j - 1, 2 * j), (2 * j + 1, 2 * j + 2)
        steps.append(_unit({**{k: 1 for k in lo}, **{k: -1 for k in hi}}, 2 * n))
        steps.append(_unit({k: 1 for k in lo + hi}, 2 * n))
    return Protocol(2 * n, tuple(steps), "bipartite", n)


def ghz_step(n: int, k: int) -> ModeSuperposition:
    """``(sum_j a_{2j-1} + sum_j exp(2 pi i (j-k)/n) a_{2j}) / sqrt(2n)``."""
    entries = {}
    for j in range(1, n + 1):
        entries[2 * j - 1] = 1.0
        entries[2 * j] = cmath.exp(2j * math.pi * ((j - k) % n) / n)
    return _unit(entries, 2 * n)


def ghz_sequence(n: int) -> Protocol:
    """``a(1) a(2) ... a(n) |sym>``: the step with k = n acts first."""
    if n < 2:
        raise ValueError("ghz_sequence needs n >= 2")
    steps = tuple(ghz_step(n, k) for k in range(n, 0, -1))
    return Protocol(2 * n, steps, "ghz", n)


def _stage1_steps(n: int) -> list[ModeSuperposition]:
    steps = []
    for k in range(n, 0, -1):
        p, q = 2 * k - 1, 2 * k
        pc, qc = 2 * n + 2 * k - 1, 2 * n + 2 * k
        steps.append(_unit({p: 1, q: -1, pc: 1, qc: -1}, 4 * n))
        steps.append(_unit({p: 1, q: 1, pc: 1, qc: 1}, 4 * n))
    return steps


def _stage2_steps(n: int, m: int) -> list[ModeSuperposition]:
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must satisfy 1 <= m <= n-1 = {n - 1}, got {m}")
    evens = _unit({2 * i: 1 for i in range(n + 1, 2 * n + 1)}, 4 * n)
    odds = _unit({2 * i - 1: 1 for i in range(n + 1, 2 * n + 1)}, 4 * n)
    return [evens] * (n - m) + [odds] * m


def w_stage1_sequence(n: int) -> Protocol:
    """Stage one on 4n modes: ``a'(1) a''(1) ... a'(n) a''(n) |sym_4n>``."""
    if n < 2:
        raise ValueError("w_stage1_sequence needs n >= 2")
    return Protocol(4 * n, tuple(_stage1_steps(n)), "w_stage1", n)


def w_stage2_sequence(n: int, m: int = 1) -> Protocol:
    """Stage two: n-m even copy-mode subtractions, then m odd ones.

    The copy modes are empty afterwards and are dropped from the output.
    """
    if n < 2:
        raise ValueError("w_stage2_sequence needs n >= 2")
    return Protocol(4 * n, tuple(_stage2_steps(n, m)), "w_stage2", n, m, keep_modes=2 * n)


def w_sequence(n: int) -> Protocol:
    if n < 2:
        raise ValueError("w_sequence needs n >= 2")
    steps = tuple(_stage1_steps(n) + _stage2_steps(n, 1))
    return Protocol(4 * n, steps, "w", n, 1, keep_modes=2 * n)


def dicke_sequence(n: int, m: int) -> Protocol:
    """Two-stage run ending in the Dicke state with ``m`` qubits in bit 0."""
    if n < 2:
        raise ValueError("dicke_sequence needs n >= 2")
    steps = tuple(_stage1_steps(n) + _stage2_steps(n, m))
    return Protocol(4 * n, steps, "dicke", n, m, keep_modes=2 * n)


def input_state(p: Protocol) -> FockState:
    return fock.sym_state(p.n_modes)


# -- execution --------------------------------------------------------------


def run_protocol(
    state: FockState, p: Protocol, target: FockState | None = None, tol: float = 1e-10
) -> ProtocolResult:
    """Apply the steps in order, renormalizing after each one.

    Raises ProtocolFailure with the failing step index if a step leaves
    nothing behind.
    """
    if state.modes != p.n_modes:
        raise fock.ModeMismatchError(f"state has {state.modes} modes, protocol {p.n_modes}")
    if not fock.is_normalized(state, tol):
        raise ValueError("input state must be normalized")
    weights = []
    history = [state]
    for i, step in enumerate(p.steps):
        raw = fock.subtract(state, step)
        if raw.is_zero:
            raise ProtocolFailure(i)
        state, w = fock.normalize(raw)
        weights.append(w)
        history.append(state)
    if p.keep_modes is not None and p.keep_modes < state.modes:
        state = fock.drop_modes(state, range(p.keep_modes, state.modes))
    fid = fock.fidelity(target, state) if target is not None else None
    return ProtocolResult(
        final_state=state,
        success_weight=float(math.prod(weights)),
        per_step_weights=tuple(weights),
        fidelity_to_target=fid,
        history=tuple(history),
    )


def build(family: str, n: int, m: int | None = None, flipped: bool = False,
          ghz_phase: complex | None = None) -> tuple[Protocol, FockState]:
    """Protocol and its target for a built-in family.

    For ``w`` the target is the one-zero-per-term state when ``flipped``;
    otherwise the caller must relabel qubits with :func:`flip_qubits` before
    comparing to the one-one-per-term state.
    """
    if family == "bipartite":
        return bipartite_sequence(n), target_phi(n)
    if family == "ghz":
        return ghz_sequence(n), target_ghz(n, ghz_phase)
    if family == "w":
        return w_sequence(n), target_w(n, flipped)
    if family == "dicke":
        if m is None:
            raise ValueError("dicke needs m")
        return dicke_sequence(n, m), target_dicke(n, m)
    raise ValueError(f"unknown family {family!r}")


# -- JSON -------------------------------------------------------------------


def protocol_to_dict(p: Protocol) -> dict:
    return {
        "family": p.family,
        "n": p.n,
        "m": p.m,
        "keep_modes": p.keep_modes,
        "steps": [[{"re": c.real, "im": c.imag} for c in s.coeffs] for s in p.steps],
    }


def protocol_from_dict(d: Mapping) -> Protocol:
    try:
        steps = tuple(
            ModeSuperposition([complex(c["re"], c["im"]) for c in row]) for row in d["steps"]
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed protocol document: {exc}") from exc
    if not steps:
        raise ValueError("protocol has no steps")
    return Protocol(
        n_modes=steps[0].modes,
        steps=steps,
        family=d.get("family", "custom"),
        n=d.get("n"),
        m=d.get("m"),
        keep_modes=d.get("keep_modes"),
    )
