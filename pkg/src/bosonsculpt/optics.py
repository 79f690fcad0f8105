"""Fock-basis simulation of beamsplitters and heralded photon subtraction.

A beamsplitter ``B(theta, phi) = exp[theta/2 (a^+ b e^{i phi} - a b^+ e^{-i phi})]``
with ``t = cos(theta/2)`` and ``r = sin(theta/2) e^{i phi}`` maps creation
operators as::

    a^+ -> t a^+ - conj(r) b^+
    b^+ -> r a^+ + t b^+

Photon number is conserved, so expansions are exact with no cutoff.
Detectors resolve photon number unless stated otherwise.
"""

from __future__ import annotations

import math
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import fock
from .fock import FockState, Statistics


@dataclass(frozen=True)
class Beamsplitter:
    mode_a: int
    mode_b: int
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if self.mode_a == self.mode_b:
            raise ValueError("beamsplitter needs two distinct modes")
        if self.mode_a < 0 or self.mode_b < 0:
            raise ValueError("mode indices must be non-negative")

    @classmethod
    def from_transmittivity(cls, mode_a: int, mode_b: int, t: float, phi: float = 0.0):
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"transmittivity must lie in [0, 1], got {t}")
        return cls(mode_a, mode_b, 2 * math.acos(t), phi)

    @classmethod
    def fifty_fifty(cls, minus_mode: int, plus_mode: int):
        """``minus^+ -> (minus^+ - plus^+)/sqrt2``, ``plus^+ -> (plus^+ + minus^+)/sqrt2``."""
        return cls(minus_mode, plus_mode, math.pi / 2, 0.0)

    @property
    def t(self) -> float:
        return math.cos(self.theta / 2)

    @property
    def r(self) -> complex:
        return math.sin(self.theta / 2) * complex(math.cos(self.phi), math.sin(self.phi))

    def creation_map(self) -> np.ndarray:
        """2x2 matrix ``m`` with ``(a^+, b^+)_i -> sum_j m[j, i] (a^+, b^+)_j``."""
        t, r = self.t, self.r
        return np.array([[t, r], [-r.conjugate(), t]], dtype=complex)

    def mode_unitary(self, n_modes: int) -> np.ndarray:
        u = np.eye(n_modes, dtype=complex)
        idx = [self.mode_a, self.mode_b]
        u[np.ix_(idx, idx)] = self.creation_map()
        return u

    def to_dict(self) -> dict:
        return {"modes": [self.mode_a, self.mode_b], "theta": self.theta, "phi": self.phi}

    @classmethod
    def from_dict(cls, d: Mapping) -> Beamsplitter:
        a, b = d["modes"]
        return cls(int(a), int(b), float(d["theta"]), float(d.get("phi", 0.0)))


def apply_beamsplitter(state: FockState, bs: Beamsplitter) -> FockState:
    """Exact action on a bosonic state by binomial expansion of each term."""
    if state.is_fermionic:
        raise ValueError("beamsplitters act on bosonic states only")
    if max(bs.mode_a, bs.mode_b) >= state.modes:
        raise fock.ModeMismatchError(f"{bs} references a mode outside {state.modes}")
    t, r = bs.t, bs.r
    ma, mb = bs.mode_a, bs.mode_b
    out: dict = defaultdict(complex)
    for occ, amp in state.terms.items():
        n1, n2 = occ[ma], occ[mb]
        total = n1 + n2
        # (t x - conj(r) y)^n1 (r x + t y)^n2, indexed by the power of y
        p1 = [math.comb(n1, q) * t ** (n1 - q) * (-r.conjugate()) ** q for q in range(n1 + 1)]
        p2 = [math.comb(n2, q) * r ** (n2 - q) * t**q for q in range(n2 + 1)]
        poly = np.convolve(np.asarray(p1, dtype=complex), np.asarray(p2, dtype=complex))
        base = math.factorial(n1) * math.factorial(n2)
        for q, c in enumerate(poly):
            if c == 0:
                continue
            new = list(occ)
            new[ma], new[mb] = total - q, q
            scale = math.sqrt(math.factorial(total - q) * math.factorial(q) / base)
            out[tuple(new)] += amp * c * scale
    return FockState(state.modes, Statistics.BOSON, out)


@dataclass(frozen=True)
class HeraldOutcome:
    pattern: Mapping[int, int]
    probability: float
    conditional_state: FockState

    def clicks(self) -> int:
        return sum(self.pattern.values())


def measure_modes(state: FockState, modes: Sequence[int]) -> list[HeraldOutcome]:
    """Photon-number measurement of ``modes``; every outcome with nonzero probability.

    Conditional states are normalized and no longer contain the measured modes.
    """
    total = state.norm_squared()
    if total == 0.0:
        raise fock.ZeroStateError("cannot measure the zero state")
    modes = list(modes)
    keep = [i for i in range(state.modes) if i not in set(modes)]
    branches: dict = defaultdict(dict)
    for occ, amp in state.terms.items():
        key = tuple(occ[i] for i in modes)
        branches[key][tuple(occ[i] for i in keep)] = amp
    outcomes = []
    for key in sorted(branches):
        branch = FockState(len(keep), state.statistics, branches[key])
        if branch.is_zero:
            continue
        cond, w = fock.normalize(branch)
        outcomes.append(HeraldOutcome(dict(zip(modes, key)), w / total, cond))
    return outcomes


@dataclass(frozen=True)
class BSNetwork:
    """Beamsplitters acting on signal modes plus ancillas that start in vacuum.

    Ancillas must be the trailing modes ``signal_modes .. signal_modes+k-1``.
    """

    signal_modes: int
    ancilla_modes: tuple[int, ...]
    elements: tuple[Beamsplitter, ...]

    def __post_init__(self):
        anc = tuple(self.ancilla_modes)
        object.__setattr__(self, "ancilla_modes", anc)
        object.__setattr__(self, "elements", tuple(self.elements))
        if anc != tuple(range(self.signal_modes, self.signal_modes + len(anc))):
            raise ValueError("ancilla modes must directly follow the signal modes")
        top = self.signal_modes + len(anc)
        for bs in self.elements:
            if max(bs.mode_a, bs.mode_b) >= top:
                raise ValueError(f"{bs} references a mode outside the network")

    @property
    def total_modes(self) -> int:
        return self.signal_modes + len(self.ancilla_modes)

    def evolve(self, state: FockState) -> FockState:
        if state.modes != self.signal_modes:
            raise fock.ModeMismatchError(
                f"network expects {self.signal_modes} signal modes, got {state.modes}"
            )
        joint = fock.pad_modes(state, len(self.ancilla_modes))
        for bs in self.elements:
            joint = apply_beamsplitter(joint, bs)
        return joint

    def run(self, state: FockState) -> list[HeraldOutcome]:
        return measure_modes(self.evolve(state), self.ancilla_modes)

    def to_dict(self) -> dict:
        return {
            "signal_modes": self.signal_modes,
            "ancilla_modes": list(self.ancilla_modes),
            "elements": [bs.to_dict() for bs in self.elements],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> BSNetwork:
        return cls(
            int(d["signal_modes"]),
            tuple(int(i) for i in d["ancilla_modes"]),
            tuple(Beamsplitter.from_dict(e) for e in d["elements"]),
        )


def _check_t(t: float):
    if not 0.0 < t < 1.0:
        raise ValueError(f"transmittivity must lie strictly between 0 and 1, got {t}")


def herald_outcomes(state: FockState, mode: int, t: float) -> list[HeraldOutcome]:
    """All ancilla readouts after tapping ``mode`` with a beamsplitter of transmittivity t."""
    _check_t(t)
    tap = Beamsplitter.from_transmittivity(mode, state.modes, t)
    net = BSNetwork(state.modes, (state.modes,), (tap,))
    return net.run(state)


def heralded_subtract(state: FockState, mode: int, t: float) -> HeraldOutcome:
    """Tap ``mode`` and keep the branch where exactly one photon reaches the ancilla."""
    for o in herald_outcomes(state, mode, t):
        if o.pattern[state.modes] == 1:
            return o
    raise ValueError(f"herald probability is zero: mode {mode} cannot emit a photon")


# -- four-detector superposition-subtraction module --------------------------

DETECTORS = ("a", "b", "c", "d")


def module_network(t: float) -> BSNetwork:
    """Taps on signal modes 0-3 into ancillas a-d (modes 4-7), then BS1, BS4, BS2, BS3.

    The 50/50 elements follow::

        BS1: a -> (a + b)/sqrt2,  b -> (b - a)/sqrt2
        BS2: a -> (a - c)/sqrt2,  c -> (c + a)/sqrt2
        BS3: b -> (b + d)/sqrt2,  d -> (d - b)/sqrt2
        BS4: c -> (c + d)/sqrt2,  d -> (d - c)/sqrt2
    """
    _check_t(t)
    a, b, c, d = 4, 5, 6, 7
    taps = tuple(Beamsplitter.from_transmittivity(j, 4 + j, t) for j in range(4))
    mixing = (
        Beamsplitter.fifty_fifty(b, a),  # BS1
        Beamsplitter.fifty_fifty(d, c),  # BS4
        Beamsplitter.fifty_fifty(a, c),  # BS2
        Beamsplitter.fifty_fifty(d, b),  # BS3
    )
    return BSNetwork(4, (a, b, c, d), taps + mixing)


def module_mixing_matrix() -> np.ndarray:
    """4x4 creation-operator map of the 50/50 stage on ancillas (a, b, c, d)."""
    u = np.eye(8, dtype=complex)
    for bs in module_network(0.5).elements[4:]:
        u = bs.mode_unitary(8) @ u
    return u[4:, 4:]


def module_superposition(detector: str) -> np.ndarray:
    """Signal-mode coefficients subtracted when only ``detector`` sees one photon."""
    return module_mixing_matrix()[DETECTORS.index(detector), :]


def superposition_subtraction_module(state: FockState, t: float) -> list[HeraldOutcome]:
    """Every detector readout of one pass through the module, keyed by ancilla mode."""
    if state.modes != 4:
        raise fock.ModeMismatchError(f"module needs 4 signal modes, got {state.modes}")
    return module_network(t).run(state)


def detector_pattern(outcome: HeraldOutcome) -> dict[str, int]:
    return {DETECTORS[m - 4]: n for m, n in outcome.pattern.items()}


def matches_click(outcome: HeraldOutcome, detector: str, model: str = "pnr") -> bool:
    """Whether an outcome counts as a lone click on ``detector``.

    ``pnr``: exactly one photon there and none elsewhere. ``threshold``: at
    least one photon there and none elsewhere.
    """
    pat = detector_pattern(outcome)
    if any(n for k, n in pat.items() if k != detector):
        return False
    if model == "pnr":
        return pat[detector] == 1
    if model == "threshold":
        return pat[detector] >= 1
    raise ValueError(f"unknown detector model {model!r}")


def single_click(outcomes: Iterable[HeraldOutcome], detector: str) -> HeraldOutcome:
    for o in outcomes:
        if matches_click(o, detector, "pnr"):
            return o
    raise ValueError(f"no single-click outcome on detector {detector!r}")


def click_sequence(
    state: FockState, clicks: Sequence[str], t: float, model: str = "pnr"
) -> list[tuple[float, FockState]]:
    """Feed the state through the module once per click, keeping matching branches.

    Returns ``(probability, conditional_state)`` for every branch consistent
    with the click record. With photon-number resolution there is one branch.
    """
    branches = [(1.0, state)]
    for det in clicks:
        new = []
        for p, s in branches:
            for o in superposition_subtraction_module(s, t):
                if matches_click(o, det, model):
                    new.append((p * o.probability, o.conditional_state))
        branches = new
    return branches


def ideal_click_state(state: FockState, clicks: Sequence[str]) -> FockState:
    """Normalized ideal-subtraction result for a click record."""
    for det in clicks:
        state = fock.subtract(state, module_superposition(det))
    return fock.normalize(state)[0]


@dataclass(frozen=True)
class SweepRow:
    t: float
    pattern: str
    probability: float
    fidelity: float


def _sweep_point(state, clicks, t, target, model) -> SweepRow:
    branches = click_sequence(state, clicks, t, model)
    prob = sum(p for p, _ in branches)
    if prob > 0:
        fid = sum(p * _fidelity_or_zero(target, s) for p, s in branches) / prob
    else:
        fid = float("nan")
    return SweepRow(t, ",".join(clicks), prob, fid)


def _fidelity_or_zero(a: FockState, b: FockState) -> float:
    if a.modes != b.modes or a.n_particles != b.n_particles:
        return 0.0
    return fock.fidelity(a, b)


def efficiency_sweep(
    state: FockState,
    clicks: Sequence[str],
    t_values: Sequence[float],
    target: FockState | None = None,
    model: str = "pnr",
    workers: int = 1,
) -> list[SweepRow]:
    """Herald probability and conditional fidelity of a click record versus t.

    For threshold detectors the fidelity is the probability-weighted average
    over all photon-number branches compatible with the clicks.
    """
    for t in t_values:
        _check_t(t)
    if target is None:
        target = ideal_click_state(state, clicks)
    args = [(state, tuple(clicks), float(t), target, model) for t in t_values]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda a: _sweep_point(*a), args))
    return [_sweep_point(*a) for a in args]


def loglog_slope(t_values: Sequence[float], probabilities: Sequence[float]) -> float:
    """Least-squares slope of log(probability) against log(1/t^2 - 1)."""
    t = np.asarray(t_values, dtype=float)
    x = np.log(1.0 / t**2 - 1.0)
    y = np.log(np.asarray(probabilities, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def parse_t_range(spec: str) -> list[float]:
    """``start:end:count`` to an evenly spaced list; a bare number gives one value."""
    parts = spec.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ValueError(f"t range must be start:end:count, got {spec!r}")
    start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("count must be positive")
    return [float(x) for x in np.linspace(start, end, count)]
