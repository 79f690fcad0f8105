"""Brute-force exact reference for subtraction on singly occupied bosonic states.

States are maps from frozensets of occupied modes to exact cyclotomic
scalars. Subtracting ``sum_i c_i a_i`` removes mode ``i`` from every subset
that contains it with weight ``c_i``; with at most one boson per mode there
are no square-root factors, so everything stays exact.

This module does not import the Fock-state machinery except to read a
``FockState`` in :func:`oracle_mismatch`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .cyclotomic import ONE, ZERO, Cyclotomic

Subset = frozenset


@dataclass(frozen=True)
class SubsetState:
    modes: int
    terms: Mapping[Subset, Cyclotomic] = field(default_factory=dict)

    def __post_init__(self):
        sizes = {len(s) for s in self.terms}
        if len(sizes) > 1:
            raise ValueError("subsets of different sizes in one state")
        for s in self.terms:
            if any(not 0 <= i < self.modes for i in s):
                raise ValueError(f"subset {sorted(s)} outside {self.modes} modes")

    def nonzero(self) -> dict[Subset, Cyclotomic]:
        return {s: c for s, c in self.terms.items() if not c.is_zero()}

    def coefficient(self, modes: Iterable[int]) -> Cyclotomic:
        return self.terms.get(frozenset(modes), ZERO)


def full_subset_state(n_modes: int) -> SubsetState:
    return SubsetState(n_modes, {frozenset(range(n_modes)): ONE})


def oracle_subtract(
    state: SubsetState, coeffs: Sequence, keep_zeros: bool = False
) -> SubsetState:
    """Exact expansion of ``sum_i coeffs[i] a_i`` on a subset state.

    With ``keep_zeros`` every reachable subset is kept even if its total
    coefficient cancels, so cancellations can be inspected.
    """
    if len(coeffs) != state.modes:
        raise ValueError(f"{len(coeffs)} coefficients for {state.modes} modes")
    exact = [c if isinstance(c, Cyclotomic) else Cyclotomic.rational(c) for c in coeffs]
    out: dict[Subset, Cyclotomic] = {}
    for subset, amp in state.terms.items():
        if amp.is_zero() and not keep_zeros:
            continue
        for i in sorted(subset):
            if exact[i].is_zero():
                continue
            smaller = subset - {i}
            out[smaller] = out.get(smaller, ZERO) + amp * exact[i]
    if not keep_zeros:
        out = {s: c for s, c in out.items() if not c.is_zero()}
    return SubsetState(state.modes, out)


def oracle_run(
    n_modes: int, steps: Sequence[Sequence], keep_zeros: bool = False
) -> SubsetState:
    """Apply the operator product ``steps[0] steps[1] ... steps[-1]`` to the full state.

    The product is expanded from the left; bosonic subtractions commute, so
    this matches applying the rightmost factor first.
    """
    state = full_subset_state(n_modes)
    for c in steps:
        state = oracle_subtract(state, c, keep_zeros=keep_zeros)
    return state


# -- exact step families (unnormalized, as written in the derivations) ------


def _vec(n_modes: int, entries: Mapping[int, object]) -> list:
    v: list = [ZERO] * n_modes
    for i, c in entries.items():
        v[i] = c if isinstance(c, Cyclotomic) else Cyclotomic.rational(c)
    return v


def exact_bipartite_steps(n: int) -> list[list]:
    """Factors ``(a_{2j-1}+a_{2j}+a_{2j+1}+a_{2j+2})(a_{2j-1}+a_{2j}-a_{2j+1}-a_{2j+2})``, j=1..n-1."""
    steps = []
    for j in range(1, n):
        lo = (2 * j - 2, 2 * j - 1)
        hi = (2 * j, 2 * j + 1)
        steps.append(_vec(2 * n, {**{i: 1 for i in lo}, **{i: 1 for i in hi}}))
        steps.append(_vec(2 * n, {**{i: 1 for i in lo}, **{i: -1 for i in hi}}))
    return steps


def exact_ghz_steps(n: int) -> list[list]:
    """Factors ``sum_j a_{2j-1} + sum_j zeta_n^(j-k) a_{2j}`` for k = 1..n."""
    steps = []
    for k in range(1, n + 1):
        entries: dict[int, object] = {}
        for j in range(1, n + 1):
            entries[2 * j - 2] = 1
            entries[2 * j - 1] = Cyclotomic.root(j - k, n)
        steps.append(_vec(2 * n, entries))
    return steps


def exact_w_stage1_steps(n: int) -> list[list]:
    steps = []
    for k in range(1, n + 1):
        p, q = 2 * k - 2, 2 * k - 1
        pc, qc = 2 * n + 2 * k - 2, 2 * n + 2 * k - 1
        steps.append(_vec(4 * n, {p: 1, q: 1, pc: 1, qc: 1}))
        steps.append(_vec(4 * n, {p: 1, q: -1, pc: 1, qc: -1}))
    return steps


def exact_w_stage2_steps(n: int, m: int = 1) -> list[list]:
    """``(sum of even copy modes)^(n-m) (sum of odd copy modes)^m``."""
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must be in [1, {n - 1}], got {m}")
    evens = _vec(4 * n, {2 * i - 1: 1 for i in range(n + 1, 2 * n + 1)})
    odds = _vec(4 * n, {2 * i - 2: 1 for i in range(n + 1, 2 * n + 1)})
    return [evens] * (n - m) + [odds] * m


def exact_steps(family: str, n: int, m: int | None = None) -> tuple[int, list[list]]:
    """Return ``(n_modes, steps)`` for a built-in family."""
    if family == "bipartite":
        return 2 * n, exact_bipartite_steps(n)
    if family == "ghz":
        return 2 * n, exact_ghz_steps(n)
    if family == "w_stage1":
        return 4 * n, exact_w_stage1_steps(n)
    if family in ("w", "dicke"):
        m = 1 if m is None else m
        return 4 * n, exact_w_stage1_steps(n) + exact_w_stage2_steps(n, m)
    raise ValueError(f"unknown family {family!r}")


def ghz_mixed_coefficients(n: int) -> dict[Subset, Cyclotomic]:
    """Total coefficient of every removed-mode set with 0 < k < n even modes.

    Keyed by the set of removed modes (complement of the surviving subset).
    """
    state = oracle_run(2 * n, exact_ghz_steps(n), keep_zeros=True)
    everything = frozenset(range(2 * n))
    out = {}
    for subset, c in state.terms.items():
        removed = everything - subset
        k = sum(1 for i in removed if i % 2 == 1)
        if 0 < k < n:
            out[removed] = c
    return out


# -- comparison with floating-point states ---------------------------------


def _fock_as_subsets(f) -> dict[Subset, complex]:
    out = {}
    for occ, amp in f.terms.items():
        if any(x > 1 for x in occ):
            raise ValueError(f"occupation {list(occ)} is not comparable: a mode holds >1 boson")
        out[frozenset(i for i, x in enumerate(occ) if x)] = complex(amp)
    return out


def oracle_mismatch(
    state: SubsetState, f, tol: float = 1e-10, normalize: bool = True
) -> str | None:
    """Describe the first disagreement between an oracle state and a FockState.

    Amplitudes are compared up to one global phase; with ``normalize`` both
    sides are scaled to unit norm first. Returns None when they agree.
    """
    if f.modes != state.modes:
        return f"mode counts differ: oracle {state.modes}, fock {f.modes}"
    if f.statistics.value != "boson":
        return "oracle only covers bosonic states"
    exact = {s: complex(c) for s, c in state.nonzero().items()}
    approx = _fock_as_subsets(f)
    if normalize:
        for d in (exact, approx):
            norm = math.sqrt(sum(abs(v) ** 2 for v in d.values()))
            if norm == 0.0:
                return "zero state cannot be normalized"
            for k in d:
                d[k] /= norm
    if exact:
        ref = max(exact, key=lambda s: abs(exact[s]))
        if ref not in approx or abs(approx[ref]) == 0.0:
            return f"subset {sorted(i + 1 for i in ref)} missing from fock state"
        phase = cmath.phase(approx[ref]) - cmath.phase(exact[ref])
        rot = cmath.exp(-1j * phase)
    else:
        rot = 1.0
    for s in sorted(set(exact) | set(approx), key=lambda s: sorted(s)):
        a = exact.get(s, 0j)
        b = approx.get(s, 0j) * rot
        if abs(a - b) > tol:
            return (
                f"subset {sorted(i + 1 for i in s)}: oracle {a:.12g}, fock {b:.12g} "
                f"(|diff| = {abs(a - b):.3g} > {tol:g})"
            )
    return None


def oracle_compare(state: SubsetState, f, tol: float = 1e-10, normalize: bool = True) -> bool:
    return oracle_mismatch(state, f, tol, normalize) is None
