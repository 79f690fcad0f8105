"""Sculpting correlated states out of maximally symmetric bosonic states."""

from .fock import (
    FockState,
    ModeSuperposition,
    Statistics,
    add,
    asym_state,
    fidelity,
    inner_product,
    normalize,
    single_particle_rdm,
    subtract,
    sym_state,
    vacuum,
)
from .protocols import Protocol, ProtocolFailure, ProtocolResult, run_protocol
from .slater import SlaterSpectrum, extract_beta, purity, slater_rank, takagi

__version__ = "0.1.0"
