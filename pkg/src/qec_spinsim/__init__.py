"""Stabilizer simulations of distance-3 QEC codes on spin-qubit encodings."""

__version__ = "0.1.0"

from .codes import Syndrome, bs17_spec, decode, surface17_spec
from .noise import NoiseParams, QubitParams, p_idle, physical_baseline, table1_defaults
from .sampler import BoundPair, estimate_logical_error
from .tableau import PauliString, StabilizerTableau, new_tableau

__all__ = [
    "BoundPair",
    "NoiseParams",
    "PauliString",
    "QubitParams",
    "StabilizerTableau",
    "Syndrome",
    "bs17_spec",
    "decode",
    "estimate_logical_error",
    "new_tableau",
    "p_idle",
    "physical_baseline",
    "surface17_spec",
    "table1_defaults",
]
