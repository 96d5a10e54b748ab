"""Large Fourier coefficients under zero-padding and truncation between cyclic groups."""

from .core_dft import (
    FunctionTable,
    IndexSet,
    Spectrum,
    circ_dist,
    dft,
    idft,
    norm2_sq,
    project,
    tail_energy,
)
from .domain_shift import tilde, transport_spectrum, weight
from .recovery import RecoveryConfig, derive_params, recover_heavy

__all__ = [
    "FunctionTable",
    "IndexSet",
    "RecoveryConfig",
    "Spectrum",
    "circ_dist",
    "derive_params",
    "dft",
    "idft",
    "norm2_sq",
    "project",
    "recover_heavy",
    "tail_energy",
    "tilde",
    "transport_spectrum",
    "weight",
]
