"""Correlation dynamics of qubit registers under local dephasing and amplitude damping.

Submodules
----------
qmath     partial traces, partial transposes, Hermitian spectra
states    state families, Euler-angle encodings, JSON round trips
channels  Kraus channels and their Stinespring dilations
measures  entropies, total correlations, concurrence, negativity, singlet fraction
dynamics  noise sweeps, the system/environment ledger, orderings, crossings
encoder   search for the most robust local-unitary encoding
circuits  statevector circuits, shot sampling, readout mitigation, tomography
cli       the ``lucorr`` command
"""
from . import channels, circuits, dynamics, encoder, measures, qmath, states
from ._accel import get_backend, set_backend

__version__ = "0.1.0"

__all__ = [
    "channels",
    "circuits",
    "dynamics",
    "encoder",
    "measures",
    "qmath",
    "states",
    "get_backend",
    "set_backend",
    "__version__",
]
