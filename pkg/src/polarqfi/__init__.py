"""Quantum Fisher information of polarization channels for quantum light.

Two-mode Fock-space states are propagated through retarders, diattenuators
and depolarizers, and the QFI of the retarder angle is computed for NOON,
coherent and King-of-quantumness probes.
"""

from polarqfi.channels import (
    AnisotropicLindblad,
    ChannelPipeline,
    ConvexRotations,
    DiattenuatorSpec,
    IsotropicLindblad,
    RetarderSpec,
    apply_pipeline,
    extract_mueller_matrix,
)
from polarqfi.estimation import (
    QFIResult,
    StateWithDerivative,
    cfi_povm,
    derivative_through_pipeline,
    pauli_povms,
    qcrb,
    qfi_mixed,
    qfi_pure,
    sld,
)
from polarqfi.hilbert import (
    FockBasis,
    RotationAxis,
    TwoModeOperator,
    TwoModeState,
    build_stokes_operators,
    make_coherent,
    make_fock,
    make_king,
    make_noon,
)

__version__ = "0.1.0"
