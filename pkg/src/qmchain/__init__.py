"""Entropy bookkeeping for chains of consecutive quantum measurements.

``chain`` simulates the global pure state of a system measured by a
sequence of ancillae (optionally amplified by detectors), ``entropy``
computes von Neumann entropies and theorem checks on it, ``oracle`` gives
closed-form outcome statistics for cross-checking, and ``apps`` runs the
Zeno, eraser and state-preparation experiments.
"""
__version__ = "0.1.0"

from .chain import (  # noqa: E402
    ChainSpec,
    DensityMatrix,
    PreparationSpec,
    PureState,
    SpecError,
    StepSpec,
    SubsystemLabel,
    amplify_step,
    apply_measurement,
    condition_on_outcome,
    dephase,
    prepare,
    qubit_chain,
    random_chain,
    reduced_density,
    rotation_qubit,
    run_chain,
    trace_pointer_components,
)
from .entropy import (  # noqa: E402
    TheoremReport,
    coherence_rel_ent,
    conditional_entropy,
    conditional_mutual,
    joint_entropy,
    mutual_entropy,
    sigma_n,
    ternary_mutual,
    venn3,
    verify_theorem,
)
from .linalg import DimensionError, NumericError, hermitian_eig, random_unitary  # noqa: E402
