"""Finite-dimensional quantum measurement schemes and observer agreement.

Builds PVM/POVM observables on small Hilbert spaces, realizes them through
indirect measuring processes (pointer models and dilations), and analyzes
when two observers measuring the same system must agree.
"""

from .errors import (
    DimensionError,
    NonCommutingMetersError,
    NotHermitianError,
    ParameterError,
    PreconditionError,
    QmeasureError,
    ValidationError,
)
from .intersubjectivity import (
    CommutationCheck,
    JointDistribution,
    JointScenario,
    OitReport,
    SampleResult,
    agreement_probability,
    check_commutation,
    compose,
    joint_distribution,
    sample_outcomes,
    table_agreement,
    verify_oit,
)
from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    SpectralDecomposition,
    adjoint,
    apply,
    as_operator,
    as_state,
    embed_operator,
    inner,
    is_hermitian,
    is_projector,
    is_unitary,
    matmul,
    max_abs,
    psd_sqrt,
    spectral_decompose,
    tensor,
)
from .measurement import (
    EvolvedMeter,
    MeasurementProcess,
    ReproducibilityReport,
    check_reproducibility,
    dilation_model,
    evolve_meter,
    induced_povm,
    meter_distribution,
    von_neumann_model,
)
from .observables import (
    OutcomeDistribution,
    Povm,
    Pvm,
    as_povm,
    born_povm,
    born_pvm,
    expectation,
    is_projective,
    pvm_from_observable,
    unsharp_qubit_povm,
)
from .scenario import (
    ObservableSpec,
    Scenario,
    load_scenario,
    load_scenario_file,
    run_experiment,
    scenario_to_json,
    sweep_agreement,
)
from .serialize import (
    matrix_from_json,
    matrix_to_json,
    povm_from_json,
    povm_to_json,
    process_from_json,
    process_to_json,
    pvm_from_json,
    pvm_to_json,
    state_from_json,
    state_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "CommutationCheck",
    "DimensionError",
    "EvolvedMeter",
    "JointDistribution",
    "JointScenario",
    "MeasurementProcess",
    "NonCommutingMetersError",
    "NotHermitianError",
    "ObservableSpec",
    "OitReport",
    "OutcomeDistribution",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "ParameterError",
    "Povm",
    "PreconditionError",
    "Pvm",
    "QmeasureError",
    "ReproducibilityReport",
    "SampleResult",
    "Scenario",
    "SpectralDecomposition",
    "ValidationError",
    "adjoint",
    "agreement_probability",
    "apply",
    "as_operator",
    "as_povm",
    "as_state",
    "born_povm",
    "born_pvm",
    "check_commutation",
    "check_reproducibility",
    "compose",
    "dilation_model",
    "embed_operator",
    "evolve_meter",
    "expectation",
    "induced_povm",
    "inner",
    "is_hermitian",
    "is_projective",
    "is_projector",
    "is_unitary",
    "joint_distribution",
    "load_scenario",
    "load_scenario_file",
    "matmul",
    "matrix_from_json",
    "matrix_to_json",
    "max_abs",
    "meter_distribution",
    "povm_from_json",
    "povm_to_json",
    "process_from_json",
    "process_to_json",
    "psd_sqrt",
    "pvm_from_json",
    "pvm_from_observable",
    "pvm_to_json",
    "run_experiment",
    "sample_outcomes",
    "scenario_to_json",
    "spectral_decompose",
    "state_from_json",
    "state_to_json",
    "sweep_agreement",
    "table_agreement",
    "tensor",
    "unsharp_qubit_povm",
    "verify_oit",
    "von_neumann_model",
]
