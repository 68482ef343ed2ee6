"""Quasiprobability metrology with incompatible qubit measurements."""

from .errors import (
    AllTrialsOmitted,
    BlochNormExceeded,
    DerivativeNotTraceless,
    DimensionMismatch,
    FlatLikelihood,
    NegativeCounts,
    NegativeOq,
    NonRealValue,
    NotHermitian,
    NotNormalized,
    NotPsd,
    OqMetroError,
    OutcomeCountMismatch,
    ParamOutOfRange,
    ZeroInformation,
    ZeroQfi,
    ZeroSlope,
)
from .estimation import (
    CountTable,
    EstimatorSummary,
    TrialConfig,
    TrialResult,
    TrialSummary,
    lep_estimate,
    log_likelihood,
    mle_estimate,
    run_trials,
    sample_counts,
)
from .fisher import FisherResult, advantage, cri_bound, fisher_discrete, oqfi, qfi_pure
from .linalg import hermitian_eigensystem, is_hermitian, is_psd, psd_sqrt
from .measurement import (
    Hovm,
    Povm,
    bloch_povm,
    build_hovm,
    busch_compatible,
    busch_equiv_hovm_check,
    hovm_is_povm,
    marginality_defect,
    mutually_unbiased_pair,
    sequential_povm,
    sharpness_threshold,
)
from .oq import OqDistribution, evaluate_oq, is_positive, oq_derivatives
from .probe import ProbeParams, ProbeState, Target, bloch_vector, make_state

__version__ = "0.1.0"
