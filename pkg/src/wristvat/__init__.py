"""wristvat: gait and sleep feature extraction from raw wrist accelerometry
with ridge-regression visceral adipose tissue (VAT) estimation."""

__version__ = "0.1.0"

from .dynamics import (
    DynamicsFeatures,
    RawIntensityFeatures,
    frame_dynamics,
    mad_3d,
    mad_axis_pair,
    path_length,
    raw_intensity,
    tde_eigenspectrum,
)
from .features import (
    COVARIATE_NAMES,
    FEATURE_CLASSES,
    GAIT_FEATURE_NAMES,
    SLEEP_FEATURE_NAMES,
    resolve_feature_config,
)
from .gait import (
    Bout,
    GaitFrame,
    detect_gait_frame,
    extract_gait_frames,
    gait_summary,
    intensity_bin,
    segment_gait_bouts,
    total_gait_hours,
    transition_matrix,
)
from .ingest import (
    CohortDataset,
    SubjectRecord,
    TriaxialRecording,
    apply_subject_filters,
    load_recording,
    load_subjects,
    save_recording,
    save_subjects,
)
from .model import (
    DesignMatrix,
    EvalReport,
    Metrics,
    RegressionModel,
    covariate_vector,
    cross_validate,
    fuse_estimates,
    metrics,
    pearson,
    ridge_fit,
    ridge_predict,
    spearman,
    stratified_eval,
)
from .sigproc import (
    AcfPeak,
    MagnitudeSeries,
    MsdSeries,
    autocorrelation,
    find_acf_peaks,
    first_principal_component,
    magnitude,
    rolling_msd,
    zscore_frame,
)
from .sleep import (
    FragmentationFeatures,
    SleepBout,
    SleepMovementFrame,
    detect_sleep_movements,
    extract_sleep_data,
    fragmentation_features,
    segment_sleep_bouts,
    sleep_movement_features,
    sleep_summary,
)
from .synth import (
    SleepSpec,
    WalkSpec,
    gen_sleep,
    gen_walk,
    oracle_mad,
    oracle_ridge,
    oracle_spearman,
)
