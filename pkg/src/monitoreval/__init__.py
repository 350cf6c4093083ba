"""Unified safety-monitor evaluation: Safety Gain, Residual Hazard,
Availability Cost over recorded prediction/monitor traces, plus a
deterministic braking-scenario simulator for episodic traces."""

from .core_metrics import (
    MetricsReport,
    ReturnTriple,
    aggregate_ac,
    aggregate_hazard,
    aggregate_rh,
    aggregate_sg,
    compute_report,
    decomposition_residual,
    normalize_report,
    to_null_monitor,
)
from .schemes import (
    SchemeParams,
    clf_error_returns,
    clf_threat_returns,
    detection_error_flag,
    episodic_returns,
    group_episodes,
    iou,
    landing_candidate_score,
    landing_e1_returns,
    landing_e2_returns,
    triples_for_scheme,
)
from .traces import (
    DEFAULT_ACTION,
    SCHEMES,
    VARIANTS,
    Box,
    ClassificationRecord,
    DetectionFrameRecord,
    EpisodeTrace,
    FrameState,
    LandingCandidate,
    LandingImageRecord,
    TraceError,
    TraceParseError,
    TraceSchemeError,
    TraceValidationError,
    TraceVersionError,
    load_traces,
    save_traces,
)

__version__ = "0.1.0"
