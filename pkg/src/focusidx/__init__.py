"""Two-phase video-stream querying: cheap approximate top-K indexing at
ingest time, ground-truth verification of cluster representatives at
query time, and a per-stream parameter tuner trading ingest cost against
query latency under precision/recall targets."""

from .classifiers import (
    GENERIC_CHEAP,
    GROUND_TRUTH,
    SPECIALIZED,
    ClassifierProfile,
    RankModel,
    classify,
    ground_truth_label,
    load_profiles,
    make_default_profiles,
    save_profiles,
    specialize_profile,
)
from .clustering import Cluster, ClusterEngine
from .core import (
    OTHER_CLASS,
    AccuracyTarget,
    Config,
    CostModel,
    DetectedObject,
    RankedClassification,
    load_config,
    save_config,
    validate_config,
)
from .errors import DataError, FocusError, NoViableConfig, UsageError
from .evaluation import StreamEvaluation, dominant_classes, evaluate_index, segment_ground_truth
from .index import IndexHeader, TopKIndex, build, lookup
from .index import load as load_index
from .index import save as save_index
from .ingest import DEFAULT_PIXEL_EPS, IngestReport, ingest_stream, pixel_diff
from .query import QueryRequest, QueryResult, QuerySession
from .simharness import (
    ExperimentReport,
    StreamSpec,
    fps_sweep,
    accuracy_sweep,
    generate_stream,
    run_baselines,
    run_experiment,
    write_report,
)
from .streamio import StreamHeader, read_stream, write_stream
from .tuner import (
    ConfigEvaluation,
    TuneGrid,
    TuneOutcome,
    TuneResult,
    evaluate_config,
    pareto_and_policies,
    tune,
    two_step_search,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
