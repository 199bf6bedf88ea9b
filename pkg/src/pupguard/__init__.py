"""Two-press fingerprint behavior pipeline for puppet-attack detection.

A press pair (two fingerprint images captured by consecutive presses with
different fingers, plus the inter-press interval) is classified as
legitimate or coerced by one-class detectors trained on normal attempts
only. Image texture features and the standardized timing scalar are fused
at the feature level or combined at the decision level.
"""

from .classify import (
    IsoForestModel,
    LofModel,
    OcSvmModel,
    Prediction,
    Verdict,
    check_kkt,
    decision_and,
    iforest_fit,
    iforest_score,
    lof_fit,
    lof_score,
    make_verdict,
    ocsvm_fit,
    ocsvm_score,
)
from .config import PipelineConfig, load_config
from .dataset import (
    CaptureInstant,
    Dataset,
    GrayImage,
    Label,
    PressPair,
    load_dataset,
    parse_timestamp,
    press_interval,
    split_dataset,
    write_dataset,
)
from .evaluate import (
    ConfusionMatrix,
    EvalReport,
    confusion,
    metrics,
    run_pipeline,
    sweep,
)
from .features import (
    EmbeddingTable,
    PcaModel,
    hog_descriptor,
    lbp_code,
    lbp_histogram,
    load_embeddings,
    pca_fit,
    pca_transform,
    pair_features,
)
from .fusion import FusedSample, fuse_concat, fuse_cross
from .pipeline import PipelineModel, fit_pipeline, load_bundle, save_bundle, score_pair
from .preprocess import (
    OtsuStats,
    Polarity,
    TimingStandardizer,
    fit_timing,
    otsu_threshold,
    prepro2,
    segment,
)
from .synthgen import AttackParams, SubjectProfile, gen_dataset, gen_press_pair

__version__ = "0.1.0"
