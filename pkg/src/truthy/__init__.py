"""Meme diffusion analysis and astroturf ("truthy") detection for microblog streams."""

from ._accel import get_backend, set_backend, use_backend
from .classify import (
    ClassifierModel,
    Label,
    TrainConfig,
    Verdict,
    loss_and_grad,
    make_verdict,
    predict,
    rule_score,
    sigmoid,
    train,
)
from .diffusion import DiffusionEdge, DiffusionNetwork, EdgeKind, build_network, to_dot, weak_components
from .features import (
    FEATURE_NAMES,
    FeatureStats,
    MemeFeatureVector,
    burstiness,
    compute_features,
    gini,
    near_duplicate_fraction,
    peak_rate,
    zscore_apply,
    zscore_fit,
)
from .memes import MemeId, MemeIndex, MemeKind, build_index, extract_memes, normalize_url
from .records import StreamReport, TweetRecord, load_stream, parse_record, serialize_record
from .simulate import (
    CampaignSpec,
    GroundTruth,
    OrganicSpec,
    SocialGraph,
    gen_campaign,
    gen_dataset,
    gen_graph_ba,
    gen_organic,
    run_ic,
    run_threshold,
)

__version__ = "0.1.0"
