"""Content-blind delivery features of a meme and z-score scaling.

Text only enters through ``dup_text_frac``, which depends on token equality
alone, so any consistent renaming of words leaves every feature unchanged.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .diffusion import DiffusionNetwork, weak_components
from .errors import EmptyInput, InsufficientData, InvariantViolation
from .records import TweetRecord

FEATURE_NAMES: tuple[str, ...] = (
    "log_n_tweets",
    "log_n_users",
    "rt_fraction",
    "roots_frac",
    "max_outdeg_frac",
    "gini_outdeg",
    "lcc_frac",
    "log_peak_rate",
    "burstiness",
    "dup_text_frac",
    "log_mean_account_age_days",
    "new_account_frac",
    "mention_target_frac",
)
N_FEATURES = len(FEATURE_NAMES)

DAY_S = 86400
NEW_ACCOUNT_DAYS = 30
PEAK_BIN_S = 60
JACCARD_LINK = 0.5
SHINGLE_WORDS = 3
MAX_DUP_TEXTS = 2000

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\S+")
_SPACE_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class MemeFeatureVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise InvariantViolation(f"feature vector needs {N_FEATURES} values, got {len(self.values)}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __getattr__(self, name: str) -> float:
        try:
            return self.values[FEATURE_NAMES.index(name)]
        except ValueError:
            raise AttributeError(name) from None

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return N_FEATURES

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))


@dataclass(frozen=True)
class FeatureStats:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.mean) != N_FEATURES or len(self.std) != N_FEATURES:
            raise InvariantViolation("FeatureStats needs 13 means and 13 stds")
        if any(s <= 0 or not math.isfinite(s) for s in self.std):
            raise InvariantViolation("FeatureStats stds must be positive and finite")


# ----------------------------------------------------------------- primitives


def gini(values: Iterable[float]) -> float:
    """Gini coefficient, mean absolute pairwise difference over twice the mean."""
    x = np.sort(np.asarray(list(values), dtype=np.float64))
    if x.size == 0:
        raise EmptyInput("gini of an empty list")
    if np.any(x < 0):
        raise ValueError("gini expects non-negative values")
    # the rank form can round to a hair below zero for equal values
    return max(0.0, kernels.gini_sorted(x))


def burstiness(timestamps: Sequence[int]) -> float:
    """(sigma - mu) / (sigma + mu) of inter-event gaps, population sigma.

    Fewer than 3 timestamps give 0; all-zero gaps give 1.
    """
    if len(timestamps) < 3:
        return 0.0
    gaps = np.diff(np.asarray(timestamps, dtype=np.float64))
    mu = gaps.mean()
    sigma = gaps.std()
    if mu + sigma == 0.0:
        return 1.0
    return float((sigma - mu) / (sigma + mu))


def peak_rate(timestamps: Sequence[int], bin_s: int = PEAK_BIN_S) -> int:
    """Largest count in fixed bins ``[t0 + k*bin_s, t0 + (k+1)*bin_s)``."""
    if bin_s <= 0:
        raise ValueError("bin_s must be positive")
    if len(timestamps) == 0:
        return 0
    t = np.asarray(timestamps, dtype=np.int64)
    bins = (t - t[0]) // bin_s
    return int(np.bincount(bins).max())


def normalize_text(text: str) -> list[str]:
    text = _URL_RE.sub(" ", text.lower())
    text = _MENTION_RE.sub(" ", text).replace("#", "")
    return _SPACE_RE.sub(" ", text).strip().split()


def shingles(tokens: Sequence[str], width: int = SHINGLE_WORDS) -> set[tuple[str, ...]]:
    if len(tokens) < width:
        return {(t,) for t in tokens}
    return {tuple(tokens[i : i + width]) for i in range(len(tokens) - width + 1)}


def near_duplicate_fraction(
    texts: Sequence[str],
    threshold: float = JACCARD_LINK,
    max_texts: int = MAX_DUP_TEXTS,
) -> float:
    """``1 - clusters / texts`` after linking pairs with shingle Jaccard >= threshold.

    Only the first ``max_texts`` texts are compared; the rest count as singletons.
    """
    n = len(texts)
    if n == 0:
        raise EmptyInput("near_duplicate_fraction of no texts")
    compared = texts[:max_texts]
    vocab: dict[tuple[str, ...], int] = {}
    indptr = [0]
    indices: list[int] = []
    for text in compared:
        ids = sorted({vocab.setdefault(s, len(vocab)) for s in shingles(normalize_text(text))})
        indices.extend(ids)
        indptr.append(len(indices))
    clusters = kernels.jaccard_cluster_count(np.asarray(indptr), np.asarray(indices, dtype=np.int64), threshold)
    clusters += n - len(compared)
    return 1.0 - clusters / n


# --------------------------------------------------------------- the vector


def compute_features(
    net: DiffusionNetwork,
    posts: Sequence[TweetRecord],
    *,
    new_account_days: float = NEW_ACCOUNT_DAYS,
    max_dup_texts: int = MAX_DUP_TEXTS,
) -> MemeFeatureVector:
    """The 13-feature delivery signature of one meme."""
    if len(posts) < 2:
        raise InsufficientData(f"{net.meme.label}: need at least 2 posts, got {len(posts)}")
    posts = sorted(posts, key=lambda r: r.sort_key)
    n_posts = len(posts)
    times = [p.created_at for p in posts]
    first_ts = times[0]

    users = net.users
    n_users = len(users)
    n_edges = len(net.edges)
    out_deg = net.out_degrees()
    degrees = list(out_deg.values())

    n_rt = sum(1 for p in posts if p.is_retweet)
    max_out = max(degrees) if degrees else 0
    comps = weak_components(net)
    lcc = len(comps[0]) / len(net.nodes) if comps else 0.0

    account_created: dict[int, int] = {}
    for p in posts:
        account_created.setdefault(p.author_id, p.author_created_at)
    ages = [max(0.0, (first_ts - c) / DAY_S) for c in account_created.values()]
    mean_age = sum(ages) / len(ages)
    new_frac = sum(1 for a in ages if a < new_account_days) / len(ages)

    active: set[int] = set()
    n_targeting = 0
    for p in posts:
        # posts are visited in (created_at, tweet_id) order, so `active`
        # holds exactly the authors strictly earlier than p
        if any(m != p.author_id and m not in active for m in p.mentions):
            n_targeting += 1
        active.add(p.author_id)

    values = (
        math.log10(1 + n_posts),
        math.log10(1 + n_users),
        n_rt / n_posts,
        len(net.roots) / max(1, n_users),
        max_out / max(1, n_edges),
        gini(degrees) if degrees else 0.0,
        lcc,
        math.log10(1 + peak_rate(times)),
        burstiness(times),
        near_duplicate_fraction([p.text for p in posts], max_texts=max_dup_texts),
        math.log10(1 + mean_age),
        new_frac,
        n_targeting / n_posts,
    )
    return MemeFeatureVector(values)


# ---------------------------------------------------------------- scaling


def _as_matrix(vectors: Sequence[MemeFeatureVector | Sequence[float]]) -> np.ndarray:
    return np.asarray([tuple(v) for v in vectors], dtype=np.float64).reshape(len(vectors), N_FEATURES)


def zscore_fit(vectors: Sequence[MemeFeatureVector | Sequence[float]]) -> FeatureStats:
    if len(vectors) < 2:
        raise InsufficientData("zscore_fit needs at least 2 vectors")
    x = _as_matrix(vectors)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    # a constant column can leave rounding residue instead of an exact zero
    degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    std = np.where(degenerate, 1.0, std)
    return FeatureStats(tuple(mean.tolist()), tuple(std.tolist()))


def zscore_apply(v: MemeFeatureVector | Sequence[float], stats: FeatureStats) -> np.ndarray:
    return (np.asarray(tuple(v), dtype=np.float64) - np.asarray(stats.mean)) / np.asarray(stats.std)
