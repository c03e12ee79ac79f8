"""Meme scoring: a fixed-weight rule detector and a trainable logistic regression."""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateLabels, EmptyDataset, InsufficientData, InvalidParams, ModelFormatError
from .features import FEATURE_NAMES, N_FEATURES, FeatureStats, MemeFeatureVector, zscore_apply, zscore_fit
from .memes import MemeId

PROB_CLAMP = 1e-12

RULE_WEIGHTS: dict[str, float] = {
    "dup_text_frac": 2.0,
    "new_account_frac": 2.0,
    "mention_target_frac": 1.5,
    "burstiness": 1.0,
    "max_outdeg_frac": 1.0,
    "log_peak_rate": 1.0,
    "gini_outdeg": 0.5,
    "roots_frac": -0.5,
}
RULE_BIAS = -1.0


class Label(str, enum.Enum):
    TRUTHY = "truthy"
    ORGANIC = "organic"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    l2_lambda: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise InvalidParams("learning_rate must be positive")
        if self.epochs < 1:
            raise InvalidParams("epochs must be a positive integer")
        if self.l2_lambda < 0:
            raise InvalidParams("l2_lambda must be non-negative")


@dataclass(frozen=True)
class ClassifierModel:
    weights: tuple[float, ...]
    bias: float
    stats: FeatureStats
    threshold: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) != N_FEATURES:
            raise InvalidParams(f"model needs {N_FEATURES} weights")
        if not 0.0 < self.threshold < 1.0:
            raise InvalidParams("threshold must lie in (0, 1)")

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def to_json(self) -> dict:
        return {
            "bias": self.bias,
            "feature_names": list(FEATURE_NAMES),
            "stats_mean": list(self.stats.mean),
            "stats_std": list(self.stats.std),
            "threshold": self.threshold,
            "weights": list(self.weights),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClassifierModel":
        try:
            names = tuple(obj["feature_names"])
            if names != FEATURE_NAMES:
                raise ModelFormatError(f"feature_names {names} do not match {FEATURE_NAMES}")
            return cls(
                weights=tuple(float(x) for x in obj["weights"]),
                bias=float(obj["bias"]),
                stats=FeatureStats(
                    tuple(float(x) for x in obj["stats_mean"]),
                    tuple(float(x) for x in obj["stats_std"]),
                ),
                threshold=float(obj.get("threshold", 0.5)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ModelFormatError):
                raise
            raise ModelFormatError(f"bad model file: {exc}") from exc


def save_model(model: ClassifierModel, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path: str | os.PathLike) -> ClassifierModel:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ModelFormatError(f"{path}: model file must hold one JSON object")
    return ClassifierModel.from_json(obj)


@dataclass(frozen=True)
class Verdict:
    meme: MemeId
    score: float
    label: Label
    contributions: tuple[float, ...] = field(default=())

    def to_json(self) -> dict:
        return {
            "contributions": dict(zip(FEATURE_NAMES, self.contributions)),
            "label": self.label.value,
            "meme_key": self.meme.key,
            "meme_kind": self.meme.kind.value,
            "score": self.score,
        }


# ----------------------------------------------------------------- scoring


def sigmoid(x):
    """Logistic function, overflow-free for any finite input (scalar or array)."""
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-np.abs(x))
    out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def predict(model: ClassifierModel, v: MemeFeatureVector | Sequence[float]) -> float:
    z = zscore_apply(v, model.stats)
    return sigmoid(model.bias + float(model.w @ z))


def rule_model(stats: FeatureStats, threshold: float = 0.5) -> ClassifierModel:
    """The fixed-signature detector expressed as a :class:`ClassifierModel`."""
    weights = tuple(RULE_WEIGHTS.get(name, 0.0) for name in FEATURE_NAMES)
    return ClassifierModel(weights=weights, bias=RULE_BIAS, stats=stats, threshold=threshold)


def rule_score(v: MemeFeatureVector | Sequence[float], population_stats: FeatureStats) -> float:
    return predict(rule_model(population_stats), v)


def make_verdict(
    meme: MemeId, score: float, model: ClassifierModel, scaled: Sequence[float]
) -> Verdict:
    contributions = tuple((model.w * np.asarray(scaled, dtype=np.float64)).tolist())
    label = Label.TRUTHY if score >= model.threshold else Label.ORGANIC
    return Verdict(meme=meme, score=float(score), label=label, contributions=contributions)


def score_population(
    memes: Sequence[MemeId],
    vectors: Sequence[MemeFeatureVector | Sequence[float]],
    model: Optional[ClassifierModel] = None,
) -> list[Verdict]:
    """Verdicts sorted by score descending (ties by meme).

    Without a model the rule detector runs with stats fitted on ``vectors``.
    """
    if model is None:
        model = rule_model(zscore_fit(vectors))
    verdicts = []
    for meme, v in zip(memes, vectors):
        scaled = zscore_apply(v, model.stats)
        score = sigmoid(model.bias + float(model.w @ scaled))
        verdicts.append(make_verdict(meme, score, model, scaled))
    verdicts.sort(key=lambda d: (-d.score, d.meme))
    return verdicts


# ---------------------------------------------------------------- training


def _loss_grad_scaled(w, b, x, y, l2):
    z = b + x @ w
    p = sigmoid(z)
    pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = -np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)) + 0.5 * l2 * float(w @ w)
    # the clamp makes the loss flat wherever it binds
    dz = np.where(pc == p, p - y, 0.0) / y.shape[0]
    return float(loss), x.T @ dz + l2 * w, float(dz.sum())


def _unpack(data) -> tuple[np.ndarray, np.ndarray]:
    if len(data) == 0:
        raise EmptyDataset("no training examples")
    x = np.asarray([tuple(v) for v, _ in data], dtype=np.float64).reshape(len(data), N_FEATURES)
    y = np.asarray([int(lbl) for _, lbl in data], dtype=np.float64)
    if not np.all((y == 0) | (y == 1)):
        raise InvalidParams("labels must be 0 or 1")
    return x, y


def loss_and_grad(
    model: ClassifierModel,
    data: Sequence[tuple[MemeFeatureVector | Sequence[float], int]],
    l2_lambda: float = TrainConfig.l2_lambda,
) -> tuple[float, np.ndarray, float]:
    """Mean log-loss plus ``l2_lambda/2 * |w|^2`` and its exact gradient."""
    x, y = _unpack(data)
    scaled = (x - np.asarray(model.stats.mean)) / np.asarray(model.stats.std)
    return _loss_grad_scaled(model.w, model.bias, scaled, y, l2_lambda)


def train(
    data: Sequence[tuple[MemeFeatureVector | Sequence[float], int]],
    cfg: TrainConfig = TrainConfig(),
    history: Optional[list[float]] = None,
) -> ClassifierModel:
    """Full-batch gradient descent on the L2-regularized log-loss.

    If ``history`` is given, the loss before each epoch and after the last one
    is appended to it.
    """
    if len(data) < 2:
        raise InsufficientData("training needs at least 2 examples")
    x, y = _unpack(data)
    if y.min() == y.max():
        raise DegenerateLabels("training data holds a single class")
    stats = zscore_fit([tuple(row) for row in x])
    scaled = (x - np.asarray(stats.mean)) / np.asarray(stats.std)

    rng = np.random.default_rng(cfg.seed)
    w = rng.uniform(-0.01, 0.01, N_FEATURES)
    b = 0.0
    for _ in range(cfg.epochs):
        loss, gw, gb = _loss_grad_scaled(w, b, scaled, y, cfg.l2_lambda)
        if history is not None:
            history.append(loss)
        w = w - cfg.learning_rate * gw
        b = b - cfg.learning_rate * gb
    if history is not None:
        history.append(_loss_grad_scaled(w, b, scaled, y, cfg.l2_lambda)[0])
    return ClassifierModel(weights=tuple(w.tolist()), bias=b, stats=stats)


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the ROC curve (Mann-Whitney form, ties count one half)."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    pos, neg = s[y == 1], s[y == 0]
    if pos.size == 0 or neg.size == 0:
        raise DegenerateLabels("AUC needs both classes")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (pos.size * neg.size))
