"""File-level glue shared by the CLI and the acceptance harness."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from typing import Optional, Sequence

from .classify import ClassifierModel, Verdict, score_population
from .diffusion import build_network
from .errors import InputError, InsufficientData
from .features import FEATURE_NAMES, MemeFeatureVector, compute_features
from .memes import MIN_ANALYZABLE_TWEETS, MemeId, MemeIndex, MemeKind, build_index
from .records import TweetRecord

log = logging.getLogger(__name__)

FEATURE_HEADER = ("meme_kind", "meme_key", *FEATURE_NAMES)


def meme_features(
    stream: Sequence[TweetRecord],
    memes: Optional[Sequence[MemeId]] = None,
    index: Optional[MemeIndex] = None,
) -> list[tuple[MemeId, MemeFeatureVector]]:
    """Feature vectors for ``memes`` (default: every analyzable meme), in meme order."""
    index = index if index is not None else build_index(stream)
    if memes is None:
        memes = index.analyzable(MIN_ANALYZABLE_TWEETS)
    out = []
    for meme in memes:
        posts = index.posts(meme, stream)
        try:
            vec = compute_features(build_network(meme, posts), posts)
        except InsufficientData:
            log.debug("skipping %s: fewer than 2 posts", meme.label)
            continue
        out.append((meme, vec))
    return out


def _fmt(x: float) -> str:
    return f"{x + 0.0:.9g}"


def features_csv(rows: Sequence[tuple[MemeId, MemeFeatureVector]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURE_HEADER)
    for meme, vec in rows:
        writer.writerow([meme.kind.value, meme.key, *(_fmt(x) for x in vec)])
    return buf.getvalue()


def read_features_csv(path: str | os.PathLike) -> list[tuple[MemeId, MemeFeatureVector]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != FEATURE_HEADER:
            raise InputError(f"{path}: header must be {','.join(FEATURE_HEADER)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(FEATURE_HEADER):
                raise InputError(f"{path}:{lineno}: expected {len(FEATURE_HEADER)} columns")
            try:
                meme = MemeId(MemeKind(row[0]), row[1])
                values = tuple(float(x) for x in row[2:])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
            rows.append((meme, MemeFeatureVector(values)))
    return rows


def extract_csv(index: MemeIndex) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["meme_kind", "meme_key", "n_tweets", "first_ts", "last_ts"])
    writer.writerows(index.summary_rows())
    return buf.getvalue()


def detect(
    rows: Sequence[tuple[MemeId, MemeFeatureVector]], model: Optional[ClassifierModel] = None
) -> list[Verdict]:
    if len(rows) < 2 and model is None:
        raise InsufficientData("rule scoring needs at least 2 memes to fit population stats")
    return score_population([m for m, _ in rows], [v for _, v in rows], model)


def verdicts_json(verdicts: Sequence[Verdict]) -> str:
    return json.dumps([v.to_json() for v in verdicts], indent=2, sort_keys=True, ensure_ascii=False) + "\n"
