"""Tweet records: parsing, validation, canonical serialization and batch loading."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import MalformedLine, SchemaViolation

REQUIRED_KEYS = (
    "author_created_at",
    "author_id",
    "created_at",
    "hashtags",
    "mentions",
    "text",
    "tweet_id",
    "urls",
)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class TweetRecord:
    """One microblog post. List-valued fields are stored as tuples."""

    tweet_id: int
    author_id: int
    created_at: int
    text: str
    author_created_at: int
    retweet_of_tweet_id: Optional[int] = None
    retweet_of_user_id: Optional[int] = None
    mentions: tuple[int, ...] = ()
    hashtags: tuple[str, ...] = ()
    urls: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for name in ("mentions", "hashtags", "urls"):
            value = getattr(self, name)
            if not isinstance(value, tuple):
                object.__setattr__(self, name, tuple(value))
        for name in ("tweet_id", "author_id"):
            value = getattr(self, name)
            if not _is_int(value) or value < 0:
                raise SchemaViolation(f"{name} must be a non-negative integer, got {value!r}")
        for name in ("created_at", "author_created_at"):
            if not _is_int(getattr(self, name)):
                raise SchemaViolation(f"{name} must be an integer epoch timestamp")
        if not isinstance(self.text, str):
            raise SchemaViolation("text must be a string")
        if (self.retweet_of_tweet_id is None) != (self.retweet_of_user_id is None):
            raise SchemaViolation("retweet_of_tweet_id and retweet_of_user_id must be set together")
        for name in ("retweet_of_tweet_id", "retweet_of_user_id"):
            value = getattr(self, name)
            if value is not None and (not _is_int(value) or value < 0):
                raise SchemaViolation(f"{name} must be a non-negative integer")
        if self.created_at < self.author_created_at:
            raise SchemaViolation("created_at precedes author_created_at")
        for m in self.mentions:
            if not _is_int(m) or m < 0:
                raise SchemaViolation(f"mentions must hold user ids, got {m!r}")
        for tag in self.hashtags:
            if not isinstance(tag, str) or not tag or tag.startswith("#") or tag != tag.lower():
                raise SchemaViolation(f"hashtag {tag!r} must be lowercase without '#'")
        for url in self.urls:
            if not isinstance(url, str):
                raise SchemaViolation("urls must be strings")

    @property
    def is_retweet(self) -> bool:
        return self.retweet_of_tweet_id is not None

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.created_at, self.tweet_id)

    def to_dict(self) -> dict:
        out = {
            "author_created_at": self.author_created_at,
            "author_id": self.author_id,
            "created_at": self.created_at,
            "hashtags": list(self.hashtags),
            "mentions": list(self.mentions),
            "text": self.text,
            "tweet_id": self.tweet_id,
            "urls": list(self.urls),
        }
        if self.is_retweet:
            out["retweet_of_tweet_id"] = self.retweet_of_tweet_id
            out["retweet_of_user_id"] = self.retweet_of_user_id
        return out


@dataclass(frozen=True)
class StreamReport:
    """Accounting for one :func:`load_stream` call.

    ``n_rejected`` includes duplicate ids, so ``n_records + n_rejected`` equals
    the number of non-blank lines read.
    """

    n_records: int = 0
    n_rejected: int = 0
    n_duplicate_ids: int = 0
    n_order_violations: int = 0
    first_ts: Optional[int] = None
    last_ts: Optional[int] = None
    errors: tuple[str, ...] = field(default=(), compare=False, repr=False)


def _normalize_tag(tag: object) -> str:
    if not isinstance(tag, str):
        raise SchemaViolation(f"hashtag must be a string, got {tag!r}")
    return tag.lstrip("#").lower()


def parse_record(line: str | bytes) -> TweetRecord:
    """Parse one JSONL line into a :class:`TweetRecord`.

    Hashtags are normalized (leading ``#`` stripped, lowercased); everything
    else must already satisfy the record invariants.
    """
    try:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        obj = json.loads(line)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedLine(str(exc)) from exc
    if not isinstance(obj, dict):
        raise MalformedLine("record is not a JSON object")
    missing = [k for k in REQUIRED_KEYS if k not in obj]
    if missing:
        raise SchemaViolation(f"missing required field(s): {', '.join(missing)}")
    for name in ("hashtags", "mentions", "urls"):
        if not isinstance(obj[name], list):
            raise SchemaViolation(f"{name} must be a list")
    return TweetRecord(
        tweet_id=obj["tweet_id"],
        author_id=obj["author_id"],
        created_at=obj["created_at"],
        text=obj["text"],
        author_created_at=obj["author_created_at"],
        retweet_of_tweet_id=obj.get("retweet_of_tweet_id"),
        retweet_of_user_id=obj.get("retweet_of_user_id"),
        mentions=tuple(obj["mentions"]),
        hashtags=tuple(_normalize_tag(t) for t in obj["hashtags"]),
        urls=tuple(obj["urls"]),
    )


def serialize_record(record: TweetRecord) -> str:
    """Canonical one-line JSON (keys sorted, UTF-8 kept verbatim, no newline)."""
    return json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def load_stream(path: str | os.PathLike) -> tuple[list[TweetRecord], StreamReport]:
    """Load a JSONL file into a list sorted by ``(created_at, tweet_id)``.

    Bad lines are counted, never fatal. Only file-level ``OSError`` propagates.
    """
    with open(path, "rb") as handle:
        raw_lines = handle.read().split(b"\n")

    kept: list[TweetRecord] = []
    seen: set[int] = set()
    rejected = duplicates = order_violations = 0
    errors: list[str] = []
    previous: tuple[int, int] | None = None
    for lineno, raw in enumerate(raw_lines, start=1):
        if not raw.strip():
            continue
        try:
            record = parse_record(raw)
        except (MalformedLine, SchemaViolation) as exc:
            rejected += 1
            errors.append(f"line {lineno}: {type(exc).__name__}: {exc}")
            continue
        if record.tweet_id in seen:
            rejected += 1
            duplicates += 1
            continue
        seen.add(record.tweet_id)
        if previous is not None and record.sort_key < previous:
            order_violations += 1
        previous = record.sort_key
        kept.append(record)

    kept.sort(key=lambda r: r.sort_key)
    report = StreamReport(
        n_records=len(kept),
        n_rejected=rejected,
        n_duplicate_ids=duplicates,
        n_order_violations=order_violations,
        first_ts=kept[0].created_at if kept else None,
        last_ts=kept[-1].created_at if kept else None,
        errors=tuple(errors),
    )
    return kept, report


def write_stream(records: Iterable[TweetRecord], path: str | os.PathLike) -> int:
    """Write records one per line in the given order; returns the count written."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(serialize_record(record))
            handle.write("\n")
            n += 1
    return n


def sort_stream(records: Sequence[TweetRecord]) -> list[TweetRecord]:
    return sorted(records, key=lambda r: r.sort_key)
