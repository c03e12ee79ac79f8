"""Meme identification (hashtags, URLs, mentions) and the per-meme stream index."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence
from urllib.parse import urlsplit

from .errors import InvalidUrl, SchemaViolation
from .records import TweetRecord

MIN_ANALYZABLE_TWEETS = 2

_DEFAULT_PORTS = {"http": 80, "https": 443}


class MemeKind(str, enum.Enum):
    HASHTAG = "hashtag"
    URL = "url"
    MENTION = "mention"


_PREFIX = {MemeKind.HASHTAG: "#", MemeKind.MENTION: "@", MemeKind.URL: ""}


@dataclass(frozen=True, order=True)
class MemeId:
    kind: MemeKind
    key: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", MemeKind(self.kind))
        if not self.key:
            raise SchemaViolation("meme key must be non-empty")
        if self.kind is MemeKind.HASHTAG and "#" in self.key:
            raise SchemaViolation("hashtag meme keys carry no '#'")
        if self.kind is MemeKind.MENTION and not self.key.isdigit():
            raise SchemaViolation("mention meme keys are decimal user ids")

    @classmethod
    def parse(cls, label: str) -> "MemeId":
        """Inverse of :attr:`label`: ``#tag``, ``@123`` or a URL."""
        if label.startswith("#"):
            return cls(MemeKind.HASHTAG, label[1:].lower())
        if label.startswith("@"):
            return cls(MemeKind.MENTION, label[1:])
        return cls(MemeKind.URL, normalize_url(label))

    @property
    def label(self) -> str:
        return _PREFIX[self.kind] + self.key

    def __str__(self) -> str:
        return self.label


def normalize_url(raw: str) -> str:
    """Canonical form used for URL identity.

    Lowercases scheme and host, drops the fragment and default ports, drops a
    bare ``/`` path. Query and path are kept verbatim.
    """
    if not raw or not raw.strip():
        raise InvalidUrl("empty URL")
    try:
        parts = urlsplit(raw.strip())
        port = parts.port
    except ValueError as exc:
        raise InvalidUrl(f"{raw!r}: {exc}") from exc
    scheme = parts.scheme.lower()
    host = parts.hostname
    if not scheme or not host or any(c.isspace() for c in parts.netloc):
        raise InvalidUrl(f"{raw!r}: no scheme/host")
    if ":" in host:
        host = f"[{host}]"
    netloc = host
    if "@" in parts.netloc:
        netloc = parts.netloc.rsplit("@", 1)[0] + "@" + netloc
    if port is not None and _DEFAULT_PORTS.get(scheme) != port:
        netloc += f":{port}"
    path = "" if parts.path == "/" else parts.path
    out = f"{scheme}://{netloc}{path}"
    if parts.query:
        out += "?" + parts.query
    return out


def extract_memes(record: TweetRecord) -> set[MemeId]:
    memes = {MemeId(MemeKind.HASHTAG, tag) for tag in record.hashtags}
    for url in record.urls:
        try:
            memes.add(MemeId(MemeKind.URL, normalize_url(url)))
        except InvalidUrl:
            continue
    memes.update(MemeId(MemeKind.MENTION, str(uid)) for uid in record.mentions)
    return memes


def record_has_meme(record: TweetRecord, meme: MemeId) -> bool:
    if meme.kind is MemeKind.HASHTAG:
        return meme.key in record.hashtags
    if meme.kind is MemeKind.MENTION:
        return int(meme.key) in record.mentions
    return meme in extract_memes(record)


@dataclass(frozen=True)
class MemeRef:
    tweet_id: int
    created_at: int
    position: int


class MemeIndex(Mapping[MemeId, tuple[MemeRef, ...]]):
    """Mapping ``MemeId -> refs`` in stream order. Lookup also accepts labels like ``"#gop"``."""

    def __init__(self, refs: dict[MemeId, tuple[MemeRef, ...]]) -> None:
        self._refs = refs

    def __getitem__(self, meme: MemeId | str) -> tuple[MemeRef, ...]:
        if isinstance(meme, str):
            meme = MemeId.parse(meme)
        return self._refs[meme]

    def __iter__(self) -> Iterator[MemeId]:
        return iter(self._refs)

    def __len__(self) -> int:
        return len(self._refs)

    def n_refs(self) -> int:
        return sum(len(v) for v in self._refs.values())

    def analyzable(self, min_tweets: int = MIN_ANALYZABLE_TWEETS) -> list[MemeId]:
        """Memes with at least ``min_tweets`` posts, in canonical order."""
        return sorted(m for m, refs in self._refs.items() if len(refs) >= min_tweets)

    def posts(self, meme: MemeId | str, stream: Sequence[TweetRecord]) -> list[TweetRecord]:
        return [stream[ref.position] for ref in self[meme]]

    def summary_rows(self) -> list[tuple[str, str, int, int, int]]:
        """``(kind, key, n_tweets, first_ts, last_ts)`` sorted by count desc, then key."""
        rows = [
            (m.kind.value, m.key, len(refs), refs[0].created_at, refs[-1].created_at)
            for m, refs in self._refs.items()
        ]
        rows.sort(key=lambda r: (-r[2], r[1], r[0]))
        return rows


def build_index(stream: Sequence[TweetRecord]) -> MemeIndex:
    """Index every meme occurrence. ``stream`` must already be time-ordered."""
    refs: dict[MemeId, list[MemeRef]] = {}
    for position, record in enumerate(stream):
        ref = MemeRef(record.tweet_id, record.created_at, position)
        for meme in sorted(extract_memes(record)):
            refs.setdefault(meme, []).append(ref)
    for lst in refs.values():
        lst.sort(key=lambda r: (r.created_at, r.tweet_id))
    return MemeIndex({m: tuple(v) for m, v in refs.items()})
