"""Seeded generators for social graphs, organic cascades and astroturf campaigns.

Every generator draws from a Philox (counter-based) stream seeded through
``numpy.random.SeedSequence``; per-meme substreams are keyed by
``derive_seed(global_seed, meme_key)`` so output never depends on the order
in which memes are generated.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import kernels
from .classify import Label
from .errors import InvalidParams, InvalidSeeds, MissingThreshold
from .memes import MemeId, MemeKind, normalize_url
from .records import TweetRecord

DAY_S = 86400
YEAR_S = 365 * DAY_S
BASE_T0 = 1_262_304_000  # 2010-01-01T00:00:00Z
MASK64 = (1 << 64) - 1

SeedLike = Union[int, np.random.Generator]


def derive_seed(global_seed: int, key: str) -> int:
    """Stable 64-bit substream seed for ``key`` under ``global_seed``."""
    digest = hashlib.blake2b(f"{int(global_seed) & MASK64}:{key}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & MASK64)))


# ------------------------------------------------------------------- graphs


@dataclass(frozen=True, eq=False)
class SocialGraph:
    """Directed follow graph in CSR form: row ``v`` lists whom ``v`` follows.

    Information flows from a followee to its followers.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    def __post_init__(self) -> None:
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        if indptr.shape != (self.n + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise InvalidParams("malformed CSR structure")
        if indices.size and (indices.min() < 0 or indices.max() >= self.n):
            raise InvalidParams("node ids must lie in [0, n)")
        for v in range(self.n):
            row = indices[indptr[v] : indptr[v + 1]]
            if row.size and (np.any(np.diff(row) <= 0) or np.any(row == v)):
                raise InvalidParams(f"row {v} must be sorted, unique and free of self-loops")
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)

    @classmethod
    def from_followees(cls, followees: Sequence[Iterable[int]]) -> "SocialGraph":
        raw = [[int(x) for x in r] for r in followees]
        if any(len(set(r)) != len(r) for r in raw):
            raise InvalidParams("duplicate edges")
        rows = [sorted(r) for r in raw]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(r) for r in rows])
        indices = np.fromiter((x for r in rows for x in r), dtype=np.int64, count=int(indptr[-1]))
        return cls(len(rows), indptr, indices)

    @property
    def n_edges(self) -> int:
        return int(self.indices.size)

    def followees(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def edges(self) -> list[tuple[int, int]]:
        """``(follower, followee)`` pairs."""
        return [(v, int(u)) for v in range(self.n) for u in self.followees(v)]

    @cached_property
    def followers_csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Transposed CSR: row ``u`` lists who follows ``u`` (ascending)."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        order = np.lexsort((rows, self.indices))
        counts = np.bincount(self.indices, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(counts)
        return indptr, rows[order]


def gen_graph_ba(n: int, m: int, seed: SeedLike) -> SocialGraph:
    """Preferential attachment: an ``m``-clique, then each new node follows
    ``m`` distinct earlier nodes picked proportionally to total degree."""
    if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer)) and n > m >= 1):
        raise InvalidParams(f"need n > m >= 1, got n={n}, m={m}")
    rng = make_rng(seed)
    followees: list[list[int]] = [list(range(i)) for i in range(m)]
    endpoints: list[int] = [x for i in range(m) for j in range(i) for x in (i, j)]
    for v in range(m, n):
        if not endpoints:
            chosen = set(range(v))  # m == 1 with a single isolated node
        else:
            chosen: set[int] = set()
            while len(chosen) < m:
                draws = rng.integers(0, len(endpoints), size=m - len(chosen))
                for d in draws.tolist():
                    if len(chosen) < m:
                        chosen.add(endpoints[d])
        row = sorted(chosen)
        followees.append(row)
        for u in row:
            endpoints.extend((v, u))
    return SocialGraph.from_followees(followees)


# ------------------------------------------------------------------ cascades


def _check_seeds(g: SocialGraph, seeds: Iterable[int]) -> np.ndarray:
    arr = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if arr.size == 0:
        raise InvalidSeeds("seed set is empty")
    if arr.min() < 0 or arr.max() >= g.n:
        raise InvalidSeeds("seed outside the graph")
    return arr


def ic_rounds(g: SocialGraph, seeds: Iterable[int], p: float, rng_seed: SeedLike) -> np.ndarray:
    """Adoption round per node under independent cascade (-1 = never)."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParams("p must lie in [0, 1]")
    seed_arr = _check_seeds(g, seeds)
    rng = make_rng(rng_seed)
    indptr, indices = g.followers_csr
    # one coin per edge; each adopter tries each follower at most once
    live = rng.random(indices.size) < p
    return kernels.live_edge_rounds(indptr, indices, live, seed_arr)


def run_ic(g: SocialGraph, seeds: Iterable[int], p: float, rng_seed: SeedLike) -> dict[int, int]:
    """Independent cascade, synchronous rounds. Returns ``{node: adoption round}``."""
    rounds = ic_rounds(g, seeds, p, rng_seed)
    return {int(v): int(rounds[v]) for v in np.flatnonzero(rounds >= 0)}


def _threshold_array(g: SocialGraph, thresholds) -> np.ndarray:
    if isinstance(thresholds, Mapping):
        missing = [v for v in range(g.n) if v not in thresholds]
        if missing:
            raise MissingThreshold(f"no threshold for nodes {missing[:5]}")
        theta = np.array([thresholds[v] for v in range(g.n)], dtype=np.float64)
    else:
        theta = np.asarray(thresholds, dtype=np.float64)
        if theta.shape != (g.n,):
            raise MissingThreshold(f"need {g.n} thresholds, got {theta.size}")
    if np.any(~np.isfinite(theta)) or np.any(theta < 0) or np.any(theta > 1):
        raise InvalidParams("thresholds must lie in [0, 1]")
    return theta


def threshold_rounds(g: SocialGraph, seeds: Iterable[int], thresholds) -> np.ndarray:
    seed_arr = _check_seeds(g, seeds)
    theta = _threshold_array(g, thresholds)
    return kernels.threshold_rounds(g.indptr, g.indices, theta, seed_arr)


def run_threshold(g: SocialGraph, seeds: Iterable[int], thresholds) -> set[int]:
    """Linear threshold fixed point: ``v`` adopts once the adopted fraction of
    its followees reaches ``thresholds[v]``. Nodes following nobody adopt only
    as seeds."""
    rounds = threshold_rounds(g, seeds, thresholds)
    return {int(v) for v in np.flatnonzero(rounds >= 0)}


# ------------------------------------------------------------------ specs


@dataclass(frozen=True)
class OrganicSpec:
    graph_n: int = 1000
    ba_m: int = 3
    model: str = "cascade"
    p: float = 0.05
    theta_max: float = 1.0
    n_seeds: int = 3
    mean_delay_s: float = 600.0
    originality_q: float = 0.15
    seed: int = 0

    def validate(self) -> None:
        if self.model not in ("cascade", "threshold"):
            raise InvalidParams(f"model must be 'cascade' or 'threshold', got {self.model!r}")
        if not 0.0 <= self.p <= 1.0 or not 0.0 <= self.originality_q <= 1.0:
            raise InvalidParams("p and originality_q must lie in [0, 1]")
        if not 0.0 < self.theta_max <= 1.0:
            raise InvalidParams("theta_max must lie in (0, 1]")
        if self.n_seeds < 1 or self.n_seeds > self.graph_n:
            raise InvalidParams("n_seeds must lie in [1, graph_n]")
        if self.mean_delay_s <= 0:
            raise InvalidParams("mean_delay_s must be positive")


DEFAULT_TEMPLATE = "breaking news everyone must read this before the vote {jitter}"
DEFAULT_JITTER = ("now", "today", "asap", "please", "fast", "tonight", "urgent", "share")


@dataclass(frozen=True)
class CampaignSpec:
    n_injectors: int = 9
    total_tweets: int = 929
    duration_s: int = 8280
    injector_age_s: int = 7 * DAY_S
    target_pool: tuple[int, ...] = ()
    retweet_prob: float = 0.10
    retweet_delay_mean_s: float = 300.0
    mentions_per_tweet: int = 1
    text_template: str = DEFAULT_TEMPLATE
    jitter_tokens: tuple[str, ...] = DEFAULT_JITTER
    seed: Optional[int] = None
    meme_key: Optional[str] = None
    n_targets: int = 100

    def __post_init__(self) -> None:
        object.__setattr__(self, "target_pool", tuple(int(u) for u in self.target_pool))
        object.__setattr__(self, "jitter_tokens", tuple(self.jitter_tokens))

    def validate(self, need_pool: bool = True) -> None:
        if self.n_injectors < 1:
            raise InvalidParams("n_injectors must be >= 1")
        if self.total_tweets < self.n_injectors:
            raise InvalidParams("total_tweets must be >= n_injectors")
        if self.duration_s < 1:
            raise InvalidParams("duration_s must be >= 1")
        if not 0.0 <= self.retweet_prob <= 1.0:
            raise InvalidParams("retweet_prob must lie in [0, 1]")
        if self.retweet_delay_mean_s <= 0 or self.injector_age_s < 0:
            raise InvalidParams("delays and ages must be non-negative")
        if self.mentions_per_tweet < 0:
            raise InvalidParams("mentions_per_tweet must be >= 0")
        if not self.jitter_tokens or "{jitter}" not in self.text_template:
            raise InvalidParams("text_template needs a {jitter} slot and jitter_tokens")
        if need_pool:
            if not self.target_pool:
                raise InvalidParams("target_pool is empty")
            if self.mentions_per_tweet > len(set(self.target_pool)):
                raise InvalidParams("mentions_per_tweet exceeds the target pool")

    @classmethod
    def from_json(cls, obj: Mapping) -> "CampaignSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise InvalidParams(f"unknown campaign fields: {sorted(unknown)}")
        return cls(**obj)


def load_campaign_specs(path: str | os.PathLike) -> list[CampaignSpec]:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidParams(f"{path}: {exc}") from exc
    if isinstance(obj, dict):
        obj = [obj]
    if not isinstance(obj, list) or not all(isinstance(o, dict) for o in obj):
        raise InvalidParams("campaign spec file must hold a list of objects")
    return [CampaignSpec.from_json(o) for o in obj]


# -------------------------------------------------------------- generators


@dataclass
class _Post:
    """A post before tweet ids are assigned; ``parent`` indexes the post list."""

    author: int
    ts: int
    text: str
    author_created: int
    parent: Optional[int] = None
    mentions: tuple[int, ...] = ()


def _meme_fields(kind: MemeKind, key: str) -> tuple[tuple[str, ...], tuple[str, ...], str]:
    if kind is MemeKind.HASHTAG:
        return (key,), (), f"#{key}"
    if kind is MemeKind.URL:
        return (), (key,), key
    raise InvalidParams("generated memes are hashtags or urls")


def _finalize(posts: list[_Post], kind: MemeKind, key: str, first_tweet_id: int) -> list[TweetRecord]:
    hashtags, urls, _ = _meme_fields(kind, key)
    order = sorted(range(len(posts)), key=lambda i: (posts[i].ts, i))
    tweet_id = {old: first_tweet_id + new for new, old in enumerate(order)}
    out = []
    for i in order:
        post = posts[i]
        parent = posts[post.parent] if post.parent is not None else None
        out.append(
            TweetRecord(
                tweet_id=tweet_id[i],
                author_id=post.author,
                created_at=post.ts,
                text=post.text,
                author_created_at=post.author_created,
                retweet_of_tweet_id=tweet_id[post.parent] if parent else None,
                retweet_of_user_id=parent.author if parent else None,
                mentions=post.mentions,
                hashtags=hashtags,
                urls=urls,
            )
        )
    return out


def _delay(rng: np.random.Generator, mean_s: float) -> int:
    return max(1, int(round(rng.exponential(mean_s))))


def _retweet_text(parent: _Post) -> str:
    return f"RT @{parent.author}: {parent.text}"


def gen_organic(
    spec: OrganicSpec,
    meme_key: str,
    t0: int,
    *,
    meme_kind: MemeKind | str = MemeKind.HASHTAG,
    graph: Optional[SocialGraph] = None,
    account_created: Optional[np.ndarray] = None,
    first_tweet_id: int = 0,
) -> list[TweetRecord]:
    """One organically spreading meme.

    Seeds post originals at ``t0``. Every later adopter posts once, at its
    parent's time plus an exponential delay; with probability
    ``originality_q`` the post is an original, otherwise a retweet of a
    uniformly chosen earlier-adopting followee. Node ids are user ids.
    """
    spec.validate()
    kind = MemeKind(meme_kind)
    _, _, marker = _meme_fields(kind, meme_key)
    rng = make_rng(spec.seed)
    g = graph if graph is not None else gen_graph_ba(spec.graph_n, spec.ba_m, derive_seed(spec.seed, "graph"))
    if spec.n_seeds > g.n:
        raise InvalidParams("more seeds than graph nodes")
    seeds = np.sort(rng.choice(g.n, size=spec.n_seeds, replace=False))
    if spec.model == "cascade":
        rounds = ic_rounds(g, seeds, spec.p, rng)
    else:
        theta = rng.uniform(0.0, spec.theta_max, g.n)
        rounds = threshold_rounds(g, seeds, theta)
    if account_created is None:
        account_created = rng.integers(t0 - 3 * YEAR_S, t0 - 60 * DAY_S, g.n, endpoint=True)

    adopters = sorted(np.flatnonzero(rounds >= 0).tolist(), key=lambda v: (rounds[v], v))
    post_of: dict[int, int] = {}
    posts: list[_Post] = []
    for v in adopters:
        r = rounds[v]
        created = int(account_created[v])
        if r == 0:
            post = _Post(v, t0, _original_text(rng, marker), created)
        else:
            sources = [int(u) for u in g.followees(v) if 0 <= rounds[u] < r]
            if not sources:
                # only reachable with a zero threshold: adopted without exposure
                post = _Post(v, t0 + _delay(rng, spec.mean_delay_s), _original_text(rng, marker), created)
            else:
                parent_idx = post_of[sources[int(rng.integers(len(sources)))]]
                parent = posts[parent_idx]
                ts = parent.ts + _delay(rng, spec.mean_delay_s)
                if rng.random() < spec.originality_q:
                    post = _Post(v, ts, _original_text(rng, marker), created)
                else:
                    post = _Post(v, ts, _retweet_text(parent), created, parent=parent_idx)
        post_of[v] = len(posts)
        posts.append(post)
    return _finalize(posts, kind, meme_key, first_tweet_id)


def _original_text(rng: np.random.Generator, marker: str) -> str:
    n_words = int(rng.integers(6, 15))
    words = [f"w{int(x)}" for x in rng.integers(0, 5000, n_words)]
    return " ".join(words) + " " + marker


def gen_campaign(
    spec: CampaignSpec,
    meme_key: str,
    t0: int,
    *,
    meme_kind: MemeKind | str = MemeKind.URL,
    injector_ids: Optional[Sequence[int]] = None,
    account_created: Optional[Mapping[int, int]] = None,
    first_tweet_id: int = 0,
) -> list[TweetRecord]:
    """A coordinated injection campaign plus the retweets it provokes.

    ``total_tweets`` posts at uniform random times in ``[t0, t0 + duration_s)``
    are dealt round-robin to the injectors. Each mentions
    ``mentions_per_tweet`` distinct users from ``target_pool``; every mentioned
    target retweets that post with probability ``retweet_prob``.
    """
    spec.validate()
    kind = MemeKind(meme_kind)
    if kind is MemeKind.URL:
        meme_key = normalize_url(meme_key)
    _, _, marker = _meme_fields(kind, meme_key)
    seed = spec.seed if spec.seed is not None else derive_seed(0, meme_key)
    rng = make_rng(seed)
    pool = np.array(sorted(set(spec.target_pool)), dtype=np.int64)
    if injector_ids is None:
        injector_ids = range(int(pool.max()) + 1, int(pool.max()) + 1 + spec.n_injectors)
    injectors = [int(u) for u in injector_ids]
    if len(set(injectors)) != spec.n_injectors or set(injectors) & set(pool.tolist()):
        raise InvalidParams("injector ids must be distinct and outside the target pool")

    if account_created is None:
        acct_rng = make_rng(derive_seed(seed, "accounts"))
        drawn = acct_rng.integers(t0 - 3 * YEAR_S, t0 - 60 * DAY_S, pool.size, endpoint=True)
        account_created = dict(zip(pool.tolist(), drawn.tolist()))
    injector_created = t0 - spec.injector_age_s

    times = np.sort(t0 + rng.integers(0, spec.duration_s, spec.total_tweets))
    posts: list[_Post] = []
    for k, ts in enumerate(times.tolist()):
        author = injectors[k % spec.n_injectors]
        targets = rng.choice(pool, size=spec.mentions_per_tweet, replace=False).tolist()
        jitter = spec.jitter_tokens[int(rng.integers(len(spec.jitter_tokens)))]
        handles = " ".join(f"@{u}" for u in targets)
        text = f"{handles} {spec.text_template.format(jitter=jitter)} {marker}".strip()
        idx = len(posts)
        posts.append(_Post(author, ts, text, injector_created, mentions=tuple(targets)))
        for target in targets:
            if rng.random() < spec.retweet_prob:
                rt_ts = ts + _delay(rng, spec.retweet_delay_mean_s)
                posts.append(
                    _Post(target, rt_ts, _retweet_text(posts[idx]), int(account_created[target]), parent=idx)
                )
    return _finalize(posts, kind, meme_key, first_tweet_id)


# ----------------------------------------------------------------- datasets


@dataclass
class GroundTruth:
    labels: dict[MemeId, Label] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, meme: MemeId) -> Label:
        return self.labels[meme]

    def __contains__(self, meme: object) -> bool:
        return meme in self.labels

    def memes(self) -> list[MemeId]:
        return sorted(self.labels)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["meme_kind", "meme_key", "label"])
        for meme in self.memes():
            writer.writerow([meme.kind.value, meme.key, self.labels[meme].value])
        return buf.getvalue()


def read_labels(path: str | os.PathLike) -> dict[MemeId, int]:
    """Labels CSV ``meme_kind,meme_key,label`` -> ``{meme: 1 truthy / 0 organic}``."""
    out: dict[MemeId, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"meme_kind", "meme_key", "label"} <= set(reader.fieldnames):
            raise InvalidParams(f"{path}: expected header meme_kind,meme_key,label")
        for row in reader:
            raw = row["label"].strip().lower()
            if raw in ("truthy", "1"):
                value = 1
            elif raw in ("organic", "0"):
                value = 0
            else:
                raise InvalidParams(f"{path}: unknown label {row['label']!r}")
            out[MemeId(MemeKind(row["meme_kind"]), row["meme_key"])] = value
    return out


@dataclass
class Dataset:
    records: list[TweetRecord]
    truth: GroundTruth


def gen_dataset(
    n_organic: int,
    campaign_specs: Sequence[CampaignSpec],
    global_seed: int,
    *,
    organic_spec: Optional[OrganicSpec] = None,
    organic_models: Sequence[str] = ("cascade", "threshold"),
    t0: int = BASE_T0,
    spread_s: int = 7 * DAY_S,
) -> Dataset:
    """Labeled stream of ``n_organic`` organic memes and the given campaigns.

    Organic memes share one follow graph and one user population. Campaign
    target pools left empty are sampled from users who took part in organic
    memes. Records are merged, time-sorted and given fresh global tweet ids.
    """
    if n_organic < 0:
        raise InvalidParams("n_organic must be >= 0")
    if n_organic == 0 and not campaign_specs:
        return Dataset([], GroundTruth())
    base = organic_spec or OrganicSpec()
    rng = make_rng(derive_seed(global_seed, "dataset"))
    graph = gen_graph_ba(base.graph_n, base.ba_m, derive_seed(global_seed, "graph"))
    account_created = rng.integers(t0 - 3 * YEAR_S, t0 - 60 * DAY_S, graph.n, endpoint=True)

    batches: list[list[TweetRecord]] = []
    truth = GroundTruth()
    participants: set[int] = set()
    for i in range(n_organic):
        key = f"meme{i:04d}"
        spec = dataclasses.replace(
            base, seed=derive_seed(global_seed, key), model=organic_models[i % len(organic_models)]
        )
        start = t0 + int(rng.integers(0, spread_s))
        recs = gen_organic(spec, key, start, graph=graph, account_created=account_created)
        participants.update(r.author_id for r in recs)
        batches.append(recs)
        truth.labels[MemeId(MemeKind.HASHTAG, key)] = Label.ORGANIC

    pool_source = np.array(sorted(participants) if participants else range(graph.n), dtype=np.int64)
    next_uid = graph.n
    for j, cspec in enumerate(campaign_specs):
        key = normalize_url(cspec.meme_key or f"http://campaign{j}.example.org/story")
        if not cspec.target_pool:
            pool = rng.choice(pool_source, size=min(cspec.n_targets, pool_source.size), replace=False)
            cspec = dataclasses.replace(cspec, target_pool=tuple(sorted(pool.tolist())))
        if cspec.seed is None:
            cspec = dataclasses.replace(cspec, seed=derive_seed(global_seed, key))
        injectors = range(next_uid, next_uid + cspec.n_injectors)
        next_uid += cspec.n_injectors
        start = t0 + int(rng.integers(0, spread_s))
        created = {u: int(account_created[u]) for u in cspec.target_pool if 0 <= u < graph.n}
        for u in cspec.target_pool:
            created.setdefault(u, start - 60 * DAY_S)
        recs = gen_campaign(cspec, key, start, injector_ids=injectors, account_created=created)
        batches.append(recs)
        meme = MemeId(MemeKind.URL, key)
        if meme in truth:
            raise InvalidParams(f"duplicate meme key {key}")
        truth.labels[meme] = Label.TRUTHY

    return Dataset(_merge(batches), truth)


def _merge(batches: Sequence[Sequence[TweetRecord]]) -> list[TweetRecord]:
    tagged = [(r.created_at, b, r.tweet_id, r) for b, recs in enumerate(batches) for r in recs]
    tagged.sort(key=lambda t: t[:3])
    new_id = {(b, old): i for i, (_, b, old, _) in enumerate(tagged)}
    out = []
    for i, (_, b, _, r) in enumerate(tagged):
        rt = new_id[(b, r.retweet_of_tweet_id)] if r.is_retweet else None
        out.append(dataclasses.replace(r, tweet_id=i, retweet_of_tweet_id=rt))
    return out
