"""Per-meme diffusion networks built from retweet provenance and mentions."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import MemeMismatch
from .memes import MemeId, record_has_meme
from .records import TweetRecord


class EdgeKind(str, enum.Enum):
    RETWEET = "retweet"
    MENTION = "mention"


@dataclass(frozen=True)
class DiffusionEdge:
    """Information moved from ``from_user`` to ``to_user`` via ``via_tweet`` at ``ts``."""

    from_user: int
    to_user: int
    kind: EdgeKind
    ts: int
    via_tweet: int


@dataclass(frozen=True)
class NodeInfo:
    first_ts: int
    last_ts: int
    n_tweets: int
    is_stub: bool


@dataclass(frozen=True)
class DiffusionNetwork:
    meme: MemeId
    nodes: dict[int, NodeInfo]
    edges: tuple[DiffusionEdge, ...]
    roots: frozenset[int]
    n_unresolved_retweets: int = 0
    n_self_retweets: int = 0
    n_self_mentions: int = 0

    @property
    def users(self) -> list[int]:
        """Non-stub users (meme authors), ascending."""
        return sorted(u for u, info in self.nodes.items() if not info.is_stub)

    @property
    def stubs(self) -> list[int]:
        return sorted(u for u, info in self.nodes.items() if info.is_stub)

    def retweet_edges(self) -> list[DiffusionEdge]:
        return [e for e in self.edges if e.kind is EdgeKind.RETWEET]

    def out_degrees(self) -> dict[int, int]:
        deg = dict.fromkeys(self.nodes, 0)
        for e in self.edges:
            deg[e.from_user] += 1
        return deg


def build_network(meme: MemeId, posts: Sequence[TweetRecord]) -> DiffusionNetwork:
    """Diffusion network of one meme.

    Retweet edges run origin -> rebroadcaster, mention edges author -> mentioned.
    Self-retweets and self-mentions are dropped. A retweet whose origin user
    authored the meme only *after* the retweet is counted as unresolved instead
    of producing a backward-in-time edge. Origins and mention targets that never
    post the meme become stub nodes.
    """
    posts = sorted(posts, key=lambda r: r.sort_key)
    for post in posts:
        if not record_has_meme(post, meme):
            raise MemeMismatch(f"tweet {post.tweet_id} does not carry {meme.label}")

    authored: dict[int, list[int]] = {}  # uid -> [first_ts, last_ts, n]
    first_is_retweet: dict[int, bool] = {}
    for post in posts:
        stats = authored.get(post.author_id)
        if stats is None:
            authored[post.author_id] = [post.created_at, post.created_at, 1]
            first_is_retweet[post.author_id] = post.is_retweet
        else:
            stats[1] = post.created_at
            stats[2] += 1

    edges: list[DiffusionEdge] = []
    unresolved = self_rt = self_mention = 0
    for post in posts:
        if post.is_retweet:
            origin = post.retweet_of_user_id
            if origin == post.author_id:
                self_rt += 1
            elif origin in authored and authored[origin][0] > post.created_at:
                unresolved += 1
            else:
                edges.append(
                    DiffusionEdge(origin, post.author_id, EdgeKind.RETWEET, post.created_at, post.tweet_id)
                )
        for target in sorted(set(post.mentions)):
            if target == post.author_id:
                self_mention += 1
                continue
            edges.append(DiffusionEdge(post.author_id, target, EdgeKind.MENTION, post.created_at, post.tweet_id))

    nodes = {uid: NodeInfo(s[0], s[1], s[2], False) for uid, s in authored.items()}
    for e in edges:
        for uid in (e.from_user, e.to_user):
            if uid in authored:
                continue
            info = nodes.get(uid)
            if info is None:
                nodes[uid] = NodeInfo(e.ts, e.ts, 0, True)
            else:
                nodes[uid] = NodeInfo(min(info.first_ts, e.ts), max(info.last_ts, e.ts), 0, True)

    roots = frozenset(uid for uid, is_rt in first_is_retweet.items() if not is_rt)
    return DiffusionNetwork(
        meme=meme,
        nodes=dict(sorted(nodes.items())),
        edges=tuple(edges),
        roots=roots,
        n_unresolved_retweets=unresolved,
        n_self_retweets=self_rt,
        n_self_mentions=self_mention,
    )


def weak_components(net: DiffusionNetwork) -> list[frozenset[int]]:
    """Weakly connected components, largest first (ties by smallest member)."""
    ids = sorted(net.nodes)
    if not ids:
        return []
    pos = {uid: i for i, uid in enumerate(ids)}
    src = np.fromiter((pos[e.from_user] for e in net.edges), dtype=np.int64, count=len(net.edges))
    dst = np.fromiter((pos[e.to_user] for e in net.edges), dtype=np.int64, count=len(net.edges))
    labels = kernels.component_labels(len(ids), src, dst)
    groups: dict[int, list[int]] = {}
    for i, label in enumerate(labels.tolist()):
        groups.setdefault(label, []).append(ids[i])
    parts = [frozenset(g) for g in groups.values()]
    parts.sort(key=lambda p: (-len(p), min(p)))
    return parts


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(net: DiffusionNetwork) -> str:
    """Graphviz DOT text. Stubs are dashed boxes, mention edges dashed, roots bold."""
    lines = [f"digraph {_dot_quote(net.meme.label)} {{", "  node [shape=ellipse];"]
    for uid, info in net.nodes.items():
        attrs = []
        if info.is_stub:
            attrs.append("shape=box, style=dashed")
        elif uid in net.roots:
            attrs.append("style=bold")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_dot_quote(str(uid))}{suffix};")
    ordered = sorted(net.edges, key=lambda e: (e.from_user, e.to_user, e.kind.value, e.ts, e.via_tweet))
    for e in ordered:
        style = "solid" if e.kind is EdgeKind.RETWEET else "dashed"
        lines.append(
            f"  {_dot_quote(str(e.from_user))} -> {_dot_quote(str(e.to_user))}"
            f" [style={style}, label=\"{e.ts}\"];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
