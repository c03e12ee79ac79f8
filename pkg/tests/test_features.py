import math
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from truthy.diffusion import build_network
from truthy.errors import EmptyInput, InsufficientData
from truthy.features import (
    FEATURE_NAMES,
    FeatureStats,
    burstiness,
    compute_features,
    gini,
    near_duplicate_fraction,
    normalize_text,
    peak_rate,
    zscore_apply,
    zscore_fit,
)
from truthy.memes import MemeId

M = MemeId("hashtag", "m")


def gini_pairwise(xs):
    n = len(xs)
    mu = sum(xs) / n
    if mu == 0:
        return 0.0
    return sum(abs(a - b) for a in xs for b in xs) / (2 * n * n * mu)


@pytest.mark.parametrize("xs, expected", [([1, 1, 1, 1], 0.0), ([0, 0, 0, 4], 0.75), ([0, 0, 0, 0], 0.0), ([5], 0.0)])
def test_gini_examples(xs, expected, backend):
    assert gini(xs) == expected


def test_gini_empty():
    with pytest.raises(EmptyInput):
        gini([])


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1e3, allow_nan=False), min_size=1, max_size=50))
def test_gini_matches_pairwise(xs):
    g = gini(xs)
    assert abs(g - gini_pairwise(xs)) <= 1e-12
    assert 0.0 <= g < 1.0


@pytest.mark.parametrize(
    "ts, expected", [([0, 600, 1200], -1.0), ([0, 0, 0], 1.0), ([0, 100], 0.0), ([], 0.0), ([7], 0.0)]
)
def test_burstiness_examples(ts, expected):
    assert burstiness(ts) == expected


@settings(max_examples=100)
@given(st.lists(st.integers(0, 10**6), min_size=3, max_size=40))
def test_burstiness_formula(ts):
    ts = sorted(ts)
    gaps = [b - a for a, b in zip(ts, ts[1:])]
    mu, sigma = statistics.fmean(gaps), statistics.pstdev(gaps)
    expected = 1.0 if mu + sigma == 0 else (sigma - mu) / (sigma + mu)
    assert burstiness(ts) == pytest.approx(expected, abs=1e-12)
    assert -1.0 <= burstiness(ts) <= 1.0


@pytest.mark.parametrize("ts, expected", [([0, 10, 20, 70], 3), ([], 0), ([5], 1), ([0, 59, 60, 119, 120], 2)])
def test_peak_rate_examples(ts, expected):
    assert peak_rate(ts) == expected


@settings(max_examples=100)
@given(st.lists(st.integers(0, 5000), min_size=1, max_size=60), st.integers(1, 300))
def test_peak_rate_by_hand_binning(ts, bin_s):
    ts = sorted(ts)
    counts = {}
    for t in ts:
        k = (t - ts[0]) // bin_s
        counts[k] = counts.get(k, 0) + 1
    assert peak_rate(ts, bin_s) == max(counts.values())


def test_normalize_text():
    assert normalize_text("RT @joe: Vote #GOP  http://x.co/a   NOW") == ["rt", "vote", "gop", "now"]


@pytest.mark.parametrize(
    "texts, expected",
    [
        (["a b c d", "a b c d"], 0.5),
        (["a b c", "x y z"], 0.0),
        (["same"], 0.0),
        (["a b", "a b"], 0.5),
        (["http://x.com", "@bob"], 0.5),
    ],
)
def test_near_duplicate_examples(texts, expected, backend):
    assert near_duplicate_fraction(texts) == expected


def test_near_duplicate_empty():
    with pytest.raises(EmptyInput):
        near_duplicate_fraction([])


def test_near_duplicate_cap(backend):
    texts = ["a b c d"] * 5
    assert near_duplicate_fraction(texts, max_texts=2) == pytest.approx(1 - 4 / 5)


def brute_dup_fraction(texts, threshold=0.5):
    def sh(t):
        toks = normalize_text(t)
        if len(toks) < 3:
            return {(x,) for x in toks}
        return {tuple(toks[i : i + 3]) for i in range(len(toks) - 2)}

    sets = [sh(t) for t in texts]
    n = len(sets)
    adj = {i: set() for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            u = sets[i] | sets[j]
            jac = 1.0 if not u else len(sets[i] & sets[j]) / len(u)
            if jac >= threshold:
                adj[i].add(j)
                adj[j].add(i)
    seen, clusters = set(), 0
    for i in range(n):
        if i in seen:
            continue
        clusters += 1
        stack = [i]
        while stack:
            k = stack.pop()
            if k in seen:
                continue
            seen.add(k)
            stack.extend(adj[k] - seen)
    return 1 - clusters / n


@pytest.mark.parametrize("seed", range(30))
def test_near_duplicate_matches_brute_force(seed, backend):
    rng = random.Random(seed)
    words = ["a", "b", "c", "d", "e", "@x", "#t", "http://u.rl"]
    texts = [" ".join(rng.choice(words) for _ in range(rng.randint(0, 7))) for _ in range(rng.randint(1, 25))]
    assert near_duplicate_fraction(texts) == pytest.approx(brute_dup_fraction(texts), abs=1e-15)


def test_features_star(make_post):
    posts = [make_post(1, 1, 0), make_post(2, 2, 10, rt=(1, 1)), make_post(3, 3, 20, rt=(1, 1))]
    v = compute_features(build_network(M, posts), posts)
    assert v.rt_fraction == pytest.approx(2 / 3)
    assert v.roots_frac == pytest.approx(1 / 3)
    assert v.max_outdeg_frac == 1.0
    assert v.lcc_frac == 1.0
    assert v.log_n_tweets == pytest.approx(math.log10(4))
    assert v.log_n_users == pytest.approx(math.log10(4))
    # out-degrees (2, 0, 0)
    assert v.gini_outdeg == pytest.approx(gini_pairwise([2, 0, 0]))


def test_features_two_unrelated(make_post):
    posts = [make_post(1, 1, 0), make_post(2, 2, 5)]
    v = compute_features(build_network(M, posts), posts)
    assert (v.rt_fraction, v.roots_frac, v.lcc_frac, v.max_outdeg_frac) == (0.0, 1.0, 0.5, 0.0)


def test_features_single_post(make_post):
    posts = [make_post(1, 1, 0)]
    with pytest.raises(InsufficientData):
        compute_features(build_network(M, posts), posts)


def test_account_age_features(make_post):
    day = 86400
    first = 100 * day
    posts = [
        make_post(1, 1, first, created=first - 10 * day),
        make_post(2, 2, first + 5, created=first - 50 * day),
        make_post(3, 2, first + 9, created=first - 50 * day),
        make_post(4, 3, first + 20, created=first + 10),  # joined after the meme began
    ]
    v = compute_features(build_network(M, posts), posts)
    assert v.new_account_frac == pytest.approx(2 / 3)
    assert v.log_mean_account_age_days == pytest.approx(math.log10(1 + 60 / 3))


def test_mention_target_frac(make_post):
    posts = [
        make_post(1, 1, 0, mentions=(2,)),  # 2 not active yet -> counts
        make_post(2, 2, 5),
        make_post(3, 3, 5, mentions=(2,)),  # 2 active before (same ts, lower id)
        make_post(4, 1, 6, mentions=(1,)),  # self-mention only
        make_post(5, 4, 7, mentions=(5, 2)),  # 5 never posts -> counts
    ]
    v = compute_features(build_network(M, posts), posts)
    assert v.mention_target_frac == pytest.approx(2 / 5)


def test_mention_tie_broken_by_tweet_id(make_post):
    posts = [make_post(1, 1, 5, mentions=(2,)), make_post(2, 2, 5)]
    v = compute_features(build_network(M, posts), posts)
    assert v.mention_target_frac == 0.5


BOUNDS = {
    "rt_fraction": (0, 1),
    "roots_frac": (0, 1),
    "max_outdeg_frac": (0, 1),
    "lcc_frac": (0, 1),
    "burstiness": (-1, 1),
    "new_account_frac": (0, 1),
    "mention_target_frac": (0, 1),
}


def random_posts(rng, make_post, n):
    posts = []
    for i in range(n):
        author = rng.randrange(10)
        rt = None
        if posts and rng.random() < 0.5:
            parent = rng.choice(posts)
            rt = (parent.tweet_id, parent.author_id)
        text = " ".join(rng.choice(["a", "b", "c", "d", "e", "f"]) for _ in range(rng.randint(0, 6)))
        posts.append(
            make_post(
                i, author, i * rng.randint(0, 100), rt=rt, text=text,
                mentions=tuple(rng.sample(range(12), rng.randrange(3))), created=-rng.randint(0, 90 * 86400),
            )
        )
    return posts


@pytest.mark.parametrize("seed", range(40))
def test_feature_bounds_and_determinism(make_post, seed):
    rng = random.Random(seed)
    posts = random_posts(rng, make_post, rng.randint(2, 40))
    net = build_network(M, posts)
    v = compute_features(net, posts)
    assert len(v.values) == 13 and all(math.isfinite(x) for x in v)
    for name, (lo, hi) in BOUNDS.items():
        assert lo <= getattr(v, name) <= hi, name
    assert 0 <= v.gini_outdeg < 1
    assert 0 <= v.dup_text_frac < 1
    assert v.lcc_frac > 0
    assert all(getattr(v, n) >= 0 for n in FEATURE_NAMES if n.startswith("log_"))
    assert compute_features(build_network(M, posts), posts).values == v.values


@pytest.mark.parametrize("seed", range(20))
def test_content_blindness(make_post, seed):
    rng = random.Random(seed)
    posts = random_posts(rng, make_post, rng.randint(2, 30))
    vocab = ["a", "b", "c", "d", "e", "f"]
    shuffled = vocab[:]
    rng.shuffle(shuffled)
    rename = dict(zip(vocab, [w + "q" for w in shuffled]))
    renamed = [p.__class__(**{**p.__dict__, "text": " ".join(rename[w] for w in p.text.split())}) for p in posts]
    a = compute_features(build_network(M, posts), posts)
    b = compute_features(build_network(M, renamed), renamed)
    assert a.values == b.values


def test_new_author_never_lowers_new_account_count(make_post):
    rng = random.Random(3)
    posts = random_posts(rng, make_post, 15)
    before = compute_features(build_network(M, posts), posts)
    n_before = len({p.author_id for p in posts})
    extra = make_post(999, 777, posts[-1].created_at + 1, created=posts[0].created_at)
    after_posts = posts + [extra]
    after = compute_features(build_network(M, after_posts), after_posts)
    assert after.new_account_frac * (n_before + 1) >= before.new_account_frac * n_before - 1e-12


def test_rt_fraction_ignores_equal_timestamp_order(make_post):
    posts = [make_post(i, i, 5, rt=(0, 99) if i % 2 else None) for i in range(1, 7)]
    rng = random.Random(0)
    shuffled = posts[:]
    rng.shuffle(shuffled)
    a = compute_features(build_network(M, posts), posts)
    b = compute_features(build_network(M, shuffled), shuffled)
    assert a.rt_fraction == b.rt_fraction == 0.5


def test_zscore_fit_examples():
    base = tuple(float(i) for i in range(13))
    s = zscore_fit([base, base])
    assert s.mean == base and s.std == (1.0,) * 13
    a = (0.0,) + (1.0,) * 12
    b = (2.0,) + (1.0,) * 12
    s = zscore_fit([a, b])
    assert s.mean[0] == 1.0 and s.std[0] == 1.0
    with pytest.raises(InsufficientData):
        zscore_fit([a])


def test_zscore_apply():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(30, 13)) * rng.uniform(0.1, 5, 13) + rng.normal(size=13)
    s = zscore_fit([tuple(r) for r in x])
    assert np.all(zscore_apply(s.mean, s) == 0)
    assert np.allclose(zscore_apply(np.add(s.mean, s.std), s), 1.0)
    scaled = np.array([zscore_apply(tuple(r), s) for r in x])
    assert np.all(np.abs(scaled.mean(axis=0)) <= 1e-9)


def test_feature_stats_rejects_nonpositive_std():
    with pytest.raises(Exception):
        FeatureStats((0.0,) * 13, (0.0,) * 13)
