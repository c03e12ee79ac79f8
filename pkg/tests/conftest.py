from __future__ import annotations

import pytest

from truthy import _accel
from truthy.records import TweetRecord

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}

BACKENDS = [b for b in _accel.BACKENDS if b == "numpy" or _accel.HAVE_NUMBA]


@pytest.fixture(params=BACKENDS)
def backend(request):
    with _accel.use_backend(request.param):
        yield request.param


@pytest.fixture
def make_post():
    """Factory for records with sensible defaults; ``rt`` = (tweet_id, user_id)."""

    def _make(tweet_id, author, ts, *, rt=None, mentions=(), tags=("m",), urls=(), text=None, created=0):
        return TweetRecord(
            tweet_id=tweet_id,
            author_id=author,
            created_at=ts,
            text=text if text is not None else f"post {tweet_id}",
            author_created_at=created,
            retweet_of_tweet_id=rt[0] if rt else None,
            retweet_of_user_id=rt[1] if rt else None,
            mentions=tuple(mentions),
            hashtags=tuple(tags),
            urls=tuple(urls),
        )

    return _make


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {name}: {detail}")
