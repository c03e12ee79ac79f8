"""Independent reference implementations used by the simulator tests."""

from collections import deque
from itertools import product


def followers_of(edges, n):
    out = {v: [] for v in range(n)}
    for follower, followee in edges:
        out[followee].append(follower)
    return out


def bfs_rounds(edges, n, seeds):
    """Distance along followee -> follower edges."""
    fol = followers_of(edges, n)
    dist = {s: 0 for s in seeds}
    q = deque(sorted(seeds))
    while q:
        u = q.popleft()
        for v in fol[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def ic_enumeration(edges, n, seeds, p, target):
    """Exact adoption probability of ``target`` by summing over all live-edge outcomes."""
    total = 0.0
    for outcome in product((False, True), repeat=len(edges)):
        live = [e for e, on in zip(edges, outcome) if on]
        weight = 1.0
        for on in outcome:
            weight *= p if on else 1 - p
        if target in bfs_rounds(live, n, seeds):
            total += weight
    return total


def threshold_brute(followees, theta, seeds):
    """Plain synchronous iteration until nothing changes."""
    n = len(followees)
    adopted = set(seeds)
    while True:
        new = set()
        for v in range(n):
            if v in adopted or not followees[v]:
                continue
            frac = sum(u in adopted for u in followees[v]) / len(followees[v])
            if frac >= theta[v]:
                new.add(v)
        if not new:
            return adopted
        adopted |= new
