"""Artificial web directory built by clustering the sites seen in a log.

When no curated taxonomy exists, sites are profiled by the URL tokens of
their logged pages and grouped by single-linkage agglomerative clustering
over Jaccard similarity of those token sets: clusters keep merging while
any cross-cluster site pair is at least sigma-similar. The result is a
two-level taxonomy (cluster -> member sites) usable by every downstream
stage, with top-token keyword summaries and depth-defaulted weights.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .taxonomy import ROOT, Taxonomy, make_taxonomy
from .urls import PageRef, tokenize

DEFAULT_SIGMA = 0.5
_KEYWORDS_PER_CATEGORY = 5


@dataclass(frozen=True)
class SiteProfile:
    """Evidence for one site: combined token counts and hit total of its pages."""

    site: str
    tokens: Counter
    hits: int


def profile_sites(refs: Iterable[PageRef]) -> list[SiteProfile]:
    """One profile per non-local site, sorted by site name; local pages skipped."""
    tokens: dict[str, Counter] = {}
    hits: Counter = Counter()
    for ref in refs:
        if ref.site is None:
            continue
        hits[ref.site] += 1
        tokens.setdefault(ref.site, Counter()).update(tokenize(ref))
    return [SiteProfile(site, tokens[site], hits[site]) for site in sorted(hits)]


def jaccard(a: set, b: set) -> float:
    """Jaccard similarity of two sets; two empty sets count as identical."""
    if not a and not b:
        return 1.0
    inter = len(a & b)
    if inter == 0:
        return 0.0
    return inter / len(a | b)


def cluster_sites(profiles: Sequence[SiteProfile], sigma: float = DEFAULT_SIGMA) -> list[tuple[str, ...]]:
    """Single-linkage clusters over Jaccard similarity of site token sets.

    Merging stops when no cross-cluster pair reaches sigma, i.e. clusters
    are the connected components of the >=sigma similarity graph, so the
    partition at a higher sigma always refines the one at a lower sigma.
    Merge order (similarity desc, site pair asc) and output (sorted tuples,
    sorted) are deterministic. sigma > 1 is allowed and yields singletons.
    """
    if sigma < 0.0:
        raise ValueError(f"sigma must be >= 0: {sigma!r}")
    token_sets = {p.site: set(p.tokens) for p in profiles}
    sites = sorted(token_sets)
    parent = {s: s for s in sites}

    def find(s: str) -> str:
        root = s
        while parent[root] != root:
            root = parent[root]
        while parent[s] != root:
            parent[s], s = root, parent[s]
        return root

    mergeable = []
    for i, a in enumerate(sites):
        for b in sites[i + 1:]:
            sim = jaccard(token_sets[a], token_sets[b])
            if sim >= sigma:
                mergeable.append((-sim, a, b))
    mergeable.sort()
    for _, a, b in mergeable:
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the lexicographically smaller site as representative
            if rb < ra:
                ra, rb = rb, ra
            parent[rb] = ra
    blocks: dict[str, list[str]] = {}
    for site in sites:
        blocks.setdefault(find(site), []).append(site)
    return sorted(tuple(sorted(b)) for b in blocks.values())


def _top_tokens(tokens: Counter, n: int = _KEYWORDS_PER_CATEGORY) -> tuple[str, ...]:
    ranked = sorted(tokens.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(tok for tok, _ in ranked[:n])


def build_artificial_directory(partition: Sequence[Sequence[str]],
                               profiles: Sequence[SiteProfile]) -> Taxonomy:
    """Two-level taxonomy from a site partition.

    One child per cluster, named Cluster-<k> with k assigned by descending
    total hits (ties: smallest member site), keyworded with the cluster's
    top tokens; one grandchild per member site with the site's own top
    tokens. Weights are left to the depth default.
    """
    by_site = {p.site: p for p in profiles}
    seen: set[str] = set()
    for block in partition:
        for site in block:
            if site not in by_site:
                raise ValueError(f"partition mentions unprofiled site {site!r}")
            if site in seen:
                raise ValueError(f"partition repeats site {site!r}")
            seen.add(site)
    if seen != set(by_site):
        missing = sorted(set(by_site) - seen)
        raise ValueError(f"partition does not cover sites: {missing}")

    def block_key(block: Sequence[str]) -> tuple[int, str]:
        return (-sum(by_site[s].hits for s in block), min(block))

    entries: dict[str, tuple[Iterable[str], float | None]] = {ROOT: ((), None)}
    for k, block in enumerate(sorted(partition, key=block_key), 1):
        cluster_tokens: Counter = Counter()
        for site in block:
            cluster_tokens.update(by_site[site].tokens)
        cluster_path = f"{ROOT}/Cluster-{k}"
        entries[cluster_path] = (_top_tokens(cluster_tokens), None)
        for site in sorted(block):
            entries[f"{cluster_path}/{site}"] = (_top_tokens(by_site[site].tokens), None)
    return make_taxonomy(entries)
