"""Page-reference extraction from logged proxy resources.

In proxy-style logs the requested URL is logged as a path whose first
segment is the target site's hostname (``/www.example.com/a/b.html``).
This module splits such resources into site / directory segments / page,
and tokenizes a reference into the lowercase alphanumeric tokens used for
thematic classification and site clustering.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass


@dataclass(slots=True)
class PageRef:
    """Normalized page reference; ``site`` is None for local (non-site) paths."""

    site: str | None
    directories: tuple[str, ...]
    page: str
    raw: str


_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")
_HOST_LABEL = re.compile(r"[a-z0-9-]+\Z")

# Hostname-grammar verdicts for first path segments repeat across a log.
_HOST_CACHE: dict[str, bool] = {}
_HOST_CACHE_MAX = 65536


def strip_query(resource: str) -> str:
    """Drop everything from the first ``?`` or ``#`` on; percent-escapes stay."""
    q = resource.find("?")
    h = resource.find("#")
    if q < 0:
        cut = h
    elif h < 0:
        cut = q
    else:
        cut = min(q, h)
    return resource if cut < 0 else resource[:cut]


def _is_hostname(segment: str) -> bool:
    # Purely syntactic: >= 2 dot-separated labels of [a-z0-9-]. No TLD list,
    # no DNS; misdetections land in site=None and are excluded from mining.
    verdict = _HOST_CACHE.get(segment)
    if verdict is None:
        labels = segment.split(".")
        verdict = len(labels) >= 2 and all(_HOST_LABEL.match(l) for l in labels)
        if len(_HOST_CACHE) >= _HOST_CACHE_MAX:
            _HOST_CACHE.clear()
        _HOST_CACHE[segment] = verdict
    return verdict


def extract_page_ref(resource: str) -> PageRef:
    """Split a logged resource into site, directories and page name.

    The first segment becomes the site iff it satisfies the hostname
    grammar; the last segment is the page ("" for directory URLs); segments
    in between are the directories. Everything is lowercased once here and
    the query stripped first. A bare "/" yields the empty local reference.
    """
    raw = resource
    path = strip_query(resource).lower()
    if path.startswith("/"):
        path = path[1:]
    if not path:
        return PageRef(None, (), "", raw)
    segments = path.split("/")
    if _is_hostname(segments[0]):
        site, rest = segments[0], segments[1:]
    else:
        site, rest = None, segments
    if not rest:
        return PageRef(site, (), "", raw)
    directories = tuple(s for s in rest[:-1] if s)
    return PageRef(site, directories, rest[-1], raw)


def canonical_path(ref: PageRef) -> str:
    """Rejoin a reference into its canonical query-stripped, lowercased path."""
    parts = [] if ref.site is None else [ref.site]
    parts.extend(ref.directories)
    parts.append(ref.page)
    return "/" + "/".join(parts)


def tokenize(ref: PageRef) -> Counter:
    """Token multiset of a reference: lowercase runs of [a-z0-9].

    Sources: site labels minus a leading ``www`` and minus the final
    suffix-like label, each directory segment, and the page stem with its
    extension removed. Only the last site label is treated as suffix, so
    ``co`` survives in ``google.co.in``.
    """
    tokens: Counter = Counter()
    if ref.site:
        labels = ref.site.lower().split(".")
        if labels[0] == "www":
            labels = labels[1:]
        for label in labels[:-1]:
            for part in _TOKEN_SPLIT.split(label):
                if part:
                    tokens[part] += 1
    for segment in ref.directories:
        for part in _TOKEN_SPLIT.split(segment.lower()):
            if part:
                tokens[part] += 1
    if ref.page:
        stem = ref.page.rsplit(".", 1)[0] if "." in ref.page else ref.page
        for part in _TOKEN_SPLIT.split(stem.lower()):
            if part:
                tokens[part] += 1
    return tokens
