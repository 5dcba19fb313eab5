"""User-community discovery and pruned community directories.

Users become vertices of a similarity graph (cosine over their usage
vectors, thresholded at tau); communities are the maximal cliques of that
graph, enumerated with Bron-Kerbosch pivoting, so communities may overlap.
Each community's directory keeps the categories whose score, the product
of a-priori category informativeness and the fraction of the community's
hits falling inside the category's subtree, clears theta, plus all their
ancestors so the result stays a rooted tree.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .classify import UsageVector
from .taxonomy import ROOT, Taxonomy, ancestors

DEFAULT_TAU = 0.5
DEFAULT_THETA = 0.1
DEFAULT_MIN_SIZE = 2
DEFAULT_CLIQUE_CAP = 1_000_000


class ExplosionGuardError(RuntimeError):
    """Clique enumeration produced more maximal cliques than the cap allows."""

    def __init__(self, cap: int):
        super().__init__(f"more than {cap} maximal cliques; raise the cap or tau")
        self.cap = cap


@dataclass(frozen=True)
class SimilarityGraph:
    vertices: tuple[str, ...]
    adjacency: dict[str, frozenset[str]]
    tau: float

    def edges(self) -> list[tuple[str, str]]:
        return sorted((u, v) for u in self.vertices for v in self.adjacency[u] if u < v)


@dataclass(frozen=True)
class Community:
    """A user group with its aggregated category profile."""

    members: tuple[str, ...]
    profile: dict[str, int]
    total: int


@dataclass(frozen=True)
class CommunityDirectory:
    """Ancestor-closed scored category subset selected for one community."""

    community: Community
    selected: dict[str, float]
    theta: float


def similarity(u: UsageVector, v: UsageVector) -> float:
    """Cosine similarity of two usage vectors (unspecified coordinate included)."""
    a, b = u.counts, v.counts
    if len(b) < len(a):
        a, b = b, a
    dot = 0
    for key, x in a.items():
        y = b.get(key)
        if y:
            dot += x * y
    if dot == 0:
        return 0.0
    na = sum(x * x for x in a.values())
    nb = sum(y * y for y in b.values())
    # na*nb is an exact integer, so parallel vectors hit exactly 1.0.
    return min(1.0, dot / math.sqrt(na * nb))


def build_graph(vectors: Iterable[UsageVector], tau: float = DEFAULT_TAU) -> SimilarityGraph:
    """Graph with an edge wherever pairwise similarity reaches tau."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must be in [0, 1]: {tau!r}")
    vecs = sorted(vectors, key=lambda v: v.user)
    users = tuple(v.user for v in vecs)
    if len(set(users)) != len(users):
        raise ValueError("duplicate user ids in vectors")
    adj: dict[str, set[str]] = {u: set() for u in users}
    for i, u in enumerate(vecs):
        for v in vecs[i + 1:]:
            if similarity(u, v) >= tau:
                adj[u.user].add(v.user)
                adj[v.user].add(u.user)
    return SimilarityGraph(users, {u: frozenset(n) for u, n in adj.items()}, tau)


def find_communities(graph: SimilarityGraph, min_size: int = DEFAULT_MIN_SIZE,
                     keep_singletons: bool = False,
                     clique_cap: int = DEFAULT_CLIQUE_CAP) -> list[tuple[str, ...]]:
    """All maximal cliques of size >= min_size, as sorted member tuples.

    Isolated vertices (maximal cliques of size 1) are included when
    ``keep_singletons`` is set even if min_size is larger. Output is
    canonically ordered, so it is independent of input and recursion order.
    Raises ExplosionGuardError once more than ``clique_cap`` maximal cliques
    exist.
    """
    adj = graph.adjacency
    found: list[frozenset[str]] = []

    def expand(r: frozenset[str], p: set[str], x: set[str]) -> None:
        if not p and not x:
            found.append(r)
            if len(found) > clique_cap:
                raise ExplosionGuardError(clique_cap)
            return
        pivot, best = None, -1
        for cand in p | x:
            deg = len(adj[cand] & p)
            if deg > best:
                pivot, best = cand, deg
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p.remove(v)
            x.add(v)

    if graph.vertices:
        expand(frozenset(), set(graph.vertices), set())
    kept = [c for c in found
            if len(c) >= min_size or (keep_singletons and len(c) == 1)]
    return sorted(tuple(sorted(c)) for c in kept)


def community_profile(members: Iterable[str], vectors: Iterable[UsageVector]) -> Community:
    """Materialize a community: summed counts over its members."""
    by_user = {v.user: v for v in vectors}
    profile: Counter = Counter()
    member_list = tuple(sorted(members))
    for member in member_list:
        profile.update(by_user[member].counts)
    return Community(member_list, dict(sorted(profile.items())), sum(profile.values()))


def score_category(path: str, community: Community, tax: Taxonomy) -> float:
    """Informativeness x interest: weight(path) * subtree-hit fraction."""
    weight = tax.categories[path].weight
    prefix = path + "/"
    hits = sum(n for cat, n in community.profile.items()
               if cat == path or cat.startswith(prefix))
    return weight * (hits / community.total)


def build_community_directory(tax: Taxonomy, community: Community,
                              theta: float = DEFAULT_THETA) -> CommunityDirectory:
    """Select categories scoring >= theta, closed upward over ancestors.

    Ancestors pulled in for closure keep their own (possibly sub-theta)
    scores. theta=0 selects the whole taxonomy; an empty selection means no
    category reached theta.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must be in [0, 1]: {theta!r}")
    scores = {path: score_category(path, community, tax) for path in tax.paths}
    selected: dict[str, float] = {}
    for path, score in scores.items():
        if score >= theta:
            selected[path] = score
            for anc in ancestors(path):
                selected.setdefault(anc, scores[anc])
    return CommunityDirectory(community, dict(sorted(selected.items())), theta)


def directory_text(cdir: CommunityDirectory, tax: Taxonomy) -> str:
    """Indented deterministic text tree, one ``path  score`` line per category."""
    selected = cdir.selected
    lines = [f"{'  ' * d}{path}  {selected[path]:.6f}"
             for path, d in tax.walk() if path in selected]
    return "\n".join(lines) + ("\n" if lines else "")


def directory_doc(cdir: CommunityDirectory, tax: Taxonomy) -> dict:
    """JSON-ready document: members, theta, and the scored category tree."""
    selected = cdir.selected
    kids = tax.children_map

    def node(path: str) -> dict:
        return {
            "path": path,
            "score": selected[path],
            "children": [node(c) for c in kids[path] if c in selected],
        }

    return {
        "members": list(cdir.community.members),
        "theta": cdir.theta,
        "total_hits": cdir.community.total,
        "tree": node(ROOT) if selected else None,
    }
