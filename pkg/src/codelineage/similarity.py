"""File-overlap similarity between projects and the thresholded graph.

``S_hash(A, B)`` is the fraction of A's source files that have a
byte-identical file somewhere in B; ``S_dir`` is the same with relative
paths in place of content. Both are asymmetric and count files, not
distinct contents, on the source side.
"""
from __future__ import annotations

from array import array
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import networkx as nx

from codelineage import kernels
from codelineage.corpus import CorpusIndex, SourceFile
from codelineage.edges import DerivationEdge

DEFAULT_THRESHOLD = 0.7
GRAPH_SCHEMA = "codelineage.similarity"
GRAPH_VERSION = 1


@dataclass(frozen=True)
class SimilarityScore:
    source: str
    target: str
    matched_files: int
    total_files: int

    @property
    def score(self) -> float | None:
        if self.total_files == 0:
            return None
        return self.matched_files / self.total_files


def content_key(f: SourceFile) -> str:
    return f.content_hash


def path_key(f: SourceFile) -> str:
    return f.rel_path


def project_keys(
    index: CorpusIndex,
    repo_scope: Mapping[str, Sequence[str]] | None = None,
    key: Callable[[SourceFile], Hashable] = content_key,
) -> dict[str, list[Hashable]]:
    """Per-project list of file keys (one entry per file occurrence)."""
    out = {}
    for pid in sorted(index.projects):
        repos = None if repo_scope is None else repo_scope.get(pid, ())
        out[pid] = [key(f) for f in index.project_files(pid, repos)]
    return out


def s_hash_project(
    c1: str,
    c2: str,
    index: CorpusIndex,
    repo_scope: Mapping[str, Sequence[str]] | None = None,
    key: Callable[[SourceFile], Hashable] = content_key,
) -> SimilarityScore | None:
    """Direct single-pair evaluation; ``None`` when either side has no files."""
    scope = (lambda pid: None) if repo_scope is None else (lambda pid: repo_scope.get(pid, ()))
    src = index.project_files(c1, scope(c1))
    dst = index.project_files(c2, scope(c2))
    if not src or not dst:
        return None
    targets = {key(f) for f in dst}
    matched = sum(1 for f in src if key(f) in targets)
    return SimilarityScore(c1, c2, matched, len(src))


def s_dir_project(
    c1: str,
    index: CorpusIndex,
    target_paths: Iterable[str],
    repo_scope: Mapping[str, Sequence[str]] | None = None,
) -> float | None:
    files = index.project_files(c1, None if repo_scope is None else repo_scope.get(c1, ()))
    if not files:
        return None
    paths = set(target_paths)
    return sum(1 for f in files if f.rel_path in paths) / len(files)


class OverlapEngine:
    """Counts, for every source, how many of its files occur in each target.

    Keys are interned to integers and an inverted key -> targets table is
    laid out in CSR form, so a source only touches targets it shares at
    least one key with.
    """

    def __init__(self, targets: Mapping[str, Iterable[Hashable]]):
        self.target_ids = sorted(targets)
        self._key_id: dict[Hashable, int] = {}
        postings: list[list[int]] = []
        for t_idx, tid in enumerate(self.target_ids):
            for k in set(targets[tid]):
                kid = self._key_id.get(k)
                if kid is None:
                    kid = self._key_id[k] = len(postings)
                    postings.append([])
                postings[kid].append(t_idx)
        indptr = array("q", [0])
        indices = array("q")
        for plist in postings:
            plist.sort()
            indices.extend(plist)
            indptr.append(len(indices))
        self._indptr = indptr
        self._indices = indices

    def counts(self, keys: Iterable[Hashable]) -> tuple[int, dict[str, int]]:
        """Return ``(total_files, {target: matched_files})`` for one source."""
        tally = Counter(keys)
        total = sum(tally.values())
        ids = array("q")
        cnts = array("q")
        for k, c in tally.items():
            kid = self._key_id.get(k)
            if kid is not None:
                ids.append(kid)
                cnts.append(c)
        out = array("q", bytes(8 * len(self.target_ids)))
        kernels.accumulate_matches(ids, cnts, self._indptr, self._indices, out)
        return total, {self.target_ids[i]: v for i, v in enumerate(out) if v}


def pairwise_scores(
    keys: Mapping[str, Sequence[Hashable]], jobs: int = 1
) -> list[SimilarityScore]:
    """All ordered pairs ``(A, B)``, ``A != B``, sharing at least one key.

    Pairs that share nothing have score 0 and are omitted.
    """
    engine = OverlapEngine(keys)
    sources = [s for s in sorted(keys) if keys[s]]

    def one(src: str) -> list[SimilarityScore]:
        total, matched = engine.counts(keys[src])
        return [
            SimilarityScore(src, tgt, m, total) for tgt, m in sorted(matched.items()) if tgt != src
        ]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(one, sources))
    else:
        chunks = [one(s) for s in sources]
    return [s for chunk in chunks for s in chunk]


@dataclass
class SimilarityGraph:
    threshold: float
    edges: list[SimilarityScore]
    scored_nodes: list[str]
    components: list[list[str]] = field(default_factory=list)

    @property
    def nodes(self) -> list[str]:
        return sorted({e.source for e in self.edges} | {e.target for e in self.edges})


def build_similarity_graph(
    index: CorpusIndex,
    threshold: float = DEFAULT_THRESHOLD,
    repo_scope: Mapping[str, Sequence[str]] | None = None,
    jobs: int = 1,
    scores: Sequence[SimilarityScore] | None = None,
) -> SimilarityGraph:
    if not 0 <= threshold < 1:
        raise ValueError("threshold must lie in [0, 1)")
    keys = project_keys(index, repo_scope)
    if scores is None:
        scores = pairwise_scores(keys, jobs)
    edges = [s for s in scores if s.score is not None and s.score > threshold]
    graph = SimilarityGraph(threshold, edges, [p for p in sorted(keys) if keys[p]])
    graph.components = connected_components(edges)
    return graph


def connected_components(edges: Iterable[SimilarityScore]) -> list[list[str]]:
    g = nx.Graph()
    g.add_edges_from((e.source, e.target) for e in edges)
    comps = [sorted(c) for c in nx.connected_components(g)]
    comps.sort(key=lambda c: (-len(c), c[0]))
    return comps


@dataclass(frozen=True)
class ComponentSummary:
    nodes: tuple[str, ...]
    edge_count: int
    degree: Mapping[str, int]
    in_degree: Mapping[str, int]
    out_degree: Mapping[str, int]
    mean_score: float


def component_stats(graph: SimilarityGraph) -> list[ComponentSummary]:
    member = {n: i for i, comp in enumerate(graph.components) for n in comp}
    per: list[list[SimilarityScore]] = [[] for _ in graph.components]
    for e in graph.edges:
        per[member[e.source]].append(e)
    out = []
    for comp, edges in zip(graph.components, per):
        indeg = {n: 0 for n in comp}
        outdeg = {n: 0 for n in comp}
        for e in edges:
            outdeg[e.source] += 1
            indeg[e.target] += 1
        out.append(
            ComponentSummary(
                nodes=tuple(comp),
                edge_count=len(edges),
                degree={n: indeg[n] + outdeg[n] for n in comp},
                in_degree=indeg,
                out_degree=outdeg,
                mean_score=sum(e.score for e in edges) / len(edges),
            )
        )
    return out


def filehash_edges(graph: SimilarityGraph) -> list[DerivationEdge]:
    return [
        DerivationEdge(e.source, e.target, "filehash", (f"{e.matched_files}/{e.total_files}",), e.score)
        for e in sorted(graph.edges, key=lambda e: (e.source, e.target))
    ]


def graph_to_json(graph: SimilarityGraph, index: CorpusIndex, repo_scope: str) -> dict:
    return {
        "schema": GRAPH_SCHEMA,
        "version": GRAPH_VERSION,
        "threshold": graph.threshold,
        "repo_scope": repo_scope,
        "nodes": [
            {"id": n, "name": index.projects[n].name, "category": index.projects[n].category}
            for n in graph.nodes
        ],
        "edges": [
            {"source": e.source, "target": e.target, "score": e.score}
            for e in sorted(graph.edges, key=lambda e: (e.source, e.target))
        ],
        "components": graph.components,
        "scored_projects": len(graph.scored_nodes),
        "isolated_projects": len(set(graph.scored_nodes) - set(graph.nodes)),
    }


def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(graph: SimilarityGraph, index: CorpusIndex) -> str:
    lines = ["digraph similarity {"]
    for n in graph.nodes:
        p = index.projects[n]
        attrs = f"label={_dot_id(p.name)}"
        if p.category:
            attrs += f", category={_dot_id(p.category)}"
        lines.append(f"  {_dot_id(n)} [{attrs}];")
    for e in sorted(graph.edges, key=lambda e: (e.source, e.target)):
        lines.append(f"  {_dot_id(e.source)} -> {_dot_id(e.target)} [weight={e.score!r}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
