"""Pipeline stages. Each reads its inputs from disk and writes its artifacts.

Stages communicate only through files in the output directory, so any one
of them can be rerun on its own.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from fnmatch import fnmatch
from pathlib import Path
from typing import Sequence

from codelineage import artifacts, baseline, copyright, forks, names, selection, similarity, solidity
from codelineage.corpus import (
    CorpusIndex,
    Project,
    dumps_index,
    file_extension,
    index_corpus,
    index_from_json,
    iter_tree,
    load_commit_log,
    load_extension_table,
    load_manifest,
)
from codelineage.edges import DerivationEdge, METHODS, dumps_edges, edges_csv, loads_edges
from codelineage.errors import DataError, PrerequisiteError

log = logging.getLogger(__name__)

INDEX_FILE = "index.json"
SELECTION_FILE = "selection.csv"


@dataclass
class RunConfig:
    manifest: Path | None = None
    out_dir: Path = Path("out")
    threshold: float = similarity.DEFAULT_THRESHOLD
    interval_days: int = baseline.DEFAULT_INTERVAL_DAYS
    reference_time: datetime | None = None
    extensions: Path | None = None
    exclusions: Path | None = None
    overrides: Path | None = None
    stoplist: Path | None = None
    aliases: Path | None = None
    authors: Path | None = None
    library_authors: Path | None = None
    jobs: int = 1
    all_repos: bool = False
    baseline_versions: Path | None = None
    baseline_history: Path | None = None
    baseline_trees: Path | None = None
    baseline_start: datetime | None = None
    bands: tuple[float, ...] = baseline.DEFAULT_BANDS
    contains: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if not 0 <= self.threshold < 1:
            raise DataError("threshold must lie in [0, 1)")
        if self.interval_days < 1:
            raise DataError("interval_days must be at least 1")
        if self.jobs < 1:
            raise DataError("jobs must be at least 1")

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def projects(self) -> list[Project]:
        if self.manifest is None:
            raise DataError("this stage needs --manifest")
        return load_manifest(self.manifest)

    def extension_table(self) -> dict[str, str]:
        return load_extension_table(self.extensions)


def _load_index(cfg: RunConfig) -> CorpusIndex:
    path = artifacts.require(cfg.path(INDEX_FILE), "index")
    return index_from_json(artifacts.read_json(path))


def repo_scope(cfg: RunConfig) -> tuple[dict[str, list[str]] | None, str]:
    """Selected repositories per project, or ``None`` for all of them."""
    sel = cfg.path(SELECTION_FILE)
    if cfg.all_repos or not sel.exists():
        return None, "all"
    return selection.parse_selection_csv(artifacts.read_csv(sel)), "selected"


def _scoped_repo_ids(projects: Sequence[Project], scope: dict[str, list[str]] | None) -> list[str]:
    if scope is None:
        return [r.repo_id for p in projects for r in p.repositories]
    return [rid for p in projects for rid in scope.get(p.project_id, ())]


def _write_edges(cfg: RunConfig, method: str, edges: Sequence[DerivationEdge]) -> list[Path]:
    return [
        artifacts.write_text(cfg.path(f"edges_{method}.json"), dumps_edges(edges, method)),
        artifacts.write_text(cfg.path(f"edges_{method}.csv"), edges_csv(edges)),
    ]


# ----------------------------------------------------------------- stages


def run_index(cfg: RunConfig) -> list[Path]:
    index = index_corpus(cfg.projects(), cfg.extension_table(), cfg.jobs)
    for rid, skipped in index.skipped.items():
        log.warning("%s: %d unreadable files skipped", rid, len(skipped))
    return [artifacts.write_text(cfg.path(INDEX_FILE), dumps_index(index))]


def run_select(cfg: RunConfig) -> list[Path]:
    projects = cfg.projects()
    ref = cfg.reference_time or selection.default_reference_time(projects)
    rows = selection.select_corpus(
        projects,
        ref,
        selection.ExclusionList.load(cfg.exclusions),
        selection.Overrides.load(cfg.overrides) if cfg.overrides else None,
    )
    header, body = selection.selection_rows_csv(rows)
    return [artifacts.write_csv(cfg.path(SELECTION_FILE), header, body)]


def run_derive_name(cfg: RunConfig) -> list[Path]:
    edges = names.detect_name_derivations(cfg.projects(), names.load_stoplist(cfg.stoplist))
    return _write_edges(cfg, "name", edges)


def run_derive_commit(cfg: RunConfig) -> list[Path]:
    projects = cfg.projects()
    scope, _ = repo_scope(cfg)
    index = forks.index_commits(projects, _scoped_repo_ids(projects, scope))
    return _write_edges(cfg, "commit", forks.detect_fork_derivations(index))


def run_derive_copyright(cfg: RunConfig) -> list[Path]:
    projects = cfg.projects()
    scope, _ = repo_scope(cfg)
    wanted = set(_scoped_repo_ids(projects, scope))
    table = cfg.extension_table()
    maps = copyright.ResolutionMaps.load(cfg.aliases, cfg.authors, cfg.library_authors)
    resolver = copyright.Resolver(projects, maps)
    repos = [r for p in projects for r in p.repositories if r.repo_id in wanted]
    attributions = {r.repo_id: copyright.extract_attributions(r, table) for r in repos}
    edges = copyright.detect_copyright_derivations(projects, attributions, resolver)
    attr_rows = [
        (rid, a.source, a.path, resolver.resolve(a.raw_line) or "", a.raw_line)
        for rid in sorted(attributions)
        for a in attributions[rid]
    ]
    return _write_edges(cfg, "copyright", edges) + [
        artifacts.write_csv(
            cfg.path("attributions.csv"), ("repo_id", "source", "path", "resolved_project", "line"), attr_rows
        ),
        artifacts.write_csv(cfg.path("copyright_degree.csv"), ("project", "in_degree"), copyright.in_degree(edges)),
    ]


def run_similarity(cfg: RunConfig) -> list[Path]:
    index = _load_index(cfg)
    scope, scope_name = repo_scope(cfg)
    keys = similarity.project_keys(index, scope)
    scores = similarity.pairwise_scores(keys, cfg.jobs)
    graph = similarity.build_similarity_graph(index, cfg.threshold, scope, scores=scores)
    stats = similarity.component_stats(graph)
    comp_rows = [
        (i, len(c.nodes), c.edge_count, c.mean_score, ";".join(c.nodes)) for i, c in enumerate(stats, 1)
    ]
    degree_rows = [
        (i, n, c.in_degree[n], c.out_degree[n], c.degree[n])
        for i, c in enumerate(stats, 1)
        for n in c.nodes
    ]
    return _write_edges(cfg, "filehash", similarity.filehash_edges(graph)) + [
        artifacts.write_json(cfg.path("similarity.json"), similarity.graph_to_json(graph, index, scope_name)),
        artifacts.write_text(cfg.path("similarity.dot"), similarity.graph_to_dot(graph, index)),
        artifacts.write_csv(
            cfg.path("similarity_scores.csv"),
            ("source", "target", "matched_files", "total_files", "score"),
            ((s.source, s.target, s.matched_files, s.total_files, s.score) for s in scores),
        ),
        artifacts.write_csv(
            cfg.path("components.csv"), ("component", "nodes", "edges", "mean_score", "members"), comp_rows
        ),
        artifacts.write_csv(
            cfg.path("component_degrees.csv"), ("component", "project", "in_degree", "out_degree", "degree"), degree_rows
        ),
    ]


def _baseline_versions(cfg: RunConfig, table: dict[str, str]) -> list[baseline.BaselineVersion]:
    if cfg.baseline_versions is not None:
        doc = artifacts.read_json(cfg.baseline_versions)
        return baseline.versions_from_json(doc, table, cfg.baseline_versions.parent)
    if cfg.baseline_history is None or cfg.baseline_trees is None:
        raise PrerequisiteError("baseline needs --versions, or --history together with --trees")
    history = load_commit_log(cfg.baseline_history, "baseline")
    return baseline.snapshot_baseline(
        history,
        baseline.directory_tree_provider(cfg.baseline_trees),
        table,
        cfg.baseline_start,
        cfg.interval_days,
    )


def run_baseline(cfg: RunConfig) -> list[Path]:
    index = _load_index(cfg)
    scope, _ = repo_scope(cfg)
    versions = _baseline_versions(cfg, dict(index.extension_table))
    labels = [v.version_label for v in versions]
    matches = []
    for metric in baseline.METRICS:
        matches.extend(baseline.match_corpus(index, versions, metric, scope, cfg.jobs))
    matches.sort(key=lambda m: (m.project_id, m.metric))
    outputs = [
        artifacts.write_json(cfg.path("baseline_versions.json"), baseline.versions_to_json(versions, cfg.out_dir)),
        artifacts.write_csv(
            cfg.path("version_matches.csv"),
            ("project_id", "metric", "best_version", "best_score"),
            ((m.project_id, m.metric, m.best_version, m.best_score) for m in matches),
        ),
        artifacts.write_csv(
            cfg.path("version_scores.csv"),
            ("project_id", "metric", *[f"v{label}" for label in labels]),
            ((m.project_id, m.metric, *[s for _, s in m.per_version_scores]) for m in matches),
        ),
        artifacts.write_csv(
            cfg.path("version_histogram.csv"),
            ("metric", "min_score", "version", "projects"),
            baseline.version_histogram(matches, labels, cfg.bands),
        ),
    ]
    return outputs


def collect_contracts(projects: Sequence[Project], scope: dict[str, list[str]] | None) -> list[tuple[str, Path, str]]:
    """``(contract_id, path, origin)`` for manifest contracts and repository ``.sol`` files."""
    wanted = set(_scoped_repo_ids(projects, scope))
    out = []
    for p in projects:
        for i, c in enumerate(p.contract_sources):
            out.append((f"{p.project_id}:contract:{i}:{c.path.name}", c.path, c.origin))
        for r in p.repositories:
            if r.repo_id not in wanted or not Path(r.root_path).is_dir():
                continue
            for rel, full in sorted(iter_tree(Path(r.root_path))):
                if file_extension(full.name) == "sol":
                    out.append((f"{p.project_id}:{r.repo_id}:{rel}", full, "repository"))
    return out


def run_solidity(cfg: RunConfig) -> list[Path]:
    projects = cfg.projects()
    scope, _ = repo_scope(cfg)
    profiles = []
    for cid, path, origin in collect_contracts(projects, scope):
        if not path.is_file():
            raise DataError(f"contract source {path} not found")
        profiles.append(solidity.profile_file(path, cid, origin))
    outputs = [
        artifacts.write_json(
            cfg.path("contract_profiles.json"),
            {"schema": "codelineage.contracts", "version": 1, "contracts": [p.to_json() for p in profiles]},
        )
    ]
    diversity = []
    for origin in sorted({p.origin for p in profiles}):
        for feature in solidity.FEATURES:
            cdf = solidity.aggregate_cdf(profiles, feature, origin)
            rows = [
                (rank, value, count, round(pct, 4))
                for rank, ((value, count), pct) in enumerate(zip(cdf.ranked_counts, cdf.cumulative_pct), 1)
            ]
            outputs.append(
                artifacts.write_csv(
                    cfg.path(f"cdf_{feature}_{origin}.csv"), ("rank", "value", "count", "cumulative_pct"), rows
                )
            )
            diversity.append(
                (feature, origin, cdf.population, cdf.distinct_values, cdf.singleton_values, cdf.contracts_with_unique_value)
            )
    outputs.append(
        artifacts.write_csv(
            cfg.path("contract_diversity.csv"),
            ("feature", "origin", "contracts", "distinct_values", "singleton_values", "contracts_with_unique_value"),
            diversity,
        )
    )
    outputs.append(
        artifacts.write_csv(
            cfg.path("templates.csv"), ("template", "origin", "count", "pct"), solidity.template_counts(profiles)
        )
    )
    return outputs


def file_presence(index: CorpusIndex, pattern: str, scope: dict[str, list[str]] | None) -> list[tuple[str, int]]:
    """Projects with files whose relative path or basename matches ``pattern``."""
    out = []
    for pid in sorted(index.projects):
        files = index.project_files(pid, None if scope is None else scope.get(pid, ()))
        hits = sum(1 for f in files if fnmatch(f.rel_path, pattern) or fnmatch(f.rel_path.rsplit("/", 1)[-1], pattern))
        if hits:
            out.append((pid, hits))
    return out


def run_report(cfg: RunConfig) -> list[Path]:
    edges: list[DerivationEdge] = []
    found = []
    for method in METHODS:
        path = cfg.path(f"edges_{method}.json")
        if path.exists():
            found.append(method)
            edges.extend(loads_edges(path.read_text("utf-8")))
    if not found:
        raise PrerequisiteError(f"no edge files in {cfg.out_dir}; run a derive-* or similarity stage first")
    edges.sort(key=lambda e: (e.source, e.target, METHODS.index(e.method)))
    if cfg.manifest is not None:
        projects = {p.project_id: p for p in cfg.projects()}
    elif cfg.path(INDEX_FILE).exists():
        projects = dict(_load_index(cfg).projects)
    else:
        projects = {}
    ids = sorted(set(projects) | {e.source for e in edges} | {e.target for e in edges})
    rows = []
    for pid in ids:
        p = projects.get(pid)
        row: list[object] = [pid, p.name if p else "", p.kind if p else "", (p.category or "") if p else ""]
        for method in METHODS:
            row.append(";".join(sorted(e.target for e in edges if e.source == pid and e.method == method)))
        for method in METHODS:
            row.append(sum(1 for e in edges if e.target == pid and e.method == method))
        rows.append(row)
    header = (
        "project_id", "name", "kind", "category",
        *[f"{m}_targets" for m in METHODS],
        *[f"{m}_in_degree" for m in METHODS],
    )
    outputs = [
        artifacts.write_text(cfg.path("derivations.json"), dumps_edges(edges)),
        artifacts.write_text(cfg.path("derivations.csv"), edges_csv(edges)),
        artifacts.write_csv(cfg.path("project_summary.csv"), header, rows),
    ]
    if cfg.contains:
        index = _load_index(cfg)
        scope, _ = repo_scope(cfg)
        presence = [(pat, pid, n) for pat in cfg.contains for pid, n in file_presence(index, pat, scope)]
        outputs.append(artifacts.write_csv(cfg.path("presence.csv"), ("pattern", "project_id", "files"), presence))
    return outputs


STAGES = {
    "index": run_index,
    "select": run_select,
    "derive-name": run_derive_name,
    "derive-commit": run_derive_commit,
    "derive-copyright": run_derive_copyright,
    "similarity": run_similarity,
    "baseline": run_baseline,
    "solidity": run_solidity,
    "report": run_report,
}


def run_pipeline(cfg: RunConfig) -> list[Path]:
    outputs = []
    for name, stage in STAGES.items():
        if name == "baseline" and cfg.baseline_versions is None and cfg.baseline_history is None:
            log.info("skipping baseline: no baseline configured")
            continue
        outputs.extend(stage(cfg))
    return outputs
