"""Dated snapshots of a reference codebase and best-version assignment."""
from __future__ import annotations

import bisect
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from codelineage.corpus import (
    CommitRecord,
    CorpusIndex,
    file_extension,
    format_timestamp,
    hash_path,
    iter_tree,
    parse_timestamp,
)
from codelineage.errors import DataError
from codelineage.similarity import OverlapEngine, content_key, path_key

DEFAULT_INTERVAL_DAYS = 183
DEFAULT_BANDS = (0.3, 0.5, 0.7)
METRICS = ("hash", "dir")
VERSIONS_SCHEMA = "codelineage.baseline-versions"
VERSIONS_VERSION = 1


@dataclass(frozen=True)
class BaselineVersion:
    version_label: int
    snapshot_time: datetime
    commit_hash: str
    file_hashes: frozenset[str]
    file_paths: frozenset[str]
    path: Path | None = None
    file_count: int = 0


@dataclass(frozen=True)
class VersionMatch:
    project_id: str
    metric: str
    best_version: int
    best_score: float
    per_version_scores: tuple[tuple[int, float], ...]


def directory_tree_provider(root: str | Path) -> Callable[[str], Path]:
    """Trees pre-materialized as ``<root>/<commit_hash>/``."""
    base = Path(root)

    def provide(commit_hash: str) -> Path:
        tree = base / commit_hash
        if not tree.is_dir():
            raise DataError(f"no materialized tree for commit {commit_hash} under {base}")
        return tree

    return provide


def tree_signature(tree: Path, extension_table: Mapping[str, str]) -> tuple[frozenset[str], frozenset[str], int]:
    hashes, paths = set(), set()
    count = 0
    for rel, full in iter_tree(tree):
        if file_extension(full.name) not in extension_table:
            continue
        hashes.add(hash_path(full))
        paths.add(rel)
        count += 1
    return frozenset(hashes), frozenset(paths), count


def snapshot_grid(
    history: Sequence[CommitRecord], start_time: datetime | None, interval_days: int
) -> list[tuple[datetime, CommitRecord]]:
    """``(grid_time, commit)`` per distinct snapshot, oldest first.

    Grid points run from ``start_time`` in steps of ``interval_days`` while
    they do not pass the last commit; each picks the latest commit at or
    before it. Points before the first commit are skipped and consecutive
    points picking the same commit collapse onto the first of them.
    """
    if not history:
        raise DataError("baseline history is empty")
    if interval_days < 1:
        raise DataError("interval_days must be at least 1")
    times = [c.committer_timestamp for c in history]
    if times != sorted(times):
        raise DataError("baseline history must be sorted by committer time")
    start = times[0] if start_time is None else start_time
    step = timedelta(days=interval_days)
    out: list[tuple[datetime, CommitRecord]] = []
    k = 0
    while (point := start + k * step) <= times[-1]:
        k += 1
        pos = bisect.bisect_right(times, point) - 1
        if pos < 0:
            continue
        commit = history[pos]
        if out and out[-1][1].commit_hash == commit.commit_hash:
            continue
        out.append((point, commit))
    if not out:
        raise DataError("no grid point falls within the baseline history")
    return out


def snapshot_baseline(
    history: Sequence[CommitRecord],
    tree_provider: Callable[[str], Path],
    extension_table: Mapping[str, str],
    start_time: datetime | None = None,
    interval_days: int = DEFAULT_INTERVAL_DAYS,
) -> list[BaselineVersion]:
    versions = []
    for label, (point, commit) in enumerate(snapshot_grid(history, start_time, interval_days), 1):
        tree = tree_provider(commit.commit_hash)
        hashes, paths, count = tree_signature(tree, extension_table)
        versions.append(BaselineVersion(label, point, commit.commit_hash, hashes, paths, tree, count))
    return versions


def versions_to_json(versions: Sequence[BaselineVersion], relative_to: Path | None = None) -> dict:
    def where(p: Path | None) -> str | None:
        if p is None:
            return None
        if relative_to is not None:
            try:
                return Path(p).resolve().relative_to(relative_to.resolve()).as_posix()
            except ValueError:
                pass
        return Path(p).as_posix()

    return {
        "schema": VERSIONS_SCHEMA,
        "version": VERSIONS_VERSION,
        "versions": [
            {
                "label": v.version_label,
                "time": format_timestamp(v.snapshot_time),
                "commit": v.commit_hash,
                "path": where(v.path),
                "files": v.file_count,
            }
            for v in versions
        ],
    }


def versions_from_json(doc: dict, extension_table: Mapping[str, str], base: Path) -> list[BaselineVersion]:
    from codelineage.artifacts import check_schema

    check_schema(doc, VERSIONS_SCHEMA, VERSIONS_VERSION)
    out = []
    for i, rec in enumerate(doc["versions"], 1):
        if rec["label"] != i:
            raise DataError("version labels must be consecutive from 1")
        tree = base / rec["path"]
        if not tree.is_dir():
            raise DataError(f"version {i}: tree {tree} not found")
        hashes, paths, count = tree_signature(tree, extension_table)
        out.append(BaselineVersion(i, parse_timestamp(rec["time"]), rec["commit"], hashes, paths, tree, count))
    return out


def _pick(project_id: str, metric: str, total: int, matched: Mapping[int, int], labels: Sequence[int]) -> VersionMatch:
    scores = tuple((label, matched.get(label, 0) / total) for label in labels)
    best_label, best = scores[0]
    for label, s in scores[1:]:
        if s > best:
            best_label, best = label, s
    return VersionMatch(project_id, metric, best_label, best, scores)


class VersionMatcher:
    """Scores projects against every baseline version with one metric."""

    def __init__(self, versions: Sequence[BaselineVersion], metric: str):
        if not versions:
            raise DataError("no baseline versions to match against")
        if metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        self.metric = metric
        self.labels = [v.version_label for v in versions]
        targets = {
            v.version_label: (v.file_hashes if metric == "hash" else v.file_paths) for v in versions
        }
        self._engine = OverlapEngine(targets)
        self._key = content_key if metric == "hash" else path_key

    def match_keys(self, project_id: str, keys: Iterable[str]) -> VersionMatch | None:
        total, matched = self._engine.counts(keys)
        if total == 0:
            return None
        return _pick(project_id, self.metric, total, matched, self.labels)

    def match(
        self, project_id: str, index: CorpusIndex, repo_scope: Mapping[str, Sequence[str]] | None = None
    ) -> VersionMatch | None:
        repos = None if repo_scope is None else repo_scope.get(project_id, ())
        return self.match_keys(project_id, (self._key(f) for f in index.project_files(project_id, repos)))


def match_to_versions(
    project_id: str,
    versions: Sequence[BaselineVersion],
    metric: str,
    index: CorpusIndex,
    repo_scope: Mapping[str, Sequence[str]] | None = None,
) -> VersionMatch | None:
    return VersionMatcher(versions, metric).match(project_id, index, repo_scope)


def match_corpus(
    index: CorpusIndex,
    versions: Sequence[BaselineVersion],
    metric: str,
    repo_scope: Mapping[str, Sequence[str]] | None = None,
    jobs: int = 1,
) -> list[VersionMatch]:
    matcher = VersionMatcher(versions, metric)
    pids = sorted(index.projects)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda p: matcher.match(p, index, repo_scope), pids))
    else:
        results = [matcher.match(p, index, repo_scope) for p in pids]
    return [m for m in results if m is not None]


def version_histogram(
    matches: Iterable[VersionMatch], labels: Sequence[int], bands: Sequence[float] = DEFAULT_BANDS
) -> list[tuple[str, float, int, int]]:
    """Rows ``(metric, band, version, count)``.

    ``count`` is the number of projects whose best version is ``version``
    with a best score of at least ``band``.
    """
    matches = list(matches)
    rows = []
    for metric in sorted({m.metric for m in matches}):
        for band in bands:
            for label in labels:
                n = sum(
                    1
                    for m in matches
                    if m.metric == metric and m.best_version == label and m.best_score >= band
                )
                rows.append((metric, band, label, n))
    return rows
