"""Git-fork derivations from commits shared between repositories."""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Mapping, Sequence

from codelineage.corpus import Project, RepositorySnapshot
from codelineage.edges import DerivationEdge
from codelineage.errors import DataError

AMBIGUOUS = "ambiguous-origin"


@dataclass(frozen=True)
class CommitIndex:
    commit_to_repos: Mapping[str, tuple[tuple[str, datetime], ...]]
    repo_to_project: Mapping[str, str]


def index_commits(projects: Sequence[Project], repo_ids: Iterable[str] | None = None) -> CommitIndex:
    """Map each commit hash to every repository containing it, oldest first.

    Repository age is its earliest committer timestamp; ties fall back to
    ``repo_id`` order.
    """
    wanted = None if repo_ids is None else set(repo_ids)
    repo_to_project: dict[str, str] = {}
    found: dict[str, list[tuple[str, datetime]]] = {}
    for project in projects:
        for repo in project.repositories:
            if wanted is not None and repo.repo_id not in wanted:
                continue
            repo_to_project[repo.repo_id] = project.project_id
            _add_repo(found, repo)
    return CommitIndex(
        commit_to_repos={
            h: tuple(sorted(set(locs), key=lambda loc: (loc[1], loc[0]))) for h, locs in sorted(found.items())
        },
        repo_to_project=repo_to_project,
    )


def _add_repo(found: dict[str, list[tuple[str, datetime]]], repo: RepositorySnapshot) -> None:
    created = repo.created_at
    for commit in repo.commit_log:
        if len(commit.commit_hash) != 40:
            raise DataError(f"{repo.repo_id}: malformed commit hash {commit.commit_hash!r}")
        found.setdefault(commit.commit_hash, []).append((repo.repo_id, created))


def detect_fork_derivations(index: CommitIndex) -> list[DerivationEdge]:
    witness: dict[tuple[str, str], str] = {}
    shared: dict[tuple[str, str], int] = {}
    ambiguous: set[tuple[str, str]] = set()
    for commit, repos in index.commit_to_repos.items():
        if len(repos) < 2:
            continue
        origin_repo, origin_time = repos[0]
        tie = repos[1][1] == origin_time
        origin = index.repo_to_project[origin_repo]
        derived = {index.repo_to_project[rid] for rid, _ in repos[1:]} - {origin}
        for source in derived:
            key = (source, origin)
            shared[key] = shared.get(key, 0) + 1
            if key not in witness or commit < witness[key]:
                witness[key] = commit
            if tie:
                ambiguous.add(key)
    edges = []
    for key in sorted(shared):
        evidence = (witness[key], AMBIGUOUS) if key in ambiguous else (witness[key],)
        edges.append(DerivationEdge(key[0], key[1], "commit", evidence, shared[key]))
    return edges
