"""Rating repositories and choosing which ones represent a project."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from codelineage.corpus import Project, RepositorySnapshot
from codelineage.errors import DataError

SELECT_FRACTION = 0.2

NAME_EXACT_BONUS = 100
NAME_CONTAINS_BONUS = 50
TOKEN_NAME_BONUS = 50

_NON_ALNUM = re.compile(r"[^a-z0-9]+")


def normalize_name(name: str) -> str:
    """Lowercase ASCII letters and digits only."""
    return _NON_ALNUM.sub("", name.lower())


@dataclass(frozen=True)
class ExclusionList:
    literal_terms: tuple[str, ...] = ()
    patterns: tuple[str, ...] = ()
    exceptions: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        for term in self.literal_terms:
            if term != term.lower():
                raise DataError(f"exclusion term {term!r} must be lowercase")

    @classmethod
    def parse(cls, text: str) -> "ExclusionList":
        terms, patterns, exceptions = [], [], set()
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("re:"):
                re.compile(line[3:])
                patterns.append(line[3:])
            elif line.startswith("except:"):
                pid, _, repo = line[7:].partition(",")
                exceptions.add((pid.strip(), repo.strip().lower()))
            else:
                terms.append(line.lower())
        return cls(tuple(terms), tuple(patterns), frozenset(exceptions))

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ExclusionList":
        if path is None:
            text = resources.files("codelineage.data").joinpath("exclusions.txt").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        return cls.parse(text)


def is_excluded(repo_name: str, exclusions: ExclusionList, project_id: str | None = None) -> tuple[bool, str | None]:
    """Return ``(excluded, matched_term)`` for a repository name."""
    lowered = repo_name.lower()
    if project_id is not None and (project_id, lowered) in exclusions.exceptions:
        return False, None
    for term in exclusions.literal_terms:
        if term in lowered:
            return True, term
    for pattern in exclusions.patterns:
        if re.search(pattern, lowered):
            return True, "re:" + pattern
    return False, None


@dataclass(frozen=True)
class RelevanceBonus:
    exact: int = NAME_EXACT_BONUS
    contains: int = NAME_CONTAINS_BONUS
    token: int = TOKEN_NAME_BONUS


def relevance_bonus(repo_name: str, project: Project, bonus: RelevanceBonus = RelevanceBonus()) -> int:
    repo_norm = normalize_name(repo_name)
    proj_norm = normalize_name(project.name)
    if proj_norm and repo_norm == proj_norm:
        return bonus.exact
    if (proj_norm and proj_norm in repo_norm) or "core" in repo_norm:
        return bonus.contains
    if project.kind == "token" and ("token" in repo_norm or "contract" in repo_norm):
        return bonus.token
    return 0


@dataclass(frozen=True)
class RepoRating:
    repo_id: str
    repo_name: str
    staleness_weeks: int
    fork_count: int
    relevance_bonus: int
    excluded: bool
    excluded_by: str | None = None

    @property
    def score(self) -> int:
        return self.fork_count - self.staleness_weeks + self.relevance_bonus


def score_repository(
    repo: RepositorySnapshot,
    project: Project,
    reference_time: datetime,
    exclusions: ExclusionList | None = None,
    bonus: RelevanceBonus = RelevanceBonus(),
) -> RepoRating:
    if repo.last_update is None:
        raise DataError(f"repository {repo.repo_id!r} has no last_update")
    gap = reference_time - repo.last_update
    if gap < timedelta(0):
        raise DataError(f"repository {repo.repo_id!r} was updated after the reference time")
    excluded, term = (False, None)
    if exclusions is not None:
        excluded, term = is_excluded(repo.name, exclusions, project.project_id)
    return RepoRating(
        repo_id=repo.repo_id,
        repo_name=repo.name,
        staleness_weeks=gap.days // 7,
        fork_count=repo.fork_count,
        relevance_bonus=relevance_bonus(repo.name, project, bonus),
        excluded=excluded,
        excluded_by=term,
    )


def selection_size(n: int) -> int:
    return max(1, math.ceil(SELECT_FRACTION * n)) if n > 0 else 0


def rank_key(r: RepoRating):
    return (-r.score, -r.fork_count, r.repo_name, r.repo_id)


def select_repositories(ratings: Iterable[RepoRating]) -> list[str]:
    """Top ``max(1, ceil(0.2 N))`` of the N non-excluded ratings."""
    eligible = sorted((r for r in ratings if not r.excluded), key=rank_key)
    return [r.repo_id for r in eligible[: selection_size(len(eligible))]]


@dataclass
class Overrides:
    """Manual per-project adjustments applied after automatic selection."""

    pins: set[tuple[str, str]] = field(default_factory=set)
    bans: set[tuple[str, str]] = field(default_factory=set)

    @classmethod
    def load(cls, path: str | Path) -> "Overrides":
        ov = cls()
        for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3 or parts[2] not in ("pin", "ban"):
                raise DataError(f"overrides line {lineno}: expected project_id,repo_id,pin|ban")
            (ov.pins if parts[2] == "pin" else ov.bans).add((parts[0], parts[1]))
        return ov


@dataclass(frozen=True)
class SelectionRow:
    project_id: str
    rating: RepoRating
    selected: bool


def select_corpus(
    projects: Sequence[Project],
    reference_time: datetime,
    exclusions: ExclusionList,
    overrides: Overrides | None = None,
    bonus: RelevanceBonus = RelevanceBonus(),
) -> list[SelectionRow]:
    rows: list[SelectionRow] = []
    for project in projects:
        ratings = [
            score_repository(repo, project, reference_time, exclusions, bonus) for repo in project.repositories
        ]
        chosen = set(select_repositories(ratings))
        if overrides is not None:
            for pid, rid in overrides.pins:
                if pid == project.project_id:
                    chosen.add(rid)
            for pid, rid in overrides.bans:
                if pid == project.project_id:
                    chosen.discard(rid)
        for rating in sorted(ratings, key=rank_key):
            rows.append(SelectionRow(project.project_id, rating, rating.repo_id in chosen))
    return rows


def selected_repo_map(rows: Iterable[SelectionRow]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for row in rows:
        out.setdefault(row.project_id, [])
        if row.selected:
            out[row.project_id].append(row.rating.repo_id)
    return out


def default_reference_time(projects: Sequence[Project]) -> datetime:
    """Latest ``last_update`` in the corpus; keeps reruns reproducible."""
    times = [r.last_update for p in projects for r in p.repositories if r.last_update is not None]
    if not times:
        raise DataError("no repository carries a last_update; pass a reference time explicitly")
    return max(times)


def selection_rows_csv(rows: Sequence[SelectionRow]) -> tuple[tuple[str, ...], list[tuple]]:
    header = ("project_id", "repo_id", "score", "selected", "excluded_by")
    return header, [
        (r.project_id, r.rating.repo_id, r.rating.score, r.selected, r.rating.excluded_by or "") for r in rows
    ]


def parse_selection_csv(records: Iterable[Mapping[str, str]]) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for rec in records:
        out.setdefault(rec["project_id"], [])
        if rec["selected"] == "true":
            out[rec["project_id"]].append(rec["repo_id"])
    return out
