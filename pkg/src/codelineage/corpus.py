"""Corpus data model, manifest loading, and the content-hash index."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import stat
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from codelineage.errors import DataError, ManifestError

log = logging.getLogger(__name__)

INDEX_SCHEMA = "codelineage.index"
INDEX_VERSION = 1

KINDS = ("coin", "token")
ORIGINS = ("deployed", "repository")

_HEX40 = re.compile(r"[0-9a-f]{40}")
_CHUNK = 1 << 20


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 string into an aware UTC datetime.

    Naive values are taken to be UTC already.
    """
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class CommitRecord:
    commit_hash: str
    committer_timestamp: datetime

    def __post_init__(self):
        if not _HEX40.fullmatch(self.commit_hash):
            raise DataError(f"commit hash must be 40 lowercase hex characters: {self.commit_hash!r}")


@dataclass(frozen=True)
class RepositorySnapshot:
    repo_id: str
    name: str
    root_path: Path
    fork_count: int = 0
    last_update: datetime | None = None
    commit_log: tuple[CommitRecord, ...] = ()
    created: datetime | None = None

    @property
    def created_at(self) -> datetime | None:
        """Explicit creation time if known, else the earliest commit time.

        Forks carry their origin's full history, so only an explicit
        creation date separates a fork from the repository it copied.
        """
        if self.created is not None:
            return self.created
        if not self.commit_log:
            return None
        return self.commit_log[0].committer_timestamp


@dataclass(frozen=True)
class ContractSource:
    path: Path
    origin: str = "deployed"


@dataclass(frozen=True)
class Project:
    project_id: str
    name: str
    symbol: str = ""
    kind: str = "coin"
    category: str | None = None
    repositories: tuple[RepositorySnapshot, ...] = ()
    contract_sources: tuple[ContractSource, ...] = ()

    def validate(self) -> None:
        if not self.project_id:
            raise DataError("project_id must be non-empty")
        if not self.name or not self.name.strip():
            raise DataError(f"project {self.project_id!r}: name must be non-empty")
        if self.kind not in KINDS:
            raise DataError(f"project {self.project_id!r}: kind must be one of {KINDS}")
        if self.kind == "token" and not self.repositories and not self.contract_sources:
            raise DataError(
                f"project {self.project_id!r}: a token without repositories needs a contract source"
            )


@dataclass(frozen=True)
class SourceFile:
    repo_id: str
    rel_path: str
    language: str
    content_hash: str
    byte_size: int


@dataclass
class RepoScan:
    """Result of enumerating one repository's working tree."""

    repo_id: str
    files: list[SourceFile] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class CorpusIndex:
    projects: Mapping[str, Project]
    files: Mapping[str, tuple[SourceFile, ...]]
    hash_to_files: Mapping[str, tuple[tuple[str, str], ...]]
    extension_table: Mapping[str, str]
    skipped: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def repo_owner(self) -> dict[str, str]:
        return {
            repo.repo_id: pid for pid, p in self.projects.items() for repo in p.repositories
        }

    def project_files(self, project_id: str, repo_ids: Iterable[str] | None = None) -> list[SourceFile]:
        """Source files of a project, optionally restricted to ``repo_ids``."""
        project = self.projects[project_id]
        wanted = None if repo_ids is None else set(repo_ids)
        out: list[SourceFile] = []
        for repo in project.repositories:
            if wanted is not None and repo.repo_id not in wanted:
                continue
            out.extend(self.files.get(repo.repo_id, ()))
        return out


# ----------------------------------------------------------------- loading


def load_commit_log(path: Path, repo_id: str = "") -> tuple[CommitRecord, ...]:
    """Read ``<hash> <timestamp>`` lines; result sorted by committer time."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(None, 1)
            if len(parts) != 2 or not _HEX40.fullmatch(parts[0]):
                raise DataError(f"{repo_id or path}: commit log line {lineno}: malformed entry {line!r}")
            try:
                ts = parse_timestamp(parts[1])
            except ValueError as exc:
                raise DataError(f"{repo_id or path}: commit log line {lineno}: bad timestamp") from exc
            records.append(CommitRecord(parts[0], ts))
    records.sort(key=lambda r: r.committer_timestamp)
    return tuple(records)


def _require(record: dict, key: str, lineno: int, kind: type = str):
    if key not in record:
        raise ManifestError("missing required field", lineno, key)
    value = record[key]
    if not isinstance(value, kind):
        raise ManifestError(f"expected {kind.__name__}", lineno, key)
    return value


def _parse_repo(raw: object, base: Path, lineno: int) -> RepositorySnapshot:
    if not isinstance(raw, dict):
        raise ManifestError("repository entry must be an object", lineno, "repos")
    repo_id = _require(raw, "repo_id", lineno)
    path = _require(raw, "path", lineno)
    fork_count = raw.get("fork_count", 0)
    if not isinstance(fork_count, int) or isinstance(fork_count, bool) or fork_count < 0:
        raise ManifestError("must be a non-negative integer", lineno, "fork_count")
    last_update = None
    if raw.get("last_update") is not None:
        try:
            last_update = parse_timestamp(str(raw["last_update"]))
        except ValueError as exc:
            raise ManifestError("not an ISO-8601 timestamp", lineno, "last_update") from exc
    created = None
    if raw.get("created_at") is not None:
        try:
            created = parse_timestamp(str(raw["created_at"]))
        except ValueError as exc:
            raise ManifestError("not an ISO-8601 timestamp", lineno, "created_at") from exc
    commits: tuple[CommitRecord, ...] = ()
    if raw.get("commit_log_path"):
        log_path = base / raw["commit_log_path"]
        if not log_path.is_file():
            raise ManifestError(f"commit log not found: {log_path}", lineno, "commit_log_path")
        commits = load_commit_log(log_path, repo_id)
    return RepositorySnapshot(
        repo_id=repo_id,
        name=str(raw.get("name") or Path(path).name or repo_id),
        root_path=base / path,
        fork_count=fork_count,
        last_update=last_update,
        commit_log=commits,
        created=created,
    )


def _parse_contract(raw: object, base: Path, lineno: int) -> ContractSource:
    if isinstance(raw, str):
        return ContractSource(base / raw)
    if isinstance(raw, dict) and isinstance(raw.get("path"), str):
        origin = raw.get("origin", "deployed")
        if origin not in ORIGINS:
            raise ManifestError(f"origin must be one of {ORIGINS}", lineno, "contracts")
        return ContractSource(base / raw["path"], origin)
    raise ManifestError("contract entry must be a path or {path, origin}", lineno, "contracts")


def load_manifest(path: str | os.PathLike) -> list[Project]:
    """Load a JSON Lines project manifest.

    Relative repository, commit-log and contract paths are resolved against
    the manifest's directory.
    """
    path = Path(path)
    base = path.parent
    projects: list[Project] = []
    seen: set[str] = set()
    seen_repos: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"invalid JSON ({exc.msg})", lineno) from exc
            if not isinstance(record, dict):
                raise ManifestError("record must be a JSON object", lineno)
            pid = _require(record, "id", lineno)
            name = _require(record, "name", lineno)
            if pid in seen:
                raise ManifestError(f"duplicate project id {pid!r}", lineno, "id")
            seen.add(pid)
            repos = tuple(_parse_repo(r, base, lineno) for r in record.get("repos") or [])
            for repo in repos:
                if repo.repo_id in seen_repos:
                    raise ManifestError(f"duplicate repo_id {repo.repo_id!r}", lineno, "repos")
                seen_repos.add(repo.repo_id)
            project = Project(
                project_id=pid,
                name=name,
                symbol=str(record.get("symbol") or ""),
                kind=record.get("kind", "coin"),
                category=record.get("category"),
                repositories=repos,
                contract_sources=tuple(
                    _parse_contract(c, base, lineno) for c in record.get("contracts") or []
                ),
            )
            try:
                project.validate()
            except DataError as exc:
                raise ManifestError(str(exc), lineno) from exc
            projects.append(project)
    return projects


def load_extension_table(path: str | os.PathLike | None = None) -> dict[str, str]:
    """Read an ``extension<TAB>language`` table; the shipped one by default."""
    if path is None:
        text = resources.files("codelineage.data").joinpath("extensions.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    table: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t") if "\t" in line else line.split(None, 1)
        if len(parts) != 2:
            raise DataError(f"extension table line {lineno}: expected two columns")
        ext = parts[0].strip().lstrip(".").lower()
        table[ext] = parts[1].strip()
    return table


# ----------------------------------------------------------------- hashing


def hash_file(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def hash_path(path: str | os.PathLike) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while chunk := fh.read(_CHUNK):
            h.update(chunk)
    return h.hexdigest()


def file_extension(name: str) -> str:
    return os.path.splitext(name)[1][1:].lower()


def iter_tree(root: Path) -> Iterable[tuple[str, Path]]:
    """Yield ``(rel_path, path)`` for regular files below ``root``.

    ``.git`` directories are pruned and symbolic links are never followed.
    """
    for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
        dirnames[:] = [d for d in dirnames if d != ".git"]
        for name in filenames:
            full = Path(dirpath) / name
            try:
                st = os.lstat(full)
            except OSError:
                continue
            if not stat.S_ISREG(st.st_mode):
                continue
            yield full.relative_to(root).as_posix(), full


def classify_source_files(repo: RepositorySnapshot, extension_table: Mapping[str, str]) -> RepoScan:
    root = Path(repo.root_path)
    if not root.is_dir() or not os.access(root, os.R_OK | os.X_OK):
        raise DataError(f"repository {repo.repo_id!r}: cannot read {root}")
    scan = RepoScan(repo.repo_id)
    for rel, full in iter_tree(root):
        language = extension_table.get(file_extension(full.name))
        if language is None:
            continue
        try:
            digest = hash_path(full)
            size = full.stat().st_size
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", full, exc)
            scan.skipped.append(rel)
            continue
        scan.files.append(SourceFile(repo.repo_id, rel, language, digest, size))
    scan.files.sort(key=lambda f: f.rel_path)
    scan.skipped.sort()
    return scan


def scan_corpus(
    projects: Sequence[Project], extension_table: Mapping[str, str], jobs: int = 1
) -> dict[str, RepoScan]:
    repos = [repo for p in projects for repo in p.repositories]
    if jobs <= 1:
        scans = [classify_source_files(r, extension_table) for r in repos]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scans = list(pool.map(lambda r: classify_source_files(r, extension_table), repos))
    return {s.repo_id: s for s in scans}


def build_corpus_index(
    projects: Sequence[Project],
    files: Mapping[str, Sequence[SourceFile]],
    extension_table: Mapping[str, str],
    skipped: Mapping[str, Sequence[str]] | None = None,
) -> CorpusIndex:
    by_id: dict[str, Project] = {}
    per_repo: dict[str, tuple[SourceFile, ...]] = {}
    inverted: dict[str, list[tuple[str, str]]] = {}
    for project in projects:
        by_id[project.project_id] = project
        for repo in project.repositories:
            if repo.repo_id not in files:
                raise DataError(
                    f"repository {repo.repo_id!r} of project {project.project_id!r} was not enumerated"
                )
            listing = tuple(sorted(files[repo.repo_id], key=lambda f: f.rel_path))
            per_repo[repo.repo_id] = listing
            for f in listing:
                inverted.setdefault(f.content_hash, []).append((f.repo_id, f.rel_path))
    for ext in extension_table:
        if ext != ext.lower():
            raise DataError(f"extension table key {ext!r} is not lowercase")
    return CorpusIndex(
        projects=by_id,
        files=per_repo,
        hash_to_files={h: tuple(sorted(locs)) for h, locs in sorted(inverted.items())},
        extension_table=dict(sorted(extension_table.items())),
        skipped={k: tuple(v) for k, v in sorted((skipped or {}).items()) if v},
    )


def index_corpus(
    projects: Sequence[Project], extension_table: Mapping[str, str] | None = None, jobs: int = 1
) -> CorpusIndex:
    table = load_extension_table() if extension_table is None else extension_table
    scans = scan_corpus(projects, table, jobs)
    return build_corpus_index(
        projects,
        {rid: s.files for rid, s in scans.items()},
        table,
        {rid: s.skipped for rid, s in scans.items()},
    )


# ----------------------------------------------------------- serialization


def _project_to_json(p: Project) -> dict:
    return {
        "id": p.project_id,
        "name": p.name,
        "symbol": p.symbol,
        "kind": p.kind,
        "category": p.category,
        "repos": [
            {
                "repo_id": r.repo_id,
                "name": r.name,
                "fork_count": r.fork_count,
                "last_update": format_timestamp(r.last_update) if r.last_update else None,
                "created_at": format_timestamp(r.created_at) if r.created_at else None,
            }
            for r in p.repositories
        ],
    }


def index_to_json(index: CorpusIndex) -> dict:
    return {
        "schema": INDEX_SCHEMA,
        "version": INDEX_VERSION,
        "projects": [_project_to_json(p) for p in index.projects.values()],
        "extension_table": dict(index.extension_table),
        "files": {
            rid: [
                {"path": f.rel_path, "language": f.language, "sha256": f.content_hash, "size": f.byte_size}
                for f in listing
            ]
            for rid, listing in sorted(index.files.items())
        },
        "hash_to_files": {h: [list(loc) for loc in locs] for h, locs in index.hash_to_files.items()},
        "skipped": {rid: list(v) for rid, v in index.skipped.items()},
    }


def dumps_index(index: CorpusIndex) -> str:
    return json.dumps(index_to_json(index), indent=1, sort_keys=True) + "\n"


def index_from_json(doc: dict, projects: Sequence[Project] | None = None) -> CorpusIndex:
    """Rebuild an index from its JSON form.

    When ``projects`` is given (from the manifest) it supplies paths and
    commit logs; otherwise the project records embedded in the document are
    used and repository paths are left empty.
    """
    from codelineage.artifacts import check_schema

    check_schema(doc, INDEX_SCHEMA, INDEX_VERSION)
    if projects is None:
        projects = [
            Project(
                project_id=p["id"],
                name=p["name"],
                symbol=p.get("symbol") or "",
                kind=p.get("kind", "coin"),
                category=p.get("category"),
                repositories=tuple(
                    RepositorySnapshot(
                        repo_id=r["repo_id"],
                        name=r["name"],
                        root_path=Path(),
                        fork_count=r["fork_count"],
                        last_update=parse_timestamp(r["last_update"]) if r.get("last_update") else None,
                        created=parse_timestamp(r["created_at"]) if r.get("created_at") else None,
                    )
                    for r in p["repos"]
                ),
            )
            for p in doc["projects"]
        ]
    files = {
        rid: [SourceFile(rid, f["path"], f["language"], f["sha256"], f["size"]) for f in listing]
        for rid, listing in doc["files"].items()
    }
    return build_corpus_index(projects, files, doc["extension_table"], doc.get("skipped"))
