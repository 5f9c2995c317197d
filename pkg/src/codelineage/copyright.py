"""Copyright-attribution derivations.

Attributions come from COPYING/LICENSE files when a repository has any,
otherwise from the header lines of every source file. Each attribution line
is resolved to at most one project by, in order: a project name appearing
in the line, an alias, or a known individual contributor.
"""
from __future__ import annotations

import csv
import io
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from codelineage.corpus import Project, RepositorySnapshot, file_extension, iter_tree
from codelineage.edges import DerivationEdge
from codelineage.errors import DataError

log = logging.getLogger(__name__)

COPYING_WINDOW = 50
HEADER_WINDOW = 30
MAX_WITNESSES = 5

_LICENSE_NAME = re.compile(r"(?:copying|license)(?:\..*)?", re.IGNORECASE)
_COPYRIGHT = re.compile(r"copyright", re.IGNORECASE)
_WS = re.compile(r"\s+")
_WORDS = re.compile(r"[^a-z0-9]+")


def phrase_key(text: str) -> str:
    """Lowercase words joined by single spaces, padded for whole-word search."""
    words = _WORDS.sub(" ", text.lower()).strip()
    return f" {words} " if words else ""


@dataclass(frozen=True)
class Attribution:
    repo_id: str
    source: str  # "copying_file" or "source_header"
    raw_line: str
    path: str = ""


@dataclass(frozen=True)
class ResolutionMaps:
    aliases: Mapping[str, str]
    authors: Mapping[str, str]
    library_authors: tuple[str, ...] = ()

    @classmethod
    def load(
        cls,
        alias_path: str | Path | None = None,
        author_path: str | Path | None = None,
        library_path: str | Path | None = None,
    ) -> "ResolutionMaps":
        return cls(
            aliases=load_pattern_map(_data_text("aliases.csv", alias_path)),
            authors=load_pattern_map(_data_text("authors.csv", author_path)),
            library_authors=tuple(
                sorted(
                    {
                        phrase_key(line)
                        for line in _data_text("library_authors.txt", library_path).splitlines()
                        if line.strip() and not line.lstrip().startswith("#")
                    },
                    key=lambda k: (-len(k), k),
                )
            ),
        )


def _data_text(name: str, path: str | Path | None) -> str:
    if path is None:
        return resources.files("codelineage.data").joinpath(name).read_text("utf-8")
    return Path(path).read_text("utf-8")


def load_pattern_map(text: str) -> dict[str, str]:
    """Two-column CSV ``pattern,project_id``; an optional header row is skipped."""
    out: dict[str, str] = {}
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 2:
            raise DataError(f"pattern map line {lineno}: expected two columns")
        if lineno == 1 and row[0].strip().lower() == "pattern":
            continue
        key = phrase_key(row[0])
        if key:
            out[key] = row[1].strip()
    return out


def _copyright_lines(path: Path, window: int) -> list[str]:
    lines = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for n, line in enumerate(fh):
            if n >= window:
                break
            if _COPYRIGHT.search(line):
                lines.append(_WS.sub(" ", line).strip())
    return lines


def extract_attributions(
    repo: RepositorySnapshot,
    extension_table: Mapping[str, str],
    copying_window: int = COPYING_WINDOW,
    header_window: int = HEADER_WINDOW,
) -> list[Attribution]:
    root = Path(repo.root_path)
    tree = sorted(iter_tree(root))
    licenses = [(rel, p) for rel, p in tree if _LICENSE_NAME.fullmatch(p.name)]
    if licenses:
        source, candidates, window = "copying_file", licenses, copying_window
    else:
        source = "source_header"
        candidates = [(rel, p) for rel, p in tree if file_extension(p.name) in extension_table]
        window = header_window
    seen: set[str] = set()
    out: list[Attribution] = []
    for rel, path in candidates:
        try:
            lines = _copyright_lines(path, window)
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", path, exc)
            continue
        for line in lines:
            if line not in seen:
                seen.add(line)
                out.append(Attribution(repo.repo_id, source, line, rel))
    return out


class Resolver:
    """Resolves attribution lines against a fixed project set."""

    def __init__(self, projects: Sequence[Project], maps: ResolutionMaps):
        self.maps = maps
        self._ids = {p.project_id for p in projects}
        self._by_name: dict[str, str] = {}
        for p in sorted(projects, key=lambda p: p.project_id):
            key = phrase_key(p.name)
            if key and key not in self._by_name and key not in maps.library_authors:
                self._by_name[key] = p.project_id
        self._names_longest_first = sorted(self._by_name, key=lambda k: (-len(k), k))

    def _target(self, value: str) -> str | None:
        if value in self._ids:
            return value
        return self._by_name.get(phrase_key(value))

    def resolve(self, line: str) -> str | None:
        key = phrase_key(line)
        for lib in self.maps.library_authors:
            key = key.replace(lib, " ")
        for name in self._names_longest_first:
            if name in key:
                return self._by_name[name]
        for table in (self.maps.aliases, self.maps.authors):
            for pattern in sorted(table, key=lambda k: (-len(k), k)):
                if pattern in key:
                    target = self._target(table[pattern])
                    if target is not None:
                        return target
        return None


def resolve_attribution(
    attr: Attribution | str, projects: Sequence[Project], maps: ResolutionMaps
) -> str | None:
    line = attr.raw_line if isinstance(attr, Attribution) else attr
    return Resolver(projects, maps).resolve(line)


def detect_copyright_derivations(
    projects: Sequence[Project],
    attributions: Mapping[str, Sequence[Attribution]],
    resolver: Resolver,
) -> list[DerivationEdge]:
    owner = {r.repo_id: p.project_id for p in projects for r in p.repositories}
    witnesses: dict[tuple[str, str], list[str]] = {}
    for repo_id in sorted(attributions):
        source = owner[repo_id]
        for attr in attributions[repo_id]:
            target = resolver.resolve(attr.raw_line)
            if target is None or target == source:
                continue
            lines = witnesses.setdefault((source, target), [])
            if attr.raw_line not in lines:
                lines.append(attr.raw_line)
    return [
        DerivationEdge(src, tgt, "copyright", tuple(lines[:MAX_WITNESSES]), len(lines))
        for (src, tgt), lines in sorted(witnesses.items())
    ]


def in_degree(edges: Iterable[DerivationEdge]) -> list[tuple[str, int]]:
    counts: dict[str, int] = {}
    for e in edges:
        counts[e.target] = counts.get(e.target, 0) + 1
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
