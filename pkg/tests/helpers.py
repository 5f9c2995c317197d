"""Small corpus builders shared by the test modules."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

from codelineage.corpus import CorpusIndex, Project, RepositorySnapshot, index_corpus, load_extension_table
from codelineage.demo import write_tree

TABLE = load_extension_table()


def make_index(root: Path, trees: Mapping[str, Mapping[str, bytes | str]], jobs: int = 1) -> CorpusIndex:
    """One single-repository project per entry of ``trees``; repo id is ``r-<pid>``."""
    projects = []
    for pid, files in trees.items():
        path = root / pid
        write_tree(path, files)
        projects.append(Project(pid, pid.title(), repositories=(RepositorySnapshot(f"r-{pid}", pid, path),)))
    return index_corpus(projects, TABLE, jobs)


def byte_oracle(root: Path, c1: str, c2: str) -> tuple[int, int] | None:
    """S_hash numerator and denominator by comparing raw bytes of every file pair."""
    src = [p for p in sorted((root / c1).rglob("*")) if p.is_file() and p.suffix.lstrip(".").lower() in TABLE]
    dst = [p for p in sorted((root / c2).rglob("*")) if p.is_file() and p.suffix.lstrip(".").lower() in TABLE]
    if not src or not dst:
        return None
    dst_bytes = [p.read_bytes() for p in dst]
    matched = sum(1 for p in src if any(p.read_bytes() == d for d in dst_bytes))
    return matched, len(src)
