"""Name-prefix derivations: "Bitcoin Planet" borrows from "Bitcoin"."""
from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from codelineage.corpus import Project
from codelineage.edges import DerivationEdge
from codelineage.selection import normalize_name


def load_stoplist(path: str | Path | None = None) -> set[str]:
    if path is None:
        text = resources.files("codelineage.data").joinpath("stoplist.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return {
        normalize_name(line)
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    }


def detect_name_derivations(projects: Sequence[Project], stoplist: Iterable[str] = ()) -> list[DerivationEdge]:
    stop = {normalize_name(s) for s in stoplist}
    by_norm: dict[str, list[Project]] = {}
    for p in projects:
        key = normalize_name(p.name)
        if key:
            by_norm.setdefault(key, []).append(p)

    edges = []
    for derived in projects:
        norm = normalize_name(derived.name)
        # every proper prefix of the derived name is a candidate origin name
        for cut in range(1, len(norm)):
            prefix = norm[:cut]
            if prefix in stop:
                continue
            for origin in by_norm.get(prefix, ()):
                if origin.project_id == derived.project_id:
                    continue
                edges.append(
                    DerivationEdge(
                        source=derived.project_id,
                        target=origin.project_id,
                        method="name",
                        evidence=(derived.name, origin.name),
                    )
                )
    edges.sort(key=lambda e: (e.target, e.source))
    return edges
