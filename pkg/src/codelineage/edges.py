"""The derivation-edge record shared by every detection method."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from codelineage.artifacts import check_schema, csv_text, dumps_json
from codelineage.errors import DataError

METHODS = ("name", "commit", "copyright", "filehash")
EDGES_SCHEMA = "codelineage.edges"
EDGES_VERSION = 1
CSV_HEADER = ("source", "target", "method", "weight", "evidence")


@dataclass(frozen=True, order=True)
class DerivationEdge:
    """``source`` derives from ``target`` according to ``method``."""

    source: str
    target: str
    method: str
    evidence: tuple[str, ...] = field(default=())
    weight: float | None = None

    def __post_init__(self):
        if self.source == self.target:
            raise DataError(f"self-edge on {self.source!r}")
        if self.method not in METHODS:
            raise DataError(f"unknown derivation method {self.method!r}")

    def to_json(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "method": self.method,
            "weight": self.weight,
            "evidence": list(self.evidence),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DerivationEdge":
        return cls(
            source=doc["source"],
            target=doc["target"],
            method=doc["method"],
            evidence=tuple(doc.get("evidence") or ()),
            weight=doc.get("weight"),
        )


def edges_to_json(edges: Sequence[DerivationEdge], method: str | None = None) -> dict:
    return {
        "schema": EDGES_SCHEMA,
        "version": EDGES_VERSION,
        "method": method,
        "edges": [e.to_json() for e in edges],
    }


def dumps_edges(edges: Sequence[DerivationEdge], method: str | None = None) -> str:
    return dumps_json(edges_to_json(edges, method))


def loads_edges(text: str) -> list[DerivationEdge]:
    doc = json.loads(text)
    check_schema(doc, EDGES_SCHEMA, EDGES_VERSION)
    return [DerivationEdge.from_json(e) for e in doc["edges"]]


def edges_csv(edges: Iterable[DerivationEdge]) -> str:
    # evidence is a JSON list so that arbitrary witness text round-trips
    return csv_text(
        CSV_HEADER,
        (
            (e.source, e.target, e.method, e.weight, json.dumps(list(e.evidence), ensure_ascii=False))
            for e in edges
        ),
    )


def parse_edges_csv(text: str) -> list[DerivationEdge]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise DataError(f"edge CSV header must be {','.join(CSV_HEADER)}")
    out = []
    for row in reader:
        weight = row["weight"]
        if weight == "":
            w = None
        else:
            w = float(weight)
            if w.is_integer() and "." not in weight and "e" not in weight.lower():
                w = int(weight)
        out.append(
            DerivationEdge(row["source"], row["target"], row["method"], tuple(json.loads(row["evidence"])), w)
        )
    return out
