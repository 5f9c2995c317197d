"""Deterministic reading and writing of on-disk pipeline artifacts."""
from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import Iterable, Sequence

from codelineage.errors import PrerequisiteError, SchemaError


def check_schema(doc: object, schema: str, version: int) -> None:
    if not isinstance(doc, dict) or doc.get("schema") != schema:
        found = doc.get("schema") if isinstance(doc, dict) else type(doc).__name__
        raise SchemaError(f"expected a {schema!r} document, found {found!r}")
    if doc.get("version") != version:
        raise SchemaError(f"{schema}: version {doc.get('version')!r} is not supported (expected {version})")


def dumps_json(doc: object) -> str:
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def write_json(path: Path, doc: object) -> Path:
    return write_text(path, dumps_json(doc))


def csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else _cell(v) for v in row])
    return buf.getvalue()


def _cell(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    return write_text(path, csv_text(header, rows))


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise PrerequisiteError(f"{path.name} not found in {path.parent}; run `{stage}` first")
    return path


def read_json(path: Path, schema: str | None = None, version: int | None = None) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if schema is not None:
        check_schema(doc, schema, version or 1)
    return doc
