"""Feature extraction from Solidity token contracts.

Parsing is textual: comments are stripped, string literals masked, and
declarations recognised by pattern, so files that do not compile are still
analysed.
"""
from __future__ import annotations

import hashlib
import logging
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from codelineage import kernels
from codelineage.errors import CycleError

log = logging.getLogger(__name__)

TEMPLATE_FLAGS = ("firstblood", "upgradeable_golem", "openzeppelin", "safemath")
FEATURES = ("types", "solidity_version", "safemath_version")

_DECL = re.compile(
    r"\b(?:abstract\s+)?(?:contract|interface)\s+([A-Za-z_$][\w$]*)\s*(?:\bis\b([^{;]*))?\{"
)
_PRAGMA = re.compile(r"^[ \t]*pragma\s+solidity\b([^;\n]*)", re.MULTILINE)
_VERSION = re.compile(r"\d+(?:\.(?:\d+|[xX*]))*")
_SAFEMATH = re.compile(r"\b(?:contract|library)\s+SafeMath\s*\{")
_IDENT = re.compile(r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*")

_TEMPLATE_PATTERNS = {
    "firstblood": re.compile(r"\bStandardToken\b"),
    "upgradeable_golem": re.compile(r"\bUpgradeableToken\b"),
    "openzeppelin": re.compile(r"\b(?:open)?zeppelin\b", re.IGNORECASE),
    "safemath": re.compile(r"\bSafeMath\b"),
}


def strip_comments(text: str) -> str:
    stripped, unterminated = kernels.strip_comments(text)
    if unterminated:
        log.warning("unterminated block comment; stripped to end of file")
    return stripped


def extract_pragma_versions(text: str) -> list[str]:
    """Lower-bound version of every ``pragma solidity`` line, in order."""
    out = []
    for m in _PRAGMA.finditer(text):
        v = _VERSION.search(m.group(1))
        if v:
            out.append(v.group(0))
    return out


@dataclass(frozen=True)
class ContractGraph:
    declared: Mapping[str, tuple[str, ...]]
    terminal: tuple[str, ...]
    ancestors: Mapping[str, frozenset[str]]

    @property
    def types(self) -> dict[str, frozenset[str]]:
        """Type sets of terminal contracts only."""
        return {name: self.ancestors[name] for name in self.terminal}


def _parents(clause: str | None) -> list[str]:
    if not clause:
        return []
    # drop constructor arguments such as ``Ownable(msg.sender)``
    depth = 0
    flat = []
    for ch in clause:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0:
            flat.append(ch)
    names = []
    for part in "".join(flat).split(","):
        m = _IDENT.search(part)
        if m:
            names.append(m.group(0))
    return names


def parse_declarations(text: str) -> dict[str, tuple[str, ...]]:
    """Direct-parent map of every contract/interface declared in ``text``."""
    masked = kernels.mask_strings(text)
    declared: dict[str, list[str]] = {}
    for m in _DECL.finditer(masked):
        parents = declared.setdefault(m.group(1), [])
        for p in _parents(m.group(2)):
            if p not in parents:
                parents.append(p)
    return {k: tuple(v) for k, v in declared.items()}


def transitive_ancestors(declared: Mapping[str, Sequence[str]]) -> dict[str, frozenset[str]]:
    """Ancestor set of every declared name; raises ``CycleError`` on cycles.

    Parents that are not declared are kept as opaque type names.
    """
    memo: dict[str, frozenset[str]] = {}
    visiting: list[str] = []

    def visit(name: str) -> frozenset[str]:
        if name in memo:
            return memo[name]
        if name in visiting:
            raise CycleError(visiting[visiting.index(name):] + [name])
        visiting.append(name)
        acc: set[str] = set()
        for parent in declared.get(name, ()):
            acc.add(parent)
            acc |= visit(parent)
        visiting.pop()
        memo[name] = frozenset(acc)
        return memo[name]

    return {name: visit(name) for name in declared}


def extract_contract_graph(text: str) -> ContractGraph:
    declared = parse_declarations(text)
    used = {p for parents in declared.values() for p in parents}
    return ContractGraph(
        declared=declared,
        terminal=tuple(n for n in declared if n not in used),
        ancestors=transitive_ancestors(declared),
    )


def safemath_block(text: str) -> str | None:
    m = _SAFEMATH.search(kernels.mask_strings(text))
    if m is None:
        return None
    close = kernels.match_brace(text, m.end() - 1)
    if close < 0:
        log.warning("unbalanced braces in SafeMath block")
        return None
    return text[m.start(): close + 1]


def fingerprint_safemath(text: str) -> str | None:
    block = safemath_block(text)
    if block is None:
        return None
    return hashlib.sha256(block.encode("utf-8")).hexdigest()


def detect_templates(text: str) -> frozenset[str]:
    # import paths live in string literals, so strings are searched too
    return frozenset(flag for flag, pat in _TEMPLATE_PATTERNS.items() if pat.search(text))


@dataclass(frozen=True)
class ContractProfile:
    contract_file_id: str
    origin: str
    declared_contracts: Mapping[str, tuple[str, ...]]
    terminal_contracts: tuple[str, ...]
    types: Mapping[str, frozenset[str]]
    all_types: Mapping[str, frozenset[str]]
    pragma_versions: tuple[str, ...]
    safemath_fingerprint: str | None
    template_flags: frozenset[str]
    error: str | None = None

    def feature_values(self, feature: str) -> set[str]:
        if feature == "types":
            return set().union(*self.types.values()) if self.types else set()
        if feature == "solidity_version":
            return {self.pragma_versions[0]} if self.pragma_versions else set()
        if feature == "safemath_version":
            return {self.safemath_fingerprint} if self.safemath_fingerprint else set()
        raise ValueError(f"unknown feature {feature!r}")

    def to_json(self) -> dict:
        return {
            "id": self.contract_file_id,
            "origin": self.origin,
            "declared_contracts": {k: list(v) for k, v in sorted(self.declared_contracts.items())},
            "terminal_contracts": list(self.terminal_contracts),
            "types": {k: sorted(v) for k, v in sorted(self.types.items())},
            "all_types": {k: sorted(v) for k, v in sorted(self.all_types.items())},
            "pragma_versions": list(self.pragma_versions),
            "safemath_fingerprint": self.safemath_fingerprint,
            "template_flags": sorted(self.template_flags),
            "error": self.error,
        }


def profile_contract(source: str, contract_file_id: str, origin: str = "deployed") -> ContractProfile:
    text = strip_comments(source)
    error = None
    try:
        graph = extract_contract_graph(text)
        declared, terminal = graph.declared, graph.terminal
        types, all_types = graph.types, graph.ancestors
    except CycleError as exc:
        error = str(exc)
        declared, terminal, types, all_types = parse_declarations(text), (), {}, {}
    return ContractProfile(
        contract_file_id=contract_file_id,
        origin=origin,
        declared_contracts=declared,
        terminal_contracts=terminal,
        types=types,
        all_types=all_types,
        pragma_versions=tuple(extract_pragma_versions(text)),
        safemath_fingerprint=fingerprint_safemath(text),
        template_flags=detect_templates(text),
        error=error,
    )


def profile_file(path: Path, contract_file_id: str, origin: str) -> ContractProfile:
    return profile_contract(path.read_text(encoding="utf-8", errors="replace"), contract_file_id, origin)


@dataclass(frozen=True)
class PopularityCdf:
    feature: str
    origin: str | None
    ranked_counts: tuple[tuple[str, int], ...]
    cumulative_pct: tuple[float, ...]
    population: int
    distinct_values: int
    singleton_values: int
    contracts_with_unique_value: int = 0


def aggregate_cdf(
    profiles: Iterable[ContractProfile], feature: str, origin: str | None = None
) -> PopularityCdf:
    """Rank feature values by the number of contracts carrying them.

    ``cumulative_pct[i]`` is the share of contracts (among those with at
    least one value) carrying any of the top ``i + 1`` values.
    """
    if feature not in FEATURES:
        raise ValueError(f"unknown feature {feature!r}")
    chosen = [p for p in profiles if origin is None or p.origin == origin]
    if not chosen:
        raise ValueError("no contracts match the origin filter")
    value_sets = [p.feature_values(feature) for p in chosen]
    value_sets = [vs for vs in value_sets if vs]
    counts = Counter(v for vs in value_sets for v in vs)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    rank_of = {v: i for i, (v, _) in enumerate(ranked)}
    # a contract is first covered at the best rank among its values
    first_cover = Counter(min(rank_of[v] for v in vs) for vs in value_sets)
    population = len(value_sets)
    cumulative, covered = [], 0
    for i in range(len(ranked)):
        covered += first_cover.get(i, 0)
        cumulative.append(100.0 * covered / population)
    singletons = {v for v, c in counts.items() if c == 1}
    return PopularityCdf(
        feature=feature,
        origin=origin,
        ranked_counts=tuple(ranked),
        cumulative_pct=tuple(cumulative),
        population=population,
        distinct_values=len(counts),
        singleton_values=len(singletons),
        contracts_with_unique_value=sum(1 for vs in value_sets if vs & singletons),
    )


def template_counts(profiles: Sequence[ContractProfile]) -> list[tuple[str, str, int, float]]:
    """Rows ``(template, origin, count, pct)`` in the style of a template-reuse table."""
    rows = []
    for origin in sorted({p.origin for p in profiles}):
        group = [p for p in profiles if p.origin == origin]
        for flag in TEMPLATE_FLAGS:
            n = sum(1 for p in group if flag in p.template_flags)
            rows.append((flag, origin, n, round(100.0 * n / len(group), 1)))
    return rows
